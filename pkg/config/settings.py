import os
from pathlib import Path
from dotenv import load_dotenv

BASE_DIR = Path(__file__).resolve().parent.parent
load_dotenv(BASE_DIR / '.env')

# Try to import dj_database_url, use SQLite if not available
try:
    import dj_database_url
    HAS_DJ_DATABASE_URL = True
except ImportError:
    HAS_DJ_DATABASE_URL = False


SECRET_KEY = os.getenv('SECRET_KEY', 'largerho-local-only')
DEBUG = os.getenv('DEBUG', 'False').lower() == 'true'
ALLOWED_HOSTS = []


# Application definition
INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'rest_framework',
    'largerho',
]

# Database
if HAS_DJ_DATABASE_URL and os.getenv('DATABASE_URL'):
    DATABASES = {
        'default': dj_database_url.config(
            default=os.getenv('DATABASE_URL'),
            conn_max_age=600
        )
    }
else:
    DATABASES = {
        'default': {
            'ENGINE': 'django.db.backends.sqlite3',
            'NAME': BASE_DIR / 'db.sqlite3',
        }
    }

LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# REST Framework (serializers only, no views)
REST_FRAMEWORK = {
    "DEFAULT_RENDERER_CLASSES": [
        "rest_framework.renderers.JSONRenderer",
    ]
}

# Numerical defaults; the [common] section of a run config and CLI flags override them
LARGERHO = {
    "RTOL": float(os.getenv('LARGERHO_RTOL', '1e-9')),
    "ATOL": float(os.getenv('LARGERHO_ATOL', '1e-9')),
    "JOBS": int(os.getenv('LARGERHO_JOBS', '1')),
    "REGION_TOL": 1e-12,
    "SEED": int(os.getenv('LARGERHO_SEED', '12345')),
    "BETA": 8.0 / 3.0,
    "SIGMA": 10.0,
}

LARGERHO_OUTPUT_DIR = Path(os.getenv('LARGERHO_OUTPUT_DIR', BASE_DIR / 'output'))
LARGERHO_CONFIG_DIR = BASE_DIR / 'data'

LOG_LEVEL = os.getenv('LARGERHO_LOG', 'WARNING').upper()

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "plain": {"format": "%(levelname)s %(name)s: %(message)s"},
    },
    "handlers": {
        "stderr": {
            "class": "logging.StreamHandler",
            "formatter": "plain",
        },
    },
    "loggers": {
        "largerho": {"handlers": ["stderr"], "level": LOG_LEVEL, "propagate": False},
        "django": {"handlers": ["stderr"], "level": "WARNING"},
    },
}
