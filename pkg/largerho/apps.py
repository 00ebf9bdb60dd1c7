from django.apps import AppConfig


class LargerhoConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'largerho'
    verbose_name = 'Large-Rayleigh-number Lorenz lab'
