import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from ..exceptions import ConfigError, LabError
from ..io_utils import append_jsonl, clean_json, header_lines, record_run
from ..params import Params
from ..runconfig import resolve
from ..serializers import validate_config

logger = logging.getLogger(__name__)

RUN_LOG = "runs.jsonl"
# options Django adds to every command; everything else is a config override
DJANGO_OPTIONS = {"verbosity", "settings", "pythonpath", "traceback", "no_color", "force_color", "skip_checks", "config", "stdout", "stderr"}
# validated values that are objects rather than plain config
PRIVATE_KEYS = ("lambda_schedule",)


class LabCommand(BaseCommand):
    """
    Shared plumbing: common flags, config resolution and validation, the run
    registry and the exit-code contract (0 ok, 1 numerical failure, 2 bad config).

    Subclasses set `section` and implement `run(config) -> (summary, ok)`.
    """

    section = ""

    def add_arguments(self, parser):
        parser.add_argument("--config", type=str, help="Config file path or bundled name (flagship, hysteresis, stenflo)")
        parser.add_argument("--rho", type=float)
        parser.add_argument("--sigma", type=float)
        parser.add_argument("--beta", type=float)
        parser.add_argument("--lambda", dest="lam", type=float)
        parser.add_argument("--rtol", type=float)
        parser.add_argument("--atol", type=float)
        parser.add_argument("--seed", type=int)
        parser.add_argument("--out", type=str, help="Output file; stdout when omitted")
        parser.add_argument("--jobs", type=int)
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def defaults(self) -> Dict[str, Any]:
        lab = settings.LARGERHO
        return {"rtol": lab["RTOL"], "atol": lab["ATOL"], "jobs": lab["JOBS"], "seed": lab["SEED"], "beta": lab["BETA"]}

    def resolve_config(self, options: Dict[str, Any]) -> Dict[str, Any]:
        overrides = {k: v for k, v in options.items() if k not in DJANGO_OPTIONS}
        raw = resolve(self.section, self.defaults(), overrides, options.get("config"), settings.LARGERHO_CONFIG_DIR)
        return validate_config(self.section, raw)

    def public_config(self, config: Dict[str, Any]) -> Dict[str, Any]:
        return clean_json({k: v for k, v in config.items() if k not in PRIVATE_KEYS})

    def header(self, config: Dict[str, Any]) -> list:
        return header_lines(self.section, self.public_config(config), config.get("seed"))

    def out_path(self, config: Dict[str, Any], suffix: str = "") -> Optional[Path]:
        """The --out path, or a sibling `<stem><suffix><ext>` of it; None means stdout."""
        out = config.get("out")
        if not out:
            return None
        path = Path(out)
        return path.with_name(f"{path.stem}{suffix}{path.suffix}") if suffix else path

    def params(self, config: Dict[str, Any]) -> Params:
        return Params(sigma=config["sigma"], beta=config["beta"], rho=config.get("rho"))

    def run(self, config: Dict[str, Any]) -> Tuple[Dict[str, Any], bool]:
        raise NotImplementedError

    def handle(self, *args, **options):
        try:
            config = self.resolve_config(options)
        except ConfigError as exc:
            logger.error(f"{self.section}: {exc}")
            record_run(self.section, {}, {"error": str(exc)}, "CONFIG_ERROR")
            raise CommandError(str(exc), returncode=exc.exit_code)

        public = self.public_config(config)
        try:
            summary, ok = self.run(config)
        except LabError as exc:
            status = "CONFIG_ERROR" if isinstance(exc, ConfigError) else "NUMERICAL_FAILURE"
            logger.error(f"{self.section} failed: {exc}")
            record_run(self.section, public, {"error": str(exc), "type": type(exc).__name__}, status)
            append_jsonl(RUN_LOG, {"command": self.section, "config": public, "status": status, "error": str(exc)})
            raise CommandError(f"{type(exc).__name__}: {exc}", returncode=exc.exit_code)

        status = "OK" if ok else "NUMERICAL_FAILURE"
        record_run(self.section, public, summary, status)
        append_jsonl(RUN_LOG, {"command": self.section, "config": public, "status": status, "summary": summary})
        if not ok:
            raise CommandError(f"{self.section}: one or more checks failed (see {RUN_LOG})", returncode=1)
        self.stderr.write(self.style.SUCCESS(f"{self.section} finished"))
