"""
Run configuration files.

A config is a flat `key = value` file with a [common] section and one section
per command. Values merge as: lab defaults < [common] < [command] < CLI flags.
"""
import configparser
import logging
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

from .exceptions import ConfigError

logger = logging.getLogger(__name__)

COMMON_SECTION = "common"
COMMAND_SECTIONS = ("branch", "simulate", "hysteresis", "orbit", "verify", "stenflo", "orbit_sample")
# keys are case-folded, so the upper-case fields come back through here
KEY_ALIASES = {"lambda": "lam", "s": "s_rot", "a": "A", "b": "B", "n": "N"}
LIST_KEYS = ("x0",)


def normalize_key(key: str) -> str:
    key = key.strip().lower().replace("-", "_")
    return KEY_ALIASES.get(key, key)


def locate(ref: str, config_dir: Path) -> Path:
    """A path, or the name of a bundled config (`flagship` -> data/flagship.cfg)."""
    path = Path(ref)
    if path.is_file():
        return path
    bundled = Path(config_dir) / (ref if path.suffix else f"{ref}.cfg")
    if bundled.is_file():
        return bundled
    raise ConfigError(f"config '{ref}' is neither a file nor a bundled config in {config_dir}")


def read_config(path: Path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with Path(path).open(encoding="utf-8") as f:
            parser.read_file(f)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for section in parser.sections():
        if section != COMMON_SECTION and section.replace("-", "_") not in COMMAND_SECTIONS:
            logger.warning(f"{path}: unknown section [{section}] ignored")
    return parser


def section_values(parser: configparser.ConfigParser, command: str) -> Dict[str, str]:
    values = {}
    for name in (COMMON_SECTION, command, command.replace("_", "-")):
        if parser.has_section(name):
            values.update({normalize_key(k): v for k, v in parser.items(name)})
    return values


def parse_schedule(text: str) -> List[Tuple[float, float]]:
    """`0:0.3, 300:2.4, 600:0.3` -> [(0, 0.3), (300, 2.4), (600, 0.3)]."""
    points = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            t, lam = item.split(":")
            points.append((float(t), float(lam)))
        except ValueError as exc:
            raise ConfigError(f"schedule breakpoint '{item}' is not t:lambda") from exc
    return points


def parse_list(text: Any) -> List[float]:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"expected a comma-separated list of numbers, got '{text}'") from exc


def resolve(
    command: str,
    defaults: Mapping[str, Any],
    overrides: Mapping[str, Any],
    config_ref: Optional[str] = None,
    config_dir: Optional[Path] = None,
) -> Dict[str, Any]:
    """
    Merge the layers into one raw dict (strings from files, typed values from flags).

    Args:
        command: Command section to read
        defaults: Lab defaults
        overrides: CLI values; None means "not given"
        config_ref: Config path or bundled name
        config_dir: Directory of bundled configs

    Returns:
        Unvalidated configuration
    """
    merged: Dict[str, Any] = {normalize_key(k): v for k, v in defaults.items()}
    if config_ref:
        path = locate(config_ref, config_dir or Path("."))
        merged.update(section_values(read_config(path), command))
        logger.debug(f"{command}: loaded {path}")
    given = {normalize_key(k): v for k, v in overrides.items() if v is not None}
    # lambda and sigma are one knob at fixed beta; a flag for either replaces both file values
    for key, partner in (("lam", "sigma"), ("sigma", "lam")):
        if key in given and partner not in given:
            merged.pop(partner, None)
    merged.update(given)
    for key in LIST_KEYS:
        if merged.get(key) not in (None, ""):
            merged[key] = parse_list(merged[key])
    return merged
