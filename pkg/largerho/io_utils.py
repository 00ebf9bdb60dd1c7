import csv
import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, Iterable, Optional, Sequence, TextIO

import numpy as np
from django.conf import settings
from django.db import DatabaseError

from . import __version__
from .models import Run

logger = logging.getLogger(__name__)


def output_dir() -> Path:
    path = Path(settings.LARGERHO_OUTPUT_DIR)
    path.mkdir(parents=True, exist_ok=True)
    return path


def format_value(value: Any) -> str:
    if isinstance(value, bool) or value is None:
        return "" if value is None else str(value).lower()
    if isinstance(value, float):
        return "nan" if math.isnan(value) else f"{value:.15g}"
    if hasattr(value, "value"):  # enums
        return str(value.value)
    return str(value)


def clean_json(value: Any) -> Any:
    """Non-finite floats become None; tuples become lists."""
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {str(k): clean_json(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [clean_json(v) for v in value]
    return value


def header_lines(command: str, config: Dict[str, Any], seed: Optional[int] = None) -> list:
    lines = [f"largerho {__version__} {command}", f"config: {json.dumps(config, sort_keys=True, default=str)}"]
    if seed is not None:
        lines.append(f"seed: {seed}")
    return lines


def write_csv(
    path: Optional[Path],
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    header: Sequence[str] = (),
    stream: Optional[TextIO] = None,
) -> None:
    """`#` header lines, then the column row, then one row per record (15 significant digits)."""
    if path is None:
        _write_csv(stream or sys.stdout, columns, rows, header)
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        _write_csv(f, columns, rows, header)
    logger.info(f"wrote {path}")


def _write_csv(f: TextIO, columns: Sequence[str], rows: Iterable[Sequence[Any]], header: Sequence[str]) -> None:
    for line in header:
        f.write(f"# {line}\n")
    writer = csv.writer(f, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_value(v) for v in row])


def append_jsonl(path_name: str, record: Dict[str, Any]) -> None:
    file_path = output_dir() / path_name
    with file_path.open("a", encoding="utf-8") as f:
        f.write(json.dumps(clean_json(record), ensure_ascii=False, sort_keys=True, default=str) + "\n")


def write_jsonl(path: Optional[Path], records: Iterable[Dict[str, Any]], stream: Optional[TextIO] = None) -> None:
    """One sorted-key JSON object per line, to path or the stream."""
    lines = [json.dumps(clean_json(r), ensure_ascii=False, sort_keys=True, default=str) for r in records]
    if path is None:
        for line in lines:
            (stream or sys.stdout).write(line + "\n")
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    logger.info(f"wrote {path}")


def write_json(path: Path, record: Dict[str, Any]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        json.dump(clean_json(record), f, ensure_ascii=False, sort_keys=True, indent=2, default=str)
        f.write("\n")


def record_run(command: str, config: Dict[str, Any], summary: Dict[str, Any], status: str = "OK"):
    """Store a Run row; a missing or unmigrated database is not fatal."""
    try:
        return Run.objects.create(command=command, config=clean_json(config), summary=clean_json(summary), status=status)
    except DatabaseError as exc:
        logger.warning(f"run not recorded in the database: {exc}")
        return None
