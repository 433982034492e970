"""Result tables: CSV/JSON output and the (x, y) CSV reader used by `fit`."""

import csv
import io
import json
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import List, Mapping, Optional, Sequence, TextIO, Tuple, Union

from .config import RunConfig
from .errors import DomainError, OutputError, ValidationError

logger = logging.getLogger(__name__)

SIDECAR_SUFFIX = ".run.yaml"


@dataclass(frozen=True)
class Table:
    columns: Tuple[str, ...]
    rows: Tuple[tuple, ...]

    def __post_init__(self):
        for i, row in enumerate(self.rows):
            if len(row) != len(self.columns):
                raise ValidationError(
                    f"row {i} has {len(row)} values for {len(self.columns)} columns"
                )

    @classmethod
    def from_rows(cls, columns: Sequence[str], rows) -> "Table":
        return cls(columns=tuple(columns), rows=tuple(tuple(r) for r in rows))

    def records(self) -> List[dict]:
        return [dict(zip(self.columns, row)) for row in self.rows]


Records = Union[Table, Mapping]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def render_csv(table: Table) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def render_json(records: Records) -> str:
    data = records.records() if isinstance(records, Table) else dict(records)
    return json.dumps(data, indent=2) + "\n"


def sidecar_path(out: Path) -> Path:
    return out.with_name(out.name + SIDECAR_SUFFIX)


def emit(records: Records, cfg: RunConfig, stream: Optional[TextIO] = None) -> Optional[Path]:
    """Write records in cfg.fmt to cfg.out, or to ``stream`` (stdout) without a path.

    A mapping is always written as a JSON object. Returns the path written, if any.
    """
    if isinstance(records, Table) and not records.rows:
        raise ValidationError("nothing to write: the result table is empty")
    if not isinstance(records, Table) and not records:
        raise ValidationError("nothing to write: the result is empty")

    if isinstance(records, Table) and cfg.fmt == "csv":
        text = render_csv(records)
    else:
        text = render_json(records)

    if cfg.out is None:
        (stream or sys.stdout).write(text)
        return None

    try:
        cfg.out.parent.mkdir(parents=True, exist_ok=True)
        cfg.out.write_text(text)
        cfg.save(sidecar_path(cfg.out))
    except OSError as e:
        raise OutputError(f"cannot write {cfg.out}: {e}") from e
    logger.info("wrote %s", cfg.out)
    return cfg.out


def _is_numeric(row: Sequence[str]) -> bool:
    try:
        [float(v) for v in row]
    except ValueError:
        return False
    return True


def read_xy_csv(path: Path, y_column: Optional[str] = None) -> List[Tuple[float, float]]:
    """(x, y) pairs from a CSV file: x is the first column, y the second or
    the column named ``y_column`` in the header row."""
    try:
        with open(path, newline="") as f:
            rows = [r for r in csv.reader(f) if r and any(v.strip() for v in r)]
    except OSError as e:
        raise OutputError(f"cannot read {path}: {e}") from e
    if not rows:
        raise DomainError(f"{path}: no data rows")

    y_idx = 1
    if not _is_numeric(rows[0]):
        header = [h.strip() for h in rows.pop(0)]
        if y_column is not None:
            if y_column not in header:
                raise DomainError(f"{path}: no column named {y_column!r} in {header}")
            y_idx = header.index(y_column)
    elif y_column is not None:
        raise DomainError(f"{path}: has no header row to look up {y_column!r}")

    points = []
    for lineno, row in enumerate(rows, start=1):
        if len(row) <= y_idx:
            raise DomainError(f"{path}: data row {lineno} has {len(row)} columns")
        try:
            x, y = float(row[0]), float(row[y_idx])
        except ValueError as e:
            raise DomainError(f"{path}: data row {lineno} is not numeric ({e})") from e
        if not (math.isfinite(x) and math.isfinite(y)):
            raise DomainError(f"{path}: data row {lineno} is not finite")
        points.append((x, y))
    return points
