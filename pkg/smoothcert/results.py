"""Result records and the CSV/JSON output formats."""

import csv
import json
import math
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

CERTIFY_COLUMNS = [
    "method", "status", "family", "d", "sigma", "eta", "k", "T", "A", "B",
    "radius", "radius_linf", "iterations", "residual_A", "residual_B",
    "log_neg_nu1", "log_neg_combined", "message",
]


def schema_name(kind: str) -> str:
    return f"smoothcert.{kind}/{SCHEMA_VERSION}"


@dataclass
class CertificationResult:
    """Outcome of one certification: radius plus solver diagnostics."""

    method: str
    radius: float
    status: str = "certified"
    iterations: int = 0
    residuals: Dict[str, float] = field(default_factory=dict)
    dual: Optional[Dict[str, float]] = None
    spec: Dict[str, Any] = field(default_factory=dict)
    A: Optional[float] = None
    B: Optional[float] = None
    message: str = ""

    @property
    def certified(self) -> bool:
        return self.radius > 0

    def to_record(self) -> Dict[str, Any]:
        d = self.spec.get("d")
        record: Dict[str, Any] = {
            "method": self.method,
            "status": self.status,
            "family": self.spec.get("family"),
            "d": d,
            "sigma": self.spec.get("sigma"),
            "eta": self.spec.get("eta"),
            "k": self.spec.get("k"),
            "T": self.spec.get("T"),
            "A": self.A,
            "B": self.B,
            "radius": self.radius,
            "radius_linf": self.radius / math.sqrt(d) if d else None,
            "iterations": self.iterations,
            "residual_A": self.residuals.get("A"),
            "residual_B": self.residuals.get("B"),
            "log_neg_nu1": (self.dual or {}).get("log_neg_nu1"),
            "log_neg_combined": (self.dual or {}).get("log_neg_combined"),
            "message": self.message,
        }
        return record


def _clean(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def write_csv(records: Iterable[Dict[str, Any]], path: Path, kind: str,
              columns: Optional[Sequence[str]] = None) -> Path:
    """Write records with a leading ``# schema:`` line and a fixed column order."""
    records = list(records)
    if columns is None:
        columns = list(records[0].keys()) if records else []
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        f.write(f"# schema: {schema_name(kind)}\n")
        writer = csv.DictWriter(f, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for record in records:
            writer.writerow({key: _clean(record.get(key)) for key in columns})
    logger.info(f"Wrote {len(records)} records to {path}")
    return path


def write_json(records: Iterable[Dict[str, Any]], path: Path, kind: str) -> Path:
    records = [clean_record(r) for r in records]
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump({"schema": schema_name(kind), "records": records}, f, indent=2, sort_keys=False)
        f.write("\n")
    logger.info(f"Wrote {len(records)} records to {path}")
    return path


def write_records(records: List[Dict[str, Any]], path: Path, kind: str, fmt: str = "csv",
                  columns: Optional[Sequence[str]] = None) -> Path:
    if fmt == "csv":
        return write_csv(records, path, kind, columns)
    if fmt == "json":
        return write_json(records, path, kind)
    raise ValueError(f"Unknown output format: {fmt}")


def read_csv(path: Path) -> List[Dict[str, str]]:
    """Read a file written by write_csv, skipping the schema line."""
    with open(path, "r", encoding="utf-8") as f:
        lines = [line for line in f if not line.startswith("#")]
    return list(csv.DictReader(lines))


def format_record(record: Dict[str, Any]) -> str:
    """One-line human summary of a certification record."""
    parts = [f"{record['method']}", f"radius={record['radius']:.6f}", f"status={record['status']}"]
    if record.get("A") is not None:
        parts.append(f"A={record['A']}")
    if record.get("B") is not None:
        parts.append(f"B={record['B']}")
    parts.append(f"iterations={record.get('iterations', 0)}")
    return " ".join(parts)


def clean_record(record: Dict[str, Any]) -> Dict[str, Any]:
    """Copy of a record with non-finite floats spelled as strings, as in the output files."""
    return {key: _clean(value) for key, value in record.items()}
