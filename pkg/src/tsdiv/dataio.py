"""Reading UCR-style datasets and writing result reports.

UCR text format: one series per line, the first field is an integer class
label and the remaining fields are the observations.  Fields may be separated
by commas, tabs or spaces.  Trailing ``NaN`` padding (variable-length archive
variants) is dropped.

Multivariate files start with a header line ``#dims=<d>``; every following
line holds the label and then ``T * d`` values in time-major order
(``x_1[0..d-1], x_2[0..d-1], ...``).
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError, ParameterError

_SPLIT = re.compile(r"[,\s]+")
_DIMS = re.compile(r"^#\s*dims\s*=\s*(\d+)\s*$", re.IGNORECASE)


@dataclass
class LabeledDataset:
    series: list[np.ndarray]
    labels: list[int]
    name: str = ""

    def __post_init__(self):
        if len(self.series) != len(self.labels):
            raise DataError(f"{len(self.series)} series but {len(self.labels)} labels")

    def __len__(self):
        return len(self.series)

    @property
    def classes(self) -> list[int]:
        return sorted(set(self.labels))

    def subset(self, index) -> "LabeledDataset":
        return LabeledDataset([self.series[i] for i in index], [self.labels[i] for i in index], self.name)


def _parse_label(token: str, lineno: int, path) -> int:
    try:
        value = float(token)
    except ValueError:
        raise DataError(f"{path}:{lineno}: cannot parse label {token!r}") from None
    if not value.is_integer():
        raise DataError(f"{path}:{lineno}: label {token!r} is not an integer")
    return int(value)


def zscore(Y: np.ndarray) -> np.ndarray:
    """Per-dimension standardization to mean 0 and variance 1."""
    sd = Y.std(axis=0)
    sd[sd == 0] = 1.0
    return (Y - Y.mean(axis=0)) / sd


def load_ucr(path, normalize: bool = False, name: str | None = None) -> LabeledDataset:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    dims = 1
    series, labels = [], []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            match = _DIMS.match(line)
            if match:
                dims = int(match.group(1))
                if dims < 1:
                    raise DataError(f"{path}:{lineno}: dims must be positive")
            continue
        fields = [f for f in _SPLIT.split(line) if f]
        if len(fields) < 2:
            raise DataError(f"{path}:{lineno}: expected a label and at least one value")
        label = _parse_label(fields[0], lineno, path)
        try:
            values = [float(f) for f in fields[1:]]
        except ValueError:
            bad = next(f for f in fields[1:] if not _is_float(f))
            raise DataError(f"{path}:{lineno}: cannot parse value {bad!r}") from None
        while values and math.isnan(values[-1]):
            values.pop()
        if not values:
            raise DataError(f"{path}:{lineno}: series is empty after removing NaN padding")
        if not all(math.isfinite(v) for v in values):
            raise DataError(f"{path}:{lineno}: non-finite value inside the series")
        if len(values) % dims:
            raise DataError(f"{path}:{lineno}: {len(values)} values is not a multiple of dims={dims}")
        Y = np.asarray(values).reshape(-1, dims)
        series.append(zscore(Y) if normalize else Y)
        labels.append(label)
    if not series:
        raise DataError(f"{path}: no series found")
    return LabeledDataset(series, labels, name if name is not None else dataset_name(path))


def _is_float(token: str) -> bool:
    try:
        float(token)
    except ValueError:
        return False
    return True


def dataset_name(path) -> str:
    """``Coffee_TRAIN.tsv`` -> ``Coffee``."""
    stem = Path(path).name.split(".")[0]
    return re.sub(r"_(TRAIN|TEST)$", "", stem, flags=re.IGNORECASE)


def load_series_csv(path) -> np.ndarray:
    """A single series stored one time step per row."""
    try:
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    if not rows:
        raise DataError(f"{path}: empty series file")
    try:
        X = np.array([[float(v) for v in r] for r in rows])
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None
    if X.ndim != 2:
        raise DataError(f"{path}: rows have inconsistent widths")
    if not np.all(np.isfinite(X)):
        raise DataError(f"{path}: non-finite values")
    return X


def fmt(x) -> str:
    """17 significant digits, enough to round-trip any float64."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return "" if x is None else str(x)


def matrix_csv(X) -> str:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    return "".join(",".join(fmt(v) for v in row) + "\n" for row in X)


@dataclass
class ResultReport:
    """Run metadata plus a payload.

    ``payload`` may contain ``rows`` (a list of flat dicts, written as CSV) and
    arbitrary nested values (matrices, traces) for JSON output.
    ``wall_time`` is kept out of machine output unless explicitly requested.
    """

    meta: dict = field(default_factory=dict)
    payload: dict = field(default_factory=dict)
    wall_time: float | None = None

    def to_dict(self, include_time: bool = False) -> dict:
        out = {"meta": _jsonable(self.meta), "payload": _jsonable(self.payload)}
        if include_time and self.wall_time is not None:
            out["wall_time"] = self.wall_time
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ResultReport":
        return cls(dict(data.get("meta", {})), dict(data.get("payload", {})), data.get("wall_time"))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if hasattr(obj, "value"):
        return obj.value
    return obj


def report_csv(report: ResultReport) -> str:
    rows = report.payload.get("rows")
    if rows is None:
        raise DataError("CSV output needs a tabular payload under 'rows'")
    columns = report.payload.get("columns") or list(dict.fromkeys(k for r in rows for k in r))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([fmt(r.get(c)) for c in columns])
    return buf.getvalue()


def report_json(report: ResultReport, include_time: bool = False) -> str:
    # json writes floats with repr(), the shortest string that round-trips exactly
    return json.dumps(report.to_dict(include_time), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_report(report: ResultReport, format: str, path, include_time: bool = False) -> None:
    if format == "csv":
        text = report_csv(report)
    elif format == "json":
        text = report_json(report, include_time)
    else:
        raise ParameterError(f"unknown report format {format!r}")
    write_text(path, text)


def write_text(path, text: str) -> None:
    try:
        Path(path).write_text(text)
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc}") from exc


def read_report(path) -> ResultReport:
    try:
        return ResultReport.from_dict(json.loads(Path(path).read_text()))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(f"cannot read report {path}: {exc}") from exc
