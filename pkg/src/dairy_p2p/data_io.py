"""Hourly trace ingestion, synthetic trace generation and report output.

Trace files are UTF-8 CSV with a header row and two columns,
``timestamp_iso8601`` and ``kwh`` (energy in the hour starting at the
timestamp). Reports are written atomically: a temporary file in the target
directory is renamed over the destination once complete.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import tempfile
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from .errors import DataError

TRACE_COLUMNS = ("timestamp_iso8601", "kwh")
REPORT_COLUMNS = (
    "step", "timestamp", "tier", "tsp", "tbp", "sdr", "isp", "ibp",
    "grid_import", "grid_export", "community_cost", "community_revenue",
)
DEFAULT_START = datetime(2023, 1, 1, tzinfo=timezone.utc)

# default milking windows (hour of day, inclusive start, exclusive end)
MORNING_MILKING = (5, 8)
EVENING_MILKING = (16, 19)


class TraceFileMissing(DataError, FileNotFoundError):
    pass


class MalformedRow(DataError):
    def __init__(self, path, row, detail):
        super().__init__(f"{path}: row {row}: {detail}")
        self.path = str(path)
        self.row = row


class NegativeValue(MalformedRow):
    pass


class LengthMismatch(DataError):
    def __init__(self, path, found, expected):
        super().__init__(f"{path}: found {found} data rows, expected {expected}")
        self.path = str(path)
        self.found = found
        self.expected = expected


@dataclass(frozen=True)
class EnergyTrace:
    trace_id: str
    start_timestamp: datetime
    values: np.ndarray
    step_hours: int = 1

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 1:
            raise DataError(f"trace {self.trace_id}: values must be one-dimensional")
        if not np.all(np.isfinite(values)) or np.any(values < 0):
            raise DataError(f"trace {self.trace_id}: values must be finite and non-negative")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def __len__(self):
        return len(self.values)

    def timestamps(self):
        return [self.start_timestamp + timedelta(hours=i) for i in range(len(self.values))]


def _parse_timestamp(text: str) -> datetime:
    ts = datetime.fromisoformat(text.strip().replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def load_trace_csv(path, expected_len: int, trace_id: str = None) -> EnergyTrace:
    """Read and validate a trace file.

    Row numbers in error messages count data rows from 1 (the header is not
    counted).
    """
    path = Path(path)
    if not path.is_file():
        raise TraceFileMissing(f"trace file not found: {path}")
    values = []
    start = None
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != TRACE_COLUMNS:
            raise MalformedRow(path, 0, f"header must be {','.join(TRACE_COLUMNS)}, got {header}")
        for row_no, row in enumerate(reader, start=1):
            if not row:
                raise MalformedRow(path, row_no, "empty row")
            if len(row) != 2:
                raise MalformedRow(path, row_no, f"expected 2 columns, got {len(row)}")
            try:
                ts = _parse_timestamp(row[0])
            except ValueError:
                raise MalformedRow(path, row_no, f"bad timestamp {row[0]!r}") from None
            try:
                kwh = float(row[1])
            except ValueError:
                raise MalformedRow(path, row_no, f"bad kwh value {row[1]!r}") from None
            if not math.isfinite(kwh):
                raise MalformedRow(path, row_no, f"non-finite kwh value {row[1]!r}")
            if kwh < 0:
                raise NegativeValue(path, row_no, f"negative kwh value {kwh}")
            if start is None:
                start = ts
            elif ts != start + timedelta(hours=row_no - 1):
                raise MalformedRow(path, row_no, f"timestamp {row[0]} breaks the hourly sequence")
            values.append(kwh)
    if len(values) != expected_len:
        raise LengthMismatch(path, len(values), expected_len)
    return EnergyTrace(trace_id or path.stem, start or DEFAULT_START, np.array(values))


def write_trace_csv(trace: EnergyTrace, path) -> None:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for ts, v in zip(trace.timestamps(), trace.values):
        writer.writerow([ts.isoformat(), f"{v:.6f}"])
    atomic_write_text(path, buf.getvalue())


@dataclass(frozen=True)
class TraceProfile:
    """Scale parameters for the synthetic trace generator."""

    farm_scale: float = 1.0      # multiplies the dairy load shape (kWh/h)
    pv_peak_kw: float = 20.0
    wind_mean_kw: float = 8.0
    morning_milking: tuple = MORNING_MILKING
    evening_milking: tuple = EVENING_MILKING


def _milking_shape(hours: np.ndarray, window: tuple) -> np.ndarray:
    start, end = window
    return ((hours >= start) & (hours < end)).astype(float)


def synthesize_traces(seed: int, profile: TraceProfile = TraceProfile(), horizon_steps: int = 8760,
                      start: datetime = DEFAULT_START):
    """Generate deterministic (load, pv, wind) traces for one farm.

    Load is a dairy-style profile: a small base with plateaus in the morning
    and evening milking windows. PV follows a clipped cosine around noon with
    seasonal day length and random cloud cover. Wind is a smoothed Weibull
    draw scaled to the requested mean.
    """
    if horizon_steps < 1:
        raise ValueError("horizon_steps must be >= 1")
    rng = np.random.default_rng(seed)
    steps = np.arange(horizon_steps)
    hours = (steps + start.hour) % 24
    day = (steps + start.hour) // 24 + start.timetuple().tm_yday - 1

    # load: base + milking peaks, multiplicative noise kept well under the peak gap
    base = 3.0 + 1.0 * ((hours >= 8) & (hours < 16))
    milking = 9.0 * (_milking_shape(hours, profile.morning_milking)
                     + _milking_shape(hours, profile.evening_milking))
    noise = rng.uniform(0.9, 1.1, horizon_steps)
    load = profile.farm_scale * (base + milking) * noise

    # pv: daylight half-width between 4 h (winter) and 8 h (summer), northern hemisphere
    half_day = 6.0 - 2.0 * np.cos(2 * np.pi * (day + 10) / 365.0)
    angle = (hours + 0.5 - 12.0) / half_day * (np.pi / 2)
    sun = np.where(np.abs(angle) < np.pi / 2, np.cos(angle), 0.0)
    daily_clear = rng.uniform(0.3, 1.0, day.max() - day.min() + 1)[day - day.min()]
    pv = profile.pv_peak_kw * sun * daily_clear * rng.uniform(0.85, 1.0, horizon_steps)

    # wind: AR(1)-smoothed Weibull(k=2) speeds, mean-normalised
    raw = rng.weibull(2.0, horizon_steps)
    smooth = np.empty(horizon_steps)
    acc = raw[0]
    for i, r in enumerate(raw):
        acc = 0.8 * acc + 0.2 * r
        smooth[i] = acc
    wind = profile.wind_mean_kw * smooth / smooth.mean() if smooth.mean() > 0 else smooth

    load = np.maximum(load, 0.0)
    pv = np.maximum(pv, 0.0)
    wind = np.maximum(wind, 0.0)
    return (
        EnergyTrace(f"load-{seed}", start, load),
        EnergyTrace(f"pv-{seed}", start, pv),
        EnergyTrace(f"wind-{seed}", start, wind),
    )


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    if not directory.is_dir():
        raise OSError(f"output directory does not exist: {directory}")
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)



def report_to_csv(report) -> str:
    buf = io.StringIO(newline="")
    writer = csv.writer(buf, lineterminator="\n")
    columns = report.columns()
    writer.writerow(columns)
    for row in report.rows():
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def report_to_json(report) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=False, allow_nan=False) + "\n"


def write_report(report, path, format: str = "csv") -> None:
    """Write a scenario or comparison report as CSV or JSON."""
    if format == "csv":
        text = report_to_csv(report)
    elif format == "json":
        text = report_to_json(report)
    else:
        raise ValueError(f"unknown report format {format!r}")
    atomic_write_text(path, text)


def read_report_csv(path) -> list:
    """Parse a report CSV back into a list of dicts of floats/strings."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = []
        for row in csv.DictReader(fh):
            parsed = {}
            for k, v in row.items():
                if v == "":
                    parsed[k] = None
                    continue
                try:
                    parsed[k] = int(v) if k == "step" else float(v)
                except ValueError:
                    parsed[k] = v
            rows.append(parsed)
        return rows
