import json
from datetime import timedelta

import numpy as np
import pytest

from dairy_p2p import data_io
from dairy_p2p.data_io import (DEFAULT_START, EnergyTrace, LengthMismatch, MalformedRow,
                               NegativeValue, TraceFileMissing, TraceProfile, load_trace_csv,
                               read_report_csv, synthesize_traces, write_report, write_trace_csv)
from dairy_p2p.engine import FarmTraces, ScenarioConfig, run_simulation
from dairy_p2p.farm import FarmConfig


def write_csv(path, values, start=DEFAULT_START):
    lines = ["timestamp_iso8601,kwh"]
    for i, v in enumerate(values):
        lines.append(f"{(start + timedelta(hours=i)).isoformat()},{v}")
    path.write_text("\n".join(lines) + "\n")
    return path


def test_year_file_loads(tmp_path):
    p = write_csv(tmp_path / "t.csv", np.full(8760, 1.5))
    trace = load_trace_csv(p, 8760)
    assert len(trace) == 8760 and trace.start_timestamp == DEFAULT_START


def test_negative_value_names_row(tmp_path):
    values = [1.0] * 30
    values[16] = -2.0
    with pytest.raises(NegativeValue) as exc:
        load_trace_csv(write_csv(tmp_path / "t.csv", values), 30)
    assert exc.value.row == 17 and "row 17" in str(exc.value)


def test_length_mismatch(tmp_path):
    with pytest.raises(LengthMismatch):
        load_trace_csv(write_csv(tmp_path / "t.csv", [1.0] * 8759), 8760)


def test_missing_file(tmp_path):
    with pytest.raises(TraceFileMissing) as exc:
        load_trace_csv(tmp_path / "nope.csv", 3)
    assert "nope.csv" in str(exc.value)


@pytest.mark.parametrize("body,row", [
    ("2023-01-01T00:00:00+00:00,abc\n", 1),
    ("2023-01-01T00:00:00+00:00,1\nnot-a-date,1\n", 2),
    ("2023-01-01T00:00:00+00:00,1\n2023-01-01T05:00:00+00:00,1\n", 2),
    ("2023-01-01T00:00:00+00:00,1,2\n", 1),
])
def test_malformed_rows(tmp_path, body, row):
    p = tmp_path / "t.csv"
    p.write_text("timestamp_iso8601,kwh\n" + body)
    with pytest.raises(MalformedRow) as exc:
        load_trace_csv(p, 2)
    assert exc.value.row == row


def test_trace_csv_round_trip(tmp_path):
    load, _, _ = synthesize_traces(3, horizon_steps=48)
    write_trace_csv(load, tmp_path / "l.csv")
    back = load_trace_csv(tmp_path / "l.csv", 48)
    np.testing.assert_allclose(back.values, load.values, atol=1e-6)


def test_synthesis_deterministic():
    a = synthesize_traces(11, TraceProfile(), 200)
    b = synthesize_traces(11, TraceProfile(), 200)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.values, y.values)
    c = synthesize_traces(12, TraceProfile(), 200)
    assert not np.array_equal(a[0].values, c[0].values)


def test_pv_dark_at_night():
    _, pv, _ = synthesize_traces(5, horizon_steps=24 * 365)
    hours = np.arange(len(pv)) % 24
    assert np.all(pv.values[hours == 2] == 0)
    assert np.all(pv.values[hours == 22] == 0)
    assert pv.values.max() > 0


@pytest.mark.parametrize("seed", range(10))
def test_load_peaks_in_milking_windows(seed):
    load, _, wind = synthesize_traces(seed, horizon_steps=24)
    top_two = np.argsort(load.values)[-2:]
    windows = [range(*data_io.MORNING_MILKING), range(*data_io.EVENING_MILKING)]
    assert all(any(h in w for w in windows) for h in top_two)
    assert np.all(wind.values >= 0)


def test_energy_trace_rejects_negative():
    with pytest.raises(ValueError):
        EnergyTrace("x", DEFAULT_START, np.array([1.0, -1.0]))


def _small_report(steps=2):
    cfg = ScenarioConfig("s", (FarmConfig("a", has_pv=True), FarmConfig("b")), horizon_steps=steps)
    traces = {"a": FarmTraces(np.full(steps, 1.0), np.full(steps, 4.0), np.zeros(steps)),
              "b": FarmTraces(np.full(steps, 5.0), np.zeros(steps), np.zeros(steps))}
    return run_simulation(cfg, traces)


def test_report_csv_deterministic_and_parsable(tmp_path):
    report = _small_report()
    write_report(report, tmp_path / "a.csv")
    write_report(_small_report(), tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    rows = read_report_csv(tmp_path / "a.csv")
    assert len(rows) == 2
    assert list(rows[0]) == list(data_io.REPORT_COLUMNS)
    for parsed, step in zip(rows, report.steps):
        assert parsed["community_cost"] == pytest.approx(step.community_cost, abs=1e-6)
        assert parsed["isp"] == pytest.approx(step.isp, abs=1e-6)


def test_empty_report_is_header_only(tmp_path):
    report = _small_report()
    report.steps = []
    write_report(report, tmp_path / "e.csv")
    assert (tmp_path / "e.csv").read_text() == ",".join(data_io.REPORT_COLUMNS) + "\n"


def test_json_round_trip(tmp_path):
    report = _small_report()
    write_report(report, tmp_path / "r.json", "json")
    parsed = json.loads((tmp_path / "r.json").read_text())
    assert parsed["steps"] == [dict(r) for r in report.rows()]


def test_unwritable_path_leaves_nothing(tmp_path):
    with pytest.raises(OSError):
        write_report(_small_report(), tmp_path / "missing" / "r.csv")
    assert not (tmp_path / "missing").exists()
