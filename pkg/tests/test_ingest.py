from pathlib import Path

import numpy as np
import pytest

from sensorleak.core import Activity, Labels, SensorKind, SensorTrace
from sensorleak.ingest import (
    LoadError, ManifestRecord, StudyManifest, TraceFormatError, TraceParseError, UciLayout,
    format_trace_csv, load_study, load_uci_har, parse_trace_csv, read_manifest,
    write_manifest, write_trace_csv,
)
from sensorleak.synth import UCI_TEST_ACTIVITY_COUNTS, generate_study, separable_profiles, write_study


def _write(tmp_path, text, name="t.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_trace_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(1)
    trace = SensorTrace.from_arrays(SensorKind.GYROSCOPE, rng.normal(size=(50, 3)) * 1e3,
                                    np.cumsum(rng.uniform(1, 30, 50)))
    p = tmp_path / "g.csv"
    write_trace_csv(p, trace)
    again = parse_trace_csv(p, SensorKind.GYROSCOPE)
    assert again == trace
    assert format_trace_csv(again) == p.read_text()


def test_timestampless_header_is_accepted(tmp_path):
    p = _write(tmp_path, "# device 7\nx,y,z\n1,2,3\n4,5,6\n")
    t = parse_trace_csv(p, SensorKind.ACCELEROMETER)
    assert t.x.timestamps is None
    assert list(t.z.samples) == [3.0, 6.0]


def test_non_numeric_cell_names_row(tmp_path):
    p = _write(tmp_path, "timestamp_ms,x,y,z\n0,1,2,3\n20,1,oops,3\n")
    with pytest.raises(TraceParseError, match="row 3"):
        parse_trace_csv(p, SensorKind.ACCELEROMETER)


@pytest.mark.parametrize("text, match", [
    ("", "empty"),
    ("a,b,c\n1,2,3\n", "header"),
    ("x,y,z\n", "no data"),
    ("x,y,z\n1,2\n", "cells"),
    ("timestamp_ms,x,y,z\n0,1,2,3\n0,1,2,3\n", "increasing"),
])
def test_malformed_traces(tmp_path, text, match):
    with pytest.raises(TraceFormatError, match=match):
        parse_trace_csv(_write(tmp_path, text), SensorKind.ACCELEROMETER)


def test_study_session_count_matches_manifest(tmp_path):
    sessions = generate_study(separable_profiles("gender", samples=30), 3, seed=2)
    manifest = read_manifest(write_study(tmp_path, sessions))
    loaded = load_study(manifest)
    assert len(loaded) == len(manifest) == 6
    assert [s.subject_id for s in loaded] == [s.subject_id for s in sessions]
    for a, b in zip(loaded, sessions):
        assert a.labels == b.labels
        assert dict(a.traces) == dict(b.traces)


def test_missing_trace_file_names_record(tmp_path):
    rec = ManifestRecord("u1", Labels.from_text({"hand": "Left"}),
                         ((SensorKind.ACCELEROMETER, Path("nope.csv")),))
    write_manifest(tmp_path / "m.csv", StudyManifest((rec,)))
    with pytest.raises(LoadError, match="u1.*nope.csv"):
        load_study(read_manifest(tmp_path / "m.csv"))


def test_duplicate_sensor_is_rejected(tmp_path):
    _write(tmp_path, "x,y,z\n1,2,3\n", "a.csv")
    rec = ManifestRecord("u1", Labels.from_text({"hand": "Left"}),
                         ((SensorKind.ACCELEROMETER, Path("a.csv")),
                          (SensorKind.ACCELEROMETER, Path("a.csv"))))
    with pytest.raises(TraceFormatError, match="more than once"):
        load_study(StudyManifest((rec,), tmp_path))


def test_bad_label_in_manifest(tmp_path):
    p = _write(tmp_path, "subject_id,gender,age_group,hand,app,accel_path,gyro_path,mag_path\n"
                         "u1,Robot,,,,a.csv,,\n", "m.csv")
    with pytest.raises(TraceFormatError, match="record 2"):
        read_manifest(p)


def test_uci_replica_loads(uci_replica):
    sessions = load_uci_har(UciLayout(uci_replica, "test"))
    assert len(sessions) == 2947
    counts = {a: 0 for a in Activity}
    for s in sessions:
        assert set(s.traces) == {SensorKind.ACCELEROMETER, SensorKind.GYROSCOPE}
        assert s.traces[SensorKind.ACCELEROMETER].x.samples.size == 128
        counts[s.labels.activity] += 1
    assert counts == dict(UCI_TEST_ACTIVITY_COUNTS)


def test_uci_body_acc_source(uci_replica):
    total = load_uci_har(UciLayout(uci_replica, "test"))[0]
    body = load_uci_har(UciLayout(uci_replica, "test", accel_source="body_acc"))[0]
    assert not np.allclose(total.traces[SensorKind.ACCELEROMETER].x.samples,
                           body.traces[SensorKind.ACCELEROMETER].x.samples)
    assert total.traces[SensorKind.GYROSCOPE] == body.traces[SensorKind.GYROSCOPE]


def test_uci_missing_file(tmp_path):
    with pytest.raises(LoadError, match="missing"):
        load_uci_har(UciLayout(tmp_path, "test"))


def test_uci_short_window_line(tmp_path):
    from sensorleak.synth import write_uci_like
    root = write_uci_like(tmp_path, "test", counts={Activity.SITTING: 2, Activity.LAYING: 2}, seed=0)
    p = root / "test/Inertial Signals/body_gyro_y_test.txt"
    lines = p.read_text().splitlines()
    lines[1] = " ".join(lines[1].split()[:100])
    p.write_text("\n".join(lines) + "\n")
    with pytest.raises(TraceFormatError, match="line 2"):
        load_uci_har(UciLayout(root, "test"))
