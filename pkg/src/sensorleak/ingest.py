"""Reading and writing trace CSVs, study manifests, and the UCI HAR layout."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import (
    Activity, AxisSeries, Labels, SensorKind, SensorTrace, Session,
)

__all__ = [
    "IngestError", "TraceParseError", "TraceFormatError", "LoadError",
    "ManifestRecord", "StudyManifest", "UciLayout",
    "parse_trace_csv", "format_trace_csv", "write_trace_csv",
    "read_manifest", "format_manifest", "write_manifest", "load_study", "load_uci_har",
    "UCI_WINDOW",
]

UCI_WINDOW = 128

#: manifest column -> sensor it references
MANIFEST_SENSOR_COLUMNS = {
    "accel_path": SensorKind.ACCELEROMETER,
    "gyro_path": SensorKind.GYROSCOPE,
    "mag_path": SensorKind.MAGNETOMETER,
}
MANIFEST_COLUMNS = ("subject_id", "gender", "age_group", "hand", "app",
                    "accel_path", "gyro_path", "mag_path")

# UCI ships upper-case snake names; map them onto our label space.
_UCI_ACTIVITY_NAMES = {
    "WALKING": Activity.WALKING,
    "WALKING_UPSTAIRS": Activity.WALKING_UPSTAIRS,
    "WALKING_DOWNSTAIRS": Activity.WALKING_DOWNSTAIRS,
    "SITTING": Activity.SITTING,
    "STANDING": Activity.STANDING,
    "LAYING": Activity.LAYING,
}


class IngestError(ValueError):
    """Base class for input problems."""


class TraceParseError(IngestError):
    """A cell could not be read as a number."""


class TraceFormatError(IngestError):
    """The file is readable but breaks the format rules."""


class LoadError(IngestError):
    """A referenced file is missing or unreadable."""


# --------------------------------------------------------------------------
# trace CSV

def _read_text(path: Path) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise LoadError(f"file not found: {path}") from None
    except OSError as exc:
        raise LoadError(f"cannot read {path}: {exc}") from None


def parse_trace_csv(path, kind: SensorKind) -> SensorTrace:
    """Read one sensor's samples from ``timestamp_ms,x,y,z`` (or ``x,y,z``) CSV."""
    text = _read_text(Path(path))
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
    if not rows:
        raise TraceFormatError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if header == ["timestamp_ms", "x", "y", "z"]:
        has_ts = True
    elif header == ["x", "y", "z"]:
        has_ts = False
    else:
        raise TraceFormatError(
            f"{path}: header must be 'timestamp_ms,x,y,z' or 'x,y,z', got {','.join(header)!r}")
    body = rows[1:]
    if not body:
        raise TraceFormatError(f"{path}: no data rows")

    width = len(header)
    values = np.empty((len(body), width))
    for i, row in enumerate(body):
        lineno = i + 2
        if len(row) != width:
            raise TraceFormatError(f"{path}: row {lineno} has {len(row)} cells, expected {width}")
        for j, cell in enumerate(row):
            try:
                values[i, j] = float(cell)
            except ValueError:
                raise TraceParseError(
                    f"{path}: row {lineno}, column {header[j]!r}: not a number: {cell!r}") from None

    timestamps = None
    if has_ts:
        timestamps = values[:, 0]
        bad = np.flatnonzero(np.diff(timestamps) <= 0)
        if bad.size:
            raise TraceFormatError(
                f"{path}: timestamps must be strictly increasing (row {bad[0] + 3})")
    return SensorTrace.from_arrays(kind, values[:, -3:], timestamps)


def format_trace_csv(trace: SensorTrace) -> str:
    ts = trace.x.timestamps
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if ts is not None:
        writer.writerow(["timestamp_ms", "x", "y", "z"])
        for row in zip(ts, trace.x.samples, trace.y.samples, trace.z.samples):
            writer.writerow([repr(float(v)) for v in row])
    else:
        writer.writerow(["x", "y", "z"])
        for row in zip(trace.x.samples, trace.y.samples, trace.z.samples):
            writer.writerow([repr(float(v)) for v in row])
    return buf.getvalue()


def write_trace_csv(path, trace: SensorTrace) -> None:
    Path(path).write_text(format_trace_csv(trace), encoding="utf-8")


# --------------------------------------------------------------------------
# study manifest

@dataclass(frozen=True)
class ManifestRecord:
    subject_id: str
    labels: Labels
    sensors: tuple  # (SensorKind, Path) pairs; not a dict so duplicates stay detectable


@dataclass(frozen=True)
class StudyManifest:
    records: tuple = ()
    base_dir: Path = field(default_factory=Path)

    def __len__(self) -> int:
        return len(self.records)


def read_manifest(path) -> StudyManifest:
    """Parse a manifest file; relative sensor paths resolve against its directory.

    A header row is optional. When present it may order the columns freely,
    but every column name must be known and appear once.
    """
    path = Path(path)
    text = _read_text(path)
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
    columns = list(MANIFEST_COLUMNS)
    first = 1
    if rows and rows[0] and rows[0][0].strip() == "subject_id":
        first = 2
        columns = [c.strip() for c in rows[0]]
        rows = rows[1:]
        unknown = [c for c in columns if c not in MANIFEST_COLUMNS]
        if unknown:
            raise TraceFormatError(f"{path}: unknown manifest columns {unknown}")

    records = []
    for lineno, row in enumerate(rows, start=first):
        if len(row) != len(columns):
            raise TraceFormatError(
                f"{path}: record {lineno} has {len(row)} fields, expected {len(columns)}")
        labels_text = {}
        sensors = []
        subject = None
        for col, cell in zip(columns, (c.strip() for c in row)):
            if col == "subject_id":
                subject = cell
            elif col in MANIFEST_SENSOR_COLUMNS:
                if cell:
                    sensors.append((MANIFEST_SENSOR_COLUMNS[col], Path(cell)))
            else:
                if col in labels_text:
                    raise TraceFormatError(f"{path}: column {col!r} repeated")
                labels_text[col] = cell
        if not subject:
            raise TraceFormatError(f"{path}: record {lineno} has no subject_id")
        try:
            labels = Labels.from_text(labels_text)
        except ValueError as exc:
            raise TraceFormatError(f"{path}: record {lineno}: {exc}") from None
        records.append(ManifestRecord(subject, labels, tuple(sensors)))
    return StudyManifest(tuple(records), path.parent)


def format_manifest(manifest: StudyManifest) -> str:
    by_kind = {k: c for c, k in MANIFEST_SENSOR_COLUMNS.items()}
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(MANIFEST_COLUMNS)
    for rec in manifest.records:
        cells = {"subject_id": rec.subject_id}
        for name in ("gender", "age_group", "hand", "app"):
            cells[name] = rec.labels.get(name) or ""
        for col in MANIFEST_SENSOR_COLUMNS:
            cells[col] = ""
        for kind, p in rec.sensors:
            cells[by_kind[kind]] = Path(p).as_posix()
        writer.writerow([cells[c] for c in MANIFEST_COLUMNS])
    return buf.getvalue()


def write_manifest(path, manifest: StudyManifest) -> None:
    Path(path).write_text(format_manifest(manifest), encoding="utf-8")


def load_study(manifest: StudyManifest) -> list:
    """One :class:`Session` per manifest record, in record order."""
    sessions = []
    for rec in manifest.records:
        traces = {}
        for kind, rel in rec.sensors:
            if kind in traces:
                raise TraceFormatError(
                    f"record {rec.subject_id!r} lists {kind.value} more than once")
            full = rel if rel.is_absolute() else manifest.base_dir / rel
            if not full.is_file():
                raise LoadError(f"record {rec.subject_id!r}: missing {kind.value} file {full}")
            traces[kind] = parse_trace_csv(full, kind)
        if not traces:
            raise TraceFormatError(f"record {rec.subject_id!r} references no sensor files")
        sessions.append(Session(rec.subject_id, traces, rec.labels))
    return sessions


# --------------------------------------------------------------------------
# UCI HAR

@dataclass(frozen=True)
class UciLayout:
    """Location of an extracted ``UCI HAR Dataset`` directory.

    ``accel_source`` picks the gravity-inclusive (``total_acc``) or the
    body-only (``body_acc``) accelerometer files.
    """

    root: Path
    split: str = "test"
    accel_source: str = "total_acc"

    def __post_init__(self):
        object.__setattr__(self, "root", Path(self.root))
        if self.split not in ("train", "test"):
            raise ValueError(f"split must be 'train' or 'test', got {self.split!r}")
        if self.accel_source not in ("total_acc", "body_acc"):
            raise ValueError(f"accel_source must be 'total_acc' or 'body_acc', got {self.accel_source!r}")

    def signal_path(self, prefix: str, axis: str) -> Path:
        return self.root / self.split / "Inertial Signals" / f"{prefix}_{axis}_{self.split}.txt"

    @property
    def labels_path(self) -> Path:
        return self.root / self.split / f"y_{self.split}.txt"

    @property
    def subjects_path(self) -> Path:
        return self.root / self.split / f"subject_{self.split}.txt"

    @property
    def activity_names_path(self) -> Path:
        return self.root / "activity_labels.txt"

    def required_files(self) -> list:
        files = [self.signal_path(self.accel_source, a) for a in "xyz"]
        files += [self.signal_path("body_gyro", a) for a in "xyz"]
        return files + [self.labels_path, self.activity_names_path]


def _read_signal_matrix(path: Path) -> np.ndarray:
    lines = _read_text(path).splitlines()
    out = np.empty((len(lines), UCI_WINDOW))
    for i, line in enumerate(lines):
        cells = line.split()
        if len(cells) != UCI_WINDOW:
            raise TraceFormatError(
                f"{path}: line {i + 1} has {len(cells)} values, expected {UCI_WINDOW}")
        try:
            out[i] = [float(c) for c in cells]
        except ValueError:
            raise TraceParseError(f"{path}: line {i + 1} contains a non-numeric value") from None
    return out


def _read_int_column(path: Path) -> list:
    out = []
    for i, line in enumerate(_read_text(path).splitlines()):
        text = line.strip()
        try:
            out.append(int(text))
        except ValueError:
            raise TraceFormatError(f"{path}: line {i + 1}: expected an integer, got {text!r}") from None
    return out


def _read_activity_names(path: Path) -> dict:
    mapping = {}
    for i, line in enumerate(_read_text(path).splitlines()):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2:
            raise TraceFormatError(f"{path}: line {i + 1}: expected 'id name'")
        try:
            ident = int(parts[0])
        except ValueError:
            raise TraceFormatError(f"{path}: line {i + 1}: bad id {parts[0]!r}") from None
        name = parts[1].upper()
        if name not in _UCI_ACTIVITY_NAMES:
            raise TraceFormatError(f"{path}: line {i + 1}: unknown activity {parts[1]!r}")
        mapping[ident] = _UCI_ACTIVITY_NAMES[name]
    return mapping


def load_uci_har(layout: UciLayout) -> list:
    """Each 128-sample window becomes a Session with accelerometer and gyroscope traces."""
    for f in layout.required_files():
        if not f.is_file():
            raise LoadError(f"UCI HAR file missing: {f}")
    acc = [_read_signal_matrix(layout.signal_path(layout.accel_source, a)) for a in "xyz"]
    gyr = [_read_signal_matrix(layout.signal_path("body_gyro", a)) for a in "xyz"]
    labels = _read_int_column(layout.labels_path)
    names = _read_activity_names(layout.activity_names_path)
    subjects = (_read_int_column(layout.subjects_path)
                if layout.subjects_path.is_file() else None)

    n = len(labels)
    for path, mat in zip(("acc_x", "acc_y", "acc_z", "gyro_x", "gyro_y", "gyro_z"), acc + gyr):
        if mat.shape[0] != n:
            raise TraceFormatError(
                f"{layout.split}: {path} has {mat.shape[0]} windows but labels file has {n}")
    if subjects is not None and len(subjects) != n:
        raise TraceFormatError(f"{layout.subjects_path}: {len(subjects)} lines, expected {n}")

    sessions = []
    for i, label_id in enumerate(labels):
        if label_id not in names:
            raise TraceFormatError(
                f"{layout.labels_path}: line {i + 1}: label id {label_id} not in activity_labels.txt")
        traces = {
            SensorKind.ACCELEROMETER: SensorTrace(
                SensorKind.ACCELEROMETER, *(AxisSeries(m[i]) for m in acc)),
            SensorKind.GYROSCOPE: SensorTrace(
                SensorKind.GYROSCOPE, *(AxisSeries(m[i]) for m in gyr)),
        }
        who = f"-subject{subjects[i]}" if subjects is not None else ""
        ident = f"uci-{layout.split}-{i + 1:05d}{who}"
        sessions.append(Session(ident, traces, Labels(activity=names[label_id])))
    return sessions
