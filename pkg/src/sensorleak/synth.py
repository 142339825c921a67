"""Seeded generator of labelled multi-sensor study sessions.

Each axis is ``baseline + drift*t + amplitude*sin(2*pi*t/period) + noise``
with ``t`` the sample index. Output can be written in the same trace-CSV and
manifest format that :mod:`sensorleak.ingest` reads, or in the UCI HAR
directory layout.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .core import ATTRIBUTES, Activity, Labels, SensorKind, SensorTrace, Session
from .ingest import ManifestRecord, StudyManifest, UCI_WINDOW, format_manifest, format_trace_csv

__all__ = [
    "AxisProfile", "ClassProfile", "generate_study", "separable_profiles",
    "study_files", "write_study", "uci_like_files", "write_uci_like",
    "fill_missing_labels", "UCI_TEST_ACTIVITY_COUNTS", "SAMPLE_RATE_HZ",
]

SAMPLE_RATE_HZ = 50
AXES = ("x", "y", "z")

#: windows per activity in the published UCI HAR test split
UCI_TEST_ACTIVITY_COUNTS = {
    Activity.WALKING: 496,
    Activity.WALKING_UPSTAIRS: 471,
    Activity.WALKING_DOWNSTAIRS: 420,
    Activity.SITTING: 491,
    Activity.STANDING: 532,
    Activity.LAYING: 537,
}


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class AxisProfile:
    baseline: float = 0.0
    noise_std: float = 1.0
    drift: float = 0.0
    amplitude: float = 0.0
    period: float = 50.0


@dataclass(frozen=True)
class ClassProfile:
    """Signal recipe for every (sensor, axis) plus the labels it carries.

    Sensor/axis pairs missing from ``axes`` use the default
    :class:`AxisProfile`.
    """

    labels: Labels
    axes: Mapping = field(default_factory=dict)   # (SensorKind, axis) -> AxisProfile
    sensors: tuple = tuple(SensorKind)
    samples: int = 60 * SAMPLE_RATE_HZ

    def axis(self, kind: SensorKind, axis: str) -> AxisProfile:
        return self.axes.get((kind, axis), AxisProfile())

    def validate(self) -> None:
        if self.samples < 1:
            raise ProfileError("samples must be at least 1")
        if not self.sensors:
            raise ProfileError("sensors must name at least one sensor")
        if not self.labels.present():
            raise ProfileError("labels must carry at least one attribute")
        for kind in self.sensors:
            for a in AXES:
                p = self.axis(kind, a)
                where = f"{kind.value}.{a}"
                if p.noise_std < 0:
                    raise ProfileError(f"{where}.noise_std must be non-negative")
                if p.amplitude != 0 and p.period < 2:
                    raise ProfileError(f"{where}.period must be at least 2 when amplitude is non-zero")


def _series(p: AxisProfile, n: int, rng: np.random.Generator) -> np.ndarray:
    t = np.arange(n, dtype=float)
    out = p.baseline + p.drift * t
    if p.amplitude:
        out = out + p.amplitude * np.sin(2.0 * np.pi * t / p.period)
    if p.noise_std:
        out = out + rng.normal(0.0, p.noise_std, n)
    return out


def generate_study(profiles: Sequence[ClassProfile], subjects_per_profile: int,
                   seed: int = 0) -> list:
    """``subjects_per_profile`` sessions from each profile, profile-major order.

    Session ``(i, j)`` draws its noise from the ``i * subjects + j``-th child
    of ``seed`` so results are independent of generation order.
    """
    if len(profiles) < 1:
        raise ProfileError("need at least one profile")
    for p in profiles:
        p.validate()
    if subjects_per_profile < 1:
        raise ProfileError("subjects_per_profile must be at least 1")
    children = np.random.SeedSequence(seed).spawn(len(profiles) * subjects_per_profile)
    sessions = []
    for i, prof in enumerate(profiles):
        for j in range(subjects_per_profile):
            rng = np.random.default_rng(children[i * subjects_per_profile + j])
            traces = {}
            ts = np.arange(prof.samples, dtype=float) * (1000.0 / SAMPLE_RATE_HZ)
            for kind in sorted(prof.sensors):
                xyz = np.column_stack([_series(prof.axis(kind, a), prof.samples, rng) for a in AXES])
                traces[kind] = SensorTrace.from_arrays(kind, xyz, ts)
            sessions.append(Session(f"p{i:02d}-s{j:03d}", traces, prof.labels))
    return sessions


def separable_profiles(attribute: str, values: Optional[Sequence[str]] = None,
                       separation: float = 20.0, noise_std: float = 1.0,
                       samples: int = 60 * SAMPLE_RATE_HZ,
                       sensors: Sequence[SensorKind] = tuple(SensorKind)) -> list:
    """One profile per label value with centroids ``separation * noise_std`` apart.

    Profile 0 sits at the origin; profile ``c`` shifts the baseline of the
    ``c``-th (sensor, axis) pair, so no three centroids are collinear and
    every class is linearly separable from the rest.
    """
    kind = ATTRIBUTES[attribute]
    values = list(values) if values is not None else [m.value for m in kind]
    pairs = [(k, a) for k in sorted(sensors) for a in AXES]
    if len(values) - 1 > len(pairs):
        raise ProfileError(f"at most {len(pairs) + 1} separable classes with these sensors")
    out = []
    for c, v in enumerate(values):
        axes = {pair: AxisProfile(0.0, noise_std) for pair in pairs}
        if c > 0:
            axes[pairs[c - 1]] = AxisProfile(separation * noise_std, noise_std)
        out.append(ClassProfile(Labels.from_text({attribute: v}), axes, tuple(sorted(sensors)), samples))
    return out


# --------------------------------------------------------------------------
# writers: each returns {relative path: text} so callers can write atomically

def study_files(sessions: Sequence[Session], manifest_name: str = "manifest.csv") -> dict:
    files = {}
    records = []
    col = {SensorKind.ACCELEROMETER: "accel", SensorKind.GYROSCOPE: "gyro",
           SensorKind.MAGNETOMETER: "mag"}
    for s in sessions:
        sensors = []
        for kind in sorted(s.traces):
            rel = f"traces/{s.subject_id}_{col[kind]}.csv"
            files[rel] = format_trace_csv(s.traces[kind])
            sensors.append((kind, Path(rel)))
        records.append(ManifestRecord(s.subject_id, s.labels, tuple(sensors)))
    files[manifest_name] = format_manifest(StudyManifest(tuple(records)))
    return files


def write_study(directory, sessions: Sequence[Session]) -> Path:
    """Write sessions as trace CSVs plus ``manifest.csv``; returns the manifest path."""
    directory = Path(directory)
    for rel, text in study_files(sessions).items():
        path = directory / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    return directory / "manifest.csv"


_UCI_NAMES = {
    Activity.WALKING: (1, "WALKING"),
    Activity.WALKING_UPSTAIRS: (2, "WALKING_UPSTAIRS"),
    Activity.WALKING_DOWNSTAIRS: (3, "WALKING_DOWNSTAIRS"),
    Activity.SITTING: (4, "SITTING"),
    Activity.STANDING: (5, "STANDING"),
    Activity.LAYING: (6, "LAYING"),
}


def uci_like_files(split: str = "test", counts: Mapping = UCI_TEST_ACTIVITY_COUNTS,
                   seed: int = 0) -> dict:
    """Files of a stand-in dataset in the UCI HAR directory layout.

    Signals are synthetic: each activity gets its own gravity-like offset on
    the accelerometer and a noise level on the gyroscope. Window order is
    shuffled with ``seed`` so activities interleave as in the real files.
    """
    rng = np.random.default_rng(seed)
    labels = np.concatenate([[a] * n for a, n in counts.items()])
    labels = labels[rng.permutation(labels.size)]
    m = labels.size
    acc = np.empty((3, m, UCI_WINDOW))
    gyr = np.empty((3, m, UCI_WINDOW))
    offsets = {a: rng.normal(0, 0.5, 3) for a in _UCI_NAMES}
    for i, act in enumerate(labels):
        moving = _UCI_NAMES[act][0] <= 3
        acc[:, i] = offsets[act][:, None] + rng.normal(0, 0.3 if moving else 0.02, (3, UCI_WINDOW))
        gyr[:, i] = rng.normal(0, 0.8 if moving else 0.05, (3, UCI_WINDOW))

    def matrix(rows):
        return "".join(" " + " ".join(f"{v: .7e}" for v in r) + "\n" for r in rows)

    base = f"{split}/Inertial Signals"
    files = {}
    for k, a in enumerate(AXES):
        files[f"{base}/total_acc_{a}_{split}.txt"] = matrix(acc[k])
        files[f"{base}/body_acc_{a}_{split}.txt"] = matrix(acc[k] - acc[k].mean(axis=1, keepdims=True))
        files[f"{base}/body_gyro_{a}_{split}.txt"] = matrix(gyr[k])
    files[f"{split}/y_{split}.txt"] = "".join(f"{_UCI_NAMES[a][0]}\n" for a in labels)
    subjects = rng.integers(1, 31, m)
    files[f"{split}/subject_{split}.txt"] = "".join(f"{s}\n" for s in subjects)
    files["activity_labels.txt"] = "".join(f"{i} {name}\n" for i, name in _UCI_NAMES.values())
    return files


def write_uci_like(root, split: str = "test", counts: Mapping = UCI_TEST_ACTIVITY_COUNTS,
                   seed: int = 0) -> Path:
    root = Path(root)
    for rel, text in uci_like_files(split, counts, seed).items():
        path = root / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    return root


def fill_missing_labels(sessions: Sequence[Session], seed: int = 0,
                        attributes: Sequence[str] = ("gender", "age_group", "hand", "app")) -> list:
    """Give each session a uniformly drawn value for every absent attribute."""
    rng = np.random.default_rng(seed)
    out = []
    for s in sessions:
        text = s.labels.to_text()
        for a in attributes:
            if text[a] is None:
                members = [m.value for m in ATTRIBUTES[a]]
                text[a] = members[int(rng.integers(len(members)))]
        out.append(Session(s.subject_id, s.traces, Labels.from_text(text)))
    return out
