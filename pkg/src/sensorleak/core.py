"""Domain types shared by every stage of the pipeline.

Sessions are immutable once built. Construction never raises on invariant
violations; call :func:`validate_session` to get a list of problems instead.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

__all__ = [
    "SensorKind", "Gender", "AgeGroup", "Hand", "App", "Activity",
    "ATTRIBUTES", "AxisSeries", "SensorTrace", "Labels", "Session",
    "Violation", "validate_session", "age_group_for", "canonical_order",
]


class _OrderedEnum(enum.Enum):
    """Enum whose members compare by declaration order."""

    def _rank(self) -> int:
        return list(type(self)).index(self)

    def __lt__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self._rank() < other._rank()

    @classmethod
    def parse(cls, text: str):
        try:
            return cls(text)
        except ValueError:
            allowed = ", ".join(m.value for m in cls)
            raise ValueError(
                f"{text!r} is not a valid {cls.__name__} (expected one of: {allowed})"
            ) from None


class SensorKind(_OrderedEnum):
    ACCELEROMETER = "Accelerometer"
    GYROSCOPE = "Gyroscope"
    MAGNETOMETER = "Magnetometer"

    @property
    def short(self) -> str:
        return {"Accelerometer": "accel", "Gyroscope": "gyro", "Magnetometer": "mag"}[self.value]


class Gender(_OrderedEnum):
    MALE = "Male"
    FEMALE = "Female"


class AgeGroup(_OrderedEnum):
    UNDER_20 = "Under20"
    FROM_20_TO_25 = "20to25"
    FROM_25_TO_30 = "25to30"
    FROM_30_TO_35 = "30to35"
    OVER_35 = "Over35"


class Hand(_OrderedEnum):
    LEFT = "Left"
    RIGHT = "Right"
    BOTH = "Both"


class App(_OrderedEnum):
    FACEBOOK = "Facebook"
    INSTAGRAM = "Instagram"
    WHATSAPP = "Whatsapp"
    TWITTER = "Twitter"


class Activity(_OrderedEnum):
    WALKING = "Walking"
    WALKING_UPSTAIRS = "WalkingUpstairs"
    WALKING_DOWNSTAIRS = "WalkingDownstairs"
    SITTING = "Sitting"
    STANDING = "Standing"
    LAYING = "Laying"


#: attribute name -> enum holding its label space
ATTRIBUTES: Mapping[str, type] = MappingProxyType({
    "gender": Gender,
    "age_group": AgeGroup,
    "hand": Hand,
    "app": App,
    "activity": Activity,
})


def age_group_for(age: float) -> AgeGroup:
    """Bin an age in years; each boundary belongs to the bin it opens."""
    if age < 20:
        return AgeGroup.UNDER_20
    if age < 25:
        return AgeGroup.FROM_20_TO_25
    if age < 30:
        return AgeGroup.FROM_25_TO_30
    if age < 35:
        return AgeGroup.FROM_30_TO_35
    return AgeGroup.OVER_35


def canonical_order(values: Iterable[str]) -> list:
    """Distinct label strings in enum declaration order.

    Falls back to lexicographic order when the values do not all belong to a
    single label space.
    """
    distinct = set(values)
    for kind in ATTRIBUTES.values():
        members = [m.value for m in kind]
        if distinct <= set(members):
            return [v for v in members if v in distinct]
    return sorted(distinct)


def _frozen_array(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class AxisSeries:
    samples: np.ndarray
    timestamps: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "samples", _frozen_array(self.samples).ravel())
        if self.timestamps is not None:
            object.__setattr__(self, "timestamps", _frozen_array(self.timestamps).ravel())

    def __len__(self) -> int:
        return self.samples.shape[0]

    def __eq__(self, other):
        if not isinstance(other, AxisSeries):
            return NotImplemented
        if (self.timestamps is None) != (other.timestamps is None):
            return False
        same_ts = self.timestamps is None or np.array_equal(self.timestamps, other.timestamps)
        return same_ts and np.array_equal(self.samples, other.samples)


@dataclass(frozen=True)
class SensorTrace:
    kind: SensorKind
    x: AxisSeries
    y: AxisSeries
    z: AxisSeries

    @classmethod
    def from_arrays(cls, kind: SensorKind, xyz, timestamps=None) -> "SensorTrace":
        """Build from an ``(n, 3)`` array, sharing one timestamp column across axes."""
        xyz = np.asarray(xyz, dtype=float)
        return cls(kind, *(AxisSeries(xyz[:, i], timestamps) for i in range(3)))

    @property
    def axes(self) -> tuple:
        return (("x", self.x), ("y", self.y), ("z", self.z))


@dataclass(frozen=True)
class Labels:
    gender: Optional[Gender] = None
    age_group: Optional[AgeGroup] = None
    hand: Optional[Hand] = None
    app: Optional[App] = None
    activity: Optional[Activity] = None

    def get(self, attribute: str) -> Optional[str]:
        """Label text for ``attribute``, or None when absent."""
        if attribute not in ATTRIBUTES:
            raise KeyError(f"unknown attribute {attribute!r}")
        value = getattr(self, attribute)
        return None if value is None else value.value

    def present(self) -> dict:
        return {a: self.get(a) for a in ATTRIBUTES if getattr(self, a) is not None}

    def to_text(self) -> dict:
        return {a: self.get(a) for a in ATTRIBUTES}

    @classmethod
    def from_text(cls, mapping: Mapping[str, Optional[str]]) -> "Labels":
        kwargs = {}
        for name, text in mapping.items():
            if name not in ATTRIBUTES:
                raise KeyError(f"unknown attribute {name!r}")
            if text not in (None, ""):
                kwargs[name] = ATTRIBUTES[name].parse(text)
        return cls(**kwargs)


@dataclass(frozen=True)
class Session:
    subject_id: str
    traces: Mapping[SensorKind, SensorTrace]
    labels: Labels = field(default_factory=Labels)

    def __post_init__(self):
        object.__setattr__(self, "traces", MappingProxyType(dict(self.traces)))

    @property
    def sensors(self) -> tuple:
        return tuple(sorted(self.traces))


@dataclass(frozen=True)
class Violation:
    field: str
    rule: str

    def __str__(self) -> str:
        return f"{self.field}: {self.rule}"


def _series_violations(where: str, series: AxisSeries) -> list:
    out = []
    if len(series) < 1:
        out.append(Violation(where, "series must hold at least one sample"))
    elif not np.all(np.isfinite(series.samples)):
        out.append(Violation(where, "samples must be finite"))
    ts = series.timestamps
    if ts is not None:
        if ts.shape != series.samples.shape:
            out.append(Violation(f"{where}.timestamps", "timestamps must match samples in length"))
        elif ts.size > 1 and not np.all(np.diff(ts) > 0):
            out.append(Violation(f"{where}.timestamps", "timestamps must be strictly increasing"))
    return out


def validate_session(session: Session) -> list:
    """Return every invariant the session breaks; empty when it is well formed."""
    problems = []
    if not session.traces:
        problems.append(Violation("traces", "at least one sensor trace is required"))
    for key, trace in session.traces.items():
        where = f"traces[{getattr(key, 'value', key)}]"
        if not isinstance(key, SensorKind):
            problems.append(Violation(where, "key must be a SensorKind"))
            continue
        if trace.kind is not key:
            problems.append(Violation(
                where, f"trace kind {trace.kind.value} does not match its key (duplicate sensor)"))
        lengths = {name: len(s) for name, s in trace.axes}
        if len(set(lengths.values())) > 1:
            detail = ", ".join(f"{k}={v}" for k, v in lengths.items())
            problems.append(Violation(where, f"axis-length: x, y, z must have equal lengths ({detail})"))
        for name, series in trace.axes:
            problems.extend(_series_violations(f"{where}.{name}", series))
    labels = session.labels
    if not labels.present():
        problems.append(Violation("labels", "at least one attribute label must be present"))
    for name, kind in ATTRIBUTES.items():
        value = getattr(labels, name)
        if value is not None and not isinstance(value, kind):
            problems.append(Violation(f"labels.{name}", f"value must be a {kind.__name__}"))
    return problems


def sensor_set(sessions: Sequence[Session]) -> frozenset:
    """Sensors available in every session."""
    common = None
    for s in sessions:
        kinds = frozenset(s.traces)
        common = kinds if common is None else common & kinds
    return common or frozenset()

