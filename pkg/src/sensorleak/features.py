"""Per-axis summary statistics and fixed-length feature matrices.

Every axis of every sensor contributes nine numbers, so a session with all
three sensors becomes an 81-long vector. Column order is fixed by
:class:`FeatureSchema`.
"""
from __future__ import annotations

import csv
import enum
import io
import logging
import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .core import ATTRIBUTES, AxisSeries, SensorKind, Session, canonical_order

__all__ = [
    "StatKind", "FeatureId", "FeatureSchema", "Dataset", "FeatureError",
    "axis_statistics", "featurize_session", "featurize_sessions", "build_dataset",
    "format_feature_csv", "read_feature_csv", "MODE_DECIMALS",
]

logger = logging.getLogger(__name__)

#: samples are rounded to this many decimals before counting the mode
MODE_DECIMALS = 4
AXES = ("x", "y", "z")


class FeatureError(ValueError):
    pass


class StatKind(enum.Enum):
    MEAN = "mean"
    MEDIAN = "median"
    MODE = "mode"
    QUANTILE_ONE_THIRD = "q1of3"
    QUANTILE_TWO_THIRDS = "q2of3"
    QUANTILE_FULL = "q3of3"
    POPULATION_STD = "pstd"
    SAMPLE_STD = "sstd"
    VARIANCE = "var"


def _quantile_sorted(ordered: np.ndarray, p: float) -> float:
    # linear interpolation between order statistics at p*(n-1)
    h = p * (ordered.shape[0] - 1)
    lo = math.floor(h)
    if lo >= ordered.shape[0] - 1:
        return float(ordered[-1])
    frac = h - lo
    a, b = float(ordered[lo]), float(ordered[lo + 1])
    return a + frac * (b - a)


def _mode(values: np.ndarray) -> float:
    rounded = np.round(values, MODE_DECIMALS)
    uniq, counts = np.unique(rounded, return_counts=True)
    # np.unique sorts, so argmax lands on the smallest of the tied values
    return float(uniq[np.argmax(counts)])


def axis_statistics(series) -> np.ndarray:
    """The nine statistics of one axis, in :class:`StatKind` order.

    Parameters
    ----------
    series : AxisSeries or array_like
        Samples of a single axis; at least one value.

    Returns
    -------
    numpy.ndarray
        mean, median, mode, q(1/3), q(2/3), q(1), population std,
        sample std, sample variance.

    Notes
    -----
    A single-sample series has no spread estimate with an n-1 denominator;
    sample std and variance are reported as 0 and a warning is logged.
    """
    values = np.asarray(series.samples if isinstance(series, AxisSeries) else series,
                        dtype=float).ravel()
    n = values.shape[0]
    if n == 0:
        raise FeatureError("cannot summarise an empty series")
    if not np.all(np.isfinite(values)):
        raise FeatureError("series contains non-finite samples")

    ordered = np.sort(values)
    mean = math.fsum(values) / n
    sq_dev = math.fsum((values - mean) ** 2)
    pstd = math.sqrt(sq_dev / n)
    if n > 1:
        var = sq_dev / (n - 1)
        sstd = math.sqrt(var)
    else:
        logger.warning("single-sample series: sample std and variance set to 0")
        var = sstd = 0.0
    return np.array([
        mean,
        _quantile_sorted(ordered, 0.5),
        _mode(values),
        _quantile_sorted(ordered, 1.0 / 3.0),
        _quantile_sorted(ordered, 2.0 / 3.0),
        float(ordered[-1]),
        pstd,
        sstd,
        var,
    ])


@dataclass(frozen=True)
class FeatureId:
    sensor: SensorKind
    axis: str
    stat: StatKind

    @property
    def name(self) -> str:
        return f"{self.sensor.short}_{self.axis}_{self.stat.value}"


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered feature identifiers: sensor, then axis, then statistic."""

    features: tuple

    @classmethod
    def for_sensors(cls, sensors: Iterable[SensorKind]) -> "FeatureSchema":
        kinds = sorted(set(sensors))
        if not kinds:
            raise FeatureError("a schema needs at least one sensor")
        return cls(tuple(FeatureId(k, a, s) for k in kinds for a in AXES for s in StatKind))

    @classmethod
    def full(cls) -> "FeatureSchema":
        return cls.for_sensors(SensorKind)

    @property
    def sensors(self) -> tuple:
        return tuple(sorted({f.sensor for f in self.features}))

    @property
    def names(self) -> tuple:
        return tuple(f.name for f in self.features)

    def __len__(self) -> int:
        return len(self.features)

    @classmethod
    def from_names(cls, names: Sequence[str]) -> "FeatureSchema":
        lookup = {f.name: f for f in cls.full().features}
        try:
            return cls(tuple(lookup[n] for n in names))
        except KeyError as exc:
            raise FeatureError(f"unknown feature name {exc.args[0]!r}") from None


def featurize_session(session: Session, schema: FeatureSchema) -> np.ndarray:
    """Feature vector of one session laid out in ``schema`` order."""
    missing = [k.value for k in schema.sensors if k not in session.traces]
    if missing:
        raise FeatureError(
            f"session {session.subject_id!r} lacks sensor(s) {', '.join(missing)} required by the schema")
    cache = {}
    out = np.empty(len(schema))
    stat_index = {s: i for i, s in enumerate(StatKind)}
    for j, fid in enumerate(schema.features):
        key = (fid.sensor, fid.axis)
        if key not in cache:
            cache[key] = axis_statistics(getattr(session.traces[fid.sensor], fid.axis))
        out[j] = cache[key][stat_index[fid.stat]]
    return out


def featurize_sessions(sessions: Sequence[Session], schema: FeatureSchema) -> np.ndarray:
    if not sessions:
        return np.empty((0, len(schema)))
    return np.vstack([featurize_session(s, schema) for s in sessions])


@dataclass(frozen=True, eq=False)
class Dataset:
    """Feature matrix with one label per row.

    ``schema`` is None for matrices that did not come from sensor sessions
    (synthetic point clouds in tests, for instance); ``feature_names`` is
    always populated.
    """

    X: np.ndarray
    y: np.ndarray
    row_ids: tuple
    feature_names: tuple
    attribute: Optional[str] = None
    schema: Optional[FeatureSchema] = None

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        if X.ndim != 2:
            raise FeatureError("feature matrix must be two-dimensional")
        y = np.array([str(v) for v in self.y], dtype=object)
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "row_ids", tuple(str(r) for r in self.row_ids))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        n, d = X.shape
        if not (len(y) == len(self.row_ids) == n):
            raise FeatureError(f"rows ({n}), targets ({len(y)}) and row ids "
                               f"({len(self.row_ids)}) must have equal length")
        if len(self.feature_names) != d:
            raise FeatureError(f"{len(self.feature_names)} feature names for {d} columns")
        if not np.all(np.isfinite(X)):
            raise FeatureError("feature matrix contains non-finite values")

    @classmethod
    def from_arrays(cls, X, y, row_ids=None, feature_names=None, attribute=None) -> "Dataset":
        X = np.asarray(X, dtype=float)
        if row_ids is None:
            row_ids = [f"row{i}" for i in range(X.shape[0])]
        if feature_names is None:
            feature_names = [f"f{j}" for j in range(X.shape[1])]
        return cls(X, y, tuple(row_ids), tuple(feature_names), attribute)

    def __len__(self) -> int:
        return self.X.shape[0]

    @property
    def classes(self) -> list:
        return canonical_order(self.y)

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=int)
        return Dataset(self.X[idx], self.y[idx], tuple(self.row_ids[i] for i in idx),
                       self.feature_names, self.attribute, self.schema)

    def with_targets(self, y) -> "Dataset":
        return Dataset(self.X, y, self.row_ids, self.feature_names, self.attribute, self.schema)


def build_dataset(sessions: Sequence[Session], target_attribute: str,
                  schema: FeatureSchema) -> Dataset:
    """Featurize ``sessions`` and pair each row with its ``target_attribute`` label."""
    if target_attribute not in ATTRIBUTES:
        raise FeatureError(f"unknown attribute {target_attribute!r}")
    lacking = [s.subject_id for s in sessions if s.labels.get(target_attribute) is None]
    if lacking:
        raise FeatureError(f"sessions missing {target_attribute!r}: {', '.join(lacking)}")
    targets = [s.labels.get(target_attribute) for s in sessions]
    if len(set(targets)) < 2:
        raise FeatureError(
            f"need at least two distinct {target_attribute!r} values to train, got {sorted(set(targets))}")
    X = featurize_sessions(sessions, schema)
    return Dataset(X, targets, tuple(s.subject_id for s in sessions), schema.names,
                   target_attribute, schema)


# --------------------------------------------------------------------------
# CSV export

def format_feature_csv(dataset: Dataset, header: Optional[str] = None) -> str:
    buf = io.StringIO()
    if header:
        buf.write(f"# {header}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(list(dataset.feature_names) + ["target", "row_id"])
    for row, target, rid in zip(dataset.X, dataset.y, dataset.row_ids):
        writer.writerow([repr(float(v)) for v in row] + [target, rid])
    return buf.getvalue()


def read_feature_csv(path, attribute: Optional[str] = None) -> Dataset:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows:
        raise FeatureError(f"{path}: empty feature file")
    header = rows[0]
    if header[-2:] != ["target", "row_id"]:
        raise FeatureError(f"{path}: last two columns must be 'target,row_id'")
    names = header[:-2]
    X = np.array([[float(v) for v in r[:-2]] for r in rows[1:]]).reshape(len(rows) - 1, len(names))
    y = [r[-2] for r in rows[1:]]
    ids = [r[-1] for r in rows[1:]]
    try:
        schema = FeatureSchema.from_names(names)
    except FeatureError:
        schema = None
    return Dataset(X, y, tuple(ids), tuple(names), attribute, schema)
