"""Shared train/predict/score contract for every classifier."""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from typing import ClassVar, Dict, Optional

import numpy as np

from ..core import canonical_order
from ..features import Dataset

__all__ = [
    "ClassifierSpec", "Model", "LearnError", "fit", "predict", "score",
    "standardize_params", "model_to_json", "model_from_json", "register",
]


class LearnError(ValueError):
    pass


SPEC_TYPES: Dict[str, type] = {}


def register(cls):
    SPEC_TYPES[cls.name] = cls
    return cls


@dataclass(frozen=True)
class ClassifierSpec:
    """Algorithm plus hyperparameters. Subclasses implement ``train`` and ``scores``."""

    name: ClassVar[str] = ""
    #: True when ``scores`` returns normalised class probabilities
    probabilistic: ClassVar[bool] = True

    def train(self, Z: np.ndarray, y: np.ndarray, n_classes: int, seed: int) -> dict:
        raise NotImplementedError

    def scores(self, params: dict, Z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def check(self, n_rows: int) -> None:
        """Raise when the hyperparameters cannot be used on ``n_rows`` rows."""

    def to_dict(self) -> dict:
        return {"algo": self.name, **dataclasses.asdict(self)}


def standardize_params(X: np.ndarray):
    """Column means and standard deviations; constant columns keep scale 1."""
    center = X.mean(axis=0)
    scale = X.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    return center, scale


@dataclass(frozen=True, eq=False)
class Model:
    spec: ClassifierSpec
    classes: tuple
    feature_names: tuple
    center: np.ndarray
    scale: np.ndarray
    params: dict

    def _transform(self, X) -> tuple:
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != len(self.feature_names):
            raise LearnError(
                f"model expects {len(self.feature_names)} features, got {X.shape[1]}")
        if not np.all(np.isfinite(X)):
            raise LearnError("features must be finite")
        return (X - self.center) / self.scale, single

    def score(self, X) -> np.ndarray:
        Z, single = self._transform(X)
        S = self.spec.scores(self.params, Z)
        return S[0] if single else S

    def predict(self, X):
        S = np.atleast_2d(self.score(X))
        labels = np.asarray(self.classes, dtype=object)[np.argmax(S, axis=1)]
        return labels[0] if np.asarray(X).ndim == 1 else labels


def fit(spec: ClassifierSpec, dataset: Dataset, seed: int = 0) -> Model:
    """Train ``spec`` on z-scored features of ``dataset``.

    Standardisation statistics come from ``dataset`` alone, so when it is a
    training fold the held-out rows never influence them.
    """
    classes = tuple(canonical_order(dataset.y))
    if len(classes) < 2:
        raise LearnError(f"need at least two classes to train, got {list(classes)}")
    spec.check(len(dataset))
    center, scale = standardize_params(dataset.X)
    Z = (dataset.X - center) / scale
    index = {c: i for i, c in enumerate(classes)}
    y = np.array([index[v] for v in dataset.y], dtype=np.int64)
    params = spec.train(Z, y, len(classes), int(seed))
    for arr in _arrays(params):
        arr.setflags(write=False)
    center.setflags(write=False)
    scale.setflags(write=False)
    return Model(spec, classes, dataset.feature_names, center, scale, params)


def predict(model: Model, features):
    return model.predict(features)


def score(model: Model, features) -> np.ndarray:
    return model.score(features)


def _arrays(obj):
    if isinstance(obj, np.ndarray):
        yield obj
    elif isinstance(obj, dict):
        for v in obj.values():
            yield from _arrays(v)
    elif isinstance(obj, (list, tuple)):
        for v in obj:
            yield from _arrays(v)


# --------------------------------------------------------------------------
# serialization: JSON with exact float round-trip (repr-based)

def _encode(obj):
    if isinstance(obj, np.ndarray):
        return {"__ndarray__": obj.ravel().tolist(), "dtype": obj.dtype.str, "shape": list(obj.shape)}
    if isinstance(obj, dict):
        return {k: _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _decode(obj):
    if isinstance(obj, dict):
        if "__ndarray__" in obj:
            arr = np.array(obj["__ndarray__"], dtype=np.dtype(obj["dtype"])).reshape(obj["shape"])
            arr.setflags(write=False)
            return arr
        return {k: _decode(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_decode(v) for v in obj]
    return obj


def model_to_json(model: Model) -> str:
    blob = {
        "format": "sensorleak-model/1",
        "spec": model.spec.to_dict(),
        "classes": list(model.classes),
        "feature_names": list(model.feature_names),
        "center": _encode(model.center),
        "scale": _encode(model.scale),
        "params": _encode(model.params),
    }
    return json.dumps(blob, sort_keys=True)


def model_from_json(text: str) -> Model:
    blob = json.loads(text)
    if blob.get("format") != "sensorleak-model/1":
        raise LearnError("not a serialized sensorleak model")
    spec_fields = dict(blob["spec"])
    cls = SPEC_TYPES[spec_fields.pop("algo")]
    spec = cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in spec_fields.items()})
    return Model(spec, tuple(blob["classes"]), tuple(blob["feature_names"]),
                 _decode(blob["center"]), _decode(blob["scale"]), _decode(blob["params"]))


def spec_from_name(name: str, overrides: Optional[dict] = None) -> ClassifierSpec:
    if name not in SPEC_TYPES:
        raise LearnError(f"unknown classifier {name!r}; choose from {sorted(SPEC_TYPES)}")
    return SPEC_TYPES[name](**(overrides or {}))
