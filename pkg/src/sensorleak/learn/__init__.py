"""The seven classifiers behind one ``fit`` / ``predict`` / ``score`` contract."""
from .base import (
    ClassifierSpec, LearnError, Model, fit, model_from_json, model_to_json,
    predict, score, spec_from_name, standardize_params,
)
from .bayes import GaussianNB
from .linear import LogisticRegression, SvmLinear
from .mlp import Mlp
from .neighbors import Knn
from .trees import DecisionTree, RandomForest

#: short names in the order results are reported
ALGORITHMS = ("svm", "nb", "mlp", "knn", "rf", "lr", "dt")


def default_specs() -> dict:
    return {name: spec_from_name(name) for name in ALGORITHMS}


__all__ = [
    "ALGORITHMS", "ClassifierSpec", "DecisionTree", "GaussianNB", "Knn", "LearnError",
    "LogisticRegression", "Mlp", "Model", "RandomForest", "SvmLinear", "default_specs",
    "fit", "model_from_json", "model_to_json", "predict", "score", "spec_from_name",
    "standardize_params",
]
