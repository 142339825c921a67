"""Transfer a model trained on attribute-labelled sessions to a foreign activity dataset."""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence


from .core import Session
from .features import Dataset, FeatureError, FeatureSchema, build_dataset, featurize_sessions
from .insight import ContingencyTable, IgReport, contingency, information_gain
from .learn import ClassifierSpec, Model, fit

__all__ = ["TransferPlan", "TransferResult", "align_schema", "cross_predict",
           "format_predictions_csv"]


def align_schema(train_sensors: Iterable, test_sensors: Iterable) -> FeatureSchema:
    """Canonical schema over the sensors both sides share."""
    common = set(train_sensors) & set(test_sensors)
    if not common:
        raise FeatureError("training and test sessions share no sensor")
    return FeatureSchema.for_sensors(common)


def _common_sensors(sessions: Sequence[Session]) -> set:
    common = None
    for s in sessions:
        common = set(s.traces) if common is None else common & set(s.traces)
    return common or set()


@dataclass(frozen=True)
class TransferPlan:
    train: Sequence[Session]
    test: Sequence[Session]
    target: str
    spec: ClassifierSpec
    #: attribute of the test sessions to tabulate against
    test_attribute: str = "activity"

    @property
    def schema(self) -> FeatureSchema:
        return align_schema(_common_sensors(self.train), _common_sensors(self.test))


@dataclass(frozen=True)
class TransferResult:
    row_ids: tuple
    external: tuple
    predictions: tuple
    table: ContingencyTable
    ig: IgReport
    model: Model
    test_dataset: Dataset


def cross_predict(plan: TransferPlan, seed: int = 42) -> TransferResult:
    """Fit on every training session, label every test session, and tabulate.

    The information-gain report treats the predicted labels as the class
    variable over the test features. No accuracy-style score is produced:
    the two label spaces share nothing.
    """
    schema = plan.schema
    train = build_dataset(plan.train, plan.target, schema)
    model = fit(plan.spec, train, seed)
    external = []
    for s in plan.test:
        value = s.labels.get(plan.test_attribute)
        if value is None:
            raise FeatureError(f"test session {s.subject_id!r} has no {plan.test_attribute!r} label")
        external.append(value)
    X = featurize_sessions(plan.test, schema)
    predicted = [str(p) for p in model.predict(X)] if len(X) else []
    test_ds = Dataset(X, predicted, tuple(s.subject_id for s in plan.test), schema.names,
                      plan.target, schema)
    return TransferResult(
        row_ids=test_ds.row_ids,
        external=tuple(external),
        predictions=tuple(predicted),
        table=contingency(external, predicted),
        ig=information_gain(test_ds),
        model=model,
        test_dataset=test_ds,
    )


def format_predictions_csv(result: TransferResult, target: str, row_title: str = "activity",
                           header: Optional[str] = None) -> str:
    buf = io.StringIO()
    if header:
        buf.write(f"# {header}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["row_id", row_title, f"predicted_{target}"])
    for row in zip(result.row_ids, result.external, result.predictions):
        w.writerow(row)
    return buf.getvalue()
