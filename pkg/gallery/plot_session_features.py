"""
Summary statistics of a sensor session
======================================

A session holds one trace per sensor, three axes each. Every axis is
reduced to nine numbers, so three sensors give an 81-column row.
"""

import numpy as np

from sensorleak.core import Labels, SensorKind, Session, SensorTrace, validate_session
from sensorleak.features import FeatureSchema, axis_statistics, featurize_session

rng = np.random.default_rng(0)
traces = {
    kind: SensorTrace.from_arrays(kind, rng.normal(size=(500, 3)), np.arange(500) * 20.0)
    for kind in SensorKind
}
session = Session("demo", traces, Labels.from_text({"hand": "Right", "app": "Twitter"}))
print("violations:", validate_session(session))

# %%
# One axis first: the nine statistics, in a fixed order.
stats = axis_statistics(session.traces[SensorKind.ACCELEROMETER].x)
for name, value in zip(FeatureSchema.full().names[:9], stats):
    print(f"{name:18s} {value: .5f}")

# %%
# The whole session. Dropping the magnetometer shrinks the row to 54.
row = featurize_session(session, FeatureSchema.full())
print(row.shape)
two = FeatureSchema.for_sensors([SensorKind.ACCELEROMETER, SensorKind.GYROSCOPE])
print(featurize_session(session, two).shape)
