"""
Labelling activity windows with a demographic model
===================================================

Train on gender-labelled study sessions, then predict a gender for every
window of an activity dataset. The windows carry no gender, so the output
is a cross-tabulation, not an accuracy.
"""

import tempfile
from pathlib import Path

from sensorleak.core import Activity
from sensorleak.infer import TransferPlan, cross_predict
from sensorleak.ingest import UciLayout, load_uci_har
from sensorleak.insight import format_contingency_csv
from sensorleak.learn import spec_from_name
from sensorleak.synth import generate_study, separable_profiles, write_uci_like

# A small stand-in in the UCI HAR directory layout. Point UciLayout at an
# extracted copy of the real dataset to run the same code on it.
root = Path(tempfile.mkdtemp()) / "UCI HAR Dataset"
write_uci_like(root, "test", counts={a: 40 for a in Activity}, seed=0)
windows = load_uci_har(UciLayout(root, "test"))

study = generate_study(separable_profiles("gender", samples=128), 20, seed=2)
result = cross_predict(TransferPlan(study, windows, "gender", spec_from_name("svm")))

# %%
# The study has a magnetometer and the windows do not, so only the 54
# shared features are used. Synthetic study signals look nothing like the
# windows, so expect the model to pile most windows into one column.
print(len(result.model.feature_names), "features,", len(result.predictions), "windows")
print(format_contingency_csv(result.table))
