"""
Which features give the label away?
===================================

Each feature is cut into bins by entropy-minimising splits that must pay
for themselves under a description-length test. The information gain of
the resulting partition ranks the features.
"""

from sensorleak.features import FeatureSchema, build_dataset
from sensorleak.insight import information_gain, mdl_discretize
from sensorleak.synth import generate_study, separable_profiles

sessions = generate_study(separable_profiles("hand", separation=3, samples=200), 30, seed=5)
data = build_dataset(sessions, "hand", FeatureSchema.full())
report = information_gain(data)
print(f"class entropy: {report.class_entropy:.3f} bits")
for entry in report.entries[:8]:
    print(f"{entry.feature:16s} {entry.ig_bits:.3f}  cuts={[round(c, 2) for c in entry.cuts]}")

# %%
# A pure-noise feature earns no cut at all.
noise = data.X[:, data.feature_names.index("mag_z_var")]
print("cuts on mag_z_var:", mdl_discretize(noise, data.y))
