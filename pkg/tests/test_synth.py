import numpy as np
import pytest

from sensorleak.core import Labels, SensorKind, validate_session
from sensorleak.synth import (
    AxisProfile, ClassProfile, ProfileError, fill_missing_labels, generate_study,
    separable_profiles, uci_like_files,
)


def test_axis_mean_converges_to_baseline():
    axes = {(SensorKind.ACCELEROMETER, "y"): AxisProfile(baseline=3.0, noise_std=2.0)}
    prof = ClassProfile(Labels.from_text({"app": "Twitter"}), axes, (SensorKind.ACCELEROMETER,), 5000)
    for s in generate_study([prof], 5, seed=11):
        y = s.traces[SensorKind.ACCELEROMETER].y.samples
        assert abs(y.mean() - 3.0) <= 5 * 2.0 / np.sqrt(5000)


def test_sessions_are_valid_and_seeded():
    profs = separable_profiles("hand", samples=50)
    a = generate_study(profs, 2, seed=4)
    b = generate_study(profs, 2, seed=4)
    assert [s.subject_id for s in a] == ["p00-s000", "p00-s001", "p01-s000", "p01-s001",
                                         "p02-s000", "p02-s001"]
    for x, y in zip(a, b):
        assert validate_session(x) == []
        assert dict(x.traces) == dict(y.traces)
    ts = a[0].traces[SensorKind.GYROSCOPE].x.timestamps
    assert ts[1] - ts[0] == 20.0


def test_separable_centroids_are_not_collinear():
    profs = separable_profiles("app", separation=20)
    shifted = [[(k, a) for (k, a), p in prof.axes.items() if p.baseline] for prof in profs]
    assert shifted[0] == []
    flat = [tuple(s) for s in shifted[1:]]
    assert len(set(flat)) == len(flat) == 3


@pytest.mark.parametrize("prof, field", [
    (ClassProfile(Labels.from_text({"app": "Twitter"}), samples=0), "samples"),
    (ClassProfile(Labels(), samples=5), "labels"),
    (ClassProfile(Labels.from_text({"app": "Twitter"}),
                  {(SensorKind.GYROSCOPE, "z"): AxisProfile(noise_std=-1)}), "Gyroscope.z.noise_std"),
])
def test_profile_validation_names_field(prof, field):
    with pytest.raises(ProfileError, match=field):
        generate_study([prof], 1)


def test_fill_missing_labels():
    sessions = generate_study(separable_profiles("gender", samples=10), 3, seed=0)
    filled = fill_missing_labels(sessions, seed=1)
    for before, after in zip(sessions, filled):
        assert after.labels.gender == before.labels.gender
        assert set(after.labels.present()) == {"gender", "age_group", "hand", "app"}


def test_uci_like_layout():
    files = uci_like_files("train", counts={k: 3 for k in list(__import__("sensorleak.core").core.Activity)[:2]})
    assert "train/y_train.txt" in files
    assert "train/Inertial Signals/body_gyro_z_train.txt" in files
    assert len(files["train/y_train.txt"].splitlines()) == 6
