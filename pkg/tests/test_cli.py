import json

import pytest

from sensorleak.cli import main


def run(*argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def study(tmp_path_factory):
    out = tmp_path_factory.mktemp("study")
    assert run("synth", "--target", "gender", "--subjects", 6, "--samples", 60, "--seed", 3,
               "--uci-like", "--out", out) == 0
    return out


def test_synth_writes_manifest_with_provenance(study):
    text = (study / "manifest.csv").read_text()
    first = text.splitlines()[0]
    assert first.startswith("# sensorleak ")
    config = json.loads(first.split(" ", 3)[3])
    assert config["command"] == "synth" and "out" not in config
    assert (study / "uci" / "test" / "y_test.txt").is_file()


def test_validate_ok(study, capsys):
    assert run("validate", "--manifest", study / "manifest.csv") == 0
    assert "12 sessions, 0 with violations" in capsys.readouterr().out


def test_validate_reports_violation(study, tmp_path, capsys):
    trace = sorted((study / "traces").glob("*_gyro.csv"))[0]
    lines = trace.read_text().splitlines()
    bad = tmp_path / "m.csv"
    (tmp_path / "g.csv").write_text("\n".join(lines[:-1] + [lines[-1].rsplit(",", 1)[0] + ",nan"]) + "\n")
    bad.write_text("subject_id,gender,gyro_path\nq1,Male,g.csv\n")
    assert run("validate", "--manifest", bad) == 1
    assert "q1" in capsys.readouterr().out


def test_cv_featurize_infogain(study, tmp_path):
    m = study / "manifest.csv"
    assert run("cv", "--manifest", m, "--target", "gender", "--algo", "nb", "--folds", 3,
               "--runs", 2, "--out", tmp_path) == 0
    rows = (tmp_path / "cv_gender.csv").read_text().splitlines()
    assert rows[1].startswith("algo,accuracy") and rows[2].startswith("nb,")
    assert len((tmp_path / "cv_gender_folds.csv").read_text().splitlines()) == 2 + 6
    assert run("featurize", "--manifest", m, "--target", "gender", "--out", tmp_path) == 0
    header = (tmp_path / "features_gender.csv").read_text().splitlines()[1].split(",")
    assert len(header) == 2 + 81
    assert run("infogain", "--manifest", m, "--target", "gender", "--out", tmp_path) == 0
    assert len((tmp_path / "infogain_gender.csv").read_text().splitlines()) == 2 + 81


def test_transfer_and_tsne(study, tmp_path):
    args = ["--manifest", study / "manifest.csv", "--uci", study / "uci", "--target", "gender",
            "--algo", "nb", "--out", tmp_path]
    assert run("transfer", *args) == 0
    table = (tmp_path / "contingency_gender_nb.csv").read_text().splitlines()
    assert table[1].split(",")[0] == "activity" and table[1].endswith("Total")
    assert table[-1].split(",")[-1] == "2947"
    assert run("tsne", "--manifest", study / "manifest.csv", "--target", "gender", "--algo", "nb",
               "--perplexity", 3, "--iterations", 250, "--out", tmp_path) == 0
    assert len((tmp_path / "tsne_gender_nb.csv").read_text().splitlines()) == 2 + 12


def test_config_file_and_flag_override(study, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"manifest": str(study / "manifest.csv"), "target": "gender",
                               "algo": "dt", "folds": 3, "runs": 1}))
    assert run("cv", "--config", cfg, "--algo", "nb", "--out", tmp_path / "o") == 0
    assert (tmp_path / "o" / "cv_gender.csv").read_text().splitlines()[2].startswith("nb,")


@pytest.mark.parametrize("argv", [
    ["cv", "--target", "gender"],                          # no manifest / out
    ["cv", "--target", "height", "--out", "x"],            # argparse choice
    ["cv", "--folds", "1", "--target", "gender", "--out", "x", "--manifest", "m"],
    ["transfer", "--target", "gender", "--out", "x", "--manifest", "m"],
])
def test_usage_errors_exit_2(argv, capsys):
    # argparse exits on its own; later checks return the code
    try:
        code = main(argv)
    except SystemExit as exc:
        code = exc.code
    assert code == 2


def test_unknown_config_key(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"colour": "blue"}')
    assert run("cv", "--config", cfg) == 2


def test_data_error_writes_nothing(study, tmp_path, capsys):
    out = tmp_path / "out"
    bad = tmp_path / "m.csv"
    bad.write_text("subject_id,gender,accel_path\nz1,Male,missing.csv\n")
    assert run("cv", "--manifest", bad, "--target", "gender", "--out", out) == 1
    assert "missing.csv" in capsys.readouterr().err
    assert not out.exists()
    # a failure after training still leaves the directory untouched
    assert run("transfer", "--manifest", study / "manifest.csv", "--uci", tmp_path / "nowhere",
               "--target", "gender", "--algo", "nb", "--out", out) == 1
    assert not out.exists()
