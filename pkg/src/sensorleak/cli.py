"""Run feature extraction, evaluation, transfer and embedding from the command line.

Every command computes all of its outputs in memory and writes them only
after the last stage succeeds, so a failed run leaves no partial files.

Exit codes: 0 success, 1 data error, 2 usage or configuration error.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional


from . import __version__
from .core import validate_session
from .embed import TsneParams, format_embedding_csv, tsne, zscore
from .evaluation import EvalError, cross_validate, format_cv_table, METRIC_NAMES
from .features import Dataset, FeatureError, FeatureSchema, build_dataset, featurize_sessions, format_feature_csv
from .infer import TransferPlan, cross_predict, format_predictions_csv
from .ingest import IngestError, UciLayout, load_study, load_uci_har, read_manifest
from .insight import format_contingency_csv, format_ig_csv, information_gain
from .learn import ALGORITHMS, LearnError, fit, spec_from_name
from .synth import (ProfileError, fill_missing_labels, generate_study, separable_profiles,
                    study_files, uci_like_files)

logger = logging.getLogger("sensorleak")

EXIT_OK, EXIT_DATA, EXIT_USAGE = 0, 1, 2
COMMANDS = ("validate", "featurize", "cv", "infogain", "transfer", "tsne", "synth")
TARGETS = {"gender": "gender", "age": "age_group", "age_group": "age_group",
           "hand": "hand", "app": "app"}
#: classifier reported best per target; used by transfer/tsne without --algo
BEST_ALGO = {"gender": "svm", "age_group": "mlp", "app": "mlp", "hand": "dt"}
DATA_ERRORS = (IngestError, FeatureError, LearnError, EvalError, ProfileError, ValueError,
               FloatingPointError)


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    out: Optional[str] = None
    manifest: Optional[str] = None
    uci: Optional[str] = None
    split: str = "test"
    accel_source: str = "total_acc"
    target: Optional[str] = None
    algo: Optional[str] = None
    folds: int = 5
    runs: int = 5
    seed: int = 42
    timing: bool = False
    perplexity: float = 30.0
    iterations: int = 1000
    subjects: int = 28
    samples: int = 3000
    separation: float = 20.0
    uci_like: bool = False

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.target is not None and self.target not in TARGETS:
            raise UsageError(f"--target must be one of {sorted(TARGETS)}")
        if self.algo is not None and self.algo not in ALGORITHMS + ("all",):
            raise UsageError(f"--algo must be one of {list(ALGORITHMS) + ['all']}")
        if self.folds < 2 or self.runs < 1:
            raise UsageError("--folds must be at least 2 and --runs at least 1")
        if self.seed < 0:
            raise UsageError("--seed must be non-negative")
        if self.split not in ("train", "test"):
            raise UsageError("--split must be train or test")
        if self.accel_source not in ("total_acc", "body_acc"):
            raise UsageError("--accel-source must be total_acc or body_acc")

    @property
    def attribute(self) -> str:
        if self.target is None:
            raise UsageError(f"{self.command} needs --target")
        return TARGETS[self.target]

    def algorithms(self, default: str) -> list:
        algo = self.algo or default
        return list(ALGORITHMS) if algo == "all" else [algo]

    def echo(self) -> str:
        """Provenance line: the config minus the output location."""
        fields = {k: v for k, v in dataclasses.asdict(self).items() if k != "out"}
        return f"sensorleak {__version__} " + json.dumps(fields, sort_keys=True)


CONFIG_KEYS = {f.name for f in dataclasses.fields(RunConfig)}


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    # defaults are None so a config file can fill whatever the flags leave unset
    common.add_argument("--config", help="JSON file with RunConfig keys")
    common.add_argument("--out", help="output directory")
    common.add_argument("--manifest", help="study manifest CSV")
    common.add_argument("--uci", help="extracted UCI HAR dataset root")
    common.add_argument("--split", choices=("train", "test"))
    common.add_argument("--accel-source", dest="accel_source", choices=("total_acc", "body_acc"))
    common.add_argument("--target", choices=sorted(TARGETS))
    common.add_argument("--algo", choices=list(ALGORITHMS) + ["all"])
    common.add_argument("--folds", type=int)
    common.add_argument("--runs", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--timing", action="store_const", const=True,
                        help="record wall-clock fit time (makes cv output non-reproducible)")
    common.add_argument("--perplexity", type=float)
    common.add_argument("--iterations", type=int)
    common.add_argument("--subjects", type=int, help="synth: sessions per label value")
    common.add_argument("--samples", type=int, help="synth: samples per axis")
    common.add_argument("--separation", type=float, help="synth: centroid gap in noise stds")
    common.add_argument("--uci-like", dest="uci_like", action="store_const", const=True,
                        help="synth: also write a stand-in dataset in UCI HAR layout")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="sensorleak", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "validate": "load inputs and report invariant violations",
        "featurize": "write the feature matrix CSV",
        "cv": "repeated stratified cross-validation report",
        "infogain": "information-gain ranking of the study features",
        "transfer": "train on the study, label the UCI windows, tabulate",
        "tsne": "2-D embedding CSV",
        "synth": "generate a synthetic study",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def resolve_config(ns: argparse.Namespace) -> RunConfig:
    values = {}
    if ns.config:
        try:
            loaded = json.loads(Path(ns.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {ns.config}: {exc}") from None
        if not isinstance(loaded, dict):
            raise UsageError("config file must hold a JSON object")
        unknown = set(loaded) - CONFIG_KEYS
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        if loaded.get("command", ns.command) != ns.command:
            raise UsageError(f"config is for {loaded['command']!r}, not {ns.command!r}")
        values.update(loaded)
    for key in CONFIG_KEYS:
        flag = getattr(ns, key, None)
        if flag is not None:
            values[key] = flag
    values["command"] = ns.command
    try:
        return RunConfig(**values)
    except TypeError as exc:
        raise UsageError(str(exc)) from None


# --------------------------------------------------------------------------
# commands: each returns {relative path: text}

def _study(cfg: RunConfig) -> list:
    if not cfg.manifest:
        raise UsageError(f"{cfg.command} needs --manifest")
    return load_study(read_manifest(cfg.manifest))


def _uci(cfg: RunConfig) -> list:
    return load_uci_har(UciLayout(Path(cfg.uci), cfg.split, cfg.accel_source))


def cmd_validate(cfg: RunConfig) -> tuple:
    if not (cfg.manifest or cfg.uci):
        raise UsageError("validate needs --manifest and/or --uci")
    sessions = (_study(cfg) if cfg.manifest else []) + (_uci(cfg) if cfg.uci else [])
    lines = ["session,field,rule"]
    bad = 0
    for s in sessions:
        problems = validate_session(s)
        bad += bool(problems)
        lines += [f"{s.subject_id},{v.field},{v.rule}" for v in problems]
    print(f"{len(sessions)} sessions, {bad} with violations")
    for line in lines[1:]:
        print(line)
    files = {"validation.csv": f"# {cfg.echo()}\n" + "\n".join(lines) + "\n"}
    return files, EXIT_DATA if bad else EXIT_OK


def cmd_featurize(cfg: RunConfig) -> dict:
    if cfg.uci and not cfg.manifest:
        sessions, attribute = _uci(cfg), "activity"
    else:
        sessions, attribute = _study(cfg), (cfg.attribute if cfg.target else None)
    schema = FeatureSchema.for_sensors(set.intersection(*(set(s.traces) for s in sessions))) \
        if sessions else FeatureSchema.full()
    targets = [(s.labels.get(attribute) or "") if attribute else "" for s in sessions]
    ds = Dataset(featurize_sessions(sessions, schema), targets,
                 tuple(s.subject_id for s in sessions), schema.names, attribute, schema)
    name = f"features_{cfg.target or attribute or 'study'}.csv"
    return {name: format_feature_csv(ds, cfg.echo())}


def _study_dataset(cfg: RunConfig) -> Dataset:
    sessions = _study(cfg)
    sensors = set.intersection(*(set(s.traces) for s in sessions)) if sessions else set()
    if not sensors:
        raise FeatureError("the study has no sensor common to every session")
    return build_dataset(sessions, cfg.attribute, FeatureSchema.for_sensors(sensors))


def cmd_cv(cfg: RunConfig) -> dict:
    ds = _study_dataset(cfg)
    reports = {}
    fold_lines = [",".join(["algo", "run", "fold", *METRIC_NAMES])]
    for name in cfg.algorithms("all"):
        rep = cross_validate(spec_from_name(name), ds, cfg.folds, cfg.runs, cfg.seed)
        reports[name] = rep
        for r, run in enumerate(rep.folds):
            for f, m in enumerate(run):
                fold_lines.append(",".join([name, str(r), str(f), *(f"{v:.6f}" for v in m.as_array())]))
    tag = cfg.target
    return {
        f"cv_{tag}.csv": format_cv_table(reports, cfg.echo(), timing=cfg.timing),
        f"cv_{tag}_folds.csv": f"# {cfg.echo()}\n" + "\n".join(fold_lines) + "\n",
    }


def cmd_infogain(cfg: RunConfig) -> dict:
    return {f"infogain_{cfg.target}.csv": format_ig_csv(information_gain(_study_dataset(cfg)), cfg.echo())}


def cmd_transfer(cfg: RunConfig) -> dict:
    if not cfg.uci:
        raise UsageError("transfer needs --uci")
    train, test = _study(cfg), _uci(cfg)
    files = {}
    for name in cfg.algorithms(BEST_ALGO[cfg.attribute]):
        res = cross_predict(TransferPlan(train, test, cfg.attribute, spec_from_name(name)), cfg.seed)
        tag = f"{cfg.target}_{name}"
        files[f"predictions_{tag}.csv"] = format_predictions_csv(res, cfg.target, header=cfg.echo())
        files[f"contingency_{tag}.csv"] = format_contingency_csv(res.table, header=cfg.echo())
        files[f"infogain_transfer_{tag}.csv"] = format_ig_csv(res.ig, cfg.echo())
        logger.info("%s: %d predictions", name, len(res.predictions))
    return files


def cmd_tsne(cfg: RunConfig) -> dict:
    params = TsneParams(perplexity=cfg.perplexity, iterations=cfg.iterations, seed=cfg.seed)
    files = {}
    for name in cfg.algorithms(BEST_ALGO[cfg.attribute]):
        spec = spec_from_name(name)
        if cfg.uci:
            res = cross_predict(TransferPlan(_study(cfg), _uci(cfg), cfg.attribute, spec), cfg.seed)
            X, labels, ids = res.test_dataset.X, res.predictions, res.row_ids
        else:
            ds = _study_dataset(cfg)
            model = fit(spec, ds, cfg.seed)
            X, labels, ids = ds.X, list(model.predict(ds.X)), ds.row_ids
        emb = tsne(zscore(X), params, ids)
        files[f"tsne_{cfg.target}_{name}.csv"] = format_embedding_csv(emb, labels, cfg.echo())
    return files


def cmd_synth(cfg: RunConfig) -> dict:
    attribute = TARGETS[cfg.target or "app"]
    profiles = separable_profiles(attribute, separation=cfg.separation, samples=cfg.samples)
    sessions = generate_study(profiles, cfg.subjects, cfg.seed)
    sessions = fill_missing_labels(sessions, cfg.seed)
    files = study_files(sessions)
    files["manifest.csv"] = f"# {cfg.echo()}\n" + files["manifest.csv"]
    if cfg.uci_like:
        files.update({f"uci/{k}": v for k, v in uci_like_files(cfg.split, seed=cfg.seed).items()})
    return files


HANDLERS = {
    "validate": cmd_validate, "featurize": cmd_featurize, "cv": cmd_cv,
    "infogain": cmd_infogain, "transfer": cmd_transfer, "tsne": cmd_tsne,
    "synth": cmd_synth,
}


def run(cfg: RunConfig) -> int:
    if cfg.command not in ("validate",) and not cfg.out:
        raise UsageError(f"{cfg.command} needs --out")
    result = HANDLERS[cfg.command](cfg)
    files, status = result if isinstance(result, tuple) else (result, EXIT_OK)
    if cfg.out:
        out = Path(cfg.out)
        for rel, text in files.items():
            path = out / rel
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8")
        logger.info("wrote %d file(s) to %s", len(files), out)
    return status


def main(argv=None) -> int:
    parser = _parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return run(resolve_config(ns))
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"sensorleak: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DATA_ERRORS as exc:
        print(f"sensorleak: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
