"""Command-line entry point: ``crmssl <subcommand> [options]``.

Exit status is 0 on success, 1 on invalid input or configuration and 2 when
a run fails. Outputs are staged and only moved into ``--out-dir`` once the
whole command has succeeded.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import shutil
import sys
import tempfile

from .baselines import GaussianNaiveBayes, KnnClassifier
from .dataset import (DatasetError, SplitSpec, generate_synthetic, load_csv,
                      split_labeled_unlabeled, split_random, write_csv, write_manifest)
from .evaluation import (EvaluationError, SweepResult, compare, confusion,
                         evaluation_report, fit_arm, metrics, predicted_labels, prepare,
                         sweep_divisor, write_json)
from .mlp import Mlp, MlpClassifier, TrainConfig, TrainingError
from .model_io import load_model, save_model
from .preprocess import PreprocessError
from .ssl import SelfTrainConfig

log = logging.getLogger("crmssl")

EXIT_OK, EXIT_INVALID, EXIT_FAILED = 0, 1, 2

DEFAULTS = {
    "data": None,
    "synthetic": None,
    "label": None,
    "test_fraction": 0.3,
    "split_seed": 0,
    "labeled_count": None,
    "labeled_seed": None,
    "cycles": 500,
    "learning_rate": 0.3,
    "epsilon": 1.0e-5,
    "momentum": 0.0,
    "shuffle_seed": 0,
    "init_seed": 0,
    "hidden_size": None,
    "divisor": 4,
    "plus_one": False,
    "threshold": 0.8,
    "max_iterations": 10,
    "positive_class": None,
    # synth
    "n": 1000,
    "d": 31,
    "separation": 1.0,
    "seed": 0,
    # evaluate
    "model": None,
    # sweep
    "divisors": "1,2,3,4,5,6",
    "both_variants": False,
    "supervised": False,
    # compare
    "learners": "mlp,nn,knn,nb",
    "k": 5,
    "ssl_baselines": False,
}

LEARNER_NAMES = {
    "mlp": "Proposed algorithm",
    "nn": "Neural Net",
    "knn": "KNN",
    "nb": "Naive Bayes",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- argument definitions --------------------------------------------------


def _data_args(p):
    g = p.add_argument_group("data")
    g.add_argument("--data", help="input CSV (first row is the header)")
    g.add_argument("--synthetic", metavar="N,D,SEP,SEED",
                   help="generate a two-Gaussian dataset instead of reading --data")
    g.add_argument("--label", help="label column (default: class)")
    g.add_argument("--test-fraction", type=float)
    g.add_argument("--split-seed", type=int)
    g.add_argument("--labeled-count", type=int,
                   help="rows of the training split kept labeled (default: 30%%)")
    g.add_argument("--labeled-seed", type=int, help="defaults to --split-seed")
    g.add_argument("--positive-class")


def _train_args(p):
    g = p.add_argument_group("network")
    g.add_argument("--cycles", type=int, help="training cycles (default 500)")
    g.add_argument("--learning-rate", type=float, help="default 0.3")
    g.add_argument("--epsilon", type=float, help="error epsilon (default 1e-5)")
    g.add_argument("--momentum", type=float)
    g.add_argument("--shuffle-seed", type=int)
    g.add_argument("--init-seed", type=int)
    g.add_argument("--hidden-size", type=int, help="override the sizing rule; 0 = no hidden layer")
    g.add_argument("--divisor", type=int, help="hidden size = (attributes + classes) / divisor")
    g.add_argument("--plus-one", action=argparse.BooleanOptionalAction, default=None)


def _ssl_args(p):
    g = p.add_argument_group("self-training")
    g.add_argument("--threshold", type=float, help="confidence threshold (default 0.8)")
    g.add_argument("--max-iterations", type=int)


def build_parser():
    parser = _Parser(prog="crmssl", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--out-dir", required=True)
        p.add_argument("--config", help="JSON key/value file, e.g. a previous run.json")
        p.add_argument("-v", "--verbose", action="store_true")
        return p

    p = add("synth", "write a synthetic two-class dataset")
    p.add_argument("--n", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--separation", type=float)
    p.add_argument("--seed", type=int)

    p = add("split", "write train/test and labeled/unlabeled partitions")
    _data_args(p)

    p = add("train", "train the network on the labeled rows only")
    _data_args(p)
    _train_args(p)

    p = add("selftrain", "self-train the network on labeled + unlabeled rows")
    _data_args(p)
    _train_args(p)
    _ssl_args(p)

    p = add("evaluate", "score a saved model on a labeled CSV")
    p.add_argument("--model")
    p.add_argument("--data")
    p.add_argument("--label")
    p.add_argument("--positive-class")

    p = add("sweep", "test error for hidden sizes (attributes + classes) / X")
    _data_args(p)
    _train_args(p)
    _ssl_args(p)
    p.add_argument("--divisors", help="comma-separated X values (default 1..6)")
    p.add_argument("--both-variants", action=argparse.BooleanOptionalAction, default=None,
                   help="emit rows with and without the +1 term")
    p.add_argument("--supervised", action=argparse.BooleanOptionalAction, default=None,
                   help="skip self-training")

    p = add("compare", "comparison table for several learners")
    _data_args(p)
    _train_args(p)
    _ssl_args(p)
    p.add_argument("--learners", help="comma-separated from mlp,nn,knn,nb")
    p.add_argument("--k", type=int, help="KNN neighbours (default 5)")
    p.add_argument("--ssl-baselines", action=argparse.BooleanOptionalAction, default=None,
                   help="self-train KNN and naive Bayes too")
    return parser


# -- configuration ---------------------------------------------------------


def resolve_config(args) -> dict:
    """flags > config file > defaults, restricted to the options of the subcommand."""
    file_cfg = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        if "config" in file_cfg and isinstance(file_cfg["config"], dict):
            file_cfg = file_cfg["config"]
        unknown = set(file_cfg) - set(DEFAULTS)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    skip = {"command", "out_dir", "config", "verbose"}
    resolved = {}
    for key, value in vars(args).items():
        if key in skip:
            continue
        if value is None:
            value = file_cfg.get(key, DEFAULTS[key])
        resolved[key] = value
    return resolved


def _train_config(cfg) -> TrainConfig:
    return TrainConfig(cfg["cycles"], cfg["learning_rate"], cfg["epsilon"],
                       cfg["momentum"], cfg["shuffle_seed"])


def _ssl_config(cfg) -> SelfTrainConfig:
    return SelfTrainConfig(cfg["threshold"], cfg["max_iterations"], _train_config(cfg))


def _mlp(cfg, **overrides) -> MlpClassifier:
    kw = dict(hidden_size=cfg["hidden_size"], divisor=cfg["divisor"],
              plus_one=bool(cfg["plus_one"]), config=_train_config(cfg),
              init_seed=cfg["init_seed"])
    kw.update(overrides)
    return MlpClassifier(**kw)


def _load_source(cfg):
    if bool(cfg["data"]) == bool(cfg["synthetic"]):
        raise UsageError("give exactly one of --data or --synthetic")
    if cfg["data"]:
        return load_csv(cfg["data"], cfg["label"] or "class")
    try:
        n, d, sep, seed = cfg["synthetic"].split(",")
        return generate_synthetic(int(n), int(d), float(sep), int(seed))
    except ValueError as exc:
        raise UsageError(f"bad --synthetic spec {cfg['synthetic']!r}: {exc}") from None


def _partitions(cfg):
    es = _load_source(cfg)
    train, test = split_random(es, SplitSpec(cfg["test_fraction"], cfg["split_seed"]))
    count = cfg["labeled_count"]
    if count is None:
        count = max(1, int(0.3 * len(train)))
    seed = cfg["labeled_seed"] if cfg["labeled_seed"] is not None else cfg["split_seed"]
    labeled, unlabeled = split_labeled_unlabeled(train, count, seed)
    return labeled, unlabeled, test


# -- subcommands -----------------------------------------------------------


def cmd_synth(cfg, out):
    es = generate_synthetic(cfg["n"], cfg["d"], cfg["separation"], cfg["seed"])
    write_csv(es, os.path.join(out, "data.csv"))


def cmd_split(cfg, out):
    labeled, unlabeled, test = _partitions(cfg)
    write_manifest(os.path.join(out, "manifest.csv"),
                   {"labeled": labeled, "unlabeled": unlabeled, "test": test})
    write_csv(labeled, os.path.join(out, "labeled.csv"))
    write_csv(unlabeled, os.path.join(out, "unlabeled.csv"))
    write_csv(test, os.path.join(out, "test.csv"))


def _save_trained(out, learner, data, cfg):
    net = Mlp(learner.net.topology, learner.net.params, data.class_names)
    save_model(os.path.join(out, "model.json"), net, data.preprocessor,
               cfg["label"] or "class")


def cmd_train(cfg, out):
    data = prepare(*_partitions(cfg))
    learner = _mlp(cfg).fit(data.labeled.features(), data.labeled.label_codes(),
                            len(data.class_names))
    _save_trained(out, learner, data, cfg)
    with open(os.path.join(out, "history.csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["cycle", "error"])
        for i, e in enumerate(learner.history.errors, start=1):
            w.writerow([i, repr(float(e))])
    log.info("trained %d cycles (%s)", len(learner.history.errors), learner.history.stop_reason)


def cmd_selftrain(cfg, out):
    data = prepare(*_partitions(cfg))
    learner, st_log = fit_arm(_mlp(cfg), data, _ssl_config(cfg), semi_supervised=True)
    _save_trained(out, learner, data, cfg)
    st_log.write_csv(os.path.join(out, "selftrain_log.csv"), data.class_names)
    log.info("self-training stopped after %d iterations (%s)", len(st_log), st_log.termination)


def cmd_evaluate(cfg, out):
    if not cfg["model"] or not cfg["data"]:
        raise UsageError("evaluate needs --model and --data")
    net, pre, label = load_model(cfg["model"])
    es = load_csv(cfg["data"], cfg["label"] or label)
    if not es.is_fully_labeled:
        raise DatasetError("evaluation data has rows without labels")
    X = pre.transform_matrix(es)
    names = net.class_names
    pred = predicted_labels(MlpClassifier.from_network(net), X, names)
    cm = confusion(pred, list(es.labels), cfg["positive_class"] or names[-1], names)
    report = evaluation_report(cm)
    write_json(report, os.path.join(out, "metrics.json"))
    with open(os.path.join(out, "metrics.csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["metric", "value"])
        for k in ("a", "b", "c", "d"):
            w.writerow([k, report["confusion"][k]])
        for k, v in metrics(cm).as_dict().items():
            w.writerow([k, v if isinstance(v, str) else repr(v)])
    print(json.dumps(report["metrics"], sort_keys=True))


def _int_list(text):
    try:
        values = [int(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None
    if not values or any(v < 1 for v in values):
        raise UsageError("divisors must be positive integers")
    return values


def cmd_sweep(cfg, out):
    divisors = _int_list(cfg["divisors"])
    data = prepare(*_partitions(cfg))
    variants = [False, True] if cfg["both_variants"] else [bool(cfg["plus_one"])]
    result = SweepResult()
    for plus_one in variants:
        part = sweep_divisor(data.labeled, data.unlabeled, data.test, divisors, plus_one,
                             _ssl_config(cfg), init_seed=cfg["init_seed"],
                             semi_supervised=not cfg["supervised"],
                             positive_class=cfg["positive_class"])
        result.rows.extend(part.rows)
    result.write_csv(os.path.join(out, "sweep.csv"))


def cmd_compare(cfg, out):
    tokens = [t.strip() for t in str(cfg["learners"]).split(",") if t.strip()]
    bad = [t for t in tokens if t not in LEARNER_NAMES]
    if not tokens or bad:
        raise UsageError(f"unknown learners {bad}; choose from {', '.join(LEARNER_NAMES)}")
    ssl_base = bool(cfg["ssl_baselines"])
    entries = []
    for t in tokens:
        if t == "mlp":
            entries.append((LEARNER_NAMES[t], _mlp(cfg), True))
        elif t == "nn":
            entries.append((LEARNER_NAMES[t], _mlp(cfg), False))
        elif t == "knn":
            entries.append((LEARNER_NAMES[t], KnnClassifier(cfg["k"]), ssl_base))
        else:
            entries.append((LEARNER_NAMES[t], GaussianNaiveBayes(), ssl_base))
    labeled, unlabeled, test = _partitions(cfg)
    table = compare(entries, labeled, unlabeled, test, _ssl_config(cfg), cfg["positive_class"])
    table.write_csv(os.path.join(out, "compare.csv"))
    write_json(table.to_dict(), os.path.join(out, "compare.json"))
    print(table.to_text())


COMMANDS = {
    "synth": cmd_synth,
    "split": cmd_split,
    "train": cmd_train,
    "selftrain": cmd_selftrain,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
    "compare": cmd_compare,
}

VALIDATION_ERRORS = (UsageError, DatasetError, PreprocessError, EvaluationError, ValueError)


def run_command(argv) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve_config(args)
    except UsageError as exc:
        print(f"crmssl: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")

    out_dir = args.out_dir
    try:
        os.makedirs(out_dir, exist_ok=True)
        staging = tempfile.mkdtemp(prefix=".staging-", dir=out_dir)
    except OSError as exc:
        print(f"crmssl: error: cannot create {out_dir}: {exc}", file=sys.stderr)
        return EXIT_FAILED
    try:
        COMMANDS[args.command](cfg, staging)
        write_json({"command": args.command, "config": cfg}, os.path.join(staging, "run.json"))
        for name in sorted(os.listdir(staging)):
            os.replace(os.path.join(staging, name), os.path.join(out_dir, name))
        return EXIT_OK
    except VALIDATION_ERRORS as exc:
        print(f"crmssl: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (TrainingError, OSError, RuntimeError) as exc:
        print(f"crmssl: failed: {exc}", file=sys.stderr)
        return EXIT_FAILED
    finally:
        shutil.rmtree(staging, ignore_errors=True)


def main(argv=None):
    sys.exit(run_command(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
