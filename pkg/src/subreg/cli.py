"""Command-line entry point.

Every subcommand accepts ``--config FILE`` (JSON with keys named like the
long flags, dashes or underscores) and explicit flags override it.  The
effective configuration is echoed to ``<out>/config.json``.  Exit codes:
0 success, 1 usage error, 2 runtime error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from . import __version__
from .experiments import (
    DEFAULT_NOISE_GRID,
    DEFAULT_SIZE_GRID,
    SweepConfig,
    counterexample_demo,
    emit_csv,
    noise_sweep,
    quantile_sweep,
    size_sweep,
    unary_power_predicates,
)
from .languages import (
    DEFAULT_LEN_RANGE,
    default_spec,
    deciding_predicates,
    flip_labels,
    generate_dataset,
    load_spec,
    read_dataset,
    write_dataset,
)
from .learners import (
    DEFAULT_EPOCHS,
    DEFAULT_LR,
    DEFAULT_TOL,
    LinearModel,
    evaluate,
    normalized_margin,
    train_logreg,
    train_perceptron,
)
from .predicates import PredicateSet

OUT_ENV = "SUBREG_OUT"
log = logging.getLogger("subreg")

DEFAULTS: Dict[str, object] = {
    "seed": 0, "jobs": 1, "k": None, "len_min": None, "len_max": None,
    "n_pos": 1000, "n_neg": 1000, "noise": 0.0,
    "learner": "logreg", "l2": None, "lr": DEFAULT_LR, "epochs": DEFAULT_EPOCHS, "tol": DEFAULT_TOL,
    "max_epochs": 100,
    "grid": None, "trials": 5, "n_train": 2000, "n_test": 1000,
    "neg_per_pos": 1, "splits": "0.8,0.1,0.1", "top_k": 15, "bins": 20, "min_stem": 3,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file of option values; flags override it")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help=f"output directory (default: ${OUT_ENV} or ./results)")
    p.add_argument("--jobs", type=int)


def _language(p: argparse.ArgumentParser) -> None:
    p.add_argument("--class", dest="class_tag", choices=["sl", "sp", "lt", "pt", "ltt", "tsl"],
                   type=str.lower)
    p.add_argument("--spec", help="language spec JSON (overrides the class default)")
    p.add_argument("--k", type=int)
    p.add_argument("--len-min", type=int)
    p.add_argument("--len-max", type=int)


def _learner(p: argparse.ArgumentParser) -> None:
    p.add_argument("--learner", choices=["logreg", "perceptron"])
    p.add_argument("--l2", type=float)
    p.add_argument("--lr", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--max-epochs", type=int, help="perceptron epoch cap")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="subreg", description="Subregular predicate features and separability experiments")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("gen", help="sample a labeled dataset")
    _common(p); _language(p)
    p.add_argument("--n-pos", type=int)
    p.add_argument("--n-neg", type=int)
    p.add_argument("--noise", type=float)

    p = sub.add_parser("featurize", help="truth-vector matrix of a dataset")
    _common(p); _language(p)
    p.add_argument("--data", required=True)

    p = sub.add_parser("train", help="train a linear model on deciding predicates")
    _common(p); _language(p); _learner(p)
    p.add_argument("--data", required=True)

    p = sub.add_parser("eval", help="evaluate a saved model on a dataset")
    _common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)

    for name in ("sweep-noise", "sweep-size", "sweep-quantile"):
        p = sub.add_parser(name, help=f"{name.split('-')[1]} sweep to CSV")
        _common(p); _language(p); _learner(p)
        p.add_argument("--grid", help="comma-separated grid values")
        p.add_argument("--trials", type=int)
        p.add_argument("--n-train", type=int)
        p.add_argument("--n-test", type=int)
        p.add_argument("--noise", type=float, help="fixed train noise (size sweep)")

    p = sub.add_parser("counterexample", help="unary witness against a fixed predicate set")
    _common(p)
    p.add_argument("--n-preds", type=int, required=True)
    p.add_argument("--m", type=int, required=True)

    p = sub.add_parser("morph", help="affix-sequence pipeline")
    _common(p); _learner(p)
    p.add_argument("--corpus", help="word<TAB>affixes TSV (default: bundled toy corpus)")
    p.add_argument("--neg-per-pos", type=int)
    p.add_argument("--splits", help="train,dev,test ratios")
    p.add_argument("--top-k", type=int)
    p.add_argument("--bins", type=int)
    p.add_argument("--min-stem", type=int)
    return parser


def _effective(args: argparse.Namespace) -> Dict[str, object]:
    cfg: Dict[str, object] = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        for key, val in loaded.items():
            key = key.replace("-", "_")
            cfg["class_tag" if key == "class" else key] = val
    for key, val in vars(args).items():
        if val is not None and key not in ("config", "verbose"):
            cfg[key] = val
    if cfg.get("out") is None:
        cfg["out"] = os.environ.get(OUT_ENV, "results")
    return cfg


def _spec(cfg):
    if cfg.get("spec"):
        spec = load_spec(cfg["spec"])
    elif cfg.get("class_tag"):
        spec = default_spec(str(cfg["class_tag"]), cfg.get("k"))
    else:
        raise UsageError("one of --class or --spec is required")
    lo, hi = DEFAULT_LEN_RANGE[spec.class_tag]
    lo = cfg["len_min"] if cfg.get("len_min") is not None else lo
    hi = cfg["len_max"] if cfg.get("len_max") is not None else hi
    return spec, (int(lo), int(hi))


def _floats(text, name) -> List[float]:
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"bad {name}: {text!r}") from exc


def _prepare(cfg) -> Path:
    out = Path(str(cfg["out"]))
    out.mkdir(parents=True, exist_ok=True)
    echo = {k: v for k, v in sorted(cfg.items()) if k != "command"}
    (out / "config.json").write_text(json.dumps({"command": cfg["command"], **echo}, indent=1, default=str) + "\n")
    return out


def _train_model(cfg, X, y, names) -> LinearModel:
    if cfg["learner"] == "perceptron":
        model, mistakes = train_perceptron(X, y, int(cfg["max_epochs"]), feature_names=names)
        model.config["mistakes"] = mistakes
        return model
    l2 = cfg["l2"] if cfg["l2"] is not None else 0.0
    return train_logreg(X, y, l2=float(l2), lr=float(cfg["lr"]), epochs=int(cfg["epochs"]),
                        tol=float(cfg["tol"]), feature_names=names)


def cmd_gen(cfg) -> None:
    spec, rng = _spec(cfg)
    out = _prepare(cfg)
    d = generate_dataset(spec, int(cfg["n_pos"]), int(cfg["n_neg"]), rng, int(cfg["seed"]))
    if float(cfg["noise"]) > 0:
        d = flip_labels(d, float(cfg["noise"]), int(cfg["seed"]))
    write_dataset(out / "dataset.jsonl", d, spec.alphabet)
    (out / "spec.json").write_text(json.dumps(spec.to_dict(), indent=1) + "\n")
    print(f"wrote {len(d)} items to {out / 'dataset.jsonl'} (spec {spec.fingerprint()})")


def cmd_featurize(cfg) -> None:
    spec, _ = _spec(cfg)
    d = read_dataset(cfg["data"], spec.alphabet)
    out = _prepare(cfg)
    P = deciding_predicates(spec)
    X = P.feature_matrix(d.strings)
    np.savez_compressed(out / "features.npz", X=X, y=d.labels)
    P.save(out / "predicates.json")
    print(f"{X.shape[0]} x {X.shape[1]} feature matrix -> {out / 'features.npz'}")


def cmd_train(cfg) -> None:
    spec, _ = _spec(cfg)
    d = read_dataset(cfg["data"], spec.alphabet)
    out = _prepare(cfg)
    P = deciding_predicates(spec)
    model = _train_model(cfg, P.feature_matrix(d.strings), d.labels, P.names)
    model.config.update(predicates=P.to_dict(), spec=spec.to_dict(), dataset=_fingerprint_file(cfg["data"]))
    model.save(out / "model.json")
    m = evaluate(model, P.feature_matrix(d.strings), d.labels)
    print(f"train accuracy {m.accuracy:.4f}; model -> {out / 'model.json'}")


def _fingerprint_file(path) -> str:
    import hashlib
    return hashlib.sha1(Path(path).read_bytes()).hexdigest()[:12]


def cmd_eval(cfg) -> None:
    model = LinearModel.load(cfg["model"])
    if "predicates" not in model.config:
        raise UsageError("model file lacks its predicate set")
    P = PredicateSet.from_dict(model.config["predicates"])
    d = read_dataset(cfg["data"], P.alphabet)
    out = _prepare(cfg)
    X = P.feature_matrix(d.strings)
    metrics = evaluate(model, X, d.labels)
    margins = normalized_margin(model, X, d.labels)
    (out / "metrics.json").write_text(json.dumps(metrics.to_dict(), indent=1) + "\n")
    with open(out / "margins.csv", "w") as fh:
        fh.write("index,label,margin\n")
        for i, (lab, mg) in enumerate(zip(d.labels, margins)):
            fh.write(f"{i},{lab},{mg:.6g}\n")
    print(json.dumps(metrics.to_dict()))


def cmd_sweep(cfg) -> None:
    kind = cfg["command"].split("-")[1]
    spec, rng = _spec(cfg)
    default_grid = DEFAULT_SIZE_GRID if kind == "size" else DEFAULT_NOISE_GRID
    grid = _floats(cfg["grid"], "grid") if cfg.get("grid") is not None else list(default_grid)
    if kind == "size":
        grid = [int(g) for g in grid]
    sc = SweepConfig(spec.class_tag, spec=spec, grid=tuple(grid), n_train=int(cfg["n_train"]),
                     n_test=int(cfg["n_test"]), trials=int(cfg["trials"]), base_seed=int(cfg["seed"]),
                     len_range=rng, l2=cfg["l2"], lr=float(cfg["lr"]), epochs=int(cfg["epochs"]),
                     tol=float(cfg["tol"]), noise=float(cfg["noise"]), jobs=int(cfg["jobs"]))
    out = _prepare(cfg)
    fn = {"noise": noise_sweep, "size": size_sweep, "quantile": quantile_sweep}[kind]
    rows = fn(sc)
    path = out / f"sweep_{kind}_{spec.class_tag.lower()}.csv"
    emit_csv(rows, path)
    print(f"{len(rows)} rows -> {path}")


def cmd_counterexample(cfg) -> None:
    n, m = int(cfg["n_preds"]), int(cfg["m"])
    if n < 1:
        raise UsageError("--n-preds must be >= 1")
    if m <= 2 ** n:
        raise UsageError(f"--m must exceed 2^n = {2 ** n}")
    P = unary_power_predicates(n)
    out = _prepare(cfg)
    w = counterexample_demo(P, m)
    report = {"predicates": P.names, "m": m, "x": "a" * len(w.x), "y": "a" * len(w.y),
              "len_x": len(w.x), "len_y": len(w.y), "truth_vector": list(w.truth_vector),
              "memberships": list(w.memberships)}
    (out / "witness.json").write_text(json.dumps(report, indent=1) + "\n")
    print(w.describe())


def cmd_morph(cfg) -> None:
    from .morphology import run_pipeline

    ratios = _floats(cfg["splits"], "splits")
    if len(ratios) != 3:
        raise UsageError("--splits needs three ratios")
    out = _prepare(cfg)
    l2 = cfg["l2"] if cfg["l2"] is not None else 1e-4
    rep = run_pipeline(cfg.get("corpus"), neg_per_pos=int(cfg["neg_per_pos"]), split_ratios=tuple(ratios),
                       seed=int(cfg["seed"]), l2=float(l2), lr=float(cfg["lr"]), epochs=int(cfg["epochs"]),
                       top_k=int(cfg["top_k"]), bins=int(cfg["bins"]), min_stem=int(cfg["min_stem"]))
    summary = {**rep.metrics.to_dict(), "leakage": rep.leakage, "sizes": rep.sizes,
               "dropped_words": rep.dropped, "skipped_negatives": rep.skipped}
    (out / "metrics.json").write_text(json.dumps(summary, indent=1) + "\n")
    rep.model.save(out / "model.json")
    width = max((len(n) for n, _ in rep.top), default=4)
    lines = [f"{'rank':>4}  {'predicate':<{width}}  weight"]
    lines += [f"{i:>4}  {n:<{width}}  {w:+.4f}" for i, (n, w) in enumerate(rep.top, 1)]
    (out / "top_features.txt").write_text("\n".join(lines) + "\n")
    with open(out / "margin_histogram.csv", "w") as fh:
        fh.write("bin_lo,bin_hi,count\n")
        for lo, hi, c in zip(rep.hist_edges[:-1], rep.hist_edges[1:], rep.hist_counts):
            fh.write(f"{lo:.6g},{hi:.6g},{c}\n")
    print(f"test accuracy {rep.metrics.accuracy:.4f}, F1 {rep.metrics.f1:.4f}, leakage {rep.leakage}")
    print("\n".join(lines))


COMMANDS = {
    "gen": cmd_gen, "featurize": cmd_featurize, "train": cmd_train, "eval": cmd_eval,
    "sweep-noise": cmd_sweep, "sweep-size": cmd_sweep, "sweep-quantile": cmd_sweep,
    "counterexample": cmd_counterexample, "morph": cmd_morph,
}


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError(parser.format_usage().strip())
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(message)s")
        cfg = _effective(args)
        COMMANDS[args.command](cfg)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except Exception as exc:
        print(f"subreg: error: {exc}", file=sys.stderr)
        return 2
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
