"""Noise, size and low-quantile-margin sweeps, plus the unary counterexample.

Each (grid value, trial) cell derives its own seed from the base seed, so
cells are independent and can run in any order or in parallel; rows are
always sorted by (grid value, trial) before they are returned.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .languages import (
    DEFAULT_LEN_RANGE,
    LanguageSpec,
    default_spec,
    deciding_predicates,
    flip_labels,
    generate_dataset,
)
from .learners import (
    DEFAULT_EPOCHS,
    DEFAULT_L2_NOISY,
    DEFAULT_LR,
    DEFAULT_TOL,
    evaluate,
    margin_quantile,
    normalized_margin,
    train_logreg,
)
from .predicates import Kind, Predicate, PredicateSet
from .strings import Alphabet

log = logging.getLogger(__name__)

DEFAULT_NOISE_GRID = (0.0, 0.05, 0.1, 0.2, 0.3)
DEFAULT_SIZE_GRID = (50, 100, 200, 500, 1000, 2000)
CSV_COLUMNS = ("class", "grid_kind", "grid_value", "trial", "train_size", "noise",
               "accuracy", "f1", "q01", "seed", "config_hash")


@dataclass
class SweepConfig:
    class_tag: str
    spec: Optional[LanguageSpec] = None
    grid: Tuple[float, ...] = DEFAULT_NOISE_GRID
    n_train: int = 2000
    n_test: int = 1000
    trials: int = 5
    base_seed: int = 0
    len_range: Optional[Tuple[int, int]] = None
    l2: Optional[float] = None
    lr: float = DEFAULT_LR
    epochs: int = DEFAULT_EPOCHS
    tol: float = DEFAULT_TOL
    noise: float = 0.0
    jobs: int = 1

    def __post_init__(self):
        self.class_tag = self.class_tag.upper()
        if self.spec is None:
            self.spec = default_spec(self.class_tag)
        if self.len_range is None:
            self.len_range = DEFAULT_LEN_RANGE[self.spec.class_tag]
        self.grid = tuple(self.grid)
        self.len_range = tuple(self.len_range)
        if not self.grid:
            raise ValueError("sweep grid must be non-empty")
        if self.n_test <= 0:
            raise ValueError("n_test must be > 0")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["spec"] = self.spec.to_dict()
        d.pop("jobs")
        return d

    def config_hash(self) -> str:
        return hashlib.sha1(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()[:10]


@dataclass(frozen=True)
class ResultRow:
    class_tag: str
    grid_kind: str
    grid_value: float
    trial: int
    train_size: int
    noise: float
    accuracy: float
    f1: float
    q01: float
    seed: int
    config_hash: str

    def as_csv(self) -> List[str]:
        return [self.class_tag, self.grid_kind, _fmt(self.grid_value), str(self.trial), str(self.train_size),
                _fmt(self.noise), _fmt(self.accuracy), _fmt(self.f1), _fmt(self.q01), str(self.seed),
                self.config_hash]


def _fmt(v: float) -> str:
    return f"{float(v):.6g}"


def cell_seed(base_seed: int, grid_value, trial: int) -> int:
    return (base_seed ^ zlib.crc32(f"{float(grid_value)!r}:{trial}".encode())) & 0x7FFFFFFF


def _split(n: int) -> Tuple[int, int]:
    return n // 2, n - n // 2


def _run_cell(cfg: SweepConfig, kind: str, value, trial: int) -> ResultRow:
    seed = cell_seed(cfg.base_seed, value, trial)
    spec = cfg.spec
    if kind == "size":
        n_train, noise = int(value), cfg.noise
        test_seed = cell_seed(cfg.base_seed, -1.0, trial)
    else:
        n_train, noise = cfg.n_train, float(value)
        test_seed = seed + 1
    l2 = cfg.l2 if cfg.l2 is not None else (DEFAULT_L2_NOISY if noise > 0 else 0.0)
    try:
        train = generate_dataset(spec, *_split(n_train), cfg.len_range, seed)
        test = generate_dataset(spec, *_split(cfg.n_test), cfg.len_range, test_seed)
        if noise > 0:
            train = flip_labels(train, noise, seed)
        P = deciding_predicates(spec)
        model = train_logreg(P.feature_matrix(train.strings), train.labels, l2=l2, lr=cfg.lr,
                             epochs=cfg.epochs, tol=cfg.tol, feature_names=P.names)
        Xt = P.feature_matrix(test.strings)
        metrics = evaluate(model, Xt, test.labels)
        try:
            q01 = margin_quantile(normalized_margin(model, Xt, test.labels), 0.01)
        except ValueError:
            q01 = float("nan")
    except Exception as exc:
        raise RuntimeError(f"{cfg.class_tag} {kind}={value} trial={trial}: {exc}") from exc
    log.info("%s %s=%s trial=%d acc=%.4f q01=%.4f", cfg.class_tag, kind, value, trial, metrics.accuracy, q01)
    return ResultRow(cfg.class_tag, kind, float(value), trial, n_train, noise, metrics.accuracy,
                     metrics.f1, q01, seed, cfg.config_hash())


def _sweep(cfg: SweepConfig, kind: str) -> List[ResultRow]:
    cells = [(v, t) for v in cfg.grid for t in range(cfg.trials)]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            futures = [pool.submit(_run_cell, cfg, kind, v, t) for v, t in cells]
            rows = [f.result() for f in futures]
    else:
        rows = [_run_cell(cfg, kind, v, t) for v, t in cells]
    return sorted(rows, key=lambda r: (r.grid_value, r.trial))


def noise_sweep(cfg: SweepConfig) -> List[ResultRow]:
    """Flip train labels at each grid rate; evaluate on a clean test set."""
    return _sweep(cfg, "noise")


def size_sweep(cfg: SweepConfig) -> List[ResultRow]:
    """Vary the train size; the clean test set is fixed per trial."""
    return _sweep(cfg, "size")


def quantile_sweep(cfg: SweepConfig) -> List[ResultRow]:
    """Same protocol as :func:`noise_sweep`; rows are read for their ``q01`` column."""
    return _sweep(cfg, "quantile")


def emit_csv(rows: Sequence[ResultRow], path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in rows:
        writer.writerow(r.as_csv())
    try:
        Path(path).write_text(buf.getvalue())
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# counterexample over a unary alphabet
# ---------------------------------------------------------------------------

UNARY = Alphabet(("a",))


@dataclass(frozen=True)
class Witness:
    x: Tuple[str, ...]
    y: Tuple[str, ...]
    truth_vector: Tuple[int, ...]
    memberships: Tuple[bool, bool]
    m: int

    def describe(self) -> str:
        return (f"a^{len(self.x)} and a^{len(self.y)} share truth vector {self.truth_vector} "
                f"but membership in L_{self.m} is {self.memberships[0]} vs {self.memberships[1]}")


def in_Lm(x: Sequence[str], m: int) -> bool:
    return len(x) % m == 0


def unary_power_predicates(n: int, pad_width: int = 1) -> PredicateSet:
    """``contains a^2, a^4, ..., a^(2^n)``: the demo predicate family."""
    preds = tuple(Predicate(Kind.SUBSTRING, ("a",) * (2 ** (i + 1)), pad_width) for i in range(n))
    return PredicateSet(preds, "SL", UNARY, {"n": n})


def counterexample_demo(P: PredicateSet, m: int) -> Witness:
    """Two unary strings in the same predicate cell with different ``L_m`` membership.

    Lengths ``0 .. 2^n + m`` are scanned.  Members are tried in the order
    ``m, 2m, ..., 0`` and each is paired with the nearest non-member that
    shares its truth vector.
    """
    n = len(P)
    if m <= 2 ** n:
        raise ValueError(f"need m > 2^n = {2 ** n}, got m={m}")
    if set(P.alphabet.symbols) != {"a"}:
        raise ValueError("counterexample demo needs a unary alphabet {a}")
    bound = 2 ** n + m
    strings = [("a",) * L for L in range(bound + 1)]
    R = P.feature_matrix(strings)
    vecs = [tuple(int(b) for b in row) for row in R]
    members = [L for L in range(m, bound + 1, m)] + [0]
    for j in members:
        cands = [i for i in range(bound + 1) if not in_Lm(strings[i], m) and vecs[i] == vecs[j]]
        if not cands:
            continue
        i = min(cands, key=lambda c: (abs(c - j), c))
        lo, hi = min(i, j), max(i, j)
        w = Witness(strings[lo], strings[hi], vecs[lo], (in_Lm(strings[lo], m), in_Lm(strings[hi], m)), m)
        _verify(P, w)
        return w
    raise RuntimeError(f"no witness found for m={m} within lengths 0..{bound}")


def _verify(P: PredicateSet, w: Witness) -> None:
    tx = tuple(int(b) for b in P.truth_vector(w.x))
    ty = tuple(int(b) for b in P.truth_vector(w.y))
    if tx != ty or in_Lm(w.x, w.m) == in_Lm(w.y, w.m):
        raise AssertionError(f"witness failed re-check: {w}")
