"""Finite predicate families for the subregular classes.

A :class:`PredicateSet` is an ordered, immutable list of primitive
observations.  Column ``j`` of every feature matrix built from a set is
predicate ``j``; the order is a pure function of the class tag, the
parameters and the alphabet, so trained weights can always be mapped back
to readable predicate names.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .strings import (
    BOUNDARY,
    Alphabet,
    Str,
    StrLike,
    as_tokens,
    contains_subsequence,
    count_occurrences,
    pad,
    prefix,
    project_tier,
    suffix,
)

CLASS_TAGS = ("SL", "SP", "LT", "PT", "LTT", "TSL")
ALL_TIERS_MAX_ALPHABET = 8


class Kind(IntEnum):
    SUBSTRING = 0
    SUBSEQUENCE = 1
    PREFIX = 2
    SUFFIX = 3
    THRESHOLD = 4
    TIER = 5


@dataclass(frozen=True, order=False)
class Predicate:
    kind: Kind
    gram: Str
    pad_width: int = 1
    threshold: int = 1
    tier: Str = ()

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "gram", as_tokens(self.gram))
        object.__setattr__(self, "tier", tuple(self.tier))
        if not self.gram:
            raise ValueError("predicate gram must be non-empty")
        if self.threshold < 1:
            raise ValueError("threshold must be >= 1")
        if self.pad_width < 0:
            raise ValueError("pad width must be >= 0")
        if self.kind is Kind.TIER:
            allowed = set(self.tier) | {BOUNDARY}
            if not set(self.gram) <= allowed:
                raise ValueError(f"tier gram {self.gram} uses symbols outside tier {self.tier}")

    def __call__(self, x: StrLike) -> bool:
        return eval_predicate(self, x)

    def describe(self) -> str:
        g = _join(self.gram)
        if self.kind is Kind.SUBSTRING:
            return f"sub:{g}"
        if self.kind is Kind.SUBSEQUENCE:
            sep = "<" if _single(self.gram) else " < "
            return "seq:" + sep.join(self.gram)
        if self.kind is Kind.PREFIX:
            return f"prefix:{g}"
        if self.kind is Kind.SUFFIX:
            return f"suffix:{g}"
        if self.kind is Kind.THRESHOLD:
            return f"count({g})>={self.threshold}"
        return "tier{" + ",".join(self.tier) + "}:" + g

    def to_dict(self) -> dict:
        d = {"kind": self.kind.name.lower(), "gram": list(self.gram), "pad": self.pad_width}
        if self.kind is Kind.THRESHOLD:
            d["threshold"] = self.threshold
        if self.kind is Kind.TIER:
            d["tier"] = list(self.tier)
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "Predicate":
        return cls(
            kind=Kind[d["kind"].upper()],
            gram=tuple(d["gram"]),
            pad_width=int(d.get("pad", 1)),
            threshold=int(d.get("threshold", 1)),
            tier=tuple(d.get("tier", ())),
        )


def _single(tokens: Sequence[str]) -> bool:
    return all(len(t) == 1 for t in tokens)


def _join(tokens: Sequence[str]) -> str:
    return "".join(tokens) if _single(tokens) else " ".join(tokens)


def eval_predicate(p: Predicate, x: StrLike) -> bool:
    """Evaluate ``p`` on the boundary-extended form of ``x``."""
    xt = pad(x, p.pad_width)
    if p.kind is Kind.SUBSTRING:
        return count_occurrences(xt, p.gram) >= 1
    if p.kind is Kind.SUBSEQUENCE:
        return contains_subsequence(xt, p.gram)
    if p.kind is Kind.PREFIX:
        return len(xt) >= len(p.gram) and prefix(xt, len(p.gram)) == p.gram
    if p.kind is Kind.SUFFIX:
        return len(xt) >= len(p.gram) and suffix(xt, len(p.gram)) == p.gram
    if p.kind is Kind.THRESHOLD:
        return count_occurrences(xt, p.gram) >= p.threshold
    return count_occurrences(project_tier(xt, p.tier), p.gram) >= 1


def default_pad(param: int) -> int:
    return max(param - 1, 1)


def gram_is_feasible(gram: Sequence[str], K: int, boundary: str = BOUNDARY) -> bool:
    """Can ``gram`` occur contiguously in some ``#^K x #^K``?

    Feasible grams look like ``#^i w #^j`` with ``w`` boundary-free,
    ``i, j <= K``; an all-boundary gram needs ``len <= 2K`` (empty ``x``).
    """
    n = len(gram)
    i = 0
    while i < n and gram[i] == boundary:
        i += 1
    if i == n:
        return n <= 2 * K
    j = n
    while gram[j - 1] == boundary:
        j -= 1
    if any(t == boundary for t in gram[i:j]):
        return False
    return i <= K and n - j <= K


def enumerate_grams(tokens: Sequence[str], length: int, K: Optional[int] = None) -> List[Str]:
    """All grams of ``length`` over ``tokens`` (in order), optionally feasibility-filtered."""
    out = []
    for g in itertools.product(tokens, repeat=length):
        if K is None or gram_is_feasible(g, K):
            out.append(g)
    return out


@dataclass(frozen=True)
class PredicateSet:
    predicates: Tuple[Predicate, ...]
    class_tag: str
    alphabet: Alphabet
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        preds = tuple(self.predicates)
        object.__setattr__(self, "predicates", preds)
        if len(set(preds)) != len(preds):
            raise ValueError("duplicate predicates in predicate set")

    def __len__(self):
        return len(self.predicates)

    def __iter__(self):
        return iter(self.predicates)

    def __getitem__(self, i):
        return self.predicates[i]

    @property
    def names(self) -> List[str]:
        return [p.describe() for p in self.predicates]

    def index(self, p: Predicate) -> int:
        return self.predicates.index(p)

    def truth_vector(self, x: StrLike) -> np.ndarray:
        return truth_vector(self, x)

    def feature_matrix(self, xs: Sequence[StrLike]) -> np.ndarray:
        return feature_matrix(self, xs)

    def combine(self, other: "PredicateSet") -> "PredicateSet":
        if other.alphabet != self.alphabet:
            raise ValueError("cannot combine predicate sets over different alphabets")
        return PredicateSet(
            self.predicates + other.predicates,
            f"{self.class_tag}+{other.class_tag}",
            self.alphabet,
            {"parts": [_jsonable_params(self.params), _jsonable_params(other.params)]},
        )

    def to_dict(self) -> dict:
        return {
            "class": self.class_tag,
            "params": _jsonable_params(self.params),
            "alphabet": {"symbols": list(self.alphabet.symbols), "boundary": self.alphabet.boundary},
            "predicates": [p.to_dict() for p in self.predicates],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "PredicateSet":
        alpha = Alphabet(tuple(d["alphabet"]["symbols"]), d["alphabet"].get("boundary", BOUNDARY))
        preds = tuple(Predicate.from_dict(p) for p in d["predicates"])
        return cls(preds, d["class"], alpha, d.get("params", {}))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path) -> "PredicateSet":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _jsonable_params(params: Mapping) -> dict:
    out = {}
    for k, v in params.items():
        if k == "tau" and isinstance(v, Mapping):
            v = [[list(g), t] for g, t in v.items()]
        elif k == "tiers":
            v = [list(t) for t in v]
        out[k] = v
    return out


def _tau_lookup(tau) -> callable:
    if isinstance(tau, Mapping):
        table = {as_tokens(g): int(t) for g, t in tau.items()}
        return lambda g: table.get(g, 1)
    if isinstance(tau, (list, tuple)) and tau and isinstance(tau[0], (list, tuple)):
        table = {as_tokens(g): int(t) for g, t in tau}
        return lambda g: table.get(g, 1)
    return lambda g: int(tau)


def build_predicate_set(alphabet: Alphabet, class_tag: str, **params) -> PredicateSet:
    """Enumerate the deciding predicates of ``class_tag`` over ``alphabet``.

    Parameters by class: ``k`` for SL/SP/LT/LTT/TSL, ``m`` for PT,
    ``tau`` (int or gram -> int map) and ``boundary_affixes`` for LTT,
    ``tiers`` (list of symbol collections) or ``all_tiers=True`` for TSL.
    ``pad_width`` overrides the default ``max(k - 1, 1)``.
    """
    tag = class_tag.upper()
    if tag not in CLASS_TAGS:
        raise ValueError(f"unknown class tag {class_tag!r}; expected one of {CLASS_TAGS}")
    if len(alphabet) == 0:
        raise ValueError("empty alphabet")
    ext = alphabet.extended
    key = alphabet.sort_key

    if tag == "PT":
        m = int(params.get("m", params.get("k", 0)))
        if m < 1:
            raise ValueError("PT needs m >= 1")
        K = int(params.get("pad_width", default_pad(m)))
        preds = [Predicate(Kind.SUBSEQUENCE, g, K)
                 for ell in range(1, m + 1) for g in enumerate_grams(ext, ell)]
        preds.sort(key=lambda p: key(p.gram))
        return PredicateSet(tuple(preds), tag, alphabet, {"m": m, "pad_width": K})

    k = int(params.get("k", 0))
    if k < 1:
        raise ValueError(f"{tag} needs k >= 1")
    K = int(params.get("pad_width", default_pad(k)))
    out_params: Dict = {"k": k, "pad_width": K}

    if tag == "SL":
        preds = [Predicate(Kind.SUBSTRING, g, K) for g in enumerate_grams(ext, k, K)]
    elif tag == "SP":
        preds = [Predicate(Kind.SUBSEQUENCE, g, K) for g in enumerate_grams(ext, k)]
    elif tag == "LT":
        preds = [Predicate(Kind.SUBSTRING, g, K) for g in enumerate_grams(ext, k, K)]
        if k > 1:
            preds += [Predicate(Kind.PREFIX, u, K) for u in enumerate_grams(ext, k - 1)]
            preds += [Predicate(Kind.SUFFIX, v, K) for v in enumerate_grams(ext, k - 1)]
    elif tag == "LTT":
        tau = params.get("tau", 1)
        lookup = _tau_lookup(tau)
        preds = []
        for ell in range(1, k + 1):
            for g in enumerate_grams(ext, ell, K):
                t_max = lookup(g)
                if t_max < 1:
                    raise ValueError(f"threshold bound for {g} must be >= 1")
                preds += [Predicate(Kind.THRESHOLD, g, K, t) for t in range(1, t_max + 1)]
        boundary_affixes = bool(params.get("boundary_affixes", False))
        if boundary_affixes and k > 1:
            preds += [Predicate(Kind.PREFIX, u, K) for u in enumerate_grams(ext, k - 1)]
            preds += [Predicate(Kind.SUFFIX, v, K) for v in enumerate_grams(ext, k - 1)]
        out_params.update(tau=tau, boundary_affixes=boundary_affixes)
    else:  # TSL
        tiers = _resolve_tiers(alphabet, params)
        preds = []
        for tier in tiers:
            tier_ext = (alphabet.boundary,) + tier
            preds += [Predicate(Kind.TIER, g, K, 1, tier) for g in enumerate_grams(tier_ext, k, K)]
        out_params["tiers"] = tiers

    preds.sort(key=lambda p: (p.kind, key(p.tier), key(p.gram), p.threshold))
    return PredicateSet(tuple(preds), tag, alphabet, out_params)


def _resolve_tiers(alphabet: Alphabet, params: Mapping) -> List[Str]:
    if params.get("all_tiers"):
        if len(alphabet) > ALL_TIERS_MAX_ALPHABET:
            raise ValueError(f"all-tier enumeration is limited to |alphabet| <= {ALL_TIERS_MAX_ALPHABET}")
        syms = alphabet.symbols
        return [tuple(c) for r in range(1, len(syms) + 1) for c in itertools.combinations(syms, r)]
    raw = params.get("tiers") or ([params["tier"]] if params.get("tier") else None)
    if not raw:
        raise ValueError("TSL needs 'tiers' (or 'tier', or all_tiers=True)")
    tiers = []
    for t in raw:
        members = set(as_tokens(t))
        if not members:
            raise ValueError("empty tier")
        if not members <= set(alphabet.symbols):
            raise ValueError(f"tier {sorted(members)} is not a subset of the alphabet")
        tiers.append(tuple(s for s in alphabet.symbols if s in members))
    return tiers


def truth_vector(P: PredicateSet, x: StrLike) -> np.ndarray:
    toks = as_tokens(x)
    return np.array([eval_predicate(p, toks) for p in P.predicates], dtype=bool)


def _encode(view_strings: Sequence[Str], code: Mapping[str, int]) -> Tuple[np.ndarray, np.ndarray]:
    lengths = np.fromiter((len(s) for s in view_strings), dtype=np.int64, count=len(view_strings))
    offsets = np.zeros(len(view_strings) + 1, dtype=np.int64)
    np.cumsum(lengths, out=offsets[1:])
    flat = np.fromiter((code[t] for s in view_strings for t in s), dtype=np.int32, count=int(offsets[-1]))
    return flat, offsets


def feature_matrix(P: PredicateSet, xs: Sequence[StrLike]) -> np.ndarray:
    """Boolean matrix with one row per string and one column per predicate."""
    n_rows, n_cols = len(xs), len(P.predicates)
    out = np.zeros((n_rows, n_cols), dtype=bool)
    if n_rows == 0 or n_cols == 0:
        return out
    code = P.alphabet.code()
    toks = [as_tokens(x) for x in xs]

    # predicates sharing (pad width, tier) read the same transformed strings
    views: Dict[Tuple[int, Str], List[int]] = {}
    for j, p in enumerate(P.predicates):
        views.setdefault((p.pad_width, p.tier if p.kind is Kind.TIER else None), []).append(j)

    for (K, tier), cols in views.items():
        padded = [pad(t, K) for t in toks]
        if tier is not None:
            padded = [project_tier(s, tier) for s in padded]
        flat, offsets = _encode(padded, code)
        by_kind: Dict[str, Dict[Str, List[int]]] = {"count": {}, "seq": {}, "pre": {}, "suf": {}}
        for j in cols:
            p = P.predicates[j]
            bucket = {Kind.SUBSEQUENCE: "seq", Kind.PREFIX: "pre", Kind.SUFFIX: "suf"}.get(p.kind, "count")
            by_kind[bucket].setdefault(p.gram, []).append(j)
        for bucket, grams in by_kind.items():
            if not grams:
                continue
            gram_list = list(grams)
            gflat, goff = _encode(gram_list, code)
            if bucket == "count":
                counts = _kernels.gram_counts(flat, offsets, gflat, goff)
                for gi, g in enumerate(gram_list):
                    for j in grams[g]:
                        out[:, j] = counts[:, gi] >= P.predicates[j].threshold
                continue
            if bucket == "seq":
                hits = _kernels.subsequence_hits(flat, offsets, gflat, goff)
            else:
                hits = _kernels.edge_hits(flat, offsets, gflat, goff, bucket == "suf")
            for gi, g in enumerate(gram_list):
                for j in grams[g]:
                    out[:, j] = hits[:, gi]
    return out
