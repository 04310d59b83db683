"""Minterm embedding of truth vectors and the explicit margin-1/2 separator.

A truth vector ``r`` of length ``n`` maps to the one-hot vector in
``{0,1}^(2^n)`` whose single 1 sits at ``index(r)``; predicate 0 is the most
significant bit.  Any accept set ``S`` of truth vectors is then separated by
``w = 1[a in S]``, ``b = -1/2`` with score exactly ``+-1/2`` on every input.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from pathlib import Path
from typing import FrozenSet, Iterable, Sequence, Tuple

import numpy as np

from .predicates import PredicateSet

MAX_BITS = 20

Bits = Tuple[int, ...]


class CellConflict(ValueError):
    """A truth vector was observed on both a member and a non-member."""

    def __init__(self, bits, positive, negative):
        self.bits, self.positive, self.negative = bits, positive, negative
        super().__init__(f"truth vector {bits} holds for member {positive!r} and non-member {negative!r}")


@dataclass(frozen=True)
class MintermVector:
    index: int
    n: int

    def __post_init__(self):
        if not 0 <= self.index < (1 << self.n):
            raise ValueError(f"minterm index {self.index} out of range for n={self.n}")

    def dense(self) -> np.ndarray:
        v = np.zeros(1 << self.n)
        v[self.index] = 1.0
        return v

    @property
    def norm(self) -> float:
        return 1.0


@dataclass(frozen=True)
class Separator:
    weights: np.ndarray
    bias: float
    n: int

    @property
    def accept_indices(self) -> Tuple[int, ...]:
        return tuple(int(i) for i in np.flatnonzero(self.weights))

    def geometric_margin(self) -> float:
        return 0.5 / float(np.linalg.norm(self.weights))

    def to_dict(self) -> dict:
        return {"n": self.n, "accept": list(self.accept_indices), "bias": self.bias}

    @classmethod
    def from_dict(cls, d) -> "Separator":
        n = int(d["n"])
        _check_cap(n)
        w = np.zeros(1 << n)
        w[list(d["accept"])] = 1.0
        return cls(w, float(d["bias"]), n)

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict()) + "\n")

    @classmethod
    def load(cls, path) -> "Separator":
        return cls.from_dict(json.loads(Path(path).read_text()))


@dataclass(frozen=True)
class AcceptSet:
    members: FrozenSet[Bits]
    n: int

    def __init__(self, members: Iterable[Sequence[int]], n: int):
        ms = frozenset(tuple(int(b) for b in m) for m in members)
        for m in ms:
            if len(m) != n or any(b not in (0, 1) for b in m):
                raise ValueError(f"accept-set member {m} is not a length-{n} bit pattern")
        object.__setattr__(self, "members", ms)
        object.__setattr__(self, "n", n)

    def __contains__(self, bits) -> bool:
        return tuple(int(b) for b in bits) in self.members

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(sorted(self.members))


def _check_cap(n: int, cap: int = MAX_BITS) -> None:
    if n > cap:
        raise ValueError(f"minterm embedding over {n} predicates needs 2^{n} dimensions (cap is {cap})")


def bits_to_index(bits: Sequence[int]) -> int:
    idx = 0
    for b in bits:
        idx = (idx << 1) | (1 if b else 0)
    return idx


def index_to_bits(index: int, n: int) -> Bits:
    return tuple((index >> (n - 1 - j)) & 1 for j in range(n))


def minterm_embed(r: Sequence[int], cap: int = MAX_BITS) -> MintermVector:
    n = len(r)
    _check_cap(n, cap)
    return MintermVector(bits_to_index(r), n)


def minterm_indices(R: np.ndarray, cap: int = MAX_BITS) -> np.ndarray:
    """Row-wise minterm indices of a boolean truth matrix."""
    R = np.asarray(R, dtype=bool)
    n = R.shape[1]
    _check_cap(n, cap)
    weights = (1 << np.arange(n - 1, -1, -1, dtype=np.int64))
    return R.astype(np.int64) @ weights


def minterm_features(R: np.ndarray, cap: int = MAX_BITS) -> np.ndarray:
    """Dense one-hot minterm design matrix, shape (rows, 2^n)."""
    R = np.asarray(R, dtype=bool)
    idx = minterm_indices(R, cap)
    out = np.zeros((R.shape[0], 1 << R.shape[1]))
    out[np.arange(R.shape[0]), idx] = 1.0
    return out


def build_separator(S: AcceptSet | Iterable[Sequence[int]], n: int, cap: int = MAX_BITS) -> Separator:
    _check_cap(n, cap)
    if not isinstance(S, AcceptSet):
        S = AcceptSet(S, n)
    if S.n != n:
        raise ValueError(f"accept set has width {S.n}, expected {n}")
    w = np.zeros(1 << n)
    for a in S.members:
        w[bits_to_index(a)] = 1.0
    return Separator(w, -0.5, n)


def decide(sep: Separator, m: MintermVector) -> Tuple[bool, float]:
    if m.n != sep.n:
        raise ValueError(f"dimension mismatch: separator n={sep.n}, minterm n={m.n}")
    score = float(sep.weights[m.index]) + sep.bias
    return score > 0, score


def accept_set_for_language(spec, P: PredicateSet, max_len: int) -> AcceptSet:
    """Collect the truth vectors of all members up to ``max_len``.

    Raises :class:`CellConflict` if a member and a non-member share a truth
    vector, i.e. ``P`` does not decide ``spec`` on the enumerated strings.
    """
    from .languages import membership

    symbols = spec.alphabet.symbols
    pos, neg = {}, {}
    strings = [s for L in range(max_len + 1) for s in itertools.product(symbols, repeat=L)]
    R = P.feature_matrix(strings)
    for s, row in zip(strings, R):
        bits = tuple(int(b) for b in row)
        (pos if membership(spec, s) else neg).setdefault(bits, s)
    for bits, s in pos.items():
        if bits in neg:
            raise CellConflict(bits, s, neg[bits])
    return AcceptSet(pos.keys(), len(P))
