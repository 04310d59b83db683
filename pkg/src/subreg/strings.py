"""Alphabets, boundary padding and the primitive string observations.

Strings are handled as tuples of symbol tokens so that multi-character
symbols (affixes such as ``"un-"``) behave exactly like single letters.
Plain Python ``str`` values are accepted anywhere a token sequence is
expected and are split into characters.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple, Union

BOUNDARY = "#"

Str = Tuple[str, ...]
StrLike = Union[str, Sequence[str]]


def as_tokens(s: StrLike) -> Str:
    if isinstance(s, str):
        return tuple(s)
    return tuple(s)


@dataclass(frozen=True)
class Alphabet:
    """Ordered symbol inventory plus a reserved boundary token."""

    symbols: Tuple[str, ...]
    boundary: str = BOUNDARY

    def __post_init__(self):
        syms = tuple(self.symbols)
        object.__setattr__(self, "symbols", syms)
        if not syms:
            raise ValueError("alphabet must contain at least one symbol")
        if len(set(syms)) != len(syms):
            raise ValueError(f"duplicate symbols in alphabet: {syms}")
        if self.boundary in syms:
            raise ValueError(f"boundary {self.boundary!r} cannot be an alphabet symbol")
        for s in syms:
            if not s or any(c.isspace() for c in s):
                raise ValueError(f"invalid symbol token {s!r}")

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __contains__(self, item):
        return item in self.symbols

    @property
    def extended(self) -> Tuple[str, ...]:
        """Boundary followed by the symbols; the canonical token order."""
        return (self.boundary,) + self.symbols

    @property
    def single_char(self) -> bool:
        return all(len(s) == 1 for s in self.symbols) and len(self.boundary) == 1

    def code(self) -> dict:
        """Token -> integer code (boundary is 0, symbols are 1..n)."""
        return {t: i for i, t in enumerate(self.extended)}

    def sort_key(self, tokens: Sequence[str]) -> Tuple[int, ...]:
        table = self.code()
        return tuple(table[t] for t in tokens)

    def parse(self, text: str) -> Str:
        """Read a serialized string; inverse of :meth:`format`."""
        if self.single_char:
            toks = tuple(text.strip())
        else:
            toks = tuple(text.split())
        self.check(toks, allow_boundary=False)
        return toks

    def format(self, s: StrLike) -> str:
        toks = as_tokens(s)
        return "".join(toks) if self.single_char else " ".join(toks)

    def check(self, s: StrLike, allow_boundary: bool = True) -> Str:
        toks = as_tokens(s)
        for t in toks:
            if t == self.boundary:
                if not allow_boundary:
                    raise ValueError(f"boundary symbol in input string {toks!r}")
            elif t not in self.symbols:
                raise ValueError(f"symbol {t!r} not in alphabet {self.symbols}")
        return toks


@dataclass(frozen=True)
class Tier:
    members: frozenset

    def __init__(self, members: Iterable[str]):
        object.__setattr__(self, "members", frozenset(members))

    def __contains__(self, item):
        return item in self.members

    def sorted(self, alphabet: Alphabet) -> Tuple[str, ...]:
        return tuple(s for s in alphabet.symbols if s in self.members)


def pad(x: StrLike, K: int, boundary: str = BOUNDARY) -> Str:
    """Return ``#^K x #^K``."""
    if K < 0:
        raise ValueError("pad width must be non-negative")
    toks = as_tokens(x)
    if boundary in toks:
        raise ValueError(f"string already contains boundary symbol: {toks!r}")
    edge = (boundary,) * K
    return edge + toks + edge


def count_occurrences(s: StrLike, g: StrLike) -> int:
    """Number of (overlapping) start positions where ``g`` occurs in ``s``."""
    s, g = as_tokens(s), as_tokens(g)
    n, k = len(s), len(g)
    if k == 0:
        raise ValueError("gram must be non-empty")
    return sum(1 for i in range(n - k + 1) if s[i:i + k] == g)


def contains_substring(s: StrLike, g: StrLike) -> bool:
    s, g = as_tokens(s), as_tokens(g)
    k = len(g)
    if k == 0:
        raise ValueError("gram must be non-empty")
    return any(s[i:i + k] == g for i in range(len(s) - k + 1))


def contains_subsequence(s: StrLike, h: StrLike) -> bool:
    # greedy leftmost embedding is optimal for subsequence tests
    h = as_tokens(h)
    if not h:
        raise ValueError("subsequence must be non-empty")
    j = 0
    for t in as_tokens(s):
        if t == h[j]:
            j += 1
            if j == len(h):
                return True
    return False


def project_tier(s: StrLike, T: Union[Tier, Iterable[str]], boundary: str = BOUNDARY) -> Str:
    """Erase every symbol outside ``T``; boundary symbols survive."""
    members = T.members if isinstance(T, Tier) else frozenset(T)
    return tuple(t for t in as_tokens(s) if t in members or t == boundary)


def prefix(s: StrLike, n: int) -> Str:
    s = as_tokens(s)
    if n < 0 or n > len(s):
        raise ValueError(f"prefix length {n} out of range for string of length {len(s)}")
    return s[:n]


def suffix(s: StrLike, n: int) -> Str:
    s = as_tokens(s)
    if n < 0 or n > len(s):
        raise ValueError(f"suffix length {n} out of range for string of length {len(s)}")
    return s[len(s) - n:]
