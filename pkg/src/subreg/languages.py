"""Executable subregular languages: membership oracles, samplers, datasets.

Positive samples are drawn symbol by symbol, uniformly among the symbols
that do not already complete a violation (SL/SP/TSL/PT), or drafted
uniformly and repaired (LTT).  This is not exact-uniform sampling over the
language; the sampler name is recorded in every dataset.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .predicates import Kind, Predicate, PredicateSet, build_predicate_set, default_pad, eval_predicate
from .strings import (
    Alphabet,
    Str,
    StrLike,
    as_tokens,
    contains_subsequence,
    contains_substring,
    count_occurrences,
    pad,
    project_tier,
)

MAX_TRIES = 10_000
SAMPLER_NAME = "incremental-rejection+repair/v1"
LTT_OPS = (">=", "<=")


class SamplerExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class LanguageSpec:
    """A parameterized subregular language.

    ``k`` is the locality (or ``m`` for PT).  ``forbidden`` holds grams for
    SL/TSL and subsequences for SP/PT; ``tier`` is used by TSL; ``literals``
    (predicate, required value) pairs define LT; ``constraints`` are
    ``(gram, op, bound)`` triples for LTT with op in ``>=``/``<=``.
    """

    class_tag: str
    alphabet: Alphabet
    k: int
    forbidden: Tuple[Str, ...] = ()
    tier: Str = ()
    literals: Tuple[Tuple[Predicate, bool], ...] = ()
    constraints: Tuple[Tuple[Str, str, int], ...] = ()

    def __post_init__(self):
        tag = self.class_tag.upper()
        object.__setattr__(self, "class_tag", tag)
        object.__setattr__(self, "forbidden", tuple(as_tokens(g) for g in self.forbidden))
        object.__setattr__(self, "tier", tuple(self.tier))
        object.__setattr__(self, "constraints",
                           tuple((as_tokens(g), op, int(t)) for g, op, t in self.constraints))
        object.__setattr__(self, "literals", tuple((p, bool(v)) for p, v in self.literals))
        if self.k < 1:
            raise ValueError("k must be >= 1")
        for g in self.forbidden:
            self.alphabet.check(g)
            if tag in ("SL", "SP", "TSL") and len(g) != self.k:
                raise ValueError(f"forbidden gram {g} must have length {self.k}")
            if tag == "PT" and not 1 <= len(g) <= self.k:
                raise ValueError(f"forbidden subsequence {g} must have length 1..{self.k}")
        if tag == "TSL":
            if not self.tier or not set(self.tier) <= set(self.alphabet.symbols):
                raise ValueError("TSL needs a non-empty tier drawn from the alphabet")
            for g in self.forbidden:
                if not set(g) <= set(self.tier) | {self.alphabet.boundary}:
                    raise ValueError(f"tier gram {g} uses symbols outside the tier")
        for g, op, t in self.constraints:
            self.alphabet.check(g)
            if op not in LTT_OPS:
                raise ValueError(f"comparator must be one of {LTT_OPS}, got {op!r}")
            if t < 0:
                raise ValueError("LTT bounds must be >= 0")
            if not 1 <= len(g) <= self.k:
                raise ValueError(f"LTT gram {g} must have length 1..{self.k}")
        if tag not in ("SL", "SP", "TSL", "PT", "LT", "LTT"):
            raise ValueError(f"unknown class tag {tag}")

    @property
    def pad_width(self) -> int:
        return default_pad(self.k)

    def to_dict(self) -> dict:
        d = {
            "class": self.class_tag,
            "alphabet": list(self.alphabet.symbols),
            "k": self.k,
        }
        if self.forbidden:
            d["forbidden"] = [list(g) for g in self.forbidden]
        if self.tier:
            d["tier"] = list(self.tier)
        if self.literals:
            d["literals"] = [[p.to_dict(), v] for p, v in self.literals]
        if self.constraints:
            d["constraints"] = [[list(g), op, t] for g, op, t in self.constraints]
        return d

    @classmethod
    def from_dict(cls, d: Mapping) -> "LanguageSpec":
        alpha = Alphabet(tuple(d["alphabet"]), d.get("boundary", "#"))

        def gram(g):
            if isinstance(g, str):
                return tuple(g) if alpha.single_char else tuple(g.split())
            return tuple(g)

        return cls(
            class_tag=d["class"],
            alphabet=alpha,
            k=int(d.get("k", d.get("m", 1))),
            forbidden=tuple(gram(g) for g in d.get("forbidden", ())),
            tier=gram(d["tier"]) if d.get("tier") else (),
            literals=tuple((Predicate.from_dict(p), v) for p, v in d.get("literals", ())),
            constraints=tuple((gram(g), op, t) for g, op, t in d.get("constraints", ())),
        )

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha1(blob).hexdigest()[:12]


def load_spec(path) -> LanguageSpec:
    return LanguageSpec.from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# the setups used by the synthetic experiments
# ---------------------------------------------------------------------------

ABCD = Alphabet(("a", "b", "c", "d"))

DEFAULT_LEN_RANGE = {"SL": (5, 15), "SP": (6, 18), "LTT": (5, 15), "TSL": (5, 15), "PT": (5, 15), "LT": (5, 15)}


def default_spec(class_tag: str, k: Optional[int] = None) -> LanguageSpec:
    tag = class_tag.upper()
    if tag == "SL":
        k = k or 3
        base = [("a", "b", "c"), ("d", "d", "a"), ("#", "c", "c")]
        forbidden = [tuple(g[:k]) if len(g) >= k else g + ("d",) * (k - len(g)) for g in base]
        return LanguageSpec("SL", ABCD, k, forbidden=tuple(dict.fromkeys(forbidden)))
    if tag == "SP":
        k = k or 2
        forbidden = [("a", "c"), ("b", "d")]
        forbidden = [g + ("a",) * (k - 2) if k > 2 else g[:k] for g in forbidden]
        return LanguageSpec("SP", ABCD, k, forbidden=tuple(dict.fromkeys(forbidden)))
    if tag == "LTT":
        return LanguageSpec("LTT", ABCD, k or 2, constraints=(
            (("a",), ">=", 2),
            (("#", "a"), ">=", 1),
            (("b", "b"), "<=", 1),
            (("c", "#"), "<=", 0),
        ))
    if tag == "TSL":
        return LanguageSpec("TSL", ABCD, k or 2, forbidden=(("a", "c"), ("c", "a")), tier=("a", "c"))
    if tag == "PT":
        return LanguageSpec("PT", ABCD, k or 2, forbidden=(("b", "a"), ("d",)))
    if tag == "LT":
        k = k or 2
        pw = default_pad(k)
        return LanguageSpec("LT", ABCD, k, literals=(
            (Predicate(Kind.SUBSTRING, ("#", "a") + ("b",) * (k - 2), pw), True),
            (Predicate(Kind.SUBSTRING, ("c",) * k, pw), False),
        ))
    raise ValueError(f"no default spec for class {class_tag!r}")


def deciding_predicates(spec: LanguageSpec) -> PredicateSet:
    """The predicate family whose truth vector decides ``spec``."""
    tag = spec.class_tag
    if tag == "PT":
        return build_predicate_set(spec.alphabet, "PT", m=spec.k)
    if tag == "TSL":
        return build_predicate_set(spec.alphabet, "TSL", k=spec.k, tiers=[spec.tier])
    if tag == "LTT":
        need = [t if op == ">=" else t + 1 for _, op, t in spec.constraints]
        return build_predicate_set(spec.alphabet, "LTT", k=spec.k, tau=max(need + [1]))
    return build_predicate_set(spec.alphabet, tag, k=spec.k)


# ---------------------------------------------------------------------------
# membership
# ---------------------------------------------------------------------------

def _ltt_holds(xt: Str, constraint) -> bool:
    g, op, t = constraint
    c = count_occurrences(xt, g)
    return c >= t if op == ">=" else c <= t


def ltt_violations(spec: LanguageSpec, x: StrLike) -> List[int]:
    xt = pad(x, spec.pad_width)
    return [i for i, c in enumerate(spec.constraints) if not _ltt_holds(xt, c)]


def membership(spec: LanguageSpec, x: StrLike) -> bool:
    xt = pad(x, spec.pad_width)
    tag = spec.class_tag
    if tag == "SL":
        return not any(contains_substring(xt, g) for g in spec.forbidden)
    if tag in ("SP", "PT"):
        return not any(contains_subsequence(xt, h) for h in spec.forbidden)
    if tag == "TSL":
        proj = project_tier(xt, spec.tier)
        return not any(contains_substring(proj, g) for g in spec.forbidden)
    if tag == "LT":
        toks = as_tokens(x)
        return all(eval_predicate(p, toks) == v for p, v in spec.literals)
    return all(_ltt_holds(xt, c) for c in spec.constraints)


def _left_violation(spec: LanguageSpec, toks: Str) -> bool:
    """Does the left-padded prefix already contain a violation (monotone classes)?"""
    b = spec.alphabet.boundary
    xt = (b,) * spec.pad_width + toks
    tag = spec.class_tag
    if tag == "SL":
        return any(xt[-len(g):] == g for g in spec.forbidden)
    if tag == "TSL":
        if toks and toks[-1] not in spec.tier:
            return False
        proj = project_tier(xt, spec.tier)
        return any(proj[-len(g):] == g for g in spec.forbidden)
    return any(contains_subsequence(xt, h) for h in spec.forbidden)


# ---------------------------------------------------------------------------
# samplers
# ---------------------------------------------------------------------------

def _draw_len(len_range, rng) -> int:
    lo, hi = len_range
    if lo < 0 or hi < lo:
        raise ValueError(f"bad length range {len_range}")
    return int(rng.integers(lo, hi + 1))


def _uniform(spec, L, rng) -> List[str]:
    syms = spec.alphabet.symbols
    return [syms[i] for i in rng.integers(0, len(syms), size=L)]


def _split_anchor(g: Str, boundary: str):
    lead = 0
    while lead < len(g) and g[lead] == boundary:
        lead += 1
    trail = 0
    while trail < len(g) - lead and g[len(g) - 1 - trail] == boundary:
        trail += 1
    return lead, g[lead:len(g) - trail], trail


def _plant(toks: List[str], g: Str, boundary: str, rng) -> bool:
    """Overwrite ``toks`` so that contiguous ``g`` occurs in the padded string."""
    lead, core, trail = _split_anchor(g, boundary)
    if boundary in core:
        return False
    if lead and trail:
        toks[:] = list(core)
        return True
    if len(core) > len(toks):
        return False
    if lead:
        start = 0
    elif trail:
        start = len(toks) - len(core)
    else:
        start = int(rng.integers(0, len(toks) - len(core) + 1))
    toks[start:start + len(core)] = core
    return True


def _other(sym, spec, rng):
    choices = [s for s in spec.alphabet.symbols if s != sym]
    return choices[int(rng.integers(0, len(choices)))] if choices else sym


def _repair_ltt(spec: LanguageSpec, toks: List[str], rng, rounds: int = 25) -> List[str]:
    b = spec.alphabet.boundary
    for _ in range(rounds):
        bad = ltt_violations(spec, toks)
        if not bad:
            break
        g, op, t = spec.constraints[bad[int(rng.integers(0, len(bad)))]]
        if op == ">=":
            if not _plant(toks, g, b, rng):
                break
        elif not _destroy_one(spec, toks, g, rng):
            break
    return toks


def _destroy_one(spec, toks: List[str], g: Str, rng) -> bool:
    """Change one symbol inside a random occurrence of ``g``."""
    K = spec.pad_width
    xt = pad(toks, K)
    starts = [i for i in range(len(xt) - len(g) + 1) if xt[i:i + len(g)] == g]
    if not starts:
        return True
    s = starts[int(rng.integers(0, len(starts)))]
    inner = [i - K for i in range(s, s + len(g)) if 0 <= i - K < len(toks)]
    if not inner:
        return False
    pos = inner[int(rng.integers(0, len(inner)))]
    toks[pos] = _other(toks[pos], spec, rng)
    return True


def sample_positive(spec: LanguageSpec, len_range: Tuple[int, int], rng, max_tries: int = MAX_TRIES) -> Str:
    tag = spec.class_tag
    syms = spec.alphabet.symbols
    for _ in range(max_tries):
        L = _draw_len(len_range, rng)
        if tag in ("SL", "SP", "TSL", "PT"):
            toks: Tuple[str, ...] = ()
            for _ in range(L):
                allowed = [s for s in syms if not _left_violation(spec, toks + (s,))]
                if not allowed:
                    break
                toks = toks + (allowed[int(rng.integers(0, len(allowed)))],)
            else:
                if membership(spec, toks):
                    return toks
            continue
        draft = _uniform(spec, L, rng)
        if tag == "LTT":
            draft = _repair_ltt(spec, draft, rng)
        if len_range[0] <= len(draft) <= len_range[1] and membership(spec, draft):
            return tuple(draft)
    raise SamplerExhausted(f"no positive {tag} string in lengths {len_range} after {max_tries} attempts")


def sample_negative(spec: LanguageSpec, len_range: Tuple[int, int], rng, max_tries: int = MAX_TRIES) -> Str:
    tag = spec.class_tag
    b = spec.alphabet.boundary
    for _ in range(max_tries):
        if tag == "LTT":
            out = _break_ltt(spec, len_range, rng)
            if out is not None:
                return out
            continue
        L = _draw_len(len_range, rng)
        toks = _uniform(spec, L, rng)
        if tag in ("SL", "TSL") and spec.forbidden:
            g = spec.forbidden[int(rng.integers(0, len(spec.forbidden)))]
            if not _plant(toks, g, b, rng):
                continue
        elif tag in ("SP", "PT") and spec.forbidden:
            h = spec.forbidden[int(rng.integers(0, len(spec.forbidden)))]
            core = [t for t in h if t != b]
            if len(core) > len(toks) or (b in h and h[1:-1] and b in h[1:-1]):
                continue
            pos = np.sort(rng.choice(len(toks), size=len(core), replace=False)) if core else []
            for p, t in zip(pos, core):
                toks[int(p)] = t
        if len_range[0] <= len(toks) <= len_range[1] and not membership(spec, toks):
            return tuple(toks)
    raise SamplerExhausted(f"no negative {tag} string in lengths {len_range} after {max_tries} attempts")


def _break_ltt(spec: LanguageSpec, len_range, rng) -> Optional[Str]:
    """Break exactly one constraint of a positive draft."""
    b = spec.alphabet.boundary
    toks = list(sample_positive(spec, len_range, rng))
    idx = int(rng.integers(0, len(spec.constraints)))
    g, op, t = spec.constraints[idx]
    xt_count = lambda: count_occurrences(pad(toks, spec.pad_width), g)
    for _ in range(4 * (len(toks) + t + 2)):
        c = xt_count()
        if (op == ">=" and c < t) or (op == "<=" and c > t):
            break
        if op == ">=":
            if not _destroy_one(spec, toks, g, rng):
                return None
        elif not _plant(toks, g, b, rng):
            return None
    if not len_range[0] <= len(toks) <= len_range[1]:
        return None
    if ltt_violations(spec, toks) != [idx]:
        return None
    return tuple(toks)


# ---------------------------------------------------------------------------
# datasets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LabeledDataset:
    items: Tuple[Tuple[Str, int], ...]
    seed: int
    noise_rate: float = 0.0
    spec_fingerprint: str = ""
    sources: Tuple[str, ...] = ()
    sampler: str = SAMPLER_NAME

    def __post_init__(self):
        if any(lab not in (1, -1) for _, lab in self.items):
            raise ValueError("labels must be +1 or -1")
        if not self.sources:
            object.__setattr__(self, "sources", tuple("pos" if lab > 0 else "neg" for _, lab in self.items))

    def __len__(self):
        return len(self.items)

    @property
    def strings(self) -> List[Str]:
        return [s for s, _ in self.items]

    @property
    def labels(self) -> np.ndarray:
        return np.array([lab for _, lab in self.items], dtype=np.int64)


def generate_dataset(spec: LanguageSpec, n_pos: int, n_neg: int, len_range: Tuple[int, int],
                     seed: int) -> LabeledDataset:
    """Balanced-by-request dataset; item ``i`` of each kind draws from its own stream."""
    if n_pos < 0 or n_neg < 0:
        raise ValueError("counts must be >= 0")
    items = []
    for i in range(n_pos):
        items.append((sample_positive(spec, len_range, np.random.default_rng([seed, 1, i])), 1))
    for i in range(n_neg):
        items.append((sample_negative(spec, len_range, np.random.default_rng([seed, 2, i])), -1))
    order = np.random.default_rng([seed, 3]).permutation(len(items))
    items = tuple(items[int(j)] for j in order)
    return LabeledDataset(items, seed, 0.0, spec.fingerprint())


def flip_labels(d: LabeledDataset, rate: float, seed: int) -> LabeledDataset:
    if not 0.0 <= rate <= 1.0:
        raise ValueError("flip rate must lie in [0, 1]")
    mask = np.random.default_rng([seed, 0xF1]).random(len(d)) < rate
    items = tuple((s, -lab if f else lab) for (s, lab), f in zip(d.items, mask))
    sources = tuple("flipped" if f else src for src, f in zip(d.sources, mask))
    return LabeledDataset(items, d.seed, rate, d.spec_fingerprint, sources, d.sampler)


def write_dataset(path, d: LabeledDataset, alphabet: Alphabet) -> None:
    with open(path, "w") as fh:
        for (s, lab), src in zip(d.items, d.sources):
            fh.write(json.dumps({"string": alphabet.format(s), "label": lab, "source": src}) + "\n")


def read_dataset(path, alphabet: Alphabet, seed: int = 0) -> LabeledDataset:
    items, sources = [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                items.append((alphabet.parse(rec["string"]), int(rec["label"])))
                sources.append(rec.get("source", "pos" if int(rec["label"]) > 0 else "neg"))
            except (ValueError, KeyError) as exc:
                raise ValueError(f"{path}:{lineno}: bad dataset record: {exc}") from exc
    noise = sum(s == "flipped" for s in sources) / max(len(sources), 1)
    return LabeledDataset(tuple(items), seed, noise, "", tuple(sources))
