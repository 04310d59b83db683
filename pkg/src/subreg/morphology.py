"""Affix-sequence well-formedness: corpus ingestion, perturbation negatives,
PT(2) + LTT(2) featurization, training and interpretation.

Affix tokens carry their side in the spelling: prefixes end with ``-``
(``"un-"``) and suffixes start with it (``"-ness"``).  A word's sequence is
its prefixes in surface order followed by its suffixes in surface order.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .learners import (
    DEFAULT_L2_NOISY,
    LinearModel,
    Metrics,
    evaluate,
    normalized_margin,
    train_logreg,
)
from .predicates import PredicateSet, build_predicate_set
from .strings import Alphabet

DEFAULT_PREFIXES = (
    "un", "re", "dis", "in", "im", "non", "pre", "mis", "over", "under",
    "out", "sub", "inter", "anti", "de", "en", "co", "trans",
)
DEFAULT_SUFFIXES = (
    "ness", "ly", "ful", "less", "able", "ible", "ment", "er", "ist", "ism",
    "ity", "ize", "ation", "ion", "al", "ous", "ive", "ic", "ish", "dom",
    "hood", "ship", "ward", "y",
)
SPLITS = ("train", "dev", "test")


class NoNegativePossible(ValueError):
    pass


@dataclass(frozen=True)
class AffixInventory:
    prefixes: frozenset
    suffixes: frozenset

    def __init__(self, prefixes, suffixes):
        pre = frozenset(p if p.endswith("-") else p + "-" for p in prefixes)
        suf = frozenset(s if s.startswith("-") else "-" + s for s in suffixes)
        if not pre and not suf:
            raise ValueError("affix inventory is empty")
        if pre & suf:
            raise ValueError(f"tokens on both sides: {sorted(pre & suf)}")
        object.__setattr__(self, "prefixes", pre)
        object.__setattr__(self, "suffixes", suf)

    @classmethod
    def default(cls) -> "AffixInventory":
        return cls(DEFAULT_PREFIXES, DEFAULT_SUFFIXES)

    @property
    def tokens(self) -> Tuple[str, ...]:
        return tuple(sorted(self.prefixes)) + tuple(sorted(self.suffixes))

    def alphabet(self) -> Alphabet:
        return Alphabet(self.tokens)

    def side(self, token: str) -> str:
        if token in self.prefixes:
            return "prefix"
        if token in self.suffixes:
            return "suffix"
        raise KeyError(token)

    def __contains__(self, token):
        return token in self.prefixes or token in self.suffixes


@dataclass(frozen=True)
class AffixEntry:
    word: str
    affixes: Tuple[str, ...]
    source: str  # "lexicon" | "segmenter"


@dataclass
class LoadReport:
    entries: List[AffixEntry]
    dropped: int = 0
    unknown_tokens: Dict[str, int] = field(default_factory=dict)


def segment_affixes(word: str, inventory: AffixInventory, min_stem: int = 3) -> Tuple[str, ...]:
    """Greedy longest-match peeling: prefixes from the left, then suffixes from the right."""
    w = word.lower()
    pre_strs = sorted((p[:-1] for p in inventory.prefixes), key=len, reverse=True)
    suf_strs = sorted((s[1:] for s in inventory.suffixes), key=len, reverse=True)
    prefixes, suffixes = [], []
    while True:
        hit = next((p for p in pre_strs if w.startswith(p) and len(w) - len(p) >= min_stem), None)
        if hit is None:
            break
        prefixes.append(hit + "-")
        w = w[len(hit):]
    while True:
        hit = next((s for s in suf_strs if w.endswith(s) and len(w) - len(s) >= min_stem), None)
        if hit is None:
            break
        suffixes.append("-" + hit)
        w = w[:-len(hit)]
    return tuple(prefixes) + tuple(reversed(suffixes))


_MLX_PREFIX = re.compile(r"<([^<>{}()]+)<")
_MLX_SUFFIX = re.compile(r">([^<>{}()]+)>")


def parse_annotation(text: str) -> Tuple[str, ...]:
    """Affix tokens from an annotation cell.

    Accepts MorphoLex segmentations (``<un<{(kind)}>ness>``) or explicit
    token lists separated by whitespace, ``+``, ``;`` or ``,``.
    """
    text = text.strip()
    if not text:
        return ()
    if "{" in text:
        pre = [m.group(1) + "-" for m in _MLX_PREFIX.finditer(text)]
        suf = ["-" + m.group(1) for m in _MLX_SUFFIX.finditer(text)]
        return tuple(pre + suf)
    return tuple(t for t in re.split(r"[\s+;,]+", text) if t)


def load_affix_corpus(path, inventory: AffixInventory, min_stem: int = 3) -> LoadReport:
    """Read a ``word<TAB>annotation`` file; blank annotations go to the segmenter."""
    report = LoadReport([])
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            cols = line.split("\t")
            if lineno == 1 and cols[0].strip().lower() == "word":
                continue
            word = cols[0].strip()
            if len(cols) > 2 or not word or not re.fullmatch(r"[A-Za-z'-]+", word):
                raise ValueError(f"{path}:{lineno}: malformed row {line!r}")
            annot = cols[1] if len(cols) > 1 else ""
            affixes = parse_annotation(annot)
            source = "lexicon"
            if not affixes:
                affixes = segment_affixes(word, inventory, min_stem)
                source = "segmenter"
            unknown = [t for t in affixes if t not in inventory]
            for t in unknown:
                report.unknown_tokens[t] = report.unknown_tokens.get(t, 0) + 1
            affixes = tuple(t for t in affixes if t in inventory)
            if not affixes:
                report.dropped += 1
                continue
            report.entries.append(AffixEntry(word.lower(), affixes, source))
    return report


def toy_corpus_path() -> Path:
    return Path(str(resources.files("subreg") / "data" / "toy_affixes.tsv"))


def generate_negatives(seq: Sequence[str], mode: str, inventory: AffixInventory, rng) -> Tuple[str, ...]:
    seq = tuple(seq)
    if not seq:
        raise NoNegativePossible("empty sequence")
    if mode == "permute":
        perms = sorted(set(itertools.permutations(seq)) - {seq})
        if not perms:
            raise NoNegativePossible(f"no non-identity permutation of {seq}")
        return perms[int(rng.integers(0, len(perms)))]
    if mode == "substitute":
        options = []
        for i, tok in enumerate(seq):
            pool = inventory.prefixes if inventory.side(tok) == "prefix" else inventory.suffixes
            alts = sorted(pool - {tok})
            if alts:
                options.append((i, alts))
        if not options:
            raise NoNegativePossible(f"no same-side substitute for any token of {seq}")
        i, alts = options[int(rng.integers(0, len(options)))]
        out = list(seq)
        out[i] = alts[int(rng.integers(0, len(alts)))]
        return tuple(out)
    raise ValueError(f"unknown perturbation mode {mode!r}")


@dataclass(frozen=True)
class MorphItem:
    affixes: Tuple[str, ...]
    label: int
    word: str
    split: str


@dataclass
class MorphDataset:
    items: List[MorphItem]
    skipped: int = 0

    def split(self, name: str) -> List[MorphItem]:
        return [it for it in self.items if it.split == name]

    def leakage(self) -> int:
        """Number of words that appear in more than one split."""
        seen: Dict[str, set] = {}
        for it in self.items:
            seen.setdefault(it.word, set()).add(it.split)
        return sum(len(s) > 1 for s in seen.values())


def build_morph_dataset(entries: Sequence[AffixEntry], inventory: AffixInventory, neg_per_pos: int = 1,
                        split_ratios: Tuple[float, float, float] = (0.8, 0.1, 0.1),
                        seed: int = 0) -> MorphDataset:
    if not entries:
        raise ValueError("no corpus entries")
    if abs(sum(split_ratios) - 1.0) > 1e-9 or any(r < 0 for r in split_ratios):
        raise ValueError(f"split ratios must be non-negative and sum to 1, got {split_ratios}")
    rng = np.random.default_rng([seed, 11])
    words = sorted({e.word for e in entries})
    order = [words[int(i)] for i in rng.permutation(len(words))]
    cuts = np.floor(np.cumsum(split_ratios) * len(words) + 1e-9).astype(int)
    split_of = {}
    for pos, w in enumerate(order):
        split_of[w] = SPLITS[int(np.searchsorted(cuts, pos, side="right"))] if pos < cuts[-1] else SPLITS[-1]

    items, skipped, draw = [], 0, 0
    modes = ("permute", "substitute")
    for e in entries:
        sp = split_of[e.word]
        items.append(MorphItem(e.affixes, 1, e.word, sp))
        for _ in range(neg_per_pos):
            first = modes[draw % 2]
            draw += 1
            neg = None
            for mode in (first, modes[1 - modes.index(first)]):
                try:
                    neg = generate_negatives(e.affixes, mode, inventory, rng)
                    break
                except NoNegativePossible:
                    continue
            if neg is None:
                skipped += 1
                continue
            items.append(MorphItem(neg, -1, e.word, sp))
    return MorphDataset(items, skipped)


def morph_predicates(inventory: AffixInventory) -> PredicateSet:
    alpha = inventory.alphabet()
    pt = build_predicate_set(alpha, "PT", m=2)
    ltt = build_predicate_set(alpha, "LTT", k=2, tau=1)
    return pt.combine(ltt)


def morph_featurize(seqs: Sequence[Sequence[str]], inventory: AffixInventory,
                    P: Optional[PredicateSet] = None) -> np.ndarray:
    for s in seqs:
        for t in s:
            if t not in inventory:
                raise ValueError(f"unknown affix token {t!r}")
    P = P or morph_predicates(inventory)
    return P.feature_matrix([tuple(s) for s in seqs])


def top_features(model: LinearModel, k: int) -> List[Tuple[str, float]]:
    if k <= 0:
        return []
    order = sorted(range(len(model.weights)), key=lambda j: (-abs(model.weights[j]), j))
    return [(model.feature_names[j], float(model.weights[j])) for j in order[:k]]


def margin_histogram(model: LinearModel, X, y, bins: int = 20) -> Tuple[np.ndarray, np.ndarray]:
    if bins < 1:
        raise ValueError("bins must be >= 1")
    if len(y) == 0:
        raise ValueError("empty dataset")
    margins = normalized_margin(model, X, y)
    counts, edges = np.histogram(margins, bins=bins, range=(margins.min(), margins.max()))
    return edges, counts


@dataclass
class MorphReport:
    metrics: Metrics
    top: List[Tuple[str, float]]
    hist_edges: np.ndarray
    hist_counts: np.ndarray
    leakage: int
    sizes: Dict[str, int]
    dropped: int
    skipped: int
    model: LinearModel
    test_margins: np.ndarray


def run_pipeline(corpus=None, inventory: Optional[AffixInventory] = None, neg_per_pos: int = 1,
                 split_ratios=(0.8, 0.1, 0.1), seed: int = 0, l2: float = DEFAULT_L2_NOISY,
                 lr: float = 0.5, epochs: int = 5000, top_k: int = 15, bins: int = 20,
                 min_stem: int = 3) -> MorphReport:
    inventory = inventory or AffixInventory.default()
    loaded = load_affix_corpus(corpus or toy_corpus_path(), inventory, min_stem)
    ds = build_morph_dataset(loaded.entries, inventory, neg_per_pos, tuple(split_ratios), seed)
    P = morph_predicates(inventory)
    train, test = ds.split("train"), ds.split("test")
    Xtr = morph_featurize([it.affixes for it in train], inventory, P)
    ytr = np.array([it.label for it in train])
    model = train_logreg(Xtr, ytr, l2=l2, lr=lr, epochs=epochs, feature_names=P.names)
    Xte = morph_featurize([it.affixes for it in test], inventory, P)
    yte = np.array([it.label for it in test])
    edges, counts = margin_histogram(model, Xte, yte, bins)
    return MorphReport(
        metrics=evaluate(model, Xte, yte),
        top=top_features(model, top_k),
        hist_edges=edges,
        hist_counts=counts,
        leakage=ds.leakage(),
        sizes={s: len(ds.split(s)) for s in SPLITS},
        dropped=loaded.dropped,
        skipped=ds.skipped,
        model=model,
        test_margins=normalized_margin(model, Xte, yte),
    )
