import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from subreg.predicates import (
    Kind,
    Predicate,
    PredicateSet,
    build_predicate_set,
    eval_predicate,
    feature_matrix,
    gram_is_feasible,
    truth_vector,
)
from subreg.strings import Alphabet, pad, project_tier

from conftest import all_strings
from oracles import bf_substring

AB = Alphabet(("a", "b"))
ABC = Alphabet(("a", "b", "c"))
ABCD = Alphabet(("a", "b", "c", "d"))


def observed_grams(alpha, k, K, max_len=6):
    """Every k-gram seen in some padded string of length <= max_len."""
    seen = set()
    for x in all_strings(alpha.symbols, max_len):
        xt = pad(x, K)
        for i in range(len(xt) - k + 1):
            seen.add(xt[i:i + k])
    return seen


@pytest.mark.parametrize("k", [1, 2, 3])
def test_sl_enumeration_matches_occurrence_oracle(k):
    P = build_predicate_set(AB, "SL", k=k)
    K = max(k - 1, 1)
    assert {p.gram for p in P} == observed_grams(AB, k, K)


def test_sl2_over_ab_count():
    # (a,b,#)^2 = 9 grams; "##" is reachable via the empty string, nothing is excluded for k=2
    P = build_predicate_set(AB, "SL", k=2)
    assert len(P) == 9
    P3 = build_predicate_set(AB, "SL", k=3)
    assert ("a", "#", "b") not in {p.gram for p in P3}
    assert len(P3) == len(observed_grams(AB, 3, 2))


def test_sp2_over_abcd_has_25():
    P = build_predicate_set(ABCD, "SP", k=2)
    assert len(P) == 25
    assert all(p.kind is Kind.SUBSEQUENCE for p in P)


def test_pt_m1_unary():
    P = build_predicate_set(Alphabet(("a",)), "PT", m=1)
    assert sorted(p.gram for p in P) == [("#",), ("a",)]


def test_lt_has_edges_and_ltt_thresholds():
    P = build_predicate_set(AB, "LT", k=2)
    kinds = [p.kind for p in P]
    assert kinds.count(Kind.PREFIX) == 3 and kinds.count(Kind.SUFFIX) == 3
    L = build_predicate_set(AB, "LTT", k=2, tau=2)
    assert all(p.kind is Kind.THRESHOLD for p in L)
    assert {p.threshold for p in L} == {1, 2}
    grams = {p.gram for p in L}
    assert ("a",) in grams and ("#", "a") in grams
    L2 = build_predicate_set(AB, "LTT", k=2, tau=1, boundary_affixes=True)
    assert any(p.kind is Kind.PREFIX for p in L2)
    L3 = build_predicate_set(AB, "LTT", k=2, tau={("a",): 3})
    assert max(p.threshold for p in L3 if p.gram == ("a",)) == 3
    assert max(p.threshold for p in L3 if p.gram == ("b",)) == 1


def test_tsl_tiers():
    P = build_predicate_set(ABC, "TSL", k=2, tiers=[("a", "c")])
    assert all(set(p.gram) <= {"a", "c", "#"} for p in P)
    Pall = build_predicate_set(ABC, "TSL", k=2, all_tiers=True)
    assert len({p.tier for p in Pall}) == 7
    with pytest.raises(ValueError):
        build_predicate_set(ABC, "TSL", k=2, tiers=[("z",)])


@pytest.mark.parametrize("tag,params", [("SL", {"k": 0}), ("PT", {"m": 0}), ("XX", {"k": 1})])
def test_bad_params(tag, params):
    with pytest.raises(ValueError):
        build_predicate_set(AB, tag, **params)


def test_eval_examples():
    p = Predicate(Kind.SUBSTRING, "ngt", 2)
    assert eval_predicate(p, "length")
    assert not eval_predicate(p, "lentgh")
    t = Predicate(Kind.TIER, "ai", 1, tier=("a", "i"))
    assert eval_predicate(t, "bbaibb")
    c = Predicate(Kind.THRESHOLD, "a", 1, threshold=2)
    assert eval_predicate(c, "aba")
    assert not eval_predicate(c, "ab")


def test_truth_vector_examples():
    P = PredicateSet((Predicate(Kind.SUBSEQUENCE, "ab"), Predicate(Kind.SUBSEQUENCE, "ba")), "SP", AB)
    assert truth_vector(P, "ab").tolist() == [True, False]
    sl = build_predicate_set(AB, "SL", k=2)
    r = truth_vector(sl, "")
    for p, bit in zip(sl, r):
        if "#" not in p.gram:
            assert not bit
    assert (truth_vector(sl, "abba") == truth_vector(sl, "abba")).all()


def test_feature_matrix_shapes(backend):
    P = build_predicate_set(AB, "SP", k=1)
    assert feature_matrix(P, []).shape == (0, len(P))
    X = feature_matrix(P, ["ab", "bb"])
    assert X.shape == (2, len(P))


@pytest.mark.parametrize("tag,params", [
    ("SL", {"k": 3}), ("SP", {"k": 2}), ("LT", {"k": 2}), ("PT", {"m": 2}),
    ("LTT", {"k": 2, "tau": 2, "boundary_affixes": True}), ("TSL", {"k": 2, "all_tiers": True}),
])
def test_feature_matrix_rows_equal_truth_vectors(backend, tag, params):
    P = build_predicate_set(ABC, tag, **params)
    xs = list(all_strings(ABC.symbols, 4))
    X = feature_matrix(P, xs)
    for x, row in zip(xs, X):
        assert (row == truth_vector(P, x)).all(), (x, tag)


def test_stable_order():
    a = build_predicate_set(ABCD, "LTT", k=2, tau=2)
    b = build_predicate_set(ABCD, "LTT", k=2, tau=2)
    assert a.predicates == b.predicates
    assert a.to_dict() == b.to_dict()


def test_serialization_roundtrip(tmp_path):
    P = build_predicate_set(ABC, "TSL", k=2, tiers=[("a", "c")])
    P.save(tmp_path / "p.json")
    Q = PredicateSet.load(tmp_path / "p.json")
    assert Q.predicates == P.predicates and Q.alphabet == P.alphabet and Q.names == P.names


words = st.lists(st.sampled_from("abc"), max_size=7).map(tuple)


@given(words, st.integers(0, 7), st.sampled_from("abc"))
def test_subsequence_monotone_under_insertion(x, pos, sym):
    P = build_predicate_set(ABC, "SP", k=2)
    y = x[:pos] + (sym,) + x[pos:]
    before, after = truth_vector(P, x), truth_vector(P, y)
    assert not (before & ~after).any()


@given(words)
def test_threshold_monotone(x):
    P = build_predicate_set(ABC, "LTT", k=2, tau=3)
    r = dict(zip(P.predicates, truth_vector(P, x)))
    for p, bit in r.items():
        if bit and p.threshold >= 2:
            lower = Predicate(Kind.THRESHOLD, p.gram, p.pad_width, p.threshold - 1)
            assert r[lower]


def test_tsl_equals_sl_on_projection_exhaustive():
    tier = ("a", "c")
    P = build_predicate_set(ABC, "TSL", k=2, tiers=[tier])
    for x in all_strings(ABC.symbols, 6):
        proj = project_tier(pad(x, 1), tier)
        for p in P:
            assert eval_predicate(p, x) == bf_substring(proj, p.gram)


def test_feasibility_rule():
    assert gram_is_feasible(tuple("#a#"), 1)
    assert not gram_is_feasible(tuple("a#b"), 2)
    assert gram_is_feasible(tuple("###"), 2)
    assert not gram_is_feasible(tuple("###"), 1)
    assert not gram_is_feasible(tuple("##a"), 1)
