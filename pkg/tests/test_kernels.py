import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from subreg import _kernels
from subreg.predicates import _encode

from oracles import bf_count, bf_subsequence

pytestmark = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba missing")

CODE = {"#": 0, "a": 1, "b": 2, "c": 3}
strs = st.lists(st.lists(st.sampled_from("#abc"), max_size=10).map(tuple), min_size=1, max_size=12)
grs = st.lists(st.lists(st.sampled_from("#abc"), min_size=1, max_size=4).map(tuple), min_size=1, max_size=8)


def both(fn_name, *args):
    out = {}
    for b in ("numba", "numpy"):
        prev = _kernels.set_backend(b)
        try:
            out[b] = getattr(_kernels, fn_name)(*args)
        finally:
            _kernels.set_backend(prev)
    return out["numba"], out["numpy"]


@settings(max_examples=60, deadline=None)
@given(strs, grs)
def test_counts_agree_with_oracle(ss, gs):
    t, o = _encode(ss, CODE)
    gt, go = _encode(gs, CODE)
    nb, npy = both("gram_counts", t, o, gt, go)
    expected = np.array([[bf_count(s, g) for g in gs] for s in ss])
    assert (nb == expected).all() and (npy == expected).all()


@settings(max_examples=60, deadline=None)
@given(strs, grs)
def test_subsequence_agree_with_oracle(ss, gs):
    t, o = _encode(ss, CODE)
    gt, go = _encode(gs, CODE)
    nb, npy = both("subsequence_hits", t, o, gt, go)
    expected = np.array([[bf_subsequence(s, g) for g in gs] for s in ss])
    assert (nb == expected).all() and (npy == expected).all()


@settings(max_examples=60, deadline=None)
@given(strs, grs, st.booleans())
def test_edges_agree(ss, gs, at_end):
    t, o = _encode(ss, CODE)
    gt, go = _encode(gs, CODE)
    nb, npy = both("edge_hits", t, o, gt, go, at_end)
    expected = np.array([[len(s) >= len(g) and (s[len(s) - len(g):] if at_end else s[:len(g)]) == g
                          for g in gs] for s in ss])
    assert (nb == expected).all() and (npy == expected).all()


def test_perceptron_backends_agree():
    rng = np.random.default_rng(3)
    X = rng.integers(0, 2, size=(40, 6)).astype(float)
    y = np.where(X[:, 0] + X[:, 1] > X[:, 2], 1.0, -1.0)
    nb, npy = both("perceptron", X, y, np.zeros(6), 0.0, 50, True)
    assert np.array_equal(nb[0], npy[0]) and nb[1:] == npy[1:]


def test_backend_switch_validation():
    with pytest.raises(ValueError):
        _kernels.set_backend("cuda")
    assert _kernels.backend() in ("numba", "numpy")


def test_env_flag_forces_numpy():
    import os
    import subprocess
    import sys
    env = dict(os.environ, SUBREG_NUMBA="0")
    out = subprocess.run([sys.executable, "-c", "from subreg import _kernels; print(_kernels.backend())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"
