"""Hot loops: gram counting, subsequence tests, edge matching, perceptron epochs.

Strings arrive CSR-encoded: ``tokens`` is a flat int32 array of symbol codes
and ``offsets[i]:offsets[i+1]`` delimits string ``i``.  Grams use the same
layout.  Every kernel has a numba version and a pure-numpy version with
identical results; ``SUBREG_NUMBA=0`` in the environment forces numpy.
"""
from __future__ import annotations

import os

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
_ENV_FLAG = "SUBREG_NUMBA"


def _env_wants_numba() -> bool:
    return os.environ.get(_ENV_FLAG, "1").strip().lower() not in ("0", "false", "no", "off")


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------

_PAD = -1
_CHUNK_CELLS = 1 << 24


def _dense(tokens, offsets, fill=_PAD):
    n = len(offsets) - 1
    lengths = np.diff(offsets)
    width = int(lengths.max()) if n else 0
    dense = np.full((n, max(width, 1)), fill, dtype=np.int32)
    if n and width:
        rows = np.repeat(np.arange(n), lengths)
        cols = np.arange(len(tokens)) - np.repeat(offsets[:-1], lengths)
        dense[rows, cols] = tokens
    return dense, lengths


def np_gram_counts(tokens, offsets, gtokens, goffsets):
    S, lengths = _dense(tokens, offsets)
    G, glens = _dense(gtokens, goffsets, fill=-2)
    n, g = len(lengths), len(glens)
    out = np.zeros((n, g), dtype=np.int32)
    if n == 0 or g == 0:
        return out
    for L in np.unique(glens):
        L = int(L)
        sel = np.flatnonzero(glens == L)
        if L > S.shape[1]:
            continue
        windows = sliding_window_view(S, L, axis=1)  # (n, W, L)
        grams = G[sel, :L]
        step = max(1, _CHUNK_CELLS // max(1, windows.size))
        for start in range(0, len(sel), step):
            part = grams[start:start + step]
            hit = (windows[:, :, None, :] == part[None, None, :, :]).all(axis=-1)
            out[:, sel[start:start + step]] = hit.sum(axis=1)
    return out


def np_subsequence_hits(tokens, offsets, gtokens, goffsets):
    S, lengths = _dense(tokens, offsets)
    G, glens = _dense(gtokens, goffsets, fill=-2)
    n, g = len(lengths), len(glens)
    if n == 0 or g == 0:
        return np.zeros((n, g), dtype=bool)
    state = np.zeros((n, g), dtype=np.int64)
    gidx = np.arange(g)[None, :]
    top = glens[None, :] - 1
    for col in range(S.shape[1]):
        want = G[gidx, np.minimum(state, top)]
        state += (S[:, col][:, None] == want) & (state < glens[None, :])
    return state >= glens[None, :]


def np_edge_hits(tokens, offsets, gtokens, goffsets, at_end):
    S, lengths = _dense(tokens, offsets)
    G, glens = _dense(gtokens, goffsets, fill=-2)
    n, g = len(lengths), len(glens)
    out = np.zeros((n, g), dtype=bool)
    for j in range(g):
        L = int(glens[j])
        ok = lengths >= L
        if L > S.shape[1] or not ok.any():
            continue
        if at_end:
            cols = (lengths[:, None] - L + np.arange(L)[None, :]).clip(min=0)
            seg = np.take_along_axis(S, cols, axis=1)
        else:
            seg = S[:, :L]
        out[:, j] = ok & (seg == G[j, :L][None, :]).all(axis=1)
    return out


def np_perceptron(X, y, w, b, max_epochs, fit_bias):
    mistakes = 0
    epochs = 0
    for _ in range(max_epochs):
        epochs += 1
        errs = 0
        for i in range(X.shape[0]):
            score = X[i] @ w + b
            pred = 1.0 if score > 0 else -1.0
            if pred != y[i]:
                w += y[i] * X[i]
                if fit_bias:
                    b += y[i]
                errs += 1
        mistakes += errs
        if errs == 0:
            break
    return w, b, mistakes, epochs


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @numba.njit(cache=True, nogil=True)
    def nb_gram_counts(tokens, offsets, gtokens, goffsets):
        n = offsets.shape[0] - 1
        g = goffsets.shape[0] - 1
        out = np.zeros((n, g), dtype=np.int32)
        for i in range(n):
            s0 = offsets[i]
            slen = offsets[i + 1] - s0
            for j in range(g):
                g0 = goffsets[j]
                glen = goffsets[j + 1] - g0
                c = 0
                for start in range(slen - glen + 1):
                    ok = True
                    for t in range(glen):
                        if tokens[s0 + start + t] != gtokens[g0 + t]:
                            ok = False
                            break
                    if ok:
                        c += 1
                out[i, j] = c
        return out

    @numba.njit(cache=True, nogil=True)
    def nb_subsequence_hits(tokens, offsets, gtokens, goffsets):
        n = offsets.shape[0] - 1
        g = goffsets.shape[0] - 1
        out = np.zeros((n, g), dtype=np.bool_)
        for i in range(n):
            s0 = offsets[i]
            s1 = offsets[i + 1]
            for j in range(g):
                g0 = goffsets[j]
                glen = goffsets[j + 1] - g0
                k = 0
                for p in range(s0, s1):
                    if tokens[p] == gtokens[g0 + k]:
                        k += 1
                        if k == glen:
                            break
                out[i, j] = k == glen
        return out

    @numba.njit(cache=True, nogil=True)
    def nb_edge_hits(tokens, offsets, gtokens, goffsets, at_end):
        n = offsets.shape[0] - 1
        g = goffsets.shape[0] - 1
        out = np.zeros((n, g), dtype=np.bool_)
        for i in range(n):
            s0 = offsets[i]
            slen = offsets[i + 1] - s0
            for j in range(g):
                g0 = goffsets[j]
                glen = goffsets[j + 1] - g0
                if glen > slen:
                    continue
                base = s0 + slen - glen if at_end else s0
                ok = True
                for t in range(glen):
                    if tokens[base + t] != gtokens[g0 + t]:
                        ok = False
                        break
                out[i, j] = ok
        return out

    @numba.njit(cache=True, nogil=True)
    def nb_perceptron(X, y, w, b, max_epochs, fit_bias):
        n, d = X.shape
        mistakes = 0
        epochs = 0
        for _ in range(max_epochs):
            epochs += 1
            errs = 0
            for i in range(n):
                score = b
                for j in range(d):
                    score += X[i, j] * w[j]
                pred = 1.0 if score > 0 else -1.0
                if pred != y[i]:
                    for j in range(d):
                        w[j] += y[i] * X[i, j]
                    if fit_bias:
                        b += y[i]
                    errs += 1
            mistakes += errs
            if errs == 0:
                break
        return w, b, mistakes, epochs


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

_backend = "numba" if (HAVE_NUMBA and _env_wants_numba()) else "numpy"


def backend() -> str:
    return _backend


def set_backend(name: str) -> str:
    """Switch backends at runtime; returns the previous one."""
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    prev, _backend = _backend, name
    return prev


def _prep(tokens, offsets, gtokens, goffsets):
    return (np.ascontiguousarray(tokens, dtype=np.int32), np.ascontiguousarray(offsets, dtype=np.int64),
            np.ascontiguousarray(gtokens, dtype=np.int32), np.ascontiguousarray(goffsets, dtype=np.int64))


def gram_counts(tokens, offsets, gtokens, goffsets) -> np.ndarray:
    """Overlapping occurrence counts, shape (strings, grams)."""
    args = _prep(tokens, offsets, gtokens, goffsets)
    return nb_gram_counts(*args) if _backend == "numba" else np_gram_counts(*args)


def subsequence_hits(tokens, offsets, gtokens, goffsets) -> np.ndarray:
    args = _prep(tokens, offsets, gtokens, goffsets)
    return nb_subsequence_hits(*args) if _backend == "numba" else np_subsequence_hits(*args)


def edge_hits(tokens, offsets, gtokens, goffsets, at_end: bool) -> np.ndarray:
    """Whether each gram is the prefix (or suffix, if ``at_end``) of each string."""
    args = _prep(tokens, offsets, gtokens, goffsets)
    if _backend == "numba":
        return nb_edge_hits(*args, bool(at_end))
    return np_edge_hits(*args, bool(at_end))


def perceptron(X, y, w, b, max_epochs, fit_bias):
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    w = np.array(w, dtype=np.float64)
    fn = nb_perceptron if _backend == "numba" else np_perceptron
    w, b, mistakes, epochs = fn(X, y, w, float(b), int(max_epochs), bool(fit_bias))
    return w, float(b), int(mistakes), int(epochs)
