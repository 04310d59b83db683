"""Brute-force reference implementations; deliberately naive."""
import itertools


def bf_count(s, g):
    s, g = tuple(s), tuple(g)
    n = 0
    for i in range(len(s)):
        if i + len(g) <= len(s) and all(s[i + t] == g[t] for t in range(len(g))):
            n += 1
    return n


def bf_substring(s, g):
    s, g = tuple(s), tuple(g)
    return any(s[i:j] == g for i in range(len(s) + 1) for j in range(i, len(s) + 1))


def bf_subsequence(s, h):
    s, h = tuple(s), tuple(h)
    return any(tuple(s[i] for i in idx) == h for idx in itertools.combinations(range(len(s)), len(h)))
