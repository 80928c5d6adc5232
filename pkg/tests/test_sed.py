from __future__ import annotations

import pytest
from hypothesis import assume, given, strategies as st

from oracles import dp_distance, sed_exhaustive
from strategies import strings
from wedit.align_graph import WeightFunction
from wedit.pillar import Text
from wedit.sed import PreconditionError, decompose, is_self_alignment, sed, sed_leq, sed_prefix_bound, sed_suffix_bound


@given(strings(b"abc", max_size=30), st.integers(1, 12))
def test_sed_leq_matches_exhaustive(x, k):
    with pytest.raises(PreconditionError):
        sed_leq(x, 0)
    ref = sed_exhaustive(x)
    got = sed_leq(x, k)
    if ref <= k:
        assert got is not None and got[0] == ref
        assert is_self_alignment(got[1])
        assert got[1].unit_cost(x, x) == ref
    else:
        assert got is None


def test_single_character_has_sed_two():
    assert sed(b"a") == 2
    assert sed(b"") == 0


@given(strings(b"ab", max_size=25), st.data())
def test_monotone_and_subadditive(x, data):
    i = data.draw(st.integers(0, len(x)))
    j = data.draw(st.integers(i, len(x)))
    t = data.draw(st.integers(j, len(x)))
    assert sed(x[i:j]) <= sed(x[i:t])
    assert sed(x[i:t]) <= sed(x[i:j]) + sed(x[j:t])


@given(strings(b"ab", max_size=20), strings(b"ab", max_size=20))
def test_sed_moves_with_edit_distance(x, y):
    assert sed(y) <= sed(x) + 2 * dp_distance(x, y, WeightFunction.unit())


@given(strings(b"ab", min_size=1, max_size=25))
def test_continuity(x):
    for i in range(1, len(x)):
        assert sed(x[:i]) <= sed(x[: i + 1]) <= sed(x[:i]) + 1


@given(strings(b"ab", max_size=30), st.integers(1, 8))
def test_prefix_and_suffix_bounds(x, k):
    i = sed_prefix_bound(x, k)
    assert sed(x[:i]) <= k and (i == len(x) or sed(x[: i + 1]) > k)
    j = sed_suffix_bound(x, k)
    assert sed(x[j:]) <= k and (j == 0 or sed(x[j - 1 :]) > k)


@given(st.sampled_from([b"ab", b"abc", b"aab"]), st.integers(40, 200), st.integers(2, 6),
       st.lists(st.integers(0, 10**6), max_size=4), st.sampled_from(["static", "dynamic"]))
def test_decomposition_invariants(period, n, k, noise, mode):
    x = (period * n)[:n]
    y = bytearray(x)
    for v in noise:
        y[v % n] = ord("c")
    y = bytes(y)
    assume(sed(x) <= k and dp_distance(x, y, WeightFunction.unit()) <= k)
    X, Y = Text(x).fragment(), Text(y).fragment()
    dec = decompose(X, Y, k, mode)
    lo, hi = (k, 2 * k) if mode == "static" else (3 * k, 6 * k)
    m = dec.m
    assert dec.xs[0] == 0 and dec.xs[m] == n
    if m > 1:
        assert all(lo <= dec.xs[i + 1] - dec.xs[i] < hi for i in range(m))
    assert {0, 1} <= set(dec.F) or m < 2
    for i in range(1, m):
        if i not in dec.F:
            assert dec.x_phrase(i).to_bytes() == dec.x_phrase(i - 1).to_bytes()
            assert dec.y_phrase(i).to_bytes() == dec.y_phrase(i - 1).to_bytes()


def test_decompose_rejects_large_sed():
    x = bytes(range(97, 97 + 20)) * 3
    with pytest.raises(PreconditionError):
        decompose(x, x, 2, "static", check=True)
