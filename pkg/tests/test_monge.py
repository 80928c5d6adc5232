from __future__ import annotations

import numpy as np
from hypothesis import given, strategies as st

from oracles import core_size
from strategies import strings, weights
from wedit import monge
from wedit.align_graph import brute_bm


def minplus_oracle(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return (a[:, :, None] + b[None, :, :]).min(axis=1)


@st.composite
def monge_matrix(draw, p: int = None, q: int = None):
    p = p or draw(st.integers(1, 8))
    q = q or draw(st.integers(1, 8))
    dens = draw(st.lists(st.integers(0, 3), min_size=(p - 1) * (q - 1), max_size=(p - 1) * (q - 1)))
    row = draw(st.lists(st.integers(-5, 5), min_size=q, max_size=q))
    col = draw(st.lists(st.integers(-5, 5), min_size=p, max_size=p))
    m = np.zeros((p, q), np.int64)
    m[0, :] = np.cumsum(row)
    m[:, 0] = m[0, 0] + np.concatenate([[0], np.cumsum(col[1:])])
    d = np.array(dens, np.int64).reshape(p - 1, q - 1) if p > 1 and q > 1 else np.zeros((max(p - 1, 0), max(q - 1, 0)), np.int64)
    for i in range(1, p):
        for j in range(1, q):
            m[i, j] = m[i - 1, j] + m[i, j - 1] - m[i - 1, j - 1] - d[i - 1, j - 1]
    return m


@given(monge_matrix())
def test_generated_matrices_are_monge(m):
    assert monge.is_monge(m)


@given(st.data())
def test_minplus_matches_oracle_and_core_bound(data):
    p, q, r = (data.draw(st.integers(1, 7)) for _ in range(3))
    a = data.draw(monge_matrix(p, q))
    b = data.draw(monge_matrix(q, r))
    c, wit = monge.minplus_dense(a, b)
    assert np.array_equal(c, minplus_oracle(a, b))
    assert monge.is_monge(c)
    assert core_size(c) <= 2 * (core_size(a) + core_size(b))
    rows = np.arange(p)[:, None]
    assert np.array_equal(a[rows, wit] + b[wit, np.arange(r)[None, :]], c)


@given(monge_matrix())
def test_cmo_round_trip(m):
    c = monge.CMO.from_dense(m)
    assert np.array_equal(c.dense(), m)
    assert c.delta == core_size(m)
    p, q = m.shape
    for i in range(1, p + 1):
        for j in range(1, q + 1):
            assert c.entry(i, j) == m[i - 1, j - 1]


@given(strings(min_size=1, max_size=6), strings(min_size=1, max_size=6), weights(), st.sampled_from([1, 2, 4, 9]))
def test_capping_is_equivalent_monge_and_small(x, y, w, k):
    bm = brute_bm(x, y, w)
    capped = monge.cap_dense(bm, k)
    assert monge.k_equivalent(bm, capped, k)
    assert monge.is_monge(capped)
    N = sum(bm.shape)
    assert core_size(capped) <= 8 * N * np.sqrt(k)


def test_k_equivalence_rule():
    a = np.array([[0, 3], [5, 9]])
    b = np.array([[0, 3], [7, 4]])
    assert monge.k_equivalent(a, b, 3)
    assert not monge.k_equivalent(a, b, 4)


@given(monge_matrix())
def test_smawk_leftmost_row_minima(m):
    p, q = m.shape
    got = monge.smawk(p, q, lambda i, j: int(m[i - 1, j - 1]))
    assert [j - 1 for j in got] == list(m.argmin(axis=1))
