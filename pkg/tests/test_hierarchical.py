from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import boundary_dijkstra
from strategies import strings, weights
from wedit import monge
from wedit.align_graph import Alignment
from wedit.hierarchical import DistanceExceedsK, MegaEdit, had_alignment, had_build, had_megaedit


@given(strings(min_size=1, max_size=6), strings(min_size=1, max_size=6), weights())
def test_exact_matrix_equals_dijkstra(x, y, w):
    h = had_build(x, y, w)
    ref = boundary_dijkstra(x, y, w)
    assert np.array_equal(h.root.matrix, ref)
    P = len(x) + len(y) + 1
    for i in range(P):
        for j in range(P):
            a = had_alignment(h, i, j)
            if isinstance(a, Alignment):
                assert a.cost(x, y, w) == ref[i, j]


@given(strings(min_size=1, max_size=6), strings(min_size=1, max_size=6), weights(), st.sampled_from([1, 3, 7]))
def test_relaxed_matrix_is_k_equivalent(x, y, w, k):
    # check=True also asserts the capped stitch monotonicity hypothesis
    h = had_build(x, y, w, mode="relaxed", k=k, check=True)
    ref = boundary_dijkstra(x, y, w)
    assert np.array_equal(np.minimum(h.root.matrix, k + 1), np.minimum(ref, k + 1))
    i, j = 0, len(x) + len(y)
    if ref[i, j] > k:
        with pytest.raises(DistanceExceedsK):
            had_alignment(h, i, j)


@given(strings(b"abc", min_size=2, max_size=12), strings(b"abc", min_size=2, max_size=12), weights(b"abc"),
       st.lists(st.tuples(st.sampled_from("XY"), st.sampled_from(["ins", "del", "sub", "cut", "cep"]),
                          st.integers(0, 100), st.integers(0, 100), st.sampled_from(b"abc")), max_size=5))
def test_megaedits_match_rebuild_and_keep_old_handles(x, y, w, edits):
    h = had_build(x, y, w)
    history = [(h, h.root.matrix.copy())]
    for side, kind, p, q, ch in edits:
        s = h.x() if side == "X" else h.y()
        n = len(s)
        if kind == "ins":
            e = MegaEdit.insert(p % (n + 1), ch)
        elif n < 2:
            continue
        elif kind == "del":
            e = MegaEdit.delete(p % n)
        elif kind == "sub":
            e = MegaEdit.substitute(p % n, ch)
        elif kind == "cut":
            l = p % n
            r = min(n, l + 1 + q % 3)
            if r - l >= n:
                continue
            e = MegaEdit.remove_range(l, r)
        else:
            l = p % n
            r = min(n, l + 1 + q % 3)
            e = MegaEdit.copy_exp_paste(l, r, q % (n + 1), 1 + q % 4)
        h = had_megaedit(h, side, e)
        ref = boundary_dijkstra(h.x(), h.y(), w) if len(h.x()) + len(h.y()) <= 16 else None
        if ref is not None:
            assert np.array_equal(h.root.matrix, ref)
        else:
            assert np.array_equal(h.root.matrix, had_build(h.x(), h.y(), w).root.matrix)
        history.append((h, h.root.matrix.copy()))
    for old, snap in history:
        assert np.array_equal(old.root.matrix, snap)


@given(strings(min_size=1, max_size=7), strings(min_size=1, max_size=7), weights())
def test_exact_matrices_are_bounded_difference_monge(x, y, w):
    m = had_build(x, y, w).root.matrix
    P = m.shape[0]
    assert monge.is_monge(m)
    assert monge.bounded_difference(m) <= w.W + 1
    assert int(np.count_nonzero(monge.density(m))) <= 2 * (w.W + 1) * (P - 1)
