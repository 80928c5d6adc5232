from __future__ import annotations

import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import dp_distance
from strategies import strings, weights
from wedit.align_graph import WeightFunction
from wedit.dynamic_solver import (
    BudgetExceeded,
    DynamicED,
    DynSedSession,
    EditEvent,
    GlueSession,
    UpdateLog,
    compose_alignments,
    parse_script,
    recost,
)
from wedit.sed import sed
from wedit.static_solver import PURE, solve


@st.composite
def events(draw, alphabet=b"ab", count=10):
    out = []
    for _ in range(draw(st.integers(0, count))):
        out.append((draw(st.sampled_from("XY")), draw(st.sampled_from(["ins", "del", "sub"])),
                    draw(st.integers(0, 10**6)), draw(st.sampled_from(list(alphabet)))))
    return out


def concrete(raw, x: bytes, y: bytes):
    """Turn drawn tuples into valid events against evolving strings."""
    for side, op, p, ch in raw:
        s = x if side == "X" else y
        if not s:
            op = "ins"
        e = EditEvent(side, op, p % (len(s) + (op == "ins")), None if op == "del" else ch)
        if side == "X":
            x = e.apply(x)
        else:
            y = e.apply(y)
        yield e, x, y


def test_parse_script():
    evs = parse_script("X ins 0 a\n# comment\n\nY del 3\nX sub 2 c  # trailing\n")
    assert [str(e) for e in evs] == ["X ins 0 a", "Y del 3", "X sub 2 c"]
    for bad in ("Z ins 0 a", "X ins a", "X del 1 a", "X sub 1", "X ins 1 ab"):
        with pytest.raises(ValueError):
            parse_script(bad)


def test_event_bounds():
    with pytest.raises(IndexError):
        EditEvent("X", "del", 3).apply(b"abc")
    assert EditEvent("X", "ins", 3, ord("d")).apply(b"abc") == b"abcd"


@given(strings(max_size=15), events(count=12))
def test_update_log_composes(x, raw):
    log = UpdateLog(len(x), 0)
    cur = x
    for e, nx, _ in concrete([r for r in raw if r[0] == "X"], x, b""):
        log.apply(e)
        cur = nx
    B = log.B
    assert B.start == (0, 0) and B.end == (len(x), len(cur))
    assert B.unit_cost(x, cur) <= log.events


@given(strings(max_size=12), strings(max_size=12), strings(max_size=12))
def test_compose_is_valid_and_subadditive(x, y, z):
    w = WeightFunction.unit()
    _, a = solve(x, y, w)
    _, b = solve(y, z, w)
    c = compose_alignments(a, b)
    assert c.start == (0, 0) and c.end == (len(x), len(z))
    assert c.unit_cost(x, z) <= a.unit_cost(x, y) + b.unit_cost(y, z)


def periodic_pair(rng, k, W):
    alpha = b"acgt"
    while True:
        per = bytes(rng.choice(alpha) for _ in range(rng.randint(1, 3)))
        n = rng.randint(3 * k + 1, 12 * k)
        x = (per * n)[:n]
        y = bytearray(x)
        for _ in range(rng.randint(0, max(1, k // (2 * W)))):
            y[rng.randrange(n)] = rng.choice(alpha)
        if sed(x) <= k:
            return x, bytes(y)


@settings(max_examples=15)
@given(st.integers(0, 2**31), st.sampled_from([4, 8, 16]), st.sampled_from([1, 2]))
def test_dyn_sed_session_tree_route(seed, k, W):
    rng = random.Random(seed)
    w = WeightFunction.unit() if W == 1 else WeightFunction.random(list(b"acgt"), W, np.random.default_rng(seed))
    x, y = periodic_pair(rng, k, W)
    if dp_distance(x, y, w) > k:
        return
    s = DynSedSession(x, y, w, k, PURE)
    assert s.route == "tree"
    m = s.m
    assert s.distinct_nodes() <= 2 * len(s.F) * (m.bit_length() + 1)
    X, Y = x, y
    leaves_before = list(s.levels[0])
    mats_before = [nd.rep.root.matrix.copy() for nd in leaves_before]
    for _ in range(k // W):
        side = rng.choice("XY")
        S = X if side == "X" else Y
        op = rng.choice(["ins", "del", "sub"])
        e = EditEvent(side, op, rng.randrange(len(S) + (op == "ins")), None if op == "del" else rng.choice(b"acgt"))
        if side == "X":
            X = e.apply(X)
        else:
            Y = e.apply(Y)
        s.apply(e)
        d, a = s.current()
        assert d == dp_distance(X, Y, w) == recost(a, X, Y, w)
    for nd, snap in zip(leaves_before, mats_before):
        assert np.array_equal(nd.rep.root.matrix, snap)
    with pytest.raises(BudgetExceeded):
        s.apply(EditEvent("X", "sub", 0, ord("a")))


@settings(max_examples=20)
@given(strings(b"ab", min_size=4, max_size=30), strings(b"ab", max_size=3), st.data())
def test_glue_session(core, mid, data):
    w = WeightFunction.unit()
    x = core + mid + core
    y = bytearray(x)
    y[0] = ord("b") if y[0] == ord("a") else ord("a")
    y = bytes(y)
    k = 6
    cut = len(core)
    xl, xm, xr = x[:cut], mid, x[cut + len(mid):]
    yl, ym, yr = y[:cut], mid, y[cut + len(mid):]
    g = GlueSession(xl, xm, xr, yl, ym, yr, w, k)
    L = [xl, yl]
    R = [xr, yr]
    X, Y = x, y
    for _ in range(k):
        side = data.draw(st.sampled_from("XY"))
        S = X if side == "X" else Y
        op = data.draw(st.sampled_from(["ins", "del", "sub"])) if len(S) > 1 else "ins"
        pos = data.draw(st.integers(0, len(S) - (op != "ins")))
        e = EditEvent(side, op, pos, None if op == "del" else data.draw(st.sampled_from(b"ab")))
        part, q = g.route(e)
        idx = 0 if side == "X" else 1
        if part == "L":
            L[idx] = e.at(q).apply(L[idx])
        elif part == "R":
            R[idx] = e.at(q).apply(R[idx])
        if side == "X":
            X = e.apply(X)
        else:
            Y = e.apply(Y)
        g.apply(e)
        _, ol = solve(L[0], L[1], w)
        _, orr = solve(R[0], R[1], w)
        a = g.query(ol, orr)
        assert a.start == (0, 0) and a.end == (len(X), len(Y))
        assert recost(a, X, Y, w) == dp_distance(X, Y, w)


def replay(x, y, w, raw, cfg=None, threshold=None):
    s = DynamicED(x, y, w, threshold=threshold, config=cfg)
    prev = s.distance
    for e, X, Y in concrete(raw, x, y):
        d, a = s.apply(e)
        ref = dp_distance(X, Y, w)
        if threshold is not None and ref > threshold:
            assert d is None
        else:
            assert d == ref and recost(a, X, Y, w) == d
        if prev is not None and d is not None:
            assert abs(d - prev) <= w.W
        prev = d if threshold is None else None


@given(strings(b"ab", max_size=40), strings(b"ab", max_size=40), weights(max_w=4), events(count=25))
def test_dynamic_default(x, y, w, raw):
    replay(x, y, w, raw)


@settings(max_examples=10)
@given(st.integers(0, 2**31))
def test_dynamic_pure_epochs(seed):
    rng = random.Random(seed)
    W = rng.choice([1, 2])
    w = WeightFunction.unit() if W == 1 else WeightFunction.random(list(b"ab"), W, np.random.default_rng(seed))
    per = bytes(rng.choice(b"ab") for _ in range(rng.randint(1, 3)))
    x = (per * 40)[:80]
    y = bytearray(x)
    for _ in range(rng.randint(8, 20)):
        y[rng.randrange(len(y))] = rng.choice(b"ab")
    raw = [(rng.choice("XY"), rng.choice(["ins", "del", "sub"]), rng.randrange(10**6), rng.choice(b"ab"))
           for _ in range(20)]
    replay(x, bytes(y), w, raw, cfg=PURE)


@given(strings(b"ab", max_size=25), weights(max_w=3), events(count=30), st.integers(0, 8))
def test_dynamic_threshold(x, w, raw, thr):
    replay(x, x, w, raw, threshold=thr)
