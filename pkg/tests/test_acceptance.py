"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest -v tests/test_acceptance.py`` (the lines are repeated in
the terminal summary) or directly with ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import itertools
import json
import math
import os
import random
import statistics
import subprocess
import sys
import time
from typing import Dict, List, Tuple

import jsonschema
import numpy as np

sys.path.insert(0, os.path.dirname(__file__))

from oracles import banded_distance, boundary_dijkstra, core_size, sed_exhaustive, table  # noqa: E402
from wedit import monge  # noqa: E402
from wedit.align_graph import Alignment, WeightFunction  # noqa: E402
from wedit.dynamic_solver import DynamicED, EditEvent  # noqa: E402
from wedit.hierarchical import HadNode, MegaEdit, had_build, had_megaedit  # noqa: E402
from wedit.pillar import Text  # noqa: E402
from wedit.sed import sed, sed_leq  # noqa: E402
from wedit.slp import NO_CHILD, Grammar  # noqa: E402
from wedit.static_solver import DEFAULT, PURE, SolverConfig, solve  # noqa: E402

DATA = os.path.join(os.path.dirname(__file__), "data")
RESULTS: List[str] = []


def report(name: str, ok: bool, detail: str) -> bool:
    line = f"{'PASS' if ok else 'FAIL'} {name}: {detail}"
    RESULTS.append(line)
    print(line, flush=True)
    return ok


def path_cost(a: Alignment, x: bytes, y: bytes, w) -> int:
    """Independent re-coster: walks the breakpoints and prices every step."""
    xi, yi, tab = table(w, x, y)
    eps = tab.shape[0] - 1
    pts = a.points
    assert pts[0] == (0, 0) and pts[-1] == (len(x), len(y))
    total = 0
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        if x1 - x0 > y1 - y0:
            total += tab[xi[x0], eps]
            x0 += 1
        elif y1 - y0 > x1 - x0:
            total += tab[eps, yi[y0]]
            y0 += 1
        total += int(tab[xi[x0:x1], yi[y0:y1]].sum())
    return int(total)


def seeded_pair(rng: random.Random, alpha: bytes, n: int, edits: int) -> Tuple[bytes, bytes]:
    if rng.random() < 0.5:
        per = bytes(rng.choice(alpha) for _ in range(rng.randint(1, 8)))
        x = (per * (n // len(per) + 1))[:n]
    else:
        x = bytes(rng.choice(alpha) for _ in range(n))
    y = bytearray(x)
    for _ in range(edits):
        p = rng.randrange(len(y) + 1)
        op = rng.randrange(3)
        if op == 0 and p < len(y):
            y[p] = rng.choice(alpha)
        elif op == 1 and p < len(y):
            del y[p]
        else:
            y.insert(p, rng.choice(alpha))
    return x, bytes(y)


# ---------------------------------------------------------------------------
# criterion 1 (and the product records for criterion 3)


class ProductAudit:
    """Product hook: recomputes every product independently and checks the
    core bound (exact products) or the capping bound (capped products)."""

    def __init__(self) -> None:
        self.exact = 0
        self.capped = 0
        self.bad: List[str] = []
        self.worst_cap = 0.0

    def __call__(self, a: np.ndarray, b: np.ndarray, c: np.ndarray, mode: str, k: int) -> None:
        raw = np.empty((a.shape[0], b.shape[1]), np.int64)
        for r0 in range(0, a.shape[0], 64):
            raw[r0 : r0 + 64] = (a[r0 : r0 + 64, :, None] + b[None, :, :]).min(axis=1)
        if core_size(raw) > 2 * (core_size(a) + core_size(b)):
            self.bad.append(f"core bound broken on a {a.shape}x{b.shape} product")
        if mode == "exact":
            self.exact += 1
            if not np.array_equal(raw, c):
                self.bad.append("exact product differs from the min-plus oracle")
        else:
            self.capped += 1
            if not monge.k_equivalent(raw, c, k):
                self.bad.append("capped product is not k-equivalent to the min-plus oracle")
            self.check_capped_matrix(c, k)

    def check_capped_matrix(self, c: np.ndarray, k: int) -> None:
        k = max(k, 1)
        N = max(c.shape)
        ratio = core_size(c) / (N * math.sqrt(k))
        self.worst_cap = max(self.worst_cap, ratio)
        if ratio > 8:
            self.bad.append(f"capped matrix core {core_size(c)} > 8 N sqrt(k) (N={N}, k={k})")


AUDIT = ProductAudit()


def test_criterion_1_static_oracle_equivalence():
    rng = random.Random(101)
    nrng = np.random.default_rng(101)
    cfg = SolverConfig(product_hook=AUDIT)
    t0 = time.time()
    bad = 0
    ks = []
    for _ in range(10_000):
        sig = rng.choice([2, 4, 20])
        alpha = bytes(range(97, 97 + sig))
        W = rng.choice([1, 2, 5, 30])
        x, y = seeded_pair(rng, alpha, rng.randint(0, 300), rng.randint(0, 60))
        w = WeightFunction.random(list(alpha), W, nrng)
        d, a = solve(x, y, w, cfg)
        ks.append(d)
        if banded_distance(x, y, w, d) != d or path_cost(a, x, y, w) != d:
            bad += 1
    el = time.time() - t0
    ok = report("criterion 1 (static, 10^4 instances)", bad == 0 and el < 120,
                f"{10_000 - bad}/10000 exact, k in [{min(ks)}, {max(ks)}], {el:.1f} s (limit 120 s)")
    # the default cost model sends most instances to banded DP; run the
    # phrase pipeline alone on a subset so that it is exercised too
    # half of them with relaxed (capped) boundary matrices forced
    pure = [SolverConfig(dp_crossover=0, product_hook=AUDIT),
            SolverConfig(dp_crossover=0, relaxed=True, product_hook=AUDIT)]
    bad_p = 0
    t1 = time.time()
    for i in range(300):
        sig = rng.choice([2, 4, 20])
        alpha = bytes(range(97, 97 + sig))
        x, y = seeded_pair(rng, alpha, rng.randint(0, 120), rng.randint(0, 12))
        w = WeightFunction.random(list(alpha), rng.choice([1, 2, 5, 30]), nrng)
        d, a = solve(x, y, w, pure[i % 2])
        if banded_distance(x, y, w, d) != d or path_cost(a, x, y, w) != d:
            bad_p += 1
    ok_p = report("criterion 1 (pipeline-only subset)", bad_p == 0,
                  f"{300 - bad_p}/300 exact with the DP crossover disabled, {time.time() - t1:.1f} s")
    assert ok and ok_p


# ---------------------------------------------------------------------------
# criterion 2 (and the matrix records for criterion 3)

EXACT_MATRICES: List[Tuple[np.ndarray, int]] = []
CAPPED_MATRICES: List[Tuple[np.ndarray, int]] = []


def _nodes(root: HadNode):
    seen, stack = set(), [root]
    while stack:
        nd = stack.pop()
        if nd is None or id(nd) in seen:
            continue
        seen.add(id(nd))
        yield nd
        stack += [nd.left, nd.right]


def test_criterion_2_boundary_matrices():
    nrng = np.random.default_rng(202)
    rng = random.Random(202)
    tables = [WeightFunction.random(list(b"ab"), W, nrng) for W in (1, 2, 3, 5, 8)]
    pairs = []
    # every pair of strings up to length 4, plus random pairs of every shape up to 12 x 12
    small = [bytes(p) for n in range(1, 5) for p in itertools.product(b"ab", repeat=n)]
    pairs += list(itertools.product(small, small))
    for n in range(1, 13):
        for m in range(1, 13):
            for _ in range(2):
                pairs.append((bytes(rng.choice(b"ab") for _ in range(n)), bytes(rng.choice(b"ab") for _ in range(m))))
    t0 = time.time()
    bad_exact = bad_relaxed = checked = 0
    for w in tables:
        for x, y in pairs:
            ref = boundary_dijkstra(x, y, w)
            h = had_build(x, y, w)
            checked += 1
            if not np.array_equal(h.root.matrix, ref):
                bad_exact += 1
            for nd in _nodes(h.root):
                EXACT_MATRICES.append((nd.matrix, w.W))
            for k in (1, 3, 7):
                hr = had_build(x, y, w, mode="relaxed", k=k)
                if not np.array_equal(np.minimum(hr.root.matrix, k + 1), np.minimum(ref, k + 1)):
                    bad_relaxed += 1
                for nd in _nodes(hr.root):
                    CAPPED_MATRICES.append((nd.matrix, k))
    ok = report("criterion 2 (boundary matrices vs Dijkstra)", bad_exact == 0 and bad_relaxed == 0,
                f"{len(pairs)} pairs x 5 tables: exact mismatches {bad_exact}, "
                f"relaxed k in {{1,3,7}} mismatches {bad_relaxed}, {time.time() - t0:.1f} s")
    assert ok


# ---------------------------------------------------------------------------
# criterion 3


def test_criterion_3_structural_bounds():
    if not EXACT_MATRICES:
        test_criterion_2_boundary_matrices()
    if AUDIT.exact + AUDIT.capped == 0:
        test_criterion_1_static_oracle_equivalence()
    ok_prod = report("criterion 3a (core of products)", not AUDIT.bad and AUDIT.exact + AUDIT.capped > 0,
                     f"{AUDIT.exact} exact and {AUDIT.capped} capped products from suite 1, "
                     f"violations {len(AUDIT.bad)}")
    bad_bd = 0
    seen = set()
    for m, W in EXACT_MATRICES:
        if (id(m), W) in seen:
            continue
        seen.add((id(m), W))
        P = m.shape[0]
        if monge.bounded_difference(m) > W + 1 or core_size(m) > 2 * (W + 1) * (P - 1) or not monge.is_monge(m):
            bad_bd += 1
    ok_bd = report("criterion 3b (exact BMs bounded-difference)", bad_bd == 0,
                   f"{len(seen)} distinct exact matrices, (W+1)-bounded and delta <= 2(W+1)(P-1); violations {bad_bd}")
    seen = set()
    for m, k in CAPPED_MATRICES:
        if id(m) in seen:
            continue
        seen.add(id(m))
        AUDIT.check_capped_matrix(m, k)
    ok_cap = report("criterion 3c (capped matrices)", not AUDIT.bad,
                    f"{len(seen)} relaxed-structure matrices + {AUDIT.capped} capped products, "
                    f"max delta/(N sqrt k) = {AUDIT.worst_cap:.3f} (bound 8)")
    assert ok_prod and ok_bd and ok_cap


# ---------------------------------------------------------------------------
# criterion 4


def test_criterion_4_self_edit_distance():
    rng = random.Random(404)
    bad = 0
    for _ in range(1000):
        alpha = rng.choice([b"ab", b"abc", b"abcdefgh"])
        n = rng.randint(0, 40)
        x = bytes(rng.choice(alpha) for _ in range(n))
        ref = sed_exhaustive(x)
        k = rng.randint(1, ref + 5)
        got = sed_leq(x, k)
        want = ref if ref <= k else None
        if (got[0] if got else None) != want:
            bad += 1
        elif got and got[1].unit_cost(x, x) != ref:
            bad += 1
    ok1 = report("criterion 4a (sed_leq vs exhaustive DP)", bad == 0, f"{1000 - bad}/1000 strings of length <= 40")

    from oracles import dp_distance

    unit = WeightFunction.unit()
    fails: Dict[str, int] = {"monotone": 0, "subadditive": 0, "triangle": 0, "continuity": 0}
    for _ in range(1000):
        alpha = rng.choice([b"ab", b"abc"])
        x = bytes(rng.choice(alpha) for _ in range(rng.randint(1, 40)))
        l, l2, r2, r = sorted(rng.randint(0, len(x)) for _ in range(4))
        if sed(x[l2:r2]) > sed(x[l:r]):
            fails["monotone"] += 1
        m = rng.randint(0, len(x))
        if sed(x) > sed(x[:m]) + sed(x[m:]):
            fails["subadditive"] += 1
        y = bytearray(x)
        for _ in range(rng.randint(0, 5)):
            p = rng.randrange(len(y) + 1)
            if rng.random() < 0.5 and p < len(y):
                del y[p]
            else:
                y.insert(p, rng.choice(alpha))
        if sed(bytes(y)) > sed(x) + 2 * dp_distance(x, bytes(y), unit):
            fails["triangle"] += 1
        if len(x) > 1:
            i = rng.randint(1, len(x) - 1)
            if not sed(x[:i]) <= sed(x[: i + 1]) <= sed(x[:i]) + 1:
                fails["continuity"] += 1
    ok2 = report("criterion 4b (sed properties)", not any(fails.values()),
                 "1000 triples, violations " + ", ".join(f"{k} {v}" for k, v in fails.items()))
    assert ok1 and ok2


# ---------------------------------------------------------------------------
# criterion 5


def _script(rng: random.Random, x: bytes, y: bytes, alpha: bytes, count: int):
    for _ in range(count):
        side = rng.choice("XY")
        s = x if side == "X" else y
        op = rng.choice(["ins", "del", "sub"]) if s else "ins"
        e = EditEvent(side, op, rng.randrange(len(s) + (op == "ins")), None if op == "del" else rng.choice(alpha))
        if side == "X":
            x = e.apply(x)
        else:
            y = e.apply(y)
        yield e, x, y


def _replay(scripts: int, events: int, cfg, rng, nrng, make) -> Tuple[int, int, int, float, int]:
    bad = drift = total = longest = 0
    t0 = time.time()
    for _ in range(scripts):
        x, y, w, alpha = make(rng, nrng)
        s = DynamicED(x, y, w, config=cfg)
        prev = s.distance
        if banded_distance(x, y, w, prev) != prev:
            bad += 1
        for e, X, Y in _script(rng, x, y, alpha, events):
            d, a = s.apply(e)
            total += 1
            longest = max(longest, len(X), len(Y))
            if banded_distance(X, Y, w, d) != d or path_cost(a, X, Y, w) != d:
                bad += 1
            if abs(d - prev) > w.W:
                drift += 1
            prev = d
    return bad, drift, total, time.time() - t0, longest


def _random_instance(rng, nrng):
    alpha = bytes(range(97, 97 + rng.choice([2, 4, 20])))
    W = rng.randint(1, 4)
    w = WeightFunction.random(list(alpha), W, nrng)
    x, y = seeded_pair(rng, alpha, rng.randint(1, 1500), rng.randint(0, 30))
    return x, y, w, alpha


def _periodic_instance(rng, nrng):
    alpha = b"ab"
    w = WeightFunction.random(list(alpha), rng.randint(1, 2), nrng)
    per = bytes(rng.choice(alpha) for _ in range(rng.randint(1, 3)))
    x = (per * 60)[:120]
    y = bytearray(x)
    for _ in range(rng.randint(8, 20)):
        y[rng.randrange(len(y))] = rng.choice(alpha)
    return x, bytes(y), w, alpha


def test_criterion_5_dynamic_exactness():
    rng = random.Random(505)
    nrng = np.random.default_rng(505)
    bad, drift, total, el, longest = _replay(100, 500, DEFAULT, rng, nrng, _random_instance)
    ok = report("criterion 5 (dynamic, 100 scripts x 500 edits)",
                bad == 0 and drift == 0 and el < 300 and longest <= 2000,
                f"{total - bad}/{total} events exact, drift violations {drift}, "
                f"longest string {longest} (limit 2000), {el:.1f} s (limit 300 s)")
    bad_p, drift_p, total_p, el_p, _ = _replay(4, 40, PURE, rng, nrng, _periodic_instance)
    ok_p = report("criterion 5 (epoch machinery, reduced)", bad_p == 0 and drift_p == 0,
                  f"{total_p - bad_p}/{total_p} events exact with the DP crossover disabled, "
                  f"drift violations {drift_p}, {el_p:.1f} s")
    assert ok and ok_p


# ---------------------------------------------------------------------------
# criterion 6


def _planted(R: random.Random, n: int, k: int) -> Tuple[bytes, bytes]:
    x = bytes(R.choice(b"acgt") for _ in range(n))
    y = bytearray(x)
    for _ in range(k):
        p = R.randrange(len(y))
        op = R.randrange(3)
        if op == 0:
            y[p] = R.choice(b"acgt")
        elif op == 1:
            del y[p]
        else:
            y.insert(p, R.choice(b"acgt"))
    return x, bytes(y)


def _baseline(x: bytes, y: bytes) -> float:
    t = time.perf_counter()
    X, Y = Text(x), Text(y)
    X._hashes()
    Y._hashes()
    a, b = np.frombuffer(x, np.uint8), np.frombuffer(y, np.uint8)
    m = min(len(a), len(b))
    int((a[:m] == b[:m]).sum())
    return time.perf_counter() - t


def _timed(x: bytes, y: bytes, w, reps: int = 5) -> float:
    best = math.inf
    for _ in range(reps):
        t = time.perf_counter()
        solve(Text(x).fragment(), Text(y).fragment(), w)
        best = min(best, time.perf_counter() - t)
    base = min(_baseline(x, y) for _ in range(reps))
    return max(best - base, 1e-6)


def test_criterion_6_scaling():
    R = random.Random(606)
    w = WeightFunction.random(list(b"acgt"), 4, np.random.default_rng(606))
    solve(*_planted(R, 2000, 4), w)  # compile
    ns = [100_000, 200_000, 400_000, 800_000]
    # realized distance varies per planting, so take the median over 5 plantings
    ts = [statistics.median(_timed(*_planted(R, n, 16), w) for _ in range(5)) for n in ns]
    ratios = [b / a for a, b in zip(ts, ts[1:])]
    ok_n = report("criterion 6a (n sweep, k = 16, median of 5 plantings)", all(r < 1.5 for r in ratios),
                  "distance-dependent ms " + ", ".join(f"{t * 1000:.1f}" for t in ts)
                  + "; ratios " + ", ".join(f"{r:.2f}" for r in ratios) + " (limit 1.5)")
    ks = [8, 16, 32, 64]
    tk = [_timed(*_planted(R, 200_000, k), w, reps=3) for k in ks]
    gamma = float(np.polyfit(np.log(ks), np.log(tk), 1)[0])
    ok_k = report("criterion 6b (k sweep, n = 2e5)", gamma <= 3.2,
                  "distance-dependent ms " + ", ".join(f"{t * 1000:.1f}" for t in tk)
                  + f"; fitted gamma {gamma:.2f} (limit 3.2)")
    assert ok_n and ok_k


# ---------------------------------------------------------------------------
# criterion 7


def _balanced(g: Grammar, a: int) -> bool:
    stack, seen = [a], set()
    while stack:
        s = stack.pop()
        if s in seen or g.left[s] == NO_CHILD:
            continue
        seen.add(s)
        ll, lr = g.length[g.left[s]], g.length[g.right[s]]
        if not (1 / 3 <= ll / lr <= 3):
            return False
        stack += [g.left[s], g.right[s]]
    return True


def test_criterion_7_slp_and_persistence():
    rng = random.Random(707)
    g = Grammar()
    pool = [(g.from_string(s), s) for s in (b"abcdef", b"a", b"xyz" * 7, b"ab" * 40)]
    bad = 0
    for it in range(10_000):
        op = rng.random()
        if op < 0.4:
            (a, sa), (b, sb) = rng.choice(pool), rng.choice(pool)
            if len(sa) + len(sb) > 10_000:
                continue
            c, s = g.merge(a, b), sa + sb
        elif op < 0.8:
            a, sa = rng.choice(pool)
            l = rng.randrange(len(sa))
            r = rng.randrange(l + 1, len(sa) + 1)
            c, s = g.substring(a, l, r), sa[l:r]
        else:
            a, sa = rng.choice(pool)
            ell = rng.randint(1, min(10_000, 3 * len(sa) + 5))
            c, s = g.power(a, ell), (sa * (ell // len(sa) + 1))[:ell]
        if g.expand(c) != s or not _balanced(g, c):
            bad += 1
        pool.append((c, s))
    ok1 = report("criterion 7a (SLP ops)", bad == 0, f"{10_000 - bad}/10000 ops balanced and expanding correctly")

    nrng = np.random.default_rng(707)
    w = WeightFunction.random(list(b"abc"), 3, nrng)
    handles = [had_build(b"abcabcabc", b"abcabcab", w), had_build(b"aab", b"abcb", w)]
    snaps = []

    def snapshot(h):
        snaps.append([(nd, nd.matrix.copy()) for nd in _nodes(h.root)])

    for h in handles:
        snapshot(h)
    bad_e = 0
    for it in range(100):
        h = rng.choice(handles)
        side = rng.choice("XY")
        s = h.x() if side == "X" else h.y()
        n = len(s)
        kind = rng.choice(["ins", "del", "sub", "cut", "cep"]) if n > 2 else "ins"
        if kind == "ins":
            e = MegaEdit.insert(rng.randint(0, n), rng.choice(b"abc"))
        elif kind == "del":
            e = MegaEdit.delete(rng.randrange(n))
        elif kind == "sub":
            e = MegaEdit.substitute(rng.randrange(n), rng.choice(b"abc"))
        elif kind == "cut":
            l = rng.randrange(n - 1)
            e = MegaEdit.remove_range(l, rng.randint(l + 1, min(n - 1, l + 3)))
        else:
            l = rng.randrange(n)
            r = rng.randint(l + 1, min(n, l + 3))
            e = MegaEdit.copy_exp_paste(l, r, rng.randint(0, n), rng.randint(1, 3))
        if len(e.apply_to(s)) > 40:
            continue
        h2 = had_megaedit(h, side, e)
        if not np.array_equal(h2.root.matrix, boundary_dijkstra(h2.x(), h2.y(), w)):
            bad_e += 1
        handles.append(h2)
        snapshot(h2)
    perturbed = sum(not np.array_equal(nd.matrix, m) for snap in snaps for nd, m in snap)
    entries = sum(m.size for snap in snaps for _, m in snap)
    ok2 = report("criterion 7b (persistence)", perturbed == 0 and bad_e == 0,
                 f"{len(handles) - 2} mega-edits, {entries} snapshot entries replayed, "
                 f"perturbed matrices {perturbed}, wrong new matrices {bad_e}")
    assert ok1 and ok2


# ---------------------------------------------------------------------------
# criterion 8

SCHEMA = {
    "type": "object",
    "required": ["command", "k"],
    "additionalProperties": False,
    "properties": {
        "command": {"enum": ["dist", "align", "sed", "dynamic", "bench", "selftest"]},
        "k": {},
        "alignment": {"type": "object"},
        "counters": {"type": "object"},
    },
}


def _cli(*args: str) -> subprocess.CompletedProcess:
    return subprocess.run([sys.executable, "-m", "wedit.cli", *args], capture_output=True, cwd=DATA)


def test_criterion_8_cli():
    cases = [
        (["dist", "--unit", "kitten", "sitting"], b"3\n", 3),
        (["dist", "ab", "c", "--weights", "footnote.w"], b"2\n", 2),
        (["sed", "a", "--k", "4"], b"2\n", 2),
    ]
    fails = []
    for argv, want, k in cases:
        p = _cli(*argv)
        if p.returncode != 0 or p.stdout != want:
            fails.append(f"{' '.join(argv)} -> {p.stdout!r} (exit {p.returncode})")
        j = _cli(*argv, "--json")
        try:
            rep = json.loads(j.stdout)
            jsonschema.validate(rep, SCHEMA)
            if rep["k"] != k or rep["command"] != argv[0]:
                fails.append(f"{' '.join(argv)} --json -> {rep}")
        except (ValueError, jsonschema.ValidationError) as exc:
            fails.append(f"{' '.join(argv)} --json: {exc}")
    ok = report("criterion 8 (CLI examples)", not fails,
                "3 examples byte-exact and schema-valid" if not fails else "; ".join(fails))
    assert ok


if __name__ == "__main__":
    failed = 0
    for name, fn in list(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    print("\n".join(RESULTS))
    sys.exit(1 if failed else 0)
