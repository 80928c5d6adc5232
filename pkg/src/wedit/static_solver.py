"""Static weighted edit distance.

Three layers: ``small_sed_solve`` handles a pair whose first string has a
small self-edit distance by decomposing it into repeating phrases and
multiplying boundary matrices; ``improve_alignment`` turns any alignment
into an optimal one by divide and conquer around a small-sed middle part;
``solve`` seeds with an unweighted alignment and refines it while the
weights are halved back to their original values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from . import monge
from .align_graph import (
    Alignment,
    WeightFunction,
    banded_dp,
    concat,
    edit_distance,
    first_intersection,
)
from .counters import bump
from .hierarchical import Had, HadContext, MegaEdit, had_alignment, had_build, had_megaedit
from .pillar import Fragment, as_fragment
from .sed import (
    Decomposition,
    PreconditionError,
    decompose,
    lv_ed,
    sed_leq,
    sed_prefix_bound,
    sed_suffix_bound,
)

Point = Tuple[int, int]
MatrixHook = Callable[[np.ndarray, np.ndarray, np.ndarray, str, int], None]


@dataclass
class SolverConfig:
    """Engineering knobs; the defaults favour speed at desk scale.

    Attributes:
        dp_crossover: cell budget under which small_sed_solve runs the
            banded DP instead of the phrase pipeline (0 disables it).
        relaxed: force relaxed (True) or exact (False) boundary matrices;
            None picks relaxed iff sqrt(k) * log2(P) < W.
        check: run the precondition checks and matrix invariants.
        product_hook: called as hook(A, B, C, mode, k) after every product.
    """

    dp_crossover: int = 1 << 22
    relaxed: Optional[bool] = None
    check: bool = False
    product_hook: Optional[MatrixHook] = None


DEFAULT = SolverConfig()
PURE = SolverConfig(dp_crossover=0)


def _dp_cheaper(cfg: SolverConfig, n: int, k: int) -> bool:
    """Whether one banded DP beats recursing; it must not scale with n alone."""
    return bool(cfg.dp_crossover) and (n + 1) * (2 * k + 1) <= cfg.dp_crossover and n <= 64 * (k + 4)


def choose_mode(k: int, p: int, W: int) -> str:
    return "relaxed" if math.sqrt(k) * math.log2(max(p, 2)) < W else "exact"


# ---------------------------------------------------------------------------
# mega-edits from self-alignments


def _transpose(a: Alignment) -> Alignment:
    return Alignment([(y, x) for x, y in a.points])


def _source_events(a: Alignment, s: Fragment, lo: int, hi: int) -> List[Tuple[int, ...]]:
    """Classify the source characters s[lo..hi) under a self-alignment a.

    Yields ("ins", x) for deleted or substituted characters and
    ("copy", x, d, length) for runs s[x..x+length) matched to s[x-d..).
    """
    out: List[Tuple[int, ...]] = []
    for (x0, y0), (x1, y1) in a.segments():
        if x1 <= lo:
            continue
        if x0 >= hi:
            break
        dx, dy = x1 - x0, y1 - y0
        if dx > dy:
            if lo <= x0 < hi:
                out.append(("ins", x0))
            x0 += 1
        elif dy > dx:
            y0 += 1
        elif dx and s.access(x0) != s.access(y0):
            if lo <= x0 < hi:
                out.append(("ins", x0))
            x0 += 1
            y0 += 1
        a0, b0 = max(x0, lo), min(x1, hi)
        if a0 < b0:
            out.append(("copy", a0, x0 - y0, b0 - a0))
    return out


def _phrase_edits(a: Alignment, s: Fragment, base: int, cur: int, end: int, cut: int) -> Optional[List[MegaEdit]]:
    """Mega-edits turning s[base..cur) into s[base+cut..end).

    Returns None when a copy source would start before ``base``.
    """
    edits: List[MegaEdit] = []
    for ev in _source_events(a, s, cur, end):
        if ev[0] == "ins":
            edits.append(MegaEdit.insert(cur - base, s.access(ev[1])))
            cur += 1
            continue
        _, x, d, ln = ev
        assert x == cur and d > 0
        if x - d < base:
            return None
        edits.append(MegaEdit.copy_exp_paste(x - d - base, x - base, cur - base, ln))
        cur += ln
    assert cur == end, (cur, end)
    if cut:
        edits.append(MegaEdit.remove_range(0, cut))
    return edits


def _build_hads(dec: Decomposition, ax: Alignment, by: Alignment, ctx: HadContext) -> Dict[int, Had]:
    """One structure per marked phrase, each derived from its predecessor."""
    X, Y = dec.X, dec.Y
    xs, ys, yps = dec.xs, dec.ys, dec.yps
    hads: Dict[int, Had] = {}
    prev: Optional[Had] = None
    for i in dec.F:
        xi, yi = dec.x_phrase(i), dec.y_phrase(i)
        if i == 0 or prev is None:
            hads[i] = had_build(xi, yi, ctx.w, ctx=ctx)
            prev = hads[i]
            continue
        ex = _phrase_edits(ax, X, xs[i - 1], xs[i], xs[i + 1], xs[i] - xs[i - 1])
        ey = _phrase_edits(by, Y, ys[i - 1], yps[i], yps[i + 1], ys[i] - ys[i - 1])
        if ex is None or ey is None:
            bump("static.had_rebuilds")
            hads[i] = had_build(xi, yi, ctx.w, ctx=ctx)
            prev = hads[i]
            continue
        h = prev
        for e in ex:
            h = had_megaedit(h, "X", e)
        for e in ey:
            h = had_megaedit(h, "Y", e)
        bump("static.megaedits", len(ex) + len(ey))
        if ctx.check:
            assert h.x() == xi.to_bytes() and h.y() == yi.to_bytes()
        hads[i] = h
        prev = h
    return hads


# ---------------------------------------------------------------------------
# separator matrices and their products


class _Prod:
    """D matrix spanning ``span`` consecutive phrases; leaves name a
    representative phrase whose structure answers path queries."""

    __slots__ = ("mat", "left", "right", "span", "rep")

    def __init__(self, mat: np.ndarray, left=None, right=None, span: int = 1, rep: int = -1):
        self.mat = mat
        self.left = left
        self.right = right
        self.span = span
        self.rep = rep


def _separator(dec: Decomposition, h: Had, i: int) -> np.ndarray:
    """D_{i,i+1}: rows V_i and columns V_{i+1}, both by decreasing y."""
    return separator_of(h, dec.yps[i] - dec.ys[i], dec.ys[i + 1] - dec.ys[i])


def separator_of(h: Had, hi_in: int, lo_out: int) -> np.ndarray:
    """Rows: left-edge vertices with y in [0..hi_in]; columns: right-edge
    vertices with y in [lo_out..b]; both by decreasing y."""
    a, b = h.root.a, h.root.b
    m = h.root.matrix
    return np.ascontiguousarray(m[b - hi_in : b + 1, a : a + b - lo_out + 1])


class _Multiplier:
    def __init__(self, mode: str, k: int, hook: Optional[MatrixHook]):
        self.mode = mode
        self.k = k
        self.hook = hook

    def __call__(self, a: _Prod, b: _Prod) -> _Prod:
        c, _ = monge.minplus_dense(a.mat, b.mat)
        if self.mode == "relaxed":
            c = monge.cap_dense(c, self.k)
        if self.hook is not None:
            self.hook(a.mat, b.mat, c, self.mode, self.k)
        bump("static.products")
        return _Prod(c, a, b, a.span + b.span)


def _power(leaf: _Prod, r: int, mul: _Multiplier) -> _Prod:
    result: Optional[_Prod] = None
    base = leaf
    while True:
        if r & 1:
            result = base if result is None else mul(result, base)
        r >>= 1
        if not r:
            break
        base = mul(base, base)
    assert result is not None
    return result


def _tree(parts: List[_Prod], mul: _Multiplier) -> _Prod:
    if len(parts) == 1:
        return parts[0]
    mid = len(parts) // 2
    return mul(_tree(parts[:mid], mul), _tree(parts[mid:], mul))


def _backtrack(node: _Prod, r: int, c: int, p: int, xs: List[int], ys: List[int], yps: List[int],
               had_of: Callable[[_Prod], Had], out: List[Alignment]) -> None:
    """Shortest path for entry (r, c) of a product spanning leaves [p..p+span)."""
    q = p + node.span
    v = int(node.mat[r, c])
    y_from, y_to = yps[p] - r, yps[q] - c
    if v == 0:
        assert xs[q] - xs[p] == y_to - y_from
        out.append(Alignment([(xs[p], y_from), (xs[q], y_to)]))
        return
    if node.left is None:
        h = had_of(node)
        al = had_alignment(h, (0, y_from - ys[p]), (xs[q] - xs[p], y_to - ys[p]))
        assert isinstance(al, Alignment)
        out.append(al.shift(xs[p], ys[p]))
        return
    L, R = node.left, node.right
    mid = p + L.span
    # inner vertices (x_mid, y) with y_from <= y <= y_to, leftmost witness first
    t_lo = max(0, yps[mid] - y_to)
    t_hi = min(L.mat.shape[1] - 1, yps[mid] - y_from)
    row = L.mat[r, t_lo : t_hi + 1].astype(np.int64) + R.mat[t_lo : t_hi + 1, c]
    hits = np.flatnonzero(row == v)
    if hits.size == 0:
        raise AssertionError("no witness for a product entry")
    t = t_lo + int(hits[0])
    _backtrack(L, r, t, p, xs, ys, yps, had_of, out)
    _backtrack(R, t, c, mid, xs, ys, yps, had_of, out)


def _pipeline_cells(dec: Decomposition) -> int:
    """Rough cell count of the dense structures the pipeline would build."""
    tot = 0
    for i in dec.F:
        side = len(dec.x_phrase(i)) + len(dec.y_phrase(i)) + 1
        tot += side * side
    return tot


def small_sed_solve(x, y, w: WeightFunction, k: int, mode: Optional[str] = None,
                    config: Optional[SolverConfig] = None) -> Alignment:
    """w-optimal alignment under sed(X) <= k and ed^w(X, Y) <= k."""
    cfg = config or DEFAULT
    X, Y = as_fragment(x), as_fragment(y)
    n = len(X)
    k = max(int(k), 1)
    small = cfg.dp_crossover and (n + 1) * (2 * k + 1) <= cfg.dp_crossover
    if n < k or len(Y) == 0 or small:
        bump("static.small_dp")
        res = banded_dp(X, Y, w, k)
        if res is None:
            raise PreconditionError("small_sed_solve needs ed^w(X, Y) <= k")
        return res[1]
    dec = decompose(X, Y, k, "static", check=False)
    if cfg.dp_crossover and _pipeline_cells(dec) > (n + 1) * (2 * k + 1):
        # incompressible input: every phrase is marked and dense DP is cheaper
        bump("static.small_dp_costmodel")
        res = banded_dp(X, Y, w, k)
        if res is None:
            raise PreconditionError("small_sed_solve needs ed^w(X, Y) <= k")
        return res[1]
    bump("static.small_pipeline")
    if mode is None:
        if cfg.relaxed is None:
            mode = choose_mode(k, n + len(Y) + 1, w.W)
        else:
            mode = "relaxed" if cfg.relaxed else "exact"
    sa = sed_leq(X, k)
    if sa is None:
        raise PreconditionError("small_sed_solve needs sed(X) <= k")
    sb = sed_leq(Y, 3 * k)
    if sb is None:
        raise PreconditionError("sed(Y) > 3k, so ed(X, Y) exceeds k")
    ctx = HadContext(w, mode=mode, k=k, check=cfg.check)
    hads = _build_hads(dec, _transpose(sa[1]), _transpose(sb[1]), ctx)
    mul = _Multiplier(mode, k, cfg.product_hook)
    parts: List[_Prod] = []
    F = dec.F + [dec.m]
    for t in range(len(F) - 1):
        j = F[t]
        leaf = _Prod(_separator(dec, hads[j], j), rep=j)
        parts.append(_power(leaf, F[t + 1] - j, mul))
    root = _tree(parts, mul)
    assert root.mat.shape == (1, 1)
    d = int(root.mat[0, 0])
    if d > k:
        raise PreconditionError("small_sed_solve needs ed^w(X, Y) <= k")
    segs: List[Alignment] = []
    _backtrack(root, 0, 0, 0, dec.xs, dec.ys, dec.yps, lambda nd: hads[nd.rep], segs)
    al = concat(*segs).canonical(X, Y)
    if cfg.check:
        assert al.cost(X, Y, w) == d
    return al


# ---------------------------------------------------------------------------
# divide and conquer


def _step_costs(a: Alignment, X: Fragment, Y: Fragment, w: WeightFunction) -> List[Tuple[int, Point, Point]]:
    """(cost, start, end) of the first step of every segment.

    Alignments inside the solver keep every non-match step at a listed
    point, so these steps carry the whole cost.
    """
    out = []
    for (x0, y0), (x1, y1) in a.segments():
        dx, dy = x1 - x0, y1 - y0
        if dx > dy:
            out.append((w.dele(X.access(x0)), (x0, y0), (x0 + 1, y0)))
        elif dy > dx:
            out.append((w.ins(Y.access(y0)), (x0, y0), (x0, y0 + 1)))
        else:
            out.append((w.sub(X.access(x0), Y.access(y0)), (x0, y0), (x0 + 1, y0 + 1)))
    return out


def _split_half(steps, k: int) -> Tuple[Point, Point]:
    """The last point with prefix cost <= k/2 and the point after it."""
    cum = 0
    for c, p, q in steps:
        if 2 * (cum + c) > k:
            return p, q
        cum += c
    raise AssertionError("alignment cost below the split threshold")


def improve_alignment(x, y, w: WeightFunction, a: Alignment, config: Optional[SolverConfig] = None) -> Alignment:
    """A w-optimal alignment of X onto Y, refined from the alignment a."""
    X, Y = as_fragment(x), as_fragment(y)
    if a.start != (0, 0) or a.end != (len(X), len(Y)):
        raise ValueError("alignment does not span both strings")
    return _improve(X, Y, w, a.canonical(X, Y), config or DEFAULT)


def _improve(X: Fragment, Y: Fragment, w: WeightFunction, a: Alignment, cfg: SolverConfig) -> Alignment:
    bump("improve.calls")
    steps = _step_costs(a, X, Y, w)
    k = sum(c for c, _, _ in steps)
    if cfg.check:
        assert k == a.cost(X, Y, w)
    if k == 0:
        return a
    n = len(X)
    if k > n or _dp_cheaper(cfg, n, k):
        bump("improve.dp")
        res = banded_dp(X, Y, w, k)
        assert res is not None
        return res[1]
    (xm, ym), (xm1, ym1) = _split_half(steps, k)
    xl = sed_suffix_bound(X.extract(0, xm), 5 * k)
    yl = a.min_y_at(xl)
    xr = xm1 + sed_prefix_bound(X.extract(xm1, n), 5 * k)
    yr = a.max_y_at(xr)
    bl = _improve(X.extract(0, xm), Y.extract(0, ym), w, a.prefix_to((xm, ym)), cfg)
    ar = a.suffix_from((xm1, ym1)).shift(-xm1, -ym1)
    br = _improve(X.extract(xm1, n), Y.extract(ym1, len(Y)), w, ar, cfg).shift(xm1, ym1)
    bm = small_sed_solve(X.extract(xl, xr), Y.extract(yl, yr), w, 10 * k + 2, config=cfg).shift(xl, yl)
    pl = first_intersection(bl, bm)
    pr = first_intersection(bm, br)
    if pl is None or pr is None or pl[0] > pr[0] or pl[1] > pr[1]:
        # the intersection guarantee failed; never expected, counted and repaired
        bump("improve.fallbacks")
        res = banded_dp(X, Y, w, k)
        assert res is not None
        return res[1]
    return concat(bl.prefix_to(pl), bm.sub_alignment(pl, pr), br.suffix_from(pr))


# ---------------------------------------------------------------------------
# top level


def approx_weights(w: WeightFunction, eps: float) -> WeightFunction:
    """Coarsened weights w(a, b) <- max(1, floor(w(a, b) / eps)) for a != b."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    return w.scaled(lambda v: max(1, int(math.floor(v / eps))))


def solve(x, y, w: WeightFunction, config: Optional[SolverConfig] = None) -> Tuple[int, Alignment]:
    """Weighted edit distance and an optimal alignment.

    Args:
        x, y: strings or fragments.
        w: normalized integer weight function.
        config: solver knobs (crossover, exact/relaxed choice, checks).

    Returns:
        (distance, alignment in breakpoint representation)
    """
    cfg = config or DEFAULT
    X, Y = as_fragment(x), as_fragment(y)
    n = max(len(X), len(Y), 1)
    wc = w if w.W <= n else w.scaled(lambda v: min(v, n))
    _, a = lv_ed(X, Y)
    if cfg.dp_crossover:
        k0 = int(a.cost(X, Y, w))
        if _dp_cheaper(cfg, len(X), k0):
            bump("solve.dp")
            res = banded_dp(X, Y, w, k0)
            assert res is not None
            return res
    top = max((c for c, _, _ in _step_costs(a, X, Y, wc)), default=0)
    t1 = math.ceil(math.log2(top)) if top > 1 else 0
    for t in range(t1 - 1, -1, -1):
        wt = wc.scaled(lambda v, t=t: -(-v >> t))
        a = _improve(X, Y, wt, a, cfg)
        bump("solve.levels")
    if a.cost(X, Y, wc) >= n:
        bump("solve.baseline_finish")
        _, a = edit_distance(X, Y, w)
    return a.cost(X, Y, w), a
