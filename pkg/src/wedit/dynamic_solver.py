"""Maintaining the weighted edit distance under single-character edits.

Layers, bottom up:

* ``compose_alignments`` tracks how a string drifts away from a snapshot.
* ``DynSedSession`` keeps, for a first string of small self-edit distance,
  a product tree of boundary matrices over a phrase decomposition; an edit
  touches one phrase structure on the X side (a few on the Y side) and the
  tree path above it.
* ``GlueSession`` splices optimal alignments of a left and a right part
  through a middle alignment that a ``DynSedSession`` keeps current.
* ``DynamicED`` runs epochs.  Each epoch is served by a budgeted instance
  that splits the strings at the half-cost point of an optimal alignment,
  maintains both halves recursively and glues them after every edit.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .align_graph import Alignment, WeightFunction, banded_dp, concat, first_intersection
from .counters import bump
from .hierarchical import DistanceExceedsK, HadContext, MegaEdit, had_alignment, had_build, had_megaedit
from .pillar import Text
from .sed import PreconditionError, decompose, sed_leq, sed_prefix_bound, sed_suffix_bound
from .static_solver import (
    DEFAULT,
    SolverConfig,
    _build_hads,
    _backtrack,
    _dp_cheaper,
    _Multiplier,
    _Prod,
    _split_half,
    _step_costs,
    _transpose,
    separator_of,
    solve,
)

Point = Tuple[int, int]

EPS = 1 / 8
FLANK_SED = 11
INNER_THRESHOLD = 23


class BudgetExceeded(RuntimeError):
    """A budgeted session received more edits than its lifetime allows."""


# ---------------------------------------------------------------------------
# edits


@dataclass(frozen=True)
class EditEvent:
    """insert, delete or substitute one character of X or Y (0-based)."""

    side: str
    op: str
    pos: int
    char: Optional[int] = None

    def __post_init__(self) -> None:
        if self.side not in ("X", "Y"):
            raise ValueError(f"side must be X or Y, not {self.side!r}")
        if self.op not in ("ins", "del", "sub"):
            raise ValueError(f"unknown edit {self.op!r}")
        if self.op != "del" and self.char is None:
            raise ValueError(f"{self.op} needs a character")
        if self.pos < 0:
            raise ValueError("negative position")

    def at(self, pos: int) -> "EditEvent":
        return replace(self, pos=pos)

    def check(self, n: int) -> None:
        hi = n if self.op == "ins" else n - 1
        if self.pos > hi:
            raise IndexError(f"{self.op} at {self.pos} on a string of length {n}")

    def apply(self, s: bytes) -> bytes:
        self.check(len(s))
        p = self.pos
        if self.op == "ins":
            return s[:p] + bytes([self.char]) + s[p:]
        if self.op == "del":
            return s[:p] + s[p + 1 :]
        return s[:p] + bytes([self.char]) + s[p + 1 :]

    def megaedit(self, pos: int) -> MegaEdit:
        if self.op == "ins":
            return MegaEdit.insert(pos, self.char)
        if self.op == "del":
            return MegaEdit.delete(pos)
        return MegaEdit.substitute(pos, self.char)

    def alignment(self, n: int) -> Alignment:
        """The cost-1 alignment of the old string (length n) onto the new one."""
        p = self.pos
        if self.op == "ins":
            pts = [(0, 0), (p, p), (n, n + 1)]
        elif self.op == "del":
            pts = [(0, 0), (p, p), (n, n - 1)]
        else:
            pts = [(0, 0), (p, p), (n, n)]
        out: List[Point] = []
        for q in pts:
            if not out or out[-1] != q:
                out.append(q)
        return Alignment(out)

    def __str__(self) -> str:
        tail = "" if self.char is None else " " + chr(self.char)
        return f"{self.side} {self.op} {self.pos}{tail}"


def parse_script(text: str) -> List[EditEvent]:
    """One event per line: ``X|Y ins|del|sub pos [char]``; '#' starts a comment."""
    out: List[EditEvent] = []
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if len(parts) not in (3, 4):
                raise ValueError("expected 3 or 4 fields")
            side, op, pos = parts[0].upper(), parts[1].lower(), int(parts[2])
            ch = None
            if len(parts) == 4:
                tok = parts[3].encode("latin-1")
                if len(tok) != 1:
                    raise ValueError("the character field must be a single byte")
                ch = tok[0]
            if op == "del" and ch is not None:
                raise ValueError("del takes no character")
            out.append(EditEvent(side, op, pos, ch))
        except ValueError as exc:
            raise ValueError(f"edit script line {ln}: {exc}") from None
    return out


def _shift(v: int, e: EditEvent) -> int:
    """New position of a fragment boundary v after e (boundaries at the
    edit position stay, so an insertion there joins the fragment starting at v)."""
    if v > e.pos:
        if e.op == "ins":
            return v + 1
        if e.op == "del":
            return v - 1
    return v


# ---------------------------------------------------------------------------
# composition


def _runs(a: Alignment) -> List[Tuple[str, int]]:
    """Step runs: H (delete), V (insert), D (diagonal)."""
    out: List[Tuple[str, int]] = []

    def put(op: str, t: int) -> None:
        if t <= 0:
            return
        if out and out[-1][0] == op:
            out[-1] = (op, out[-1][1] + t)
        else:
            out.append((op, t))

    for (x0, y0), (x1, y1) in a.segments():
        dx, dy = x1 - x0, y1 - y0
        if dx > dy:
            put("H", 1)
            dx -= 1
        elif dy > dx:
            put("V", 1)
        put("D", dx)
    return out


def compose_alignments(a: Alignment, b: Alignment) -> Alignment:
    """The composition b o a of a: X -> Y and b: Y -> Z.

    Both inputs are walked once as run-length step lists, so the work is
    linear in the number of breakpoints.
    """
    if a.start[1] != b.start[0] or a.end[1] != b.end[0]:
        raise ValueError("the middle strings of the two alignments differ")
    ra, rb = _runs(a), _runs(b)
    x, z = a.start[0], b.start[1]
    pts: List[Point] = [(x, z)]
    i = j = 0
    na = ra[0][1] if ra else 0
    nb = rb[0][1] if rb else 0
    while i < len(ra) or j < len(rb):
        oa = ra[i][0] if i < len(ra) else None
        ob = rb[j][0] if j < len(rb) else None
        if oa == "H":
            for _ in range(na):
                if pts[-1] != (x, z):
                    pts.append((x, z))
                x += 1
            i += 1
            na = ra[i][1] if i < len(ra) else 0
            continue
        if ob == "V":
            for _ in range(nb):
                if pts[-1] != (x, z):
                    pts.append((x, z))
                z += 1
            j += 1
            nb = rb[j][1] if j < len(rb) else 0
            continue
        if oa is None or ob is None:
            raise ValueError("the middle strings of the two alignments differ")
        t = min(na, nb)
        if oa == "D" and ob == "D":
            x += t
            z += t
        elif oa == "D":
            for _ in range(t):
                if pts[-1] != (x, z):
                    pts.append((x, z))
                x += 1
        elif ob == "D":
            for _ in range(t):
                if pts[-1] != (x, z):
                    pts.append((x, z))
                z += 1
        na -= t
        nb -= t
        if na == 0:
            i += 1
            na = ra[i][1] if i < len(ra) else 0
        if nb == 0:
            j += 1
            nb = rb[j][1] if j < len(rb) else 0
    if pts[-1] != (x, z):
        pts.append((x, z))
    return Alignment(pts)


class UpdateLog:
    """Alignments B: X^ -> X and C: Y^ -> Y accumulated since a snapshot."""

    def __init__(self, nx: int, ny: int):
        self.B = Alignment.identity(nx)
        self.C = Alignment.identity(ny)
        self.events = 0

    def apply(self, e: EditEvent) -> None:
        if e.side == "X":
            self.B = compose_alignments(self.B, e.alignment(self.B.end[1]))
        else:
            self.C = compose_alignments(self.C, e.alignment(self.C.end[1]))
        self.events += 1


# ---------------------------------------------------------------------------
# helpers


def _as_bytes(s) -> bytes:
    if isinstance(s, str):
        return s.encode("latin-1")
    if isinstance(s, (bytes, bytearray)):
        return bytes(s)
    if hasattr(s, "to_bytes"):
        return s.to_bytes()
    return bytes(np.asarray(s, dtype=np.uint8))


def recost(a: Alignment, x: bytes, y: bytes, w: WeightFunction) -> int:
    """Sum of edge weights along a, diagonal runs priced character by character."""
    xi, yi, tab = w.encode(np.frombuffer(x, np.uint8).astype(np.int64),
                           np.frombuffer(y, np.uint8).astype(np.int64))
    eps = tab.shape[0] - 1
    total = 0
    for (x0, y0), (x1, y1) in a.segments():
        dx, dy = x1 - x0, y1 - y0
        if dx > dy:
            total += int(tab[xi[x0], eps])
            x0 += 1
        elif dy > dx:
            total += int(tab[eps, yi[y0]])
            y0 += 1
        if x1 > x0:
            total += int(tab[xi[x0:x1], yi[y0:y1]].sum())
    return total


def _dp(x: bytes, y: bytes, w: WeightFunction, band: int) -> Optional[Tuple[int, Alignment]]:
    return banded_dp(x, y, w, band)


# ---------------------------------------------------------------------------
# dynamic small-sed session


class DynSedSession:
    """Exact distance and alignment for (X, Y) under at most floor(k/W) edits,
    given sed(X) <= k and ed^w(X, Y) <= k at initialization.

    Three realizations: a per-edit banded DP when that is cheaper (or a
    string is empty), one hierarchical structure over the whole pair when
    |X| <= 3k or |Y| <= 3k, and otherwise the phrase product tree.
    """

    def __init__(self, x, y, w: WeightFunction, k: int, config: Optional[SolverConfig] = None):
        cfg = config or DEFAULT
        self.cfg = cfg
        self.w = w
        self.k = max(int(k), 1)
        self.W = max(w.W, 1)
        self.budget = self.k // self.W
        self.X, self.Y = _as_bytes(x), _as_bytes(y)
        self.log = UpdateLog(len(self.X), len(self.Y))
        self._cache: Optional[Tuple[int, Alignment]] = None
        n = len(self.X)
        if not self.X or not self.Y or _dp_cheaper(cfg, n, 2 * self.k):
            self.route = "dp"
        elif n <= 3 * self.k or len(self.Y) <= 3 * self.k:
            self.route = "had"
            self.h = had_build(self.X, self.Y, w, ctx=HadContext(w, mode="exact", check=cfg.check))
        else:
            self.route = "tree"
            self._init_tree()
        bump(f"dyn_sed.{self.route}")
        if cfg.check and self.current()[0] > self.k:
            raise PreconditionError("dyn_sed_session needs ed^w(X, Y) <= k")

    # -- product tree

    def _init_tree(self) -> None:
        X, Y = Text(self.X).fragment(), Text(self.Y).fragment()
        k = self.k
        dec = decompose(X, Y, k, "dynamic", check=self.cfg.check)
        sa = sed_leq(X, k)
        if sa is None:
            raise PreconditionError("dyn_sed_session needs sed(X) <= k")
        sb = sed_leq(Y, 3 * k)
        if sb is None:
            raise PreconditionError("sed(Y) > 3k, so ed(X, Y) exceeds k")
        ctx = HadContext(self.w, mode="exact", check=self.cfg.check)
        hads = _build_hads(dec, _transpose(sa[1]), _transpose(sb[1]), ctx)
        self.m = m = dec.m
        self.xs, self.ys, self.yps = list(dec.xs), list(dec.ys), list(dec.yps)
        ny = len(self.Y)
        self.yend = [i > 0 and v == ny for i, v in enumerate(self.yps)]
        self.mul = _Multiplier("exact", k, self.cfg.product_hook)
        F = sorted(dec.F)
        self.F = F
        leaves: List[_Prod] = []
        for i in range(m):
            leaves.append(self._leaf(hads[i], i) if i in hads else leaves[i - 1])
        levels = [leaves]
        j = 0
        while len(levels[-1]) > 1:
            prev = levels[-1]
            j += 1
            size = 1 << j
            cur: List[_Prod] = []
            for t in range((len(prev) + 1) // 2):
                lo = t * size
                # a node is primary iff some marked phrase lies in (lo - size, lo + size)
                u = bisect_right(F, lo - size)
                primary = u < len(F) and F[u] < lo + size
                if t > 0 and not primary:
                    cur.append(cur[-1])
                elif 2 * t + 1 < len(prev):
                    cur.append(self._mul(prev[2 * t], prev[2 * t + 1]))
                else:
                    cur.append(prev[2 * t])
            levels.append(cur)
        self.levels = levels

    def _mul(self, a: _Prod, b: _Prod) -> _Prod:
        bump("dyn.tree_nodes")
        return self.mul(a, b)

    def _leaf(self, h, i: int) -> _Prod:
        if self.cfg.check:
            assert h.x() == self.X[self.xs[i] : self.xs[i + 1]]
            assert h.y() == self.Y[self.ys[i] : self.yps[i + 1]]
        bump("dyn.leaves")
        sep = separator_of(h, self.yps[i] - self.ys[i], self.ys[i + 1] - self.ys[i])
        return _Prod(sep, rep=h)

    @property
    def root(self) -> _Prod:
        return self.levels[-1][0]

    def distinct_nodes(self) -> int:
        seen = set()
        for lev in self.levels[1:]:
            for nd in lev:
                seen.add(id(nd))
        return len(seen)

    def _tree_apply(self, e: EditEvent) -> None:
        xs, ys, yps, m = self.xs, self.ys, self.yps, self.m
        p = e.pos
        touched: Dict[int, int] = {}
        if e.side == "X":
            i = min(bisect_right(xs, p) - 1, m - 1)
            touched[i] = p - xs[i]
            for t in range(1, m):
                xs[t] = _shift(xs[t], e)
            xs[m] = len(self.X)
        else:
            for i in range(m):
                inside = ys[i] <= p < yps[i + 1] or (e.op == "ins" and self.yend[i + 1] and p == yps[i + 1])
                if inside:
                    touched[i] = p - ys[i]
            for t in range(1, m):
                ys[t] = _shift(ys[t], e)
            ys[m] = len(self.Y)
            for t in range(1, m + 1):
                yps[t] = len(self.Y) if self.yend[t] else _shift(yps[t], e)
        leaves = self.levels[0] = list(self.levels[0])
        for i, q in touched.items():
            h = had_megaedit(leaves[i].rep, e.side, e.megaedit(q))
            leaves[i] = self._leaf(h, i)
        dirty = set(touched)
        for j in range(1, len(self.levels)):
            below = self.levels[j - 1]
            lev = self.levels[j] = list(self.levels[j])
            dirty = {t // 2 for t in dirty}
            for t in dirty:
                if 2 * t + 1 < len(below):
                    lev[t] = self._mul(below[2 * t], below[2 * t + 1])
                else:
                    lev[t] = below[2 * t]
        bump("dyn_sed.leaf_updates", len(touched))

    def _tree_current(self) -> Tuple[int, Alignment]:
        root = self.root
        assert root.mat.shape == (1, 1)
        d = int(root.mat[0, 0])
        segs: List[Alignment] = []
        _backtrack(root, 0, 0, 0, self.xs, self.ys, self.yps, lambda nd: nd.rep, segs)
        return d, concat(*segs)

    # -- session interface

    def apply(self, e: EditEvent) -> None:
        if self.log.events >= self.budget:
            raise BudgetExceeded(f"dyn_sed_session lifetime of {self.budget} edits is over")
        s = self.X if e.side == "X" else self.Y
        new = e.apply(s)
        if self.route == "had" and not new:
            self.route = "dp"
        if e.side == "X":
            self.X = new
        else:
            self.Y = new
        self.log.apply(e)
        self._cache = None
        if self.route == "had":
            self.h = had_megaedit(self.h, e.side, e.megaedit(e.pos))
        elif self.route == "tree":
            self._tree_apply(e)

    def current(self) -> Tuple[int, Alignment]:
        if self._cache is None:
            if self.route == "dp":
                res = _dp(self.X, self.Y, self.w, self.k + self.W * self.log.events)
                if res is None:
                    raise PreconditionError("distance exceeds the session threshold")
                self._cache = res
            elif self.route == "had":
                a, b = self.h.root.a, self.h.root.b
                d = self.h.root.dist((0, 0), (a, b))
                al = had_alignment(self.h, (0, 0), (a, b))
                assert isinstance(al, Alignment)
                self._cache = (d, al)
            else:
                self._cache = self._tree_current()
        return self._cache


def dyn_sed_session(x, y, w: WeightFunction, k: int, config: Optional[SolverConfig] = None) -> DynSedSession:
    return DynSedSession(x, y, w, k, config)


# ---------------------------------------------------------------------------
# glue


def _part(op: str, pos: int, left: int, mid: int) -> Tuple[str, int]:
    """Which of L, M, R an edit at pos falls into, and its local position.
    Insertions at a border join the part on the left."""
    if op == "ins":
        if pos <= left:
            return "L", pos
        if pos <= left + mid:
            return "M", pos - left
        return "R", pos - left - mid
    if pos < left:
        return "L", pos
    if pos < left + mid:
        return "M", pos - left
    return "R", pos - left - mid


class GlueSession:
    """Combines optimal alignments of (X_L, Y_L) and (X_R, Y_R) into one of
    X = X_L X_M X_R onto Y = Y_L Y_M Y_R.

    The middle alignment covers the longest suffix of X_L and the longest
    prefix of X_R with sed <= 11k (and their images in Y), and is kept
    current by a DynSedSession with threshold 23k.  Edits are given in the
    coordinates of the concatenations.
    """

    def __init__(self, xl, xm, xr, yl, ym, yr, w: WeightFunction, k: int,
                 config: Optional[SolverConfig] = None, al: Optional[Alignment] = None,
                 ar: Optional[Alignment] = None):
        cfg = config or DEFAULT
        self.cfg = cfg
        self.w = w
        self.k = max(int(k), 1)
        self.budget = self.k // max(w.W, 1)
        self.events = 0
        XL, XM, XR = _as_bytes(xl), _as_bytes(xm), _as_bytes(xr)
        YL, YM, YR = _as_bytes(yl), _as_bytes(ym), _as_bytes(yr)
        if len(XM) > self.k:
            raise PreconditionError("glue_session needs |X_M| <= k")
        if al is None:
            al = solve(XL, YL, w, cfg)[1]
        if ar is None:
            ar = solve(XR, YR, w, cfg)[1]
        self.lx, self.mx, self.rx = len(XL), len(XM), len(XR)
        self.ly, self.my, self.ry = len(YL), len(YM), len(YR)
        bound = FLANK_SED * self.k
        self.fx = sed_suffix_bound(Text(XL).fragment(), bound) if XL else 0
        self.fy = al.min_y_at(self.fx) if XL else 0
        self.ex = sed_prefix_bound(Text(XR).fragment(), bound) if XR else 0
        self.ey = self.ry if self.ex == self.rx else ar.min_y_at(self.ex)
        self.ex_end = self.ex == self.rx
        self.ey_end = self.ey == self.ry
        inner_x = XL[self.fx :] + XM + XR[: self.ex]
        inner_y = YL[self.fy :] + YM + YR[: self.ey]
        self.inner = DynSedSession(inner_x, inner_y, w, INNER_THRESHOLD * self.k, cfg)

    def route(self, e: EditEvent) -> Tuple[str, int]:
        if e.side == "X":
            return _part(e.op, e.pos, self.lx, self.mx)
        return _part(e.op, e.pos, self.ly, self.my)

    def apply(self, e: EditEvent) -> None:
        if self.events >= self.budget:
            raise BudgetExceeded(f"glue_session lifetime of {self.budget} edits is over")
        self.events += 1
        part, q = self.route(e)
        X = e.side == "X"
        f = self.fx if X else self.fy
        ln = self.lx if X else self.ly
        mid = self.mx if X else self.my
        end = self.ex if X else self.ey
        at_end = self.ex_end if X else self.ey_end
        delta = {"ins": 1, "del": -1, "sub": 0}[e.op]
        inner: Optional[int] = None
        if part == "L":
            if q >= f:
                inner = q - f
            else:
                f = _shift(f, e.at(q))
            ln += delta
        elif part == "M":
            inner = ln - f + q
            mid += delta
        else:
            inside = q < end or (e.op == "ins" and at_end and q == end)
            if inside:
                inner = ln - f + mid + q
            end = end + delta if at_end else _shift(end, e.at(q))
            if X:
                self.rx += delta
            else:
                self.ry += delta
        if X:
            self.fx, self.lx, self.mx, self.ex = f, ln, mid, end
        else:
            self.fy, self.ly, self.my, self.ey = f, ln, mid, end
        if inner is not None:
            self.inner.apply(e.at(inner))

    def query(self, ol: Alignment, orr: Alignment) -> Alignment:
        """Optimal alignment of the concatenations from optimal halves."""
        _, om = self.inner.current()
        om = om.shift(self.fx, self.fy)
        orr = orr.shift(self.lx + self.mx, self.ly + self.my)
        pl = first_intersection(ol, om)
        pr = first_intersection(om, orr)
        if pl is None or pr is None or pl[0] > pr[0] or pl[1] > pr[1]:
            raise PreconditionError("glue: the middle alignment misses a half")
        return concat(ol.prefix_to(pl), om.sub_alignment(pl, pr), orr.suffix_from(pr))


def glue_session(xl, xm, xr, yl, ym, yr, w: WeightFunction, k: int,
                 config: Optional[SolverConfig] = None) -> GlueSession:
    return GlueSession(xl, xm, xr, yl, ym, yr, w, k, config)


# ---------------------------------------------------------------------------
# budgeted instance and the epoch top level


class _Instance:
    """Serves floor(k/W) edits: halves at the cost-1/2 point, each kept by a
    recursive DynamicED, and a glue session for the seam."""

    def __init__(self, X: bytes, Y: bytes, w: WeightFunction, k: int, O: Alignment,
                 cfg: SolverConfig, eps: float):
        self.budget = k // max(w.W, 1)
        self.events = 0
        Xf, Yf = Text(X).fragment(), Text(Y).fragment()
        O = O.canonical(Xf, Yf)
        steps = _step_costs(O, Xf, Yf, w)
        (xm, ym), (xm1, ym1) = _split_half(steps, k)
        al = O.prefix_to((xm, ym))
        ar = O.suffix_from((xm1, ym1)).shift(-xm1, -ym1)
        cl = recost(al, X[:xm], Y[:ym], w)
        cr = recost(ar, X[xm1:], Y[ym1:], w)
        self.glue = GlueSession(X[:xm], X[xm:xm1], X[xm1:], Y[:ym], Y[ym:ym1], Y[ym1:], w, k,
                                cfg, al=al, ar=ar)
        self.lam = DynamicED(X[:xm], Y[:ym], w, config=cfg, eps=eps, seed=(cl, al))
        self.rho = DynamicED(X[xm1:], Y[ym1:], w, config=cfg, eps=eps, seed=(cr, ar))
        bump("dynamic.instances")

    def apply(self, e: EditEvent) -> Alignment:
        if self.events >= self.budget:
            raise BudgetExceeded(f"instance lifetime of {self.budget} edits is over")
        self.events += 1
        part, q = self.glue.route(e)
        self.glue.apply(e)
        if part == "L":
            self.lam.apply(e.at(q))
        elif part == "R":
            self.rho.apply(e.at(q))
        return self.glue.query(self.lam.alignment, self.rho.alignment)


class DynamicED:
    """Exact weighted edit distance of two strings under edits.

    Time is cut into blocks.  With k the distance at the start of a block:
    if eps*k/W <= 1 the block is a single edit handled from scratch (banded
    DP when k < 3W, the static solver otherwise); else it is an epoch of
    ceil(eps*k/W) edits served by a budgeted instance, rebuilt eagerly at
    the epoch end.  A cost model may replace both by a per-edit banded DP
    whose band follows from the drift bound |k' - k| <= W.

    In threshold mode, distances above the threshold are reported as None
    and the session sleeps through the edits that cannot bring the
    distance back under it.
    """

    def __init__(self, x, y, w: WeightFunction, threshold: Optional[int] = None,
                 config: Optional[SolverConfig] = None, eps: float = EPS,
                 seed: Optional[Tuple[int, Alignment]] = None):
        self.cfg = config or DEFAULT
        self.w = w
        self.W = max(w.W, 1)
        self.eps = eps
        self.threshold = threshold
        self.X, self.Y = _as_bytes(x), _as_bytes(y)
        self.A: Optional[_Instance] = None
        self.left = 0
        self.sleep = 0
        self.d: Optional[int] = None
        self.O: Optional[Alignment] = None
        if seed is not None:
            self.d, self.O = seed
        else:
            self._scratch(None)
        self._start_block()

    @property
    def distance(self) -> Optional[int]:
        return self.d

    @property
    def alignment(self) -> Optional[Alignment]:
        return self.O

    def _dp_route(self, k: int) -> bool:
        return _dp_cheaper(self.cfg, len(self.X), k + self.W)

    def _scratch(self, prev: Optional[int]) -> None:
        if prev is not None and (prev < 3 * self.W or self._dp_route(prev)):
            res = banded_dp(self.X, self.Y, self.w, prev + self.W)
            if res is not None:
                bump("dynamic.dp_steps")
                self.d, self.O = res
                return
        bump("dynamic.scratch")
        self.d, self.O = solve(self.X, self.Y, self.w, self.cfg)

    def _start_block(self) -> None:
        self.A = None
        self.left = 0
        if self.threshold is not None and self.d is not None and self.d > self.threshold:
            self.sleep = -(-(self.d - self.threshold) // self.W) - 1
            return
        k = self.d
        if k is None or self.eps * k / self.W <= 1 or self._dp_route(k):
            return
        try:
            self.A = _Instance(self.X, self.Y, self.w, k, self.O, self.cfg, self.eps)
        except (PreconditionError, DistanceExceedsK):
            bump("dynamic.instance_failures")
            self.A = None
            return
        self.left = math.ceil(self.eps * k / self.W)

    def apply(self, e: EditEvent) -> Tuple[Optional[int], Optional[Alignment]]:
        """Apply one edit; returns the distance (None above the threshold)
        and an optimal alignment when one is known."""
        if e.side == "X":
            self.X = e.apply(self.X)
        else:
            self.Y = e.apply(self.Y)
        prev = self.d
        if self.sleep > 0:
            self.sleep -= 1
            self.d, self.O = None, None
            bump("dynamic.slept")
            return None, None
        if self.A is None:
            self._scratch(prev)
            self._start_block()
        else:
            try:
                self.O = self.A.apply(e)
                self.d = recost(self.O, self.X, self.Y, self.w)
                self.left -= 1
                if self.left <= 0:
                    bump("dynamic.epochs")
                    self._start_block()
            except (BudgetExceeded, PreconditionError, DistanceExceedsK):
                bump("dynamic.heals")
                self._scratch(None)
                self._start_block()
        if self.threshold is not None and self.d is not None and self.d > self.threshold:
            return None, None
        return self.d, self.O

    def current(self) -> Tuple[Optional[int], Optional[Alignment]]:
        if self.threshold is not None and (self.d is None or self.d > self.threshold):
            return None, None
        return self.d, self.O


def dynamic_ed(x, y, w: WeightFunction, threshold: Optional[int] = None,
               config: Optional[SolverConfig] = None, eps: float = EPS) -> DynamicED:
    return DynamicED(x, y, w, threshold=threshold, config=config, eps=eps)
