"""Weight functions, alignments, banded DP and boundary distance matrices.

Grid conventions: vertex (x, y) with x in [0..|X|] and y in [0..|Y|].  The
edge (x,y)->(x+1,y) deletes X[x], (x,y)->(x,y+1) inserts Y[y] and
(x,y)->(x+1,y+1) substitutes or matches.  The augmented graph adds a back
edge of weight W+1 for every edge.

For an a x b rectangle (local coordinates) the input vertices are
(0,b),(0,b-1),...,(0,0),(1,0),...,(a,0) and the output vertices are
(0,b),(1,b),...,(a,b),(a,b-1),...,(a,0); both sequences have a+b+1 entries.
"""

from __future__ import annotations

import heapq
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numba as nb
import numpy as np

from . import monge
from .counters import bump
from .pillar import Fragment, as_fragment, lcp

Point = Tuple[int, int]
INF = np.int64(1) << np.int64(60)


# ---------------------------------------------------------------------------
# weight functions


class WeightFunction:
    """Normalized integer edit costs over an alphabet plus the empty symbol.

    With ``alphabet=None`` the function is uniform over any alphabet: every
    substitution costs ``sub`` and every insertion or deletion costs ``indel``.
    Otherwise ``table`` is a (s+1) x (s+1) matrix whose last row and column
    stand for the empty symbol.
    """

    def __init__(self, alphabet: Optional[Sequence[int]], table=None, sub: int = 1, indel: int = 1):
        self.alphabet = None if alphabet is None else tuple(int(c) for c in alphabet)
        if self.alphabet is None:
            if sub < 1 or indel < 1:
                raise ValueError("uniform costs must be at least 1")
            self.sub_cost = int(sub)
            self.indel_cost = int(indel)
            self.table = None
            self._lookup = None
            self.W = max(self.sub_cost, self.indel_cost)
            return
        s = len(self.alphabet)
        if len(set(self.alphabet)) != s:
            raise ValueError("alphabet contains duplicates")
        tab = np.asarray(table, dtype=np.int64)
        if tab.shape != (s + 1, s + 1):
            raise ValueError(f"weight table must be {s + 1}x{s + 1}")
        if (tab < 0).any():
            raise ValueError("weights must be non-negative")
        for i in range(s):
            if tab[i, i] != 0:
                raise ValueError("weight function is not normalized: w(a,a) != 0")
            for j in range(s + 1):
                if j != i and tab[i, j] < 1:
                    raise ValueError("weight function is not normalized: w(a,b) < 1")
            if tab[s, i] < 1:
                raise ValueError("weight function is not normalized: w(eps,b) < 1")
        tab = tab.copy()
        tab[s, s] = 0
        tab.setflags(write=False)
        self.table = tab
        self.W = int(tab.max())
        mx = max(self.alphabet) + 1 if self.alphabet else 1
        self._lookup = np.full(mx, -1, dtype=np.int64)
        for i, c in enumerate(self.alphabet):
            self._lookup[c] = i
        self.sub_cost = self.indel_cost = None

    # -- constructors

    @classmethod
    def unit(cls) -> "WeightFunction":
        return cls(None)

    @classmethod
    def uniform(cls, sub: int, indel: int) -> "WeightFunction":
        return cls(None, sub=sub, indel=indel)

    @classmethod
    def from_costs(cls, alphabet, fn: Callable[[Optional[int], Optional[int]], int]) -> "WeightFunction":
        """Build the table from fn(a, b) where None stands for the empty symbol."""
        al = [int(c) if not isinstance(c, str) else ord(c) for c in alphabet]
        syms: List[Optional[int]] = list(al) + [None]
        tab = [[0 if (a == b and a is not None) else (fn(a, b) if not (a is None and b is None) else 0) for b in syms] for a in syms]
        return cls(al, tab)

    @classmethod
    def parse(cls, text: str) -> "WeightFunction":
        """Parse the weight-matrix file format.

        The first non-empty line is ``alphabet: <chars>``; it is followed by
        (s+1) rows of s+1 integers, the last row and column being epsilon.
        """
        lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.strip().startswith("#")]
        if not lines or not lines[0].lower().startswith("alphabet:"):
            raise ValueError("weight file must start with 'alphabet: <chars>'")
        chars = lines[0].split(":", 1)[1].strip()
        if not chars:
            raise ValueError("empty alphabet")
        codes = list(chars.encode("latin-1"))
        rows = [[int(v) for v in ln.split()] for ln in lines[1:]]
        if len(rows) != len(codes) + 1 or any(len(r) != len(codes) + 1 for r in rows):
            raise ValueError("weight table has the wrong shape")
        return cls(codes, rows)

    @classmethod
    def random(cls, alphabet: Sequence[int], W: int, rng) -> "WeightFunction":
        s = len(alphabet)
        tab = rng.integers(1, W + 1, size=(s + 1, s + 1)) if W >= 1 else np.ones((s + 1, s + 1), np.int64)
        np.fill_diagonal(tab, 0)
        if s and W >= 1:
            tab[int(rng.integers(0, s + 1)) % (s + 1), (int(rng.integers(0, s)) + 1) % (s + 1)] = W
            np.fill_diagonal(tab, 0)
            if tab.max() < W:
                tab[0, s] = W
        return cls(list(alphabet), tab)

    def dump(self) -> str:
        if self.alphabet is None:
            raise ValueError("uniform weight functions have no table form")
        head = "alphabet: " + bytes(self.alphabet).decode("latin-1")
        return "\n".join([head] + [" ".join(str(int(v)) for v in row) for row in self.table]) + "\n"

    # -- access

    def sub(self, a: int, b: int) -> int:
        if self.table is None:
            return 0 if a == b else self.sub_cost
        return int(self.table[self._lookup[a], self._lookup[b]])

    def dele(self, a: int) -> int:
        if self.table is None:
            return self.indel_cost
        return int(self.table[self._lookup[a], -1])

    def ins(self, b: int) -> int:
        if self.table is None:
            return self.indel_cost
        return int(self.table[-1, self._lookup[b]])

    def __call__(self, a: Optional[int], b: Optional[int]) -> int:
        if a is None and b is None:
            return 0
        if a is None:
            return self.ins(b)
        if b is None:
            return self.dele(a)
        return self.sub(a, b)

    def encode(self, xc: np.ndarray, yc: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Map code arrays to table indices; returns (xi, yi, table)."""
        xc = np.asarray(xc, dtype=np.int64)
        yc = np.asarray(yc, dtype=np.int64)
        if self.table is None:
            both = np.concatenate([xc, yc])
            uniq, inv = np.unique(both, return_inverse=True)
            s = len(uniq)
            tab = np.full((s + 1, s + 1), self.sub_cost, dtype=np.int64)
            np.fill_diagonal(tab, 0)
            tab[s, :s] = self.indel_cost
            tab[:s, s] = self.indel_cost
            return inv[: len(xc)].astype(np.int64), inv[len(xc) :].astype(np.int64), tab
        for arr in (xc, yc):
            if arr.size and (arr.max() >= len(self._lookup) or arr.min() < 0 or (self._lookup[arr] < 0).any()):
                raise ValueError("sequence contains characters outside the weight alphabet")
        return self._lookup[xc], self._lookup[yc], np.asarray(self.table)

    def del_costs(self, xc: np.ndarray) -> np.ndarray:
        xc = np.asarray(xc, dtype=np.int64)
        if self.table is None:
            return np.full(len(xc), self.indel_cost, dtype=np.int64)
        return np.asarray(self.table[self._lookup[xc], -1], dtype=np.int64)

    def ins_costs(self, yc: np.ndarray) -> np.ndarray:
        yc = np.asarray(yc, dtype=np.int64)
        if self.table is None:
            return np.full(len(yc), self.indel_cost, dtype=np.int64)
        return np.asarray(self.table[-1, self._lookup[yc]], dtype=np.int64)

    def scaled(self, fn: Callable[[int], int]) -> "WeightFunction":
        """Apply fn to every non-zero cost (used for weight halving)."""
        if self.table is None:
            return WeightFunction.uniform(fn(self.sub_cost), fn(self.indel_cost))
        tab = np.vectorize(lambda v: 0 if v == 0 else fn(int(v)))(np.asarray(self.table)).astype(np.int64)
        return WeightFunction(self.alphabet, tab)

    def transposed(self) -> "WeightFunction":
        """w'(a, b) = w(b, a): the weights of the swapped instance."""
        if self.table is None:
            return self
        return WeightFunction(self.alphabet, np.asarray(self.table).T.copy())

    def __repr__(self) -> str:
        if self.table is None:
            return f"WeightFunction(uniform sub={self.sub_cost} indel={self.indel_cost})"
        return f"WeightFunction(|alphabet|={len(self.alphabet)}, W={self.W})"


def codes_of(f) -> np.ndarray:
    return np.asarray(as_fragment(f).codes(), dtype=np.int64)


# ---------------------------------------------------------------------------
# alignments


class Alignment:
    """Breakpoint representation of a monotone path.

    ``points`` holds the endpoints plus every point whose outgoing step is
    not a match.  Between consecutive breakpoints (x',y') and (x,y) the path
    takes one step from (x',y') and then runs diagonally into (x,y).
    """

    __slots__ = ("points",)

    def __init__(self, points: Sequence[Point]):
        pts = [(int(x), int(y)) for x, y in points]
        if not pts:
            raise ValueError("an alignment needs at least one point")
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            dx, dy = x1 - x0, y1 - y0
            if dx < 0 or dy < 0 or abs(dx - dy) > 1 or (dx == 0 and dy == 0):
                raise ValueError(f"invalid breakpoint step {(x0, y0)} -> {(x1, y1)}")
        self.points: Tuple[Point, ...] = tuple(pts)

    @classmethod
    def identity(cls, n: int, x0: int = 0, y0: int = 0) -> "Alignment":
        return cls([(x0, y0), (x0 + n, y0 + n)] if n else [(x0, y0)])

    @classmethod
    def from_path(cls, path: Sequence[Point], xc=None, yc=None) -> "Alignment":
        """Compress a full vertex sequence; diagonal steps count as matches
        when the characters agree (or always, when no strings are given)."""
        path = [(int(x), int(y)) for x, y in path]
        if len(path) == 1:
            return cls(path)
        keep = [path[0]]
        for t in range(1, len(path) - 1):
            x, y = path[t]
            nx, ny = path[t + 1]
            diag = nx == x + 1 and ny == y + 1
            if not diag or (xc is not None and xc[x] != yc[y]):
                keep.append((x, y))
        keep.append(path[-1])
        # the first step may itself be a non-diagonal step; that is fine
        return cls(_dedupe(keep))

    @property
    def start(self) -> Point:
        return self.points[0]

    @property
    def end(self) -> Point:
        return self.points[-1]

    def __len__(self) -> int:
        return len(self.points)

    def __eq__(self, other) -> bool:
        return isinstance(other, Alignment) and self.points == other.points

    def __hash__(self) -> int:
        return hash(self.points)

    def __repr__(self) -> str:
        return f"Alignment({list(self.points)})"

    def shift(self, dx: int, dy: int) -> "Alignment":
        return Alignment([(x + dx, y + dy) for x, y in self.points])

    def expand(self) -> List[Point]:
        pts = self.points
        out = [pts[0]]
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            d = max(x1 - x0, y1 - y0)
            for delta in range(d - 1, -1, -1):
                out.append((x1 - delta, y1 - delta))
        return out

    def segments(self) -> Iterator[Tuple[Point, Point]]:
        return zip(self.points, self.points[1:])

    def runs(self) -> List[Tuple[int, int, int]]:
        """Maximal diagonal runs (x0, y0, length) in path order."""
        out: List[Tuple[int, int, int]] = []
        cx, cy = self.points[0]
        ln = 0
        for (x0, y0), (x1, y1) in self.segments():
            dx, dy = x1 - x0, y1 - y0
            if dx == dy:
                ln += dx
            else:
                out.append((cx, cy, ln))
                cx, cy = (x0 + 1, y0) if dx > dy else (x0, y0 + 1)
                ln = min(dx, dy)
        out.append((cx, cy, ln))
        return out

    # -- costs

    def cost(self, x, y, w: WeightFunction) -> int:
        """Re-cost the path by summing edge weights (diagonal runs are scanned
        with LCP queries, so mismatching runs are priced correctly)."""
        X, Y = as_fragment(x), as_fragment(y)
        total = 0
        for (x0, y0), (x1, y1) in self.segments():
            dx, dy = x1 - x0, y1 - y0
            if dx > dy:
                total += w.dele(X.access(x0))
                x0 += 1
            elif dy > dx:
                total += w.ins(Y.access(y0))
                y0 += 1
            total += _diag_cost(X, Y, x0, y0, x1 - x0, w)
        return total

    def unit_cost(self, x, y) -> int:
        return self.cost(x, y, WeightFunction.unit())

    def canonical(self, x, y) -> "Alignment":
        """Recompute the breakpoint set from the strings."""
        X, Y = as_fragment(x), as_fragment(y)
        out = [self.points[0]]
        for (x0, y0), (x1, y1) in self.segments():
            dx, dy = x1 - x0, y1 - y0
            if dx != dy:
                out.append((x0, y0))
                x0, y0 = (x0 + 1, y0) if dx > dy else (x0, y0 + 1)
            t = 0
            ln = x1 - x0
            while t < ln:
                l = lcp(X.extract(x0 + t, x1), Y.extract(y0 + t, y1))
                if t + l < ln:
                    out.append((x0 + t + l, y0 + t + l))
                t += l + 1
        out.append(self.points[-1])
        return Alignment(_dedupe(out))

    def ops(self, x, y) -> List[Tuple[str, int, int]]:
        """Step list as (op, x, y) with op in M (match), X (substitution),
        D (deletion), I (insertion); runs of matches are collapsed."""
        X, Y = as_fragment(x), as_fragment(y)
        out: List[Tuple[str, int, int]] = []
        for (x0, y0), (x1, y1) in self.segments():
            dx, dy = x1 - x0, y1 - y0
            if dx > dy:
                out.append(("D", x0, y0))
                x0 += 1
            elif dy > dx:
                out.append(("I", x0, y0))
                y0 += 1
            t = 0
            ln = x1 - x0
            while t < ln:
                l = lcp(X.extract(x0 + t, x1), Y.extract(y0 + t, y1))
                for s in range(l):
                    out.append(("M", x0 + t + s, y0 + t + s))
                if t + l < ln:
                    out.append(("X", x0 + t + l, y0 + t + l))
                t += l + 1
        return out

    def cigar(self, x, y) -> str:
        ops = [o for o, _, _ in self.ops(x, y)]
        parts: List[str] = []
        i = 0
        while i < len(ops):
            j = i
            while j < len(ops) and ops[j] == ops[i]:
                j += 1
            parts.append(f"{j - i}{ops[i]}")
            i = j
        return "".join(parts)

    # -- navigation

    def _segment_of(self, p: Point) -> int:
        """Index j of the segment points[j] -> points[j+1] containing p
        (p == points[j] allowed); raises if p is not on the path."""
        pts = self.points
        j = bisect_right(pts, p) - 1
        if j < 0:
            raise ValueError(f"{p} precedes the path")
        if pts[j] == p:
            return j
        if j + 1 >= len(pts):
            raise ValueError(f"{p} is not on the path")
        (x0, y0), (x1, y1) = pts[j], pts[j + 1]
        if x1 - x0 > y1 - y0:
            x0 += 1
        elif y1 - y0 > x1 - x0:
            y0 += 1
        if p[0] - x0 == p[1] - y0 and x0 <= p[0] <= x1:
            return j
        raise ValueError(f"{p} is not on the path")

    def contains(self, p: Point) -> bool:
        try:
            self._segment_of(p)
            return True
        except ValueError:
            return False

    def prefix_to(self, p: Point) -> "Alignment":
        j = self._segment_of(p)
        pts = list(self.points[: j + 1])
        if pts[-1] != p:
            pts.append(p)
        return Alignment(pts)

    def suffix_from(self, p: Point) -> "Alignment":
        j = self._segment_of(p)
        if self.points[j] == p:
            return Alignment(self.points[j:])
        return Alignment([p] + list(self.points[j + 1 :]))

    def min_y_at(self, x: int) -> int:
        """Smallest y with (x, y) on the path."""
        for (cx, cy, ln) in self.runs():
            if cx <= x <= cx + ln:
                return cy + (x - cx)
        raise ValueError(f"column {x} not covered by the path")

    def max_y_at(self, x: int) -> int:
        best = None
        for (cx, cy, ln) in self.runs():
            if cx <= x <= cx + ln:
                best = cy + (x - cx)
            elif cx > x:
                break
        if best is None:
            raise ValueError(f"column {x} not covered by the path")
        return best

    def image(self, xl: int, xr: int, ylen: int) -> Tuple[int, int]:
        """Fragment [y_l..y_r) of Y that the path aligns X[xl..xr) onto."""
        yl = self.min_y_at(xl)
        yr = ylen if xr == self.end[0] else self.min_y_at(xr)
        return yl, yr

    def sub_alignment(self, p: Point, q: Point) -> "Alignment":
        return self.suffix_from(p).prefix_to(q)


def _diag_cost(X: Fragment, Y: Fragment, x0: int, y0: int, ln: int, w: WeightFunction) -> int:
    total = 0
    t = 0
    while t < ln:
        l = lcp(X.extract(x0 + t, x0 + ln), Y.extract(y0 + t, y0 + ln))
        if t + l < ln:
            total += w.sub(X.access(x0 + t + l), Y.access(y0 + t + l))
        t += l + 1
    return total


def _dedupe(pts: List[Point]) -> List[Point]:
    out: List[Point] = []
    for p in pts:
        if not out or out[-1] != p:
            out.append(p)
    return out


def concat(*parts: Alignment) -> Alignment:
    """Concatenate alignments whose endpoints meet."""
    pts: List[Point] = []
    for a in parts:
        if pts and pts[-1] != a.start:
            raise ValueError(f"alignments do not meet: {pts[-1]} vs {a.start}")
        pts.extend(a.points if not pts else a.points[1:])
    return Alignment(pts)


def first_intersection(p: Alignment, q: Alignment) -> Optional[Point]:
    """Earliest common point of two monotone paths, or None."""
    pr = p.runs()
    qr = q.runs()
    qends = [cx + ln for cx, _, ln in qr]
    for (ax, ay, al) in pr:
        j = bisect_left(qends, ax)
        best: Optional[Point] = None
        while j < len(qr) and qr[j][0] <= ax + al:
            bx, by, bl = qr[j]
            if ax - ay == bx - by:
                lo = max(ax, bx)
                hi = min(ax + al, bx + bl)
                if lo <= hi:
                    cand = (lo, lo - (ax - ay))
                    if best is None or cand < best:
                        best = cand
            j += 1
        if best is not None:
            return best
    return None


def alignment_cost_bound_ok(a: Alignment, d: int) -> bool:
    """Deviation bound: every breakpoint stays within band d of both endpoints' diagonals."""
    (x0, y0), (x1, y1) = a.start, a.end
    for x, y in a.points:
        if abs((x - y) - (x0 - y0)) > d or abs((x - y) - (x1 - y1)) > d:
            return False
    return True


# ---------------------------------------------------------------------------
# banded dynamic programming


@nb.njit(cache=True)
def _banded_kernel(xi, yi, tab, k, limit):
    n = xi.size
    m = yi.size
    eps = tab.shape[0] - 1
    width = 2 * k + 1
    big = np.int64(1) << np.int64(60)
    # two spare slots keep the reads at b + 1 inside the buffers
    prev = np.full(width + 2, big, np.int64)
    cur = np.full(width + 2, big, np.int64)
    tb = np.empty((n + 1, width), np.uint8)
    insc = np.empty(m + 1, np.int64)
    for y in range(1, m + 1):
        insc[y] = tab[eps, yi[y - 1]]
    cur[k] = 0
    tb[0, k] = 0
    for y in range(1, min(m, k) + 1):
        cur[k + y] = cur[k + y - 1] + insc[y]
        tb[0, k + y] = 3
    cur[min(m, k) + k + 1] = big
    for x in range(1, n + 1):
        prev, cur = cur, prev
        ylo = max(0, x - k)
        yhi = min(m, x + k)
        dc = tab[xi[x - 1], eps]
        srow = tab[xi[x - 1]]
        left = big
        for y in range(ylo, yhi + 1):
            b = y - x + k
            best = prev[b + 1] + dc
            kind = 2
            if y > 0:
                c = prev[b] + srow[yi[y - 1]]
                if c <= best:
                    best = c
                    kind = 1
                c = left + insc[y]
                if c < best:
                    best = c
                    kind = 3
            cur[b] = best
            left = best
            tb[x, b] = kind
        cur[yhi - x + k + 1] = big
    prev = cur
    dist = prev[m - n + k]
    if dist > limit:
        return dist, np.zeros((0, 2), np.int64)
    # traceback
    path = np.empty((n + m + 1, 2), np.int64)
    cnt = 0
    x = n
    y = m
    while True:
        path[cnt, 0] = x
        path[cnt, 1] = y
        cnt += 1
        if x == 0 and y == 0:
            break
        kind = tb[x, y - x + k]
        if kind == 1:
            x -= 1
            y -= 1
        elif kind == 2:
            x -= 1
        else:
            y -= 1
    # breakpoints in forward order
    out = np.empty((cnt, 2), np.int64)
    nb_ = 0
    for t in range(cnt - 1, -1, -1):
        px = path[t, 0]
        py = path[t, 1]
        keep = t == cnt - 1 or t == 0
        if not keep:
            qx = path[t - 1, 0]
            qy = path[t - 1, 1]
            if not (qx == px + 1 and qy == py + 1 and xi[px] == yi[py]):
                keep = True
        if keep:
            out[nb_, 0] = px
            out[nb_, 1] = py
            nb_ += 1
    return dist, out[:nb_]


def banded_dp(x, y, w: WeightFunction, k: int) -> Optional[Tuple[int, Alignment]]:
    """Distance and an optimal alignment if the weighted distance is at most k.

    Only cells with |x - y| <= k are visited; each edit costs at least 1,
    so every alignment of cost at most k stays inside that band.
    """
    X, Y = as_fragment(x), as_fragment(y)
    n, m = len(X), len(Y)
    if k < 0:
        return None
    if n == 0 or m == 0:
        d = int(w.ins_costs(Y.codes()).sum()) if n == 0 else int(w.del_costs(X.codes()).sum())
        if d > k:
            return None
        pts = [(0, 0)] + [(0, j) for j in range(1, m + 1)] + [(i, 0) for i in range(1, n + 1)]
        return d, Alignment(pts if (n or m) else [(0, 0)])
    if abs(n - m) > k:
        return None
    band = int(min(k, max(n, m)))
    xi, yi, tab = w.encode(X.codes(), Y.codes())
    bump("banded_dp.cells", (n + 1) * (2 * band + 1))
    dist, bps = _banded_kernel(xi, yi, tab, band, int(min(k, INF - 1)))
    if dist > k:
        return None
    return int(dist), Alignment([tuple(p) for p in bps.tolist()])


def edit_distance(x, y, w: WeightFunction) -> Tuple[int, Alignment]:
    """Exact distance by banded DP with a band covering the whole grid."""
    X, Y = as_fragment(x), as_fragment(y)
    res = banded_dp(X, Y, w, (w.W + 1) * (len(X) + len(Y) + 1))
    assert res is not None
    return res


@nb.njit(cache=True)
def _full_dp_kernel(xi, yi, tab):
    n = xi.size
    m = yi.size
    eps = tab.shape[0] - 1
    D = np.zeros((n + 1, m + 1), np.int64)
    for i in range(1, n + 1):
        D[i, 0] = D[i - 1, 0] + tab[xi[i - 1], eps]
    for j in range(1, m + 1):
        D[0, j] = D[0, j - 1] + tab[eps, yi[j - 1]]
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            a = D[i - 1, j - 1] + tab[xi[i - 1], yi[j - 1]]
            b = D[i - 1, j] + tab[xi[i - 1], eps]
            c = D[i, j - 1] + tab[eps, yi[j - 1]]
            D[i, j] = min(a, min(b, c))
    return D[n, m]


def full_dp(x, y, w: WeightFunction) -> int:
    """Plain O(|X||Y|) weighted edit distance (oracle)."""
    X, Y = as_fragment(x), as_fragment(y)
    xi, yi, tab = w.encode(X.codes(), Y.codes())
    return int(_full_dp_kernel(xi, yi, tab))


# ---------------------------------------------------------------------------
# boundary vertices


def in_vertex(a: int, b: int, i: int) -> Point:
    return (0, b - i) if i <= b else (i - b, 0)


def out_vertex(a: int, b: int, j: int) -> Point:
    return (j, b) if j <= a else (a, b - (j - a))


def in_index(a: int, b: int, v: Point) -> int:
    x, y = v
    if x == 0:
        return b - y
    if y == 0:
        return b + x
    raise ValueError(f"{v} is not an input vertex of the {a}x{b} rectangle")


def out_index(a: int, b: int, v: Point) -> int:
    x, y = v
    if y == b:
        return x
    if x == a:
        return a + (b - y)
    raise ValueError(f"{v} is not an output vertex of the {a}x{b} rectangle")


def closed_form(u: Point, v: Point, dcost: np.ndarray, icost: np.ndarray, W: int) -> int:
    """Distance between anti-monotone or axis-aligned vertices: any monotone
    path between them is shortest, so the cost splits by coordinate."""
    (ux, uy), (vx, vy) = u, v
    cx = int(dcost[ux:vx].sum()) if vx >= ux else (W + 1) * (ux - vx)
    cy = int(icost[uy:vy].sum()) if vy >= uy else (W + 1) * (uy - vy)
    return cx + cy


# ---------------------------------------------------------------------------
# brute-force oracle

ORACLE_BOUND = 64


def augmented_distances(x, y, w: WeightFunction, sources: Sequence[Point]) -> Dict[Point, np.ndarray]:
    """Dijkstra from each source over the augmented alignment graph."""
    xc, yc = codes_of(x), codes_of(y)
    n, m = len(xc), len(yc)
    wb = w.W + 1
    adj: Dict[Point, List[Tuple[Point, int]]] = {}
    for i in range(n + 1):
        for j in range(m + 1):
            adj[(i, j)] = []
    for i in range(n + 1):
        for j in range(m + 1):
            if i < n:
                adj[(i, j)].append(((i + 1, j), w.dele(int(xc[i]))))
                adj[(i + 1, j)].append(((i, j), wb))
            if j < m:
                adj[(i, j)].append(((i, j + 1), w.ins(int(yc[j]))))
                adj[(i, j + 1)].append(((i, j), wb))
            if i < n and j < m:
                adj[(i, j)].append(((i + 1, j + 1), w.sub(int(xc[i]), int(yc[j]))))
                adj[(i + 1, j + 1)].append(((i, j), wb))
    out = {}
    for s in sources:
        dist = np.full((n + 1, m + 1), -1, dtype=np.int64)
        heap = [(0, s)]
        while heap:
            d, u = heapq.heappop(heap)
            if dist[u] >= 0:
                continue
            dist[u] = d
            for v, c in adj[u]:
                if dist[v] < 0:
                    heapq.heappush(heap, (d + c, v))
        out[s] = dist
    return out


def brute_bm(x, y, w: WeightFunction, bound: int = ORACLE_BOUND) -> np.ndarray:
    """Dense boundary matrix by Dijkstra on the augmented graph (oracle)."""
    xc, yc = codes_of(x), codes_of(y)
    a, b = len(xc), len(yc)
    if a + b > bound:
        raise ValueError(f"|X|+|Y| = {a + b} exceeds the oracle bound {bound}")
    P = a + b + 1
    srcs = [in_vertex(a, b, i) for i in range(P)]
    dist = augmented_distances(xc, yc, w, srcs)
    out = np.empty((P, P), dtype=np.int64)
    for i, s in enumerate(srcs):
        for j in range(P):
            out[i, j] = dist[s][out_vertex(a, b, j)]
    return out


# ---------------------------------------------------------------------------
# boundary matrices and their composition


@dataclass(frozen=True)
class BoundaryMatrix:
    """Boundary matrix of the rectangle [x0..x0+a] x [y0..y0+b]."""

    cmo: monge.CMO
    x0: int
    y0: int
    a: int
    b: int
    dcost: np.ndarray
    icost: np.ndarray
    W: int

    @property
    def P(self) -> int:
        return self.a + self.b + 1


def bm_base_dense(dc: int, ic: int, sc: int, wb: int) -> np.ndarray:
    """3x3 matrix of a single cell with deletion, insertion and diagonal costs."""
    # vertices: 0=(0,0) 1=(1,0) 2=(0,1) 3=(1,1)
    d = np.full((4, 4), 1 << 40, dtype=np.int64)
    np.fill_diagonal(d, 0)
    for u, v, c in ((0, 1, dc), (2, 3, dc), (0, 2, ic), (1, 3, ic), (0, 3, sc)):
        d[u, v] = min(d[u, v], c)
        d[v, u] = min(d[v, u], wb)
    for t in range(4):
        d = np.minimum(d, d[:, t : t + 1] + d[t : t + 1, :])
    ins_ = (2, 0, 1)  # (0,1),(0,0),(1,0)
    outs = (2, 3, 1)  # (0,1),(1,1),(1,0)
    return d[np.ix_(ins_, outs)]


def bm_base(a: int, b: int, w: WeightFunction) -> BoundaryMatrix:
    dense = bm_base_dense(w.dele(a), w.ins(b), w.sub(a, b), w.W + 1)
    dense.setflags(write=False)
    return BoundaryMatrix(
        monge.CMO(3, 3, dense=dense), 0, 0, 1, 1,
        np.array([w.dele(a)], np.int64), np.array([w.ins(b)], np.int64), w.W,
    )


@nb.njit(cache=True)
def _closed_nb(ux, uy, vx, vy, DX, IY, wb):
    if vx >= ux:
        cx = DX[vx] - DX[ux]
    else:
        cx = wb * (ux - vx)
    if vy >= uy:
        cy = IY[vy] - IY[uy]
    else:
        cy = wb * (uy - vy)
    return cx + cy


@nb.njit(cache=True)
def _gh_vertical(B1, B2, a, b1, b2, DX, IY, wb):
    """Separator matrices G (in x S) and H (S x out) for a rectangle split
    into a top part of height b1 and a bottom part of height b2."""
    b = b1 + b2
    P = a + b + 1
    P2 = a + b2 + 1
    G = np.empty((P, P), np.int64)
    H = np.empty((P, P), np.int64)
    sx = np.empty(P, np.int64)
    sy = np.empty(P, np.int64)
    for s in range(P):
        if s < b2:
            sx[s] = 0
            sy[s] = b - s
        else:
            t = s - b2
            if t <= a:
                sx[s] = t
                sy[s] = b1
            else:
                sx[s] = a
                sy[s] = b1 - (t - a)
    for u in range(P):
        if u <= b:
            ux = 0
            uy = b - u
        else:
            ux = u - b
            uy = 0
        for s in range(P):
            if u >= b2 and s >= b2:
                G[u, s] = B1[u - b2, s - b2]
            else:
                G[u, s] = _closed_nb(ux, uy, sx[s], sy[s], DX, IY, wb)
    for v in range(P):
        if v <= a:
            vx = v
            vy = b
        else:
            vx = a
            vy = b - (v - a)
        for s in range(P):
            if s < P2 and v < P2:
                H[s, v] = B2[s, v]
            else:
                H[s, v] = _closed_nb(sx[s], sy[s], vx, vy, DX, IY, wb)
    return G, H


def _prefix(c: np.ndarray) -> np.ndarray:
    out = np.zeros(len(c) + 1, dtype=np.int64)
    np.cumsum(c, out=out[1:])
    return out


def combine_vertical_dense(top: np.ndarray, bottom: np.ndarray, a: int, b1: int, b2: int,
                           dcost: np.ndarray, icost: np.ndarray, W: int,
                           k: Optional[int] = None, check: bool = False) -> np.ndarray:
    """Boundary matrix of a rectangle from its top (height b1) and bottom
    (height b2) halves; icost covers the full height b1+b2.  With k set the
    halves may be k-equivalent stand-ins and the result is k-equivalent."""
    DX = _prefix(np.asarray(dcost, np.int64))
    IY = _prefix(np.asarray(icost, np.int64))
    G, H = _gh_vertical(np.ascontiguousarray(top), np.ascontiguousarray(bottom), a, b1, b2, DX, IY, W + 1)
    bump("bm_combine.calls")
    if k is None:
        c, _ = monge.minplus_dense(G, H)
        return c
    g2 = _assemble_capped(G, b2, k, check)
    P2 = a + b2 + 1
    hr = H[::-1, ::-1]
    h2 = _assemble_capped(np.ascontiguousarray(hr), H.shape[0] - P2, k, check)[::-1, ::-1]
    c, _ = monge.minplus_dense(g2, np.ascontiguousarray(h2))
    return monge.cap_dense(c, k)


def _assemble_capped(G: np.ndarray, w0: int, k: int, check: bool) -> np.ndarray:
    """G = [[F_top, D], [F_bot, A']] with exact F (first w0 columns) and D
    (first w0 rows), relaxed A'.  Two capped stitches rebuild a Monge
    matrix k-equivalent to the exact one."""
    D = G[:w0, w0:]
    A = G[w0:, w0:]
    E = monge.capped_stitch_dense(D, A, k, jbar=1, check=check)
    F = G[:, :w0]
    gt = monge.capped_stitch_dense(np.ascontiguousarray(F.T), np.ascontiguousarray(E.T), k, jbar=w0 + 1, check=check)
    return np.ascontiguousarray(gt.T)


def combine_horizontal_dense(left: np.ndarray, right: np.ndarray, a1: int, a2: int, b: int,
                             dcost: np.ndarray, icost: np.ndarray, W: int,
                             k: Optional[int] = None, check: bool = False) -> np.ndarray:
    """Left/right composition through the swapped instance: the boundary
    matrix of (X, Y) is the 180-degree rotation of that of (Y, X) under the
    transposed weights, and a split of X becomes a split of the height."""
    lr = np.ascontiguousarray(left[::-1, ::-1])
    rr = np.ascontiguousarray(right[::-1, ::-1])
    c = combine_vertical_dense(lr, rr, b, a1, a2, icost, dcost, W, k=k, check=check)
    return np.ascontiguousarray(c[::-1, ::-1])


def bm_combine(first: BoundaryMatrix, second: BoundaryMatrix, direction: str,
               mode: str = "exact", k: Optional[int] = None, check: bool = False) -> BoundaryMatrix:
    """Compose boundary matrices of adjacent rectangles.

    ``direction`` is "vertical" (second lies below first, same x-range) or
    "horizontal" (second lies right of first, same y-range).  ``mode`` is
    "exact" or "capped" (k-equivalent output with a small core).
    """
    if first.W != second.W:
        raise ValueError("boundary matrices use different weight caps")
    kk = None
    if mode == "capped":
        if k is None or k < 1:
            raise ValueError("capped mode requires k >= 1")
        kk = int(k)
    elif mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")
    if direction == "vertical":
        if first.x0 != second.x0 or first.a != second.a or first.y0 + first.b != second.y0:
            raise ValueError("rectangles are not vertically adjacent")
        icost = np.concatenate([first.icost, second.icost])
        dense = combine_vertical_dense(first.cmo.dense(), second.cmo.dense(), first.a, first.b, second.b,
                                       first.dcost, icost, first.W, k=kk, check=check)
        out = BoundaryMatrix(monge.CMO(dense.shape[0], dense.shape[1], dense=dense), first.x0, first.y0,
                             first.a, first.b + second.b, first.dcost, icost, first.W)
    elif direction == "horizontal":
        if first.y0 != second.y0 or first.b != second.b or first.x0 + first.a != second.x0:
            raise ValueError("rectangles are not horizontally adjacent")
        dcost = np.concatenate([first.dcost, second.dcost])
        dense = combine_horizontal_dense(first.cmo.dense(), second.cmo.dense(), first.a, second.a, first.b,
                                         dcost, first.icost, first.W, k=kk, check=check)
        out = BoundaryMatrix(monge.CMO(dense.shape[0], dense.shape[1], dense=dense), first.x0, first.y0,
                             first.a + second.a, first.b, dcost, first.icost, first.W)
    else:
        raise ValueError(f"unknown direction {direction!r}")
    dense.setflags(write=False)
    return out


def bm_of(x, y, w: WeightFunction, x0: int = 0, y0: int = 0) -> BoundaryMatrix:
    """Exact boundary matrix built by recursive halving (used by tests and
    small helpers; the hierarchical structure caches the same recursion)."""
    xc, yc = codes_of(x), codes_of(y)
    if len(xc) == 0 or len(yc) == 0:
        raise ValueError("boundary matrices require non-empty strings")

    def rec(xl: int, xr: int, yl: int, yr: int) -> BoundaryMatrix:
        a, b = xr - xl, yr - yl
        if a == 1 and b == 1:
            base = bm_base(int(xc[xl]), int(yc[yl]), w)
            return BoundaryMatrix(base.cmo, x0 + xl, y0 + yl, 1, 1, base.dcost, base.icost, w.W)
        if a >= b:
            h = a // 2
            return bm_combine(rec(xl, xl + h, yl, yr), rec(xl + h, xr, yl, yr), "horizontal")
        h = b // 2
        return bm_combine(rec(xl, xr, yl, yl + h), rec(xl, xr, yl + h, yr), "vertical")

    return rec(0, len(xc), 0, len(yc))
