"""Self-edit distance, Landau-Vishkin edit distance and phrase decomposition.

A self-alignment of X is a path (0,0) -> (|X|,|X|) in the alignment graph of
X against itself that never uses an edge of the main diagonal.  Every such
path can be mirrored into the half y >= x, so the diagonal search below only
tracks diagonals d = y - x >= 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numba as nb
import numpy as np

from .align_graph import Alignment, WeightFunction, banded_dp
from .counters import bump
from .pillar import (
    FingerprintCollision,
    Fragment,
    as_fragment,
    lcp,
    lcp_reverse,
    nb_lcp,
    nb_lcs,
    power_tables,
    static_view,
)

NEG = -1

# origin tags for the furthest-reaching traceback
_START, _STAY, _SUB, _DEL, _INS = range(5)


class PreconditionError(ValueError):
    """An operation was called outside its documented domain."""


# ---------------------------------------------------------------------------
# exhaustive oracle


@nb.njit(cache=True)
def _sed_grid(c):
    n = c.shape[0]
    big = 1 << 40
    D = np.full((n + 1, n + 1), big, dtype=np.int64)
    D[0, 0] = 0
    for i in range(n + 1):
        for j in range(n + 1):
            if i == 0 and j == 0:
                continue
            best = big
            if i > 0:
                best = min(best, D[i - 1, j] + 1)
            if j > 0:
                best = min(best, D[i, j - 1] + 1)
            if i > 0 and j > 0 and i != j:
                best = min(best, D[i - 1, j - 1] + (0 if c[i - 1] == c[j - 1] else 1))
            D[i, j] = best
    return D


def sed_oracle(x) -> int:
    """sed(X) by a full DP over the alignment graph without main-diagonal edges."""
    c = as_fragment(x).codes().astype(np.int64)
    return int(_sed_grid(c)[-1, -1])


def sed_prefix_oracle(x) -> np.ndarray:
    """sed(X[0..i)) for every i, from the same full grid."""
    c = as_fragment(x).codes().astype(np.int64)
    return np.diag(_sed_grid(c)).copy()


# ---------------------------------------------------------------------------
# alignment helpers


def reverse_alignment(a: Alignment, n: int, m: int) -> Alignment:
    """Map an alignment of reversed strings (lengths n, m) back to the originals."""
    pts = a.points
    out = [(n - pts[-1][0], m - pts[-1][1])]
    for t in range(len(pts) - 2, -1, -1):
        (x0, y0), (x1, y1) = pts[t], pts[t + 1]
        dx, dy = x1 - x0, y1 - y0
        sx, sy = (1, 1) if dx == dy else ((1, 0) if dx > dy else (0, 1))
        q = (n - (x0 + sx), m - (y0 + sy))
        if q != out[-1]:
            out.append(q)
        out.append((n - x0, m - y0))
    dedup = [out[0]]
    for p in out[1:]:
        if p != dedup[-1]:
            dedup.append(p)
    return Alignment(dedup)


def mirror_to_upper(a: Alignment) -> Alignment:
    """Reflect the parts of a self-alignment below the main diagonal."""
    return Alignment([(min(x, y), max(x, y)) for x, y in a.points])


def is_self_alignment(a: Alignment) -> bool:
    return all(not (x == y and (nx, ny) == (x + 1, y + 1))
               for (x, y), (nx, ny) in zip(a.expand(), a.expand()[1:]))


# ---------------------------------------------------------------------------
# furthest-reaching search
#
# Row e of L holds, per diagonal, the furthest x reachable with cost <= e
# (-1 when unreachable); T holds how that point was entered.  The compiled
# kernels serve fragments of static texts, the Python twins serve ropes.

LV_CAP = 2048


@nb.njit(cache=True)
def _sed_kernel(c, h1, h2, s, n, pw1, pw2, kmax, rev, L, T):
    L[0, 0] = 0
    T[0, 0] = _START
    e = 0
    while L[e, 0] < n and e < kmax:
        e += 1
        top = min(e, n)
        for d in range(0, top + 1):
            best = L[e - 1, d]
            how = _STAY
            if d == 0:
                p = L[e - 1, 1]
                if p >= 0 and p + 1 > best:
                    best = p + 1
                    how = _DEL
                L[e, 0] = best
                T[e, 0] = how
                continue
            p = L[e - 1, d]
            if p >= 0 and p + 1 + d <= n and p + 1 > best:
                best = p + 1
                how = _SUB
            p = L[e - 1, d + 1]
            if p >= 0 and p + 1 > best:
                best = p + 1
                how = _DEL
            p = L[e - 1, d - 1]
            if p >= 0 and p + d <= n and p > best:
                best = p
                how = _INS
            if best >= 0 and best + d < n:
                lim = n - best - d
                if rev:
                    ln = nb_lcs(c, h1, h2, s + n - best, c, h1, h2, s + n - best - d, lim, pw1, pw2)
                else:
                    ln = nb_lcp(c, h1, h2, s + best, c, h1, h2, s + best + d, lim, pw1, pw2)
                if ln < 0:
                    return e, -1
                best += ln
            L[e, d] = best
            T[e, d] = how
    return e, 0


def _sed_rows_py(X: Fragment, kmax: int, rev: bool, L: np.ndarray, T: np.ndarray) -> int:
    n = len(X)

    def slide(x: int, d: int) -> int:
        if x + d >= n:
            return x
        if rev:
            return x + lcp_reverse(X.extract(0, n - x), X.extract(0, n - x - d))
        return x + lcp(X.extract(x, n), X.extract(x + d, n))

    L[0, 0] = 0
    T[0, 0] = _START
    e = 0
    while L[e, 0] < n and e < kmax:
        e += 1
        prev = L[e - 1]
        for d in range(0, min(e, n) + 1):
            best, how = int(prev[d]), _STAY
            if d == 0:
                p = int(prev[1])
                if p >= 0 and p + 1 > best:
                    best, how = p + 1, _DEL
                L[e, 0], T[e, 0] = best, how
                continue
            p = int(prev[d])
            if p >= 0 and p + 1 + d <= n and p + 1 > best:
                best, how = p + 1, _SUB
            p = int(prev[d + 1])
            if p >= 0 and p + 1 > best:
                best, how = p + 1, _DEL
            p = int(prev[d - 1])
            if p >= 0 and p + d <= n and p > best:
                best, how = p, _INS
            L[e, d] = slide(best, d) if best >= 0 else NEG
            T[e, d] = how
    return e


def _sed_lv(X: Fragment, kmax: int, rev: bool = False):
    """Rows of the self-alignment search, stopping at e = kmax or at (|X|,|X|)."""
    n = len(X)
    kcap = max(1, min(kmax, 2 * n))
    L = np.full((kcap + 1, kcap + 3), NEG, dtype=np.int32)
    T = np.zeros((kcap + 1, kcap + 3), dtype=np.int8)
    view = static_view(X)
    if view is not None and kcap <= LV_CAP:
        c, h1, h2, s = view
        pw1, pw2 = power_tables(len(c))
        e, status = _sed_kernel(c, h1, h2, s, n, pw1, pw2, kcap, rev, L, T)
        if status < 0:
            raise FingerprintCollision("boundary character check failed")
    else:
        e = _sed_rows_py(X, kcap, rev, L, T)
    bump("sed.lv_rows", e)
    return e, L, T


def _trace(L: np.ndarray, T: np.ndarray, e: int, d: int, off: int) -> Alignment:
    """Breakpoints of the path ending at the furthest point of (e, d)."""
    x = int(L[e, d + off])
    pts = [(x, x + d)]
    while True:
        how = T[e, d + off]
        if how == _START:
            break
        if how == _STAY:
            e -= 1
            continue
        if how == _SUB:
            xs = int(L[e - 1, d + off]) + 1
            bp = (xs - 1, xs - 1 + d)
        elif how == _DEL:
            xs = int(L[e - 1, d + 1 + off]) + 1
            bp = (xs - 1, xs + d)
            d += 1
        else:
            xs = int(L[e - 1, d - 1 + off])
            bp = (xs, xs + d - 1)
            d -= 1
        e -= 1
        pts.append(bp)
    if pts[-1] != (0, 0):
        pts.append((0, 0))
    pts.reverse()
    dedup = [pts[0]]
    for p in pts[1:]:
        if p != dedup[-1]:
            dedup.append(p)
    return Alignment(dedup)


def sed_leq(x, k: int) -> Optional[Tuple[int, Alignment]]:
    """sed(X) with an optimal self-alignment, or None when sed(X) > k."""
    if k < 1:
        raise PreconditionError("sed_leq needs k >= 1")
    X = as_fragment(x)
    if len(X) == 0:
        return 0, Alignment([(0, 0)])
    e, L, T = _sed_lv(X, k)
    if L[e, 0] < len(X):
        return None
    return e, _trace(L, T, e, 0, 0)


def sed(x) -> int:
    """Exact self-edit distance (sed(X) <= 2|X| always)."""
    X = as_fragment(x)
    res = sed_leq(X, max(1, 2 * len(X)))
    assert res is not None
    return res[0]


def sed_bounds(x, k: int) -> Tuple[int, Alignment, int, Alignment]:
    """Longest prefix X[0..i) and longest suffix X[j..|X|) with sed at most k.

    The alignments are self-alignments of the prefix and of the suffix in
    local coordinates.
    """
    if k < 1:
        raise PreconditionError("sed_bounds needs k >= 1")
    X = as_fragment(x)
    n = len(X)
    if n == 0:
        empty = Alignment([(0, 0)])
        return 0, empty, 0, empty
    e, L, T = _sed_lv(X, k)
    i = int(L[e, 0])
    pa = _trace(L, T, e, 0, 0)
    e, L, T = _sed_lv(X, k, rev=True)
    s = int(L[e, 0])
    sa = reverse_alignment(_trace(L, T, e, 0, 0), s, s)
    return i, pa, n - s, sa


def sed_prefix_bound(x, k: int) -> int:
    """Largest i with sed(X[0..i)) <= k."""
    X = as_fragment(x)
    if len(X) == 0:
        return 0
    e, L, _ = _sed_lv(X, max(k, 1))
    return int(L[e, 0])


def sed_suffix_bound(x, k: int) -> int:
    """Smallest j with sed(X[j..|X|)) <= k."""
    X = as_fragment(x)
    if len(X) == 0:
        return 0
    e, L, _ = _sed_lv(X, max(k, 1), rev=True)
    return len(X) - int(L[e, 0])


# ---------------------------------------------------------------------------
# Landau-Vishkin


@nb.njit(cache=True)
def _lv_kernel(ca, ha1, ha2, sa, n, cb, hb1, hb2, sb, m, pw1, pw2, kmax, L, T):
    off = kmax + 1
    target = m - n
    x = 0
    if n > 0 and m > 0:
        x = nb_lcp(ca, ha1, ha2, sa, cb, hb1, hb2, sb, min(n, m), pw1, pw2)
        if x < 0:
            return 0, -1
    L[0, off] = x
    T[0, off] = _START
    e = 0
    while L[e, target + off] < n:
        if e >= kmax:
            return e, 1
        e += 1
        lo = max(-e, -n)
        hi = min(e, m)
        for d in range(lo, hi + 1):
            best = L[e - 1, d + off]
            how = _STAY
            p = L[e - 1, d + off]
            if p >= 0 and p + 1 <= n and p + 1 + d <= m and p + 1 > best:
                best = p + 1
                how = _SUB
            p = L[e - 1, d + 1 + off]
            if p >= 0 and p + 1 <= n and p + 1 > best:
                best = p + 1
                how = _DEL
            p = L[e - 1, d - 1 + off]
            if p >= 0 and p + d <= m and p > best:
                best = p
                how = _INS
            if best < 0:
                continue
            if best < n and best + d < m:
                ln = nb_lcp(ca, ha1, ha2, sa + best, cb, hb1, hb2, sb + best + d,
                            min(n - best, m - best - d), pw1, pw2)
                if ln < 0:
                    return e, -1
                best += ln
            L[e, d + off] = best
            T[e, d + off] = how
    return e, 0


def _lv_rows_py(X: Fragment, Y: Fragment, kmax: int, L: np.ndarray, T: np.ndarray) -> Tuple[int, int]:
    n, m = len(X), len(Y)
    off = kmax + 1
    target = m - n

    def slide(x: int, d: int) -> int:
        if x >= n or x + d >= m:
            return x
        return x + lcp(X.extract(x, n), Y.extract(x + d, m))

    L[0, off] = slide(0, 0)
    T[0, off] = _START
    e = 0
    while L[e, target + off] < n:
        if e >= kmax:
            return e, 1
        e += 1
        prev = L[e - 1]
        for d in range(max(-e, -n), min(e, m) + 1):
            best, how = int(prev[d + off]), _STAY
            p = int(prev[d + off])
            if p >= 0 and p + 1 <= n and p + 1 + d <= m and p + 1 > best:
                best, how = p + 1, _SUB
            p = int(prev[d + 1 + off])
            if p >= 0 and p + 1 <= n and p + 1 > best:
                best, how = p + 1, _DEL
            p = int(prev[d - 1 + off])
            if p >= 0 and p + d <= m and p > best:
                best, how = p, _INS
            if best < 0:
                continue
            L[e, d + off] = slide(best, d)
            T[e, d + off] = how
    return e, 0


def _lv(X: Fragment, Y: Fragment, kmax: int):
    """(e, L, T, off) or None when ed(X, Y) > kmax."""
    n, m = len(X), len(Y)
    if abs(n - m) > kmax:
        return None
    L = np.full((kmax + 1, 2 * kmax + 3), NEG, dtype=np.int32)
    T = np.zeros((kmax + 1, 2 * kmax + 3), dtype=np.int8)
    vx, vy = static_view(X), static_view(Y)
    if vx is not None and vy is not None:
        pw1, pw2 = power_tables(max(len(vx[0]), len(vy[0])))
        e, status = _lv_kernel(vx[0], vx[1], vx[2], vx[3], n, vy[0], vy[1], vy[2], vy[3], m,
                               pw1, pw2, kmax, L, T)
        if status < 0:
            raise FingerprintCollision("boundary character check failed")
    else:
        e, status = _lv_rows_py(X, Y, kmax, L, T)
    bump("lv.rows", e)
    if status == 1:
        return None
    return e, L, T, kmax + 1


def lv_ed_leq(x, y, k: int) -> Optional[Tuple[int, Alignment]]:
    """Unweighted edit distance with an optimal alignment, or None when it exceeds k."""
    X, Y = as_fragment(x), as_fragment(y)
    k = max(0, min(k, len(X) + len(Y)))
    if k > LV_CAP:
        res = banded_dp(X, Y, WeightFunction.unit(), k)
        bump("lv.banded_fallback")
        return res
    res = _lv(X, Y, k)
    if res is None:
        return None
    e, L, T, off = res
    return e, _trace(L, T, e, len(Y) - len(X), off)


def lv_ed(x, y) -> Tuple[int, Alignment]:
    """Unweighted edit distance and an optimal alignment in O(k^2) lcp queries.

    The threshold grows geometrically; past LV_CAP the banded DP takes over.
    """
    X, Y = as_fragment(x), as_fragment(y)
    top = len(X) + len(Y)
    k = max(32, abs(len(X) - len(Y)))
    while True:
        res = lv_ed_leq(X, Y, min(k, top))
        if res is not None:
            return res
        k *= 4


# ---------------------------------------------------------------------------
# decomposition

MODES = {"static": (1, 1, 3), "dynamic": (3, 3, 9)}


@dataclass
class Decomposition:
    """Phrases X_i = X[x_i..x_{i+1}) with Y_i = Y[y_i..y'_{i+1}).

    ``ys[i]`` is y_i and ``yps[i]`` is y'_i, both for i in [0..m].
    """

    X: Fragment
    Y: Fragment
    k: int
    mode: str
    xs: List[int]
    ys: List[int]
    yps: List[int]
    F: List[int] = field(default_factory=list)

    @property
    def m(self) -> int:
        return len(self.xs) - 1

    def x_phrase(self, i: int) -> Fragment:
        return self.X.extract(self.xs[i], self.xs[i + 1])

    def y_phrase(self, i: int) -> Fragment:
        return self.Y.extract(self.ys[i], self.yps[i + 1])

    def geometry(self, i: int) -> Tuple[int, int, int, int]:
        """(|X_i|, |V_i|-1, local y_{i+1}, |Y_i|): what D_{i,i+1} depends on."""
        y0 = self.ys[i]
        return (self.xs[i + 1] - self.xs[i], self.yps[i] - y0, self.ys[i + 1] - y0, self.yps[i + 1] - y0)

    def rep(self, i: int) -> int:
        """The largest j in F with j <= i; phrase i equals phrase rep(i)."""
        import bisect

        return self.F[bisect.bisect_right(self.F, i) - 1]


def phrase_cuts(n: int, lo: int) -> List[int]:
    """Cut [0..n) into phrases of length in [lo, 2lo) at stride floor(3lo/2)."""
    hi = 2 * lo
    if n < hi:
        return [0, n]
    s = (3 * lo) // 2
    q, rem = divmod(n, s)
    lens = [s] * q
    if rem >= lo:
        lens.append(rem)
    elif rem:
        last = lens.pop() + rem
        if last < hi:
            lens.append(last)
        else:
            lens.extend([last // 2, last - last // 2])
    cuts = [0]
    for ln in lens:
        cuts.append(cuts[-1] + ln)
    return cuts


def decompose(x, y, k: int, mode: str = "static", check: bool = True) -> Decomposition:
    """Phrase decomposition with the set F of phrases that differ from their predecessor."""
    X, Y = as_fragment(x), as_fragment(y)
    if mode not in MODES:
        raise ValueError(f"unknown decomposition mode {mode!r}")
    a, c, c2 = MODES[mode]
    if k < 1:
        raise PreconditionError("decompose needs k >= 1")
    if check:
        if k > len(X) or sed_leq(X, k) is None:
            raise PreconditionError("decompose needs sed(X) <= k <= |X|")
        if lv_ed_leq(X, Y, k) is None:
            raise PreconditionError("decompose needs ed(X, Y) <= k")
    n, ny = len(X), len(Y)
    xs = phrase_cuts(n, a * k)
    m = len(xs) - 1
    ys = [max(xi - c * k, 0) for xi in xs]
    yps = [min(xi + c2 * k, ny) for xi in xs]
    ys[m] = ny
    yps[0] = 0
    # every y_i must precede y'_{i+1}; otherwise the instance is degenerate
    for i in range(m):
        if ys[i] > yps[i + 1]:
            raise PreconditionError("fragment window is empty; ed(X, Y) exceeds k")
    dec = Decomposition(X, Y, k, mode, xs, ys, yps)
    F = {0, 1} | set(range(max(m - 4, 0), m))
    prev = None
    for i in range(m):
        key = (dec.geometry(i), dec.x_phrase(i).fingerprint(), dec.y_phrase(i).fingerprint())
        if key != prev:
            F.add(i)
        prev = key
    bump("decompose.fingerprints", 2 * m)
    dec.F = sorted(f for f in F if f < m)
    return dec
