"""Core-sparse Monge matrices: condensed form, oracle, products, capping.

Public indices are 1-based, matching the usual matrix notation; the dense
numpy arrays used internally are 0-based.  A matrix is represented by its
first row, first column and core, the list of non-zero density entries

    dA[i, j] = A[i, j+1] + A[i+1, j] - A[i, j] - A[i+1, j+1]

which are all positive for a Monge matrix.  The top-left anchored
reconstruction is A[i, j] = A[1, j] + A[i, 1] - A[1, 1] - sum(dA[<i, <j]).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, NamedTuple, Optional, Sequence, Tuple

import numba as nb
import numpy as np

from .counters import bump

_INT = np.int64
_OVERFLOW_GUARD = 1 << 60


class CoreEntry(NamedTuple):
    row: int
    col: int
    value: int


@dataclass(frozen=True)
class CondensedMonge:
    p: int
    q: int
    first_row: Tuple[int, ...]
    first_col: Tuple[int, ...]
    core: Tuple[CoreEntry, ...] = field(default_factory=tuple)


# ---------------------------------------------------------------------------
# dense helpers


def density(m: np.ndarray) -> np.ndarray:
    """(p-1) x (q-1) density array of a dense matrix (0-based)."""
    m = np.asarray(m, dtype=_INT)
    return m[:-1, 1:] + m[1:, :-1] - m[:-1, :-1] - m[1:, 1:]


def is_monge(m: np.ndarray) -> bool:
    m = np.asarray(m)
    if m.shape[0] < 2 or m.shape[1] < 2:
        return True
    return bool((density(m) >= 0).all())


def k_equivalent(a: np.ndarray, b: np.ndarray, k: int) -> bool:
    """Entrywise rule: values agree wherever either side is at most k."""
    a = np.asarray(a, dtype=_INT)
    b = np.asarray(b, dtype=_INT)
    if a.shape != b.shape:
        return False
    return bool((np.minimum(a, k + 1) == np.minimum(b, k + 1)).all())


def _prefix2d(d: np.ndarray, p: int, q: int) -> np.ndarray:
    s = np.zeros((p, q), dtype=_INT)
    if p > 1 and q > 1:
        s[1:, 1:] = np.cumsum(np.cumsum(d, axis=0), axis=1)
    return s


def _reconstruct(first_row, first_col, rows, cols, vals, p, q) -> np.ndarray:
    d = np.zeros((max(p - 1, 0), max(q - 1, 0)), dtype=_INT)
    if len(vals):
        np.add.at(d, (np.asarray(rows) - 1, np.asarray(cols) - 1), np.asarray(vals, dtype=_INT))
    fr = np.asarray(first_row, dtype=_INT)
    fc = np.asarray(first_col, dtype=_INT)
    return fr[None, :] + fc[:, None] - fr[0] - _prefix2d(d, p, q)


def _reconstruct_bottom_left(first_col, last_row, d, p, q) -> np.ndarray:
    """C[i,j] = C[i,1] + C[p,j] - C[p,1] + sum(d[i..p)[1..j)) (0-based d)."""
    fc = np.asarray(first_col, dtype=_INT)
    lr = np.asarray(last_row, dtype=_INT)
    s = np.zeros((p, q), dtype=_INT)
    if p > 1 and q > 1:
        # suffix over rows, prefix over columns
        t = np.cumsum(np.cumsum(d[::-1, :], axis=0)[::-1, :], axis=1)
        s[:-1, 1:] = t
    return fc[:, None] + lr[None, :] - lr[0] + s


# ---------------------------------------------------------------------------
# range-sum index


class RangeIndex:
    """Static merge-sort tree over core points answering weighted range sums.

    Points are sorted by row; each dyadic block of that order keeps its
    columns sorted together with prefix sums, so a query touches O(log n)
    blocks with one binary search each.
    """

    def __init__(self, rows: np.ndarray, cols: np.ndarray, vals: np.ndarray):
        order = np.lexsort((cols, rows))
        self.rows = np.asarray(rows, dtype=_INT)[order]
        cols = np.asarray(cols, dtype=_INT)[order]
        vals = np.asarray(vals, dtype=_INT)[order]
        self.n = n = len(self.rows)
        pos = np.arange(n)
        self.level_cols: List[np.ndarray] = []
        self.level_pref: List[np.ndarray] = []
        level = 0
        while True:
            o = np.lexsort((cols, pos >> level))
            lc = cols[o]
            pref = np.zeros(n + 1, dtype=_INT)
            np.cumsum(vals[o], out=pref[1:])
            self.level_cols.append(lc)
            self.level_pref.append(pref)
            if (1 << level) >= n:
                break
            level += 1

    def _block(self, level: int, idx: int, c: int, d: int) -> int:
        s = idx << level
        e = min(s + (1 << level), self.n)
        lc = self.level_cols[level]
        lo = s + int(np.searchsorted(lc[s:e], c, "left"))
        hi = s + int(np.searchsorted(lc[s:e], d, "left"))
        pref = self.level_pref[level]
        return int(pref[hi] - pref[lo])

    def query(self, a: int, b: int, c: int, d: int) -> int:
        """Sum of values with row in [a, b) and col in [c, d)."""
        if self.n == 0 or a >= b or c >= d:
            return 0
        lo = int(np.searchsorted(self.rows, a, "left"))
        hi = int(np.searchsorted(self.rows, b, "left"))
        total = 0
        level = 0
        while lo < hi:
            if lo & 1:
                total += self._block(level, lo, c, d)
                lo += 1
            if hi & 1:
                hi -= 1
                total += self._block(level, hi, c, d)
            lo >>= 1
            hi >>= 1
            level += 1
        bump("range_index.query")
        return total


# ---------------------------------------------------------------------------
# CMO


class CMO:
    """Immutable core-based matrix oracle.

    Either a dense array or a condensed representation is supplied; the
    other form is derived lazily.  Matrices built by this package always
    carry both once they have been used by a product.
    """

    __slots__ = ("p", "q", "_dense", "_fr", "_fc", "_core", "_index")

    def __init__(self, p, q, dense=None, first_row=None, first_col=None, core=None):
        self.p = int(p)
        self.q = int(q)
        self._dense = dense
        self._fr = first_row
        self._fc = first_col
        self._core = core
        self._index: Optional[RangeIndex] = None

    @classmethod
    def from_dense(cls, m, check: bool = True) -> "CMO":
        arr = np.array(m, dtype=_INT, copy=True)
        if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
            raise ValueError("matrix must be two-dimensional and non-empty")
        if check:
            if np.abs(arr).max(initial=0) >= _OVERFLOW_GUARD:
                raise OverflowError("matrix entry exceeds the 64-bit safety range")
            if not is_monge(arr):
                raise ValueError("matrix is not Monge")
        arr.setflags(write=False)
        return cls(arr.shape[0], arr.shape[1], dense=arr)

    # -- derived forms

    def dense(self) -> np.ndarray:
        if self._dense is None:
            r, c, v = self.core_arrays()
            d = _reconstruct(self._fr, self._fc, r, c, v, self.p, self.q)
            d.setflags(write=False)
            self._dense = d
        return self._dense

    def core_arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Core as three 1-based arrays (rows, cols, values), row-major order."""
        if self._core is None:
            d = density(self._dense) if self.p > 1 and self.q > 1 else np.zeros((0, 0), _INT)
            if d.size and d.min() < 0:
                raise ValueError("matrix is not Monge")
            rr, cc = np.nonzero(d)
            self._core = (rr.astype(_INT) + 1, cc.astype(_INT) + 1, d[rr, cc].astype(_INT))
        return self._core

    @property
    def first_row(self) -> np.ndarray:
        if self._fr is None:
            self._fr = np.asarray(self._dense[0, :], dtype=_INT)
        return self._fr

    @property
    def first_col(self) -> np.ndarray:
        if self._fc is None:
            self._fc = np.asarray(self._dense[:, 0], dtype=_INT)
        return self._fc

    @property
    def delta(self) -> int:
        return int(len(self.core_arrays()[2]))

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.p, self.q)

    # -- queries

    def entry(self, i: int, j: int) -> int:
        if not (1 <= i <= self.p and 1 <= j <= self.q):
            raise IndexError(f"entry ({i},{j}) outside {self.p}x{self.q}")
        if self._dense is not None:
            return int(self._dense[i - 1, j - 1])
        fr, fc = self.first_row, self.first_col
        return int(fr[j - 1] + fc[i - 1] - fr[0] - self.core_range_sum(1, i, 1, j))

    def core_range_sum(self, a: int, b: int, c: int, d: int) -> int:
        """Sum of densities over rows [a..b) and columns [c..d) (1-based)."""
        if not (1 <= a <= b <= self.p and 1 <= c <= d <= self.q):
            raise IndexError("range outside the density matrix")
        if self._index is None:
            self._index = RangeIndex(*self.core_arrays())
        return self._index.query(a, b, c, d)

    def core_list(self) -> List[CoreEntry]:
        r, c, v = self.core_arrays()
        return [CoreEntry(int(a), int(b), int(x)) for a, b, x in zip(r, c, v)]

    def condensed(self) -> CondensedMonge:
        return CondensedMonge(
            self.p,
            self.q,
            tuple(int(x) for x in self.first_row),
            tuple(int(x) for x in self.first_col),
            tuple(self.core_list()),
        )

    def row(self, i: int) -> np.ndarray:
        return np.asarray(self.dense()[i - 1, :])

    def col(self, j: int) -> np.ndarray:
        return np.asarray(self.dense()[:, j - 1])

    def __repr__(self) -> str:
        return f"CMO({self.p}x{self.q}, delta={self.delta})"


def dump_cmo(c: CMO) -> str:
    """Debug text form: "p q", the two border vectors, then "r c v" lines."""
    lines = [f"{c.p} {c.q}", " ".join(map(str, c.first_row)), " ".join(map(str, c.first_col))]
    lines += [f"{e.row} {e.col} {e.value}" for e in c.core_list()]
    return "\n".join(lines) + "\n"


def build_cmo(m: CondensedMonge, debug: bool = False) -> CMO:
    """Build the oracle for a condensed Monge matrix."""
    p, q = int(m.p), int(m.q)
    if p <= 0 or q <= 0:
        raise ValueError("matrix dimensions must be positive")
    if len(m.first_row) != q or len(m.first_col) != p:
        raise ValueError("border vectors do not match the dimensions")
    if m.first_row[0] != m.first_col[0]:
        raise ValueError("first_row[1] must equal first_col[1]")
    rows, cols, vals = [], [], []
    for e in sorted(m.core, key=lambda e: (e.row, e.col)):
        if not (1 <= e.row < p and 1 <= e.col < q):
            raise ValueError(f"core entry {e} out of bounds")
        if e.value <= 0:
            raise ValueError(f"core entry {e} has non-positive value")
        if rows and rows[-1] == e.row and cols[-1] == e.col:
            raise ValueError(f"duplicate core position ({e.row},{e.col})")
        rows.append(e.row)
        cols.append(e.col)
        vals.append(e.value)
    core = (np.array(rows, _INT), np.array(cols, _INT), np.array(vals, _INT))
    out = CMO(p, q, first_row=np.array(m.first_row, _INT), first_col=np.array(m.first_col, _INT), core=core)
    if debug and p * q <= 64 * 64:
        if not is_monge(out.dense()):
            raise ValueError("condensed matrix does not reconstruct to a Monge matrix")
    return out


def cmo_query(c: CMO, kind: str, *args):
    """Dispatch for the three oracle queries: entry, core_range_sum, core_list."""
    if kind == "entry":
        return c.entry(*args)
    if kind == "core_range_sum":
        return c.core_range_sum(*args)
    if kind == "core_list":
        return c.core_list()
    raise ValueError(f"unknown query {kind!r}")


# ---------------------------------------------------------------------------
# SMAWK


def smawk(rows: int, cols: int, oracle: Callable[[int, int], int]) -> List[int]:
    """Leftmost row-minimum positions of a totally monotone matrix.

    Args:
        rows: number of rows.
        cols: number of columns.
        oracle: entry access, called with 1-based (i, j).

    Returns:
        1-based column of the leftmost minimum of every row.
    """
    result: dict = {}

    def solve(rs: Sequence[int], cs: Sequence[int]) -> None:
        if not rs:
            return
        stack: List[int] = []
        for c in cs:
            while stack and oracle(rs[len(stack) - 1], stack[-1]) > oracle(rs[len(stack) - 1], c):
                stack.pop()
            if len(stack) < len(rs):
                stack.append(c)
        solve(rs[1::2], stack)
        ci = 0
        for t in range(0, len(rs), 2):
            r = rs[t]
            last = stack[-1] if t == len(rs) - 1 else result[rs[t + 1]]
            best, bv = stack[ci], oracle(r, stack[ci])
            while stack[ci] != last:
                ci += 1
                v = oracle(r, stack[ci])
                if v < bv:
                    best, bv = stack[ci], v
            result[r] = best

    solve(list(range(1, rows + 1)), list(range(1, cols + 1)))
    return [result[i] for i in range(1, rows + 1)]


@nb.njit(cache=True)
def _smawk_product_row(A, B, i, rows, cols, out):
    # row minima of N[k, j] = A[i, j] + B[j, k] over k in rows, j in cols
    n = rows.size
    if n == 0:
        return
    st = np.empty(n, np.int64)
    top = 0
    for t in range(cols.size):
        c = cols[t]
        while top > 0:
            r = rows[top - 1]
            s = st[top - 1]
            if A[i, s] + B[s, r] > A[i, c] + B[c, r]:
                top -= 1
            else:
                break
        if top < n:
            st[top] = c
            top += 1
    red = st[:top].copy()
    odd = rows[1::2].copy()
    _smawk_product_row(A, B, i, odd, red, out)
    ci = 0
    for t in range(0, n, 2):
        r = rows[t]
        if t == n - 1:
            last = red[top - 1]
        else:
            last = out[rows[t + 1]]
        best = red[ci]
        bv = A[i, best] + B[best, r]
        while red[ci] != last:
            ci += 1
            v = A[i, red[ci]] + B[red[ci], r]
            if v < bv:
                bv = v
                best = red[ci]
        out[r] = best


@nb.njit(cache=True)
def _minplus_kernel(A, B):
    p, q = A.shape
    r = B.shape[1]
    C = np.empty((p, r), np.int64)
    W = np.empty((p, r), np.int64)
    ks = np.arange(r)
    js = np.arange(q)
    out = np.empty(r, np.int64)
    for i in range(p):
        _smawk_product_row(A, B, i, ks, js, out)
        for k in range(r):
            j = out[k]
            W[i, k] = j
            C[i, k] = A[i, j] + B[j, k]
    return C, W


def minplus_dense(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Min-plus product of two dense Monge matrices with leftmost witnesses (0-based)."""
    a = np.ascontiguousarray(a, dtype=_INT)
    b = np.ascontiguousarray(b, dtype=_INT)
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"inner dimension mismatch: {a.shape} x {b.shape}")
    bump("minplus.calls")
    bump("minplus.oracle_cells", a.shape[0] * (a.shape[1] + b.shape[1]))
    return _minplus_kernel(a, b)


def brute_minplus(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=_INT)
    b = np.asarray(b, dtype=_INT)
    return (a[:, :, None] + b[None, :, :]).min(axis=1)


def minplus(a: CMO, b: CMO) -> CMO:
    """Exact product A (x) B of two Monge matrices."""
    if a.q != b.p:
        raise ValueError(f"inner dimension mismatch: {a.shape} x {b.shape}")
    c, _ = minplus_dense(a.dense(), b.dense())
    c.setflags(write=False)
    return CMO(a.p, b.q, dense=c)


# ---------------------------------------------------------------------------
# transforms


def transpose(c: CMO) -> CMO:
    d = c.dense().T.copy()
    d.setflags(write=False)
    return CMO(c.q, c.p, dense=d)


def submatrix(c: CMO, a: int, b: int, cc: int, dd: int) -> CMO:
    """Rows [a..b) and columns [cc..dd), 1-based half-open."""
    if not (1 <= a < b <= c.p + 1 and 1 <= cc < dd <= c.q + 1):
        raise ValueError("submatrix range out of bounds or empty")
    d = c.dense()[a - 1 : b - 1, cc - 1 : dd - 1].copy()
    d.setflags(write=False)
    return CMO(b - a, dd - cc, dense=d)


def add(c: CMO, other: CMO) -> CMO:
    if c.shape != other.shape:
        raise ValueError("dimension mismatch in add")
    d = c.dense() + other.dense()
    d.setflags(write=False)
    return CMO(c.p, c.q, dense=d)


def stitch(c: CMO, other: CMO, check: bool = True) -> CMO:
    """Horizontal concatenation (A | B); the seam must keep the matrix Monge."""
    if c.p != other.p:
        raise ValueError("row counts differ in stitch")
    d = np.hstack([c.dense(), other.dense()])
    if check and c.p > 1:
        a_last = c.dense()[:, -1]
        b_first = other.dense()[:, 0]
        seam = b_first[:-1] + a_last[1:] - a_last[:-1] - b_first[1:]
        if (seam < 0).any():
            raise ValueError("stitch produces a non-Monge seam")
    d.setflags(write=False)
    return CMO(c.p, c.q + other.q, dense=d)


def vstack(top: CMO, bottom: CMO, check: bool = True) -> CMO:
    return transpose(stitch(transpose(top), transpose(bottom), check=check))


def cmo_transform(c: CMO, kind: str, *args) -> CMO:
    """Dispatch for transpose, submatrix(a,b,cc,dd), add(other), stitch(other)."""
    if kind == "transpose":
        return transpose(c)
    if kind == "submatrix":
        return submatrix(c, *args)
    if kind == "add":
        return add(c, *args)
    if kind == "stitch":
        return stitch(c, *args)
    raise ValueError(f"unknown transform {kind!r}")


# ---------------------------------------------------------------------------
# capping


def _reduce_simple(f: np.ndarray, k: int) -> np.ndarray:
    """Drop deep core entries of a Monge matrix with zero left column and
    zero bottom row; the result is k-equivalent with a small core."""
    p, q = f.shape
    if p < 2 or q < 2:
        return f.copy()
    d = density(f)
    # S[i', j'] = sum(d[i'..p)[1..j']) inclusive of column j' (0-based here)
    suf = np.cumsum(np.cumsum(d[::-1, :], axis=0)[::-1, :], axis=1)
    keep = (d > 0) & (suf - d <= k)
    d2 = np.where(keep, d, 0)
    return _reconstruct_bottom_left(np.zeros(p, _INT), np.zeros(q, _INT), d2, p, q)


def cap_dense(c: np.ndarray, k: int) -> np.ndarray:
    c = np.asarray(c, dtype=_INT)
    if k < 1:
        raise ValueError("cap threshold k must be at least 1")
    if (c < 0).any():
        raise ValueError("cap requires non-negative entries")
    p, q = c.shape
    r = c.min(axis=1)
    d = c - r[:, None]
    cm = d.min(axis=0)
    e = d - cm[None, :]
    z = np.argmax(e == 0, axis=1)
    j = np.arange(q)[None, :]
    f = np.where(j > z[:, None], e, 0)
    g = np.where(j < z[:, None], e, 0)
    f2 = _reduce_simple(f, k)
    g2 = _reduce_simple(np.ascontiguousarray(g.T), k).T
    return f2 + g2 + r[:, None] + cm[None, :]


def cap(c: CMO, k: int) -> CMO:
    """k-equivalent Monge matrix whose core is O(N sqrt k), N = p + q."""
    out = cap_dense(c.dense(), k)
    out.setflags(write=False)
    bump("cap.calls")
    return CMO(c.p, c.q, dense=out)


def capped_minplus(a: CMO, b: CMO, k: int) -> CMO:
    return cap(minplus(a, b), k)


def capped_stitch_dense(a: np.ndarray, b_prime: np.ndarray, k: int, jbar: int = 1, check: bool = False) -> np.ndarray:
    """Stack an exact top block over a k-equivalent bottom block, repairing
    the seam so the result stays Monge and k-equivalent to the exact stack.

    Args:
        a: exact top block, n1 x m.
        b_prime: bottom block, k-equivalent to the exact one.
        k: threshold.
        jbar: 1-based column up to which the first row of b_prime is exact.
        check: verify the monotonicity hypotheses visible from the inputs.
    """
    a = np.asarray(a, dtype=_INT)
    b_prime = np.asarray(b_prime, dtype=_INT)
    if a.shape[1] != b_prime.shape[1]:
        raise ValueError("column counts differ in capped_stitch")
    n1, m = a.shape
    cbar = np.vstack([a, b_prime])
    n = cbar.shape[0]
    if m < 2:
        return cbar
    top_last = a[-1, :]
    bot_first = b_prime[0, :]
    seam = top_last[1:] + bot_first[:-1] - top_last[:-1] - bot_first[1:]
    if check:
        # the hypotheses concern the exact matrix; the first row of b_prime
        # is only known where it does not exceed k (or up to jbar)
        sub = a[:, jbar - 1 :]
        row = b_prime[0, jbar - 1 :]
        known = (row <= k) | (np.arange(jbar - 1, m) < jbar)
        bad = (np.diff(sub, axis=0) > 0).any() or (np.diff(sub, axis=1) < 0).any()
        bad = bad or bool(((row > sub[-1]) & known).any())
        bad = bad or bool(((row[:-1] > row[1:]) & known[1:]).any())
        if bad:
            raise ValueError("capped_stitch monotonicity hypothesis violated")
    neg = np.nonzero(seam < 0)[0]
    if len(neg) == 0:
        return cbar
    jstar = int(neg[0])  # 0-based density column
    d = density(cbar)
    d[n1 - 1, jstar:] = 0
    d[n1 - 1, jstar] = k + 1 + cbar[n - 1, 0]
    return _reconstruct_bottom_left(cbar[:, 0], cbar[n - 1, :], d, n, m)


def capped_stitch(a: CMO, b_prime: CMO, k: int, jbar: int = 1, check: bool = False) -> CMO:
    out = capped_stitch_dense(a.dense(), b_prime.dense(), k, jbar, check)
    out.setflags(write=False)
    return CMO(out.shape[0], out.shape[1], dense=out)


def cap_alpha(c: CMO, k: int) -> float:
    """Measured constant delta / (N sqrt k) with N = p + q."""
    return c.delta / ((c.p + c.q) * math.sqrt(max(k, 1)))


def bounded_difference(m: np.ndarray) -> int:
    """Largest absolute difference between horizontally or vertically adjacent entries."""
    m = np.asarray(m, dtype=_INT)
    best = 0
    if m.shape[0] > 1:
        best = max(best, int(np.abs(np.diff(m, axis=0)).max()))
    if m.shape[1] > 1:
        best = max(best, int(np.abs(np.diff(m, axis=1)).max()))
    return best
