"""Persistent hierarchical alignment data structure over SLP symbol pairs.

A node for the pair (A, B) stores the boundary matrix of the alignment
graph of exp(A) onto exp(B) and, unless both symbols are terminals, the two
nodes obtained by splitting the longer symbol (A on ties).  Nodes are
immutable; mega-edits create new nodes and reuse every node of the old
structure whose pair survives in the new one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from . import monge
from .align_graph import (
    Alignment,
    WeightFunction,
    bm_base_dense,
    combine_horizontal_dense,
    combine_vertical_dense,
    in_index,
    in_vertex,
    out_index,
    out_vertex,
)
from .counters import bump
from .slp import NO_CHILD, Grammar

Point = Tuple[int, int]


class DistanceExceedsK(RuntimeError):
    """Raised by relaxed structures when the requested distance exceeds k."""


@dataclass(frozen=True)
class MegaEdit:
    """One of insert(i, c), delete(i), substitute(i, c), remove_range(l, r),
    copy_exp_paste(l, r, p, s)."""

    kind: str
    args: Tuple[int, ...]

    @classmethod
    def insert(cls, i: int, c: int) -> "MegaEdit":
        return cls("insert", (i, c))

    @classmethod
    def delete(cls, i: int) -> "MegaEdit":
        return cls("delete", (i,))

    @classmethod
    def substitute(cls, i: int, c: int) -> "MegaEdit":
        return cls("substitute", (i, c))

    @classmethod
    def remove_range(cls, l: int, r: int) -> "MegaEdit":
        return cls("remove_range", (l, r))

    @classmethod
    def copy_exp_paste(cls, l: int, r: int, p: int, s: int) -> "MegaEdit":
        return cls("copy_exp_paste", (l, r, p, s))

    def apply_to(self, s: bytes) -> bytes:
        """Plain-string reference semantics."""
        k, a = self.kind, self.args
        if k == "insert":
            return s[: a[0]] + bytes([a[1]]) + s[a[0] :]
        if k == "delete":
            return s[: a[0]] + s[a[0] + 1 :]
        if k == "substitute":
            return s[: a[0]] + bytes([a[1]]) + s[a[0] + 1 :]
        if k == "remove_range":
            return s[: a[0]] + s[a[1] :]
        if k == "copy_exp_paste":
            l, r, p, cnt = a
            piece = s[l:r] * (cnt // (r - l) + 1)
            return s[:p] + piece[:cnt] + s[p:]
        raise ValueError(f"unknown mega-edit {k!r}")


def apply_megaedit(g: Grammar, a: int, e: MegaEdit) -> Optional[int]:
    """Symbol for the edited expansion (None when the result is empty)."""
    n = g.length[a]
    k, args = e.kind, e.args

    def cat(*parts: Optional[int]) -> Optional[int]:
        out: Optional[int] = None
        for p in parts:
            if p is None:
                continue
            out = p if out is None else g.merge(out, p)
        return out

    def sub(l: int, r: int) -> Optional[int]:
        return g.substring(a, l, r) if l < r else None

    if k == "insert":
        i, c = args
        if not 0 <= i <= n:
            raise IndexError(i)
        return cat(sub(0, i), g.terminal(c), sub(i, n))
    if k == "delete":
        (i,) = args
        if not 0 <= i < n:
            raise IndexError(i)
        return cat(sub(0, i), sub(i + 1, n))
    if k == "substitute":
        i, c = args
        if not 0 <= i < n:
            raise IndexError(i)
        return cat(sub(0, i), g.terminal(c), sub(i + 1, n))
    if k == "remove_range":
        l, r = args
        if not 0 <= l < r <= n:
            raise IndexError((l, r))
        return cat(sub(0, l), sub(r, n))
    if k == "copy_exp_paste":
        l, r, p, s = args
        if not (0 <= l < r <= n and 0 <= p <= n and s >= 1):
            raise IndexError(args)
        return cat(sub(0, p), g.power(g.substring(a, l, r), s), sub(p, n))
    raise ValueError(f"unknown mega-edit {k!r}")


class HadNode:
    __slots__ = ("A", "B", "a", "b", "matrix", "left", "right", "axis", "_cmo")

    def __init__(self, A: int, B: int, a: int, b: int, matrix: np.ndarray,
                 left: Optional["HadNode"], right: Optional["HadNode"], axis: str):
        matrix.setflags(write=False)
        self.A, self.B, self.a, self.b = A, B, a, b
        self.matrix = matrix
        self.left, self.right, self.axis = left, right, axis
        self._cmo: Optional[monge.CMO] = None

    def cmo(self) -> monge.CMO:
        if self._cmo is None:
            self._cmo = monge.CMO(self.matrix.shape[0], self.matrix.shape[1], dense=self.matrix)
        return self._cmo

    def dist(self, p: Point, q: Point) -> int:
        return int(self.matrix[in_index(self.a, self.b, p), out_index(self.a, self.b, q)])


class PlenIndex:
    """plen_A(C) and par_A(C) for every symbol C in the parse tree of A."""

    INF = float("inf")

    def __init__(self, g: Grammar, root: int):
        self.root = root
        syms = sorted(g.dep(root), reverse=True)  # parents carry larger ids
        self.plen: Dict[int, float] = {root: PlenIndex.INF}
        self.par: Dict[int, int] = {}
        for s in syms:
            if g.left[s] == NO_CHILD:
                continue
            ls = g.length[s]
            for c in (g.left[s], g.right[s]):
                if c not in self.plen or self.plen[c] < ls:
                    self.plen[c] = ls
                    self.par[c] = s

    def __contains__(self, c: int) -> bool:
        return c in self.plen


class HadContext:
    """Grammar, weights and mode shared by a family of handles."""

    def __init__(self, w: WeightFunction, grammar: Optional[Grammar] = None,
                 mode: str = "exact", k: Optional[int] = None, check: bool = False):
        if mode not in ("exact", "relaxed"):
            raise ValueError(f"unknown mode {mode!r}")
        if mode == "relaxed" and (k is None or k < 0):
            raise ValueError("relaxed mode requires k >= 0")
        self.w = w
        self.g = grammar if grammar is not None else Grammar()
        self.mode = mode
        self.k = k
        self.check = check
        self.nodes: Dict[Tuple[int, int], HadNode] = {}
        self._dcost: Dict[int, np.ndarray] = {}
        self._icost: Dict[int, np.ndarray] = {}
        self._base: Dict[Tuple[int, int], np.ndarray] = {}

    def _costs(self, A: int, cache: Dict[int, np.ndarray], fn) -> np.ndarray:
        got = cache.get(A)
        if got is not None:
            return got
        g = self.g
        stack = [A]
        while stack:
            s = stack[-1]
            if s in cache:
                stack.pop()
                continue
            if g.left[s] == NO_CHILD:
                cache[s] = np.array([fn(g.char[s])], dtype=np.int64)
                stack.pop()
                continue
            l, r = g.left[s], g.right[s]
            if l in cache and r in cache:
                cache[s] = np.concatenate([cache[l], cache[r]])
                stack.pop()
            else:
                if l not in cache:
                    stack.append(l)
                if r not in cache:
                    stack.append(r)
        return cache[A]

    def dcost(self, A: int) -> np.ndarray:
        return self._costs(A, self._dcost, self.w.dele)

    def icost(self, B: int) -> np.ndarray:
        return self._costs(B, self._icost, self.w.ins)

    def base(self, ca: int, cb: int) -> np.ndarray:
        m = self._base.get((ca, cb))
        if m is None:
            w = self.w
            m = bm_base_dense(w.dele(ca), w.ins(cb), w.sub(ca, cb), w.W + 1)
            m.setflags(write=False)
            self._base[(ca, cb)] = m
        return m

    @property
    def kcap(self) -> Optional[int]:
        return max(self.k, 1) if self.mode == "relaxed" else None


class Had:
    """Handle of the structure for (exp(A), exp(B))."""

    __slots__ = ("ctx", "A", "B", "root", "_plen_a", "_plen_b")

    def __init__(self, ctx: HadContext, A: int, B: int, root: HadNode):
        self.ctx, self.A, self.B, self.root = ctx, A, B, root
        self._plen_a: Optional[PlenIndex] = None
        self._plen_b: Optional[PlenIndex] = None

    @property
    def shape(self) -> Tuple[int, int]:
        return self.root.a, self.root.b

    def plen_a(self) -> PlenIndex:
        if self._plen_a is None:
            self._plen_a = PlenIndex(self.ctx.g, self.A)
        return self._plen_a

    def plen_b(self) -> PlenIndex:
        if self._plen_b is None:
            self._plen_b = PlenIndex(self.ctx.g, self.B)
        return self._plen_b

    def in_closure(self, C: int, D: int) -> bool:
        """Membership of (C, D) in the recursive structure, decided by plen."""
        pa, pb = self.plen_a(), self.plen_b()
        if C not in pa or D not in pb:
            return False
        g = self.ctx.g
        return g.length[D] <= pa.plen[C] and g.length[C] < pb.plen[D]

    def x(self) -> bytes:
        return self.ctx.g.expand(self.A)

    def y(self) -> bytes:
        return self.ctx.g.expand(self.B)


def closure_pairs(g: Grammar, A: int, B: int) -> set:
    """Direct recursive enumeration of the structure's pairs (test oracle)."""
    out = set()
    stack = [(A, B)]
    while stack:
        C, D = stack.pop()
        if (C, D) in out:
            continue
        out.add((C, D))
        lc, ld = g.length[C], g.length[D]
        if lc == 1 and ld == 1:
            continue
        if lc >= ld:
            stack.append((g.left[C], D))
            stack.append((g.right[C], D))
        else:
            stack.append((C, g.left[D]))
            stack.append((C, g.right[D]))
    return out


def _build(ctx: HadContext, A: int, B: int, old: Optional[Had], memo: Dict[Tuple[int, int], HadNode]) -> HadNode:
    g = ctx.g
    key = (A, B)
    node = memo.get(key)
    if node is not None:
        return node
    if old is not None and old.in_closure(A, B):
        node = ctx.nodes.get(key)
        if node is None:
            raise AssertionError(f"closure pair {key} missing from the node map")
        bump("had.reused_nodes")
        memo[key] = node
        return node
    la, lb = g.length[A], g.length[B]
    if la == 1 and lb == 1:
        m = ctx.base(g.char[A], g.char[B])
        node = HadNode(A, B, 1, 1, m, None, None, "leaf")
    elif la >= lb:
        L = _build(ctx, g.left[A], B, old, memo)
        R = _build(ctx, g.right[A], B, old, memo)
        m = combine_horizontal_dense(L.matrix, R.matrix, L.a, R.a, lb, ctx.dcost(A), ctx.icost(B),
                                     ctx.w.W, k=ctx.kcap, check=ctx.check)
        node = HadNode(A, B, la, lb, m, L, R, "x")
    else:
        L = _build(ctx, A, g.left[B], old, memo)
        R = _build(ctx, A, g.right[B], old, memo)
        m = combine_vertical_dense(L.matrix, R.matrix, la, L.b, R.b, ctx.dcost(A), ctx.icost(B),
                                   ctx.w.W, k=ctx.kcap, check=ctx.check)
        node = HadNode(A, B, la, lb, m, L, R, "y")
    bump("had.built_nodes")
    memo[key] = node
    ctx.nodes.setdefault(key, node)
    return node


def had_from_symbols(ctx: HadContext, A: int, B: int, old: Optional[Had] = None) -> Had:
    """Structure for (A, B), reusing the pairs of ``old`` that survive."""
    import sys

    need = 4 * (ctx.g.length[A] + ctx.g.length[B]).bit_length() + 200
    if sys.getrecursionlimit() < need:
        sys.setrecursionlimit(need)
    return Had(ctx, A, B, _build(ctx, A, B, old, {}))


def had_build(x, y, w: WeightFunction, mode: str = "exact", k: Optional[int] = None,
              ctx: Optional[HadContext] = None, check: bool = False) -> Had:
    """Build the structure for non-empty strings x and y.

    Args:
        x, y: strings (bytes, str, code arrays or fragments).
        w: weight function.
        mode: "exact" or "relaxed" (matrices k-equivalent to the exact ones).
        k: threshold for relaxed mode.
        ctx: share the grammar and node map of an existing family.
    """
    from .align_graph import codes_of

    xc, yc = codes_of(x), codes_of(y)
    if len(xc) == 0 or len(yc) == 0:
        raise ValueError("the hierarchical structure requires non-empty strings")
    if ctx is None:
        ctx = HadContext(w, mode=mode, k=k, check=check)
    A = ctx.g.from_codes(xc)
    B = ctx.g.from_codes(yc)
    return had_from_symbols(ctx, A, B)


def had_matrix(h: Had) -> monge.CMO:
    return h.root.cmo()


def had_megaedit(h: Had, side: str, e: MegaEdit) -> Had:
    """New handle after a mega-edit on X (side "X") or Y (side "Y")."""
    g = h.ctx.g
    before = len(g)
    if side == "X":
        A2 = apply_megaedit(g, h.A, e)
        if A2 is None:
            raise ValueError("mega-edit would leave X empty")
        B2 = h.B
    elif side == "Y":
        B2 = apply_megaedit(g, h.B, e)
        if B2 is None:
            raise ValueError("mega-edit would leave Y empty")
        A2 = h.A
    else:
        raise ValueError(f"side must be 'X' or 'Y', not {side!r}")
    bump("had.megaedits")
    bump("had.megaedit_symbols", len(g) - before)
    return had_from_symbols(h.ctx, A2, B2, old=h)


# ---------------------------------------------------------------------------
# alignment retrieval


def _line(p: Point, q: Point) -> List[Point]:
    (px, py), (qx, qy) = p, q
    if px == qx:
        return [(px, y) for y in range(py, qy + 1)]
    return [(x, py) for x in range(px, qx + 1)]


def _join(a: List[Point], b: List[Point]) -> List[Point]:
    if a[-1] != b[0]:
        raise AssertionError("path pieces do not meet")
    return a + b[1:]


def _path(ctx: HadContext, node: HadNode, p: Point, q: Point, d: int, limit: int) -> List[Point]:
    """Breakpoints (with every point on a non-diagonal step) of a shortest
    forward path p -> q of cost d inside node's rectangle, local coordinates."""
    bump("had.path_calls")
    (px, py), (qx, qy) = p, q
    if p == q:
        return [p]
    if d == 0:
        return [p, q]
    if px == qx or py == qy:
        return _line(p, q)
    if node.axis == "leaf":
        w = ctx.w
        g = ctx.g
        ca, cb = g.char[node.A], g.char[node.B]
        if d == w.sub(ca, cb):
            return [(0, 0), (1, 1)]
        if d == w.dele(ca) + w.ins(cb):
            return [(0, 0), (1, 0), (1, 1)]
        return [(0, 0), (0, 1), (1, 1)]
    L, R = node.left, node.right
    if node.axis == "x":
        a1 = L.a
        if qx <= a1:
            return _path(ctx, L, p, q, d, limit)
        if px >= a1:
            sub = _path(ctx, R, (px - a1, py), (qx - a1, qy), d, limit)
            return [(x + a1, y) for x, y in sub]
        off = px - py
        lo = max(py, a1 - off - d)
        hi = min(qy, a1 - off + d)
        best = None
        for y in range(lo, hi + 1):
            bump("had.path_candidates")
            dl = L.dist(p, (a1, y))
            if dl > d:
                continue
            dr = R.dist((0, y), (qx - a1, qy))
            if dl + dr == d:
                best = (y, dl, dr)
                break
        if best is None:
            raise AssertionError("no separator vertex realizes the distance")
        y, dl, dr = best
        left = _path(ctx, L, p, (a1, y), dl, limit)
        right = _path(ctx, R, (0, y), (qx - a1, qy), dr, limit)
        return _join(left, [(x + a1, yy) for x, yy in right])
    b1 = L.b
    if qy <= b1:
        return _path(ctx, L, p, q, d, limit)
    if py >= b1:
        sub = _path(ctx, R, (px, py - b1), (qx, qy - b1), d, limit)
        return [(x, y + b1) for x, y in sub]
    off = px - py
    lo = max(px, b1 + off - d)
    hi = min(qx, b1 + off + d)
    best = None
    for x in range(lo, hi + 1):
        bump("had.path_candidates")
        dl = L.dist(p, (x, b1))
        if dl > d:
            continue
        dr = R.dist((x, 0), (qx, qy - b1))
        if dl + dr == d:
            best = (x, dl, dr)
            break
    if best is None:
        raise AssertionError("no separator vertex realizes the distance")
    x, dl, dr = best
    left = _path(ctx, L, p, (x, b1), dl, limit)
    right = _path(ctx, R, (x, 0), (qx, qy - b1), dr, limit)
    return _join(left, [(xx, y + b1) for xx, y in right])


def closed_form_walk(p: Point, q: Point) -> List[Point]:
    """All vertices of a monotone walk between an anti-monotone pair:
    horizontal moves first, then vertical ones."""
    (px, py), (qx, qy) = p, q
    sx = 1 if qx >= px else -1
    sy = 1 if qy >= py else -1
    pts = [(x, py) for x in range(px, qx + sx, sx)]
    pts += [(qx, y) for y in range(py + sy, qy + sy, sy)]
    return pts


def had_alignment(h: Had, p: Union[int, Point], q: Union[int, Point]) -> Union[Alignment, List[Point]]:
    """Shortest path from input vertex p to output vertex q.

    Vertices may be given as boundary indices or as points.  Forward pairs
    yield an Alignment (breakpoint representation); other pairs have no
    alignment and yield the full vertex list of a monotone walk made of
    forward and back edges.
    """
    a, b = h.root.a, h.root.b
    if isinstance(p, (int, np.integer)):
        p = in_vertex(a, b, int(p))
    if isinstance(q, (int, np.integer)):
        q = out_vertex(a, b, int(q))
    p = (int(p[0]), int(p[1]))
    q = (int(q[0]), int(q[1]))
    d = h.root.dist(p, q)
    ctx = h.ctx
    limit = ctx.k if ctx.mode == "relaxed" else None
    if limit is not None and d > limit:
        raise DistanceExceedsK(f"distance exceeds k={limit}")
    if not (p[0] <= q[0] and p[1] <= q[1]):
        return closed_form_walk(p, q)
    pts = _path(ctx, h.root, p, q, d, limit if limit is not None else d)
    return _compress(pts, ctx, h)


def _compress(pts: List[Point], ctx: HadContext, h: Had) -> Alignment:
    """Drop points whose outgoing step is a match diagonal."""
    g = ctx.g
    keep = [pts[0]]
    for t in range(1, len(pts) - 1):
        (x, y), (nx, ny) = pts[t], pts[t + 1]
        if nx - x == ny - y and (nx - x > 1 or g.access(h.A, x) == g.access(h.B, y)):
            continue  # match step; multi-step hops only come from zero-cost runs
        keep.append((x, y))
    keep.append(pts[-1])
    out = [keep[0]]
    for pt in keep[1:]:
        if pt != out[-1]:
            out.append(pt)
    return Alignment(out)
