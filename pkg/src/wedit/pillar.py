"""PILLAR string primitives over static texts and an editable rope.

Fingerprints are Karp-Rabin hashes modulo the Mersenne prime 2^61 - 1 with
two independent random bases.  Every LCP answer is confirmed by comparing
the boundary characters, and a detected collision raises instead of
returning a wrong length.
"""

from __future__ import annotations

import random
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numba as nb
import numpy as np

from .counters import bump

MOD = (1 << 61) - 1
_rng = random.Random(0x5EED)
BASES = (_rng.randrange(1 << 40, MOD - 1), _rng.randrange(1 << 40, MOD - 1))


class FingerprintCollision(RuntimeError):
    pass


class StaleFragment(RuntimeError):
    pass


@nb.njit(cache=True)
def _mulmod61(a, b):
    mask = np.uint64(0x1FFFFFFFFFFFFFFF)
    lo32 = np.uint64(0xFFFFFFFF)
    l1 = a & lo32
    h1 = a >> np.uint64(32)
    l2 = b & lo32
    h2 = b >> np.uint64(32)
    lo = l1 * l2
    mid = l1 * h2 + l2 * h1
    hi = h1 * h2
    ret = (lo & mask) + (lo >> np.uint64(61)) + (hi << np.uint64(3)) + (mid >> np.uint64(29))
    ret += ((mid << np.uint64(35)) >> np.uint64(3)) + np.uint64(1)
    ret = (ret & mask) + (ret >> np.uint64(61))
    ret = (ret & mask) + (ret >> np.uint64(61))
    return ret - np.uint64(1)


@nb.njit(cache=True)
def _prefix_hashes(codes, base):
    n = codes.size
    mask = np.uint64(0x1FFFFFFFFFFFFFFF)
    out = np.zeros(n + 1, np.uint64)
    h = np.uint64(0)
    for i in range(n):
        h = _mulmod61(h, base) + np.uint64(codes[i] + 1)
        h = (h & mask) + (h >> np.uint64(61))
        if h >= mask:
            h -= mask
        out[i + 1] = h
    return out


class _Powers:
    """Growing table of base powers shared by all texts."""

    def __init__(self) -> None:
        self.tables: List[np.ndarray] = [np.ones(1, np.uint64), np.ones(1, np.uint64)]

    def ensure(self, n: int) -> None:
        if self.tables[0].size > n:
            return
        size = max(n + 1, 2 * self.tables[0].size)
        for t in range(2):
            pw = np.empty(size, np.uint64)
            pw[0] = 1
            _fill_powers(pw, np.uint64(BASES[t]))
            self.tables[t] = pw

    def get(self, t: int, n: int) -> int:
        self.ensure(n)
        return int(self.tables[t][n])


@nb.njit(cache=True)
def _fill_powers(pw, base):
    for i in range(1, pw.size):
        pw[i] = _mulmod61(pw[i - 1], base)


POWERS = _Powers()


def _codes_of(seq) -> np.ndarray:
    if isinstance(seq, np.ndarray):
        return np.ascontiguousarray(seq, dtype=np.int64)
    if isinstance(seq, str):
        return np.frombuffer(seq.encode("utf-32-le"), dtype=np.uint32).astype(np.int64)
    if isinstance(seq, (bytes, bytearray)):
        return np.frombuffer(bytes(seq), dtype=np.uint8).astype(np.int64)
    return np.asarray(list(seq), dtype=np.int64).reshape(-1)


# ---------------------------------------------------------------------------
# static texts


class Text:
    """Immutable text with Karp-Rabin prefix tables."""

    static = True

    def __init__(self, seq) -> None:
        self.codes = _codes_of(seq)
        self.codes.setflags(write=False)
        self.n = int(self.codes.size)
        self.version = 0
        self._h: Optional[Tuple[np.ndarray, np.ndarray]] = None

    def _hashes(self) -> Tuple[np.ndarray, np.ndarray]:
        if self._h is None:
            POWERS.ensure(self.n)
            self._h = (
                _prefix_hashes(self.codes, np.uint64(BASES[0])),
                _prefix_hashes(self.codes, np.uint64(BASES[1])),
            )
        return self._h

    def __len__(self) -> int:
        return self.n

    def access(self, i: int) -> int:
        return int(self.codes[i])

    def fingerprint(self, a: int, b: int) -> Tuple[int, int]:
        h1, h2 = self._hashes()
        pw1, pw2 = POWERS.tables
        ln = b - a
        return (
            (int(h1[b]) - int(h1[a]) * int(pw1[ln])) % MOD,
            (int(h2[b]) - int(h2[a]) * int(pw2[ln])) % MOD,
        )

    def slice_codes(self, a: int, b: int) -> np.ndarray:
        return self.codes[a:b]

    def fragment(self, start: int = 0, end: Optional[int] = None) -> "Fragment":
        return Fragment(self, start, self.n if end is None else end)


# ---------------------------------------------------------------------------
# dynamic rope

_CHUNK = 32
_ALPHA = 0.29


class _Node:
    __slots__ = ("left", "right", "n", "fp", "chunk", "pre")

    def __init__(self, left=None, right=None, chunk=None):
        self.left = left
        self.right = right
        self.chunk = chunk
        if chunk is not None:
            self.n = len(chunk)
            pre1 = [0] * (self.n + 1)
            pre2 = [0] * (self.n + 1)
            b1, b2 = BASES
            for i, c in enumerate(chunk):
                pre1[i + 1] = (pre1[i] * b1 + c + 1) % MOD
                pre2[i + 1] = (pre2[i] * b2 + c + 1) % MOD
            self.pre = (pre1, pre2)
            self.fp = (pre1[-1], pre2[-1])
        else:
            self.n = left.n + right.n
            self.pre = None
            self.fp = (
                (left.fp[0] * POWERS.get(0, right.n) + right.fp[0]) % MOD,
                (left.fp[1] * POWERS.get(1, right.n) + right.fp[1]) % MOD,
            )


def _build(chunks: List[Tuple[int, ...]]) -> Optional[_Node]:
    if not chunks:
        return None
    if len(chunks) == 1:
        return _Node(chunk=chunks[0])
    # split by weight so the tree is balanced in characters
    total = sum(len(c) for c in chunks)
    acc, mid = 0, 0
    while mid < len(chunks) - 1 and acc + len(chunks[mid]) <= total // 2:
        acc += len(chunks[mid])
        mid += 1
    mid = max(1, mid)
    return _Node(_build(chunks[:mid]), _build(chunks[mid:]))


def _chunks_of(node: Optional[_Node], out: List[Tuple[int, ...]]) -> None:
    if node is None:
        return
    stack = [node]
    while stack:
        x = stack.pop()
        if x.chunk is not None:
            if x.chunk:
                out.append(x.chunk)
        else:
            stack.append(x.right)
            stack.append(x.left)


def _rechunk(seq: Sequence[int]) -> List[Tuple[int, ...]]:
    return [tuple(seq[i : i + _CHUNK]) for i in range(0, len(seq), _CHUNK)]


class DynamicText:
    """Editable text stored as a weight-balanced rope of chunks.

    Balance is kept by partial rebuilding: after an edit the highest node on
    the access path whose heavier child exceeds a (1 - alpha) share is
    rebuilt perfectly balanced.
    """

    static = False

    def __init__(self, seq) -> None:
        codes = [int(c) for c in _codes_of(seq)]
        POWERS.ensure(len(codes) + 1)
        self.root = _build(_rechunk(codes))
        self.version = 0

    @property
    def n(self) -> int:
        return 0 if self.root is None else self.root.n

    def __len__(self) -> int:
        return self.n

    def access(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise IndexError(i)
        x = self.root
        steps = 0
        while x.chunk is None:
            steps += 1
            if i < x.left.n:
                x = x.left
            else:
                i -= x.left.n
                x = x.right
        bump("pillar.dyn.node_visits", steps + 1)
        return x.chunk[i]

    def _prefix_fp(self, t: int, i: int) -> int:
        """Fingerprint (hash t) of the first i characters."""
        x = self.root
        acc = 0
        steps = 0
        while x is not None and i > 0:
            steps += 1
            if x.chunk is not None:
                acc = (acc * POWERS.get(t, i) + x.pre[t][i]) % MOD
                break
            if i <= x.left.n:
                x = x.left
            else:
                acc = (acc * POWERS.get(t, x.left.n) + x.left.fp[t]) % MOD
                i -= x.left.n
                x = x.right
        bump("pillar.dyn.node_visits", steps)
        return acc

    def fingerprint(self, a: int, b: int) -> Tuple[int, int]:
        ln = b - a
        out = []
        for t in range(2):
            hb = self._prefix_fp(t, b)
            ha = self._prefix_fp(t, a)
            out.append((hb - ha * POWERS.get(t, ln)) % MOD)
        return (out[0], out[1])

    def slice_codes(self, a: int, b: int) -> np.ndarray:
        out: List[int] = []
        self._collect(self.root, a, b, out)
        return np.asarray(out, dtype=np.int64)

    def _collect(self, x, a, b, out) -> None:
        if x is None or a >= b:
            return
        if x.chunk is not None:
            out.extend(x.chunk[a:b])
            return
        ln = x.left.n
        if a < ln:
            self._collect(x.left, a, min(b, ln), out)
        if b > ln:
            self._collect(x.right, max(a - ln, 0), b - ln, out)

    def to_list(self) -> List[int]:
        return [int(c) for c in self.slice_codes(0, self.n)]

    def fragment(self, start: int = 0, end: Optional[int] = None) -> "Fragment":
        return Fragment(self, start, self.n if end is None else end)

    # -- edits

    def _edit_leaf(self, pos: int, fn) -> None:
        """Replace the chunk containing pos by fn(chunk, offset) and rebalance."""
        if self.root is None:
            self.root = _Node(chunk=tuple(fn((), 0)))
            self.version += 1
            return
        path: List[Tuple[_Node, bool]] = []
        x = self.root
        i = pos
        while x.chunk is None:
            if i < x.left.n:
                path.append((x, True))
                x = x.left
            else:
                i -= x.left.n
                path.append((x, False))
                x = x.right
        new_chunk = tuple(fn(x.chunk, i))
        if len(new_chunk) > 2 * _CHUNK:
            pieces = _rechunk(new_chunk)
            node = _build(pieces)
        else:
            node = _Node(chunk=new_chunk)
        # rebuild the path bottom-up (path copying keeps old roots intact)
        for parent, went_left in reversed(path):
            if went_left:
                left, right = node, parent.right
            else:
                left, right = parent.left, node
            if left.n == 0:
                node = right
            elif right.n == 0:
                node = left
            else:
                node = _Node(left, right)
        self.root = node
        self._rebalance(pos)
        self.version += 1

    def _rebalance(self, pos: int) -> None:
        x = self.root
        path: List[Tuple[_Node, bool]] = []
        i = pos
        target_depth = -1
        depth = 0
        while x is not None and x.chunk is None:
            heavy = max(x.left.n, x.right.n)
            if heavy > (1 - _ALPHA) * x.n + _CHUNK:
                target_depth = depth
                break
            if i < x.left.n:
                path.append((x, True))
                x = x.left
            else:
                i -= x.left.n
                path.append((x, False))
                x = x.right
            depth += 1
        if target_depth < 0:
            return
        chunks: List[Tuple[int, ...]] = []
        _chunks_of(x, chunks)
        flat = [c for ch in chunks for c in ch]
        node = _build(_rechunk(flat))
        bump("pillar.dyn.rebuild_chars", len(flat))
        for parent, went_left in reversed(path):
            node = _Node(node, parent.right) if went_left else _Node(parent.left, node)
        self.root = node

    def insert(self, pos: int, c: int) -> int:
        if not 0 <= pos <= self.n:
            raise IndexError(pos)
        if pos < self.n:
            self._edit_leaf(pos, lambda ch, i: ch[:i] + (c,) + ch[i:])
        else:
            self._edit_leaf(max(self.n - 1, 0), lambda ch, i: ch + (c,))
        return self.version

    def delete(self, pos: int) -> int:
        if not 0 <= pos < self.n:
            raise IndexError(pos)
        self._edit_leaf(pos, lambda ch, i: ch[:i] + ch[i + 1 :])
        if self.root is not None and self.root.n == 0:
            self.root = None
        return self.version

    def substitute(self, pos: int, c: int) -> int:
        if not 0 <= pos < self.n:
            raise IndexError(pos)
        self._edit_leaf(pos, lambda ch, i: ch[:i] + (c,) + ch[i + 1 :])
        return self.version


# ---------------------------------------------------------------------------
# fragments

AnyText = Union[Text, DynamicText]


class Fragment:
    """Half-open fragment text[start..end) bound to a text version."""

    __slots__ = ("text", "start", "end", "version")

    def __init__(self, text: AnyText, start: int, end: int) -> None:
        if not 0 <= start <= end <= len(text):
            raise IndexError(f"fragment [{start}..{end}) outside text of length {len(text)}")
        self.text = text
        self.start = start
        self.end = end
        self.version = text.version

    def _live(self) -> None:
        if self.version != self.text.version:
            raise StaleFragment("fragment refers to an outdated text version")

    def __len__(self) -> int:
        return self.end - self.start

    @property
    def length(self) -> int:
        return self.end - self.start

    def access(self, i: int) -> int:
        self._live()
        if not 0 <= i < self.end - self.start:
            raise IndexError(i)
        return self.text.access(self.start + i)

    def __getitem__(self, i: int) -> int:
        return self.access(i)

    def extract(self, l: int, r: int) -> "Fragment":
        self._live()
        if not 0 <= l <= r <= self.end - self.start:
            raise IndexError(f"extract [{l}..{r}) outside fragment of length {len(self)}")
        return Fragment(self.text, self.start + l, self.start + r)

    def fingerprint(self, l: int = 0, r: Optional[int] = None) -> Tuple[int, int]:
        self._live()
        r = len(self) if r is None else r
        return self.text.fingerprint(self.start + l, self.start + r)

    def codes(self) -> np.ndarray:
        self._live()
        return self.text.slice_codes(self.start, self.end)

    def to_bytes(self) -> bytes:
        return bytes(int(c) for c in self.codes())

    def equals(self, other: "Fragment") -> bool:
        return len(self) == len(other) and self.lcp(other) == len(self)

    def lcp(self, other: "Fragment") -> int:
        return lcp(self, other)

    def lcp_reverse(self, other: "Fragment") -> int:
        return lcp_reverse(self, other)

    def __repr__(self) -> str:
        return f"Fragment([{self.start}..{self.end}))"


def _fp_equal(s: Fragment, a: int, t: Fragment, b: int, ln: int) -> bool:
    return s.text.fingerprint(s.start + a, s.start + a + ln) == t.text.fingerprint(t.start + b, t.start + b + ln)


def lcp(s: Fragment, t: Fragment) -> int:
    """Length of the longest common prefix of two fragments."""
    s._live()
    t._live()
    bump("pillar.lcp")
    lim = min(len(s), len(t))
    if lim == 0 or s.text.access(s.start) != t.text.access(t.start):
        return 0
    if type(s.text) is Text and type(t.text) is Text:
        return _static_lcp(s, t, lim, False)
    # exponential search for a mismatching prefix length, then binary search
    lo, step = 1, 1
    while True:
        hi = min(lo + step, lim)
        if not _fp_equal(s, 0, t, 0, hi):
            break
        lo = hi
        if lo == lim:
            return lim
        step *= 2
    # invariant: prefix of length lo matches, of length hi does not
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _fp_equal(s, 0, t, 0, mid):
            lo = mid
        else:
            hi = mid
    if s.text.access(s.start + lo) == t.text.access(t.start + lo):
        raise FingerprintCollision("boundary character check failed")
    return lo


def lcp_reverse(s: Fragment, t: Fragment) -> int:
    """Length of the longest common suffix of two fragments."""
    s._live()
    t._live()
    bump("pillar.lcp")
    lim = min(len(s), len(t))
    if lim == 0 or s.text.access(s.end - 1) != t.text.access(t.end - 1):
        return 0
    if type(s.text) is Text and type(t.text) is Text:
        return _static_lcp(s, t, lim, True)
    ls, lt = len(s), len(t)
    lo, step = 1, 1
    while True:
        hi = min(lo + step, lim)
        if not _fp_equal(s, ls - hi, t, lt - hi, hi):
            break
        lo = hi
        if lo == lim:
            return lim
        step *= 2
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _fp_equal(s, ls - mid, t, lt - mid, mid):
            lo = mid
        else:
            hi = mid
    if s.text.access(s.end - 1 - lo) == t.text.access(t.end - 1 - lo):
        raise FingerprintCollision("boundary character check failed")
    return lo


# ---------------------------------------------------------------------------
# store and dispatch


class TextStore:
    """Collection of texts in one mode (static or dynamic)."""

    def __init__(self, mode: str = "static") -> None:
        if mode not in ("static", "dynamic"):
            raise ValueError("mode must be 'static' or 'dynamic'")
        self.mode = mode
        self.texts: Dict[int, AnyText] = {}

    def add(self, seq) -> int:
        tid = len(self.texts)
        self.texts[tid] = Text(seq) if self.mode == "static" else DynamicText(seq)
        return tid

    def fragment(self, tid: int, start: int = 0, end: Optional[int] = None) -> Fragment:
        return self.texts[tid].fragment(start, end)


def pillar_query(s: Fragment, kind: str, *args):
    """Dispatch for access(i), length, extract(l,r), lcp(t), lcp_reverse(t)."""
    if kind == "access":
        return s.access(*args)
    if kind == "length":
        s._live()
        return len(s)
    if kind == "extract":
        return s.extract(*args)
    if kind == "lcp":
        return lcp(s, *args)
    if kind == "lcp_reverse":
        return lcp_reverse(s, *args)
    raise ValueError(f"unknown query {kind!r}")


def pillar_edit(store: TextStore, tid: int, kind: str, pos: int, ch: Optional[int] = None) -> int:
    """Apply one character edit to a dynamic text; returns the new version."""
    if store.mode != "dynamic":
        raise RuntimeError("edits require a dynamic text store")
    text = store.texts[tid]
    if kind == "insert":
        return text.insert(pos, ch)
    if kind == "delete":
        return text.delete(pos)
    if kind == "substitute":
        return text.substitute(pos, ch)
    raise ValueError(f"unknown edit {kind!r}")


def as_fragment(x) -> Fragment:
    """Accept a Fragment, a text, or raw characters."""
    if isinstance(x, Fragment):
        return x
    if isinstance(x, (Text, DynamicText)):
        return x.fragment()
    return Text(x).fragment()


# ---------------------------------------------------------------------------
# compiled lcp over static texts (used by the furthest-reaching kernels)

_MODU = np.uint64(MOD)


@nb.njit(cache=True)
def _nb_fp(h, pw, a, ln):
    x = _mulmod61(h[a], pw[ln])
    v = h[a + ln] + (_MODU - x)
    if v >= _MODU:
        v -= _MODU
    return v


@nb.njit(cache=True)
def nb_lcp(ca, ha1, ha2, i, cb, hb1, hb2, j, lim, pw1, pw2):
    """lcp of a[i..i+lim) and b[j..j+lim); -1 signals a fingerprint collision."""
    t = 0
    while t < lim and t < 8:
        if ca[i + t] != cb[j + t]:
            return t
        t += 1
    if t == lim:
        return lim
    lo = t
    step = 8
    hi = lim
    while True:
        cand = lo + step
        if cand > lim:
            cand = lim
        if _nb_fp(ha1, pw1, i, cand) == _nb_fp(hb1, pw1, j, cand) and \
                _nb_fp(ha2, pw2, i, cand) == _nb_fp(hb2, pw2, j, cand):
            lo = cand
            if lo == lim:
                return lim
            step *= 2
        else:
            hi = cand
            break
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _nb_fp(ha1, pw1, i, mid) == _nb_fp(hb1, pw1, j, mid) and \
                _nb_fp(ha2, pw2, i, mid) == _nb_fp(hb2, pw2, j, mid):
            lo = mid
        else:
            hi = mid
    if ca[i + lo] == cb[j + lo]:
        return -1
    return lo


@nb.njit(cache=True)
def nb_lcs(ca, ha1, ha2, i, cb, hb1, hb2, j, lim, pw1, pw2):
    """Longest common suffix of a[..i) and b[..j) capped at lim; -1 on collision."""
    t = 0
    while t < lim and t < 8:
        if ca[i - 1 - t] != cb[j - 1 - t]:
            return t
        t += 1
    if t == lim:
        return lim
    lo = t
    step = 8
    hi = lim
    while True:
        cand = lo + step
        if cand > lim:
            cand = lim
        if _nb_fp(ha1, pw1, i - cand, cand) == _nb_fp(hb1, pw1, j - cand, cand) and \
                _nb_fp(ha2, pw2, i - cand, cand) == _nb_fp(hb2, pw2, j - cand, cand):
            lo = cand
            if lo == lim:
                return lim
            step *= 2
        else:
            hi = cand
            break
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _nb_fp(ha1, pw1, i - mid, mid) == _nb_fp(hb1, pw1, j - mid, mid) and \
                _nb_fp(ha2, pw2, i - mid, mid) == _nb_fp(hb2, pw2, j - mid, mid):
            lo = mid
        else:
            hi = mid
    if ca[i - 1 - lo] == cb[j - 1 - lo]:
        return -1
    return lo


def _static_lcp(s: Fragment, t: Fragment, lim: int, rev: bool) -> int:
    a1, a2 = s.text._hashes()
    b1, b2 = t.text._hashes()
    pw1, pw2 = power_tables(max(s.text.n, t.text.n))
    if rev:
        r = nb_lcs(s.text.codes, a1, a2, s.end, t.text.codes, b1, b2, t.end, lim, pw1, pw2)
    else:
        r = nb_lcp(s.text.codes, a1, a2, s.start, t.text.codes, b1, b2, t.start, lim, pw1, pw2)
    if r < 0:
        raise FingerprintCollision("boundary character check failed")
    return int(r)


def static_view(f: Fragment):
    """(codes, h1, h2, start) for fragments of static texts, else None."""
    if not isinstance(f.text, Text):
        return None
    h1, h2 = f.text._hashes()
    return f.text.codes, h1, h2, f.start


def power_tables(n: int) -> Tuple[np.ndarray, np.ndarray]:
    POWERS.ensure(n)
    return POWERS.tables[0], POWERS.tables[1]
