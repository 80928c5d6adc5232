"""Weight-balanced straight-line programs with Merge, Substring and Power.

Symbols live in an append-only arena.  A symbol is either a terminal (one
character) or a pair (left, right).  Every pair satisfies
1/3 <= len(left)/len(right) <= 3.
"""

from __future__ import annotations

from typing import Dict, Iterable, List, Optional, Sequence, Set

import numpy as np

from .counters import bump

NO_CHILD = -1


class Grammar:
    """Append-only symbol arena."""

    def __init__(self) -> None:
        self.left: List[int] = []
        self.right: List[int] = []
        self.length: List[int] = []
        self.char: List[int] = []
        self._terminals: Dict[int, int] = {}

    def __len__(self) -> int:
        return len(self.length)

    # -- primitive constructors

    def _new(self, left: int, right: int, length: int, char: int) -> int:
        self.left.append(left)
        self.right.append(right)
        self.length.append(length)
        self.char.append(char)
        bump("slp.new_symbols")
        return len(self.length) - 1

    def terminal(self, c: int) -> int:
        """The terminal symbol of character code c (one symbol per character)."""
        c = int(c)
        s = self._terminals.get(c)
        if s is None:
            s = self._new(NO_CHILD, NO_CHILD, 1, c)
            self._terminals[c] = s
        return s

    def pair(self, b: int, c: int) -> int:
        lb, lc = self.length[b], self.length[c]
        if not balanced(lb, lc):
            raise AssertionError(f"unbalanced production {lb}:{lc}")
        return self._new(b, c, lb + lc, -1)

    def is_terminal(self, a: int) -> bool:
        return self.left[a] == NO_CHILD

    def children(self, a: int):
        return self.left[a], self.right[a]

    def len(self, a: int) -> int:
        return self.length[a]

    # -- bulk construction

    def from_codes(self, codes: Sequence[int]) -> int:
        """Perfectly balanced parse tree over codes with fresh internal symbols."""
        codes = [int(c) for c in codes]
        if not codes:
            raise ValueError("symbols cannot expand to the empty string")
        level = [self.terminal(c) for c in codes]

        def build(lo: int, hi: int) -> int:
            if hi - lo == 1:
                return level[lo]
            mid = (lo + hi) // 2
            return self.pair(build(lo, mid), build(mid, hi))

        return build(0, len(level))

    def from_string(self, s) -> int:
        if isinstance(s, str):
            s = s.encode("latin-1")
        return self.from_codes(list(s))

    # -- operations

    def merge(self, b: int, c: int) -> int:
        """Symbol expanding to exp(b) exp(c)."""
        lb, lc = self.length[b], self.length[c]
        if balanced(lb, lc):
            return self.pair(b, c)
        if lb > lc:
            return self._join_right(b, c)
        return self._join_left(b, c)

    def _join_right(self, b: int, c: int) -> int:
        # b is more than three times heavier than c; descend b's right spine
        l, r = self.left[b], self.right[b]
        if balanced(self.length[r], self.length[c]):
            t = self.pair(r, c)
        else:
            t = self._join_right(r, c)
        return self._rebalance(l, t)

    def _join_left(self, b: int, c: int) -> int:
        l, r = self.left[c], self.right[c]
        if balanced(self.length[b], self.length[l]):
            t = self.pair(b, l)
        else:
            t = self._join_left(b, l)
        return self._rebalance(t, r)

    def _rebalance(self, l: int, r: int) -> int:
        """Pair l and r, rotating once or twice when their weights drifted."""
        L, R = self.length[l], self.length[r]
        if balanced(L, R):
            return self.pair(l, r)
        if R > L:
            r1, r2 = self.left[r], self.right[r]
            l1 = self.length[r1]
            if balanced(L, l1) and balanced(L + l1, self.length[r2]):
                return self.pair(self.pair(l, r1), r2)
            a, b2 = self.left[r1], self.right[r1]
            return self.pair(self.pair(l, a), self.pair(b2, r2))
        l1, l2 = self.left[l], self.right[l]
        ll2 = self.length[l2]
        if balanced(ll2, R) and balanced(self.length[l1], ll2 + R):
            return self.pair(l1, self.pair(l2, r))
        a, b2 = self.left[l2], self.right[l2]
        return self.pair(self.pair(l1, a), self.pair(b2, r))

    def substring(self, a: int, l: int, r: int) -> int:
        """Symbol expanding to exp(a)[l..r)."""
        if not 0 <= l < r <= self.length[a]:
            raise IndexError(f"substring [{l}..{r}) of a symbol of length {self.length[a]}")
        return self._sub(a, l, r)

    def _sub(self, a: int, l: int, r: int) -> int:
        if l == 0 and r == self.length[a]:
            return a
        b, c = self.left[a], self.right[a]
        lb = self.length[b]
        if r <= lb:
            return self._sub(b, l, r)
        if l >= lb:
            return self._sub(c, l - lb, r - lb)
        return self.merge(self._sub(b, l, lb), self._sub(c, 0, r - lb))

    def power(self, a: int, ell: int) -> int:
        """Symbol expanding to the length-ell prefix of exp(a) repeated forever."""
        if ell < 1:
            raise ValueError("power length must be at least 1")
        la = self.length[a]
        t = 0
        while la << t < ell:
            t += 1
        b = a
        for _ in range(t):
            b = self.pair(b, b)
        if self.length[b] == ell:
            return b
        return self.substring(b, 0, ell)

    # -- reading

    def expand(self, a: int) -> bytes:
        out = bytearray()
        stack = [a]
        while stack:
            s = stack.pop()
            if self.left[s] == NO_CHILD:
                out.append(self.char[s])
            else:
                stack.append(self.right[s])
                stack.append(self.left[s])
        return bytes(out)

    def codes(self, a: int) -> np.ndarray:
        return np.frombuffer(self.expand(a), dtype=np.uint8).astype(np.int64)

    def access(self, a: int, i: int) -> int:
        if not 0 <= i < self.length[a]:
            raise IndexError(i)
        while self.left[a] != NO_CHILD:
            lb = self.length[self.left[a]]
            if i < lb:
                a = self.left[a]
            else:
                a = self.right[a]
                i -= lb
        return self.char[a]

    def dep(self, a: int) -> Set[int]:
        """All symbols in the parse tree of a."""
        seen: Set[int] = set()
        stack = [a]
        while stack:
            s = stack.pop()
            if s in seen:
                continue
            seen.add(s)
            if self.left[s] != NO_CHILD:
                stack.append(self.left[s])
                stack.append(self.right[s])
        return seen

    def is_balanced(self, a: int) -> bool:
        return all(self.left[s] == NO_CHILD or balanced(self.length[self.left[s]], self.length[self.right[s]])
                   for s in self.dep(a))

    def height(self, a: int) -> int:
        memo: Dict[int, int] = {}
        order: List[int] = []
        stack = [a]
        while stack:
            s = stack.pop()
            if s in memo:
                continue
            memo[s] = -1
            order.append(s)
            if self.left[s] != NO_CHILD:
                stack.extend((self.left[s], self.right[s]))
        for s in sorted(order):
            memo[s] = 0 if self.left[s] == NO_CHILD else 1 + max(memo[self.left[s]], memo[self.right[s]])
        return memo[a]


def balanced(lb: int, lc: int) -> bool:
    return lb <= 3 * lc and lc <= 3 * lb


def slp_op(g: Grammar, op: str, *args) -> int:
    """Dispatch: terminal(c), merge(B, C), substring(A, l, r), power(A, l)."""
    if op == "terminal":
        c = args[0]
        return g.terminal(ord(c) if isinstance(c, str) else c)
    if op == "merge":
        return g.merge(*args)
    if op == "substring":
        return g.substring(*args)
    if op == "power":
        return g.power(*args)
    raise ValueError(f"unknown SLP operation {op!r}")


def slp_expand(g: Grammar, a: int) -> bytes:
    return g.expand(a)
