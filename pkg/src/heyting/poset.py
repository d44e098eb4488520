"""Finite posets stored as up/down bitmask rows, with canonical forms and enumeration."""
from __future__ import annotations

from functools import lru_cache
from itertools import permutations, product
from typing import Iterable, Sequence

__all__ = [
    "FinitePoset", "canonical_form", "is_isomorphic", "posets_of_size",
    "posets_up_to", "popcount", "bits",
]


def popcount(x: int) -> int:
    return bin(x).count("1")


def bits(x: int) -> list[int]:
    out = []
    i = 0
    while x:
        if x & 1:
            out.append(i)
        x >>= 1
        i += 1
    return out


class FinitePoset:
    """A partial order on ``range(n)``.

    ``up[i]`` is the bitmask of all ``j`` with ``i <= j``; ``down[i]`` dually.
    Instances are immutable and compare by their relation.
    """

    __slots__ = ("n", "up", "down", "_hash", "_upsets", "_topo")

    def __init__(self, n: int, up: Sequence[int], *, check: bool = True):
        self.n = n
        self.up = tuple(up)
        down = [0] * n
        for i in range(n):
            for j in bits(self.up[i]):
                down[j] |= 1 << i
        self.down = tuple(down)
        self._hash = hash((n, self.up))
        self._upsets = None
        self._topo = None
        if check:
            self.validate()

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[tuple[int, int]]) -> "FinitePoset":
        """Build from ``i <= j`` pairs; reflexive/transitive closure is added."""
        up = [1 << i for i in range(n)]
        for i, j in pairs:
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"pair ({i}, {j}) outside 0..{n - 1}")
            up[i] |= 1 << j
        changed = True
        while changed:
            changed = False
            for i in range(n):
                acc = up[i]
                for j in bits(up[i]):
                    acc |= up[j]
                if acc != up[i]:
                    up[i] = acc
                    changed = True
        return cls(n, up)

    @classmethod
    def chain(cls, n: int) -> "FinitePoset":
        return cls(n, [((1 << n) - 1) & ~((1 << i) - 1) for i in range(n)])

    @classmethod
    def antichain(cls, n: int) -> "FinitePoset":
        return cls(n, [1 << i for i in range(n)])

    def validate(self):
        n = self.n
        for i in range(n):
            if not self.up[i] >> i & 1:
                raise ValueError(f"relation not reflexive at {i}")
            for j in bits(self.up[i]):
                if j != i and self.up[j] >> i & 1:
                    raise ValueError(f"relation not antisymmetric at ({i}, {j})")
                if self.up[j] & ~self.up[i]:
                    raise ValueError(f"relation not transitive at ({i}, {j})")

    def leq(self, i: int, j: int) -> bool:
        return bool(self.up[i] >> j & 1)

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    def pairs(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in bits(self.up[i])]

    def covers(self) -> list[tuple[int, int]]:
        """Hasse diagram edges ``(i, j)`` with ``j`` covering ``i``."""
        out = []
        for i in range(self.n):
            strict = self.up[i] & ~(1 << i)
            for j in bits(strict):
                between = strict & self.down[j] & ~(1 << j)
                if not between:
                    out.append((i, j))
        return out

    def topdown(self) -> list[int]:
        """Points ordered so every point comes after all points strictly above it."""
        if self._topo is None:
            self._topo = sorted(range(self.n), key=lambda x: (-popcount(self.down[x]), x))
        return self._topo

    def upclosure(self, s: int) -> int:
        out = 0
        for i in bits(s):
            out |= self.up[i]
        return out

    def is_upset(self, s: int) -> bool:
        return self.upclosure(s) == s

    def upsets(self) -> list[int]:
        """All up-sets as bitmasks, sorted by (cardinality, value)."""
        if self._upsets is None:
            order = self.topdown()
            out = []

            def rec(k, s):
                if k == len(order):
                    out.append(s)
                    return
                x = order[k]
                rec(k + 1, s)
                strict = self.up[x] & ~(1 << x)
                if strict & ~s == 0:
                    rec(k + 1, s | 1 << x)

            rec(0, 0)
            out.sort(key=lambda u: (popcount(u), u))
            self._upsets = out
        return self._upsets

    def height(self) -> int:
        """Length (number of strict steps) of the longest chain; -1 when empty."""
        if self.n == 0:
            return -1
        h = {}
        for x in self.topdown():
            strict = self.up[x] & ~(1 << x)
            h[x] = max((h[y] + 1 for y in bits(strict)), default=0)
        return max(h.values())

    def subposet(self, mask: int) -> tuple["FinitePoset", list[int]]:
        """Induced order on the points of ``mask``; returns it and the index list."""
        pts = bits(mask)
        pos = {p: k for k, p in enumerate(pts)}
        up = []
        for p in pts:
            row = 0
            for q in bits(self.up[p] & mask):
                row |= 1 << pos[q]
            up.append(row)
        return FinitePoset(len(pts), up, check=False), pts

    def relabel(self, perm: Sequence[int]) -> "FinitePoset":
        """Poset whose point ``a`` is old point ``perm[a]``."""
        inv = {p: a for a, p in enumerate(perm)}
        up = []
        for p in perm:
            row = 0
            for q in bits(self.up[p]):
                row |= 1 << inv[q]
            up.append(row)
        return FinitePoset(self.n, up, check=False)

    def __eq__(self, other):
        return isinstance(other, FinitePoset) and self.n == other.n and self.up == other.up

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"FinitePoset({self.n}, covers={self.covers()})"


def _refine(P: FinitePoset, colors: Sequence) -> list[int]:
    cur = [(c, popcount(P.up[i]), popcount(P.down[i])) for i, c in enumerate(colors)]
    cur = _rank(cur)
    while True:
        sig = []
        for i in range(P.n):
            ups = sorted(cur[j] for j in bits(P.up[i]) if j != i)
            dns = sorted(cur[j] for j in bits(P.down[i]) if j != i)
            sig.append((cur[i], tuple(ups), tuple(dns)))
        nxt = _rank(sig)
        if len(set(nxt)) == len(set(cur)):
            return nxt
        cur = nxt


def _rank(keys: list) -> list[int]:
    order = {k: r for r, k in enumerate(sorted(set(keys)))}
    return [order[k] for k in keys]


def canonical_form(P: FinitePoset, colors: Sequence | None = None):
    """Isomorphism-invariant key and a permutation realizing it.

    ``colors`` (any sortable labels) must be preserved by isomorphisms; this is
    how isomorphism *over* a base is expressed.  Exhaustive over the
    permutations that respect a refined coloring, so meant for small ``n``.
    Returns ``(key, perm)`` where ``P.relabel(perm)`` is the canonical copy.
    """
    n = P.n
    if colors is None:
        colors = [0] * n
    base = list(colors)
    refined = _refine(P, base)
    cells: dict[int, list[int]] = {}
    for i in range(n):
        cells.setdefault(refined[i], []).append(i)
    cell_list = [cells[c] for c in sorted(cells)]
    best = None
    best_perm = None
    for choice in product(*(permutations(c) for c in cell_list)):
        perm = [x for cell in choice for x in cell]
        inv = {p: a for a, p in enumerate(perm)}
        rows = []
        for p in perm:
            row = 0
            for q in bits(P.up[p]):
                row |= 1 << inv[q]
            rows.append(row)
        key = tuple(rows)
        if best is None or key < best:
            best, best_perm = key, perm
    color_seq = tuple(base[p] for p in best_perm) if best_perm is not None else ()
    return (n, color_seq, best), (best_perm or [])


def is_isomorphic(P: FinitePoset, Q: FinitePoset) -> bool:
    if P.n != Q.n or sorted(map(popcount, P.up)) != sorted(map(popcount, Q.up)):
        return False
    return canonical_form(P)[0] == canonical_form(Q)[0]


@lru_cache(maxsize=None)
def posets_of_size(n: int) -> tuple[FinitePoset, ...]:
    """All posets with exactly ``n`` points up to isomorphism, in canonical labeling.

    Every poset arises from a smaller one by adding a maximal element above a
    down-closed set, so the enumeration extends the previous size and
    deduplicates by canonical form.
    """
    if n == 0:
        return (FinitePoset(0, []),)
    seen = {}
    for P in posets_of_size(n - 1):
        # down-sets of P are complements of its up-sets
        for u in P.upsets():
            ideal = P.full & ~u
            up = [row | (1 << (n - 1) if ideal >> i & 1 else 0) for i, row in enumerate(P.up)]
            up.append(1 << (n - 1))
            Q = FinitePoset(n, up, check=False)
            key, perm = canonical_form(Q)
            if key not in seen:
                seen[key] = Q.relabel(perm)
    return tuple(seen[k] for k in sorted(seen))


def posets_up_to(n: int, include_empty: bool = False) -> list[FinitePoset]:
    start = 0 if include_empty else 1
    return [P for k in range(start, n + 1) for P in posets_of_size(k)]
