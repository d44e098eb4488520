"""Finite Heyting algebras presented as up-set lattices of finite posets.

An element of :class:`FiniteHA` is an up-set of its dual poset, encoded as a
bitmask over the points.  Meet and join are ``&`` and ``|``; implication is
``{x : up(x) & a <= b}``.  Morphisms are carried by their dual p-morphisms,
so an algebra map ``A -> B`` stores a map from points of ``B`` to points of
``A`` and acts on elements by preimage.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Iterable, Iterator, Sequence

from .poset import FinitePoset, bits, canonical_form, popcount, posets_of_size

__all__ = [
    "FiniteHA", "HAMorphism", "PMorphism", "Filter", "upsets", "ha_imp",
    "join_irreducibles", "prime_filters", "check_pmorphism",
    "generated_subalgebra", "subalgebra_from_elements", "quotient_by_filter",
    "factor_through", "amalgamate", "minimal_extensions", "embed_over",
    "surjective_pmorphisms", "subalgebras", "is_isomorphic_algebra",
    "two_element", "chain_algebra", "boolean_algebra", "trivial_algebra",
    "corpus_algebras",
]


def ha_imp(U: int, V: int, P: FinitePoset) -> int:
    """Relative pseudo-complement ``{x : up(x) & U <= V}`` of up-sets of ``P``."""
    bad = U & ~V
    r = 0
    for x in range(P.n):
        if not P.up[x] & bad:
            r |= 1 << x
    return r


class FiniteHA:
    """Heyting algebra of all up-sets of ``dual``.

    ``generators`` is an optional tuple of distinguished elements (up-sets).
    """

    def __init__(self, dual: FinitePoset, generators: Sequence[int] = ()):
        self.dual = dual
        self.generators = tuple(generators)
        for g in self.generators:
            if not dual.is_upset(g):
                raise ValueError(f"generator {g:#b} is not an up-set")
        self.bottom = 0
        self.top = dual.full
        self._index = None

    # Heyting operations on bitmask elements
    @staticmethod
    def meet(a: int, b: int) -> int:
        return a & b

    @staticmethod
    def join(a: int, b: int) -> int:
        return a | b

    def imp(self, a: int, b: int) -> int:
        bad = a & ~b
        if not bad:
            return self.top
        up = self.dual.up
        r = 0
        for x in range(self.dual.n):
            if not up[x] & bad:
                r |= 1 << x
        return r

    def neg(self, a: int) -> int:
        return self.imp(a, 0)

    @staticmethod
    def leq(a: int, b: int) -> bool:
        return a & ~b == 0

    @property
    def elements(self) -> list[int]:
        return self.dual.upsets()

    def index(self, a: int) -> int:
        if self._index is None:
            self._index = {e: k for k, e in enumerate(self.elements)}
        return self._index[a]

    def __len__(self):
        return len(self.elements)

    def __contains__(self, a) -> bool:
        return isinstance(a, int) and 0 <= a <= self.top and self.dual.is_upset(a)

    @property
    def is_trivial(self) -> bool:
        return self.dual.n == 0

    def principal(self, x: int) -> int:
        """Up-set generated by point ``x``; these are the join-irreducibles."""
        return self.dual.up[x]

    def with_generators(self, gens: Sequence[int]) -> "FiniteHA":
        return FiniteHA(self.dual, gens)

    def __repr__(self):
        return f"FiniteHA(|A|={len(self)}, dual={self.dual!r})"

    def __eq__(self, other):
        return (isinstance(other, FiniteHA) and self.dual == other.dual
                and self.generators == other.generators)

    def __hash__(self):
        return hash((self.dual, self.generators))


def upsets(P: FinitePoset) -> FiniteHA:
    return FiniteHA(P)


def trivial_algebra() -> FiniteHA:
    return FiniteHA(FinitePoset(0, []))


def two_element() -> FiniteHA:
    return FiniteHA(FinitePoset.chain(1))


def chain_algebra(k: int) -> FiniteHA:
    """The ``k``-element chain (dual: a chain with ``k-1`` points)."""
    return FiniteHA(FinitePoset.chain(k - 1))


def boolean_algebra(atoms: int) -> FiniteHA:
    return FiniteHA(FinitePoset.antichain(atoms))


@dataclass(frozen=True)
class PMorphism:
    source: FinitePoset
    target: FinitePoset
    map: tuple


def check_pmorphism(f: PMorphism) -> bool:
    """Monotone and satisfies the back condition."""
    S, T, m = f.source, f.target, f.map
    if len(m) != S.n:
        return False
    for x in range(S.n):
        image = 0
        for y in bits(S.up[x]):
            image |= 1 << m[y]
        # monotone: image of up(x) inside up(m(x)); back: it is all of it
        if image != T.up[m[x]]:
            return False
    return True


class HAMorphism:
    """Algebra map ``source -> target`` given by its dual map.

    ``dual_map[y]`` is the point of ``source.dual`` corresponding to the
    preimage of the prime filter of point ``y`` of ``target.dual``.
    """

    def __init__(self, source: FiniteHA, target: FiniteHA, dual_map: Sequence[int]):
        self.source = source
        self.target = target
        self.dual_map = tuple(dual_map)
        if len(self.dual_map) != target.dual.n:
            raise ValueError("dual map must be total on the target's points")
        # preimage of each source point, used to push up-sets forward
        pre = [0] * source.dual.n
        for y, x in enumerate(self.dual_map):
            pre[x] |= 1 << y
        self._pre = pre

    def __call__(self, a: int) -> int:
        r = 0
        for x in bits(a):
            r |= self._pre[x]
        return r

    @property
    def map(self) -> dict[int, int]:
        return {a: self(a) for a in self.source.elements}

    @property
    def dual(self) -> PMorphism:
        return PMorphism(self.target.dual, self.source.dual, self.dual_map)

    @property
    def is_injective(self) -> bool:
        return all(self._pre)

    def is_homomorphism(self) -> bool:
        """Exhaustive check of 0, 1, meet, join and implication preservation."""
        S, T = self.source, self.target
        if self(S.bottom) != T.bottom or self(S.top) != T.top:
            return False
        els = S.elements
        for a, b in product(els, els):
            fa, fb = self(a), self(b)
            if self(a & b) != fa & fb or self(a | b) != fa | fb:
                return False
            if self(S.imp(a, b)) != T.imp(fa, fb):
                return False
        return True

    def then(self, other: "HAMorphism") -> "HAMorphism":
        """Composite ``other . self``."""
        if other.source.dual != self.target.dual:
            raise ValueError("morphisms do not compose")
        return HAMorphism(self.source, other.target,
                          [self.dual_map[y] for y in other.dual_map])

    @classmethod
    def identity(cls, A: FiniteHA) -> "HAMorphism":
        return cls(A, A, range(A.dual.n))

    @classmethod
    def from_function(cls, source: FiniteHA, target: FiniteHA,
                      fn: Callable[[int], int]) -> "HAMorphism":
        """Recover the dual map of a homomorphism from its action on join-irreducibles.

        For target point ``y`` the set of source points ``x`` with
        ``y in fn(up(x))`` is the down-set of a single point, its maximum.
        """
        images = [fn(source.principal(x)) for x in range(source.dual.n)]
        dual = []
        for y in range(target.dual.n):
            below = [x for x in range(source.dual.n) if images[x] >> y & 1]
            tops = [x for x in below if not any(z != x and source.dual.leq(x, z) for z in below)]
            if len(tops) != 1:
                raise ValueError("function is not a Heyting algebra homomorphism")
            dual.append(tops[0])
        return cls(source, target, dual)

    def __repr__(self):
        return f"HAMorphism(|src|={self.source.dual.n} pts, |tgt|={self.target.dual.n} pts, dual={self.dual_map})"


@dataclass(frozen=True)
class Filter:
    algebra: FiniteHA = field(repr=False)
    members: frozenset

    @property
    def generator(self) -> int:
        """Least element; every filter of a finite algebra is principal."""
        g = self.algebra.top
        for a in self.members:
            g &= a
        return g

    def is_filter(self) -> bool:
        A, M = self.algebra, self.members
        if A.top not in M:
            return False
        for a in M:
            for b in M:
                if a & b not in M:
                    return False
        for a in M:
            for b in A.elements:
                if A.leq(a, b) and b not in M:
                    return False
        return True

    def is_prime(self) -> bool:
        A, M = self.algebra, self.members
        if A.bottom in M:
            return False
        for a in A.elements:
            for b in A.elements:
                if a | b in M and a not in M and b not in M:
                    return False
        return True

    @classmethod
    def principal(cls, A: FiniteHA, c: int) -> "Filter":
        return cls(A, frozenset(a for a in A.elements if A.leq(c, a)))


def join_irreducibles(A: FiniteHA) -> tuple[FinitePoset, list[int]]:
    """Poset of join-irreducible elements, computed from the lattice order alone.

    Point ``i`` sits below point ``k`` when ``jis[k] <= jis[i]`` so that the
    result is isomorphic to the dual poset.  Returns the poset and the element
    list ``jis``.
    """
    els = A.elements
    jis = []
    for j in els:
        if j == A.bottom:
            continue
        below = 0
        for b in els:
            if b != j and A.leq(b, j):
                below |= b
        if below != j:
            jis.append(j)
    pairs = [(i, k) for i, a in enumerate(jis) for k, b in enumerate(jis) if A.leq(b, a)]
    return FinitePoset.from_pairs(len(jis), pairs), jis


def prime_filters(A: FiniteHA) -> list[Filter]:
    """One prime filter per dual point: ``{a : x in a}``."""
    return [Filter(A, frozenset(a for a in A.elements if a >> x & 1)) for x in range(A.dual.n)]


def subalgebra_from_elements(A: FiniteHA, elements: Iterable[int]) -> tuple[FiniteHA, HAMorphism]:
    """Present a subset closed under the Heyting operations as its own algebra."""
    S = sorted(set(elements), key=lambda u: (popcount(u), u))
    jis = []
    for j in S:
        if j == 0:
            continue
        below = 0
        for b in S:
            if b != j and b & ~j == 0:
                below |= b
        if below != j:
            jis.append(j)
    pairs = [(i, k) for i, a in enumerate(jis) for k, b in enumerate(jis) if b & ~a == 0]
    P = FinitePoset.from_pairs(len(jis), pairs)
    sub = FiniteHA(P)

    def incl(u):
        r = 0
        for i in bits(u):
            r |= jis[i]
        return r

    return sub, HAMorphism.from_function(sub, A, incl)


def _closure(A: FiniteHA, seed: Iterable[int]) -> set[int]:
    S = {A.bottom, A.top, *seed}
    frontier = list(S)
    while frontier:
        new = []
        cur = list(S)
        for a in frontier:
            for b in cur:
                for c in (a & b, a | b, A.imp(a, b), A.imp(b, a)):
                    if c not in S:
                        S.add(c)
                        new.append(c)
        frontier = new
    return S


def generated_subalgebra(A: FiniteHA, gens: Sequence[int]) -> tuple[FiniteHA, HAMorphism]:
    """Least subalgebra containing ``gens``, with its inclusion into ``A``.

    The generators of the result are the preimages of ``gens``.
    """
    sub, incl = subalgebra_from_elements(A, _closure(A, gens))
    back = {incl(u): u for u in sub.elements}
    sub = sub.with_generators([back[g] for g in gens])
    return sub, HAMorphism(sub, A, incl.dual_map)


def subalgebras(A: FiniteHA) -> list[frozenset]:
    """All subalgebras of ``A`` as element sets, smallest first."""
    start = frozenset(_closure(A, ()))
    seen = {start}
    stack = [start]
    while stack:
        S = stack.pop()
        for x in A.elements:
            if x not in S:
                T = frozenset(_closure(A, S | {x}))
                if T not in seen:
                    seen.add(T)
                    stack.append(T)
    return sorted(seen, key=lambda s: (len(s), sorted(s)))


def quotient_by_filter(A: FiniteHA, I: Filter) -> tuple[FiniteHA, HAMorphism]:
    """``A/I`` with its projection.

    With ``c`` the least element of ``I`` the quotient is presented on the
    points of ``c`` and the projection is ``a -> a & c``.
    """
    c = I.generator
    sub, pts = A.dual.subposet(c)
    Q = FiniteHA(sub)
    return Q, HAMorphism(A, Q, pts)


def factor_through(f: HAMorphism, I: Filter) -> HAMorphism | None:
    """The unique ``g`` with ``f = g . proj_I`` if ``I`` lies in the kernel of ``f``."""
    c = I.generator
    if any(not c >> x & 1 for x in f.dual_map):
        return None
    Q, _ = quotient_by_filter(f.source, I)
    pos = {p: k for k, p in enumerate(bits(c))}
    return HAMorphism(Q, f.target, [pos[x] for x in f.dual_map])


def filter_kernel(f: HAMorphism) -> Filter:
    A = f.source
    return Filter(A, frozenset(a for a in A.elements if f(a) == f.target.top))


def amalgamate(iB: HAMorphism, iC: HAMorphism) -> tuple[FiniteHA, HAMorphism, HAMorphism]:
    """Amalgam of two embeddings of a common algebra.

    The dual of the amalgam is the fibre product of the dual surjections with
    the product order.
    """
    if iB.source.dual != iC.source.dual:
        raise ValueError("embeddings must share their source")
    if not (iB.is_injective and iC.is_injective):
        raise ValueError("amalgamation needs injective morphisms")
    fB, fC = iB.dual_map, iC.dual_map
    pts = [(b, c) for b in range(len(fB)) for c in range(len(fC)) if fB[b] == fC[c]]
    PB, PC = iB.target.dual, iC.target.dual
    up = []
    for b, c in pts:
        row = 0
        for k, (b2, c2) in enumerate(pts):
            if PB.leq(b, b2) and PC.leq(c, c2):
                row |= 1 << k
        up.append(row)
    D = FiniteHA(FinitePoset(len(pts), up, check=False))
    jB = HAMorphism(iB.target, D, [b for b, _ in pts])
    jC = HAMorphism(iC.target, D, [c for _, c in pts])
    return D, jB, jC


def surjective_pmorphisms(Q: FinitePoset, P: FinitePoset,
                          constraint: Sequence[int | frozenset] | None = None,
                          first_only: bool = False) -> Iterator[tuple[int, ...]]:
    """Surjective p-morphisms ``Q -> P`` by backtracking.

    ``constraint[x]`` (an int or set of ints) restricts the image of point ``x``.
    Points are assigned top-down, so when ``x`` is placed all points above it
    are known and the back condition reduces to ``f(up x) == up f(x)``.
    """
    order = Q.topdown()
    m = [None] * Q.n
    allowed = []
    for x in range(Q.n):
        if constraint is None:
            allowed.append(range(P.n))
        else:
            c = constraint[x]
            allowed.append([c] if isinstance(c, int) else sorted(c))

    def rec(k):
        if k == len(order):
            hit = 0
            for y in m:
                hit |= 1 << y
            if hit == P.full:
                yield tuple(m)
            return
        x = order[k]
        strict = Q.up[x] & ~(1 << x)
        image_above = 0
        for z in bits(strict):
            image_above |= 1 << m[z]
        for y in allowed[x]:
            if (image_above | 1 << y) == P.up[y]:
                m[x] = y
                yield from rec(k + 1)
                if first_only:
                    return
        m[x] = None

    if Q.n == 0:
        if P.n == 0:
            yield ()
        return
    yield from rec(0)


def embed_over(iAB: HAMorphism, iAH: HAMorphism) -> HAMorphism | None:
    """An embedding ``B -> H`` fixing ``A``, searched as a dual p-morphism."""
    if iAB.source.dual != iAH.source.dual:
        raise ValueError("both morphisms must start at the same algebra")
    B, H = iAB.target, iAH.target
    fB, fH = iAB.dual_map, iAH.dual_map
    constraint = [frozenset(b for b in range(B.dual.n) if fB[b] == fH[x]) for x in range(H.dual.n)]
    for h in surjective_pmorphisms(H.dual, B.dual, constraint):
        return HAMorphism(B, H, h)
    return None


def minimal_extensions(A: FiniteHA, extra_points_cap: int = 1) -> list[tuple[FiniteHA, HAMorphism]]:
    """Minimal proper extensions of ``A`` whose dual has at most
    ``|dual A| + extra_points_cap`` points, one per isomorphism class over ``A``.

    Completeness holds only within the cap.
    """
    P = A.dual
    out = []
    seen = set()
    for k in range(P.n + 1, P.n + extra_points_cap + 1):
        for Q in posets_of_size(k):
            for f in surjective_pmorphisms(Q, P):
                key = canonical_form(Q, f)[0]
                if key in seen:
                    continue
                seen.add(key)
                B = FiniteHA(Q)
                emb = HAMorphism(A, B, f)
                if _is_minimal(emb):
                    out.append((B, emb))
    return out


def _is_minimal(emb: HAMorphism) -> bool:
    B = emb.target
    image = {emb(a) for a in emb.source.elements}
    if len(image) == len(B):
        return False
    for b in B.elements:
        if b not in image and len(_closure(B, image | {b})) != len(B):
            return False
    return True


def is_isomorphic_algebra(A: FiniteHA, B: FiniteHA) -> bool:
    if A.dual.n != B.dual.n:
        return False
    return canonical_form(A.dual)[0] == canonical_form(B.dual)[0]


def corpus_algebras(max_size: int = 32, max_points: int = 5, include_trivial: bool = True) -> list[FiniteHA]:
    """Up-set algebras of all posets with at most ``max_points`` points and
    at most ``max_size`` elements, up to isomorphism."""
    out = [trivial_algebra()] if include_trivial else []
    for k in range(1, max_points + 1):
        for P in posets_of_size(k):
            if len(P.upsets()) <= max_size:
                out.append(FiniteHA(P))
    return out
