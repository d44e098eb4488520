"""Strong order, Density/Splitting checks, dual co-dimension, and the
levelled amalgamation construction of the prime model's finite stages."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

from .duality import (
    Filter, FiniteHA, HAMorphism, amalgamate, embed_over, generated_subalgebra,
    minimal_extensions, subalgebra_from_elements, subalgebras, two_element,
)
from .fragment import theory_key

__all__ = [
    "strong_order", "check_density", "check_splitting", "dual_codim",
    "codim_table", "CodimReport", "codim_report", "d_filter", "dimension",
    "check_lemma_A2", "similar_tuples_report", "extends_to_isomorphism",
    "ResourceBudget", "H0Level", "build_H0_level", "certify_level",
]


def strong_order(b: int, a: int, A: FiniteHA) -> bool:
    """``b >> a``: ``b -> a == a`` and ``a <= b``."""
    return A.imp(b, a) == a and A.leq(a, b)


def check_density(A: FiniteHA) -> tuple[int, int] | None:
    """First ``(a, c)`` with ``c >> a != 1`` and no ``b != 1`` strictly between."""
    els = A.elements
    for a in els:
        if a == A.top:
            continue
        for c in els:
            if not strong_order(c, a, A):
                continue
            if not any(b != A.top and strong_order(c, b, A) and strong_order(b, a, A) for b in els):
                return a, c
    return None


def _splits(A: FiniteHA, a: int, b1: int, b2: int) -> bool:
    target = b1 | b2
    for a1 in A.elements:
        if a1 == A.top or not A.leq(a1, b1):
            continue
        a2 = A.imp(a1, a)
        if a2 == A.top or not A.leq(a2, b2):
            continue
        if A.imp(a2, a) == a1 and a1 | a2 == target:
            return True
    return False


def check_splitting(A: FiniteHA) -> tuple[int, int, int] | None:
    """First ``(a, b1, b2)`` with ``b1 & b2 >> a != 1`` that cannot be split."""
    els = A.elements
    for a in els:
        if a == A.top:
            continue
        for b1, b2 in product(els, els):
            if strong_order(b1 & b2, a, A) and not _splits(A, a, b1, b2):
                return a, b1, b2
    return None


def codim_table(A: FiniteHA) -> dict[int, float]:
    """Dual co-dimension of every element; the top gets infinity."""
    els = [x for x in A.elements if x != A.top]
    # longest strong-order descent starting at x, elements sorted bottom-up
    depth: dict[int, int] = {}
    for x in els:
        depth[x] = max((depth[y] + 1 for y in els if y != x and y in depth and strong_order(x, y, A)),
                       default=0)
    out: dict[int, float] = {}
    for a in els:
        out[a] = max(depth[x] for x in els if A.leq(x, a))
    out[A.top] = math.inf
    return out


def dual_codim(a: int, A: FiniteHA) -> float:
    if a == A.top:
        return math.inf
    return codim_table(A)[a]


@dataclass(frozen=True)
class CodimReport:
    codims: dict
    dimension: int


def codim_report(A: FiniteHA) -> CodimReport:
    return CodimReport(codim_table(A), dimension(A))


def d_filter(A: FiniteHA, d: int) -> Filter:
    """Elements of dual co-dimension greater than ``d``."""
    table = codim_table(A)
    F = Filter(A, frozenset(a for a, c in table.items() if c > d))
    if not F.is_filter():
        raise RuntimeError(f"co-dimension set above {d} is not a filter")
    return F


def dimension(A: FiniteHA) -> int:
    """Height of the prime filter poset."""
    if A.is_trivial:
        raise ValueError("the trivial algebra has no prime filters")
    return A.dual.height()


# ------------------------------------------------------------ similar tuples

def extends_to_isomorphism(A: FiniteHA, a: Sequence[int], A2: FiniteHA, a2: Sequence[int]) -> bool:
    """Whether ``a_i -> a2_i`` extends to an isomorphism of generated subalgebras.

    Closes the pairs under the operations componentwise; the closure is
    the generated subalgebra of the product, and it must be the graph of a
    bijection.
    """
    pairs = {(A.bottom, A2.bottom), (A.top, A2.top), *zip(a, a2)}
    frontier = list(pairs)
    while frontier:
        new = []
        cur = list(pairs)
        for x, x2 in frontier:
            for y, y2 in cur:
                for p in ((x & y, x2 & y2), (x | y, x2 | y2),
                          (A.imp(x, y), A2.imp(x2, y2)), (A.imp(y, x), A2.imp(y2, x2))):
                    if p not in pairs:
                        pairs.add(p)
                        new.append(p)
        frontier = new
    firsts = {p[0] for p in pairs}
    seconds = {p[1] for p in pairs}
    return len(firsts) == len(pairs) == len(seconds)


@dataclass
class SimilarTuplesReport:
    checked: int = 0
    similar: int = 0
    violations: list = field(default_factory=list)
    precondition_failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def similar_tuples_report(pairs, d: int) -> SimilarTuplesReport:
    n = 2 * d + 1
    rep = SimilarTuplesReport()
    for k, (A, a, A2, a2) in enumerate(pairs):
        sub, _ = generated_subalgebra(A, a)
        if dimension(sub) > d:
            rep.precondition_failures.append(k)
            continue
        rep.checked += 1
        if theory_key(a, A, n) != theory_key(a2, A2, n):
            continue
        rep.similar += 1
        if not extends_to_isomorphism(A, a, A2, a2):
            rep.violations.append(k)
    return rep


def check_lemma_A2(pairs, d: int) -> bool:
    """No pair with equal degree-(2d+1) theories fails to generate isomorphic
    subalgebras.  Pairs whose first tuple generates a subalgebra of dimension
    above ``d`` are skipped and reported in :func:`similar_tuples_report`."""
    return similar_tuples_report(pairs, d).ok


# ------------------------------------------------------------ H0 levels

@dataclass(frozen=True)
class ResourceBudget:
    extra_points_cap: int = 1
    max_points: int = 16  # dual points of any intermediate algebra
    max_steps: int = 500


@dataclass
class H0Level:
    n: int
    algebra: FiniteHA
    log: list = field(default_factory=list)
    complete: bool = True
    previous: "H0Level | None" = field(default=None, repr=False)
    from_previous: HAMorphism | None = field(default=None, repr=False)
    # (A_i -> B_ij, A_i -> algebra) for every logged extension
    certificates: list = field(default_factory=list, repr=False)


def _describe(A: FiniteHA) -> dict:
    return {"elements": len(A), "points": A.dual.n, "covers": A.dual.covers()}


def _onto_generated(C: FiniteHA, maps: Sequence[HAMorphism]):
    """Subalgebra of ``C`` generated by the images of ``maps`` and the
    corestrictions of the maps into it."""
    gens = sorted({m(x) for m in maps for x in m.source.elements})
    H, incl = generated_subalgebra(C, gens)
    back = {incl(u): u for u in H.elements}
    H = FiniteHA(H.dual)
    return H, [HAMorphism.from_function(m.source, H, lambda x, m=m: back[m(x)]) for m in maps]


def build_H0_level(n: int, budget: ResourceBudget = ResourceBudget(),
                   previous: H0Level | None = None) -> H0Level:
    """Finite stage ``n`` of the amalgamation chain starting at the 2-element algebra.

    Stage ``k+1`` folds into stage ``k``, one at a time, a copy of every
    minimal proper extension (within the cap) of every subalgebra with at
    most ``k+1`` join-irreducibles.  Each fold amalgamates over the
    subalgebra and keeps the part generated by the two images.
    """
    if n == 0:
        return H0Level(0, two_element(), [{"case": "start", "algebra": _describe(two_element())}])
    prev = previous if previous is not None and previous.n == n - 1 else build_H0_level(n - 1, budget)
    if not prev.complete:
        return H0Level(n, prev.algebra, [{"case": "aborted", "reason": "previous level incomplete"}],
                       complete=False, previous=prev)
    Hn = prev.algebra
    subs = []
    for els in subalgebras(Hn):
        A_i, incl = subalgebra_from_elements(Hn, els)
        if A_i.dual.n <= n:
            subs.append((A_i, incl))
    log: list = []
    certs: list = []
    cur = Hn
    to_cur = HAMorphism.identity(Hn)  # H_n -> current algebra
    steps = 0
    for i, (A_i, incl) in enumerate(subs, 1):
        exts = minimal_extensions(A_i, budget.extra_points_cap)
        log.append({"case": "subalgebra", "i": i, "A": _describe(A_i), "extensions": len(exts)})
        for j, (B, iAB) in enumerate(exts, 1):
            steps += 1
            # case 2 opens a new subalgebra, case 1 continues the current one
            case = 2 if j == 1 and i > 1 else 1
            iAcur = incl.then(to_cur)
            C, jcur, jB = amalgamate(iAcur, iAB)
            if C.dual.n > budget.max_points or steps > budget.max_steps:
                log.append({"case": "budget", "i": i, "j": j, "amalgam_points": C.dual.n})
                return H0Level(n, cur, log, complete=False, previous=prev,
                               from_previous=to_cur, certificates=certs)
            H, (to_H, B_to_H) = _onto_generated(C, [jcur, jB])
            # re-route earlier certificates through the new algebra
            certs = [(x, y.then(to_H)) for x, y in certs]
            to_cur = to_cur.then(to_H)
            cur = H
            certs.append((iAB, incl.then(to_cur)))
            log.append({"case": case, "i": i, "j": j, "B": _describe(B),
                        "amalgam": _describe(C), "result": _describe(cur)})
    log.append({"case": 3, "final": _describe(cur)})
    return H0Level(n, cur, log, True, prev, to_cur, certs)


def certify_level(level: H0Level) -> bool:
    """Every logged extension embeds over its base, and the previous level
    sits inside as a subalgebra."""
    for iAB, iAH in level.certificates:
        if embed_over(iAB, iAH) is None:
            return False
    if level.from_previous is not None:
        f = level.from_previous
        if not (f.is_injective and f.is_homomorphism()):
            return False
    return True
