"""Equation systems over finite Heyting algebras.

A system ``t = 1, s_1 != 1, ..., s_k != 1`` has parameters ``p1..pl`` and
unknowns ``q..``.  Solutions are searched inside a given algebra, inside
finite extensions of it (bounded by the size of the extension's dual), or
decided through the discriminant terms built from balls of a chosen radius.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

from . import prover
from .duality import (
    FiniteHA, HAMorphism, amalgamate, generated_subalgebra, surjective_pmorphisms,
)
from .formula import TOP, And, Arity, Formula, Imp, Or, big_and, evaluate, simplify
from .fragment import balls, fragment
from .poset import canonical_form, posets_of_size

__all__ = [
    "System", "ExtensionWitness", "DiscriminantReport", "eval_system",
    "solve_in", "solve_in_extension", "kernel_projection_check",
    "discriminant", "codiscriminant", "discriminant_report",
    "decide_by_discriminant", "stable_radius",
]


@dataclass(frozen=True)
class System:
    t: Formula
    s: tuple = ()
    arity: Arity = Arity(0, 1)

    def __post_init__(self):
        object.__setattr__(self, "s", tuple(self.s))
        n = self.arity.total
        for f in (self.t, *self.s):
            if any(i >= n for i in f.vars):
                raise ValueError(f"formula uses a variable outside arity {self.arity}")

    @property
    def degree(self) -> int:
        return max(f.degree for f in (self.t, *self.s))


@dataclass(frozen=True)
class ExtensionWitness:
    B: FiniteHA
    embedding: HAMorphism = field(repr=False)
    solution: tuple


def _check_arity(S: System, a, b=None):
    if len(a) != S.arity.l:
        raise ValueError(f"expected {S.arity.l} parameters, got {len(a)}")
    if b is not None and len(b) != S.arity.m:
        raise ValueError(f"expected {S.arity.m} unknowns, got {len(b)}")


def eval_system(S: System, a: Sequence[int], b: Sequence[int], A: FiniteHA) -> bool:
    _check_arity(S, a, b)
    val = tuple(a) + tuple(b)
    memo: dict = {}
    if evaluate(S.t, A, val, memo) != A.top:
        return False
    return all(evaluate(s, A, val, memo) != A.top for s in S.s)


def solve_in(A: FiniteHA, S: System, a: Sequence[int]) -> tuple | None:
    """First solution in ``A`` in enumeration order, or None (exact)."""
    _check_arity(S, a)
    for b in product(A.elements, repeat=S.arity.m):
        if eval_system(S, a, b, A):
            return b
    return None


def _search_dual(Q, P0_gens, S: System, base_dual):
    """Solutions over extensions of the base presented by ``Q``: returns
    (dual map, solution) for the first hit or None."""
    seen = set()
    for f in surjective_pmorphisms(Q, base_dual):
        key = canonical_form(Q, f)[0]
        if key in seen:
            continue
        seen.add(key)
        B = FiniteHA(Q)
        image = [0] * len(P0_gens)
        pre = [0] * base_dual.n
        for y, x in enumerate(f):
            pre[x] |= 1 << y
        for k, g in enumerate(P0_gens):
            for x in range(base_dual.n):
                if g >> x & 1:
                    image[k] |= pre[x]
        for b in product(B.elements, repeat=S.arity.m):
            if eval_system(S, image, b, B):
                return f, b
    return None


def _search_dual_job(args):
    return _search_dual(*args)


def solve_in_extension(A: FiniteHA, a: Sequence[int], S: System, dual_size_cap: int,
                       jobs: int = 1) -> ExtensionWitness | None:
    """A verified solution in some finite extension of ``A``, or None within the cap.

    The search runs over finite posets Q (at most ``dual_size_cap`` points)
    with a surjective p-morphism onto the dual of the subalgebra generated by
    ``a``.  A hit is amalgamated with ``A`` over that subalgebra, so the
    witness algebra really extends ``A``.  None means nothing was found
    within the cap, not that the system is unsolvable.
    """
    _check_arity(S, a)
    b = solve_in(A, S, a)
    if b is not None:
        return ExtensionWitness(A, HAMorphism.identity(A), tuple(b))
    if A.is_trivial:
        return None  # the trivial algebra only extends to itself
    A0, incl = generated_subalgebra(A, a)
    P0 = A0.dual
    candidates = [Q for k in range(P0.n, dual_size_cap + 1) for Q in posets_of_size(k)]
    args = [(Q, A0.generators, S, P0) for Q in candidates]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(_search_dual_job, args, chunksize=4))
    else:
        results = (_search_dual(*x) for x in args)
    for Q, hit in zip(candidates, results):
        if hit is None:
            continue
        f, sol = hit
        emb = HAMorphism(A0, FiniteHA(Q), f)
        D, jA, jB = amalgamate(incl, emb)
        solution = tuple(jB(x) for x in sol)
        image = tuple(jA(x) for x in a)
        if not eval_system(S, image, solution, D):
            raise RuntimeError("amalgamated witness fails verification")
        return ExtensionWitness(D, jA, solution)
    return None


def kernel_projection_check(t: Formula, a: Sequence[int], A: FiniteHA, degree_cap: int) -> bool:
    """No parameter-only consequence of ``t`` up to the degree cap fails at ``a``.

    One-sided: True means no violation was found among degree-<=cap
    representatives.
    """
    F = fragment(len(a), degree_cap)
    for theta in F.reps:
        if prover.entails(t, theta) and evaluate(theta, A, a) != A.top:
            return False
    return True


@dataclass(frozen=True)
class DiscriminantReport:
    radius_exponent: int
    delta: Formula
    nablas: tuple
    ball_sets: dict  # "D" -> indices, "D'k" -> indices per s_k


def discriminant(t: Formula, l: int, r: int) -> tuple[Formula, tuple]:
    """Meet of ``phi_B -> psi_B`` over balls ``B`` with ``t & phi_B <= psi_B``."""
    idx = tuple(i for i, B in enumerate(balls(l, r)) if prover.entails(And(t, B.phi), B.psi))
    bs = balls(l, r)
    return big_and(simplify(Imp(bs[i].phi, bs[i].psi)) for i in idx), idx


def codiscriminant(t: Formula, s: Formula, l: int, r: int) -> tuple[Formula, tuple]:
    """Meet of ``phi_B -> psi_B`` over balls with ``t & phi_B`` not below ``s | psi_B``."""
    bs = balls(l, r)
    idx = tuple(i for i, B in enumerate(bs) if not prover.entails(And(t, B.phi), Or(s, B.psi)))
    return big_and(simplify(Imp(bs[i].phi, bs[i].psi)) for i in idx), idx


def discriminant_report(S: System, r: int) -> DiscriminantReport:
    if S.arity.m != 1:
        raise ValueError("the discriminant needs exactly one unknown")
    l = S.arity.l
    delta, D = discriminant(S.t, l, r)
    nablas, sets = [], {"D": D}
    for k, s in enumerate(S.s):
        nab, Dk = codiscriminant(S.t, s, l, r)
        nablas.append(nab)
        sets[f"D'{k + 1}"] = Dk
    return DiscriminantReport(r, delta, tuple(nablas), sets)


def decide_by_discriminant(S: System, a: Sequence[int], A: FiniteHA, r: int) -> bool:
    """Solvable in some extension according to the radius-r discriminant."""
    _check_arity(S, a)
    rep = discriminant_report(S, r)
    if evaluate(rep.delta, A, a) != A.top:
        return False
    return all(evaluate(n, A, a) != A.top for n in rep.nablas)


def stable_radius(S: System, cases: Sequence[tuple[FiniteHA, tuple]], r_max: int,
                  cap: int = 3) -> int | None:
    """Least r <= r_max where radius r and r+1 decide every case alike and
    every positive brute-force witness (found within ``cap``) is confirmed."""
    witnesses = [solve_in_extension(A, a, S, cap) is not None for A, a in cases]
    prev = [decide_by_discriminant(S, a, A, 0) for A, a in cases]
    for r in range(r_max + 1):
        nxt = [decide_by_discriminant(S, a, A, r + 1) for A, a in cases]
        if prev == nxt and all(d or not w for d, w in zip(prev, witnesses)):
            return r
        prev = nxt
    return None
