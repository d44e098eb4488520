"""Degree-bounded fragments of free Heyting algebras and their balls.

Two formulas of degree <= d agree on a point of a Kripke model exactly when
the point's depth-d *type* agrees, where the depth-0 type is the set of true
variables and the depth-(k+1) type is the pair (true variables, set of depth-k
types seen at or above the point).  The d-balls of the dual space of the free
algebra are the realizable depth-d types, so balls are enumerated as types and
each gets a defining pair (phi, psi) with [[phi]] minus [[psi]] equal to the
ball.  This avoids materializing the (astronomically large) fragment lattice;
the explicit fragment is still built, with caps, for small arities and serves
as a cross-check.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from typing import Sequence

from . import prover
from .duality import FiniteHA
from .formula import (
    BOT, TOP, And, Arity, Formula, Imp, Or, Var, big_and, big_or, evaluate,
    simplify, size, to_text,
)
from .poset import FinitePoset, bits, popcount, posets_up_to

__all__ = [
    "CapExceeded", "InconsistencyError", "TypeSystem", "type_system", "Ball",
    "balls", "Fragment", "fragment", "ball_meets_kernel", "theory_key",
    "theory_n", "TheoryN", "realized_types", "similarity_criteria",
    "SimilarityReport", "SimilaritySignature", "similarity_signature",
    "compare_signatures", "similar_n", "equiv_sentence", "eval_equiv", "y_n",
    "solvability_profile", "h_index", "canonical_systems", "emit_FC",
]


class CapExceeded(RuntimeError):
    """A configured resource cap was hit; the result would be incomplete."""


class InconsistencyError(RuntimeError):
    """Two independent computations of the same quantity disagree."""


# ------------------------------------------------------------ Kripke types

class TypeSystem:
    """Interned depth-k types over ``l`` variables.

    Depth-0 type ids are the valuation bitmasks themselves.  A depth-k type
    (k >= 1) is stored as ``(val, frozenset of depth-(k-1) ids)``.
    """

    def __init__(self, l: int):
        self.l = l
        self.full = (1 << l) - 1
        self.keys: list[list] = [list(range(1 << l))]
        self.ids: list[dict] = [{v: v for v in range(1 << l)}]
        self.down: list[list | None] = [None]
        self._states: dict[int, list[frozenset]] = {}
        self._level: dict[int, list[int]] = {}

    def _ensure(self, k):
        while len(self.keys) <= k:
            self.keys.append([])
            self.ids.append({})
            self.down.append([])

    def intern(self, k: int, v: int, seen: frozenset) -> int:
        self._ensure(k)
        key = (v, seen)
        i = self.ids[k].get(key)
        if i is None:
            if k == 1:
                d = v
            else:
                d = self.intern(k - 1, v, frozenset(self.down[k - 1][u] for u in seen))
            i = len(self.keys[k])
            self.keys[k].append(key)
            self.ids[k][key] = i
            self.down[k].append(d)
        return i

    def val(self, k: int, t: int) -> int:
        return t if k == 0 else self.keys[k][t][0]

    def seen(self, k: int, t: int) -> frozenset:
        return self.keys[k][t][1]

    def truncate(self, k: int, t: int, j: int) -> int:
        while k > j:
            t = self.down[k][t]
            k -= 1
        return t

    def leq(self, k: int, a: int, b: int) -> bool:
        """Type order: every degree-<=k formula true at ``a`` is true at ``b``."""
        if k == 0:
            return a & ~b == 0
        va, sa = self.keys[k][a]
        vb, sb = self.keys[k][b]
        return va & ~vb == 0 and sb <= sa

    def point_types(self, P: FinitePoset, valuation: Sequence[int], k: int) -> list[int]:
        """Depth-k type of every point of a Kripke model."""
        v = [0] * P.n
        for i, u in enumerate(valuation):
            for x in bits(u):
                v[x] |= 1 << i
        cur = v
        for j in range(1, k + 1):
            cur = [self.intern(j, v[x], frozenset(cur[y] for y in bits(P.up[x])))
                   for x in range(P.n)]
        return cur

    def _build(self, d: int, v: int, U: frozenset) -> frozenset:
        # set of depth-d types above a new root with valuation v whose
        # children jointly see the depth-d types U
        seen = {v} | {self.truncate(d, u, 0) for u in U}
        for j in range(1, d + 1):
            t = self.intern(j, v, frozenset(seen))
            seen = {t} | {self.truncate(d, u, j) for u in U}
        return frozenset(seen)

    def states(self, d: int, max_states: int = 200_000) -> list[frozenset]:
        """All realizable sets of depth-d types seen from a point (finite trees suffice)."""
        if d in self._states:
            return self._states[d]
        R: set = set()
        minval: dict = {}
        changed = True
        while changed:
            changed = False
            for v in range(1 << self.l):
                cands = [S for S in R if minval[S] & v == v]
                unions = {frozenset()}
                for S in cands:
                    unions |= {U | S for U in unions}
                    if len(unions) > max_states:
                        raise CapExceeded(f"type closure at depth {d} exceeds {max_states} states")
                for U in unions:
                    S = self._build(d, v, U)
                    if S not in R:
                        m = self.full
                        for t in S:
                            m &= self.val(d, t)
                        R.add(S)
                        minval[S] = m
                        changed = True
        out = sorted(R, key=lambda S: (len(S), sorted(S)))
        self._states[d] = out
        return out

    def level(self, d: int) -> list[int]:
        """Realizable depth-d type ids, i.e. the d-balls."""
        if d not in self._level:
            if d == 0:
                self._level[0] = list(range(1 << self.l))
            else:
                ids = set()
                for S in self.states(d - 1):
                    m = self.full
                    for t in S:
                        m &= self.val(d - 1, t)
                    ids.add(self.intern(d, m, S))
                self._level[d] = sorted(ids)
        return self._level[d]


@lru_cache(maxsize=None)
def type_system(l: int) -> TypeSystem:
    return TypeSystem(l)


# ------------------------------------------------------------------- balls

@dataclass(frozen=True)
class Ball:
    """A d-ball presented as ``[[phi]]`` minus ``[[psi]]``."""

    phi: Formula
    psi: Formula
    d: int
    l: int = 0
    kind: int = field(default=0, compare=False)  # depth-d type id

    def text(self, arity: Arity | None = None):
        arity = arity or Arity(self.l)
        return to_text(self.phi, arity), to_text(self.psi, arity)


@lru_cache(maxsize=None)
def _ball_pairs(l: int, d: int) -> dict:
    ts = type_system(l)
    out = {}
    if d == 0:
        for v in ts.level(0):
            phi = big_and(Var(i) for i in range(l) if v >> i & 1)
            psi = big_or(Var(i) for i in range(l) if not v >> i & 1)
            out[v] = (phi, psi)
        return out
    prev = _ball_pairs(l, d - 1)
    diag = {u: simplify(Imp(*prev[u])) for u in ts.level(d - 1)}
    for t in ts.level(d):
        v, seen = ts.keys[d][t]
        phi = big_and([Var(i) for i in range(l) if v >> i & 1]
                      + [diag[u] for u in ts.level(d - 1) if u not in seen])
        psi = big_or([Var(i) for i in range(l) if not v >> i & 1]
                     + [diag[u] for u in ts.level(d - 1) if u in seen])
        out[t] = (simplify(phi), simplify(psi))
    return out


@lru_cache(maxsize=None)
def balls(l: int, d: int) -> tuple[Ball, ...]:
    """All balls of radius 2^-d in the dual space of the free algebra on ``l`` generators."""
    ts = type_system(l)
    pairs = _ball_pairs(l, d)

    def key(t):
        v = ts.val(d, t)
        width = 0 if d == 0 else len(ts.seen(d, t))
        phi, psi = pairs[t]
        return (-popcount(v), width, size(phi), to_text(phi), to_text(psi))

    return tuple(Ball(*pairs[t], d, l, t) for t in sorted(pairs, key=key))


def ball_meets_kernel(B: Ball, a: Sequence[int], A: FiniteHA) -> bool:
    """Whether some prime filter over the kernel of ``a`` lies in ``B``."""
    if len(a) != B.l:
        raise ValueError(f"expected {B.l} parameters, got {len(a)}")
    return evaluate(Imp(B.phi, B.psi), A, a) != A.top


# ---------------------------------------------------------- explicit fragment

def _test_models(l: int, max_points: int = 3):
    out = []
    for P in posets_up_to(max_points):
        A = FiniteHA(P)
        for val in product(P.upsets(), repeat=l):
            out.append((A, val))
    return out


@dataclass(frozen=True)
class Fragment:
    """Representatives of all degree-<=d classes in ``l`` variables."""

    l: int
    d: int
    reps: tuple
    leq: frozenset  # pairs (i, j) with reps[i] <= reps[j]
    _fps: tuple = field(default=(), repr=False, compare=False)

    def __len__(self):
        return len(self.reps)

    def le(self, i, j) -> bool:
        return (i, j) in self.leq

    def index_of(self, f: Formula) -> int:
        fp = _fingerprint(f, _test_models(self.l))
        for i, g in enumerate(self.reps):
            if self._fps[i] == fp and prover.equivalent(f, g):
                return i
        raise KeyError(f"{to_text(f)} is not in the fragment")

    def bottom(self) -> int:
        return next(i for i in range(len(self)) if all(self.le(i, j) for j in range(len(self))))

    def top(self) -> int:
        return next(i for i in range(len(self)) if all(self.le(j, i) for j in range(len(self))))

    def join_irreducibles(self) -> list[int]:
        """Elements with exactly one lower cover."""
        n = len(self)
        out = []
        for j in range(n):
            below = [i for i in range(n) if i != j and self.le(i, j)]
            covers = [i for i in below if not any(k != i and self.le(i, k) for k in below)]
            if len(covers) == 1:
                out.append(j)
        return out

    def lattice_balls(self) -> list[tuple[Formula, Formula]]:
        """(phi, psi) per prime filter: the join-irreducible generating it and
        the largest element outside it."""
        out = []
        for j in self.join_irreducibles():
            outside = [i for i in range(len(self)) if not self.le(j, i)]
            top_out = [m for m in outside if all(self.le(i, m) for i in outside)]
            if len(top_out) != 1:
                raise InconsistencyError("fragment lattice is not distributive")
            out.append((self.reps[j], self.reps[top_out[0]]))
        return out


def _fingerprint(f: Formula, models) -> tuple:
    return tuple(evaluate(f, A, val) for A, val in models)


def _rep_key(f):
    return (size(f), to_text(f))


@lru_cache(maxsize=32)
def fragment(l: int, d: int, max_reps: int = 400, max_queries: int = 200_000) -> Fragment:
    """Explicit degree-<=d fragment by layered closure.

    Start from the lattice closure of the constants and variables; each layer
    adds every implication between current representatives and closes under
    meet and join again.  New candidates are bucketed by their values on small
    test models and deduplicated with the prover.
    """
    models = _test_models(l)
    reps: list = []
    fps: list = []
    buckets: dict = {}
    queries = [0]

    def add(f) -> bool:
        f = simplify(f)
        fp = _fingerprint(f, models)
        for i in buckets.get(fp, ()):
            queries[0] += 1
            if queries[0] > max_queries:
                raise CapExceeded(f"fragment({l},{d}) needs more than {max_queries} prover queries")
            if prover.equivalent(f, reps[i]):
                if _rep_key(f) < _rep_key(reps[i]):
                    reps[i] = f
                return False
        reps.append(f)
        fps.append(fp)
        buckets.setdefault(fp, []).append(len(reps) - 1)
        if len(reps) > max_reps:
            raise CapExceeded(f"fragment({l},{d}) has more than {max_reps} classes")
        return True

    def lattice_close(start):
        frontier = list(range(start, len(reps)))
        while frontier:
            n0 = len(reps)
            for i in frontier:
                for j in range(len(reps)):
                    add(And(reps[i], reps[j]))
                    add(Or(reps[i], reps[j]))
            frontier = list(range(n0, len(reps)))

    for f in (BOT, TOP, *(Var(i) for i in range(l))):
        add(f)
    lattice_close(0)
    for _ in range(d):
        cur = list(reps)
        n0 = len(reps)
        for a, b in product(cur, cur):
            add(Imp(a, b))
        lattice_close(0 if n0 == len(reps) else n0)
    order = sorted(range(len(reps)), key=lambda i: _rep_key(reps[i]))
    reps = [reps[i] for i in order]
    fps = [fps[i] for i in order]
    leq = set()
    for i, j in product(range(len(reps)), repeat=2):
        if all(a & ~b == 0 for a, b in zip(fps[i], fps[j])) and prover.entails(reps[i], reps[j]):
            leq.add((i, j))
    return Fragment(l, d, tuple(reps), frozenset(leq), tuple(fps))


# ------------------------------------------------------------ theories

def realized_types(a: Sequence[int], A: FiniteHA, n: int) -> frozenset:
    """Depth-n types of the points of the dual of ``A`` under the valuation ``a``."""
    ts = type_system(len(a))
    return frozenset(ts.point_types(A.dual, a, n))


def theory_key(a: Sequence[int], A: FiniteHA, n: int) -> frozenset:
    """A complete invariant of the degree-<=n theory of ``a``.

    A formula evaluates to 1 iff it holds at every point, and its truth set
    is an up-set in the type order, so the theory is determined by the
    minimal realized types.
    """
    ts = type_system(len(a))
    real = realized_types(a, A, n)
    return frozenset(t for t in real if not any(u != t and ts.leq(n, u, t) for u in real))


@dataclass(frozen=True)
class TheoryN:
    n: int
    l: int
    key: frozenset
    members: frozenset | None = None  # fragment rep indices, when materialized


def theory_n(a: Sequence[int], A: FiniteHA, n: int, explicit: bool = True) -> TheoryN:
    """Degree-<=n theory of ``a``; with ``explicit`` the fragment members are listed."""
    key = theory_key(a, A, n)
    members = None
    if explicit:
        F = fragment(len(a), n)
        members = frozenset(i for i, f in enumerate(F.reps) if evaluate(f, A, a) == A.top)
        # cross-check against the type-based invariant
        for i, f in enumerate(F.reps):
            expected = _holds_on_types(f, key, len(a), n)
            if expected != (i in members):
                raise InconsistencyError(f"theory mismatch on {to_text(f)}")
    return TheoryN(n, len(a), key, members)


def _holds_on_types(f: Formula, mins: frozenset, l: int, n: int) -> bool:
    # f holds at every point iff it holds on each minimal type; decide it
    # with the ball pair of the type: phi_B <= f
    pairs = _ball_pairs(l, n)
    return all(prover.entails(pairs[t][0], f) for t in mins)


@dataclass(frozen=True)
class SimilarityReport:
    theory: bool  # equal degree-<=n theories
    kernel_balls: bool | None  # equal Y_n, from realized types
    ball_criterion: bool | None  # per-ball comparison by evaluation


def _balls_feasible(l: int, n: int) -> bool:
    return l == 0 or (l == 1 and n <= 4) or (l == 2 and n <= 2)


@dataclass(frozen=True)
class SimilaritySignature:
    """Per-tuple data behind the three n-similarity criteria."""

    theory: frozenset
    kernel_types: frozenset | None
    empty_balls: tuple | None  # per ball: phi_B(a) <= psi_B(a)


def similarity_signature(a: Sequence[int], A: FiniteHA, n: int,
                         with_balls: bool | None = None) -> SimilaritySignature:
    l = len(a)
    th = theory_key(a, A, n)
    if with_balls is None:
        with_balls = _balls_feasible(l, n)
    if not with_balls:
        return SimilaritySignature(th, None, None)
    memo: dict = {}
    empty = tuple(evaluate(B.phi, A, a, memo) & ~evaluate(B.psi, A, a, memo) == 0
                  for B in balls(l, n))
    return SimilaritySignature(th, realized_types(a, A, n), empty)


def compare_signatures(s: SimilaritySignature, s2: SimilaritySignature) -> SimilarityReport:
    if s.kernel_types is None or s2.kernel_types is None:
        return SimilarityReport(s.theory == s2.theory, None, None)
    return SimilarityReport(s.theory == s2.theory, s.kernel_types == s2.kernel_types,
                            s.empty_balls == s2.empty_balls)


def similarity_criteria(a, a2, A: FiniteHA, A2: FiniteHA, n: int,
                        with_balls: bool | None = None) -> SimilarityReport:
    """All three n-similarity criteria, computed independently."""
    if len(a) != len(a2):
        raise ValueError("tuples of different length")
    return compare_signatures(similarity_signature(a, A, n, with_balls),
                              similarity_signature(a2, A2, n, with_balls))


def similar_n(a, a2, A: FiniteHA, A2: FiniteHA, n: int, check: bool | None = None) -> bool:
    """``Th_n(a) == Th_n(a2)``.

    When balls are cheap the ball criterion and the kernel-ball criterion are
    also computed; they must coincide, and equal ball data must imply equal
    theories.  Any violation raises :class:`InconsistencyError`.
    """
    r = similarity_criteria(a, a2, A, A2, n, check)
    if r.kernel_balls is not None:
        if r.kernel_balls != r.ball_criterion:
            raise InconsistencyError("kernel-ball and ball-formula criteria disagree")
        if r.ball_criterion and not r.theory:
            raise InconsistencyError("equal ball data but different theories")
    return r.theory


def equiv_sentence(l: int, n: int) -> list[tuple[Formula, Formula]]:
    """The (phi, psi) pairs of the quantifier-free n-similarity template."""
    return [(B.phi, B.psi) for B in balls(l, n)]


def eval_equiv(pairs, a, a2, A: FiniteHA, A2: FiniteHA | None = None) -> bool:
    A2 = A if A2 is None else A2
    return all((evaluate(p, A, a) & ~evaluate(s, A, a) == 0)
               == (evaluate(p, A2, a2) & ~evaluate(s, A2, a2) == 0) for p, s in pairs)


def y_n(a: Sequence[int], A: FiniteHA, n: int) -> frozenset:
    """Balls of radius 2^-n meeting the kernel of ``a``."""
    return frozenset(B for B in balls(len(a), n) if ball_meets_kernel(B, a, A))


# ------------------------------------------------------------ (l,d)-index

def solvability_profile(a: Sequence[int], A: FiniteHA, d: int) -> frozenset:
    """Degree-<=d theories of ``(a, b)`` over all ``b`` in ``A``.

    A system ``t = 1, s_k != 1`` of degree <= d is solvable at ``a`` iff one
    of these theories contains ``t`` and no ``s_k``; conversely every theory
    here is pinned down by such a system, so two tuples solve the same
    systems iff their profiles agree.
    """
    return frozenset(theory_key(tuple(a) + (b,), A, d) for b in A.elements)


def h_index(A: FiniteHA, l: int, d: int, n_max: int) -> int | None:
    """Least n <= n_max at which n-similar l-tuples solve the same degree-<=d systems."""
    tuples = list(product(A.elements, repeat=l))
    prof = {a: solvability_profile(a, A, d) for a in tuples}
    for n in range(n_max + 1):
        classes: dict = {}
        for a in tuples:
            classes.setdefault(theory_key(a, A, n), set()).add(prof[a])
        if all(len(ps) == 1 for ps in classes.values()):
            return n
    return None


def canonical_systems(l: int, d: int, max_systems: int = 5000) -> list[tuple[Formula, tuple]]:
    """Degree-<=d systems in ``p1..pl, q`` up to a normal form.

    ``t`` ranges over fragment representatives.  Once ``t = 1``, ``s`` and
    ``t -> s`` take the same value, so for a fixed ``t`` the ``s`` candidates
    are grouped by ``t -> s`` (first representative kept), those with
    ``t <= s`` are dropped, and ``s`` lists are antichains for the order
    ``t & s <= s'``: when ``s`` lies below ``s'``, ``s' != 1`` forces ``s != 1``.
    """
    F = fragment(l + 1, d)
    out = []
    for t in F.reps:
        xs: list = []
        for s in F.reps:
            if prover.entails(t, s):
                continue
            if any(prover.entails(And(t, s), r) and prover.entails(And(t, r), s) for r in xs):
                continue
            xs.append(s)
        below = {(i, j) for i in range(len(xs)) for j in range(len(xs))
                 if i != j and prover.entails(And(t, xs[i]), xs[j])}
        antichains: list = [()]

        def grow(chosen, start):
            for k in range(start, len(xs)):
                if any((k, y) in below or (y, k) in below for y in chosen):
                    continue
                nxt = chosen + (k,)
                antichains.append(nxt)
                if len(antichains) + len(out) > max_systems:
                    raise CapExceeded(f"more than {max_systems} systems of degree <= {d}")
                grow(nxt, k + 1)

        grow((), 0)
        for ac in antichains:
            out.append((t, tuple(xs[i] for i in ac)))
    return out


def emit_FC(l: int, d: int, n: int, max_systems: int = 5000) -> str:
    """Text of the universal-existential sentence expressing "(l,d)-index <= n".

    Layout: an ``EQUIV`` definition line, then one bracketed implication
    block per system joined by ``&``::

        EQUIV(p; p') := [(phi(p) <= psi(p)) <-> (phi(p') <= psi(p'))] & ...
        FC := forall p p' (
          [(EQUIV(p; p') & exists q' (t(p',q') = 1 & s(p',q') != 1 ...)) -> exists q (...)]
          & ...
        )
    """
    arity = Arity(l, 1)
    plain = [arity.name(i) for i in range(l + 1)]
    primed = [x + "'" for x in plain]
    pvars = " ".join(plain[:l])
    pvars2 = " ".join(primed[:l])

    def tx(f, names):
        return to_text(f, names=names)

    equiv_parts = [f"[({tx(p, plain)} <= {tx(s, plain)}) <-> ({tx(p, primed)} <= {tx(s, primed)})]"
                   for p, s in equiv_sentence(l, n)]
    lines = [f"# FC sentence l={l} d={d} n={n}: {len(equiv_parts)} balls of radius 2^-{n}"]
    lines.append(f"EQUIV({pvars}; {pvars2}) := " + " & ".join(equiv_parts))

    def body(t, ss, names):
        parts = [f"{tx(t, names)} = 1"] + [f"{tx(s, names)} != 1" for s in ss]
        return " & ".join(parts)

    systems = canonical_systems(l, d, max_systems)
    lines.append(f"# {len(systems)} systems of degree <= {d}")
    quant = f"forall {pvars} {pvars2} " if l else ""
    lines.append(f"FC := {quant}(")
    for k, (t, ss) in enumerate(systems):
        sep = "  & " if k else "    "
        lines.append(f"{sep}[(EQUIV({pvars}; {pvars2}) & exists {primed[l]} ({body(t, ss, primed)}))"
                     f" -> exists {plain[l]} ({body(t, ss, plain)})]")
    lines.append(")")
    return "\n".join(lines) + "\n"
