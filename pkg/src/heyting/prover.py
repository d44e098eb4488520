"""Decision procedure for intuitionistic propositional logic.

Validity is decided with Dyckhoff's contraction-free calculus G4ip, which
terminates without loop checks.  Countermodels for invalid formulas come from
a separate refutation tableau whose open branches are finite Kripke trees;
every model is re-checked by evaluating the formula on the up-set algebra of
its frame before it is reported.
"""
from __future__ import annotations

import sys
import threading
from dataclasses import dataclass
from itertools import product

from .duality import FiniteHA
from .formula import (
    BOT, TOP, And, Bot, Formula, Imp, Or, Top, Var, evaluate,
)
from .poset import FinitePoset, bits, posets_up_to

__all__ = [
    "KripkeModel", "Verdict", "ProverError", "ResourceExceeded", "is_valid",
    "provable", "entails", "equivalent", "countermodel_search", "refute",
    "clear_cache", "cache_info",
]

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


class ProverError(RuntimeError):
    """Internal inconsistency between the decision engine and the model checker."""


class ResourceExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class KripkeModel:
    frame: FinitePoset
    valuation: tuple  # up-set bitmask per variable index
    point: int = 0

    def value(self, f: Formula) -> int:
        """Set of points forcing ``f``."""
        n_vars = max(f.vars, default=-1) + 1
        val = list(self.valuation) + [0] * max(0, n_vars - len(self.valuation))
        return evaluate(f, FiniteHA(self.frame), val)

    def refutes(self, f: Formula) -> bool:
        return not self.value(f) >> self.point & 1


@dataclass(frozen=True)
class Verdict:
    valid: bool
    countermodel: KripkeModel | None = None

    def __bool__(self):
        return self.valid


# ------------------------------------------------------------------ G4ip

_cache: dict = {}
_cache_lock = threading.Lock()
_stats = {"queries": 0, "hits": 0}


def clear_cache():
    with _cache_lock:
        _cache.clear()


def cache_info() -> dict:
    return {"size": len(_cache), **_stats}


class _Budget:
    __slots__ = ("left",)

    def __init__(self, steps):
        self.left = steps

    def tick(self):
        self.left -= 1
        if self.left < 0:
            raise ResourceExceeded("prover step budget exhausted")


def _prove(gamma: frozenset, goal: Formula, budget: _Budget) -> bool:
    key = (gamma, goal)
    r = _cache.get(key)
    if r is not None:
        _stats["hits"] += 1
        return r
    budget.tick()
    r = _prove_uncached(gamma, goal, budget)
    _cache[key] = r
    return r


def _prove_uncached(gamma: frozenset, goal: Formula, budget: _Budget) -> bool:
    if goal is TOP or BOT in gamma or goal in gamma:
        return True
    # invertible left rules
    for h in gamma:
        t = type(h)
        if t is Top:
            return _prove(gamma - {h}, goal, budget)
        if t is And:
            return _prove((gamma - {h}) | {h.left, h.right}, goal, budget)
        if t is Or:
            rest = gamma - {h}
            return (_prove(rest | {h.left}, goal, budget)
                    and _prove(rest | {h.right}, goal, budget))
        if t is Imp:
            a, b = h.left, h.right
            ta = type(a)
            if ta is Bot or b is TOP or b in gamma:
                return _prove(gamma - {h}, goal, budget)
            if ta is Top or (ta is Var and a in gamma):
                return _prove((gamma - {h}) | {b}, goal, budget)
            if ta is And:
                return _prove((gamma - {h}) | {Imp(a.left, Imp(a.right, b))}, goal, budget)
            if ta is Or:
                return _prove((gamma - {h}) | {Imp(a.left, b), Imp(a.right, b)}, goal, budget)
    # invertible right rules
    tg = type(goal)
    if tg is And:
        return _prove(gamma, goal.left, budget) and _prove(gamma, goal.right, budget)
    if tg is Imp:
        return _prove(gamma | {goal.left}, goal.right, budget)
    # non-invertible choices
    if tg is Or:
        if _prove(gamma, goal.left, budget) or _prove(gamma, goal.right, budget):
            return True
    for h in gamma:
        if type(h) is Imp and type(h.left) is Imp:
            c, d, b = h.left.left, h.left.right, h.right
            rest = gamma - {h}
            if (_prove(rest | {Imp(d, b)}, h.left, budget)
                    and _prove(rest | {b}, goal, budget)):
                return True
    return False


def provable(f: Formula, max_steps: int = 2_000_000) -> bool:
    """G4ip decision without countermodel extraction."""
    _stats["queries"] += 1
    return _prove(frozenset(), f, _Budget(max_steps))


def entails(t: Formula, s: Formula, max_steps: int = 2_000_000) -> bool:
    """``t <= s`` in the free Heyting algebra."""
    if t is s or t is BOT or s is TOP:
        return True
    _stats["queries"] += 1
    return _prove(frozenset((t,)), s, _Budget(max_steps))


def equivalent(t: Formula, s: Formula, max_steps: int = 2_000_000) -> bool:
    return entails(t, s, max_steps) and entails(s, t, max_steps)


# ------------------------------------------------- refutation tableau

class _Node:
    __slots__ = ("atoms", "children")

    def __init__(self, atoms, children):
        self.atoms = atoms
        self.children = children


def refute(f: Formula, max_steps: int = 2_000_000) -> KripkeModel | None:
    """Finite Kripke countermodel for ``f`` from a terminating tableau, or None.

    A world is a pair (forced, refuted).  Local rules saturate it; each
    refuted implication whose antecedent is not yet forced opens a successor
    forcing strictly more formulas, which bounds the depth.
    """
    budget = _Budget(max_steps)
    memo: dict = {}

    def world(gamma: frozenset, delta: frozenset):
        key = (gamma, delta)
        if key in memo:
            return memo[key]
        budget.tick()
        memo[key] = None  # unreachable cycle guard; depth strictly grows
        res = saturate(set(gamma), set(delta), [])
        memo[key] = res
        return res

    def saturate(G: set, D: set, pending: list):
        # returns a _Node or None
        while True:
            if BOT in G or TOP in D or G & D:
                return None
            progress = False
            for h in list(G):
                t = type(h)
                if t is And:
                    if h.left not in G or h.right not in G:
                        G.add(h.left)
                        G.add(h.right)
                        progress = True
                elif t is Or:
                    if h.left not in G and h.right not in G:
                        for pick in (h.left, h.right):
                            r = saturate(G | {pick}, set(D), pending)
                            if r is not None:
                                return r
                        return None
                elif t is Imp:
                    if h.left not in D and h.right not in G:
                        r = saturate(set(G), D | {h.left}, pending)
                        if r is not None:
                            return r
                        r = saturate(G | {h.right}, set(D), pending)
                        return r
            for h in list(D):
                t = type(h)
                if t is Or:
                    if h.left not in D or h.right not in D:
                        D.add(h.left)
                        D.add(h.right)
                        progress = True
                elif t is And:
                    if h.left not in D and h.right not in D:
                        for pick in (h.left, h.right):
                            r = saturate(set(G), D | {pick}, pending)
                            if r is not None:
                                return r
                        return None
                elif t is Imp:
                    if h.left in G and h.right not in D:
                        D.add(h.right)
                        progress = True
            if not progress:
                break
        if BOT in G or TOP in D or G & D:
            return None
        gamma = frozenset(G)
        children = []
        for h in sorted((h for h in D if type(h) is Imp), key=lambda h: (h.size, str(h))):
            if h.left in G:
                continue
            child = world(gamma | {h.left}, frozenset((h.right,)))
            if child is None:
                return None
            children.append(child)
        atoms = frozenset(g.index for g in G if type(g) is Var)
        return _Node(atoms, tuple(children))

    root = world(frozenset(), frozenset((f,)))
    if root is None:
        return None
    return _tree_to_model(root, max(f.vars, default=-1) + 1)


def _tree_to_model(root: _Node, n_vars: int) -> KripkeModel:
    ids: dict = {}
    order: list = []
    stack = [root]
    while stack:
        node = stack.pop()
        if id(node) in ids:
            continue
        ids[id(node)] = len(order)
        order.append(node)
        stack.extend(reversed(node.children))
    pairs = [(ids[id(n)], ids[id(c)]) for n in order for c in n.children]
    P = FinitePoset.from_pairs(len(order), pairs)
    val = []
    for i in range(n_vars):
        mask = 0
        for k, node in enumerate(order):
            if i in node.atoms:
                mask |= 1 << k
        val.append(mask)
    return KripkeModel(P, tuple(val), ids[id(root)])


# ------------------------------------------------- brute-force search

def countermodel_search(f: Formula, max_points: int) -> KripkeModel | None:
    """Exhaustive search over all frames with at most ``max_points`` points
    (up to isomorphism) and all persistent valuations.

    Absence of a model within the bound proves nothing.
    """
    if max_points < 1:
        raise ValueError("max_points must be >= 1")
    n_vars = max(f.vars, default=-1) + 1
    for P in posets_up_to(max_points):
        A = FiniteHA(P)
        ups = P.upsets()
        for val in product(ups, repeat=n_vars):
            v = evaluate(f, A, val)
            if v != A.top:
                missing = A.top & ~v
                # a minimal refuting point
                point = next(x for x in bits(missing) if not (P.down[x] & ~(1 << x) & missing))
                return KripkeModel(P, tuple(val), point)
    return None


def is_valid(f: Formula, max_steps: int = 2_000_000, fallback_points: int = 6) -> Verdict:
    """Validity with a verified countermodel whenever the answer is negative."""
    if provable(f, max_steps):
        return Verdict(True)
    model = refute(f, max_steps)
    if model is None or not model.refutes(f):
        for k in range(1, fallback_points + 1):
            model = countermodel_search(f, k)
            if model is not None:
                break
    if model is None or not model.refutes(f):
        raise ProverError(f"no verified countermodel for {f}")
    return Verdict(False, model)
