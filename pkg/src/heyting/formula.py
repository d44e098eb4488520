"""IPC formulas: hash-consed syntax trees, parsing, printing and enumeration.

Formulas are interned, so two structurally equal trees are the same object.
Equality and hashing are therefore identity-based and O(1), which matters
because balls and discriminants share large subterms.
"""
from __future__ import annotations

import re
import threading
from dataclasses import dataclass
from itertools import product
from typing import Callable, Iterable, Iterator, Mapping, Sequence

__all__ = [
    "Arity", "Formula", "Var", "Bot", "Top", "And", "Or", "Imp", "BOT", "TOP",
    "Neg", "big_and", "big_or", "parse", "ParseError", "to_text", "degree",
    "size", "variables", "substitute", "evaluate", "normalize",
    "enumerate_syntactic", "simplify", "random_formula",
]


@dataclass(frozen=True)
class Arity:
    """Variable layout: ``p1..pl`` occupy indices ``0..l-1``, q-variables follow."""

    l: int
    m: int = 0

    def __post_init__(self):
        if self.l < 0 or self.m < 0:
            raise ValueError(f"negative arity {self}")

    @property
    def total(self) -> int:
        return self.l + self.m

    def name(self, i: int) -> str:
        if i < self.l:
            return f"p{i + 1}"
        j = i - self.l
        if j >= self.m:
            raise IndexError(f"variable index {i} out of arity {self}")
        return "q" if self.m == 1 else f"q{j + 1}"


_lock = threading.Lock()
_table: dict = {}


class Formula:
    __slots__ = ("_size", "_degree", "_vars", "__weakref__")

    # structural interning is done in the subclasses' __new__
    def __repr__(self):
        return f"Formula({to_text(self)!r})"

    def __str__(self):
        return to_text(self)

    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __rshift__(self, other):
        return Imp(self, other)

    @property
    def size(self) -> int:
        return self._size

    @property
    def degree(self) -> int:
        return self._degree

    @property
    def vars(self) -> frozenset:
        return self._vars


def _intern(cls, key, init: Callable[[Formula], None]):
    obj = _table.get(key)
    if obj is not None:
        return obj
    with _lock:
        obj = _table.get(key)
        if obj is None:
            obj = object.__new__(cls)
            init(obj)
            _table[key] = obj
    return obj


class Var(Formula):
    __slots__ = ("index",)

    def __new__(cls, index: int):
        index = int(index)
        if index < 0:
            raise ValueError("variable index must be >= 0")

        def init(o):
            o.index = index
            o._size, o._degree, o._vars = 1, 0, frozenset((index,))
        return _intern(cls, (cls, index), init)

    def __reduce__(self):
        return (Var, (self.index,))


class _Const(Formula):
    __slots__ = ()

    def __new__(cls):
        def init(o):
            o._size, o._degree, o._vars = 1, 0, frozenset()
        return _intern(cls, (cls,), init)

    def __reduce__(self):
        return (type(self), ())


class Bot(_Const):
    __slots__ = ()


class Top(_Const):
    __slots__ = ()


class _Binary(Formula):
    __slots__ = ("left", "right")
    _bump = 0

    def __new__(cls, left: Formula, right: Formula):
        if not isinstance(left, Formula) or not isinstance(right, Formula):
            raise TypeError("operands must be formulas")

        def init(o):
            o.left, o.right = left, right
            o._size = left._size + right._size + 1
            o._degree = max(left._degree, right._degree) + cls._bump
            o._vars = left._vars | right._vars
        return _intern(cls, (cls, left, right), init)

    def __reduce__(self):
        return (type(self), (self.left, self.right))


class And(_Binary):
    __slots__ = ()


class Or(_Binary):
    __slots__ = ()


class Imp(_Binary):
    __slots__ = ()
    _bump = 1


BOT = Bot()
TOP = Top()


def Neg(f: Formula) -> Formula:
    return Imp(f, BOT)


def big_and(fs: Iterable[Formula]) -> Formula:
    out = None
    for f in fs:
        out = f if out is None else And(out, f)
    return TOP if out is None else out


def big_or(fs: Iterable[Formula]) -> Formula:
    out = None
    for f in fs:
        out = f if out is None else Or(out, f)
    return BOT if out is None else out


def degree(f: Formula) -> int:
    return f._degree


def size(f: Formula) -> int:
    return f._size


def variables(f: Formula) -> frozenset:
    return f._vars


# ---------------------------------------------------------------- parsing

class ParseError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


_TOKEN = re.compile(r"\s*(->|[&|~()01]|[A-Za-z_][A-Za-z0-9_]*|\S)")


def _tokenize(text: str) -> list[tuple[str, int]]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # trailing whitespace only
            break
        out.append((m.group(1), m.start(1)))
        pos = m.end()
    return out


def _lookup(name: str, arity: Arity, pos: int) -> int:
    m = re.fullmatch(r"p(\d+)", name)
    if m:
        k = int(m.group(1))
        if not 1 <= k <= arity.l:
            raise ParseError(f"variable {name} outside arity {arity.l} p-variables", pos)
        return k - 1
    if name == "q":
        if arity.m < 1:
            raise ParseError("variable q used but there are no q-variables", pos)
        return arity.l
    m = re.fullmatch(r"q(\d+)", name)
    if m:
        k = int(m.group(1))
        if not 1 <= k <= arity.m:
            raise ParseError(f"variable {name} outside arity {arity.m} q-variables", pos)
        return arity.l + k - 1
    raise ParseError(f"unknown variable {name!r}", pos)


def parse(text: str, arity: Arity | tuple[int, int] = Arity(0, 0)) -> Formula:
    """Parse ASCII formula text.

    Grammar (``->`` is right associative, ``&`` binds tighter than ``|``)::

        imp  := or ("->" imp)?
        or   := and ("|" and)*
        and  := atom ("&" atom)*
        atom := "0" | "1" | ident | "~" atom | "(" imp ")"
    """
    if not isinstance(arity, Arity):
        arity = Arity(*arity)
    toks = _tokenize(text)
    i = 0

    def peek():
        return toks[i][0] if i < len(toks) else None

    def here():
        return toks[i][1] if i < len(toks) else len(text)

    def eat(tok):
        nonlocal i
        if peek() != tok:
            raise ParseError(f"expected {tok!r}, found {peek()!r}", here())
        i += 1

    def imp():
        left = disj()
        if peek() == "->":
            eat("->")
            return Imp(left, imp())
        return left

    def disj():
        f = conj()
        while peek() == "|":
            eat("|")
            f = Or(f, conj())
        return f

    def conj():
        f = atom()
        while peek() == "&":
            eat("&")
            f = And(f, atom())
        return f

    def atom():
        nonlocal i
        tok = peek()
        if tok is None:
            raise ParseError("unexpected end of input", here())
        if tok == "0":
            i += 1
            return BOT
        if tok == "1":
            i += 1
            return TOP
        if tok == "~":
            i += 1
            return Imp(atom(), BOT)
        if tok == "(":
            i += 1
            f = imp()
            eat(")")
            return f
        if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", tok):
            pos = here()
            i += 1
            return Var(_lookup(tok, arity, pos))
        raise ParseError(f"unexpected token {tok!r}", here())

    f = imp()
    if i != len(toks):
        raise ParseError(f"trailing input {peek()!r}", here())
    return f


# --------------------------------------------------------------- printing

_PREC = {Imp: 1, Or: 2, And: 3}


def to_text(f: Formula, arity: Arity | None = None, names: Sequence[str] | None = None) -> str:
    """Canonical text with minimal parentheses; ``parse`` inverts it.

    Without an arity every variable prints as ``p<i+1>``.  ``names`` overrides
    both, e.g. to print primed copies of the variables.
    """
    def name(i):
        if names is not None:
            return names[i]
        if arity is None:
            return f"p{i + 1}"
        return arity.name(i)

    def go(g, ctx):
        if isinstance(g, Var):
            return name(g.index)
        if g is BOT:
            return "0"
        if g is TOP:
            return "1"
        cls = type(g)
        prec = _PREC[cls]
        if cls is Imp:
            s = f"{go(g.left, prec + 1)} -> {go(g.right, prec)}"
        else:
            op = " & " if cls is And else " | "
            s = f"{go(g.left, prec)}{op}{go(g.right, prec + 1)}"
        return f"({s})" if prec < ctx else s

    return go(f, 0)


# ------------------------------------------------------------ operations

def substitute(f: Formula, sigma: Mapping[int, Formula]) -> Formula:
    """Simultaneous substitution of variables by formulas."""
    memo: dict[Formula, Formula] = {}

    def go(g):
        r = memo.get(g)
        if r is not None:
            return r
        if isinstance(g, Var):
            if g.index not in sigma:
                raise KeyError(f"no binding for variable index {g.index}")
            r = sigma[g.index]
        elif isinstance(g, _Binary):
            r = type(g)(go(g.left), go(g.right))
        else:
            r = g
        memo[g] = r
        return r

    return go(f)


def evaluate(f: Formula, algebra, valuation: Sequence, memo: dict | None = None):
    """Value of ``f`` in a finite Heyting algebra under ``valuation[i]`` for variable i.

    ``algebra`` needs ``bottom``, ``top``, ``meet``, ``join`` and ``imp``.
    Passing a shared ``memo`` reuses values of common subterms across calls
    with the same algebra and valuation.
    """
    if memo is None:
        memo = {}
    meet, join, imp = algebra.meet, algebra.join, algebra.imp

    def go(g):
        r = memo.get(g)
        if r is not None:
            return r
        t = type(g)
        if t is Var:
            if g.index >= len(valuation):
                raise KeyError(f"unbound variable index {g.index}")
            r = valuation[g.index]
        elif t is Bot:
            r = algebra.bottom
        elif t is Top:
            r = algebra.top
        elif t is And:
            r = meet(go(g.left), go(g.right))
        elif t is Or:
            r = join(go(g.left), go(g.right))
        else:
            r = imp(go(g.left), go(g.right))
        memo[g] = r
        return r

    return go(f)


# --------------------------------------------------- syntactic enumeration

def _flatten(f, cls, out):
    if type(f) is cls:
        _flatten(f.left, cls, out)
        _flatten(f.right, cls, out)
    else:
        out.append(f)


def _sort_key(f):
    return (f._size, to_text(f))


def normalize(f: Formula) -> Formula:
    """Purely syntactic normal form: flatten and sort ``&``/``|``, drop units
    and duplicate operands, absorb by ``0``/``1``.  Never consults the prover."""
    memo: dict = {}

    def go(g):
        r = memo.get(g)
        if r is not None:
            return r
        t = type(g)
        if t is Imp:
            r = Imp(go(g.left), go(g.right))
        elif t is And or t is Or:
            unit, zero = (TOP, BOT) if t is And else (BOT, TOP)
            parts: list = []
            _flatten(g, t, parts)
            ops = set()
            for p in parts:
                q = go(p)
                sub: list = []
                _flatten(q, t, sub)
                ops.update(sub)
            ops.discard(unit)
            if zero in ops:
                r = zero
            elif not ops:
                r = unit
            else:
                items = sorted(ops, key=_sort_key)
                r = items[0]
                for x in items[1:]:
                    r = t(r, x)
        else:
            r = g
        memo[g] = r
        return r

    return go(f)


def enumerate_syntactic(arity: Arity, d: int, size_cap: int) -> list[Formula]:
    """All normalized formulas of degree <= d and node count <= size_cap.

    Formulas are built bottom-up by node count, normalized and deduplicated.
    The result is sorted by (size, text)."""
    if size_cap < 1:
        raise ValueError("size_cap must be >= 1")
    by_size: dict[int, set] = {1: {BOT, TOP, *(Var(i) for i in range(arity.total))}}
    for n in range(2, size_cap + 1):
        layer = set()
        for ls in range(1, n - 1):
            rs = n - 1 - ls
            for a, b in product(by_size.get(ls, ()), by_size.get(rs, ())):
                for ctor in (And, Or, Imp):
                    g = ctor(a, b)
                    if g._degree <= d:
                        layer.add(g)
        by_size[n] = layer
    out = set()
    for layer in by_size.values():
        for g in layer:
            h = normalize(g)
            if h._degree <= d:
                out.add(h)
    return sorted(out, key=_sort_key)


def simplify(f: Formula) -> Formula:
    """Cheap equivalence-preserving cleanup (units, ``a -> a``, ``1 -> a``)
    followed by :func:`normalize`.  Used to make generated terms readable."""
    memo: dict = {}

    def go(g):
        r = memo.get(g)
        if r is not None:
            return r
        t = type(g)
        if t is Imp:
            a, b = go(g.left), go(g.right)
            if a is BOT or b is TOP or a is b:
                r = TOP
            elif a is TOP:
                r = b
            else:
                r = Imp(a, b)
        elif t is And or t is Or:
            r = normalize(t(go(g.left), go(g.right)))
        else:
            r = g
        memo[g] = r
        return r

    prev = None
    while prev is not f:
        prev, f = f, normalize(go(f))
        memo.clear()
    return f


def random_formula(rng, n_vars: int, max_degree: int, max_size: int) -> Formula:
    """Random formula over ``n_vars`` variables, rejection-free and seedable."""
    def build(budget, deg):
        if budget <= 1 or rng.random() < 0.25:
            choices = [BOT, TOP] + [Var(i) for i in range(n_vars)]
            weights = [1, 1] + [3] * n_vars
            return rng.choices(choices, weights)[0]
        ops = [And, Or] + ([Imp] if deg > 0 else [])
        ctor = rng.choice(ops)
        left_budget = rng.randint(1, budget - 2) if budget > 2 else 1
        right_budget = max(1, budget - 1 - left_budget)
        nd = deg - 1 if ctor is Imp else deg
        return ctor(build(left_budget, nd), build(right_budget, nd))

    return build(max_size, max_degree)


def subformulas(f: Formula) -> Iterator[Formula]:
    """Distinct subformulas in post-order (children before parents)."""
    seen = set()
    stack = [(f, False)]
    while stack:
        g, done = stack.pop()
        if g in seen:
            continue
        if done or not isinstance(g, _Binary):
            seen.add(g)
            yield g
        else:
            stack.append((g, True))
            stack.append((g.right, False))
            stack.append((g.left, False))
