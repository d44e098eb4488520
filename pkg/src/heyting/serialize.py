"""JSON and DOT rendering plus loaders for posets, algebras and systems."""
from __future__ import annotations

import json
import math
import re
from typing import Any

from .duality import FiniteHA, HAMorphism
from .formula import Arity, parse, to_text
from .poset import FinitePoset, bits

__all__ = [
    "poset_to_json", "poset_from_json", "algebra_to_json", "algebra_from_json",
    "element_to_json", "element_from_json", "morphism_to_json", "system_to_json",
    "system_from_json", "model_to_json", "ball_to_json", "fragment_to_json",
    "report_to_json", "level_to_json", "codim_to_json", "to_dot", "dumps",
    "infer_arity",
]


def dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True)


def poset_to_json(P: FinitePoset) -> dict:
    return {"elements": P.n, "leq": [[i, j] for i, j in P.pairs() if i != j]}


def poset_from_json(obj: dict) -> FinitePoset:
    try:
        n = int(obj["elements"])
        pairs = [(int(i), int(j)) for i, j in obj.get("leq", [])]
    except (KeyError, TypeError, ValueError) as e:
        raise ValueError(f"malformed poset JSON: {e}") from None
    return FinitePoset.from_pairs(n, pairs)


def element_to_json(u: int) -> list[int]:
    return bits(u)


def element_from_json(points, P: FinitePoset) -> int:
    u = 0
    for x in points:
        if not 0 <= x < P.n:
            raise ValueError(f"point {x} outside the poset")
        u |= 1 << x
    if not P.is_upset(u):
        raise ValueError(f"{sorted(points)} is not an up-set")
    return u


def algebra_to_json(A: FiniteHA) -> dict:
    return {"poset": poset_to_json(A.dual), "generators": [element_to_json(g) for g in A.generators]}


def algebra_from_json(obj: dict) -> FiniteHA:
    if "poset" not in obj:
        raise ValueError("algebra JSON needs a 'poset' field")
    P = poset_from_json(obj["poset"])
    gens = [element_from_json(g, P) for g in obj.get("generators", [])]
    return FiniteHA(P, gens)


def morphism_to_json(f: HAMorphism) -> dict:
    return {"source": algebra_to_json(f.source), "target": algebra_to_json(f.target),
            "dual_map": list(f.dual_map)}


def system_to_json(S) -> dict:
    a = S.arity
    return {"t": to_text(S.t, a), "s": [to_text(s, a) for s in S.s], "vars": a.l, "qvars": a.m}


def system_from_json(obj: dict):
    from .solve import System
    a = Arity(int(obj.get("vars", 0)), int(obj.get("qvars", 1)))
    t = parse(obj["t"], a)
    s = tuple(parse(x, a) for x in obj.get("s", []))
    return System(t, s, a)


def model_to_json(M, arity: Arity | None = None) -> dict:
    n_vars = len(M.valuation)
    arity = arity or Arity(n_vars)
    return {"poset": poset_to_json(M.frame),
            "valuation": {arity.name(i): element_to_json(u) for i, u in enumerate(M.valuation)},
            "point": M.point}


def ball_to_json(B) -> dict:
    phi, psi = B.text()
    return {"phi": phi, "psi": psi, "d": B.d}


def fragment_to_json(F) -> dict:
    a = Arity(F.l)
    return {"vars": F.l, "degree": F.d, "reps": [to_text(f, a) for f in F.reps],
            "leq": sorted([i, j] for i, j in F.leq)}


def report_to_json(R, arity: Arity) -> dict:
    return {"radius": R.radius_exponent, "delta": to_text(R.delta, arity),
            "nablas": [to_text(n, arity) for n in R.nablas],
            "ball_sets": {k: list(v) for k, v in R.ball_sets.items()}}


def level_to_json(L) -> dict:
    return {"level": L.n, "algebra": algebra_to_json(L.algebra), "log": L.log,
            "complete": L.complete}


def codim_to_json(R) -> dict:
    rows = [{"element": element_to_json(a), "codim": None if math.isinf(c) else c}
            for a, c in sorted(R.codims.items(), key=lambda kv: (bin(kv[0]).count("1"), kv[0]))]
    return {"dimension": R.dimension, "codims": rows}


def to_dot(P: FinitePoset, name: str = "poset", labels=None) -> str:
    """Hasse diagram (cover relation only), smaller elements drawn lower."""
    lines = [f"digraph {name} {{", "  rankdir=BT;"]
    for x in range(P.n):
        lab = labels[x] if labels else str(x)
        lines.append(f'  {x} [label="{lab}"];')
    for i, j in P.covers():
        lines.append(f"  {i} -> {j};")
    lines.append("}")
    return "\n".join(lines) + "\n"


_NAME = re.compile(r"\b(p(\d+)|q(\d*))\b")


def infer_arity(*texts: str) -> Arity:
    """Smallest arity covering the variable names used in ``texts``."""
    l = 0
    m = 0
    plain_q = False
    for text in texts:
        for match in _NAME.finditer(text):
            if match.group(2):
                l = max(l, int(match.group(2)))
            elif match.group(3):
                m = max(m, int(match.group(3)))
            else:
                plain_q = True
    if plain_q and m > 1:
        raise ValueError("cannot mix 'q' with numbered q-variables")
    if plain_q:
        m = 1
    return Arity(l, m)
