"""Command-line front end.

Algebras are read from JSON files (``{"poset": ..., "generators": ...}``);
a parameter tuple defaults to the algebra's generators and can be given
explicitly with ``--tuple '[[points], ...]'``.
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from itertools import product

from . import duality, formula, fragment, prover, serialize, solve, structure
from .formula import Arity

EXIT_OK, EXIT_NEGATIVE, EXIT_ERROR = 0, 1, 2


class UsageError(Exception):
    pass


# ------------------------------------------------------------------ inputs

def _load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    except json.JSONDecodeError as e:
        raise UsageError(f"{path}: invalid JSON ({e})") from None


def _algebra(path) -> duality.FiniteHA:
    obj = _load_json(path)
    if "poset" not in obj and "algebra" in obj:
        obj = obj["algebra"]
    return serialize.algebra_from_json(obj)


def _poset_or_algebra(path):
    obj = _load_json(path)
    if "poset" in obj:
        return serialize.poset_from_json(obj["poset"])
    return serialize.poset_from_json(obj)


def _tuple(A, text):
    if text is None:
        return tuple(A.generators)
    try:
        pts = json.loads(text)
    except json.JSONDecodeError as e:
        raise UsageError(f"--tuple: invalid JSON ({e})") from None
    return tuple(serialize.element_from_json(p, A.dual) for p in pts)


def _system(path) -> solve.System:
    obj = _load_json(path)
    try:
        return serialize.system_from_json(obj)
    except KeyError as e:
        raise UsageError(f"{path}: missing field {e}") from None


def _arity_for(args, *texts):
    inferred = serialize.infer_arity(*texts)
    l = args.vars if args.vars is not None else inferred.l
    m = args.qvars if args.qvars is not None else inferred.m
    return Arity(l, m)


def _el(u):
    return serialize.element_to_json(u)


def _out(args, human: str, obj=None):
    if args.json and obj is not None:
        print(serialize.dumps(obj))
    else:
        print(human)


# ------------------------------------------------------------------ commands

def cmd_prove(args):
    arity = _arity_for(args, args.formula)
    f = formula.parse(args.formula, arity)
    v = prover.is_valid(f, max_steps=args.max_steps)
    if v.valid:
        _out(args, "VALID", {"valid": True})
        return EXIT_OK
    model = serialize.model_to_json(v.countermodel, arity)
    print("INVALID")
    print(serialize.dumps(model))
    return EXIT_NEGATIVE


def cmd_countermodel(args):
    arity = _arity_for(args, args.formula)
    f = formula.parse(args.formula, arity)
    M = prover.countermodel_search(f, args.max_points)
    if M is None:
        _out(args, f"NONE max_points={args.max_points}", {"countermodel": None})
        return EXIT_NEGATIVE
    if args.dot:
        print(serialize.to_dot(M.frame, "countermodel"), end="")
    else:
        print(serialize.dumps(serialize.model_to_json(M, arity)))
    return EXIT_OK


def cmd_fragment(args):
    F = fragment.fragment(args.vars, args.degree)
    if args.json:
        print(serialize.dumps(serialize.fragment_to_json(F)))
        return EXIT_OK
    a = Arity(args.vars)
    print(f"{len(F)} classes of degree <= {args.degree} in {args.vars} variables")
    for i, f in enumerate(F.reps):
        print(f"{i}: {formula.to_text(f, a)}")
    return EXIT_OK


def cmd_balls(args):
    bs = fragment.balls(args.vars, args.degree)
    if args.json:
        print(serialize.dumps([serialize.ball_to_json(B) for B in bs]))
        return EXIT_OK
    for i, B in enumerate(bs):
        phi, psi = B.text()
        print(f"B{i}: phi={phi} psi={psi}")
    return EXIT_OK


def cmd_theory(args):
    A = _algebra(args.algebra)
    a = _tuple(A, args.tuple)
    th = fragment.theory_n(a, A, args.degree, explicit=not args.no_explicit)
    arity = Arity(len(a))
    if th.members is None:
        _out(args, f"{len(th.key)} minimal types", {"minimal_types": len(th.key)})
        return EXIT_OK
    F = fragment.fragment(len(a), args.degree)
    texts = [formula.to_text(F.reps[i], arity) for i in sorted(th.members)]
    _out(args, "\n".join(texts), {"degree": args.degree, "members": texts})
    return EXIT_OK


def cmd_similar(args):
    A = _algebra(args.algebra)
    A2 = _algebra(args.algebra2) if args.algebra2 else A
    a, a2 = _tuple(A, args.tuple), _tuple(A2, args.tuple2)
    r = fragment.similarity_criteria(a, a2, A, A2, args.degree)
    obj = {"theory": r.theory, "kernel_balls": r.kernel_balls, "ball_criterion": r.ball_criterion}
    verdict = "SIMILAR" if r.theory else "NOT-SIMILAR"
    _out(args, f"{verdict} n={args.degree} kernel_balls={r.kernel_balls} "
               f"ball_criterion={r.ball_criterion}", obj)
    return EXIT_OK if r.theory else EXIT_NEGATIVE


def cmd_equiv(args):
    arity = Arity(args.vars)
    plain = [arity.name(i) for i in range(args.vars)]
    primed = [x + "'" for x in plain]
    pairs = fragment.equiv_sentence(args.vars, args.degree)
    rows = []
    for p, s in pairs:
        left = f"({formula.to_text(p, names=plain)} <= {formula.to_text(s, names=plain)})"
        right = f"({formula.to_text(p, names=primed)} <= {formula.to_text(s, names=primed)})"
        rows.append(f"{left} <-> {right}")
    obj = [{"phi": formula.to_text(p, arity), "psi": formula.to_text(s, arity)} for p, s in pairs]
    _out(args, "\n".join(rows), obj)
    return EXIT_OK


def cmd_yn(args):
    A = _algebra(args.algebra)
    a = _tuple(A, args.tuple)
    bs = fragment.balls(len(a), args.degree)
    Y = fragment.y_n(a, A, args.degree)
    idx = [i for i, B in enumerate(bs) if B in Y]
    _out(args, " ".join(f"B{i}" for i in idx) or "(none)", {"balls": idx})
    return EXIT_OK


def cmd_hindex(args):
    A = _algebra(args.algebra)
    h = fragment.h_index(A, args.vars, args.degree, args.n_max)
    if h is None:
        _out(args, f"NONE n_max={args.n_max}", {"h_index": None})
        return EXIT_NEGATIVE
    _out(args, str(h), {"h_index": h})
    return EXIT_OK


def cmd_emit_fc(args):
    print(fragment.emit_FC(args.vars, args.degree, args.n), end="")
    return EXIT_OK


def _witness_json(w: solve.ExtensionWitness):
    return {"algebra": serialize.algebra_to_json(w.B), "embedding": list(w.embedding.dual_map),
            "solution": [_el(x) for x in w.solution]}


def cmd_solve(args, extension_only=False):
    A = _algebra(args.algebra)
    S = _system(args.system)
    a = _tuple(A, args.tuple)
    w = solve.solve_in_extension(A, a, S, args.cap, jobs=args.jobs)
    if w is not None:
        print("SOLVABLE witness=" + serialize.dumps(_witness_json(w)))
        return EXIT_OK
    if not extension_only and args.radius is not None and S.arity.m == 1:
        if not solve.decide_by_discriminant(S, a, A, args.radius):
            print(f"UNSOLVABLE radius={args.radius}")
            return EXIT_NEGATIVE
    print(f"UNSOLVED-WITHIN-CAP cap={args.cap}")
    return EXIT_NEGATIVE


def cmd_discriminant(args):
    S = _system(args.system)
    R = solve.discriminant_report(S, args.radius)
    obj = serialize.report_to_json(R, S.arity)
    if args.json:
        print(serialize.dumps(obj))
        return EXIT_OK
    print(f"radius={R.radius_exponent}")
    print(f"delta: {obj['delta']}")
    for k, n in enumerate(obj["nablas"], 1):
        print(f"nabla{k}: {n}")
    for k in sorted(R.ball_sets):
        print(f"{k}: {list(R.ball_sets[k])}")
    return EXIT_OK


def cmd_decide(args):
    A = _algebra(args.algebra)
    S = _system(args.system)
    a = _tuple(A, args.tuple)
    ok = solve.decide_by_discriminant(S, a, A, args.radius)
    print(f"{'SOLVABLE' if ok else 'UNSOLVABLE'} radius={args.radius}")
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_stable_radius(args):
    S = _system(args.system)
    cases = []
    for path in args.algebra:
        A = _algebra(path)
        cases.append((A, tuple(A.generators)))
    r = solve.stable_radius(S, cases, args.r_max, args.cap)
    if r is None:
        _out(args, f"NONE r_max={args.r_max}", {"radius": None})
        return EXIT_NEGATIVE
    _out(args, f"radius={r}", {"radius": r})
    return EXIT_OK


def cmd_density(args):
    A = _algebra(args.algebra)
    cx = structure.check_density(A)
    if cx is None:
        _out(args, "HOLDS", {"counterexample": None})
        return EXIT_OK
    _out(args, "COUNTEREXAMPLE " + " ".join(serialize.dumps(_el(x)) for x in cx),
         {"counterexample": [_el(x) for x in cx]})
    return EXIT_NEGATIVE


def cmd_splitting(args):
    A = _algebra(args.algebra)
    cx = structure.check_splitting(A)
    if cx is None:
        _out(args, "HOLDS", {"counterexample": None})
        return EXIT_OK
    _out(args, "COUNTEREXAMPLE " + " ".join(serialize.dumps(_el(x)) for x in cx),
         {"counterexample": [_el(x) for x in cx]})
    return EXIT_NEGATIVE


def cmd_codim(args):
    A = _algebra(args.algebra)
    R = structure.codim_report(A)
    obj = serialize.codim_to_json(R)
    if args.json:
        print(serialize.dumps(obj))
        return EXIT_OK
    print(f"dimension={R.dimension}")
    for row in obj["codims"]:
        c = "inf" if row["codim"] is None else row["codim"]
        print(f"{serialize.dumps(row['element'])}\t{c}")
    return EXIT_OK


def cmd_dimension(args):
    d = structure.dimension(_algebra(args.algebra))
    _out(args, str(d), {"dimension": d})
    return EXIT_OK


def cmd_dfilter(args):
    A = _algebra(args.algebra)
    F = structure.d_filter(A, args.d)
    els = sorted(F.members, key=lambda u: (bin(u).count("1"), u))
    _out(args, "\n".join(serialize.dumps(_el(u)) for u in els), {"members": [_el(u) for u in els]})
    return EXIT_OK


def cmd_lemma_a2(args):
    A = _algebra(args.algebra)
    A2 = _algebra(args.algebra2) if args.algebra2 else A
    pairs = [(A, a, A2, a2) for a in product(A.elements, repeat=args.vars)
             for a2 in product(A2.elements, repeat=args.vars)]
    rep = structure.similar_tuples_report(pairs, args.d)
    obj = {"checked": rep.checked, "similar": rep.similar, "violations": len(rep.violations),
           "skipped": len(rep.precondition_failures)}
    _out(args, " ".join(f"{k}={v}" for k, v in obj.items()), obj)
    return EXIT_OK if rep.ok else EXIT_NEGATIVE


def _dual_map(text, source, target):
    if text is None:
        if source.dual.n != 1:
            raise UsageError("a dual map is required unless the base is the 2-element algebra")
        return [0] * target.dual.n
    return json.loads(text)


def _embedding(base, target, text):
    f = duality.HAMorphism(base, target, _dual_map(text, base, target))
    if not (f.is_injective and f.is_homomorphism()):
        raise UsageError("the given dual map is not an embedding")
    return f


def cmd_amalgamate(args):
    base = _algebra(args.base) if args.base else duality.two_element()
    B, C = _algebra(args.left), _algebra(args.right)
    f = _embedding(base, B, args.left_map)
    g = _embedding(base, C, args.right_map)
    D, jB, jC = duality.amalgamate(f, g)
    if args.dot:
        print(serialize.to_dot(D.dual, "amalgam"), end="")
        return EXIT_OK
    obj = {"algebra": serialize.algebra_to_json(D), "left": list(jB.dual_map),
           "right": list(jC.dual_map)}
    if args.json:
        print(serialize.dumps(obj))
    else:
        print(f"{len(D)} elements, {D.dual.n} dual points")
        print(serialize.dumps(obj))
    return EXIT_OK


def cmd_minext(args):
    A = _algebra(args.algebra)
    exts = duality.minimal_extensions(A, args.cap)
    obj = [{"algebra": serialize.algebra_to_json(B), "embedding": list(i.dual_map)} for B, i in exts]
    if args.json:
        print(serialize.dumps(obj))
    else:
        print(f"{len(exts)} minimal extensions")
        for B, i in exts:
            print(f"{len(B)} elements, covers {B.dual.covers()}, dual map {list(i.dual_map)}")
    return EXIT_OK


def cmd_embed_over(args):
    base = _algebra(args.base) if args.base else duality.two_element()
    B, H = _algebra(args.ext), _algebra(args.host)
    iAB = _embedding(base, B, args.ext_map)
    iAH = _embedding(base, H, args.host_map)
    e = duality.embed_over(iAB, iAH)
    if e is None:
        _out(args, "NONE", {"embedding": None})
        return EXIT_NEGATIVE
    _out(args, "EMBEDS dual_map=" + serialize.dumps(list(e.dual_map)), {"embedding": list(e.dual_map)})
    return EXIT_OK


def cmd_build_h0(args):
    budget = structure.ResourceBudget(args.extra_points, args.max_points, args.max_steps)
    L = structure.build_H0_level(args.level, budget)
    if args.dot:
        print(serialize.to_dot(L.algebra.dual, f"H{args.level}"), end="")
    elif args.json:
        print(serialize.dumps(serialize.level_to_json(L)))
    else:
        print(f"level {L.n}: {len(L.algebra)} elements, {L.algebra.dual.n} dual points, "
              f"complete={L.complete}")
        for entry in L.log:
            print(serialize.dumps(entry))
    return EXIT_OK if L.complete else EXIT_NEGATIVE


def cmd_export_dot(args):
    print(serialize.to_dot(_poset_or_algebra(args.input)), end="")
    return EXIT_OK


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    def global_flags(suppress):
        # subcommand copies must not overwrite values given before the subcommand
        g = argparse.ArgumentParser(add_help=False)
        d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
        g.add_argument("--json", action="store_true", default=d(False), help="machine-readable output")
        g.add_argument("--dot", action="store_true", default=d(False),
                       help="DOT output where a poset is the payload")
        g.add_argument("--jobs", type=int, default=d(1), help="worker processes for searches")
        g.add_argument("--seed", type=int, default=d(0), help="seed for randomized searches")
        return g

    p = argparse.ArgumentParser(prog="heyting", parents=[global_flags(False)],
                                description="Finite Heyting algebra workbench")
    sub = p.add_subparsers(dest="command", required=True)
    common = global_flags(True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(fn=fn)
        return sp

    def arity_flags(sp):
        sp.add_argument("--vars", type=int, help="number of parameters p1..pl")
        sp.add_argument("--qvars", type=int, help="number of unknowns")

    sp = add("prove", cmd_prove, "decide intuitionistic validity")
    sp.add_argument("formula")
    arity_flags(sp)
    sp.add_argument("--max-steps", type=int, default=2_000_000)

    sp = add("countermodel", cmd_countermodel, "exhaustive countermodel search")
    sp.add_argument("formula")
    arity_flags(sp)
    sp.add_argument("--max-points", type=int, default=4)

    for name, fn, h in (("fragment", cmd_fragment, "degree-bounded fragment"),
                        ("balls", cmd_balls, "balls of the free algebra"),
                        ("equiv", cmd_equiv, "n-similarity template")):
        sp = add(name, fn, h)
        sp.add_argument("--vars", type=int, required=True)
        sp.add_argument("--degree", type=int, required=True)

    def alg_tuple(sp, second=False):
        sp.add_argument("--algebra", required=True, help="algebra JSON file")
        sp.add_argument("--tuple", help="parameters as JSON list of point lists")
        if second:
            sp.add_argument("--algebra2", help="second algebra (default: the first)")
            sp.add_argument("--tuple2", help="second parameter tuple")

    sp = add("theory", cmd_theory, "degree-n theory of a tuple")
    alg_tuple(sp)
    sp.add_argument("--degree", type=int, required=True)
    sp.add_argument("--no-explicit", action="store_true", help="skip listing fragment members")

    sp = add("similar", cmd_similar, "n-similarity of two tuples")
    alg_tuple(sp, second=True)
    sp.add_argument("--degree", type=int, required=True)

    sp = add("yn", cmd_yn, "balls meeting the kernel of a tuple")
    alg_tuple(sp)
    sp.add_argument("--degree", type=int, required=True)

    sp = add("hindex", cmd_hindex, "(l,d)-index of an algebra")
    sp.add_argument("--algebra", required=True)
    sp.add_argument("--vars", type=int, required=True)
    sp.add_argument("--degree", type=int, required=True)
    sp.add_argument("--n-max", type=int, default=4)

    sp = add("emit-fc", cmd_emit_fc, "print the index sentence")
    sp.add_argument("--vars", type=int, required=True)
    sp.add_argument("--degree", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)

    for name, fn, h in (("solve", cmd_solve, "solve a system, brute force plus discriminant"),
                        ("solve-ext", lambda a: cmd_solve(a, True), "search finite extensions")):
        sp = add(name, fn, h)
        alg_tuple(sp)
        sp.add_argument("--system", required=True, help="system JSON file")
        sp.add_argument("--cap", type=int, default=4, help="max dual points of an extension")
        if name == "solve":
            sp.add_argument("--radius", type=int, help="radius for an unsolvability verdict")

    sp = add("discriminant", cmd_discriminant, "discriminant report")
    sp.add_argument("--system", required=True)
    sp.add_argument("--radius", type=int, required=True)

    sp = add("decide", cmd_decide, "decide solvability by the discriminant")
    alg_tuple(sp)
    sp.add_argument("--system", required=True)
    sp.add_argument("--radius", type=int, required=True)

    sp = add("stable-radius", cmd_stable_radius, "empirically stable radius")
    sp.add_argument("--system", required=True)
    sp.add_argument("--algebra", action="append", required=True,
                    help="case algebra (its generators are the parameters); repeatable")
    sp.add_argument("--r-max", type=int, default=3)
    sp.add_argument("--cap", type=int, default=3)

    for name, fn, h in (("density", cmd_density, "Density axiom check"),
                        ("splitting", cmd_splitting, "Splitting axiom check"),
                        ("codim", cmd_codim, "dual co-dimension table"),
                        ("dimension", cmd_dimension, "height of the dual poset")):
        sp = add(name, fn, h)
        sp.add_argument("--algebra", required=True)

    sp = add("dfilter", cmd_dfilter, "elements of co-dimension above d")
    sp.add_argument("--algebra", required=True)
    sp.add_argument("--d", type=int, required=True)

    sp = add("lemma-a2", cmd_lemma_a2, "check similar tuples generate isomorphic subalgebras")
    sp.add_argument("--algebra", required=True)
    sp.add_argument("--algebra2")
    sp.add_argument("--vars", type=int, default=1)
    sp.add_argument("--d", type=int, required=True)

    sp = add("amalgamate", cmd_amalgamate, "amalgamate two extensions over a base")
    sp.add_argument("left")
    sp.add_argument("right")
    sp.add_argument("--base", help="base algebra (default: 2-element)")
    sp.add_argument("--left-map", help="dual map of base -> left as JSON list")
    sp.add_argument("--right-map", help="dual map of base -> right as JSON list")

    sp = add("minext", cmd_minext, "minimal proper extensions")
    sp.add_argument("--algebra", required=True)
    sp.add_argument("--cap", type=int, default=1, help="extra dual points allowed")

    sp = add("embed-over", cmd_embed_over, "embed an extension into a host over the base")
    sp.add_argument("--ext", required=True)
    sp.add_argument("--host", required=True)
    sp.add_argument("--base")
    sp.add_argument("--ext-map")
    sp.add_argument("--host-map")

    sp = add("build-h0", cmd_build_h0, "finite stage of the amalgamation chain")
    sp.add_argument("--level", type=int, required=True)
    sp.add_argument("--extra-points", type=int, default=1)
    sp.add_argument("--max-points", type=int, default=16)
    sp.add_argument("--max-steps", type=int, default=500)

    sp = add("export-dot", cmd_export_dot, "Hasse diagram of a poset or algebra file")
    sp.add_argument("input")
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code else EXIT_OK
    random.seed(args.seed)
    try:
        return args.fn(args)
    except (UsageError, ValueError, formula.ParseError, fragment.CapExceeded,
            prover.ResourceExceeded, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
