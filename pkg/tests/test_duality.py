from itertools import combinations, product

import networkx as nx
import pytest
from hypothesis import given, strategies as st

from heyting.duality import (
    Filter, FiniteHA, HAMorphism, PMorphism, amalgamate, boolean_algebra, chain_algebra,
    check_pmorphism, corpus_algebras, embed_over, factor_through, filter_kernel,
    generated_subalgebra, ha_imp, is_isomorphic_algebra, join_irreducibles,
    minimal_extensions, prime_filters, quotient_by_filter, subalgebras, trivial_algebra,
    two_element, upsets,
)
from heyting.poset import FinitePoset, is_isomorphic, posets_of_size, posets_up_to


# ------------------------------------------------------------ poset enumeration

def _labelled_posets(n):
    """Every poset on n points, up to relabelling, as a transitive closure of
    a relation contained in the natural order (every poset has a linear extension)."""
    pairs = list(combinations(range(n), 2))
    seen = set()
    for mask in range(1 << len(pairs)):
        G = nx.DiGraph()
        G.add_nodes_from(range(n))
        G.add_edges_from(p for k, p in enumerate(pairs) if mask >> k & 1)
        closed = frozenset(nx.transitive_closure_dag(G).edges())
        seen.add(closed)
    return seen


def _networkx_classes(n):
    reps = []
    for rel in _labelled_posets(n):
        G = nx.DiGraph()
        G.add_nodes_from(range(n))
        G.add_edges_from(rel)
        if not any(nx.is_isomorphic(G, H) for H in reps):
            reps.append(G)
    return len(reps)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_poset_counts_match_graph_isomorphism_oracle(n):
    assert len(posets_of_size(n)) == _networkx_classes(n)


def test_poset_counts_pinned():
    assert [len(posets_of_size(n)) for n in range(1, 6)] == [1, 2, 5, 16, 63]
    assert len(posets_up_to(5)) == 87
    assert len(posets_up_to(5, include_empty=True)) == 88


# ------------------------------------------------------------ algebras

def test_upset_examples():
    assert len(upsets(FinitePoset.antichain(1))) == 2
    A = upsets(FinitePoset.chain(2))
    assert len(A) == 3 and is_isomorphic_algebra(A, chain_algebra(3))
    B = upsets(FinitePoset.antichain(2))
    assert B.elements == [0, 1, 2, 3]


def test_implication_examples():
    P = FinitePoset.chain(2)  # a = 0 <= b = 1
    a_b, b = 0b11, 0b10
    assert ha_imp(a_b, b, P) == b
    assert ha_imp(0, b, P) == P.full
    assert ha_imp(b, b, P) == P.full


def test_join_irreducible_examples(two, chain3, bool4):
    assert is_isomorphic(join_irreducibles(chain3)[0], FinitePoset.chain(2))
    assert join_irreducibles(two)[0].n == 1
    assert is_isomorphic(join_irreducibles(bool4)[0], FinitePoset.antichain(2))


def test_prime_filter_examples(two, chain3, bool4):
    m = chain3.elements[1]
    assert {f.members for f in prime_filters(chain3)} == {
        frozenset({chain3.top}), frozenset({m, chain3.top})}
    assert len(prime_filters(two)) == 1
    pf = prime_filters(bool4)
    assert len(pf) == 2 and all(len(f.members) == 2 for f in pf)


def test_pmorphism_examples():
    two_chain, point = FinitePoset.chain(2), FinitePoset.antichain(1)
    assert check_pmorphism(PMorphism(two_chain, two_chain, (0, 1)))
    assert check_pmorphism(PMorphism(two_chain, point, (0, 0)))
    assert not check_pmorphism(PMorphism(FinitePoset.antichain(2), two_chain, (0, 0)))


def test_generated_subalgebra_examples(bool4):
    A = chain_algebra(5)
    assert len(generated_subalgebra(A, [])[0]) == 2
    assert len(generated_subalgebra(bool4, [1])[0]) == 4
    x = chain_algebra(4).elements[1]
    sub, incl = generated_subalgebra(chain_algebra(4), [x])
    assert sorted(incl(u) for u in sub.elements) == [0, x, chain_algebra(4).top]


def test_quotient_examples(chain3):
    Q, proj = quotient_by_filter(chain3, Filter.principal(chain3, chain3.top))
    assert len(Q) == 3 and proj.is_injective
    Q, _ = quotient_by_filter(chain3, Filter.principal(chain3, 0))
    assert Q.is_trivial
    m = chain3.elements[1]
    Q, proj = quotient_by_filter(chain3, Filter.principal(chain3, m))
    assert len(Q) == 2 and proj(m) == Q.top and proj(0) == Q.bottom


def test_amalgam_examples(two, chain3, bool4):
    to = lambda B: HAMorphism(two, B, [0] * B.dual.n)
    D, _, _ = amalgamate(HAMorphism.identity(two), HAMorphism.identity(two))
    assert len(D) == 2
    D, j1, j2 = amalgamate(to(chain3), to(bool4))
    # two disjoint 2-chains
    assert D.dual.n == 4 and len(D) == 9
    assert is_isomorphic(D.dual, FinitePoset.from_pairs(4, [(0, 1), (2, 3)]))
    for C in corpus_algebras(16, include_trivial=False):
        D, _, _ = amalgamate(to(two), to(C))
        assert is_isomorphic_algebra(D, C)


def test_minimal_extension_examples(two):
    exts = minimal_extensions(two, 1)
    assert sorted(len(B) for B, _ in exts) == [3, 4]
    assert minimal_extensions(two, 0) == []
    assert all(_ == [] for _ in [minimal_extensions(chain_algebra(3), 0)])


def test_embed_over_examples(two, chain3, bool4):
    to = lambda B: HAMorphism(two, B, [0] * B.dual.n)
    assert embed_over(to(chain3), to(chain3)) is not None
    H, _, _ = amalgamate(to(chain3), to(bool4))
    e = embed_over(to(chain3), to(H))
    assert e is not None and e.is_injective and e.is_homomorphism()
    assert embed_over(to(bool4), to(chain3)) is None


def test_embed_over_identity(chain3):
    iota = HAMorphism.identity(chain3)
    assert embed_over(iota, iota).dual_map == iota.dual_map


# ------------------------------------------------------------ invariants

HEYTING_IDENTITIES = [
    lambda A, a, b, c: A.imp(a, a) == A.top,
    lambda A, a, b, c: a & A.imp(a, b) == a & b,
    lambda A, a, b, c: b & A.imp(a, b) == b,
    lambda A, a, b, c: A.imp(a, b & c) == A.imp(a, b) & A.imp(a, c),
    lambda A, a, b, c: a | (a & b) == a,
    lambda A, a, b, c: a & (a | b) == a,
    lambda A, a, b, c: a & (b | c) == (a & b) | (a & c),
    lambda A, a, b, c: A.leq(A.bottom, a) and A.leq(a, A.top),
]


def test_round_trip_and_identities_small():
    for P in posets_up_to(4):
        A = upsets(P)
        assert is_isomorphic(join_irreducibles(A)[0], P)
        for a, b, c in product(A.elements, repeat=3):
            assert all(law(A, a, b, c) for law in HEYTING_IDENTITIES)


def test_trivial_algebra():
    T = trivial_algebra()
    assert T.is_trivial and len(T) == 1 and prime_filters(T) == []


@given(st.data())
def test_injective_maps_have_surjective_pmorphism_duals(data):
    A = data.draw(st.sampled_from(corpus_algebras(16, include_trivial=False)))
    subs = subalgebras(A)
    els = data.draw(st.sampled_from(subs))
    from heyting.duality import subalgebra_from_elements
    S, incl = subalgebra_from_elements(A, els)
    assert incl.is_injective and incl.is_homomorphism()
    d = incl.dual
    assert check_pmorphism(d)
    assert set(d.map) == set(range(S.dual.n))


@given(st.data())
def test_quotient_factoring(data):
    A = data.draw(st.sampled_from(corpus_algebras(16, include_trivial=False)))
    c = data.draw(st.sampled_from(A.elements))
    I = Filter.principal(A, c)
    Q, proj = quotient_by_filter(A, I)
    assert filter_kernel(proj).members == I.members
    g = factor_through(proj, I)
    assert all(g(proj(a)) == proj(a) for a in A.elements)
    # any morphism out of A whose kernel contains I factors through the projection
    c2 = data.draw(st.sampled_from([x for x in A.elements if A.leq(x, c)]))
    Q2, f = quotient_by_filter(A, Filter.principal(A, c2))
    h = factor_through(f, I)
    assert h is not None
    assert all(h(proj(a)) == f(a) for a in A.elements)
    assert h.is_injective == (filter_kernel(f).members == I.members)


@given(st.data())
def test_amalgam_square_commutes(data):
    pool = corpus_algebras(16, include_trivial=False)
    base = data.draw(st.sampled_from(pool[:4]))
    exts = minimal_extensions(base, 1)
    (B, iB), (C, iC) = data.draw(st.sampled_from(exts)), data.draw(st.sampled_from(exts))
    D, jB, jC = amalgamate(iB, iC)
    for j in (jB, jC):
        assert j.is_injective and j.is_homomorphism()
    assert all(jB(iB(a)) == jC(iC(a)) for a in base.elements)


def test_filters_are_meets_of_prime_filters():
    for A in corpus_algebras(32, include_trivial=False):
        pf = prime_filters(A)
        for c in A.elements:
            F = Filter.principal(A, c)
            over = [p.members for p in pf if F.members <= p.members]
            meet = frozenset(A.elements).intersection(*over) if over else frozenset(A.elements)
            assert meet == F.members
