"""Hypothesis strategies shared by the property tests."""
from hypothesis import strategies as st

from heyting.formula import BOT, TOP, And, Imp, Or, Var


def formulas(n_vars=2, max_leaves=8):
    leaves = st.sampled_from([BOT, TOP] + [Var(i) for i in range(n_vars)])
    return st.recursive(
        leaves,
        lambda sub: st.one_of(st.builds(And, sub, sub), st.builds(Or, sub, sub),
                              st.builds(Imp, sub, sub)),
        max_leaves=max_leaves,
    )
