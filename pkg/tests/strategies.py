"""Shared hypothesis strategies for random programs, expressions and models.

The pools are deliberately tiny (few atom names, small denominators) so that
random programs collide on atoms and random interpretations land on grid
points — that is where the interesting semantic interactions live.
"""

from __future__ import annotations

from fractions import Fraction

from hypothesis import strategies as st

from faspc.core import (
    SINGLE,
    Atom,
    AtomRef,
    Bin,
    Conn,
    Const,
    HeadExpr,
    Interpretation,
    Neg,
    Program,
    Rule,
)

ATOM_NAMES = ("p", "q", "r", "s", "t")

atoms = st.sampled_from([Atom(name) for name in ATOM_NAMES])


def degrees(max_den: int = 4) -> st.SearchStrategy[Fraction]:
    return st.integers(1, max_den).flatmap(
        lambda den: st.integers(0, den).map(lambda num: Fraction(num, den))
    )


conns = st.sampled_from(list(Conn))


def exprs(max_leaves: int = 5, max_den: int = 4) -> st.SearchStrategy:
    leaves = st.one_of(atoms.map(AtomRef), degrees(max_den).map(Const))
    return st.recursive(
        leaves,
        lambda sub: st.one_of(
            sub.map(Neg),
            st.builds(Bin, conns, sub, sub),
        ),
        max_leaves=max_leaves,
    )


def neg_free_exprs(max_leaves: int = 5, max_den: int = 4) -> st.SearchStrategy:
    leaves = st.one_of(atoms.map(AtomRef), degrees(max_den).map(Const))
    return st.recursive(
        leaves, lambda sub: st.builds(Bin, conns, sub, sub), max_leaves=max_leaves
    )


def heads(
    multi: bool = True, max_den: int = 4, consts_in_multi: bool = True
) -> st.SearchStrategy[HeadExpr]:
    single = st.one_of(atoms, degrees(max_den).map(Const)).map(
        lambda item: HeadExpr(SINGLE, (item,))
    )
    if not multi:
        return single
    item = st.one_of(atoms, degrees(max_den).map(Const)) if consts_in_multi else atoms
    multi_head = st.builds(
        lambda conn, items: HeadExpr(conn.value, tuple(items)),
        conns,
        st.lists(item, min_size=2, max_size=3),
    )
    return st.one_of(single, multi_head)


def rules(
    multi_heads: bool = True,
    with_neg: bool = True,
    max_leaves: int = 5,
    max_den: int = 4,
    consts_in_multi: bool = True,
) -> st.SearchStrategy[Rule]:
    body = exprs(max_leaves, max_den) if with_neg else neg_free_exprs(max_leaves, max_den)
    return st.builds(Rule, heads(multi_heads, max_den, consts_in_multi), body)


def programs(
    max_rules: int = 5,
    multi_heads: bool = True,
    with_neg: bool = True,
    max_leaves: int = 5,
    max_den: int = 4,
    consts_in_multi: bool = True,
) -> st.SearchStrategy[Program]:
    return st.lists(
        rules(multi_heads, with_neg, max_leaves, max_den, consts_in_multi),
        min_size=1,
        max_size=max_rules,
    ).map(Program.from_rules)


def atomic_head_programs(
    max_rules: int = 5, with_neg: bool = False, max_leaves: int = 5, max_den: int = 4
) -> st.SearchStrategy[Program]:
    """Programs whose heads are single atoms (the consequence-operator domain)."""
    rule = st.builds(
        Rule,
        atoms.map(lambda a: HeadExpr(SINGLE, (a,))),
        exprs(max_leaves, max_den) if with_neg else neg_free_exprs(max_leaves, max_den),
    )
    return st.lists(rule, min_size=1, max_size=max_rules).map(Program.from_rules)


def interpretations(max_den: int = 4) -> st.SearchStrategy[Interpretation]:
    return st.dictionaries(atoms, degrees(max_den), max_size=len(ATOM_NAMES)).map(
        Interpretation
    )


def grid_interpretations(k: int) -> st.SearchStrategy[Interpretation]:
    values = [Fraction(i, k) for i in range(k + 1)]
    return st.dictionaries(
        atoms, st.sampled_from(values), max_size=len(ATOM_NAMES)
    ).map(Interpretation)
