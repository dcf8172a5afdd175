"""Structural analysis: dependency graphs, components and program classes.

The positive dependency graph has an arc from every head atom of a rule to
every atom occurring positively (outside all negations) in its body.  The
classifier derives the structural flags that drive translation selection:

* ``acyclic``: the dependency graph has no cycle (nor self-loop);
* ``acyclic_mod_bool``: acyclic after removing the crispifying rules;
* ``hcf`` (head-cycle-free): no disjunctive head (``+``/``*``/``||`` with
  two or more items) holds two atoms of the same strongly connected
  component — a repeated atom violates this by itself;
* ``nonrec_lukor`` / ``nonrec_godelor``: no normalized rule has a body
  ``+`` (resp. ``||``) chain while a head atom shares a component with a
  positive body atom;
* ``head_conns``: the set of head connective tags in use.

Crispifying rules are recognized purely syntactically, in the two shapes
``p :- p + p.`` and ``p * p :- p.``; they force p toward {0, 1}.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .core import (
    SINGLE,
    Atom,
    AtomRef,
    Bin,
    Conn,
    HeadExpr,
    Program,
    Rule,
    positive_atoms,
)


def head_atoms(rule: Rule) -> list[Atom]:
    """The atoms of a rule head, with multiplicity, in head order."""
    return [item for item in rule.head.items if isinstance(item, Atom)]


def dependency_graph(program: Program) -> dict[Atom, list[Atom]]:
    """Positive dependency graph as an insertion-ordered adjacency map.

    Every atom of the program appears as a node, including atoms with no
    arcs (e.g. atoms occurring only under negation).
    """
    graph: dict[Atom, list[Atom]] = {atom: [] for atom in program.atoms()}
    for rule in program.rules:
        targets = positive_atoms(rule.body)
        for source in head_atoms(rule):
            edges = graph[source]
            for target in targets:
                if target not in edges:
                    edges.append(target)
    return graph


def strongly_connected_components(
    graph: dict[Atom, list[Atom]]
) -> list[tuple[Atom, ...]]:
    """Tarjan's algorithm, iteratively; components are emitted callees-first.

    If p can reach q and they are in different components, q's component
    has the smaller position in the returned list.  Node visit order (and
    hence the emission order) is deterministic in the adjacency-map order.
    """
    counter = itertools.count()
    index_of: dict[Atom, int] = {}
    low: dict[Atom, int] = {}
    on_stack: set[Atom] = set()
    stack: list[Atom] = []
    components: list[tuple[Atom, ...]] = []

    for root in graph:
        if root in index_of:
            continue
        index_of[root] = low[root] = next(counter)
        stack.append(root)
        on_stack.add(root)
        work: list[tuple[Atom, "itertools.chain[Atom]"]] = [
            (root, iter(graph[root]))  # type: ignore[arg-type]
        ]
        while work:
            node, successors = work[-1]
            descended = False
            for succ in successors:
                if succ not in index_of:
                    index_of[succ] = low[succ] = next(counter)
                    stack.append(succ)
                    on_stack.add(succ)
                    work.append((succ, iter(graph[succ])))
                    descended = True
                    break
                if succ in on_stack:
                    low[node] = min(low[node], index_of[succ])
            if descended:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index_of[node]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    component.append(member)
                    if member is node or member == node:
                        break
                components.append(tuple(reversed(component)))
    return components


def component_index(graph: dict[Atom, list[Atom]]) -> dict[Atom, int]:
    """Map each atom to the emission position of its component.

    Dependencies end up with smaller indices than their dependants.
    """
    indices: dict[Atom, int] = {}
    for position, component in enumerate(strongly_connected_components(graph)):
        for atom in component:
            indices[atom] = position
    return indices


def _graph_acyclic(graph: dict[Atom, list[Atom]]) -> bool:
    for component in strongly_connected_components(graph):
        if len(component) > 1:
            return False
        atom = component[0]
        if atom in graph[atom]:
            return False
    return True


def is_crisp_rule(rule: Rule) -> bool:
    """Whether the rule has one of the crispifying shapes p :- p+p / p*p :- p."""
    head = rule.head
    if head.conn == SINGLE and isinstance(head.items[0], Atom):
        atom = head.items[0]
        return rule.body == Bin(Conn.LUK_OR, AtomRef(atom), AtomRef(atom))
    if head.conn == Conn.LUK_AND.value and len(head.items) == 2:
        first, second = head.items
        return (
            isinstance(first, Atom)
            and first == second
            and rule.body == AtomRef(first)
        )
    return False


def crisp_rules(program: Program) -> tuple[Rule, ...]:
    """The crispifying rules of the program, in program order."""
    return tuple(rule for rule in program.rules if is_crisp_rule(rule))


def crisp_atoms(program: Program) -> tuple[Atom, ...]:
    """Atoms constrained by a crispifying rule, in first-occurrence order."""
    seen: dict[Atom, None] = {}
    for rule in crisp_rules(program):
        for atom in head_atoms(rule):
            seen.setdefault(atom, None)
    return tuple(seen)


def without_crisp_rules(program: Program) -> Program:
    return Program(tuple(rule for rule in program.rules if not is_crisp_rule(rule)))


_DISJUNCTIVE_HEAD_CONNS = {Conn.LUK_OR.value, Conn.LUK_AND.value, Conn.GODEL_OR.value}


def hcf_violation(program: Program) -> Rule | None:
    """The first rule whose disjunctive head holds two same-component atoms.

    Min-conjunction heads do not count: they split losslessly into one
    rule per atom and never go through head shifting.
    """
    indices = component_index(dependency_graph(program))
    for rule in program.rules:
        if rule.head.conn not in _DISJUNCTIVE_HEAD_CONNS:
            continue
        atoms = head_atoms(rule)
        for i, first in enumerate(atoms):
            for second in atoms[i + 1 :]:
                if indices[first] == indices[second]:
                    return rule
    return None


def head_cycle_free(program: Program) -> bool:
    return hcf_violation(program) is None


@dataclass(frozen=True)
class ProgramClass:
    """Structural flags of a program, as used for translation selection."""

    acyclic: bool
    acyclic_mod_bool: bool
    hcf: bool
    nonrec_lukor: bool
    nonrec_godelor: bool
    head_conns: tuple[str, ...]

    def as_dict(self) -> dict:
        return {
            "acyclic": self.acyclic,
            "acyclic_mod_bool": self.acyclic_mod_bool,
            "hcf": self.hcf,
            "nonrec_lukor": self.nonrec_lukor,
            "nonrec_godelor": self.nonrec_godelor,
            "head_conns": list(self.head_conns),
        }


def _body_conns_outside_neg(rule: Rule) -> set[Conn]:
    """Binary connectives occurring in the body outside all negations.

    Negated subtrees are skipped entirely: they evaluate under the outer
    interpretation and act as constants for recursion purposes.
    """
    conns: set[Conn] = set()
    stack = [rule.body]
    while stack:
        node = stack.pop()
        if isinstance(node, Bin):
            conns.add(node.conn)
            stack.extend((node.left, node.right))
    return conns


def _nonrecursive(program: Program, conn: Conn) -> bool:
    indices = component_index(dependency_graph(program))
    for rule in program.rules:
        if conn not in _body_conns_outside_neg(rule):
            continue
        body_atoms = positive_atoms(rule.body)
        for head_atom in head_atoms(rule):
            for body_atom in body_atoms:
                if indices[head_atom] == indices[body_atom]:
                    return False
    return True


def tp_bounded(program: Program) -> bool:
    """Whether the consequence operator provably converges in |At| steps.

    True for programs with atomic (single-item) heads whose bodies use
    + and || only non-recursively: those connectives can push a value
    above its operands, so recursion through them may need unboundedly
    many ascending applications, while * and && cannot.
    """
    for rule in program.rules:
        if len(rule.head.items) > 1:
            return False
    return _nonrecursive(program, Conn.LUK_OR) and _nonrecursive(
        program, Conn.GODEL_OR
    )


def classify(program: Program) -> ProgramClass:
    """Compute the structural flags driving translation selection.

    The recursion flags are measured on the normalized program (after
    body normalization), where every body holds at most one binary
    connective kind.
    """
    from .rewrite import simp  # local import: rewrite depends on this module

    graph = dependency_graph(program)
    acyclic = _graph_acyclic(graph)
    acyclic_mod_bool = _graph_acyclic(dependency_graph(without_crisp_rules(program)))
    hcf = head_cycle_free(program)

    normalized = simp(program).program
    nonrec_lukor = _nonrecursive(normalized, Conn.LUK_OR)
    nonrec_godelor = _nonrecursive(normalized, Conn.GODEL_OR)

    head_conns = tuple(sorted({rule.head.conn for rule in program.rules}))
    return ProgramClass(
        acyclic=acyclic,
        acyclic_mod_bool=acyclic_mod_bool,
        hcf=hcf,
        nonrec_lukor=nonrec_lukor,
        nonrec_godelor=nonrec_godelor,
        head_conns=head_conns,
    )
