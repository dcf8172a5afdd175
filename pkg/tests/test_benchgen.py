"""Generator behaviors: determinism, re-parse identity, parameter
validation, classification claims, and reduction correctness."""

from fractions import Fraction

import pytest

from faspc.benchgen import (
    BenchError,
    QBF_VARIANTS,
    Qbf2Formula,
    gen_coloring,
    gen_hampath,
    gen_simple,
    qbf_satisfiable,
    qbf_to_fasp,
    random_qbf2,
)
from faspc.core import Atom, Interpretation, tp_fixpoint
from faspc.frontend import load
from faspc.gridkernel import grid_stable_models
from faspc.smtclient import (
    Incoherent,
    SolverConfig,
    Stable,
    default_solver_command,
    solve_pipeline,
)
from faspc.translate import select_pipeline
from faspc.verify import check_stable

CFG = SolverConfig(default_solver_command(), timeout=60.0)

HALF = Fraction(1, 2)
ONE = Fraction(1)

# Fixed formulas with known truth values (m=1, n=2).
SAT_FORMULA = Qbf2Formula(1, 2, ((1, 1, 1),))  # exists x1 forall x2: x1
UNSAT_FORMULA = Qbf2Formula(1, 2, ((2, 2, 2),))  # exists x1 forall x2: x2
TAUT_FORMULA = Qbf2Formula(1, 2, ((1, 1, 1), (-1, -1, -1)))  # x1 or not x1
IFF_FORMULA = Qbf2Formula(1, 2, ((1, 2, 2), (-1, -2, -2)))  # x1 iff x2


# ------------------------------------------------------------- determinism


def test_generators_are_deterministic_under_seed():
    """The same seed yields byte-identical text; seeds change the text."""
    assert gen_coloring(6, HALF, 10, seed=3) == gen_coloring(6, HALF, 10, seed=3)
    assert gen_coloring(6, HALF, 10, seed=3) != gen_coloring(6, HALF, 10, seed=4)
    assert gen_hampath(4, 10, seed=5) == gen_hampath(4, 10, seed=5)
    assert gen_hampath(4, 10, seed=5) != gen_hampath(4, 10, seed=6)
    assert random_qbf2(2, 4, 5, seed=9) == random_qbf2(2, 4, 5, seed=9)
    assert random_qbf2(2, 4, 5, seed=9) != random_qbf2(2, 4, 5, seed=10)


def test_generated_text_reparses_to_the_identical_program():
    """Loading a generated text twice gives equal grounded programs."""
    texts = [
        gen_coloring(5, HALF, 10, seed=1),
        gen_hampath(3, 10, seed=1),
        gen_simple("stratified", 4, 20),
        gen_simple("oddcycle", 5, 1),
    ]
    texts += [qbf_to_fasp(SAT_FORMULA, variant) for variant in QBF_VARIANTS]
    for text in texts:
        assert text.endswith("\n")
        assert load(text) == load(text)
        assert load(text).rules


# -------------------------------------------------------------- validation


@pytest.mark.parametrize(
    "make",
    [
        lambda: Qbf2Formula(2, 2, ((1, 1, 1),)),  # need n > m
        lambda: Qbf2Formula(0, 2, ((1, 1, 1),)),  # need m >= 1
        lambda: Qbf2Formula(1, 2, ()),  # no disjuncts
        lambda: Qbf2Formula(1, 2, ((1, 0, 1),)),  # zero literal
        lambda: Qbf2Formula(1, 2, ((1, 3, 1),)),  # index out of range
        lambda: Qbf2Formula(1, 2, ((1, 1),)),  # not a triple
        lambda: random_qbf2(1, 2, 0, seed=0),  # no disjuncts
        lambda: qbf_to_fasp(SAT_FORMULA, "strong_or"),  # unknown variant
        lambda: gen_coloring(0, HALF, 10, seed=0),  # no vertices
        lambda: gen_coloring(3, Fraction(3, 2), 10, seed=0),  # density > 1
        lambda: gen_coloring(3, HALF, 0, seed=0),  # bad denominator
        lambda: gen_hampath(1, 10, seed=0),  # single vertex
        lambda: gen_hampath(3, 0, seed=0),  # bad denominator
        lambda: gen_simple("stratified", 0, 10),  # no atoms
        lambda: gen_simple("stratified", 3, 0),  # bad denominator
        lambda: gen_simple("oddcycle", 4, 1),  # even cycle
        lambda: gen_simple("ladder", 3, 1),  # unknown family
    ],
)
def test_invalid_parameters_are_refused(make):
    """Each bad parameter combination raises the generator error."""
    with pytest.raises(BenchError):
        make()


# ---------------------------------------------------------- classification


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_coloring_classifies_for_the_refined_completion(seed):
    """Guess heads and constraints give an arc-free dependency graph."""
    pipeline = select_pipeline(load(gen_coloring(6, HALF, 10, seed=seed)))
    assert pipeline.strategy == "rcomp"
    assert pipeline.program_class.acyclic_mod_bool
    assert pipeline.program_class.hcf


@pytest.mark.parametrize("vertices,seed", [(3, 0), (4, 1), (5, 2)])
def test_hampath_classifies_for_the_ordered_completion(vertices, seed):
    """Reach propagation is cyclic but head-cycle-free with nonrecursive +."""
    pipeline = select_pipeline(load(gen_hampath(vertices, 10, seed=seed)))
    assert pipeline.strategy == "ocomp"
    assert not pipeline.program_class.acyclic_mod_bool
    assert pipeline.program_class.hcf
    assert pipeline.program_class.nonrec_lukor


def test_two_vertex_hampath_has_no_recursion_and_downgrades():
    """With one non-start vertex there are no walk-extension rules, so the
    dependency graph is acyclic and the refined completion suffices."""
    pipeline = select_pipeline(load(gen_hampath(2, 10, seed=0)))
    assert pipeline.strategy == "rcomp"


# ------------------------------------------------------------ simple families


def test_stratified_chain_converges_in_exactly_n_steps():
    """Each consequence application derives exactly one new chain atom."""
    n, den = 7, 20
    program = load(gen_simple("stratified", n, den))
    fixpoint, steps = tp_fixpoint(program)
    assert steps == n
    assert fixpoint[Atom("p(1)")] == 1
    for i in range(2, n + 1):
        assert fixpoint[Atom(f"p({i})")] == Fraction(den - 1, den)


def test_stratified_chain_with_unit_denominator_is_all_ones():
    program = load(gen_simple("stratified", 3, 1))
    fixpoint, steps = tp_fixpoint(program)
    assert steps == 3
    assert all(fixpoint[Atom(f"p({i})")] == 1 for i in range(1, 4))


@pytest.mark.parametrize("n", [1, 3, 5])
def test_odd_cycle_has_the_unique_half_model(n):
    """The odd negative cycle's only stable model assigns 1/2 everywhere."""
    program = load(gen_simple("oddcycle", n, 1))
    expected = Interpretation({Atom(f"p({i})"): HALF for i in range(1, n + 1)})
    assert grid_stable_models(program, 2) == frozenset({expected})


def test_odd_cycle_classifies_for_the_refined_completion():
    """Negative arcs do not count as dependencies, so the cycle is acyclic."""
    pipeline = select_pipeline(load(gen_simple("oddcycle", 5, 1)))
    assert pipeline.strategy == "rcomp"


# ------------------------------------------------------- coloring semantics


def test_one_edge_coloring_admits_the_opposite_shades():
    """Two vertices joined by a degree-1 edge: giving them opposite crisp
    shades satisfies both constraints."""
    program = load(gen_coloring(2, ONE, 1, seed=0))
    witness = Interpretation(
        {Atom("black(v1)"): ONE, Atom("white(v2)"): ONE}
    )
    models = grid_stable_models(program, 2)
    assert witness in models
    verdict = check_stable(program, witness, CFG)
    assert verdict.model_ok and verdict.minimal_ok is True


def test_single_vertex_coloring_is_trivially_coherent():
    """No edges means any split of degree 1 between the shades works."""
    program = load(gen_coloring(1, ONE, 1, seed=0))
    models = grid_stable_models(program, 2)
    assert len(models) == 3  # (1,0), (1/2,1/2), (0,1)
    for model in models:
        assert model[Atom("black(v1)")] + model[Atom("white(v1)")] == 1


# -------------------------------------------------------- hampath semantics


def test_two_vertex_hampath_grid_models():
    """With unit degrees the forward edge must be taken; the return edge
    may be taken or discarded, giving exactly two crisp stable models."""
    program = load(gen_hampath(2, 1, seed=0))
    models = grid_stable_models(program, 1)
    assert len(models) == 2
    for model in models:
        assert model[Atom("in(v1,v2)")] == 1
        assert model[Atom("reached(v2)")] == 1
        taken = model[Atom("in(v2,v1)")]
        assert model[Atom("out(v2,v1)")] == 1 - taken


def test_underweighted_edge_makes_hampath_incoherent():
    """A vertex demanding more reach than the only incoming edge allows
    kills every candidate."""
    text = gen_hampath(2, 1, seed=0).replace(
        "edge(v1,v2) :- 1.", "edge(v1,v2) :- 1/2."
    )
    program = load(text)
    assert grid_stable_models(program, 2) == frozenset()
    outcome = solve_pipeline(select_pipeline(program), CFG)
    assert isinstance(outcome, Incoherent)


def test_hampath_pipeline_model_is_verified_stable():
    """With unit degrees the complete digraph always has a crisp
    Hamiltonian path, so the pipeline must find a verified model."""
    program = load(gen_hampath(3, 1, seed=2))
    outcome = solve_pipeline(select_pipeline(program), CFG)
    assert isinstance(outcome, Stable)
    verdict = check_stable(program, outcome.model, CFG)
    assert verdict.model_ok
    assert verdict.minimal_ok is not False


# ----------------------------------------------------------- QBF reduction


def test_qbf_brute_force_on_fixed_formulas():
    assert qbf_satisfiable(SAT_FORMULA)
    assert not qbf_satisfiable(UNSAT_FORMULA)
    assert qbf_satisfiable(TAUT_FORMULA)
    assert not qbf_satisfiable(IFF_FORMULA)


def test_qbf_program_shapes():
    """Rule counts follow the construction: per-variable guesses (plus
    crispifiers for the Lukasiewicz variants), universal drives, the sat
    constraint, and one rule per disjunct."""
    formula = Qbf2Formula(1, 2, ((1, -2, 2), (-1, 2, 2)))
    counts = {"godel_or": 2 + 2 + 1 + 2, "luk_or": 6 + 2 + 1 + 1 + 2,
              "luk_and": 6 + 2 + 1 + 1 + 2}
    for variant, expected in counts.items():
        program = load(qbf_to_fasp(formula, variant))
        assert len(program.rules) == expected, variant


@pytest.mark.parametrize("variant", QBF_VARIANTS)
@pytest.mark.parametrize(
    "formula,truth",
    [(SAT_FORMULA, True), (UNSAT_FORMULA, False),
     (TAUT_FORMULA, True), (IFF_FORMULA, False)],
)
def test_qbf_coherence_matches_truth_on_fixed_formulas(variant, formula, truth):
    """Grid-oracle coherence of the reduction equals the formula's truth."""
    program = load(qbf_to_fasp(formula, variant))
    assert bool(grid_stable_models(program, 2)) == truth


@pytest.mark.parametrize("variant", QBF_VARIANTS)
def test_qbf_model_values_live_on_the_designated_lattice(variant):
    """Stable models are crisp for the || and + variants and {1/2, 1} for
    the * variant, with sat pinned to 1 by the constraint."""
    program = load(qbf_to_fasp(TAUT_FORMULA, variant))
    models = grid_stable_models(program, 2)
    assert models
    allowed = {HALF, ONE} if variant == "luk_and" else {Fraction(0), ONE}
    for model in models:
        assert model[Atom("sat")] == 1
        for atom in program.atoms():
            assert model[atom] in allowed
        if variant == "luk_and":
            for i in (1, 2):
                assert model[Atom(f"xt({i})")] + model[Atom(f"xf({i})")] >= Fraction(3, 2)


@pytest.mark.parametrize("seed", range(8))
def test_qbf_random_sample_agrees_with_brute_force(seed):
    """On random small formulas, every variant's grid-oracle coherence and
    the SMT pipeline's verdict both match brute-force evaluation."""
    formula = random_qbf2(1 + seed % 2, 3, 1 + seed % 3, seed=seed)
    truth = qbf_satisfiable(formula)
    for variant in QBF_VARIANTS:
        program = load(qbf_to_fasp(formula, variant))
        assert bool(grid_stable_models(program, 2)) == truth, variant
        outcome = solve_pipeline(select_pipeline(program), CFG)
        assert isinstance(outcome, Stable if truth else Incoherent), variant
        if isinstance(outcome, Stable):
            verdict = check_stable(program, outcome.model, CFG)
            assert verdict.model_ok
            assert verdict.minimal_ok is not False


def test_qbf_pipeline_model_is_verified_on_a_satisfiable_formula():
    program = load(qbf_to_fasp(SAT_FORMULA, "godel_or"))
    outcome = solve_pipeline(select_pipeline(program), CFG)
    assert isinstance(outcome, Stable)
    assert outcome.model[Atom("sat")] == 1
    verdict = check_stable(program, outcome.model, CFG)
    assert verdict.model_ok
