"""Independent verification of fuzzy stable models.

``check_stable`` re-derives both halves of the stability definition
without trusting the solving pipeline: satisfaction by direct exact
evaluation, and minimality by a quantifier-free solver query asking for
an interpretation strictly below the candidate that still satisfies the
candidate's reduct.  Whenever the reduct falls in the class where the
consequence operator provably converges in |At| steps, the solver's
minimality verdict is additionally cross-checked against the fixpoint —
any disagreement means a bug somewhere in the stack and is raised as
such rather than reported as an answer.

The brute-force grid oracle used by the differential test suites lives
in :mod:`faspc.gridkernel` and is re-exported here.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .analysis import tp_bounded
from .core import (
    Atom,
    InternalError,
    Interpretation,
    Program,
    TpCapError,
    is_model,
    reduct,
    tp_fixpoint,
)
from .gridkernel import (  # noqa: F401  (re-exported oracle surface)
    GridBudgetError,
    GridError,
    grid_stable_models,
)
from .smtclient import SolverConfig, SolverError, emit, parse_model, solve
from .translate import And, Cmp, NumConst, Or, SymConst, Theory, rule_formula

__all__ = [
    "Verdict",
    "check_stable",
    "minimality_theory",
    "grid_stable_models",
    "GridError",
    "GridBudgetError",
]


@dataclass(frozen=True)
class Verdict:
    """Outcome of an independent stability check.

    ``minimal_ok`` is three-valued: None means the minimality question
    could not be settled (solver unknown/timeout/failure), never that it
    was skipped silently.  A present witness is an interpretation
    strictly below the candidate that satisfies the candidate's reduct,
    i.e. direct evidence of non-minimality.
    """

    model_ok: bool
    minimal_ok: Optional[bool]
    witness: Optional[Interpretation] = None
    reason: str = ""

    @property
    def is_stable(self) -> bool:
        return self.model_ok and self.minimal_ok is True


def minimality_theory(program: Program, interp: Interpretation) -> Theory:
    """Quantifier-free query: some J strictly below *interp* satisfies
    the reduct of *program* at *interp*.

    One constant per atom, bounded to [0, I(q)]; the reduct's rule
    inequalities (negation already frozen to numerals); and a strict
    drop on at least one atom.  Satisfiable exactly when *interp* fails
    the minimality half of stability.
    """
    atoms = program.atoms()
    formulas = []
    for atom in atoms:
        sym = SymConst(atom.name)
        formulas.append(
            And(
                (
                    Cmp(">=", sym, NumConst(Fraction(0))),
                    Cmp("<=", sym, NumConst(interp[atom])),
                )
            )
        )
    for rule in reduct(program, interp).rules:
        formulas.append(rule_formula(rule, "out"))
    formulas.append(
        Or(tuple(Cmp("<", SymConst(atom.name), NumConst(interp[atom])) for atom in atoms))
    )
    return Theory(tuple(atom.name for atom in atoms), tuple(formulas), "minimality")


def _witness_or_raise(
    program: Program, interp: Interpretation, bindings: dict
) -> Interpretation:
    atoms = program.atoms()
    witness = parse_model(bindings, atoms)
    below = all(witness[atom] <= interp[atom] for atom in atoms)
    strict = any(witness[atom] < interp[atom] for atom in atoms)
    if not (below and strict and is_model(reduct(program, interp), witness)):
        raise InternalError(
            "solver claimed non-minimality but its assignment is not a "
            f"smaller reduct model: {witness}"
        )
    return witness


def _fixpoint_minimal(program: Program, interp: Interpretation) -> bool:
    """Exact minimality for candidates whose reduct has atomic heads and
    non-recursive disjunction: the reduct's least model is the fixpoint
    of the consequence operator, so the candidate is minimal iff it IS
    that fixpoint.  Only meaningful when *interp* satisfies the reduct.
    """
    red = reduct(program, interp)
    atoms = program.atoms()
    try:
        fixpoint, _ = tp_fixpoint(red, cap=max(1, len(atoms)))
    except TpCapError as err:
        raise InternalError(
            "consequence operator exceeded its convergence bound on a "
            f"program in the bounded class: {err}"
        ) from err
    return fixpoint == interp.restrict(atoms)


def check_stable(
    program: Program, interp: Interpretation, cfg: SolverConfig
) -> Verdict:
    """Check *interp* against the two halves of the stability definition.

    Satisfaction is decided by direct evaluation.  Minimality is decided
    by the quantifier-free reduct query; solver failures leave it None
    with the reason recorded.  When the reduct is in the bounded
    convergence class and *interp* is a model, the fixpoint answer must
    agree with the solver's — disagreement raises InternalError.
    """
    atoms = program.atoms()
    model_ok = is_model(program, interp)

    minimal_ok: Optional[bool]
    witness: Optional[Interpretation] = None
    reason = ""
    if all(interp[atom] == 0 for atom in atoms):
        # Nothing lies strictly below the all-zero candidate.
        minimal_ok = True
    else:
        theory = minimality_theory(program, interp)
        try:
            raw = solve(emit(theory, logic=cfg.logic), cfg)
        except SolverError as err:
            raw = None
            minimal_ok = None
            reason = f"minimality query failed: {err}"
        if raw is not None:
            if raw.status == "sat":
                minimal_ok = False
                witness = _witness_or_raise(program, interp, raw.bindings)
            elif raw.status == "unsat":
                minimal_ok = True
            elif raw.status == "timeout":
                minimal_ok = None
                reason = f"minimality query timed out after {cfg.timeout}s"
            elif raw.status == "unknown":
                minimal_ok = None
                reason = "solver returned unknown on the minimality query"
            else:
                minimal_ok = None
                reason = f"solver failed on the minimality query:\n{raw.transcript}"

    if (
        model_ok
        and minimal_ok is not None
        and tp_bounded(reduct(program, interp))
    ):
        if _fixpoint_minimal(program, interp) != minimal_ok:
            raise InternalError(
                "solver and consequence-operator fixpoint disagree on "
                f"minimality of {interp}"
            )

    return Verdict(model_ok=model_ok, minimal_ok=minimal_ok, witness=witness, reason=reason)
