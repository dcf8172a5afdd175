"""Command-line driver.

``faspc solve FILE`` runs the full pipeline — parse, ground, classify,
rewrite, translate, solve, optionally verify — and prints either the
model (one ``atom = value`` line per atom, or a single JSON object with
``--json``), the string ``INCOHERENT``, or ``UNKNOWN`` with a reason.
``faspc gen`` writes generated benchmark instances as program text.

Exit codes: 10 a stable model was found, 20 incoherent, 30 unknown,
0 for the diagnostic modes (``--classify``, ``--print-smt``) and ``gen``,
1 for usage/input/strategy errors, 2 for internal invariant breaches.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
import traceback
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .analysis import classify
from .core import Atom, FaspError, InternalError, Interpretation, Program
from .frontend import frac_text, ground, parse, program_text
from .gridkernel import grid_stable_models
from .smtclient import (
    Incoherent,
    SolverConfig,
    Stable,
    Unknown,
    default_solver_command,
    emit,
    solve_pipeline,
)
from .translate import select_pipeline
from .verify import Verdict, check_stable

__all__ = ["main", "RunReport"]

EXIT_STABLE = 10
EXIT_INCOHERENT = 20
EXIT_UNKNOWN = 30
EXIT_USAGE = 1
EXIT_INTERNAL = 2


@dataclass(frozen=True)
class RunReport:
    """What one ``solve`` invocation produced."""

    strategy: str
    outcome: str  # "stable" | "incoherent" | "unknown"
    atoms: tuple[Atom, ...]  # display order; covers all original atoms
    model: Optional[Interpretation]
    verdict: Optional[Verdict]
    timings: dict[str, float]
    reason: str = ""
    models: Optional[tuple[Interpretation, ...]] = None  # oracle mode only
    oracle_k: Optional[int] = None


class _PhaseError(Exception):
    """A pipeline phase failed; carries the phase tag and the cause."""

    def __init__(self, phase: str, cause: FaspError) -> None:
        super().__init__(f"[{phase}] {cause}")
        self.phase = phase
        self.cause = cause


@contextmanager
def _phase(name: str, timings: dict[str, float]):
    start = time.perf_counter()
    try:
        yield
    except FaspError as exc:
        raise _PhaseError(name, exc) from exc
    finally:
        timings[name] = time.perf_counter() - start


def _interp_json(atoms, interp: Interpretation) -> dict:
    return {atom.name: frac_text(interp[atom]) for atom in atoms}


def _verdict_json(verdict: Verdict) -> dict:
    witness = None
    if verdict.witness is not None:
        witness = {atom.name: frac_text(value) for atom, value in sorted(
            verdict.witness.items(), key=lambda item: item[0].name)}
    return {
        "model_ok": verdict.model_ok,
        "minimal_ok": verdict.minimal_ok,
        "witness": witness,
        "reason": verdict.reason,
    }


def report_json(report: RunReport) -> dict:
    out: dict = {
        "strategy": report.strategy,
        "outcome": report.outcome,
        "model": (
            _interp_json(report.atoms, report.model)
            if report.model is not None
            else None
        ),
        "verdict": _verdict_json(report.verdict) if report.verdict else None,
        "timings": report.timings,
        "reason": report.reason,
    }
    if report.models is not None:
        out["k"] = report.oracle_k
        out["models"] = [_interp_json(report.atoms, m) for m in report.models]
    return out


def _dump_json(payload: dict, stream) -> None:
    print(json.dumps(payload, indent=2, sort_keys=True), file=stream)


def _print_report(report: RunReport, json_out: bool, stream) -> None:
    if json_out:
        _dump_json(report_json(report), stream)
        return
    if report.outcome == "incoherent":
        print("INCOHERENT", file=stream)
    elif report.outcome == "unknown":
        print(f"UNKNOWN: {report.reason}", file=stream)
    elif report.models is not None:
        for index, model in enumerate(report.models, start=1):
            print(f"model {index}:", file=stream)
            for atom in report.atoms:
                print(f"  {atom.name} = {frac_text(model[atom])}", file=stream)
    else:
        for atom in report.atoms:
            print(f"{atom.name} = {frac_text(report.model[atom])}", file=stream)


def _read_source(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _solver_config(args) -> SolverConfig:
    command = args.solver if args.solver else default_solver_command()
    return SolverConfig(command=command, timeout=args.timeout)


def _display_atoms(program: Program, model: Optional[Interpretation]) -> tuple:
    """Original atoms in first-occurrence order, then any reported
    auxiliaries sorted by name."""
    atoms = list(program.atoms())
    if model is not None:
        atoms += sorted(set(model) - set(atoms), key=lambda atom: atom.name)
    return tuple(atoms)


def _run_oracle(args, program: Program, timings: dict) -> tuple[RunReport, int]:
    with _phase("oracle", timings):
        models = grid_stable_models(program, args.oracle)
    ordered = sorted(models, key=str)
    verdicts: dict[Interpretation, Verdict] = {}
    if args.check and ordered:
        cfg = _solver_config(args)
        with _phase("check", timings):
            kept = []
            for model in ordered:
                verdict = check_stable(program, model, cfg)
                if verdict.model_ok and verdict.minimal_ok is True:
                    kept.append(model)
                    verdicts[model] = verdict
                else:
                    print(
                        f"faspc: dropped unverified grid answer "
                        f"{_interp_json(program.atoms(), model)}: "
                        f"model_ok={verdict.model_ok} "
                        f"minimal_ok={verdict.minimal_ok}",
                        file=sys.stderr,
                    )
        had_candidates = bool(ordered)
        ordered = kept
    else:
        had_candidates = bool(ordered)

    if ordered:
        outcome, code = "stable", EXIT_STABLE
    elif had_candidates:
        outcome, code = "unknown", EXIT_UNKNOWN
    else:
        outcome, code = "incoherent", EXIT_INCOHERENT
    reason = (
        "grid candidates exist but none passed verification"
        if outcome == "unknown"
        else ""
    )
    report = RunReport(
        strategy="oracle",
        outcome=outcome,
        atoms=program.atoms(),
        model=ordered[0] if ordered else None,
        verdict=verdicts.get(ordered[0]) if ordered else None,
        timings=timings,
        reason=reason,
        models=tuple(ordered),
        oracle_k=args.oracle,
    )
    return report, code


def _run_solve(args) -> int:
    timings: dict[str, float] = {}

    with _phase("read", timings):
        try:
            text = _read_source(args.file)
        except OSError as exc:
            raise _PhaseError("read", FaspError(str(exc))) from exc
    with _phase("parse", timings):
        source = parse(text)
    with _phase("ground", timings):
        program = ground(source)
    with _phase("classify", timings):
        cls = classify(program)

    if args.classify_only:
        _dump_json(cls.as_dict(), sys.stdout)
        return 0

    if args.oracle is not None:
        report, code = _run_oracle(args, program, timings)
        _print_report(report, args.json_out, sys.stdout)
        return code

    with _phase("translate", timings):
        pipeline = select_pipeline(program, args.strategy, cls)
    if args.dump_rewritten:
        print(program_text(pipeline.rewritten), file=sys.stderr, end="")
    if args.print_smt:
        print(emit(pipeline.theory), end="")
        return 0

    with _phase("solve", timings):
        cfg = _solver_config(args)
        outcome = solve_pipeline(pipeline, cfg, include_aux=args.show_aux)

    verdict = None
    reason = ""
    if isinstance(outcome, Stable):
        result, code = "stable", EXIT_STABLE
        model: Optional[Interpretation] = outcome.model
        if args.check:
            with _phase("check", timings):
                verdict = check_stable(
                    program, model.restrict(program.atoms()), cfg
                )
            if not verdict.model_ok or verdict.minimal_ok is False:
                raise InternalError(
                    "pipeline answer failed verification: "
                    f"model_ok={verdict.model_ok} minimal_ok={verdict.minimal_ok}"
                    + (
                        f" witness={_interp_json(program.atoms(), verdict.witness)}"
                        if verdict.witness is not None
                        else ""
                    )
                )
            if verdict.minimal_ok is None:
                result, code = "unknown", EXIT_UNKNOWN
                reason = (
                    "model found but minimality could not be verified: "
                    + (verdict.reason or "verifier returned unknown")
                )
                model = None
    elif isinstance(outcome, Incoherent):
        result, code, model = "incoherent", EXIT_INCOHERENT, None
    else:
        assert isinstance(outcome, Unknown)
        result, code, model = "unknown", EXIT_UNKNOWN, None
        reason = outcome.reason

    report = RunReport(
        strategy=pipeline.strategy,
        outcome=result,
        atoms=_display_atoms(program, model),
        model=model,
        verdict=verdict,
        timings=timings,
        reason=reason,
    )
    _print_report(report, args.json_out, sys.stdout)
    return code


def _run_gen(args) -> int:
    from . import benchgen

    if args.family == "coloring":
        text = benchgen.gen_coloring(
            args.vertices, Fraction(args.density), args.den, args.seed
        )
    elif args.family == "hampath":
        text = benchgen.gen_hampath(args.vertices, args.den, args.seed)
    elif args.family in ("stratified", "oddcycle"):
        text = benchgen.gen_simple(args.family, args.n, args.den)
    else:
        formula = benchgen.random_qbf2(args.m, args.n, args.k, args.seed)
        text = benchgen.qbf_to_fasp(formula, args.variant)

    if args.output:
        with open(args.output, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return 0


def _fraction_arg(raw: str) -> Fraction:
    try:
        value = Fraction(raw)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a fraction: {raw!r}") from exc
    return value


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="faspc",
        description="Compile fuzzy answer set programs to SMT and solve them.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve a program file ('-' for stdin)")
    solve.add_argument("file", help="program file, or - for stdin")
    solve.add_argument(
        "--strategy",
        choices=("auto", "smt", "comp", "rcomp", "ocomp"),
        default="auto",
        help="translation to use (default: auto-select by classification)",
    )
    solve.add_argument(
        "--solver",
        default=None,
        metavar="CMD",
        help="SMT solver command reading SMT-LIB2 on stdin (default: autodetect)",
    )
    solve.add_argument(
        "--timeout", type=float, default=10.0, help="solver timeout in seconds"
    )
    solve.add_argument(
        "--check",
        action="store_true",
        help="verify the answer before printing; unverified answers downgrade",
    )
    solve.add_argument(
        "--json", dest="json_out", action="store_true",
        help="print one JSON report object instead of text",
    )
    solve.add_argument(
        "--print-smt", action="store_true",
        help="print the SMT-LIB2 script and exit without solving",
    )
    solve.add_argument(
        "--dump-rewritten", action="store_true",
        help="write the rewritten program to stderr before solving",
    )
    solve.add_argument(
        "--classify", dest="classify_only", action="store_true",
        help="print the structural classification as JSON and exit",
    )
    solve.add_argument(
        "--show-aux", action="store_true",
        help="also report rewriting-introduced auxiliary atoms",
    )
    solve.add_argument(
        "--oracle", type=int, metavar="K", default=None,
        help="enumerate grid stable models at resolution 1/K instead of solving",
    )

    gen = sub.add_parser("gen", help="generate benchmark program text")
    families = gen.add_subparsers(dest="family", required=True)

    coloring = families.add_parser("coloring", help="fuzzy graph coloring")
    coloring.add_argument("--vertices", type=int, required=True)
    coloring.add_argument("--density", type=_fraction_arg, default=Fraction(1, 2))
    coloring.add_argument("--den", type=int, default=10)
    coloring.add_argument("--seed", type=int, default=0)

    hampath = families.add_parser("hampath", help="fuzzy Hamiltonian path")
    hampath.add_argument("--vertices", type=int, required=True)
    hampath.add_argument("--den", type=int, default=10)
    hampath.add_argument("--seed", type=int, default=0)

    stratified = families.add_parser("stratified", help="negation-free chain")
    stratified.add_argument("--n", type=int, required=True)
    stratified.add_argument("--den", type=int, default=10)

    oddcycle = families.add_parser("oddcycle", help="odd negative cycle")
    oddcycle.add_argument("--n", type=int, required=True)
    oddcycle.add_argument("--den", type=int, default=1, help=argparse.SUPPRESS)

    qbf = families.add_parser("qbf", help="random 2-QBF reduction instance")
    qbf.add_argument("--m", type=int, required=True, help="existential variables")
    qbf.add_argument("--n", type=int, required=True, help="total variables")
    qbf.add_argument("--k", type=int, required=True, help="disjunct count")
    qbf.add_argument(
        "--variant", choices=("godel_or", "luk_or", "luk_and"), default="godel_or"
    )
    qbf.add_argument("--seed", type=int, default=0)

    for family in (coloring, hampath, stratified, oddcycle, qbf):
        family.add_argument("--output", default=None, help="write to file")

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else EXIT_USAGE

    try:
        if args.command == "solve":
            return _run_solve(args)
        return _run_gen(args)
    except _PhaseError as exc:
        if isinstance(exc.cause, InternalError):
            print(f"faspc: internal error {exc}", file=sys.stderr)
            return EXIT_INTERNAL
        print(f"faspc: error {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InternalError as exc:
        print(f"faspc: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except FaspError as exc:
        print(f"faspc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BrokenPipeError:
        return EXIT_USAGE
    except Exception:  # pragma: no cover - safety net for true bugs
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
