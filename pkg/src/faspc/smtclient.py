"""SMT-LIB2 serialization, solver subprocess driving, and model parsing.

The solver is any external executable that reads a full SMT-LIB2 script on
standard input and prints a status line (``sat``/``unsat``/``unknown``)
followed by the ``get-value`` response.  The command resolution order is:

1. the ``FASPC_SMT_SOLVER`` environment variable,
2. a native ``z3`` binary on PATH (run as ``z3 -in``),
3. the bundled ``z3shim.cjs`` (requires ``node`` and the ``z3-solver``
   npm package installed in the repository root).

A command containing ``--server`` is treated as a pooled solver speaking
the shim's length-framed protocol: the process is started once and reused
across queries, each of which the shim evaluates in a fresh solver
context.  Timeouts are enforced by killing the process (the pool is then
respawned on the next query).
"""

from __future__ import annotations

import atexit
import collections
import os
import re
import select
import shlex
import shutil
import subprocess
import threading
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .core import Atom, FaspError, Interpretation, InternalError
from .translate import (
    Add,
    And,
    Cmp,
    Forall,
    Iff,
    Implies,
    Ite,
    NumConst,
    Or,
    Pipeline,
    SmtFormula,
    SmtTerm,
    Sub,
    SymConst,
    Theory,
    Var,
)


class SolverError(FaspError):
    """The solver process could not be run or produced unusable output."""


class SolverInconsistencyError(InternalError):
    """The solver returned a value that violates the theory's invariants."""


@dataclass(frozen=True)
class SolverConfig:
    """How to run the external solver."""

    command: str
    timeout: float = 10.0
    logic: Optional[str] = None

    def __post_init__(self) -> None:
        if self.timeout <= 0:
            raise ValueError("solver timeout must be positive")


@dataclass(frozen=True)
class Stable:
    model: Interpretation


@dataclass(frozen=True)
class Incoherent:
    pass


@dataclass(frozen=True)
class Unknown:
    reason: str


SolveOutcome = Union[Stable, Incoherent, Unknown]


@dataclass(frozen=True)
class RawResult:
    """Solver status plus raw value bindings (name -> s-expression)."""

    status: str  # sat | unsat | unknown | timeout | crash
    bindings: dict[str, object] = field(default_factory=dict)
    transcript: str = ""


def default_solver_command() -> str:
    """Resolve a usable solver command, or explain how to get one."""
    env = os.environ.get("FASPC_SMT_SOLVER")
    if env:
        return env
    if shutil.which("z3"):
        return "z3 -in"
    shim = os.path.join(os.path.dirname(__file__), "z3shim.cjs")
    if shutil.which("node") and os.path.exists(shim):
        return f"node {shlex.quote(shim)} --server"
    raise SolverError(
        "no SMT solver found: set FASPC_SMT_SOLVER, install z3 on PATH, "
        "or install node plus the z3-solver npm package for the bundled shim"
    )


# ---------------------------------------------------------------- emission

_SIMPLE_SYMBOL = re.compile(r"[A-Za-z~!@$%^&*_\-+=<>.?/][A-Za-z0-9~!@$%^&*_\-+=<>.?/]*\Z")


def _sym(name: str) -> str:
    if _SIMPLE_SYMBOL.match(name):
        return name
    if "|" in name or "\\" in name:
        raise InternalError(f"symbol {name!r} cannot be quoted in SMT-LIB")
    return f"|{name}|"


def _numeral(value: Fraction) -> str:
    if value < 0:
        return f"(- {_numeral(-value)})"
    if value.denominator == 1:
        return str(value.numerator)
    return f"(/ {value.numerator} {value.denominator})"


def _term(term: SmtTerm, declared: frozenset) -> str:
    if isinstance(term, NumConst):
        return _numeral(term.value)
    if isinstance(term, SymConst):
        if term.name not in declared:
            raise InternalError(f"formula references undeclared symbol {term.name!r}")
        return _sym(term.name)
    if isinstance(term, Var):
        return _sym(term.name)
    if isinstance(term, Add):
        return f"(+ {_term(term.left, declared)} {_term(term.right, declared)})"
    if isinstance(term, Sub):
        return f"(- {_term(term.left, declared)} {_term(term.right, declared)})"
    if isinstance(term, Ite):
        return (
            f"(ite {_formula(term.cond, declared)} "
            f"{_term(term.then, declared)} {_term(term.other, declared)})"
        )
    raise InternalError(f"unknown term {term!r}")


_CMP_OPS = {"<": "<", "<=": "<=", ">=": ">=", ">": ">", "=": "=", "!=": "distinct"}


def _formula(formula: SmtFormula, declared: frozenset) -> str:
    if isinstance(formula, Cmp):
        return (
            f"({_CMP_OPS[formula.op]} {_term(formula.left, declared)} "
            f"{_term(formula.right, declared)})"
        )
    if isinstance(formula, And):
        if not formula.parts:
            return "true"
        if len(formula.parts) == 1:
            return _formula(formula.parts[0], declared)
        return "(and " + " ".join(_formula(p, declared) for p in formula.parts) + ")"
    if isinstance(formula, Or):
        if not formula.parts:
            return "false"
        if len(formula.parts) == 1:
            return _formula(formula.parts[0], declared)
        return "(or " + " ".join(_formula(p, declared) for p in formula.parts) + ")"
    if isinstance(formula, Implies):
        return (
            f"(=> {_formula(formula.antecedent, declared)} "
            f"{_formula(formula.consequent, declared)})"
        )
    if isinstance(formula, Iff):
        return f"(= {_formula(formula.left, declared)} {_formula(formula.right, declared)})"
    if isinstance(formula, Forall):
        binders = " ".join(f"({_sym(v)} Real)" for v in formula.variables)
        return f"(forall ({binders}) {_formula(formula.body, declared)})"
    raise InternalError(f"unknown formula {formula!r}")


def emit(theory: Theory, logic: Optional[str] = None) -> str:
    """Serialize a theory to a complete SMT-LIB2 script.

    The logic is ``LRA`` when any formula is quantified and ``QF_LRA``
    otherwise, unless overridden.  Output is deterministic.
    """
    if logic is None:
        logic = "LRA" if any(isinstance(f, Forall) for f in theory.formulas) else "QF_LRA"
    declared = frozenset(theory.constants)
    lines = [f"(set-logic {logic})"]
    for constant in theory.constants:
        lines.append(f"(declare-const {_sym(constant)} Real)")
    for formula in theory.formulas:
        lines.append(f"(assert {_formula(formula, declared)})")
    lines.append("(check-sat)")
    if theory.constants:
        names = " ".join(_sym(c) for c in theory.constants)
        lines.append(f"(get-value ({names}))")
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------ output parse


def _tokenize(text: str) -> list[str]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
        elif ch in "()":
            tokens.append(ch)
            i += 1
        elif ch == ";":
            while i < n and text[i] != "\n":
                i += 1
        elif ch == "|":
            j = text.find("|", i + 1)
            if j == -1:
                raise SolverError("unterminated quoted symbol in solver output")
            tokens.append(text[i : j + 1])
            i = j + 1
        elif ch == '"':
            j = i + 1
            while j < n:
                if text[j] == '"':
                    if j + 1 < n and text[j + 1] == '"':
                        j += 2
                        continue
                    break
                j += 1
            if j >= n:
                raise SolverError("unterminated string in solver output")
            tokens.append(text[i : j + 1])
            i = j + 1
        else:
            j = i
            while j < n and not text[j].isspace() and text[j] not in "();":
                j += 1
            tokens.append(text[i:j])
            i = j
    return tokens


def _read_sexprs(tokens: list[str]) -> list[object]:
    exprs: list[object] = []
    stack: list[list] = []
    for token in tokens:
        if token == "(":
            stack.append([])
        elif token == ")":
            if not stack:
                raise SolverError("unbalanced parenthesis in solver output")
            done = stack.pop()
            if stack:
                stack[-1].append(done)
            else:
                exprs.append(done)
        elif stack:
            stack[-1].append(token)
        else:
            exprs.append(token)
    if stack:
        raise SolverError("unbalanced parenthesis in solver output")
    return exprs


def _unquote(symbol: str) -> str:
    if symbol.startswith("|") and symbol.endswith("|"):
        return symbol[1:-1]
    return symbol


def _parse_output(text: str) -> RawResult:
    """Split solver stdout into a status and value bindings."""
    stripped = text.strip()
    if not stripped:
        return RawResult("crash", transcript="solver produced no output")
    first, _, rest = stripped.partition("\n")
    status = first.strip()
    if status not in ("sat", "unsat", "unknown"):
        return RawResult("crash", transcript=text)
    if status != "sat":
        # Anything after the status line (e.g. an error from get-value on
        # an unsat script) carries no information.
        return RawResult(status)
    bindings: dict[str, object] = {}
    try:
        exprs = _read_sexprs(_tokenize(rest))
    except SolverError:
        return RawResult("crash", transcript=text)
    found_binding_list = False
    for expr in exprs:
        if isinstance(expr, list) and expr and all(
            isinstance(pair, list) and len(pair) == 2 and isinstance(pair[0], str)
            for pair in expr
        ):
            found_binding_list = True
            for name, value in expr:
                bindings[_unquote(name)] = value
    if rest.strip() and not found_binding_list:
        return RawResult("crash", transcript=text)
    return RawResult("sat", bindings)


# ------------------------------------------------------------- subprocess


def _one_shot(script: str, cfg: SolverConfig) -> RawResult:
    argv = shlex.split(cfg.command)
    try:
        completed = subprocess.run(
            argv,
            input=script.encode(),
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            timeout=cfg.timeout,
        )
    except FileNotFoundError as err:
        raise SolverError(f"cannot run solver command {cfg.command!r}: {err}") from err
    except subprocess.TimeoutExpired:
        return RawResult("timeout")
    result = _parse_output(completed.stdout.decode(errors="replace"))
    if result.status == "crash":
        stderr = completed.stderr.decode(errors="replace").strip()
        transcript = result.transcript
        if stderr:
            transcript = f"{transcript}\n[stderr] {stderr}".strip()
        return RawResult("crash", transcript=transcript)
    return result


class _PoolTimeout(Exception):
    pass


class _PooledSolver:
    """One persistent server process speaking the length-framed protocol."""

    def __init__(self, command: str) -> None:
        argv = shlex.split(command)
        try:
            self.proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                bufsize=0,
            )
        except FileNotFoundError as err:
            raise SolverError(f"cannot run solver command {command!r}: {err}") from err
        self.lock = threading.Lock()
        self._buffer = b""
        self.stderr_tail: collections.deque = collections.deque(maxlen=50)
        threading.Thread(target=self._drain_stderr, daemon=True).start()
        # The first boot loads the solver engine; allow it generous time.
        line = self._read_line(time.monotonic() + 120.0)
        if line.strip() != b"READY":
            self.close()
            raise SolverError(
                f"pooled solver did not hand-shake: {line!r} "
                f"{' '.join(self.stderr_tail)}"
            )

    def _drain_stderr(self) -> None:
        stream = self.proc.stderr
        for raw in iter(stream.readline, b""):
            self.stderr_tail.append(raw.decode(errors="replace").rstrip())

    def _fill(self, deadline: float) -> None:
        remaining = deadline - time.monotonic()
        if remaining <= 0:
            raise _PoolTimeout
        fd = self.proc.stdout.fileno()
        ready, _, _ = select.select([fd], [], [], remaining)
        if not ready:
            raise _PoolTimeout
        chunk = os.read(fd, 65536)
        if not chunk:
            raise SolverError(
                "pooled solver exited unexpectedly: " + " ".join(self.stderr_tail)
            )
        self._buffer += chunk

    def _read_line(self, deadline: float) -> bytes:
        while b"\n" not in self._buffer:
            self._fill(deadline)
        line, self._buffer = self._buffer.split(b"\n", 1)
        return line

    def _read_exact(self, count: int, deadline: float) -> bytes:
        while len(self._buffer) < count:
            self._fill(deadline)
        chunk, self._buffer = self._buffer[:count], self._buffer[count:]
        return chunk

    def query(self, script: str, timeout: float) -> str:
        payload = script.encode()
        deadline = time.monotonic() + timeout
        frame = memoryview(b"Q %d\n" % len(payload) + payload)
        try:
            # The unbuffered pipe may accept only part of a large frame
            # per write; pushing the remainder keeps the framing intact.
            while frame:
                written = self.proc.stdin.write(frame)
                if not written:
                    raise OSError("solver stdin accepted no bytes")
                frame = frame[written:]
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as err:
            raise SolverError(
                f"pooled solver pipe broke: {err}; " + " ".join(self.stderr_tail)
            ) from err
        header = self._read_line(deadline)
        match = re.match(rb"R (\d+)\Z", header.strip())
        if not match:
            raise SolverError(f"bad response header from pooled solver: {header!r}")
        return self._read_exact(int(match.group(1)), deadline).decode(errors="replace")

    def close(self) -> None:
        if self.proc.poll() is None:
            self.proc.kill()
        try:
            self.proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            pass


_POOLS: dict[str, _PooledSolver] = {}
_POOLS_LOCK = threading.Lock()


def _drop_pool(command: str, pool: _PooledSolver) -> None:
    pool.close()
    with _POOLS_LOCK:
        if _POOLS.get(command) is pool:
            del _POOLS[command]


def shutdown_pools() -> None:
    """Kill all pooled solver processes (also runs at interpreter exit)."""
    with _POOLS_LOCK:
        pools = list(_POOLS.values())
        _POOLS.clear()
    for pool in pools:
        pool.close()


atexit.register(shutdown_pools)


def _pooled_once(script: str, cfg: SolverConfig) -> RawResult:
    with _POOLS_LOCK:
        pool = _POOLS.get(cfg.command)
    if pool is None:
        pool = _PooledSolver(cfg.command)
        with _POOLS_LOCK:
            existing = _POOLS.setdefault(cfg.command, pool)
        if existing is not pool:
            pool.close()
            pool = existing
    with pool.lock:
        try:
            output = pool.query(script, cfg.timeout)
        except _PoolTimeout:
            _drop_pool(cfg.command, pool)
            return RawResult("timeout")
        except SolverError:
            _drop_pool(cfg.command, pool)
            raise
    result = _parse_output(output)
    if result.status == "crash":
        # A process that produced unparseable output cannot be trusted
        # with further queries.
        _drop_pool(cfg.command, pool)
    return result


def _pooled(script: str, cfg: SolverConfig) -> RawResult:
    # A long-lived engine process can garble one query after thousands of
    # good ones; retry once on a fresh process.  Genuine crashes (scripts
    # the solver always rejects) reproduce on the retry and still surface.
    try:
        result = _pooled_once(script, cfg)
    except SolverError:
        return _pooled_once(script, cfg)
    if result.status == "crash":
        return _pooled_once(script, cfg)
    return result


def solve(script: str, cfg: SolverConfig) -> RawResult:
    """Run one script against the configured solver.

    Commands containing ``--server`` use a persistent pooled process; all
    others get a fresh subprocess per query.  A wall-clock timeout kills
    the process and yields status ``timeout``.  A pooled query that dies
    or returns unparseable output is retried once on a fresh process.
    """
    if "--server" in shlex.split(cfg.command):
        return _pooled(script, cfg)
    return _one_shot(script, cfg)


# ------------------------------------------------------------ model values


def _fraction_of(value: object) -> Fraction:
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as err:
            raise SolverError(f"cannot parse solver value {value!r}") from err
    if isinstance(value, list) and value:
        head = value[0]
        if head == "/" and len(value) == 3:
            return _fraction_of(value[1]) / _fraction_of(value[2])
        if head == "-" and len(value) == 2:
            return -_fraction_of(value[1])
        if head == "to_real" and len(value) == 2:
            return _fraction_of(value[1])
    raise SolverError(f"cannot parse solver value {value!r}")


def parse_model(bindings: dict[str, object], atoms: tuple[Atom, ...]) -> Interpretation:
    """Exact rational values for *atoms*; absent atoms default to 0.

    A value outside [0, 1] means the solver contradicted the theory's own
    bounds and is reported as an internal inconsistency, never clamped.
    """
    values = {}
    for atom in atoms:
        raw = bindings.get(atom.name)
        value = Fraction(0) if raw is None else _fraction_of(raw)
        if not 0 <= value <= 1:
            raise SolverInconsistencyError(
                f"solver assigned {atom.name} = {value}, outside [0, 1]"
            )
        values[atom] = value
    return Interpretation(values)


# -------------------------------------------------------- pipeline driving


def solve_pipeline(
    pipeline: Pipeline, cfg: SolverConfig, include_aux: bool = False
) -> SolveOutcome:
    """Emit, solve, and read the model back over the original atoms.

    A crispified atom's reported value is its surrogate's (the raw theory
    constant holds the pre-crispification support).  With *include_aux*
    the fresh atoms introduced by rewriting are reported as well.
    """
    script = emit(pipeline.theory, logic=cfg.logic)
    raw = solve(script, cfg)
    if raw.status == "unsat":
        return Incoherent()
    if raw.status == "unknown":
        return Unknown("solver returned unknown")
    if raw.status == "timeout":
        return Unknown(f"solver timeout after {cfg.timeout}s")
    if raw.status == "crash":
        raise SolverError(f"solver failed:\n{raw.transcript}")

    wanted = list(pipeline.original_atoms)
    for surrogate in pipeline.bool_atoms.values():
        if surrogate not in wanted:
            wanted.append(surrogate)
    if include_aux:
        for atom in pipeline.fresh_atoms:
            if atom not in wanted:
                wanted.append(atom)
    values = parse_model(raw.bindings, tuple(wanted))

    reported = {}
    for atom in pipeline.original_atoms:
        surrogate = pipeline.bool_atoms.get(atom)
        reported[atom] = values[surrogate] if surrogate is not None else values[atom]
    if include_aux:
        for atom in pipeline.fresh_atoms:
            reported[atom] = values[atom]
    return Stable(Interpretation(reported))
