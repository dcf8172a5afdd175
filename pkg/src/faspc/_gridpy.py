"""Pure-Python grid enumeration kernel.

Mirrors the compiled kernel in ``_gridcy.pyx`` instruction for
instruction; see gridkernel for the compilation scheme and the meaning
of the spec tuple.  Degrees are integers scaled by the common
denominator D; opcode blocks are flat (op, arg) pairs evaluated on a
small stack, reading candidate values (jvec) outside negation and
reference values (ivec) inside it.
"""

from __future__ import annotations


def _eval(ops, start, end, jvec, ivec, stack, d):
    sp = 0
    i = start
    while i < end:
        op = ops[i]
        arg = ops[i + 1]
        if op == 0:  # LOADJ
            stack[sp] = jvec[arg]
            sp += 1
        elif op == 1:  # LOADI
            stack[sp] = ivec[arg]
            sp += 1
        elif op == 2:  # PUSH
            stack[sp] = arg
            sp += 1
        elif op == 3:  # NEG
            stack[sp - 1] = d - stack[sp - 1]
        elif op == 4:  # TNORM
            sp -= 1
            v = stack[sp - 1] + stack[sp] - d
            stack[sp - 1] = v if v > 0 else 0
        elif op == 5:  # TCONORM
            sp -= 1
            v = stack[sp - 1] + stack[sp]
            stack[sp - 1] = v if v < d else d
        elif op == 6:  # MAX
            sp -= 1
            if stack[sp] > stack[sp - 1]:
                stack[sp - 1] = stack[sp]
        else:  # MIN
            sp -= 1
            if stack[sp] < stack[sp - 1]:
                stack[sp - 1] = stack[sp]
        i += 2
    return stack[0]


def _parse_fresh(fresh_table):
    fresh = []
    pos = 0
    while pos < len(fresh_table):
        idx = fresh_table[pos]
        crisp = fresh_table[pos + 1]
        count = fresh_table[pos + 2]
        pos += 3
        bodies = []
        for _ in range(count):
            bodies.append((fresh_table[pos], fresh_table[pos + 1]))
            pos += 2
        fresh.append((idx, crisp, bodies))
    return fresh


def _extend(fresh, ops, jvec, ivec, stack, d):
    """Fill forced coordinates of jvec from its own enumerated part;
    negated subexpressions read ivec (so with jvec is ivec this is the
    plain extension, otherwise the reduct-at-ivec extension)."""
    for idx, crisp, bodies in fresh:
        best = 0
        for start, end in bodies:
            value = _eval(ops, start, end, jvec, ivec, stack, d)
            if value > best:
                best = value
        if crisp:
            best = d if best > 0 else 0
        jvec[idx] = best


def _is_model(n_rules, ops, blocks, vec, stack, d):
    for r in range(n_rules):
        base = 4 * r
        head = _eval(ops, blocks[base], blocks[base + 1], vec, vec, stack, d)
        body = _eval(ops, blocks[base + 2], blocks[base + 3], vec, vec, stack, d)
        if head < body:
            return False
    return True


def _lfp_equals(n, n_rules, ops, blocks, head_atom, ivec, jvec, stack, d):
    """Least fixpoint of the reduct's consequence operator (chaotic
    ascending iteration), compared against ivec."""
    for i in range(n):
        jvec[i] = 0
    changed = True
    while changed:
        changed = False
        for r in range(n_rules):
            target = head_atom[r]
            if target < 0:
                continue
            base = 4 * r
            body = _eval(ops, blocks[base + 2], blocks[base + 3], jvec, ivec, stack, d)
            if body > jvec[target]:
                jvec[target] = body
                changed = True
    for i in range(n):
        if jvec[i] != ivec[i]:
            return False
    return True


def _satisfies_reduct(n_rules, ops, blocks, jvec, ivec, stack, d):
    for r in range(n_rules):
        base = 4 * r
        head = _eval(ops, blocks[base], blocks[base + 1], jvec, ivec, stack, d)
        body = _eval(ops, blocks[base + 2], blocks[base + 3], jvec, ivec, stack, d)
        if head < body:
            return False
    return True


def _has_smaller_reduct_model(
    n_enum, n_rules, ops, blocks, fresh, ivec, jvec, stack, d, step
):
    """Search the grid below ivec (small to large) for a strictly
    smaller model of the reduct; forced coordinates follow their
    defining bodies."""
    for i in range(len(jvec)):
        jvec[i] = 0
    while True:
        equal = True
        for i in range(n_enum):
            if jvec[i] != ivec[i]:
                equal = False
                break
        if not equal:
            _extend(fresh, ops, jvec, ivec, stack, d)
            if _satisfies_reduct(n_rules, ops, blocks, jvec, ivec, stack, d):
                return True
        pos = 0
        while pos < n_enum:
            if jvec[pos] + step <= ivec[pos]:
                jvec[pos] += step
                break
            jvec[pos] = 0
            pos += 1
        if pos == n_enum:
            return False


def stable_vectors(spec):
    """All stable candidate vectors for a compiled grid program."""
    (
        n,
        n_enum,
        d,
        step,
        ops,
        blocks,
        head_atom,
        n_rules,
        fresh_table,
        max_stack,
    ) = spec
    fresh = _parse_fresh(fresh_table)
    atomic = True
    for r in range(n_rules):
        if head_atom[r] == -1:
            atomic = False
            break

    ivec = [0] * n
    jvec = [0] * n
    stack = [0] * (max_stack + 1)
    results = []
    while True:
        _extend(fresh, ops, ivec, ivec, stack, d)
        if _is_model(n_rules, ops, blocks, ivec, stack, d):
            if atomic:
                stable = _lfp_equals(
                    n, n_rules, ops, blocks, head_atom, ivec, jvec, stack, d
                )
            else:
                stable = not _has_smaller_reduct_model(
                    n_enum, n_rules, ops, blocks, fresh, ivec, jvec, stack, d, step
                )
            if stable:
                results.append(list(ivec))
        pos = 0
        while pos < n_enum:
            if ivec[pos] + step <= d:
                ivec[pos] += step
                break
            ivec[pos] = 0
            pos += 1
        if pos == n_enum:
            return results
