# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled grid enumeration kernel.

Instruction-for-instruction mirror of ``_gridpy``; see gridkernel for
the spec tuple layout and opcode semantics.  All degree arithmetic is
on C ints scaled by the common denominator.
"""

import array as _array


cdef int _eval(int[::1] ops, int start, int end,
               int[::1] jvec, int[::1] ivec, int[::1] stack, int d):
    cdef int sp = 0
    cdef int i = start
    cdef int op, arg, v
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


cdef void _extend(int[::1] fresh, int n_fresh_ints, int[::1] ops,
                  int[::1] jvec, int[::1] ivec, int[::1] stack, int d):
    cdef int pos = 0
    cdef int idx, crisp, count, b, best, value
    while pos < n_fresh_ints:
        idx = fresh[pos]
        crisp = fresh[pos + 1]
        count = fresh[pos + 2]
        pos += 3
        best = 0
        for b in range(count):
            value = _eval(ops, fresh[pos], fresh[pos + 1], jvec, ivec, stack, d)
            if value > best:
                best = value
            pos += 2
        if crisp:
            best = d if best > 0 else 0
        jvec[idx] = best


cdef bint _is_model(int n_rules, int[::1] ops, int[::1] blocks,
                    int[::1] vec, int[::1] stack, int d):
    cdef int r, base, head, body
    for r in range(n_rules):
        base = 4 * r
        head = _eval(ops, blocks[base], blocks[base + 1], vec, vec, stack, d)
        body = _eval(ops, blocks[base + 2], blocks[base + 3], vec, vec, stack, d)
        if head < body:
            return False
    return True


cdef bint _lfp_equals(int n, int n_rules, int[::1] ops, int[::1] blocks,
                      int[::1] head_atom, int[::1] ivec, int[::1] jvec,
                      int[::1] stack, int d):
    cdef int i, r, base, target, body
    cdef bint changed = True
    for i in range(n):
        jvec[i] = 0
    while changed:
        changed = False
        for r in range(n_rules):
            target = head_atom[r]
            if target < 0:
                continue
            base = 4 * r
            body = _eval(ops, blocks[base + 2], blocks[base + 3],
                         jvec, ivec, stack, d)
            if body > jvec[target]:
                jvec[target] = body
                changed = True
    for i in range(n):
        if jvec[i] != ivec[i]:
            return False
    return True


cdef bint _satisfies_reduct(int n_rules, int[::1] ops, int[::1] blocks,
                            int[::1] jvec, int[::1] ivec, int[::1] stack, int d):
    cdef int r, base, head, body
    for r in range(n_rules):
        base = 4 * r
        head = _eval(ops, blocks[base], blocks[base + 1], jvec, ivec, stack, d)
        body = _eval(ops, blocks[base + 2], blocks[base + 3], jvec, ivec, stack, d)
        if head < body:
            return False
    return True


cdef bint _has_smaller_reduct_model(int n, int n_enum, int n_rules,
                                    int[::1] ops, int[::1] blocks,
                                    int[::1] fresh, int n_fresh_ints,
                                    int[::1] ivec, int[::1] jvec,
                                    int[::1] stack, int d, int step):
    cdef int i, pos
    cdef bint equal
    for i in range(n):
        jvec[i] = 0
    while True:
        equal = True
        for i in range(n_enum):
            if jvec[i] != ivec[i]:
                equal = False
                break
        if not equal:
            _extend(fresh, n_fresh_ints, ops, jvec, ivec, stack, d)
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
    n = spec[0]
    n_enum = spec[1]
    d_py = spec[2]
    step_py = spec[3]
    # Zero-length buffers are replaced by one-int dummies; the loops
    # never index into them in that case.
    ops_obj = spec[4] if len(spec[4]) else _array.array("i", [0])
    blocks_obj = spec[5] if len(spec[5]) else _array.array("i", [0])
    head_obj = spec[6] if len(spec[6]) else _array.array("i", [0])
    n_rules_py = spec[7]
    fresh_obj = spec[8] if len(spec[8]) else _array.array("i", [0])
    max_stack = spec[9]

    cdef int[::1] ops = ops_obj
    cdef int[::1] blocks = blocks_obj
    cdef int[::1] head_atom = head_obj
    cdef int[::1] fresh = fresh_obj
    cdef int n_fresh_ints = len(spec[8])
    cdef int d = d_py
    cdef int step = step_py
    cdef int n_atoms = n
    cdef int enum_count = n_enum
    cdef int n_rules = n_rules_py

    ivec_obj = _array.array("i", [0] * (n_atoms + 1))
    jvec_obj = _array.array("i", [0] * (n_atoms + 1))
    stack_obj = _array.array("i", [0] * (max_stack + 1))
    cdef int[::1] ivec = ivec_obj
    cdef int[::1] jvec = jvec_obj
    cdef int[::1] stack = stack_obj

    cdef bint atomic = True
    cdef int r, pos
    for r in range(n_rules):
        if head_atom[r] == -1:
            atomic = False
            break

    cdef bint stable
    results = []
    while True:
        _extend(fresh, n_fresh_ints, ops, ivec, ivec, stack, d)
        if _is_model(n_rules, ops, blocks, ivec, stack, d):
            if atomic:
                stable = _lfp_equals(n_atoms, n_rules, ops, blocks, head_atom,
                                     ivec, jvec, stack, d)
            else:
                stable = not _has_smaller_reduct_model(
                    n_atoms, enum_count, n_rules, ops, blocks,
                    fresh, n_fresh_ints, ivec, jvec, stack, d, step)
            if stable:
                results.append(ivec_obj.tolist()[:n_atoms])
        pos = 0
        while pos < enum_count:
            if ivec[pos] + step <= d:
                ivec[pos] += step
                break
            ivec[pos] = 0
            pos += 1
        if pos == enum_count:
            return results
