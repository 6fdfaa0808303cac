"""Numeric inner-loop kernels, in numba and pure-numpy flavors.

Expression fields compile to a postfix opcode program (see expr.py);
`eval_program` runs that program over point arrays. `bilinear` samples
a uniform grid with bilinear interpolation. `unwrap_delta` accumulates
nearest-branch angle increments around a closed loop.

The dispatching wrappers at the bottom honor backend.ACTIVE.
"""

import numpy as np

from . import backend

# Opcodes. Binary ops pop two, unary pop one, leaves push one.
OP_CONST = 0
OP_U = 1
OP_V = 2
OP_ADD = 3
OP_SUB = 4
OP_MUL = 5
OP_DIV = 6
OP_NEG = 7
OP_POW = 8
OP_SIN = 9
OP_COS = 10
OP_TAN = 11
OP_EXP = 12
OP_LOG = 13
OP_SQRT = 14
OP_ABS = 15
OP_ATAN2 = 16

_UNARY = (OP_NEG, OP_SIN, OP_COS, OP_TAN, OP_EXP, OP_LOG, OP_SQRT, OP_ABS)
_BINARY = (OP_ADD, OP_SUB, OP_MUL, OP_DIV, OP_POW, OP_ATAN2)


def eval_program_numpy(code, args, consts, us, vs, max_stack):
    """Vectorized stack machine: one numpy array per stack slot."""
    stack = [None] * int(max_stack)
    sp = 0
    with np.errstate(all="ignore"):
        for k in range(code.shape[0]):
            op = code[k]
            if op == OP_CONST:
                stack[sp] = np.full_like(us, consts[args[k]])
                sp += 1
            elif op == OP_U:
                stack[sp] = us.copy()
                sp += 1
            elif op == OP_V:
                stack[sp] = vs.copy()
                sp += 1
            elif op == OP_ADD:
                sp -= 1
                stack[sp - 1] = stack[sp - 1] + stack[sp]
            elif op == OP_SUB:
                sp -= 1
                stack[sp - 1] = stack[sp - 1] - stack[sp]
            elif op == OP_MUL:
                sp -= 1
                stack[sp - 1] = stack[sp - 1] * stack[sp]
            elif op == OP_DIV:
                sp -= 1
                stack[sp - 1] = stack[sp - 1] / stack[sp]
            elif op == OP_POW:
                sp -= 1
                stack[sp - 1] = stack[sp - 1] ** stack[sp]
            elif op == OP_ATAN2:
                sp -= 1
                stack[sp - 1] = np.arctan2(stack[sp - 1], stack[sp])
            elif op == OP_NEG:
                stack[sp - 1] = -stack[sp - 1]
            elif op == OP_SIN:
                stack[sp - 1] = np.sin(stack[sp - 1])
            elif op == OP_COS:
                stack[sp - 1] = np.cos(stack[sp - 1])
            elif op == OP_TAN:
                stack[sp - 1] = np.tan(stack[sp - 1])
            elif op == OP_EXP:
                stack[sp - 1] = np.exp(stack[sp - 1])
            elif op == OP_LOG:
                stack[sp - 1] = np.log(stack[sp - 1])
            elif op == OP_SQRT:
                stack[sp - 1] = np.sqrt(stack[sp - 1])
            elif op == OP_ABS:
                stack[sp - 1] = np.abs(stack[sp - 1])
    return stack[0]


def bilinear_numpy(values, u0, u1, v0, v1, us, vs):
    nu, nv = values.shape
    fu = np.clip((us - u0) / (u1 - u0) * (nu - 1), 0.0, nu - 1.0)
    fv = np.clip((vs - v0) / (v1 - v0) * (nv - 1), 0.0, nv - 1.0)
    iu = np.minimum(fu.astype(np.int64), nu - 2)
    iv = np.minimum(fv.astype(np.int64), nv - 2)
    tu = fu - iu
    tv = fv - iv
    f00 = values[iu, iv]
    f10 = values[iu + 1, iv]
    f01 = values[iu, iv + 1]
    f11 = values[iu + 1, iv + 1]
    return (
        f00 * (1 - tu) * (1 - tv)
        + f10 * tu * (1 - tv)
        + f01 * (1 - tu) * tv
        + f11 * tu * tv
    )


def unwrap_delta_numpy(samples, period):
    """Total variation around a closed loop plus the largest wrapped gap.

    The closing step (last sample back to the first) is included, so for
    a genuinely closed loop the total is a multiple of the period.
    """
    diffs = np.empty_like(samples)
    diffs[:-1] = samples[1:] - samples[:-1]
    diffs[-1] = samples[0] - samples[-1]
    wrapped = diffs - period * np.round(diffs / period)
    return float(wrapped.sum()), float(np.max(np.abs(wrapped)))


if backend.HAS_NUMBA:
    from numba import njit

    @njit(cache=True, error_model="numpy")
    def eval_program_numba(code, args, consts, us, vs, max_stack):  # pragma: no cover
        n = us.shape[0]
        out = np.empty(n, dtype=np.float64)
        stack = np.empty(max_stack, dtype=np.float64)
        for i in range(n):
            sp = 0
            for k in range(code.shape[0]):
                op = code[k]
                if op == OP_CONST:
                    stack[sp] = consts[args[k]]
                    sp += 1
                elif op == OP_U:
                    stack[sp] = us[i]
                    sp += 1
                elif op == OP_V:
                    stack[sp] = vs[i]
                    sp += 1
                elif op == OP_ADD:
                    sp -= 1
                    stack[sp - 1] = stack[sp - 1] + stack[sp]
                elif op == OP_SUB:
                    sp -= 1
                    stack[sp - 1] = stack[sp - 1] - stack[sp]
                elif op == OP_MUL:
                    sp -= 1
                    stack[sp - 1] = stack[sp - 1] * stack[sp]
                elif op == OP_DIV:
                    sp -= 1
                    stack[sp - 1] = stack[sp - 1] / stack[sp]
                elif op == OP_POW:
                    sp -= 1
                    stack[sp - 1] = stack[sp - 1] ** stack[sp]
                elif op == OP_ATAN2:
                    sp -= 1
                    stack[sp - 1] = np.arctan2(stack[sp - 1], stack[sp])
                elif op == OP_NEG:
                    stack[sp - 1] = -stack[sp - 1]
                elif op == OP_SIN:
                    stack[sp - 1] = np.sin(stack[sp - 1])
                elif op == OP_COS:
                    stack[sp - 1] = np.cos(stack[sp - 1])
                elif op == OP_TAN:
                    stack[sp - 1] = np.tan(stack[sp - 1])
                elif op == OP_EXP:
                    stack[sp - 1] = np.exp(stack[sp - 1])
                elif op == OP_LOG:
                    stack[sp - 1] = np.log(stack[sp - 1])
                elif op == OP_SQRT:
                    stack[sp - 1] = np.sqrt(stack[sp - 1])
                elif op == OP_ABS:
                    stack[sp - 1] = np.abs(stack[sp - 1])
            out[i] = stack[0]
        return out

    @njit(cache=True, error_model="numpy")
    def bilinear_numba(values, u0, u1, v0, v1, us, vs):  # pragma: no cover
        nu, nv = values.shape
        n = us.shape[0]
        out = np.empty(n, dtype=np.float64)
        for i in range(n):
            fu = (us[i] - u0) / (u1 - u0) * (nu - 1)
            fv = (vs[i] - v0) / (v1 - v0) * (nv - 1)
            if fu < 0.0:
                fu = 0.0
            if fu > nu - 1.0:
                fu = nu - 1.0
            if fv < 0.0:
                fv = 0.0
            if fv > nv - 1.0:
                fv = nv - 1.0
            iu = int(fu)
            iv = int(fv)
            if iu > nu - 2:
                iu = nu - 2
            if iv > nv - 2:
                iv = nv - 2
            tu = fu - iu
            tv = fv - iv
            out[i] = (
                values[iu, iv] * (1 - tu) * (1 - tv)
                + values[iu + 1, iv] * tu * (1 - tv)
                + values[iu, iv + 1] * (1 - tu) * tv
                + values[iu + 1, iv + 1] * tu * tv
            )
        return out

    @njit(cache=True, error_model="numpy")
    def unwrap_delta_numba(samples, period):  # pragma: no cover
        n = samples.shape[0]
        total = 0.0
        max_gap = 0.0
        for i in range(n):
            nxt = samples[(i + 1) % n]
            d = nxt - samples[i]
            d = d - period * np.round(d / period)
            total += d
            if abs(d) > max_gap:
                max_gap = abs(d)
        return total, max_gap

else:  # pragma: no cover - exercised only without numba
    eval_program_numba = None
    bilinear_numba = None
    unwrap_delta_numba = None


def eval_program(code, args, consts, us, vs, max_stack):
    if backend.ACTIVE == "numba":
        return eval_program_numba(code, args, consts, us, vs, max_stack)
    return eval_program_numpy(code, args, consts, us, vs, max_stack)


def bilinear(values, u0, u1, v0, v1, us, vs):
    if backend.ACTIVE == "numba":
        return bilinear_numba(values, u0, u1, v0, v1, us, vs)
    return bilinear_numpy(values, u0, u1, v0, v1, us, vs)


def unwrap_delta(samples, period):
    if backend.ACTIVE == "numba":
        return unwrap_delta_numba(samples, float(period))
    return unwrap_delta_numpy(samples, float(period))


def warmup():
    """Trigger JIT compilation of every kernel on tiny inputs."""
    code = np.array([OP_U, OP_V, OP_ADD], dtype=np.int64)
    args = np.array([-1, -1, -1], dtype=np.int64)
    consts = np.zeros(1, dtype=np.float64)
    pts = np.array([0.5], dtype=np.float64)
    eval_program(code, args, consts, pts, pts, 2)
    bilinear(np.zeros((2, 2)), 0.0, 1.0, 0.0, 1.0, pts, pts)
    unwrap_delta(np.array([0.0, 1.0, 2.0]), 2 * np.pi)
