"""JIT-compiled scalar kernels for the per-subcarrier optimizers.

The per-subcarrier problem maximizes

    L(p, q) = R(p, q) + c_p * p + c_q * q      over [0, pbar] x [0, qbar],

where R is the secrecy rate and the multiplier bundles are
c_p = -lam + beta*h_j + mu*h_e and c_q = -beta + mu*g_e. On the
positive-secrecy branch (q >= A) the partial derivatives are denoted f1 (in p)
and f2 (in q); f1 is strictly decreasing in p and non-decreasing in q, f2 is
non-increasing in q, which makes every one-dimensional root a bisection.

Everything here is plain float64 math (no fastmath), so results are
bit-reproducible across runs and processes.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

LN2 = 0.6931471805599453
INVPHI = 0.6180339887498949  # (sqrt(5) - 1) / 2

BISECT_MAXIT = 200
SCAN_POINTS = 256
GOLDEN_ITERS = 48

# Case codes for the positive-branch dispatch (labels live in subproblem.py).
CASE_I = 0
CASE_II_I = 1
CASE_II_II = 2
CASE_II_III_R1 = 3
CASE_II_III_R2 = 4
CASE_III_I_R1 = 5
CASE_III_I_R2 = 6
CASE_III_II_R1 = 7
CASE_III_II_R2 = 8
CASE_III_II_R3 = 9
CASE_ZERO = 10
CASE_DEGENERATE = 11

BRANCH_POSITIVE = 0
BRANCH_ZERO = 1


@njit(cache=True)
def rate_diff(p, q, h_i, h_e, g_e, sig2):
    """IR rate minus ER rate in bits (unclipped)."""
    return (math.log1p(p * h_i / sig2) - math.log1p(p * h_e / (sig2 + q * g_e))) / LN2


@njit(cache=True)
def lagr_pos(p, q, h_i, h_e, g_e, sig2, c_p, c_q):
    """Per-subcarrier objective on the positive branch (valid for q >= A)."""
    return rate_diff(p, q, h_i, h_e, g_e, sig2) + c_p * p + c_q * q


@njit(cache=True)
def f1_val(p, q, h_i, h_e, g_e, sig2, c_p):
    return (
        h_i / (LN2 * (sig2 + p * h_i))
        - h_e / (LN2 * (sig2 + q * g_e + p * h_e))
        + c_p
    )


@njit(cache=True)
def f2_val(p, q, h_e, g_e, sig2, c_q):
    return (
        p * h_e * g_e / (LN2 * (sig2 + q * g_e + p * h_e) * (sig2 + q * g_e))
        + c_q
    )


@njit(cache=True)
def bisect_p_f1(q, h_i, h_e, g_e, sig2, c_p, pbar, tol):
    """Root of f1(., q) on [0, pbar]; f1 is decreasing in p.

    Clamps to 0 when f1(0, q) <= 0 and to pbar when f1(pbar, q) >= 0.
    """
    if f1_val(0.0, q, h_i, h_e, g_e, sig2, c_p) <= 0.0:
        return 0.0
    if f1_val(pbar, q, h_i, h_e, g_e, sig2, c_p) >= 0.0:
        return pbar
    a = 0.0
    b = pbar
    it = 0
    while it < BISECT_MAXIT and (b - a) > tol:
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        if f1_val(m, q, h_i, h_e, g_e, sig2, c_p) > 0.0:
            a = m
        else:
            b = m
        it += 1
    return 0.5 * (a + b)


@njit(cache=True)
def bisect_q_f1(p, lo, hi, h_i, h_e, g_e, sig2, c_p, tol):
    """Root of f1(p, .) on [lo, hi]; f1 is increasing in q.

    Returns lo when f1 > 0 throughout and hi when f1 < 0 throughout.
    """
    if f1_val(p, lo, h_i, h_e, g_e, sig2, c_p) >= 0.0:
        return lo
    if f1_val(p, hi, h_i, h_e, g_e, sig2, c_p) <= 0.0:
        return hi
    a = lo
    b = hi
    it = 0
    while it < BISECT_MAXIT and (b - a) > tol:
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        if f1_val(p, m, h_i, h_e, g_e, sig2, c_p) > 0.0:
            b = m
        else:
            a = m
        it += 1
    return 0.5 * (a + b)


@njit(cache=True)
def bisect_q_f2(p, lo, hi, h_e, g_e, sig2, c_q, tol):
    """Root of f2(p, .) on [lo, hi]; f2 is decreasing in q.

    Returns lo when f2 < 0 throughout (objective decreasing in q) and hi
    when f2 > 0 throughout; exact zeros resolve toward the lower endpoint,
    spending no more jamming power than the objective warrants.
    """
    if f2_val(p, lo, h_e, g_e, sig2, c_q) <= 0.0:
        return lo
    if f2_val(p, hi, h_e, g_e, sig2, c_q) >= 0.0:
        return hi
    a = lo
    b = hi
    it = 0
    while it < BISECT_MAXIT and (b - a) > tol:
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        if f2_val(p, m, h_e, g_e, sig2, c_q) > 0.0:
            a = m
        else:
            b = m
        it += 1
    return 0.5 * (a + b)


@njit(cache=True)
def joint_root(h_i, h_e, g_e, sig2, c_p, c_q, pbar, q_lo, q_hi, tol_p, tol_q):
    """Best simultaneous stationary/clamped point with q restricted to [q_lo, q_hi].

    For each candidate q the inner p is eliminated through the f1 bisection;
    the resulting profile L(p(q), q) is maximized by a uniform scan refined
    with golden-section around the best grid point. Returns (p, q, value).
    """
    if q_hi < q_lo:
        q_hi = q_lo
    best_q = q_lo
    best_p = bisect_p_f1(q_lo, h_i, h_e, g_e, sig2, c_p, pbar, tol_p)
    best_v = lagr_pos(best_p, best_q, h_i, h_e, g_e, sig2, c_p, c_q)
    if q_hi == q_lo:
        return best_p, best_q, best_v

    step = (q_hi - q_lo) / (SCAN_POINTS - 1.0)
    best_i = 0
    for i in range(1, SCAN_POINTS):
        qi = q_lo + step * i
        pi = bisect_p_f1(qi, h_i, h_e, g_e, sig2, c_p, pbar, tol_p)
        vi = lagr_pos(pi, qi, h_i, h_e, g_e, sig2, c_p, c_q)
        if vi > best_v:
            best_v = vi
            best_q = qi
            best_p = pi
            best_i = i

    a = q_lo + step * (best_i - 1) if best_i > 0 else q_lo
    b = q_lo + step * (best_i + 1) if best_i < SCAN_POINTS - 1 else q_hi
    c = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    pc = bisect_p_f1(c, h_i, h_e, g_e, sig2, c_p, pbar, tol_p)
    fc = lagr_pos(pc, c, h_i, h_e, g_e, sig2, c_p, c_q)
    pd = bisect_p_f1(d, h_i, h_e, g_e, sig2, c_p, pbar, tol_p)
    fd = lagr_pos(pd, d, h_i, h_e, g_e, sig2, c_p, c_q)
    if fc > best_v:
        best_v, best_q, best_p = fc, c, pc
    if fd > best_v:
        best_v, best_q, best_p = fd, d, pd
    for _ in range(GOLDEN_ITERS):
        if b - a <= tol_q:
            break
        if fc >= fd:
            b = d
            d = c
            fd = fc
            c = b - INVPHI * (b - a)
            pc = bisect_p_f1(c, h_i, h_e, g_e, sig2, c_p, pbar, tol_p)
            fc = lagr_pos(pc, c, h_i, h_e, g_e, sig2, c_p, c_q)
            if fc > best_v:
                best_v, best_q, best_p = fc, c, pc
        else:
            a = c
            c = d
            fc = fd
            d = a + INVPHI * (b - a)
            pd = bisect_p_f1(d, h_i, h_e, g_e, sig2, c_p, pbar, tol_p)
            fd = lagr_pos(pd, d, h_i, h_e, g_e, sig2, c_p, c_q)
            if fd > best_v:
                best_v, best_q, best_p = fd, d, pd
    return best_p, best_q, best_v


@njit(cache=True)
def solve_positive(h_i, h_e, g_e, sig2, c_p, c_q, pbar, qbar, a, tol_p, tol_q):
    """Maximize the positive branch over [0, pbar] x [a, qbar].

    Dispatches on the signs of f1 at the four corners of the branch box:
    f1 decreasing in p and increasing in q splits the search into the
    endpoint case (I), the interior/edge cases (II-i..iii) and the mixed
    cases (III-i/ii) with their region decompositions. Assumes a <= qbar
    and a non-degenerate subcarrier. Returns (p, q, value, case_code).
    """
    s_0a = f1_val(0.0, a, h_i, h_e, g_e, sig2, c_p)
    s_0q = f1_val(0.0, qbar, h_i, h_e, g_e, sig2, c_p)

    if s_0q <= 0.0:
        # Case I: f1 <= 0 on the whole box, so p = 0 and the objective is
        # linear in q with slope c_q; exact zero slope spends no power.
        p = 0.0
        q = a if c_q <= 0.0 else qbar
        return p, q, lagr_pos(p, q, h_i, h_e, g_e, sig2, c_p, c_q), CASE_I

    if s_0a >= 0.0:
        # Case II: f1(0, .) >= 0 everywhere.
        s_pa = f1_val(pbar, a, h_i, h_e, g_e, sig2, c_p)
        s_pq = f1_val(pbar, qbar, h_i, h_e, g_e, sig2, c_p)
        if s_pa >= 0.0:
            # II-i: f1 >= 0 on the whole box, p = pbar, q from f2.
            q = bisect_q_f2(pbar, a, qbar, h_e, g_e, sig2, c_q, tol_q)
            return pbar, q, lagr_pos(pbar, q, h_i, h_e, g_e, sig2, c_p, c_q), CASE_II_I
        if s_pq <= 0.0:
            # II-ii: interior stationary point in p for every q.
            p, q, v = joint_root(h_i, h_e, g_e, sig2, c_p, c_q, pbar, a, qbar, tol_p, tol_q)
            return p, q, v, CASE_II_II
        # II-iii: f1(pbar, .) changes sign at qc.
        qc = bisect_q_f1(pbar, a, qbar, h_i, h_e, g_e, sig2, c_p, tol_q)
        p1, q1, v1 = joint_root(h_i, h_e, g_e, sig2, c_p, c_q, pbar, a, qc, tol_p, tol_q)
        q2 = bisect_q_f2(pbar, qc, qbar, h_e, g_e, sig2, c_q, tol_q)
        v2 = lagr_pos(pbar, q2, h_i, h_e, g_e, sig2, c_p, c_q)
        if v1 >= v2:
            return p1, q1, v1, CASE_II_III_R1
        return pbar, q2, v2, CASE_II_III_R2

    # Case III: f1(0, a) < 0 < f1(0, qbar); f1(0, .) changes sign at qc0.
    qc0 = bisect_q_f1(0.0, a, qbar, h_i, h_e, g_e, sig2, c_p, tol_q)
    q1 = a if c_q <= 0.0 else qc0
    v1 = lagr_pos(0.0, q1, h_i, h_e, g_e, sig2, c_p, c_q)
    s_pq = f1_val(pbar, qbar, h_i, h_e, g_e, sig2, c_p)
    if s_pq <= 0.0:
        # III-i: region [qc0, qbar] has the interior stationary point.
        p2, q2, v2 = joint_root(h_i, h_e, g_e, sig2, c_p, c_q, pbar, qc0, qbar, tol_p, tol_q)
        if v1 >= v2:
            return 0.0, q1, v1, CASE_III_I_R1
        return p2, q2, v2, CASE_III_I_R2
    # III-ii: f1(pbar, .) changes sign at qcp >= qc0; three regions.
    qcp = bisect_q_f1(pbar, a, qbar, h_i, h_e, g_e, sig2, c_p, tol_q)
    p2, q2, v2 = joint_root(h_i, h_e, g_e, sig2, c_p, c_q, pbar, qc0, qcp, tol_p, tol_q)
    q3 = bisect_q_f2(pbar, qcp, qbar, h_e, g_e, sig2, c_q, tol_q)
    v3 = lagr_pos(pbar, q3, h_i, h_e, g_e, sig2, c_p, c_q)
    if v1 >= v2 and v1 >= v3:
        return 0.0, q1, v1, CASE_III_II_R1
    if v2 >= v3:
        return p2, q2, v2, CASE_III_II_R2
    return pbar, q3, v3, CASE_III_II_R3


@njit(cache=True)
def solve_zero(c_p, c_q, pbar, q_cap):
    """Zero-secrecy branch: the objective is linear; ties resolve to (0, 0)."""
    p = pbar if c_p > 0.0 else 0.0
    q = q_cap if c_q > 0.0 else 0.0
    return p, q, c_p * p + c_q * q


@njit(cache=True)
def solve_sc_kernel(h_i, h_e, g_e, sig2, pbar, qbar, a, deg, c_p, c_q, tol_p, tol_q):
    """Full per-subcarrier maximization; returns (p, q, value, branch, case)."""
    if deg:
        p, q, v = solve_zero(c_p, c_q, pbar, qbar)
        return p, q, v, BRANCH_ZERO, CASE_DEGENERATE
    if a > qbar:
        p, q, v = solve_zero(c_p, c_q, pbar, qbar)
        return p, q, v, BRANCH_ZERO, CASE_ZERO
    pp, qp, vp, case = solve_positive(h_i, h_e, g_e, sig2, c_p, c_q, pbar, qbar, a, tol_p, tol_q)
    if a <= 0.0:
        return pp, qp, vp, BRANCH_POSITIVE, case
    pz, qz, vz = solve_zero(c_p, c_q, pbar, a)
    if vz >= vp:
        return pz, qz, vz, BRANCH_ZERO, CASE_ZERO
    return pp, qp, vp, BRANCH_POSITIVE, case


@njit(cache=True)
def solve_all_kernel(h_i, h_e, g_e, a, deg, c_p, c_q, sig2, pbar, qbar,
                     out_p, out_q, out_v, out_branch, out_case):
    """Solve every subcarrier's subproblem for one multiplier point."""
    tol_p = pbar * 1e-8
    tol_q = qbar * 1e-8
    n = h_i.shape[0]
    for i in range(n):
        p, q, v, branch, case = solve_sc_kernel(
            h_i[i], h_e[i], g_e[i], sig2, pbar, qbar,
            a[i], deg[i], c_p[i], c_q[i], tol_p, tol_q,
        )
        out_p[i] = p
        out_q[i] = q
        out_v[i] = v
        out_branch[i] = branch
        out_case[i] = case


# ---------------------------------------------------------------------------
# Generic 1-D scans used by the benchmark schemes

MODE_NOJAM_P = 0      # vary p, q = 0, jamming cancelled at the IR
MODE_NOCANCEL_P = 1   # vary p, q fixed, jamming hits the IR
MODE_NOCANCEL_Q = 2   # vary q, p fixed, jamming hits the IR


@njit(cache=True)
def nocancel_rate(p, q, h_i, h_e, g_i, g_e, sig2):
    """Secrecy rate (unclipped) when the IR cannot cancel the jamming."""
    return (
        math.log1p(p * h_i / (sig2 + q * g_i))
        - math.log1p(p * h_e / (sig2 + q * g_e))
    ) / LN2


@njit(cache=True)
def _obj_1d(mode, x, fixed, h_i, h_e, g_i, g_e, sig2, c):
    if mode == MODE_NOJAM_P:
        r = rate_diff(x, 0.0, h_i, h_e, g_e, sig2)
    elif mode == MODE_NOCANCEL_P:
        r = nocancel_rate(x, fixed, h_i, h_e, g_i, g_e, sig2)
    else:
        r = nocancel_rate(fixed, x, h_i, h_e, g_i, g_e, sig2)
    if r < 0.0:
        r = 0.0
    return r + c * x


@njit(cache=True)
def scan_max_1d(mode, fixed, h_i, h_e, g_i, g_e, sig2, c, xmax):
    """Maximize a clipped-rate-plus-linear objective over [0, xmax].

    Uniform scan followed by golden-section refinement around the best grid
    point; returns (x, value).
    """
    best_x = 0.0
    best_v = _obj_1d(mode, 0.0, fixed, h_i, h_e, g_i, g_e, sig2, c)
    if xmax <= 0.0:
        return best_x, best_v
    step = xmax / (SCAN_POINTS - 1.0)
    best_i = 0
    for i in range(1, SCAN_POINTS):
        xi = step * i
        vi = _obj_1d(mode, xi, fixed, h_i, h_e, g_i, g_e, sig2, c)
        if vi > best_v:
            best_v = vi
            best_x = xi
            best_i = i
    a = step * (best_i - 1) if best_i > 0 else 0.0
    b = step * (best_i + 1) if best_i < SCAN_POINTS - 1 else xmax
    cq = b - INVPHI * (b - a)
    d = a + INVPHI * (b - a)
    fc = _obj_1d(mode, cq, fixed, h_i, h_e, g_i, g_e, sig2, c)
    fd = _obj_1d(mode, d, fixed, h_i, h_e, g_i, g_e, sig2, c)
    if fc > best_v:
        best_v, best_x = fc, cq
    if fd > best_v:
        best_v, best_x = fd, d
    for _ in range(GOLDEN_ITERS):
        if fc >= fd:
            b = d
            d = cq
            fd = fc
            cq = b - INVPHI * (b - a)
            fc = _obj_1d(mode, cq, fixed, h_i, h_e, g_i, g_e, sig2, c)
            if fc > best_v:
                best_v, best_x = fc, cq
        else:
            a = cq
            cq = d
            fc = fd
            d = a + INVPHI * (b - a)
            fd = _obj_1d(mode, d, fixed, h_i, h_e, g_i, g_e, sig2, c)
            if fd > best_v:
                best_v, best_x = fd, d
    return best_x, best_v


@njit(cache=True)
def scan_all_1d(mode, fixed, h_i, h_e, g_i, g_e, sig2, c, xmax, out_x, out_v):
    n = h_i.shape[0]
    for i in range(n):
        x, v = scan_max_1d(mode, fixed[i], h_i[i], h_e[i], g_i[i], g_e[i], sig2, c[i], xmax)
        out_x[i] = x
        out_v[i] = v
