"""Per-subcarrier maximization of the dual objective for fixed multipliers.

For one subcarrier the problem is max L(p, q) over the box [0, pbar] x
[0, qbar]. The search splits into the positive-secrecy branch (q >= A,
handled by a monotone case analysis on the signs of the partial derivative
f1 at the branch-box corners) and the zero-secrecy branch (q < A, where L is
linear). The winner of the two branches is the subcarrier's solution.

Scalar entry points operate on a single ScSnapshot; solve_subcarriers runs
the compiled batch kernel over a whole ChannelState and is what the dual
optimizer calls in its inner loop.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels as K
from .model import ChannelState, DualPoint, ScSnapshot, SystemParams, threshold_array

CASE_LABELS = (
    "I",
    "II-i",
    "II-ii",
    "II-iii/Region1",
    "II-iii/Region2",
    "III-i/Region1",
    "III-i/Region2",
    "III-ii/Region1",
    "III-ii/Region2",
    "III-ii/Region3",
    "zero-branch",
    "degenerate",
)


class Branch(Enum):
    POSITIVE_SECRECY = "positive-secrecy"
    ZERO_SECRECY = "zero-secrecy"


@dataclass(frozen=True)
class ScSolution:
    """Maximizer of one subcarrier's dual objective."""

    p: float
    q: float
    value: float
    branch: Branch
    case_label: str


def _coeffs(sc: ScSnapshot, nu: DualPoint) -> tuple[float, float]:
    c_p = -nu.lam + nu.beta * sc.h_j + nu.mu * sc.h_e
    c_q = -nu.beta + nu.mu * sc.g_e
    return c_p, c_q


def _tol(span: float, tol: float | None) -> float:
    return span * 1e-8 if tol is None else tol


def chi_q_of_f2(
    p: float, sc: ScSnapshot, nu: DualPoint, lo: float, hi: float, tol: float | None = None
) -> float:
    """Root of f2(p, .) on [lo, hi] by bisection (f2 decreases in q).

    With no sign change, returns the endpoint the objective prefers: hi when
    f2 > 0 throughout, lo when f2 < 0 throughout.
    """
    if lo > hi:
        raise ValueError(f"invalid interval [{lo!r}, {hi!r}]")
    _, c_q = _coeffs(sc, nu)
    return float(
        K.bisect_q_f2(p, lo, hi, sc.h_e, sc.g_e, sc.noise_w, c_q, _tol(hi - lo, tol))
    )


def chi_q_of_f1(
    p: float, sc: ScSnapshot, nu: DualPoint, lo: float, hi: float, tol: float | None = None
) -> float:
    """Root of f1(p, .) on [lo, hi] by bisection (f1 increases in q).

    With no sign change, returns lo when f1 > 0 throughout and hi when
    f1 < 0 throughout.
    """
    if lo > hi:
        raise ValueError(f"invalid interval [{lo!r}, {hi!r}]")
    c_p, _ = _coeffs(sc, nu)
    return float(
        K.bisect_q_f1(p, lo, hi, sc.h_i, sc.h_e, sc.g_e, sc.noise_w, c_p, _tol(hi - lo, tol))
    )


def chi_p_of_f1(
    q: float, sc: ScSnapshot, nu: DualPoint, peak_p_w: float, tol: float | None = None
) -> float:
    """Root of f1(., q) on [0, peak_p_w] by bisection (f1 decreases in p).

    Clamps to 0 when f1(0, q) <= 0 and to peak_p_w when f1(peak_p_w, q) >= 0.
    """
    c_p, _ = _coeffs(sc, nu)
    return float(
        K.bisect_p_f1(q, sc.h_i, sc.h_e, sc.g_e, sc.noise_w, c_p, peak_p_w, _tol(peak_p_w, tol))
    )


def joint_root(
    sc: ScSnapshot, nu: DualPoint, q_lo: float, q_hi: float, peak_p_w: float
) -> tuple[float, float]:
    """Approximate simultaneous root/KKT point of (f1, f2) with q in [q_lo, q_hi].

    Eliminates p through the f1 bisection for each candidate q, then picks
    the q maximizing the objective via a dense scan plus golden-section
    refinement. The result respects the box.
    """
    if q_lo > q_hi:
        raise ValueError(f"invalid interval [{q_lo!r}, {q_hi!r}]")
    c_p, c_q = _coeffs(sc, nu)
    p, q, _ = K.joint_root(
        sc.h_i, sc.h_e, sc.g_e, sc.noise_w, c_p, c_q,
        peak_p_w, q_lo, q_hi, peak_p_w * 1e-8, q_hi * 1e-8,
    )
    return float(p), float(q)


def solve_positive_branch(
    sc: ScSnapshot, nu: DualPoint, peak_p_w: float, peak_q_w: float
) -> ScSolution | None:
    """Maximizer over [0, peak_p_w] x [A, peak_q_w]; absent when unreachable."""
    if sc.degenerate or sc.a_threshold > peak_q_w:
        return None
    c_p, c_q = _coeffs(sc, nu)
    p, q, v, case = K.solve_positive(
        sc.h_i, sc.h_e, sc.g_e, sc.noise_w, c_p, c_q,
        peak_p_w, peak_q_w, sc.a_threshold, peak_p_w * 1e-8, peak_q_w * 1e-8,
    )
    return ScSolution(float(p), float(q), float(v), Branch.POSITIVE_SECRECY, CASE_LABELS[case])


def solve_zero_branch(
    sc: ScSnapshot, nu: DualPoint, peak_p_w: float, peak_q_w: float
) -> ScSolution | None:
    """Maximizer of the linear zero-secrecy branch; absent when A = 0."""
    if not sc.degenerate and sc.a_threshold <= 0.0:
        return None
    c_p, c_q = _coeffs(sc, nu)
    q_cap = peak_q_w if sc.degenerate else min(sc.a_threshold, peak_q_w)
    p, q, v = K.solve_zero(c_p, c_q, peak_p_w, q_cap)
    label = CASE_LABELS[K.CASE_DEGENERATE if sc.degenerate else K.CASE_ZERO]
    return ScSolution(float(p), float(q), float(v), Branch.ZERO_SECRECY, label)


def solve_sc(
    sc: ScSnapshot, nu: DualPoint, peak_p_w: float, peak_q_w: float
) -> ScSolution:
    """Best of the two branch maximizers (value ties resolve to less power)."""
    c_p, c_q = _coeffs(sc, nu)
    p, q, v, branch, case = K.solve_sc_kernel(
        sc.h_i, sc.h_e, sc.g_e, sc.noise_w, peak_p_w, peak_q_w,
        sc.a_threshold, sc.degenerate, c_p, c_q,
        peak_p_w * 1e-8, peak_q_w * 1e-8,
    )
    kind = Branch.POSITIVE_SECRECY if branch == K.BRANCH_POSITIVE else Branch.ZERO_SECRECY
    return ScSolution(float(p), float(q), float(v), kind, CASE_LABELS[case])


@dataclass(frozen=True)
class ScBatchSolution:
    """Vectorized subproblem solutions for one multiplier point."""

    p: np.ndarray
    q: np.ndarray
    value: np.ndarray
    branch: np.ndarray  # uint8 codes, 0 positive / 1 zero
    case: np.ndarray    # uint8 indices into CASE_LABELS

    def case_histogram(self) -> dict[str, int]:
        counts = np.bincount(self.case, minlength=len(CASE_LABELS))
        return {CASE_LABELS[i]: int(c) for i, c in enumerate(counts) if c}


def solve_subcarriers(ch: ChannelState, params: SystemParams, nu: DualPoint) -> ScBatchSolution:
    """Solve all per-subcarrier subproblems for one multiplier point.

    Uses the compiled batch kernel; h_j enters the multiplier bundle scaled
    by zeta, matching the budget constraint.
    """
    a, deg = threshold_array(ch, params)
    c_p = -nu.lam + nu.beta * params.zeta * ch.h_j + nu.mu * ch.h_e
    c_q = -nu.beta + nu.mu * ch.g_e
    n = ch.n_sc
    out_p = np.empty(n)
    out_q = np.empty(n)
    out_v = np.empty(n)
    out_branch = np.empty(n, dtype=np.uint8)
    out_case = np.empty(n, dtype=np.uint8)
    K.solve_all_kernel(
        ch.h_i, ch.h_e, ch.g_e, a, deg, c_p, c_q,
        params.noise_w, params.peak_p_w, params.peak_q_w,
        out_p, out_q, out_v, out_branch, out_case,
    )
    return ScBatchSolution(out_p, out_q, out_v, out_branch, out_case)
