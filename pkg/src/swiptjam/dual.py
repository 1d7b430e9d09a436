"""Dual minimization by the central-cut ellipsoid method, with primal repair.

The dual of the secrecy-rate maximization is minimized over the three
non-negative multipliers. Each dual evaluation solves the N per-subcarrier
subproblems; the constraint slacks at the maximizer are a subgradient. Cuts
through negative multiplier coordinates restore non-negativity, every other
cut halves along the subgradient. Because dual iterates are generally
infeasible for the primal, each one is repaired (scaling plus a greedy
harvested-power fix) and the best feasible repair across iterations is
reported together with the dual bound and the resulting gap.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .model import (
    ChannelState,
    DualPoint,
    PowerAllocation,
    SystemParams,
    allocation_feasible,
    evaluate_allocation,
    secrecy_rates,
    threshold_array,
    LN2,
)
from .subproblem import ScBatchSolution, solve_subcarriers

STATUS_CONVERGED = "converged"
STATUS_ITERATION_CAP = "iteration-cap"
STATUS_INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class EllipsoidConfig:
    """Knobs for the dual loop; defaults suit the reference scenarios."""

    max_iter: int = 800
    eps_rel: float = 1e-4          # stop when sqrt(s'Es) <= eps_rel * (1 + |g|)
    radius: float | None = None    # None: 10 * h_max / (noise * ln2)
    feasibility_rtol: float = 1e-9


@dataclass(frozen=True)
class EllipsoidState:
    """One step of the ellipsoid iteration (diagnostic value object)."""

    center: np.ndarray
    shape: np.ndarray
    iteration: int

    def __post_init__(self) -> None:
        center = np.asarray(self.center, dtype=np.float64)
        shape = np.asarray(self.shape, dtype=np.float64)
        if not np.all(np.isfinite(center)):
            raise ValueError("center must be finite")
        if not np.allclose(shape, shape.T):
            raise ValueError("shape matrix must be symmetric")
        np.linalg.cholesky(shape)  # raises unless positive definite
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "shape", shape)


@dataclass(frozen=True)
class SolveReport:
    """Outcome of one dual solve."""

    allocation: PowerAllocation
    dual_bound: float
    gap: float
    duals: DualPoint
    iterations: int
    subproblem_case_histogram: dict[str, int]
    status: str
    runtime_s: float
    logdet_trace: tuple[float, ...] = field(default=(), repr=False)
    primal_trace: tuple[float, ...] = field(default=(), repr=False)


def default_radius(ch: ChannelState, params: SystemParams) -> float:
    """Ball radius guaranteed to contain the binding multipliers.

    10x the largest rate derivative any channel gain can produce, which
    upper-bounds the marginal value of every constraint.
    """
    h_max = max(
        float(ch.h_i.max()), float(ch.h_e.max()), float(ch.h_j.max()),
        float(ch.g_i.max()), float(ch.g_e.max()),
    )
    return 10.0 * h_max / (params.noise_w * LN2)


def harvest_upper_bound(ch: ChannelState, params: SystemParams) -> float:
    """Upper bound on the ER harvested power over the box constraints.

    Every transmit power at its peak; jamming power filled onto the best
    eavesdropper-side gains until the (maximal) jammer budget runs out. The
    total-power constraint is ignored, so this can only overestimate.
    """
    p_peak = params.peak_p_w
    harvest = p_peak * float(ch.h_e.sum())
    budget = params.zeta * p_peak * float(ch.h_j.sum())
    for idx in np.argsort(-ch.g_e):
        if budget <= 0.0:
            break
        q = min(params.peak_q_w, budget)
        harvest += q * float(ch.g_e[idx])
        budget -= q
    return harvest


class _DualEvaluator:
    """Caches channel arrays and tallies case statistics across evaluations."""

    def __init__(self, ch: ChannelState, params: SystemParams):
        self.ch = ch
        self.params = params
        self.case_counts = np.zeros(16, dtype=np.int64)

    def __call__(self, nu: np.ndarray) -> tuple[float, np.ndarray, ScBatchSolution]:
        ch, params = self.ch, self.params
        point = DualPoint(float(nu[0]), float(nu[1]), float(nu[2]))
        batch = solve_subcarriers(ch, params, point)
        counts = np.bincount(batch.case, minlength=16)
        self.case_counts[: counts.shape[0]] += counts
        g = float(batch.value.sum()) + point.lam * params.total_power_w - point.mu * params.eh_min_w
        s = np.array(
            [
                params.total_power_w - float(batch.p.sum()),
                params.zeta * float(np.dot(batch.p, ch.h_j)) - float(batch.q.sum()),
                float(np.dot(batch.p, ch.h_e) + np.dot(batch.q, ch.g_e)) - params.eh_min_w,
            ]
        )
        return g, s, batch

    def histogram(self) -> dict[str, int]:
        from .subproblem import CASE_LABELS

        return {
            CASE_LABELS[i]: int(c)
            for i, c in enumerate(self.case_counts[: len(CASE_LABELS)])
            if c
        }


def dual_value_and_subgrad(
    nu: DualPoint, ch: ChannelState, params: SystemParams
) -> tuple[float, np.ndarray, PowerAllocation]:
    """Dual function value, a subgradient, and the maximizing allocation.

    The returned allocation is the raw subproblem maximizer; it usually
    violates the coupling constraints (that is what the subgradient says).
    """
    evaluator = _DualEvaluator(ch, params)
    g, s, batch = evaluator(nu.as_array())
    alloc = evaluate_allocation(batch.p, batch.q, ch, params)
    return g, s, alloc


# ---------------------------------------------------------------------------
# Primal repair


def _rate_grad_p(p, q, ch, params):
    """d(secrecy rate)/dp per subcarrier, zero where the rate is clipped."""
    s2 = params.noise_w
    a, deg = threshold_array(ch, params)
    grad = (
        ch.h_i / (LN2 * (s2 + p * ch.h_i))
        - ch.h_e / (LN2 * (s2 + q * ch.g_e + p * ch.h_e))
    )
    active = ~deg & (q >= a)
    return np.where(active, grad, 0.0)


def repair_primal(
    alloc: PowerAllocation, ch: ChannelState, params: SystemParams
) -> PowerAllocation:
    """Project a near-feasible allocation onto the constraint set.

    Scale transmit powers onto the total budget, re-fit jamming powers to the
    harvested budget, then raise q (free: jamming only helps the secrecy rate
    here) and p (ordered by harvested power per unit of rate loss) until the
    ER requirement holds or the boxes and budget bind.
    """
    p, q = _repair_arrays(np.array(alloc.p), np.array(alloc.q), ch, params)
    return evaluate_allocation(p, q, ch, params)


def _repair_arrays(
    p: np.ndarray,
    q: np.ndarray,
    ch: ChannelState,
    params: SystemParams,
    interference: bool = False,
    allow_jammer: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    pbar, qbar = params.peak_p_w, params.peak_q_w
    np.clip(p, 0.0, pbar, out=p)
    np.clip(q, 0.0, qbar, out=q)
    total = float(p.sum())
    if total > params.total_power_w:
        p *= params.total_power_w / total
    budget = params.zeta * float(np.dot(p, ch.h_j))
    total_q = float(q.sum())
    if total_q > budget:
        q *= (budget / total_q) if total_q > 0.0 else 0.0

    for _ in range(8):
        deficit = params.eh_min_w - float(np.dot(p, ch.h_e) + np.dot(q, ch.g_e))
        if deficit <= 0.0:
            break
        progress = False
        if allow_jammer:
            budget_left = params.zeta * float(np.dot(p, ch.h_j)) - float(q.sum())
            for n in np.argsort(-ch.g_e):
                if deficit <= 0.0 or budget_left <= 0.0:
                    break
                gain = float(ch.g_e[n])
                room = min(qbar - float(q[n]), budget_left)
                if room <= 0.0 or gain <= 0.0:
                    continue
                add = min(room, deficit / gain)
                q[n] += add
                budget_left -= add
                deficit -= add * gain
                progress = True
        if deficit > 0.0:
            power_left = params.total_power_w - float(p.sum())
            if power_left > 0.0:
                if interference:
                    loss = np.maximum(0.0, -_nocancel_grad_p(p, q, ch, params))
                else:
                    loss = np.maximum(0.0, -_rate_grad_p(p, q, ch, params))
                metric = ch.h_e / (loss + 1e-30)
                for n in np.argsort(-metric):
                    if deficit <= 0.0 or power_left <= 0.0:
                        break
                    gain = float(ch.h_e[n])
                    room = min(pbar - float(p[n]), power_left)
                    if room <= 0.0 or gain <= 0.0:
                        continue
                    add = min(room, deficit / gain)
                    p[n] += add
                    power_left -= add
                    deficit -= add * gain
                    progress = True
        if not progress:
            break
    return p, q


def _nocancel_grad_p(p, q, ch, params):
    s2 = params.noise_w
    r = (
        np.log1p(p * ch.h_i / (s2 + q * ch.g_i))
        - np.log1p(p * ch.h_e / (s2 + q * ch.g_e))
    )
    grad = (
        ch.h_i / (LN2 * (s2 + q * ch.g_i + p * ch.h_i))
        - ch.h_e / (LN2 * (s2 + q * ch.g_e + p * ch.h_e))
    )
    return np.where(r > 0.0, grad, 0.0)


# ---------------------------------------------------------------------------
# Generic central-cut ellipsoid over the non-negative orthant


@dataclass
class EllipsoidRun:
    bound: float
    nu: np.ndarray
    iterations: int
    converged: bool
    logdets: list[float]


def minimize_nonneg_dual(
    evaluate,
    dim: int,
    radius: float,
    eps_rel: float = 1e-4,
    max_iter: int = 800,
    center: np.ndarray | None = None,
) -> EllipsoidRun:
    """Minimize a convex dual over nu >= 0 with the central-cut ellipsoid.

    evaluate(nu) -> (value, subgradient). Coordinates below zero trigger a
    feasibility cut instead of an evaluation. Stops once the ellipsoid bound
    sqrt(s'Es) certifies the remaining descent is below eps_rel * (1 + |g|).
    """
    ratio = dim * dim / (dim * dim - 1.0)
    e_mat = np.eye(dim) * radius * radius
    c = np.full(dim, radius / 2.0) if center is None else np.array(center, dtype=np.float64)
    bound = math.inf
    converged = False
    logdets: list[float] = []
    it = 0
    while it < max_iter:
        it += 1
        neg = int(np.argmin(c))
        if c[neg] < 0.0:
            s = np.zeros(dim)
            s[neg] = -1.0
            objective_cut = False
        else:
            g, s = evaluate(c)
            bound = min(bound, g)
            objective_cut = True
        e_s = e_mat @ s
        s_e_s = float(s @ e_s)
        if not math.isfinite(s_e_s) or s_e_s <= 0.0:
            # Numerically exhausted ellipsoid: nothing left to cut.
            converged = True
            break
        norm = math.sqrt(s_e_s)
        if objective_cut and norm <= eps_rel * (1.0 + abs(g)):
            converged = True
            break
        c = c - e_s / ((dim + 1.0) * norm)
        e_mat = ratio * (e_mat - (2.0 / (dim + 1.0)) * np.outer(e_s, e_s) / s_e_s)
        e_mat = 0.5 * (e_mat + e_mat.T)
        logdets.append(float(np.linalg.slogdet(e_mat)[1]))
    return EllipsoidRun(bound, c, it, converged, logdets)


def ellipsoid_solve(
    ch: ChannelState, params: SystemParams, cfg: EllipsoidConfig | None = None
) -> SolveReport:
    """Full dual solve with primal recovery.

    Reports the best feasible repaired allocation found across iterations,
    the dual bound (minimum observed dual value) and their gap. Declares the
    problem infeasible up front when the required harvested power exceeds
    what the box constraints can possibly deliver.
    """
    cfg = cfg or EllipsoidConfig()
    t0 = time.perf_counter()
    n = ch.n_sc
    zeros = np.zeros(n)

    if params.eh_min_w > harvest_upper_bound(ch, params) * (1.0 + 1e-12):
        alloc = PowerAllocation(zeros, zeros, 0.0, False)
        return SolveReport(
            allocation=alloc,
            dual_bound=math.inf,
            gap=math.inf,
            duals=DualPoint(0.0, 0.0, 0.0),
            iterations=0,
            subproblem_case_histogram={},
            status=STATUS_INFEASIBLE,
            runtime_s=time.perf_counter() - t0,
        )

    evaluator = _DualEvaluator(ch, params)
    best_rate = -math.inf
    best_pq: tuple[np.ndarray, np.ndarray] | None = None
    primal_trace: list[float] = []

    def evaluate(nu: np.ndarray) -> tuple[float, np.ndarray]:
        nonlocal best_rate, best_pq
        g, s, batch = evaluator(nu)
        p, q = _repair_arrays(batch.p.copy(), batch.q.copy(), ch, params)
        if allocation_feasible(p, q, ch, params, cfg.feasibility_rtol):
            rate = float(secrecy_rates(p, q, ch, params).sum())
            if rate > best_rate:
                best_rate = rate
                best_pq = (p, q)
        primal_trace.append(best_rate)
        return g, s

    radius = cfg.radius if cfg.radius is not None else default_radius(ch, params)
    run = minimize_nonneg_dual(
        evaluate, dim=3, radius=radius, eps_rel=cfg.eps_rel, max_iter=cfg.max_iter
    )

    if best_pq is None:
        alloc = PowerAllocation(zeros, zeros, 0.0, False)
        status = STATUS_INFEASIBLE
        gap = math.inf
    else:
        alloc = evaluate_allocation(best_pq[0], best_pq[1], ch, params)
        status = STATUS_CONVERGED if run.converged else STATUS_ITERATION_CAP
        gap = run.bound - alloc.secrecy_rate
    return SolveReport(
        allocation=alloc,
        dual_bound=run.bound,
        gap=gap,
        duals=DualPoint.from_array(np.maximum(run.nu, 0.0)),
        iterations=run.iterations,
        subproblem_case_histogram=evaluator.histogram(),
        status=status,
        runtime_s=time.perf_counter() - t0,
        logdet_trace=tuple(run.logdets),
        primal_trace=tuple(primal_trace),
    )
