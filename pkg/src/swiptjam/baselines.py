"""Benchmark schemes: equal power allocation, no jammer, and the
no-cancellation variant solved by block-coordinate descent.

All three share the proposed scheme's constraint set. EPA spreads power
uniformly. The no-jammer scheme keeps q = 0 and optimizes transmit power
only, through the same dual machinery with a 1-D scan per subcarrier. The
no-cancellation scheme models the jamming signal as interference at the IR
as well; its per-subcarrier structure no longer admits the monotone case
analysis, so each block (p with q fixed, q with p fixed) is optimized by
dual decomposition with scans, alternating until the objective stalls.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels as K
from .dual import (
    EllipsoidConfig,
    SolveReport,
    _repair_arrays,
    default_radius,
    ellipsoid_solve,
    harvest_upper_bound,
    minimize_nonneg_dual,
)
from .model import (
    ChannelState,
    PowerAllocation,
    SystemParams,
    allocation_feasible,
    evaluate_allocation,
)


class Scheme(str, Enum):
    PROPOSED = "proposed"
    EPA = "epa"
    NO_JAMMER = "nojammer"
    NO_CANCEL_BCD = "nocancel"


@dataclass(frozen=True)
class BaselineResult:
    scheme: Scheme
    allocation: PowerAllocation
    iterations: int = 0
    round_objectives: tuple[float, ...] = ()  # BCD descent trace (best per round)


@dataclass(frozen=True)
class BcdConfig:
    max_rounds: int = 50
    round_tol: float = 1e-5       # absolute objective improvement per round
    block_max_iter: int = 400
    block_eps_rel: float = 1e-4


def epa_allocate(ch: ChannelState, params: SystemParams) -> BaselineResult:
    """Uniform powers at the Tx and jammer; may violate the ER requirement."""
    n = ch.n_sc
    p = np.full(n, min(params.total_power_w / n, params.peak_p_w))
    budget = params.zeta * float(np.dot(p, ch.h_j))
    q = np.full(n, min(budget / n, params.peak_q_w))
    return BaselineResult(Scheme.EPA, evaluate_allocation(p, q, ch, params))


def nocancel_rate_total(
    p: np.ndarray, q: np.ndarray, ch: ChannelState, params: SystemParams
) -> float:
    """Secrecy rate when the jamming signal hits the IR as interference."""
    s2 = params.noise_w
    r = np.log1p(p * ch.h_i / (s2 + q * ch.g_i)) / K.LN2
    r_e = np.log1p(p * ch.h_e / (s2 + q * ch.g_e)) / K.LN2
    return float(np.maximum(0.0, r - r_e).sum())


def no_jammer_solve(
    ch: ChannelState, params: SystemParams, cfg: EllipsoidConfig | None = None
) -> BaselineResult:
    """Transmit-power-only secrecy maximization (q = 0)."""
    cfg = cfg or EllipsoidConfig()
    n = ch.n_sc
    zeros = np.zeros(n)
    if params.eh_min_w > params.peak_p_w * float(ch.h_e.sum()) * (1.0 + 1e-12):
        return BaselineResult(Scheme.NO_JAMMER, PowerAllocation(zeros, zeros, 0.0, False))

    best_rate = -math.inf
    best_p: np.ndarray | None = None
    out_p = np.empty(n)
    out_v = np.empty(n)

    def evaluate(nu: np.ndarray) -> tuple[float, np.ndarray]:
        nonlocal best_rate, best_p
        lam, mu = float(nu[0]), float(nu[1])
        c = -lam + mu * ch.h_e
        K.scan_all_1d(
            K.MODE_NOJAM_P, zeros, ch.h_i, ch.h_e, ch.g_i, ch.g_e,
            params.noise_w, c, params.peak_p_w, out_p, out_v,
        )
        g = float(out_v.sum()) + lam * params.total_power_w - mu * params.eh_min_w
        s = np.array(
            [
                params.total_power_w - float(out_p.sum()),
                float(np.dot(out_p, ch.h_e)) - params.eh_min_w,
            ]
        )
        p_fix, _ = _repair_arrays(out_p.copy(), zeros.copy(), ch, params, allow_jammer=False)
        if allocation_feasible(p_fix, zeros, ch, params):
            alloc = evaluate_allocation(p_fix, zeros, ch, params)
            if alloc.secrecy_rate > best_rate:
                best_rate = alloc.secrecy_rate
                best_p = p_fix
        return g, s

    radius = cfg.radius if cfg.radius is not None else default_radius(ch, params)
    run = minimize_nonneg_dual(
        evaluate, dim=2, radius=radius, eps_rel=cfg.eps_rel, max_iter=cfg.max_iter
    )
    if best_p is None:
        alloc = PowerAllocation(zeros, zeros, 0.0, False)
    else:
        alloc = evaluate_allocation(best_p, zeros, ch, params)
    return BaselineResult(Scheme.NO_JAMMER, alloc, run.iterations)


def _nocancel_allocation(
    p: np.ndarray, q: np.ndarray, ch: ChannelState, params: SystemParams
) -> PowerAllocation:
    return PowerAllocation(
        p=p,
        q=q,
        secrecy_rate=nocancel_rate_total(p, q, ch, params),
        feasible=allocation_feasible(p, q, ch, params),
    )


def bcd_nocancel_solve(
    ch: ChannelState, params: SystemParams, cfg: BcdConfig | None = None
) -> BaselineResult:
    """Alternating dual solves for the no-cancellation secrecy problem.

    Block 1 optimizes transmit powers against (total power, jammer budget,
    ER requirement); block 2 optimizes jamming powers against (budget, ER
    requirement). Each block candidate is repaired and adopted only when it
    improves the objective, so rounds are non-decreasing by construction.

    The landscape has two basins: little jamming (protecting the IR from
    interference) and heavy jamming (degrading the ER, whose jammer link is
    usually stronger). The alternation cannot move between them because the
    jamming budget is funded by the transmit powers, so the descent runs
    once from the no-jammer point and once from the uniform-power point and
    keeps the better result.
    """
    cfg = cfg or BcdConfig()
    n = ch.n_sc
    zeros = np.zeros(n)
    if params.eh_min_w > harvest_upper_bound(ch, params) * (1.0 + 1e-12):
        return BaselineResult(Scheme.NO_CANCEL_BCD, PowerAllocation(zeros, zeros, 0.0, False))

    p_epa = np.full(n, min(params.total_power_w / n, params.peak_p_w))
    budget_epa = params.zeta * float(np.dot(p_epa, ch.h_j))
    q_epa = np.full(n, min(budget_epa / n, params.peak_q_w))
    starts = (
        (np.array(no_jammer_solve(ch, params).allocation.p), zeros.copy()),
        (p_epa, q_epa),
    )
    best: tuple[float, tuple[np.ndarray, np.ndarray] | None, int, tuple[float, ...]] = (
        -math.inf, None, 0, (),
    )
    for p0, q0 in starts:
        obj, pq, rounds, trace = _bcd_descend(p0, q0, ch, params, cfg)
        if pq is not None and obj > best[0]:
            best = (obj, pq, rounds, trace)
    best_obj, best_pq, rounds, trace = best
    if best_pq is None:
        alloc = PowerAllocation(zeros, zeros, 0.0, False)
    else:
        alloc = _nocancel_allocation(best_pq[0], best_pq[1], ch, params)
    return BaselineResult(Scheme.NO_CANCEL_BCD, alloc, rounds, trace)


def _bcd_descend(
    p_start: np.ndarray,
    q_start: np.ndarray,
    ch: ChannelState,
    params: SystemParams,
    cfg: BcdConfig,
) -> tuple[float, tuple[np.ndarray, np.ndarray] | None, int, tuple[float, ...]]:
    n = ch.n_sc
    radius = default_radius(ch, params)
    s2 = params.noise_w

    p_cur, q_cur = _repair_arrays(
        p_start.copy(), q_start.copy(), ch, params, interference=True
    )
    if allocation_feasible(p_cur, q_cur, ch, params):
        best_obj = nocancel_rate_total(p_cur, q_cur, ch, params)
    else:
        best_obj = -math.inf
    best_pq = (p_cur.copy(), q_cur.copy())

    out_x = np.empty(n)
    out_v = np.empty(n)
    rounds = 0
    trace: list[float] = []
    for _ in range(cfg.max_rounds):
        rounds += 1
        obj_before = best_obj

        # Block 1: transmit powers with jamming fixed.
        q_fix = best_pq[1] if best_obj > -math.inf else q_cur
        block_best = [-math.inf, None]

        def eval_p(nu: np.ndarray) -> tuple[float, np.ndarray]:
            lam, beta, mu = float(nu[0]), float(nu[1]), float(nu[2])
            c = -lam + beta * params.zeta * ch.h_j + mu * ch.h_e
            K.scan_all_1d(
                K.MODE_NOCANCEL_P, q_fix, ch.h_i, ch.h_e, ch.g_i, ch.g_e,
                s2, c, params.peak_p_w, out_x, out_v,
            )
            g = (
                float(out_v.sum())
                + lam * params.total_power_w
                - beta * float(q_fix.sum())
                + mu * (float(np.dot(q_fix, ch.g_e)) - params.eh_min_w)
            )
            s = np.array(
                [
                    params.total_power_w - float(out_x.sum()),
                    params.zeta * float(np.dot(out_x, ch.h_j)) - float(q_fix.sum()),
                    float(np.dot(out_x, ch.h_e) + np.dot(q_fix, ch.g_e)) - params.eh_min_w,
                ]
            )
            p_fix, q_fix2 = _repair_arrays(out_x.copy(), q_fix.copy(), ch, params, interference=True)
            if allocation_feasible(p_fix, q_fix2, ch, params):
                rate = nocancel_rate_total(p_fix, q_fix2, ch, params)
                if rate > block_best[0]:
                    block_best[0] = rate
                    block_best[1] = (p_fix, q_fix2)
            return g, s

        minimize_nonneg_dual(
            eval_p, dim=3, radius=radius,
            eps_rel=cfg.block_eps_rel, max_iter=cfg.block_max_iter,
        )
        if block_best[1] is not None and block_best[0] > best_obj:
            best_obj = block_best[0]
            best_pq = block_best[1]

        # Block 2: jamming powers with transmit fixed.
        p_fix = best_pq[0] if best_obj > -math.inf else p_cur
        budget = params.zeta * float(np.dot(p_fix, ch.h_j))
        harvest_p = float(np.dot(p_fix, ch.h_e))
        block_best = [-math.inf, None]

        def eval_q(nu: np.ndarray) -> tuple[float, np.ndarray]:
            beta, mu = float(nu[0]), float(nu[1])
            c = -beta + mu * ch.g_e
            K.scan_all_1d(
                K.MODE_NOCANCEL_Q, p_fix, ch.h_i, ch.h_e, ch.g_i, ch.g_e,
                s2, c, params.peak_q_w, out_x, out_v,
            )
            g = float(out_v.sum()) + beta * budget + mu * (harvest_p - params.eh_min_w)
            s = np.array(
                [
                    budget - float(out_x.sum()),
                    harvest_p + float(np.dot(out_x, ch.g_e)) - params.eh_min_w,
                ]
            )
            p_fix2, q_new = _repair_arrays(p_fix.copy(), out_x.copy(), ch, params, interference=True)
            if allocation_feasible(p_fix2, q_new, ch, params):
                rate = nocancel_rate_total(p_fix2, q_new, ch, params)
                if rate > block_best[0]:
                    block_best[0] = rate
                    block_best[1] = (p_fix2, q_new)
            return g, s

        minimize_nonneg_dual(
            eval_q, dim=2, radius=radius,
            eps_rel=cfg.block_eps_rel, max_iter=cfg.block_max_iter,
        )
        if block_best[1] is not None and block_best[0] > best_obj:
            best_obj = block_best[0]
            best_pq = block_best[1]

        trace.append(best_obj)
        if best_obj - obj_before < cfg.round_tol and obj_before > -math.inf:
            break

    if best_obj <= -math.inf:
        return best_obj, None, rounds, ()
    return best_obj, best_pq, rounds, tuple(trace)


def solve_scheme(
    scheme: Scheme, ch: ChannelState, params: SystemParams
) -> tuple[PowerAllocation, int]:
    """Uniform entry point used by the experiment runner and the service."""
    if scheme == Scheme.PROPOSED:
        report: SolveReport = ellipsoid_solve(ch, params)
        return report.allocation, report.iterations
    if scheme == Scheme.EPA:
        res = epa_allocate(ch, params)
    elif scheme == Scheme.NO_JAMMER:
        res = no_jammer_solve(ch, params)
    elif scheme == Scheme.NO_CANCEL_BCD:
        res = bcd_nocancel_solve(ch, params)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    return res.allocation, res.iterations
