"""Dual optimizer tests: dual function, ellipsoid iteration, primal repair."""

import dataclasses
import math

import numpy as np
import pytest

from swiptjam.dual import (
    EllipsoidConfig,
    EllipsoidState,
    STATUS_INFEASIBLE,
    default_radius,
    dual_value_and_subgrad,
    ellipsoid_solve,
    harvest_upper_bound,
    minimize_nonneg_dual,
    repair_primal,
)
from swiptjam.model import (
    ChannelState,
    DualPoint,
    PowerAllocation,
    SystemParams,
    eval_constraints,
    evaluate_allocation,
)
from conftest import oracle_secrecy_total, random_channel

# det(E) shrinks by ((n^2/(n^2-1))^n) * (n-1)/(n+1) per cut; n = 3
LOGDET_STEP_3D = 3.0 * math.log(9.0 / 8.0) + math.log(0.5)


def _params(n, eh_min=0.0, **kw):
    defaults = dict(
        n_sc=n, total_power_w=1.0, noise_w=1e-9,
        peak_p_w=2.0 / n, peak_q_w=2.0 / n, eh_min_w=eh_min,
    )
    defaults.update(kw)
    return SystemParams(**defaults)


class TestDualValue:
    def test_no_penalty_maximizes_secrecy_capable_subcarriers(self, rng):
        n = 8
        ch = random_channel(rng, n)
        params = _params(n)
        g, s, alloc = dual_value_and_subgrad(DualPoint(0, 0, 0), ch, params)
        capable = ch.h_i > ch.h_e  # zero threshold and positive rate slope
        assert np.all(alloc.p[capable] == params.peak_p_w)
        assert s[0] == pytest.approx(params.total_power_w - alloc.p.sum())

    def test_huge_lambda_shuts_transmitter_down(self, rng):
        n = 8
        ch = random_channel(rng, n)
        params = _params(n, eh_min=1e-5)
        lam = 1e12
        g, s, alloc = dual_value_and_subgrad(DualPoint(lam, 0.0, 0.0), ch, params)
        assert np.all(alloc.p == 0.0)
        assert np.all(alloc.q == 0.0)
        assert g == pytest.approx(lam * params.total_power_w)
        assert s[0] == params.total_power_w
        assert s[1] == 0.0
        assert s[2] == -params.eh_min_w

    def test_weak_duality_against_feasible_points(self, rng):
        # the dual value dominates the rate of any feasible allocation
        for _ in range(20):
            n = 2
            ch = random_channel(rng, n)
            params = _params(n, eh_min=0.0)
            nu = DualPoint(*(10.0 ** rng.uniform(-2, 3, 3)))
            g, _, _ = dual_value_and_subgrad(nu, ch, params)
            p = np.full(n, min(params.total_power_w / n, params.peak_p_w))
            budget = params.zeta * float(np.dot(p, ch.h_j))
            q = np.full(n, min(budget / n, params.peak_q_w))
            feas_rate = oracle_secrecy_total(p, q, ch, params.noise_w)
            assert g >= feas_rate - 1e-6

    def test_dual_convexity_probe(self, rng):
        n = 4
        ch = random_channel(rng, n)
        params = _params(n, eh_min=1e-6)

        def g_of(v):
            val, _, _ = dual_value_and_subgrad(DualPoint.from_array(v), ch, params)
            return val

        for _ in range(20):
            v1 = 10.0 ** rng.uniform(-2, 3, 3)
            v2 = 10.0 ** rng.uniform(-2, 3, 3)
            mid = g_of((v1 + v2) / 2.0)
            avg = (g_of(v1) + g_of(v2)) / 2.0
            assert mid <= avg + 1e-6 * (1.0 + abs(avg))


class TestRepair:
    def test_identity_on_feasible(self, rng):
        n = 8
        ch = random_channel(rng, n)
        params = _params(n)
        p = np.full(n, params.total_power_w / (2 * n))
        budget = params.zeta * float(np.dot(p, ch.h_j))
        q = np.full(n, 0.25 * budget / n)
        fixed = repair_primal(evaluate_allocation(p, q, ch, params), ch, params)
        assert np.allclose(fixed.p, p, rtol=0, atol=0)
        assert np.allclose(fixed.q, q, rtol=0, atol=0)

    def test_power_overshoot_rescaled(self, rng):
        n = 4
        ch = random_channel(rng, n)
        params = _params(n, total_power_w=0.05, peak_p_w=0.05, peak_q_w=0.05)
        p = np.full(n, 1.1 * params.total_power_w / n)
        alloc = PowerAllocation(p, np.zeros(n), 0.0, False)
        fixed = repair_primal(alloc, ch, params)
        assert fixed.p.sum() == pytest.approx(params.total_power_w, rel=1e-12)
        assert np.allclose(fixed.p, p / 1.1, rtol=1e-12)

    def test_random_near_feasible_iterates(self, rng):
        n = 16
        count = 0
        while count < 100:
            ch = random_channel(rng, n)
            params = _params(n, eh_min=0.0)
            # a random point around the feasible scale, possibly violating
            p = rng.uniform(0, params.peak_p_w, n)
            q = rng.uniform(0, params.peak_q_w, n)
            params = dataclasses.replace(
                params, eh_min_w=0.5 * harvest_upper_bound(ch, params)
            )
            fixed = repair_primal(PowerAllocation(p, q, 0.0, False), ch, params)
            if not fixed.feasible:
                continue  # not all random draws are repairable to the EH level
            sp, sj, se = eval_constraints(fixed, ch, params)
            assert sp >= -1e-9 * (1 + params.total_power_w)
            assert sj >= -1e-9
            assert se >= -1e-9 * (1 + params.eh_min_w)
            count += 1


class TestEllipsoidMachinery:
    def test_state_requires_positive_definite_shape(self):
        with pytest.raises(np.linalg.LinAlgError):
            EllipsoidState(np.zeros(3), -np.eye(3), 0)
        with pytest.raises(ValueError):
            EllipsoidState(np.array([np.inf, 0, 0]), np.eye(3), 0)

    def test_quadratic_minimization(self):
        target = np.array([2.0, 3.0, 1.0])

        def evaluate(nu):
            return float(np.sum((nu - target) ** 2)), 2.0 * (nu - target)

        run = minimize_nonneg_dual(evaluate, dim=3, radius=100.0, eps_rel=1e-10, max_iter=2000)
        assert run.bound == pytest.approx(0.0, abs=1e-6)

    def test_nonneg_constraint_respected(self):
        # unconstrained minimum sits at negative coordinates; the method
        # must settle at the origin instead
        target = np.array([-5.0, -5.0])

        def evaluate(nu):
            return float(np.sum((nu - target) ** 2)), 2.0 * (nu - target)

        run = minimize_nonneg_dual(evaluate, dim=2, radius=50.0, eps_rel=1e-9, max_iter=2000)
        assert run.bound == pytest.approx(50.0, rel=1e-3)  # (0,0) is optimal

    def test_determinant_contraction_constant_rate(self, rng):
        n = 8
        ch = random_channel(rng, n)
        params = _params(n, eh_min=1e-6)
        report = ellipsoid_solve(ch, params, EllipsoidConfig(max_iter=60))
        diffs = np.diff(np.array(report.logdet_trace))
        assert np.all(diffs < 0.0)
        assert np.allclose(diffs, LOGDET_STEP_3D, atol=1e-9)


class TestEllipsoidSolve:
    def test_single_carrier_pure_rate(self):
        params = SystemParams(
            n_sc=1, total_power_w=1.0, noise_w=1e-9,
            peak_p_w=0.03, peak_q_w=0.03, eh_min_w=0.0,
        )
        ch = ChannelState(h_i=[1e-4], h_e=[0.0], h_j=[1e-4], g_i=[0.0], g_e=[0.0])
        report = ellipsoid_solve(ch, params)
        assert report.allocation.feasible
        assert report.allocation.p[0] == pytest.approx(min(params.peak_p_w, 1.0), rel=1e-6)
        assert report.allocation.q[0] == 0.0
        expected = math.log2(1.0 + 0.03 * 1e-4 / 1e-9)
        assert report.allocation.secrecy_rate == pytest.approx(expected, rel=1e-9)
        assert report.gap <= 1e-4 * (1.0 + report.dual_bound)

    def test_infeasible_requirement_detected(self, rng):
        n = 4
        ch = random_channel(rng, n)
        params = _params(n, eh_min=0.0)
        impossible = 2.0 * harvest_upper_bound(ch, params)
        params = dataclasses.replace(params, eh_min_w=impossible)
        report = ellipsoid_solve(ch, params)
        assert report.status == STATUS_INFEASIBLE
        assert not report.allocation.feasible
        assert report.iterations == 0

    def test_small_instance_gap_and_cross_check(self):
        from swiptjam.experiments import ExperimentConfig, build_channels

        for trial in range(5):
            params, ch = build_channels(ExperimentConfig(n_sc=4), 10.0, 30.0, 100.0, trial)
            report = ellipsoid_solve(ch, params, EllipsoidConfig(max_iter=500))
            assert report.allocation.feasible
            rel_gap = report.gap / max(report.dual_bound, 1e-12)
            assert rel_gap <= 0.02
            assert report.iterations <= 500
            # weak duality versus an independently computed feasible point
            n = 4
            p = np.full(n, min(params.total_power_w / n, params.peak_p_w))
            budget = params.zeta * float(np.dot(p, ch.h_j))
            q = np.full(n, min(budget / n, params.peak_q_w))
            if evaluate_allocation(p, q, ch, params).feasible:
                assert report.dual_bound >= oracle_secrecy_total(p, q, ch, params.noise_w) - 1e-6

    def test_best_primal_monotone(self, rng):
        n = 8
        ch = random_channel(rng, n)
        params = _params(n, eh_min=1e-6)
        report = ellipsoid_solve(ch, params)
        trace = np.array([v for v in report.primal_trace if math.isfinite(v)])
        assert np.all(np.diff(trace) >= 0.0)

    def test_histogram_totals_match_iteration_count(self, rng):
        n = 8
        ch = random_channel(rng, n)
        params = _params(n, eh_min=1e-6)
        report = ellipsoid_solve(ch, params, EllipsoidConfig(max_iter=100))
        total = sum(report.subproblem_case_histogram.values())
        assert total % n == 0
        assert total // n == len(report.primal_trace)

    def test_deterministic(self, rng):
        n = 8
        ch = random_channel(rng, n)
        params = _params(n, eh_min=1e-6)
        a = ellipsoid_solve(ch, params)
        b = ellipsoid_solve(ch, params)
        assert a.allocation.secrecy_rate == b.allocation.secrecy_rate
        assert a.dual_bound == b.dual_bound
        assert a.iterations == b.iterations

    def test_default_radius_formula(self, rng):
        n = 4
        ch = random_channel(rng, n)
        params = _params(n)
        h_max = max(arr.max() for arr in (ch.h_i, ch.h_e, ch.h_j, ch.g_i, ch.g_e))
        assert default_radius(ch, params) == pytest.approx(
            10.0 * h_max / (params.noise_w * math.log(2.0)), rel=1e-12
        )
