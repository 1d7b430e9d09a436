"""Unit tests for the system model: conversions, rates, constraints, f1/f2."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swiptjam.model import (
    ChannelState,
    DegenerateChannelError,
    DualPoint,
    PowerAllocation,
    ScSnapshot,
    SystemParams,
    dbm_to_watts,
    eval_constraints,
    evaluate_allocation,
    f1,
    f2,
    microwatts_to_watts,
    sc_lagrangian,
    sc_rates,
    threshold_a,
    watts_to_dbm,
    LN2,
)
from conftest import random_snapshot


class TestUnits:
    def test_dbm_reference_points(self):
        assert dbm_to_watts(30.0) == 1.0
        assert dbm_to_watts(0.0) == pytest.approx(1e-3, rel=1e-15)
        # noise power -60 dBm used throughout the experiments
        assert dbm_to_watts(-60.0) == pytest.approx(1e-9, rel=1e-15)

    @given(st.floats(min_value=-12.0, max_value=3.0))
    @settings(max_examples=200, deadline=None)
    def test_roundtrip(self, exponent):
        x = 10.0 ** exponent
        assert dbm_to_watts(watts_to_dbm(x)) == pytest.approx(x, rel=1e-12)

    def test_watts_to_dbm_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            watts_to_dbm(0.0)

    def test_microwatts(self):
        assert microwatts_to_watts(700.0) == pytest.approx(7e-4, rel=1e-15)


class TestThreshold:
    def test_clipped_when_ir_hears_better(self):
        sc = ScSnapshot.from_gains(1e-6, 5e-7, 1e-6, 1e-6, 1e-6, 1e-9)
        assert threshold_a(sc) == 0.0

    def test_zero_at_equal_gains(self):
        sc = ScSnapshot.from_gains(1e-6, 1e-6, 1e-6, 1e-6, 1e-6, 1e-9)
        assert threshold_a(sc) == 0.0

    def test_hand_evaluated_threshold(self):
        # noise*(h_e - h_i)/(h_i*g_e) = 1e-9 * 1e-6 / 1e-12
        sc = ScSnapshot.from_gains(1e-6, 2e-6, 1e-6, 1e-6, 1e-6, 1e-9)
        assert threshold_a(sc) == pytest.approx(1e-3, rel=1e-12)

    def test_degenerate_dead_direct_link(self):
        sc = ScSnapshot.from_gains(0.0, 2e-6, 1e-6, 1e-6, 1e-6, 1e-9)
        assert sc.degenerate
        with pytest.raises(DegenerateChannelError):
            threshold_a(sc)

    def test_degenerate_unjammable_eavesdropper(self):
        sc = ScSnapshot.from_gains(1e-6, 2e-6, 1e-6, 1e-6, 0.0, 1e-9)
        assert sc.degenerate
        with pytest.raises(DegenerateChannelError):
            threshold_a(sc)

    def test_zero_ge_harmless_when_ir_hears_better(self):
        sc = ScSnapshot.from_gains(2e-6, 1e-6, 1e-6, 1e-6, 0.0, 1e-9)
        assert not sc.degenerate
        assert threshold_a(sc) == 0.0

    def test_snapshot_stores_matching_threshold(self, rng):
        for _ in range(200):
            sc = random_snapshot(rng)
            if not sc.degenerate:
                assert sc.a_threshold == threshold_a(sc)


class TestScRates:
    def test_zero_power(self):
        sc = ScSnapshot.from_gains(1e-6, 2e-6, 1e-6, 1e-6, 1e-6, 1e-9)
        assert sc_rates(0.0, 0.0, sc) == (0.0, 0.0, 0.0)

    def test_unit_rate_no_eavesdropper(self):
        sc = ScSnapshot.from_gains(1e-6, 0.0, 1e-6, 1e-6, 1e-6, 1e-9)
        r, r_e, big_r = sc_rates(1e-3, 0.0, sc)  # p*h_i = noise
        assert r == pytest.approx(1.0, rel=1e-12)
        assert r_e == 0.0
        assert big_r == pytest.approx(1.0, rel=1e-12)

    def test_hand_evaluated_rates(self):
        # p*h_i/noise = 3 -> r = log2(4) = 2
        # p*h_e/(noise + q*g_e) = 2e-9/2e-9 = 1 -> r_e = 1; A = 0 since h_e < h_i
        sc = ScSnapshot.from_gains(3e-6, 2e-6, 1e-6, 1e-6, 1e-6, 1e-9)
        r, r_e, big_r = sc_rates(1e-3, 1e-3, sc)
        assert r == pytest.approx(2.0, rel=1e-12)
        assert r_e == pytest.approx(1.0, rel=1e-12)
        assert big_r == pytest.approx(1.0, rel=1e-12)

    def test_branch_structure_matches_clipping(self, rng):
        # R equals max(0, r - r_e) above the threshold and 0 below it
        for _ in range(10_000):
            sc = random_snapshot(rng)
            p = rng.uniform(0.0, 0.05)
            q = rng.uniform(0.0, 0.05)
            r, r_e, big_r = sc_rates(p, q, sc)
            if not sc.degenerate and q >= sc.a_threshold:
                assert big_r == max(0.0, r - r_e)
            else:
                assert big_r == 0.0

    def test_rejects_negative_power(self):
        sc = ScSnapshot.from_gains(1e-6, 2e-6, 1e-6, 1e-6, 1e-6, 1e-9)
        with pytest.raises(ValueError):
            sc_rates(-1e-9, 0.0, sc)


def _alloc(p, q):
    return PowerAllocation(np.asarray(p, float), np.asarray(q, float), 0.0, True)


class TestConstraints:
    def test_all_zero_no_requirement(self, small_params):
        n = small_params.n_sc
        ch = ChannelState(*(np.full(n, 1e-6) for _ in range(5)))
        sp, sj, se = eval_constraints(_alloc(np.zeros(n), np.zeros(n)), ch, small_params)
        assert sp == small_params.total_power_w
        assert sj == 0.0
        assert se == 0.0

    def test_all_zero_with_requirement_infeasible(self, small_params):
        import dataclasses

        params = dataclasses.replace(small_params, eh_min_w=1e-4)
        n = params.n_sc
        ch = ChannelState(*(np.full(n, 1e-6) for _ in range(5)))
        _, _, se = eval_constraints(_alloc(np.zeros(n), np.zeros(n)), ch, params)
        assert se == -1e-4
        assert not evaluate_allocation(np.zeros(n), np.zeros(n), ch, params).feasible

    def test_direct_substitution(self):
        params = SystemParams(
            n_sc=2, total_power_w=2.0, noise_w=1e-9, peak_p_w=2.0, peak_q_w=2.0, zeta=1.0
        )
        ch = ChannelState(
            h_i=[1e-6, 1e-6], h_e=[1e-6, 1e-6], h_j=[1e-6, 1e-6],
            g_i=[1e-6, 1e-6], g_e=[1e-6, 1e-6],
        )
        sp, sj, _ = eval_constraints(_alloc([1.0, 1.0], [1e-6, 1e-6]), ch, params)
        assert sp == 0.0
        assert sj == pytest.approx(0.0, abs=1e-18)

    def test_length_mismatch(self, small_params):
        ch = ChannelState(*(np.full(small_params.n_sc, 1e-6) for _ in range(5)))
        with pytest.raises(ValueError):
            eval_constraints(_alloc([0.0], [0.0]), ch, small_params)


class TestLagrangian:
    def test_origin_is_zero_when_threshold_positive(self):
        sc = ScSnapshot.from_gains(1e-6, 2e-6, 1e-6, 1e-6, 1e-6, 1e-9)
        assert sc.a_threshold > 0.0
        assert sc_lagrangian(0.0, 0.0, sc, DualPoint(1.0, 2.0, 3.0)) == 0.0

    def test_zero_multipliers_zero_transmit(self):
        sc = ScSnapshot.from_gains(1e-6, 5e-7, 1e-6, 1e-6, 1e-6, 1e-9)
        assert sc_lagrangian(0.0, 1e-3, sc, DualPoint(0.0, 0.0, 0.0)) == 0.0

    def test_direct_substitution(self):
        # p = 0 keeps R = 0; the multiplier terms reduce to q*(-beta + mu*g_e)
        sc = ScSnapshot.from_gains(1e-6, 5e-7, 1e-6, 1e-6, 1e-6, 1e-9)
        val = sc_lagrangian(0.0, 1e-3, sc, DualPoint(0.0, 1.0, 2.0))
        assert val == pytest.approx(1e-3 * (-1.0 + 2e-6), rel=1e-12)


class TestDerivatives:
    def test_f1_cancellation_at_threshold(self, rng):
        # at (p, q) = (0, A) the two rate-derivative terms cancel exactly
        checked = 0
        while checked < 300:
            sc = random_snapshot(rng)
            if sc.degenerate or sc.a_threshold <= 0.0:
                continue
            nu = DualPoint(*(10.0 ** rng.uniform(-2, 4, 3)))
            expected = -nu.lam + nu.beta * sc.h_j + nu.mu * sc.h_e
            got = f1(0.0, sc.a_threshold, sc, nu)
            assert abs(got - expected) <= 1e-9 * (1.0 + abs(got))
            checked += 1

    def test_f1_scalar_value(self):
        sc = ScSnapshot.from_gains(1e-6, 0.0, 1e-6, 1e-6, 1e-6, 1e-9)
        nu = DualPoint(0.0, 0.0, 0.0)
        assert f1(0.0, 0.0, sc, nu) == pytest.approx(1e3 / LN2, rel=1e-12)

    def test_f1_monotone(self, rng):
        # strictly decreasing in p; strictly increasing in q above the threshold
        checked = 0
        while checked < 300:
            sc = random_snapshot(rng)
            if sc.degenerate or sc.h_e <= 0.0 or sc.g_e <= 0.0:
                continue
            nu = DualPoint(*(10.0 ** rng.uniform(-2, 4, 3)))
            q = sc.a_threshold + rng.uniform(0.0, 0.03)
            p1, p2 = sorted(rng.uniform(0.0, 0.03125, 2))
            if p2 - p1 > 1e-9:
                a, b = f1(p1, q, sc, nu), f1(p2, q, sc, nu)
                assert a > b - 1e-12 * (1.0 + abs(a))
            q1, q2 = sorted(sc.a_threshold + rng.uniform(0.0, 0.03125, 2))
            p = rng.uniform(0.0, 0.03125)
            if q2 - q1 > 1e-9:
                a, b = f1(p, q1, sc, nu), f1(p, q2, sc, nu)
                assert b > a - 1e-12 * (1.0 + abs(a))
            checked += 1

    def test_f2_zero_transmit_power(self, rng):
        for _ in range(100):
            sc = random_snapshot(rng)
            nu = DualPoint(*(10.0 ** rng.uniform(-2, 4, 3)))
            assert f2(0.0, rng.uniform(0, 0.03), sc, nu) == -nu.beta + nu.mu * sc.g_e

    def test_f2_positive_without_multipliers(self, rng):
        nu = DualPoint(0.0, 0.0, 0.0)
        for _ in range(100):
            sc = random_snapshot(rng)
            if sc.h_e > 0.0 and sc.g_e > 0.0:
                assert f2(1e-3, rng.uniform(0, 0.03), sc, nu) > 0.0

    def test_f2_scalar_value(self):
        sc = ScSnapshot.from_gains(1e-6, 2e-6, 1e-6, 1e-6, 1e-6, 1e-9)
        nu = DualPoint(0.0, 0.0, 0.0)
        # 2e-15 / (ln2 * 3e-9 * 1e-9)
        assert f2(1e-3, 0.0, sc, nu) == pytest.approx(2e-15 / (LN2 * 3e-18), rel=1e-12)

    def test_f2_decreasing_in_q(self, rng):
        checked = 0
        while checked < 300:
            sc = random_snapshot(rng)
            if sc.degenerate or sc.h_e <= 0.0 or sc.g_e <= 0.0:
                continue
            nu = DualPoint(*(10.0 ** rng.uniform(-2, 4, 3)))
            q1, q2 = sorted(rng.uniform(0.0, 0.03125, 2))
            if q2 - q1 > 1e-9:
                a, b = f2(1e-3, q1, sc, nu), f2(1e-3, q2, sc, nu)
                assert a > b - 1e-12 * (1.0 + abs(a))
            checked += 1


class TestValueObjects:
    def test_dual_point_rejects_negative(self):
        with pytest.raises(ValueError):
            DualPoint(-1.0, 0.0, 0.0)
        with pytest.raises(ValueError):
            DualPoint(0.0, math.nan, 0.0)

    def test_channel_state_immutable(self):
        ch = ChannelState(*(np.full(3, 1e-6) for _ in range(5)))
        with pytest.raises(ValueError):
            ch.h_i[0] = 2.0

    def test_channel_state_rejects_mixed_lengths(self):
        with pytest.raises(ValueError):
            ChannelState([1e-6], [1e-6, 2e-6], [1e-6], [1e-6], [1e-6])

    def test_channel_state_rejects_negative(self):
        with pytest.raises(ValueError):
            ChannelState([-1e-6], [1e-6], [1e-6], [1e-6], [1e-6])

    def test_system_params_validation(self):
        with pytest.raises(ValueError):
            SystemParams(0, 1.0, 1e-9, 0.1, 0.1)
        with pytest.raises(ValueError):
            SystemParams(4, 1.0, 1e-9, 0.1, 0.1, zeta=1.5)
        with pytest.raises(ValueError):
            SystemParams(4, 1.0, 1e-9, 0.1, 0.1, eh_min_w=-1.0)

    def test_from_scenario_defaults(self):
        params = SystemParams.from_scenario()
        assert params.n_sc == 64
        assert params.total_power_w == 1.0
        assert params.noise_w == pytest.approx(1e-9, rel=1e-15)
        assert params.peak_p_w == pytest.approx(2.0 / 64, rel=1e-15)
        assert params.peak_q_w == params.peak_p_w
        assert params.eh_min_w == pytest.approx(1e-4, rel=1e-15)
        assert params.zeta == 1.0
