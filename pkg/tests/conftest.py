"""Shared fixtures and independent oracles.

The oracle helpers re-implement the objective formulas directly (raw math,
no solver imports) so that optimizer results are checked against a path
that shares no code with the thing under test.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from swiptjam.model import ChannelState, DualPoint, ScSnapshot, SystemParams

LN2 = math.log(2.0)


def oracle_sc_objective(p, q, h_i, h_e, g_e, noise, a, degenerate, c_p, c_q):
    """Per-subcarrier dual objective evaluated from the raw formulas.

    Accepts scalars or numpy grids for p and q.
    """
    r = np.log1p(p * h_i / noise) / LN2
    r_e = np.log1p(p * h_e / (noise + q * g_e)) / LN2
    if degenerate:
        big_r = np.zeros(np.broadcast(np.asarray(p), np.asarray(q)).shape)
    else:
        big_r = np.where(q >= a, np.maximum(0.0, r - r_e), 0.0)
    return big_r + c_p * p + c_q * q


def oracle_grid_max(sc: ScSnapshot, nu: DualPoint, pbar, q_lo, q_hi, npts=201):
    """Brute-force maximum of the per-subcarrier objective on a dense grid."""
    p = np.linspace(0.0, pbar, npts)[:, None]
    q = np.linspace(q_lo, q_hi, npts)[None, :]
    c_p = -nu.lam + nu.beta * sc.h_j + nu.mu * sc.h_e
    c_q = -nu.beta + nu.mu * sc.g_e
    vals = oracle_sc_objective(
        p, q, sc.h_i, sc.h_e, sc.g_e, sc.noise_w, sc.a_threshold, sc.degenerate, c_p, c_q
    )
    return float(vals.max())


def oracle_secrecy_total(p, q, ch: ChannelState, noise):
    """Total secrecy rate (cancellation model) from raw formulas."""
    r = np.log1p(p * ch.h_i / noise) / LN2
    r_e = np.log1p(p * ch.h_e / (noise + q * ch.g_e)) / LN2
    return float(np.maximum(0.0, r - r_e).sum())


def random_snapshot(rng, noise=1e-9, log_lo=-7.0, log_hi=-5.0) -> ScSnapshot:
    scale = 10.0 ** rng.uniform(log_lo, log_hi)
    gains = scale * rng.exponential(size=5)
    return ScSnapshot.from_gains(*gains, noise)


def random_dual(rng) -> DualPoint:
    lam, beta, mu = 10.0 ** rng.uniform(-2.0, 4.0, size=3)
    return DualPoint(lam, beta, mu)


def random_channel(rng, n, scale=1e-4) -> ChannelState:
    return ChannelState(
        h_i=scale * rng.exponential(size=n),
        h_e=scale * rng.exponential(size=n),
        h_j=scale * rng.exponential(size=n),
        g_i=scale * rng.exponential(size=n),
        g_e=scale * rng.exponential(size=n),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)


@pytest.fixture
def small_params():
    return SystemParams(
        n_sc=4,
        total_power_w=1.0,
        noise_w=1e-9,
        peak_p_w=0.03125,
        peak_q_w=0.03125,
        eh_min_w=0.0,
    )
