"""System model for secure OFDM power allocation with a wireless-powered jammer.

Scenario: a transmitter sends an OFDM information signal to an information
receiver (IR) while an energy receiver (ER) harvests power from the same
signal and may eavesdrop on it. A full-duplex friendly jammer harvests energy
from the transmit signal and simultaneously radiates a jamming waveform that
degrades the ER's reception; the IR knows the jamming sequence and cancels it.

Everything in this module works in linear units: watts for power, plain
ratios for channel power gains, bits (log base 2) for rates. dBm / dB / uW
conversions exist for the I/O boundary only.

All types are immutable value objects and every function is pure, so the
whole module is safe to use from concurrent workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LN2 = math.log(2.0)

# Linear channel gain at 1 m reference distance. Calibrated so that under the
# default geometry the harvested-power sweep (0..700 uW) reaches the
# feasibility boundary of equal power allocation while the optimized scheme
# stays feasible throughout and the no-jammer scheme stays marginal.
DEFAULT_REF_GAIN_DB = -1.2


class DegenerateChannelError(ValueError):
    """Secrecy threshold undefined on a subcarrier.

    Raised when the direct link is dead (h_i = 0), or the jammer cannot reach
    the eavesdropper (g_e = 0) while the eavesdropper outhears the IR
    (h_e > h_i). No finite jamming power yields positive secrecy there.
    """


# ---------------------------------------------------------------------------
# Unit conversions


def dbm_to_watts(x_dbm: float) -> float:
    """30 dBm -> 1 W, 0 dBm -> 1 mW."""
    return 10.0 ** ((x_dbm - 30.0) / 10.0)


def watts_to_dbm(x_w: float) -> float:
    if x_w <= 0.0:
        raise ValueError(f"dBm undefined for non-positive power {x_w!r}")
    return 10.0 * math.log10(x_w) + 30.0


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


def microwatts_to_watts(x_uw: float) -> float:
    return x_uw * 1e-6


# ---------------------------------------------------------------------------
# Value types


def _readonly_array(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    if np.any(arr < 0.0):
        raise ValueError(f"{name} contains negative entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SystemParams:
    """Scenario constants.

    peak_p_w / peak_q_w are per-subcarrier caps. They may be small enough
    that n_sc * peak_p_w < total_power_w, in which case the peaks bind
    before the total-power budget does.
    """

    n_sc: int
    total_power_w: float
    noise_w: float          # per-subcarrier noise power
    peak_p_w: float
    peak_q_w: float
    eh_min_w: float = 0.0   # minimum harvested power required at the ER
    zeta: float = 1.0       # jammer energy-conversion efficiency
    ploss_exp: float = 3.0
    ref_gain: float = db_to_linear(DEFAULT_REF_GAIN_DB)

    def __post_init__(self) -> None:
        if self.n_sc < 1:
            raise ValueError("n_sc must be at least 1")
        for name in ("total_power_w", "noise_w", "peak_p_w", "peak_q_w"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be positive")
        if self.eh_min_w < 0.0:
            raise ValueError("eh_min_w must be non-negative")
        if not 0.0 < self.zeta <= 1.0:
            raise ValueError("zeta must lie in (0, 1]")
        if self.ploss_exp <= 0.0 or self.ref_gain <= 0.0:
            raise ValueError("path-loss parameters must be positive")

    @classmethod
    def from_scenario(
        cls,
        n_sc: int = 64,
        p_dbm: float = 30.0,
        sigma2_dbm: float = -60.0,
        qbar_uw: float = 100.0,
        peak_factor: float = 2.0,
        zeta: float = 1.0,
        ploss_exp: float = 3.0,
        ref_gain_db: float = DEFAULT_REF_GAIN_DB,
    ) -> "SystemParams":
        """Build params from the conventional dBm/uW scenario description."""
        total = dbm_to_watts(p_dbm)
        peak = peak_factor * total / n_sc
        return cls(
            n_sc=n_sc,
            total_power_w=total,
            noise_w=dbm_to_watts(sigma2_dbm),
            peak_p_w=peak,
            peak_q_w=peak,
            eh_min_w=microwatts_to_watts(qbar_uw),
            zeta=zeta,
            ploss_exp=ploss_exp,
            ref_gain=db_to_linear(ref_gain_db),
        )


@dataclass(frozen=True)
class ChannelState:
    """Per-subcarrier channel power gains for the five links."""

    h_i: np.ndarray  # Tx -> IR
    h_e: np.ndarray  # Tx -> ER
    h_j: np.ndarray  # Tx -> jammer
    g_i: np.ndarray  # jammer -> IR
    g_e: np.ndarray  # jammer -> ER

    _FIELDS = ("h_i", "h_e", "h_j", "g_i", "g_e")

    def __post_init__(self) -> None:
        n = None
        for name in self._FIELDS:
            arr = _readonly_array(getattr(self, name), name)
            if n is None:
                n = arr.shape[0]
            elif arr.shape[0] != n:
                raise ValueError("all gain arrays must have equal length")
            object.__setattr__(self, name, arr)

    @property
    def n_sc(self) -> int:
        return int(self.h_i.shape[0])


@dataclass(frozen=True)
class DualPoint:
    """Non-negative multipliers for the three coupling constraints.

    lam: total transmit power; beta: jammer harvested-energy budget;
    mu: ER minimum harvested power.
    """

    lam: float
    beta: float
    mu: float

    def __post_init__(self) -> None:
        for name in ("lam", "beta", "mu"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0.0):
                raise ValueError(f"{name} must be finite and non-negative")

    def as_array(self) -> np.ndarray:
        return np.array([self.lam, self.beta, self.mu], dtype=np.float64)

    @classmethod
    def from_array(cls, v) -> "DualPoint":
        return cls(float(v[0]), float(v[1]), float(v[2]))


def _threshold(h_i: float, h_e: float, g_e: float, noise_w: float) -> tuple[float, bool]:
    """Secrecy threshold and a degeneracy flag (True means 'infinite')."""
    if h_i <= 0.0 or (g_e <= 0.0 and h_e > h_i):
        return 0.0, True
    if h_e <= h_i:
        return 0.0, False
    return noise_w * (h_e - h_i) / (h_i * g_e), False


@dataclass(frozen=True)
class ScSnapshot:
    """One subcarrier's scalar gains plus its precomputed secrecy threshold.

    degenerate marks subcarriers where no finite jamming power enables
    positive secrecy; a_threshold is stored as 0 there and must not be
    interpreted (treat it as infinite).
    """

    h_i: float
    h_e: float
    h_j: float
    g_i: float
    g_e: float
    noise_w: float
    a_threshold: float
    degenerate: bool = False

    @classmethod
    def from_gains(
        cls, h_i: float, h_e: float, h_j: float, g_i: float, g_e: float, noise_w: float
    ) -> "ScSnapshot":
        a, deg = _threshold(h_i, h_e, g_e, noise_w)
        return cls(h_i, h_e, h_j, g_i, g_e, noise_w, a, deg)

    @classmethod
    def from_channel(cls, ch: ChannelState, n: int, params: SystemParams) -> "ScSnapshot":
        """Snapshot of subcarrier n.

        h_j is pre-scaled by the energy-conversion efficiency so that every
        multiplier term in the per-subcarrier objective is per watt of
        transmit power regardless of zeta.
        """
        return cls.from_gains(
            float(ch.h_i[n]),
            float(ch.h_e[n]),
            params.zeta * float(ch.h_j[n]),
            float(ch.g_i[n]),
            float(ch.g_e[n]),
            params.noise_w,
        )


@dataclass(frozen=True)
class PowerAllocation:
    """Per-subcarrier transmit/jamming powers and the achieved objective."""

    p: np.ndarray
    q: np.ndarray
    secrecy_rate: float  # bits, summed over subcarriers
    feasible: bool

    def __post_init__(self) -> None:
        p = _readonly_array(self.p, "p")
        q = _readonly_array(self.q, "q")
        if p.shape != q.shape:
            raise ValueError("p and q must have equal length")
        if self.secrecy_rate < 0.0:
            raise ValueError("secrecy_rate must be non-negative")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)


# ---------------------------------------------------------------------------
# Rates, constraints, per-subcarrier objective


def threshold_a(sc: ScSnapshot) -> float:
    """Minimum jamming power for positive secrecy on this subcarrier."""
    a, deg = _threshold(sc.h_i, sc.h_e, sc.g_e, sc.noise_w)
    if deg:
        raise DegenerateChannelError(
            "secrecy threshold undefined: "
            f"h_i={sc.h_i!r}, h_e={sc.h_e!r}, g_e={sc.g_e!r}"
        )
    return a


def sc_rates(p: float, q: float, sc: ScSnapshot) -> tuple[float, float, float]:
    """IR rate, ER rate and secrecy rate (bits) on one subcarrier."""
    if p < 0.0 or q < 0.0:
        raise ValueError("powers must be non-negative")
    r = math.log1p(p * sc.h_i / sc.noise_w) / LN2
    r_e = math.log1p(p * sc.h_e / (sc.noise_w + q * sc.g_e)) / LN2
    if sc.degenerate or q < sc.a_threshold:
        big_r = 0.0
    else:
        big_r = max(0.0, r - r_e)
    return r, r_e, big_r


def secrecy_rates(p: np.ndarray, q: np.ndarray, ch: ChannelState, params: SystemParams) -> np.ndarray:
    """Vectorized per-subcarrier secrecy rates (bits)."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    s2 = params.noise_w
    a, deg = threshold_array(ch, params)
    r = np.log1p(p * ch.h_i / s2) / LN2
    r_e = np.log1p(p * ch.h_e / (s2 + q * ch.g_e)) / LN2
    active = np.logical_and(~deg, q >= a)
    return np.where(active, np.maximum(0.0, r - r_e), 0.0)


def threshold_array(ch: ChannelState, params: SystemParams) -> tuple[np.ndarray, np.ndarray]:
    """Thresholds and degeneracy flags for all subcarriers."""
    deg = (ch.h_i <= 0.0) | ((ch.g_e <= 0.0) & (ch.h_e > ch.h_i))
    a = np.zeros(ch.n_sc)
    pos = ~deg & (ch.h_e > ch.h_i)
    a[pos] = params.noise_w * (ch.h_e[pos] - ch.h_i[pos]) / (ch.h_i[pos] * ch.g_e[pos])
    return a, deg


def eval_constraints(
    alloc: PowerAllocation, ch: ChannelState, params: SystemParams
) -> tuple[float, float, float]:
    """Slacks of the three coupling constraints; all >= 0 iff satisfied.

    Order: total transmit power, jammer harvested-energy budget, ER minimum
    harvested power.
    """
    if alloc.p.shape[0] != ch.n_sc:
        raise ValueError("allocation length does not match channel state")
    slack_power = params.total_power_w - float(alloc.p.sum())
    slack_jammer = params.zeta * float(np.dot(alloc.p, ch.h_j)) - float(alloc.q.sum())
    slack_eh = float(np.dot(alloc.p, ch.h_e) + np.dot(alloc.q, ch.g_e)) - params.eh_min_w
    return slack_power, slack_jammer, slack_eh


def allocation_feasible(
    p: np.ndarray, q: np.ndarray, ch: ChannelState, params: SystemParams, rtol: float = 1e-9
) -> bool:
    """Check boxes and coupling constraints with a relative tolerance."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    box_tol_p = rtol * (1.0 + params.peak_p_w)
    box_tol_q = rtol * (1.0 + params.peak_q_w)
    if np.any(p < -box_tol_p) or np.any(p > params.peak_p_w + box_tol_p):
        return False
    if np.any(q < -box_tol_q) or np.any(q > params.peak_q_w + box_tol_q):
        return False
    sp = params.total_power_w - float(p.sum())
    sj = params.zeta * float(np.dot(p, ch.h_j)) - float(q.sum())
    se = float(np.dot(p, ch.h_e) + np.dot(q, ch.g_e)) - params.eh_min_w
    return (
        sp >= -rtol * (1.0 + params.total_power_w)
        and sj >= -rtol * (1.0 + params.zeta * float(np.dot(p, ch.h_j)))
        and se >= -rtol * (1.0 + params.eh_min_w)
    )


def evaluate_allocation(
    p: np.ndarray, q: np.ndarray, ch: ChannelState, params: SystemParams
) -> PowerAllocation:
    """Bundle powers with their achieved secrecy rate and feasibility flag."""
    rate = float(secrecy_rates(p, q, ch, params).sum())
    return PowerAllocation(
        p=np.asarray(p, dtype=np.float64),
        q=np.asarray(q, dtype=np.float64),
        secrecy_rate=rate,
        feasible=allocation_feasible(p, q, ch, params),
    )


def sc_lagrangian(p: float, q: float, sc: ScSnapshot, nu: DualPoint) -> float:
    """Per-subcarrier dual objective: secrecy rate plus multiplier terms."""
    _, _, big_r = sc_rates(p, q, sc)
    return (
        big_r
        - nu.lam * p
        + nu.beta * (p * sc.h_j - q)
        + nu.mu * (p * sc.h_e + q * sc.g_e)
    )


def f1(p: float, q: float, sc: ScSnapshot, nu: DualPoint) -> float:
    """d/dp of the per-subcarrier dual objective on the positive branch (q >= A)."""
    s2 = sc.noise_w
    return (
        sc.h_i / (LN2 * (s2 + p * sc.h_i))
        - sc.h_e / (LN2 * (s2 + q * sc.g_e + p * sc.h_e))
        - nu.lam
        + nu.beta * sc.h_j
        + nu.mu * sc.h_e
    )


def f2(p: float, q: float, sc: ScSnapshot, nu: DualPoint) -> float:
    """d/dq of the per-subcarrier dual objective on the positive branch (q >= A)."""
    s2 = sc.noise_w
    denom = LN2 * (s2 + q * sc.g_e + p * sc.h_e) * (s2 + q * sc.g_e)
    return p * sc.h_e * sc.g_e / denom - nu.beta + nu.mu * sc.g_e
