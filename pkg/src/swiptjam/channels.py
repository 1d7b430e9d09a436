"""Node geometry and reproducible per-subcarrier channel generation.

Layout: transmitter at the origin, IR on the positive x axis, the jammer
between them at distance d1 from the transmitter, and the ER off-axis at a
fixed range and bearing. Channel power gains follow a distance power law
scaled by the reference gain at 1 m, optionally multiplied by i.i.d.
unit-mean exponential fading (Rayleigh amplitudes) per subcarrier and link.

Fading uses a counter-based generator keyed by (seed, trial) with one
substream per link, so adding a link or resizing one never perturbs the
draws of the others, and paired comparisons across schemes see identical
channels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ChannelState, SystemParams

FADING_NONE = "none"
FADING_RAYLEIGH = "rayleigh"

_LINK_IDS = {"h_i": 0, "h_e": 1, "h_j": 2, "g_i": 3, "g_e": 4}


@dataclass(frozen=True)
class GeometryConfig:
    """Fixed distances of the scenario; d1 varies per experiment."""

    d_tx_ir_m: float = 20.0
    d_tx_er_m: float = 10.0
    er_angle_deg: float = 30.0


@dataclass(frozen=True)
class Geometry:
    """Planar node positions in meters."""

    tx: tuple[float, float]
    ir: tuple[float, float]
    er: tuple[float, float]
    jammer: tuple[float, float]

    def __post_init__(self) -> None:
        nodes = (self.tx, self.ir, self.er, self.jammer)
        for i in range(len(nodes)):
            for j in range(i + 1, len(nodes)):
                if _dist(nodes[i], nodes[j]) <= 0.0:
                    raise ValueError("nodes must occupy distinct positions")


@dataclass(frozen=True)
class FadingSpec:
    """Fading model selector with its reproducibility key."""

    kind: str = FADING_RAYLEIGH
    seed: int = 0
    trial: int = 0

    def __post_init__(self) -> None:
        if self.kind not in (FADING_NONE, FADING_RAYLEIGH):
            raise ValueError(f"unknown fading kind {self.kind!r}")


def _dist(a: tuple[float, float], b: tuple[float, float]) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def node_positions(d1_m: float, geo: GeometryConfig | None = None) -> Geometry:
    """Place the nodes for a given Tx-to-jammer distance."""
    geo = geo or GeometryConfig()
    if not 0.0 < d1_m < geo.d_tx_ir_m:
        raise ValueError(f"d1 must lie strictly between 0 and {geo.d_tx_ir_m} m")
    angle = math.radians(geo.er_angle_deg)
    return Geometry(
        tx=(0.0, 0.0),
        ir=(geo.d_tx_ir_m, 0.0),
        er=(geo.d_tx_er_m * math.cos(angle), geo.d_tx_er_m * math.sin(angle)),
        jammer=(d1_m, 0.0),
    )


def _link_fading(fading: FadingSpec, link: str, n_sc: int) -> np.ndarray:
    if fading.kind == FADING_NONE:
        return np.ones(n_sc)
    key = np.array([np.uint64(fading.seed), np.uint64(fading.trial)], dtype=np.uint64)
    counter = np.zeros(4, dtype=np.uint64)
    counter[3] = np.uint64(_LINK_IDS[link])
    gen = np.random.Generator(np.random.Philox(counter=counter, key=key))
    return gen.standard_exponential(n_sc)


def channel_gains(geom: Geometry, fading: FadingSpec, params: SystemParams) -> ChannelState:
    """Per-subcarrier power gains: ref_gain * distance^(-exponent) * fading."""
    dists = {
        "h_i": _dist(geom.tx, geom.ir),
        "h_e": _dist(geom.tx, geom.er),
        "h_j": _dist(geom.tx, geom.jammer),
        "g_i": _dist(geom.jammer, geom.ir),
        "g_e": _dist(geom.jammer, geom.er),
    }
    gains = {
        link: params.ref_gain * d ** (-params.ploss_exp) * _link_fading(fading, link, params.n_sc)
        for link, d in dists.items()
    }
    return ChannelState(**gains)
