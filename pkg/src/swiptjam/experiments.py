"""Experiment configuration, Monte-Carlo sweep orchestration, CSV emission.

A configuration is a flat ``key = value`` document (one pair per line,
``#`` comments). Sweeps run over the harvested-power requirement, the total
transmit power, or the Tx-to-jammer distance; every scheme within one
(sweep value, trial) cell sees the identical channel draw, so scheme
comparisons are paired. Trials run in a process pool capped by the
SWIPT_THREADS environment variable; rows are sorted deterministically before
any output, so repeated runs with the same seed produce identical numbers.
"""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

from .baselines import Scheme, solve_scheme
from .channels import (
    FADING_NONE,
    FADING_RAYLEIGH,
    FadingSpec,
    GeometryConfig,
    channel_gains,
    node_positions,
)
from .model import DEFAULT_REF_GAIN_DB, SystemParams

SWEEP_QBAR = "qbar"
SWEEP_P = "p"
SWEEP_D1 = "d1"
SWEEP_P_X_D1 = "p_x_d1"

CANONICAL_SWEEPS = {
    SWEEP_QBAR: (0.0, 100.0, 200.0, 300.0, 400.0, 500.0, 600.0, 700.0),  # uW
    SWEEP_P: (20.0, 24.0, 28.0, 32.0, 36.0),                             # dBm
    SWEEP_D1: (4.0, 10.0, 16.0),                                         # m
}

SCHEME_ORDER = (Scheme.PROPOSED, Scheme.EPA, Scheme.NO_JAMMER, Scheme.NO_CANCEL_BCD)

CSV_HEADER = (
    "sweep_name,sweep_value,trial,scheme,secrecy_rate_bits,"
    "feasible,iterations,runtime_ms,seed,fading"
)


class ConfigError(ValueError):
    """Malformed experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    n_sc: int = 64
    sigma2_dbm: float = -60.0
    ploss_exp: float = 3.0
    d_tx_ir_m: float = 20.0
    d_tx_er_m: float = 10.0
    er_angle_deg: float = 30.0
    d1_m: float = 10.0
    p_dbm: float = 30.0
    qbar_uw: float = 100.0
    peak_factor: float = 2.0
    zeta: float = 1.0
    fading: str = FADING_RAYLEIGH
    ref_gain_db: float = DEFAULT_REF_GAIN_DB
    seed: int = 1
    trials: int = 1
    sweep: str = SWEEP_QBAR
    sweep_values: tuple[float, ...] = ()
    sweep_values_2: tuple[float, ...] = ()
    schemes: tuple[str, ...] = tuple(s.value for s in SCHEME_ORDER)

    def __post_init__(self) -> None:
        if self.n_sc < 1:
            raise ConfigError("n_sc must be at least 1")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if not 0.0 < self.zeta <= 1.0:
            raise ConfigError("zeta must lie in (0, 1]")
        if not 0.0 < self.d1_m < self.d_tx_ir_m:
            raise ConfigError("d1_m must lie strictly between 0 and d_tx_ir_m")
        if self.fading not in (FADING_NONE, FADING_RAYLEIGH):
            raise ConfigError(f"unknown fading kind {self.fading!r}")
        if self.sweep not in (SWEEP_QBAR, SWEEP_P, SWEEP_D1, SWEEP_P_X_D1):
            raise ConfigError(f"unknown sweep {self.sweep!r}")
        if not self.schemes:
            raise ConfigError("schemes must not be empty")
        valid = {s.value for s in Scheme}
        for name in self.schemes:
            if name not in valid:
                raise ConfigError(f"unknown scheme {name!r}")

_INT_KEYS = {"n_sc", "seed", "trials"}
_FLOAT_KEYS = {
    "sigma2_dbm", "ploss_exp", "d_tx_ir_m", "d_tx_er_m", "er_angle_deg",
    "d1_m", "p_dbm", "qbar_uw", "peak_factor", "zeta", "ref_gain_db",
}
_LIST_KEYS = {"sweep_values", "sweep_values_2"}
_STR_KEYS = {"fading", "sweep"}


def parse_config(text: str) -> ExperimentConfig:
    """Parse a flat key = value document; missing keys take the defaults."""
    fields: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        try:
            if key in _INT_KEYS:
                fields[key] = int(value)
            elif key in _FLOAT_KEYS:
                fields[key] = float(value)
            elif key in _LIST_KEYS:
                fields[key] = tuple(float(v) for v in value.split(",") if v.strip())
                if not fields[key]:
                    raise ConfigError(f"line {lineno}: empty list for {key}")
            elif key in _STR_KEYS:
                fields[key] = value.lower()
            elif key == "schemes":
                fields[key] = tuple(v.strip().lower() for v in value.split(",") if v.strip())
            else:
                raise ConfigError(f"line {lineno}: unknown key {key!r}")
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc
    # Naming a sweep without listing its values selects the canonical grid;
    # a config with no sweep at all runs a single point (handled in _cells).
    if "sweep" in fields and "sweep_values" not in fields:
        grid = SWEEP_P if fields["sweep"] == SWEEP_P_X_D1 else fields["sweep"]
        if grid in CANONICAL_SWEEPS:
            fields["sweep_values"] = CANONICAL_SWEEPS[grid]
    try:
        return ExperimentConfig(**fields)
    except ConfigError as exc:
        raise ConfigError(str(exc)) from exc


@dataclass(frozen=True)
class ResultRow:
    sweep_name: str
    sweep_value: float
    trial: int
    scheme: str
    secrecy_rate_bits: float
    feasible: bool
    iterations: int
    runtime_ms: float
    seed: int
    fading: str


def _cells(cfg: ExperimentConfig) -> list[tuple[str, float, float, float, float]]:
    """(sweep_name, sweep_value, p_dbm, qbar_uw, d1_m) per sweep point."""
    if cfg.sweep == SWEEP_QBAR:
        values = cfg.sweep_values or (cfg.qbar_uw,)
        return [(SWEEP_QBAR, v, cfg.p_dbm, v, cfg.d1_m) for v in values]
    if cfg.sweep == SWEEP_P:
        values = cfg.sweep_values or CANONICAL_SWEEPS[SWEEP_P]
        return [(SWEEP_P, v, v, cfg.qbar_uw, cfg.d1_m) for v in values]
    if cfg.sweep == SWEEP_D1:
        values = cfg.sweep_values or CANONICAL_SWEEPS[SWEEP_D1]
        return [(SWEEP_D1, v, cfg.p_dbm, cfg.qbar_uw, v) for v in values]
    p_values = cfg.sweep_values or CANONICAL_SWEEPS[SWEEP_P]
    d_values = cfg.sweep_values_2 or CANONICAL_SWEEPS[SWEEP_D1]
    return [
        (f"{SWEEP_P}@d1={d:g}", p, p, cfg.qbar_uw, d)
        for d in d_values
        for p in p_values
    ]


def build_channels(cfg: ExperimentConfig, d1_m: float, p_dbm: float, qbar_uw: float, trial: int):
    """Params and paired channel draw for one (sweep value, trial) cell."""
    params = SystemParams.from_scenario(
        n_sc=cfg.n_sc,
        p_dbm=p_dbm,
        sigma2_dbm=cfg.sigma2_dbm,
        qbar_uw=qbar_uw,
        peak_factor=cfg.peak_factor,
        zeta=cfg.zeta,
        ploss_exp=cfg.ploss_exp,
        ref_gain_db=cfg.ref_gain_db,
    )
    geo = GeometryConfig(cfg.d_tx_ir_m, cfg.d_tx_er_m, cfg.er_angle_deg)
    geom = node_positions(d1_m, geo)
    ch = channel_gains(geom, FadingSpec(cfg.fading, cfg.seed, trial), params)
    return params, ch


def _run_cell(args: tuple) -> list[ResultRow]:
    cfg, name, value, p_dbm, qbar_uw, d1_m, trial = args
    params, ch = build_channels(cfg, d1_m, p_dbm, qbar_uw, trial)
    rows = []
    for scheme_name in cfg.schemes:
        t0 = time.perf_counter()
        allocation, iterations = solve_scheme(Scheme(scheme_name), ch, params)
        runtime_ms = (time.perf_counter() - t0) * 1e3
        rows.append(
            ResultRow(
                sweep_name=name,
                sweep_value=value,
                trial=trial,
                scheme=scheme_name,
                secrecy_rate_bits=allocation.secrecy_rate if allocation.feasible else 0.0,
                feasible=allocation.feasible,
                iterations=iterations,
                runtime_ms=runtime_ms,
                seed=cfg.seed,
                fading=cfg.fading,
            )
        )
    return rows


def worker_count(n_tasks: int) -> int:
    env = os.environ.get("SWIPT_THREADS", "")
    try:
        cap = int(env) if env else (os.cpu_count() or 1)
    except ValueError:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n_tasks))


def run_experiment(cfg: ExperimentConfig) -> list[ResultRow]:
    """Run every (sweep value, trial, scheme) cell and return sorted rows.

    Solver infeasibility is recorded per row (feasible = false, rate 0 for
    aggregation); it never aborts the sweep.
    """
    tasks = [
        (cfg, name, value, p_dbm, qbar_uw, d1_m, trial)
        for (name, value, p_dbm, qbar_uw, d1_m) in _cells(cfg)
        for trial in range(cfg.trials)
    ]
    workers = worker_count(len(tasks))
    if workers <= 1:
        nested = [_run_cell(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            nested = list(pool.map(_run_cell, tasks, chunksize=1))
    rows = [row for cell in nested for row in cell]
    rows.sort(key=lambda r: (r.sweep_name, r.sweep_value, r.trial, r.scheme))
    return rows


def write_csv(rows: list[ResultRow], path) -> None:
    """Emit the pinned CSV schema with full-precision numeric fields."""
    if not rows:
        raise ValueError("no rows to write")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER.split(","))
        for r in rows:
            writer.writerow(
                [
                    r.sweep_name,
                    f"{r.sweep_value:.12g}",
                    r.trial,
                    r.scheme,
                    f"{r.secrecy_rate_bits:.12g}",
                    "true" if r.feasible else "false",
                    r.iterations,
                    f"{r.runtime_ms:.3f}",
                    r.seed,
                    r.fading,
                ]
            )


def read_csv(path) -> list[ResultRow]:
    """Parse a results file back into rows (inverse of write_csv)."""
    rows = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            rows.append(
                ResultRow(
                    sweep_name=rec["sweep_name"],
                    sweep_value=float(rec["sweep_value"]),
                    trial=int(rec["trial"]),
                    scheme=rec["scheme"],
                    secrecy_rate_bits=float(rec["secrecy_rate_bits"]),
                    feasible=rec["feasible"] == "true",
                    iterations=int(rec["iterations"]),
                    runtime_ms=float(rec["runtime_ms"]),
                    seed=int(rec["seed"]),
                    fading=rec["fading"],
                )
            )
    return rows


@dataclass(frozen=True)
class AggregateRow:
    sweep_name: str
    sweep_value: float
    scheme: str
    mean_rate_bits: float
    ci_half_width: float
    feasible_fraction: float
    n_trials: int


def aggregate(rows: list[ResultRow]) -> list[AggregateRow]:
    """Mean rate (infeasible rows count as zero) with a 95% CI half-width."""
    groups: dict[tuple[str, float, str], list[ResultRow]] = {}
    for r in rows:
        groups.setdefault((r.sweep_name, r.sweep_value, r.scheme), []).append(r)
    out = []
    for (name, value, scheme), members in sorted(groups.items()):
        rates = [m.secrecy_rate_bits for m in members]
        n = len(rates)
        mean = sum(rates) / n
        if n > 1:
            var = sum((x - mean) ** 2 for x in rates) / (n - 1)
            ci = 1.96 * math.sqrt(var / n)
        else:
            ci = 0.0
        out.append(
            AggregateRow(
                sweep_name=name,
                sweep_value=value,
                scheme=scheme,
                mean_rate_bits=mean,
                ci_half_width=ci,
                feasible_fraction=sum(m.feasible for m in members) / n,
                n_trials=n,
            )
        )
    return out


def format_aggregate_table(aggs: list[AggregateRow]) -> str:
    lines = [
        f"{'sweep':>12} {'value':>10} {'scheme':>10} {'mean_bits':>14} "
        f"{'ci95':>10} {'feasible':>9} {'n':>4}"
    ]
    for a in aggs:
        lines.append(
            f"{a.sweep_name:>12} {a.sweep_value:>10.4g} {a.scheme:>10} "
            f"{a.mean_rate_bits:>14.6f} {a.ci_half_width:>10.4f} "
            f"{a.feasible_fraction:>9.2%} {a.n_trials:>4}"
        )
    return "\n".join(lines)


def single_point_config(cfg: ExperimentConfig) -> ExperimentConfig:
    """Collapse a config to its own operating point (no sweep)."""
    return replace(cfg, sweep=SWEEP_QBAR, sweep_values=(cfg.qbar_uw,), sweep_values_2=())
