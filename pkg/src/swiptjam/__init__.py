"""Secrecy-rate power allocation for OFDM SWIPT with a wireless-powered jammer."""

from .baselines import (
    BaselineResult,
    BcdConfig,
    Scheme,
    bcd_nocancel_solve,
    epa_allocate,
    no_jammer_solve,
    solve_scheme,
)
from .channels import (
    FadingSpec,
    Geometry,
    GeometryConfig,
    channel_gains,
    node_positions,
)
from .dual import (
    EllipsoidConfig,
    EllipsoidState,
    SolveReport,
    dual_value_and_subgrad,
    ellipsoid_solve,
    harvest_upper_bound,
    repair_primal,
)
from .experiments import (
    AggregateRow,
    ConfigError,
    ExperimentConfig,
    ResultRow,
    aggregate,
    parse_config,
    read_csv,
    run_experiment,
    write_csv,
)
from .model import (
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
    sc_lagrangian,
    sc_rates,
    threshold_a,
    watts_to_dbm,
)
from .subproblem import (
    Branch,
    ScSolution,
    chi_p_of_f1,
    chi_q_of_f1,
    chi_q_of_f2,
    joint_root,
    solve_positive_branch,
    solve_sc,
    solve_subcarriers,
    solve_zero_branch,
)

__version__ = "0.1.0"
