"""Near-field NOMA downlink simulator with hybrid analog/digital beamforming.

The package models a base station whose uniform linear array focuses energy at
points in space rather than directions, letting two users who share a resource
block be separated in range as well as angle.  It provides the beamformer
constructions, rate and interference accounting, power-allocation solvers,
antenna-split matching, benchmark schemes and a seeded Monte Carlo harness.
"""

from .analog import (
    AntennaSplit,
    GainMap,
    array_gain,
    focused_beamformer,
    gain_map,
    gain_map_csv,
    split_beamformer,
    split_focus_gains,
    split_gain_bound,
    split_steered_beamformer,
)
from .digital import (
    IllConditionedGramError,
    beamspace_channels,
    left_singular_2xm,
    svd_cluster_channel,
    svd_zf_digital,
    zf_digital,
)
from .geometry import (
    ArrayGeometry,
    Channel,
    Cluster,
    UserLocation,
    channel,
    cluster_channels,
    element_distance,
    element_distances,
    element_offsets,
    far_field_steering,
    near_field_steering,
    path_loss,
)
from .matching import (
    MatchingContext,
    MatchingState,
    allocate_antennas,
    cluster_utility,
    initial_matching,
    is_swap_blocking,
    min_antennas,
    preference,
    strategy_set,
    strategy_utility,
)
from .power import (
    FpResult,
    PowerSolution,
    QosThresholds,
    find_feasible,
    optimal_beta,
    quadratic_objective,
    sinr_threshold,
    solve_quadratic_inner,
    solve_single_focus,
    solve_split_focus,
)
from .rates import (
    HIGH,
    LOW,
    EffectiveGains,
    RateReport,
    inter_cluster_interference,
    rate_high,
    rate_low,
    rate_low_at_high,
    rate_low_at_low,
    rate_report,
    sic_condition,
    sum_rate_high,
)
from .scenarios import (
    ScenarioConfig,
    TrialResult,
    dbm_to_watts,
    draw_drop,
    draw_single_focus_drop,
    draw_split_drop,
    monte_carlo,
    run_scheme,
    total_interference,
)
from .solver import (
    DomainError,
    InfeasibleError,
    SolverOptions,
    SolverResult,
    maximize_concave,
    strictly_feasible_point,
)

__version__ = "0.1.0"
