"""Scenario generation, end-to-end transmission pipelines, benchmark schemes
and the seeded Monte Carlo harness.

Two frameworks are simulated.  ``single``: each cluster's two users share one
angular direction and the cluster's analog beam focuses on the high-QoS user's
location.  ``split``: the users sit at different directions and the cluster's
analog beam is split across two sub-arrays, one per user.  Benchmarks cover
near-field orthogonal scheduling, far-field beamsteering with time slots, the
far-field split-beam counterpart, and random/fixed antenna splits.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .analog import AntennaSplit, focused_beamformer, split_beamformer, split_steered_beamformer
from .digital import IllConditionedGramError, beamspace_channels, svd_cluster_channel, svd_zf_digital, zf_digital
from .geometry import ArrayGeometry, Cluster, UserLocation, cluster_channels
from .matching import MatchingContext, allocate_antennas, min_antennas, strategy_set
from .power import (
    QosThresholds,
    find_feasible,
    solve_single_focus,
    solve_split_focus,
)
from .rates import HIGH, LOW, EffectiveGains, inter_cluster_interference, rate_report, sic_condition
from .solver import InfeasibleError, SolverOptions

log = logging.getLogger("nfnoma.scenarios")


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0) / 1000.0


def watts_to_dbm(watts: float) -> float:
    return 10.0 * math.log10(watts * 1000.0)


_DEFAULT_RADIUS_RANGES = ((30.0, 50.0), (35.0, 55.0), (60.0, 80.0), (40.0, 60.0))
_DEFAULT_ANGLES_SINGLE = ((-40.0, -30.0), (-5.0, 5.0), (-5.0, 5.0), (30.0, 40.0))
_DEFAULT_ANGLES_SPLIT = ((-40.0, -30.0), (-15.0, -5.0), (5.0, 15.0), (30.0, 40.0))


@dataclass(frozen=True)
class ScenarioConfig:
    """One operating point of the simulated system.

    Angle ranges are degrees within the +/-60 degree service sector; the
    ``same_angle_pairs`` entries (1-based ``(copy, source)``) force a cluster
    to reuse another's direction, which is how two clusters end up stacked in
    range along one azimuth.
    """

    framework: str
    seed: int
    num_antennas: int = 512
    num_rf_chains: int = 4
    wavelength: float = 0.01
    spacing: float | None = None
    noise_w: float = dbm_to_watts(-90.0)
    p_max_w: float = dbm_to_watts(30.0)
    rate_min_high: float = 6.0
    rate_min_low: float = 0.5
    aod_offset_deg: float | None = None
    n_min_fraction: float = 0.2
    h_user: str = "far"
    angle_ranges_deg: tuple = None
    radius_ranges_m: tuple = None
    same_angle_pairs: tuple = None
    eta_scale: float | None = None
    # Power ratio assumed while ranking antenna splits: the objective is the
    # high-QoS sum rate, so the beam ranking weighs the high-QoS link heavily;
    # a role-blind split would steer antennas toward the nearer (stronger) user.
    matching_low_power_fraction: float = 0.05

    def __post_init__(self):
        if self.framework not in ("single", "split"):
            raise ValueError(f"framework must be 'single' or 'split', got {self.framework!r}")
        if self.h_user not in ("far", "near"):
            raise ValueError(f"h_user must be 'far' or 'near', got {self.h_user!r}")
        if self.num_rf_chains < 1:
            raise ValueError("need at least one RF chain")
        if self.aod_offset_deg is None:
            object.__setattr__(
                self, "aod_offset_deg", 0.1 if self.framework == "single" else 1.0
            )
        if self.angle_ranges_deg is None:
            if self.num_rf_chains != 4:
                raise ValueError("angle_ranges_deg must be given when num_rf_chains != 4")
            default = _DEFAULT_ANGLES_SINGLE if self.framework == "single" else _DEFAULT_ANGLES_SPLIT
            object.__setattr__(self, "angle_ranges_deg", default)
        if self.radius_ranges_m is None:
            if self.num_rf_chains != 4:
                raise ValueError("radius_ranges_m must be given when num_rf_chains != 4")
            object.__setattr__(self, "radius_ranges_m", _DEFAULT_RADIUS_RANGES)
        if self.same_angle_pairs is None:
            pairs = ((3, 2),) if (self.framework == "single" and self.num_rf_chains == 4) else ()
            object.__setattr__(self, "same_angle_pairs", pairs)

        m = self.num_rf_chains
        if len(self.angle_ranges_deg) != m or len(self.radius_ranges_m) != m:
            raise ValueError(f"need one angle and one radius range per cluster ({m})")
        for lo, hi in self.angle_ranges_deg:
            if not (-60.0 <= lo <= hi <= 60.0):
                raise ValueError(
                    f"angle_ranges_deg: range ({lo}, {hi}) leaves the [-60, 60] degree sector"
                )
        for lo, hi in self.radius_ranges_m:
            if not (0.0 < lo <= hi):
                raise ValueError(f"radius_ranges_m: invalid range ({lo}, {hi})")
        for dst, src in self.same_angle_pairs:
            if not (1 <= dst <= m and 1 <= src <= m) or dst == src:
                raise ValueError(f"invalid same-angle pair ({dst}, {src})")

    def geometry(self) -> ArrayGeometry:
        spacing = self.spacing if self.spacing is not None else self.wavelength / 2.0
        return ArrayGeometry(self.num_antennas, spacing, self.wavelength)

    def thresholds(self) -> QosThresholds:
        return QosThresholds.uniform(self.num_rf_chains, self.rate_min_high, self.rate_min_low)

    @property
    def eta(self) -> np.ndarray:
        scale = self.eta_scale if self.eta_scale is not None else self.p_max_w
        return np.full(self.num_rf_chains, scale)


def _draw_clusters(config: ScenarioConfig, rng: np.random.Generator) -> list[Cluster]:
    offset = config.aod_offset_deg
    copy_from = {dst - 1: src - 1 for dst, src in config.same_angle_pairs}
    bases: list[float] = []
    clusters: list[Cluster] = []
    for m in range(config.num_rf_chains):
        if m in copy_from:
            base = bases[copy_from[m]]
        else:
            lo, hi = config.angle_ranges_deg[m]
            base = rng.uniform(lo, hi - offset)
        bases.append(base)
        r_lo, r_hi = config.radius_ranges_m[m]
        user_a = UserLocation.from_degrees(rng.uniform(r_lo, r_hi), base)
        user_b = UserLocation.from_degrees(rng.uniform(r_lo, r_hi), base + offset)
        far, near = (user_a, user_b) if user_a.radius >= user_b.radius else (user_b, user_a)
        if config.h_user == "far":
            clusters.append(Cluster(high=far, low=near))
        else:
            clusters.append(Cluster(high=near, low=far))
    return clusters


def draw_single_focus_drop(config: ScenarioConfig, rng: np.random.Generator) -> list[Cluster]:
    """User drop for the shared-direction framework (0.1 degree pairing offset)."""
    if config.framework != "single":
        raise ValueError("config is not a single-focus scenario")
    return _draw_clusters(config, rng)


def draw_split_drop(config: ScenarioConfig, rng: np.random.Generator) -> list[Cluster]:
    """User drop for the split-beam framework (1 degree pairing offset)."""
    if config.framework != "split":
        raise ValueError("config is not a split scenario")
    return _draw_clusters(config, rng)


def draw_drop(config: ScenarioConfig, rng: np.random.Generator) -> list[Cluster]:
    if config.framework == "single":
        return draw_single_focus_drop(config, rng)
    return draw_split_drop(config, rng)


def total_interference(p: np.ndarray, gains: EffectiveGains) -> float:
    """Total multi-user interference: inter-cluster power received, summed
    over every user.

    Intra-cluster superposition terms are excluded: they ride the own-cluster
    beam, so they track the delivered signal rather than the leakage the
    beamformers are designed to suppress (and the high-QoS side is removed by
    successive decoding anyway).
    """
    return float(inter_cluster_interference(p, gains).sum())


@dataclass
class TrialResult:
    """Outcome of one scheme on one drop; infeasible trials are flagged, never dropped."""

    scheme: str
    feasible: bool
    sum_rate_high: float
    rates: np.ndarray | None = None       # (M, 2) achieved rates per user
    total_interference: float = float("nan")
    sic_fraction: float | None = None
    diagnostics: dict = field(default_factory=dict)
    error: str = ""


def _infeasible(scheme: str, reason: str) -> TrialResult:
    return TrialResult(scheme=scheme, feasible=False, sum_rate_high=float("nan"), error=reason)


def run_single_focus(clusters, config, options=SolverOptions(), rng=None) -> TrialResult:
    """Pipeline: per-cluster focused analog beam at the high-QoS user, ZF on
    the high-QoS beamspace channels, then the convex power allocation."""
    scheme = "nf-noma-single"
    geo = config.geometry()
    chans = cluster_channels(geo, clusters)
    analog = np.column_stack([focused_beamformer(geo, cl.high) for cl in clusters])
    rows = beamspace_channels(chans.reshape(2 * len(clusters), -1), analog)
    try:
        digital = zf_digital(rows[0::2].conj().T)
    except IllConditionedGramError as err:
        return _infeasible(scheme, str(err))
    gains = EffectiveGains.from_beamformers(chans, analog, digital)
    try:
        sol = solve_single_focus(gains, config.thresholds(), config.p_max_w, config.noise_w, options)
    except InfeasibleError as err:
        return _infeasible(scheme, str(err))
    report = rate_report(sol.p, gains, config.noise_w)
    sic = sic_condition(gains, sol.p, config.noise_w)
    return TrialResult(
        scheme=scheme,
        feasible=True,
        sum_rate_high=float(report.high.sum()),
        rates=report.per_user,
        total_interference=total_interference(sol.p, gains),
        sic_fraction=float(np.mean(sic)),
        diagnostics={"kkt_residual": sol.kkt_residual, "newton_steps": sol.newton_steps},
    )


def _fixed_splits(config) -> list[AntennaSplit]:
    n_min = min_antennas(config.num_antennas, config.n_min_fraction)
    return [AntennaSplit(config.num_antennas - n_min, n_min)] * config.num_rf_chains


def _random_splits(config, rng) -> list[AntennaSplit]:
    n_min = min_antennas(config.num_antennas, config.n_min_fraction)
    strategies = strategy_set(config.num_antennas, n_min)
    picks = rng.integers(0, len(strategies), size=config.num_rf_chains)
    return [strategies[i] for i in picks]


def run_split_focus(
    clusters,
    config,
    options=SolverOptions(),
    rng=None,
    split_mode: str = "matched",
    far_field: bool = False,
) -> TrialResult:
    """Split-beam pipeline: antenna allocation, two-focus analog beams,
    ZF on per-cluster representative channels, then the alternating power
    allocation.

    ``split_mode`` picks the allocation: ``matched`` runs the propose-and-swap
    matching, ``random`` draws a valid split per cluster, ``fixed`` gives the
    low-QoS user the minimum.  ``far_field`` swaps in angle-only sub-beams.
    """
    names = {
        (False, "matched"): "nf-noma-split",
        (False, "random"): "nf-noma-split-rand",
        (False, "fixed"): "nf-noma-split-fixed",
        (True, "matched"): "ff-noma-split",
    }
    scheme = names.get((far_field, split_mode))
    if scheme is None:
        raise ValueError(f"unsupported split scheme: far_field={far_field}, mode={split_mode}")
    geo = config.geometry()
    m = config.num_rf_chains
    chans = cluster_channels(geo, clusters)
    n_min = min_antennas(config.num_antennas, config.n_min_fraction)

    if far_field:
        def beam_builder(cluster, split):
            return split_steered_beamformer(
                geo, split, cluster.high.angle, cluster.low.angle, n_min
            )
    else:
        def beam_builder(cluster, split):
            return split_beamformer(geo, split, cluster.high, cluster.low, n_min)

    diagnostics = {}
    if split_mode == "matched":
        share = config.p_max_w / m
        low_frac = config.matching_low_power_fraction
        p_match = np.tile([share * (1.0 - low_frac), share * low_frac], (m, 1))
        ctx = MatchingContext(
            geometry=geo,
            clusters=clusters,
            channels=chans,
            strategies=strategy_set(config.num_antennas, n_min),
            p=p_match,
            noise=config.noise_w,
            eta=config.eta,
            beam_builder=beam_builder,
        )
        state = allocate_antennas(ctx)
        splits = [ctx.strategies[q] for q in state.assignment]
        diagnostics["swaps"] = state.swaps
        diagnostics["assignment"] = list(state.assignment)
        diagnostics["capped"] = state.capped
    elif split_mode == "random":
        splits = _random_splits(config, rng)
    else:
        splits = _fixed_splits(config)
    diagnostics["splits"] = [(s.num_high, s.num_low) for s in splits]

    analog = np.column_stack(
        [beam_builder(cl, sp) for cl, sp in zip(clusters, splits)]
    )
    rows = beamspace_channels(chans.reshape(2 * m, -1), analog)
    try:
        gbar = np.column_stack(
            [svd_cluster_channel(rows[2 * i : 2 * i + 2].conj().T) for i in range(m)]
        )
        digital = svd_zf_digital(gbar)
    except IllConditionedGramError as err:
        return _infeasible(scheme, str(err))
    gains = EffectiveGains.from_beamformers(chans, analog, digital)
    try:
        sol = solve_split_focus(gains, config.thresholds(), config.p_max_w, config.noise_w, options)
    except InfeasibleError as err:
        return _infeasible(scheme, str(err))
    report = rate_report(sol.p, gains, config.noise_w)
    sic = sic_condition(gains, sol.p, config.noise_w)
    diagnostics.update(
        kkt_residual=sol.kkt_residual,
        fp_iterations=sol.iterations,
        fp_converged=sol.converged,
    )
    return TrialResult(
        scheme=scheme,
        feasible=True,
        sum_rate_high=float(report.high.sum()),
        rates=report.per_user,
        total_interference=total_interference(sol.p, gains),
        sic_fraction=float(np.mean(sic)),
        diagnostics=diagnostics,
    )


def _waterfill(coef: np.ndarray, floors: np.ndarray, budget: float) -> np.ndarray:
    """Maximise ``sum log2(1 + p * coef)`` with per-user floors and a total budget.

    Water level found by bisection; the budget is spent fully.
    """
    if floors.sum() > budget:
        raise InfeasibleError(
            f"rate floors need {floors.sum():.3e} W, budget is {budget:.3e} W",
            residual=float(floors.sum() - budget),
            label="budget",
        )

    def spent(level):
        return np.maximum(floors, level - 1.0 / coef).sum()

    lo = 0.0
    hi = budget + float((1.0 / coef).max())
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if spent(mid) > budget:
            hi = mid
        else:
            lo = mid
    p = np.maximum(floors, lo - 1.0 / coef)
    # distribute any rounding slack onto the unfloored users
    free = p > floors
    slack = budget - p.sum()
    if slack > 0.0 and free.any():
        p[free] += slack / free.sum()
    return p


def run_orthogonal(clusters, config, options=SolverOptions(), rng=None) -> TrialResult:
    """Near-field orthogonal benchmark: the 2M users are randomly split into
    two time slots, each scheduled user gets its own focused beam and RF
    chain, ZF removes in-slot interference and water-filling allocates power
    over the slot subject to the per-slot rate floors.  Reported rates carry
    the 1/2 time-sharing factor."""
    scheme = "nf-oma"
    if rng is None:
        raise ValueError("the orthogonal benchmark needs an RNG for slot scheduling")
    geo = config.geometry()
    m = config.num_rf_chains
    chans = cluster_channels(geo, clusters)
    locations = [(cl.high, cl.low) for cl in clusters]
    flat_locs = [loc for pair in locations for loc in pair]
    order = rng.permutation(2 * m)
    slots = [np.sort(order[:m]), np.sort(order[m:])]

    rate_floors = np.repeat(
        np.array([[config.rate_min_high, config.rate_min_low]]), m, axis=0
    ).ravel()
    rates = np.zeros(2 * m)
    interference = 0.0
    diagnostics = {"slots": [s.tolist() for s in slots]}
    for slot in slots:
        slot_chans = chans.reshape(2 * m, -1)[slot]
        analog = np.column_stack([focused_beamformer(geo, flat_locs[u]) for u in slot])
        rows = beamspace_channels(slot_chans, analog)
        try:
            digital = zf_digital(rows.conj().T)
        except IllConditionedGramError as err:
            return _infeasible(scheme, str(err))
        eff = rows @ digital  # [u, beam]
        own = np.abs(np.diag(eff)) ** 2
        coef = own / config.noise_w
        floors = (2.0 ** rate_floors[slot] - 1.0) / coef
        try:
            p = _waterfill(coef, floors, config.p_max_w)
        except InfeasibleError as err:
            return _infeasible(scheme, str(err))
        cross = np.abs(eff) ** 2
        np.fill_diagonal(cross, 0.0)
        received = cross.T @ p  # interference at each scheduled user
        rates[slot] = np.log2(1.0 + p * own / (received + config.noise_w))
        interference += received.sum()

    rates *= 0.5
    interference *= 0.5
    per_user = rates.reshape(m, 2)
    return TrialResult(
        scheme=scheme,
        feasible=True,
        sum_rate_high=float(per_user[:, HIGH].sum()),
        rates=per_user,
        total_interference=float(interference),
        sic_fraction=None,
        diagnostics=diagnostics,
    )


def _slot_partition(clusters, config) -> list[list[int]]:
    """Split angle-colliding clusters across two time slots.

    Clusters whose high-QoS directions sit within a planar beamwidth cannot be
    separated by angle-only beams; each colliding pair is scheduled apart while
    everyone else transmits in both slots.
    """
    m = len(clusters)
    beamwidth = 2.0 / config.num_antennas
    slot_a = set(range(m))
    slot_b = set(range(m))
    for i in range(m):
        for j in range(i + 1, m):
            if abs(clusters[i].high.angle - clusters[j].high.angle) < beamwidth:
                slot_a.discard(j)
                slot_b.discard(i)
    if not slot_a or not slot_b:
        raise InfeasibleError("angle collisions cannot be resolved with two slots")
    return [sorted(slot_a), sorted(slot_b)]


def run_steered_oma(clusters, config, options=SolverOptions(), rng=None) -> TrialResult:
    """Far-field benchmark: angle-only beams toward each high-QoS user.

    Clusters stacked along one azimuth are indistinguishable to planar beams,
    so they are scheduled into different time slots; the remaining clusters
    transmit in both.  Each slot runs ZF plus the convex power allocation, and
    user rates are averaged over the two slots."""
    scheme = "ff-noma-oma"
    geo = config.geometry()
    m = config.num_rf_chains
    chans = cluster_channels(geo, clusters)
    try:
        slots = _slot_partition(clusters, config)
    except InfeasibleError as err:
        return _infeasible(scheme, str(err))

    rates = np.zeros((m, 2))
    interference = 0.0
    sic_flags = []
    diagnostics = {"slots": slots}
    from .geometry import far_field_steering

    for active in slots:
        sub_chans = chans[active]
        analog = np.column_stack(
            [far_field_steering(geo, clusters[i].high.angle) for i in active]
        )
        rows = beamspace_channels(sub_chans.reshape(2 * len(active), -1), analog)
        try:
            digital = zf_digital(rows[0::2].conj().T)
        except IllConditionedGramError as err:
            return _infeasible(scheme, str(err))
        gains = EffectiveGains.from_beamformers(sub_chans, analog, digital)
        thresholds = QosThresholds(
            np.tile([config.rate_min_high, config.rate_min_low], (len(active), 1))
        )
        try:
            sol = solve_single_focus(gains, thresholds, config.p_max_w, config.noise_w, options)
        except InfeasibleError as err:
            return _infeasible(scheme, str(err))
        report = rate_report(sol.p, gains, config.noise_w)
        rates[active] += report.per_user
        interference += total_interference(sol.p, gains)
        sic_flags.extend(sic_condition(gains, sol.p, config.noise_w).tolist())

    rates *= 0.5
    interference *= 0.5
    return TrialResult(
        scheme=scheme,
        feasible=True,
        sum_rate_high=float(rates[:, HIGH].sum()),
        rates=rates,
        total_interference=float(interference),
        sic_fraction=float(np.mean(sic_flags)),
        diagnostics=diagnostics,
    )


def run_scheme(scheme, clusters, config, options=SolverOptions(), rng=None) -> TrialResult:
    runner = {
        "nf-noma-single": lambda: run_single_focus(clusters, config, options),
        "nf-noma-split": lambda: run_split_focus(clusters, config, options),
        "nf-noma-split-rand": lambda: run_split_focus(
            clusters, config, options, rng=rng, split_mode="random"
        ),
        "nf-noma-split-fixed": lambda: run_split_focus(
            clusters, config, options, split_mode="fixed"
        ),
        "ff-noma-split": lambda: run_split_focus(
            clusters, config, options, far_field=True
        ),
        "ff-noma-oma": lambda: run_steered_oma(clusters, config, options),
        "nf-oma": lambda: run_orthogonal(clusters, config, options, rng=rng),
    }
    if scheme not in runner:
        raise ValueError(f"unknown scheme {scheme!r}")
    return runner[scheme]()


SCHEMES_SINGLE = ("nf-noma-single", "ff-noma-oma", "nf-oma")
SCHEMES_SPLIT = (
    "nf-noma-split",
    "nf-noma-split-rand",
    "nf-noma-split-fixed",
    "ff-noma-split",
    "nf-oma",
)
ALL_SCHEMES = SCHEMES_SINGLE + SCHEMES_SPLIT

METRICS = ("sum_rate_high", "total_interference")


def trial_rng(seed: int, trial: int, scheme: str) -> np.random.Generator:
    """Independent, order-insensitive stream for one scheme on one trial."""
    tag = sum(ord(c) * 31**i for i, c in enumerate(scheme)) % (2**32)
    return np.random.default_rng(np.random.SeedSequence((seed, trial, tag)))


def run_trial(config: ScenarioConfig, schemes, trial: int) -> dict[str, TrialResult]:
    """Draw one seeded drop and run every scheme on it."""
    drop = draw_drop(config, np.random.default_rng(np.random.SeedSequence((config.seed, trial))))
    results = {}
    for scheme in schemes:
        rng = trial_rng(config.seed, trial, scheme)
        try:
            results[scheme] = run_scheme(scheme, drop, config, rng=rng)
        except (InfeasibleError, IllConditionedGramError) as err:
            results[scheme] = _infeasible(scheme, str(err))
        if not results[scheme].feasible:
            log.info("trial %d scheme %s infeasible: %s", trial, scheme, results[scheme].error)
    return results


@dataclass
class SweepPoint:
    """All trial results for one value of the sweep variable."""

    variable: str
    value: float
    trials: list[dict[str, TrialResult]]


def sweep_config(config: ScenarioConfig, variable: str, value) -> ScenarioConfig:
    if variable == "pmax_dbm":
        return replace(config, p_max_w=dbm_to_watts(float(value)))
    if variable == "num_antennas":
        return replace(config, num_antennas=int(value))
    raise ValueError(f"unknown sweep variable {variable!r}")


def monte_carlo(
    config: ScenarioConfig,
    variable: str,
    values,
    schemes,
    num_trials: int,
    threads: int = 1,
) -> list[SweepPoint]:
    """Seeded sweep: identical (config, seed) inputs give identical outputs.

    Drops are reused across sweep values (they depend only on the trial
    index), so per-trial curves are directly comparable along the sweep.
    """
    points = []
    for value in values:
        cfg = sweep_config(config, variable, value)
        if threads > 1:
            from concurrent.futures import ProcessPoolExecutor

            with ProcessPoolExecutor(max_workers=threads) as pool:
                trials = list(
                    pool.map(_trial_worker, [(cfg, tuple(schemes), t) for t in range(num_trials)])
                )
        else:
            trials = [run_trial(cfg, schemes, t) for t in range(num_trials)]
        points.append(SweepPoint(variable=variable, value=value, trials=trials))
    return points


def _trial_worker(args):
    cfg, schemes, trial = args
    return run_trial(cfg, schemes, trial)


def aggregate_rows(points: list[SweepPoint], schemes) -> list[dict]:
    """Flatten sweep results into (sweep_var, value, scheme, metric) rows with
    mean, standard error and feasibility counts over the feasible trials."""
    rows = []
    for point in points:
        for scheme in schemes:
            results = [t[scheme] for t in point.trials]
            feasible = [r for r in results if r.feasible]
            n_total = len(results)
            n_feasible = len(feasible)
            for metric in METRICS:
                vals = np.array([getattr(r, metric) for r in feasible])
                if n_feasible > 0:
                    mean = float(vals.mean())
                    stderr = float(vals.std(ddof=1) / math.sqrt(n_feasible)) if n_feasible > 1 else float("nan")
                else:
                    mean = float("nan")
                    stderr = float("nan")
                rows.append(
                    {
                        "sweep_var": point.variable,
                        "value": point.value,
                        "scheme": scheme,
                        "metric": metric,
                        "mean": mean,
                        "stderr": stderr,
                        "n_feasible": n_feasible,
                        "n_total": n_total,
                    }
                )
    return rows
