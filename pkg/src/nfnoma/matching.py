"""Many-to-one matching of antenna-split strategies to clusters.

Clusters first propose to strategies ranked by a signal-to-leakage preference
computed on raw channels, then pairs of clusters exchange strategies whenever
the swap weakly improves all four involved utilities and strictly improves at
least one.  Cluster utilities are rate minus a scaled leakage penalty; a
strategy's utility is the system sum high-QoS rate, so executed swaps never
decrease it.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .analog import AntennaSplit
from .digital import (
    IllConditionedGramError,
    beamspace_channels,
    svd_cluster_channel,
    svd_zf_digital,
)
from .geometry import ArrayGeometry, Cluster
from .rates import EffectiveGains, rate_high

log = logging.getLogger("nfnoma.matching")

STRICT_GAIN_MARGIN = 1e-9


def min_antennas(num_antennas: int, fraction: float = 0.2) -> int:
    """Minimum antennas per sub-beam: the fraction of the array, rounded up."""
    return max(1, math.ceil(fraction * num_antennas))


def strategy_set(num_antennas: int, n_min: int) -> list[AntennaSplit]:
    """All splits giving the low-QoS user ``n_min + q`` antennas, q = 0..N - 2 n_min."""
    if n_min < 1:
        raise ValueError(f"minimum per-user antenna count must be positive, got {n_min}")
    if num_antennas < 2 * n_min:
        raise ValueError(
            f"{num_antennas} antennas cannot give both users at least {n_min}"
        )
    return [
        AntennaSplit(num_high=num_antennas - (n_min + q), num_low=n_min + q)
        for q in range(num_antennas - 2 * n_min + 1)
    ]


@dataclass
class _Evaluation:
    feasible: bool
    rates_high: np.ndarray   # (M,)
    leakage: np.ndarray      # (M,) total |gain|^2 each beam places on other clusters' users
    total: float


@dataclass
class MatchingContext:
    """Everything needed to score assignments: channels, strategy space, the
    per-cluster analog builder and the powers assumed while matching."""

    geometry: ArrayGeometry
    clusters: list[Cluster]
    channels: np.ndarray          # (M, 2, N)
    strategies: list[AntennaSplit]
    p: np.ndarray                 # (M, 2) powers assumed during matching
    noise: float
    eta: np.ndarray               # (M,) leakage penalty scales
    beam_builder: object          # callable(cluster, split) -> weights (N,)
    _eval_cache: dict = field(default_factory=dict)
    _pref_cache: dict = field(default_factory=dict)
    _beam_cache: dict = field(default_factory=dict)

    @property
    def num_clusters(self) -> int:
        return len(self.clusters)

    def beam(self, m: int, q: int) -> np.ndarray:
        key = (m, q)
        if key not in self._beam_cache:
            self._beam_cache[key] = self.beam_builder(self.clusters[m], self.strategies[q])
        return self._beam_cache[key]

    def evaluate(self, assignment: tuple[int, ...]) -> _Evaluation:
        """Rates and leakages under a full assignment; cached per assignment."""
        if assignment in self._eval_cache:
            return self._eval_cache[assignment]
        m = self.num_clusters
        analog = np.column_stack([self.beam(i, assignment[i]) for i in range(m)])
        try:
            rows = beamspace_channels(self.channels.reshape(2 * m, -1), analog)
            gbar = np.column_stack(
                [svd_cluster_channel(rows[2 * i : 2 * i + 2].conj().T) for i in range(m)]
            )
            digital = svd_zf_digital(gbar)
        except IllConditionedGramError:
            ev = _Evaluation(False, np.full(m, -np.inf), np.full(m, np.inf), -np.inf)
            self._eval_cache[assignment] = ev
            return ev
        gains = EffectiveGains.from_beamformers(self.channels, analog, digital)
        rates = rate_high(self.p, gains, self.noise)
        cross = gains.cross_power()  # [i, m, k]
        leakage = cross.sum(axis=(1, 2))
        ev = _Evaluation(True, rates, leakage, float(rates.sum()))
        self._eval_cache[assignment] = ev
        return ev


def preference(ctx: MatchingContext, m: int, q: int) -> float:
    """Ratio of the beam's power delivered to its own two users over the power
    it leaks onto everyone else, for cluster ``m`` using strategy ``q``.

    A single-cluster system has no leakage; the preference is then infinite
    and ordering falls back to the lowest strategy index.
    """
    key = (m, q)
    if key in ctx._pref_cache:
        return ctx._pref_cache[key]
    w = ctx.beam(m, q)
    proj = np.abs(ctx.channels.conj() @ w) ** 2  # (M, 2)
    num = float(ctx.p[m] @ proj[m])
    cluster_total = float(ctx.p[m].sum())
    others = float(proj.sum() - proj[m].sum())
    value = math.inf if others == 0.0 else num / (cluster_total * others)
    ctx._pref_cache[key] = value
    return value


@dataclass
class MatchingState:
    """Cluster-to-strategy assignment plus the swap trace."""

    assignment: list[int]
    trace: list[tuple[int, int, int, float]] = field(default_factory=list)
    swaps: int = 0
    capped: bool = False

    def matched_clusters(self, q: int) -> list[int]:
        return [m for m, qq in enumerate(self.assignment) if qq == q]

    def check_consistent(self, num_strategies: int) -> bool:
        if any(not 0 <= q < num_strategies for q in self.assignment):
            return False
        for q in set(self.assignment):
            members = self.matched_clusters(q)
            if any(self.assignment[m] != q for m in members):
                return False
        return True

    def trace_lines(self) -> list[str]:
        return [
            f"round={r} swap=({a},{b}) delta_sum_rate={d:.6e}"
            for r, a, b, d in self.trace
        ]


def initial_matching(ctx: MatchingContext) -> MatchingState:
    """Deferred-acceptance start: every unmatched cluster proposes to its best
    not-yet-refusing strategy; strategies take all proposers (many-to-one)."""
    m_total = ctx.num_clusters
    assignment: list[int | None] = [None] * m_total
    refused: list[set[int]] = [set() for _ in range(m_total)]
    unmatched = list(range(m_total))
    while unmatched:
        proposals: dict[int, int] = {}
        for m in unmatched:
            candidates = [q for q in range(len(ctx.strategies)) if q not in refused[m]]
            if not candidates:
                raise RuntimeError(f"cluster {m} was refused by every strategy")
            best = max(candidates, key=lambda q: (preference(ctx, m, q), -q))
            proposals[m] = best
        for m, q in proposals.items():
            assignment[m] = q
        unmatched = [m for m in range(m_total) if assignment[m] is None]
    return MatchingState(assignment=[int(q) for q in assignment])


def cluster_utility(ctx: MatchingContext, m: int, assignment: tuple[int, ...]) -> float:
    """Rate of cluster m's high-QoS user minus its scaled leakage onto others."""
    ev = ctx.evaluate(tuple(assignment))
    if not ev.feasible:
        return -np.inf
    penalty = float(ctx.p[m].sum()) / ctx.eta[m] * ev.leakage[m]
    return float(ev.rates_high[m]) - penalty


def strategy_utility(ctx: MatchingContext, q: int, assignment: tuple[int, ...]) -> float:
    """Utility of a strategy under an assignment: the system sum high-QoS rate."""
    return ctx.evaluate(tuple(assignment)).total


def is_swap_blocking(
    ctx: MatchingContext,
    state: MatchingState,
    m1: int,
    m2: int,
    margin: float = STRICT_GAIN_MARGIN,
) -> bool:
    """True when exchanging the two clusters' strategies hurts none of the four
    involved players and strictly helps at least one (by ``margin``)."""
    if m1 == m2 or state.assignment[m1] == state.assignment[m2]:
        return False
    before = tuple(state.assignment)
    after = list(before)
    after[m1], after[m2] = before[m2], before[m1]
    after = tuple(after)

    utils_before = [
        cluster_utility(ctx, m1, before),
        cluster_utility(ctx, m2, before),
        strategy_utility(ctx, state.assignment[m1], before),
        strategy_utility(ctx, state.assignment[m2], before),
    ]
    utils_after = [
        cluster_utility(ctx, m1, after),
        cluster_utility(ctx, m2, after),
        strategy_utility(ctx, state.assignment[m1], after),
        strategy_utility(ctx, state.assignment[m2], after),
    ]
    if any(ua < ub for ua, ub in zip(utils_after, utils_before)):
        return False
    return any(ua > ub + margin for ua, ub in zip(utils_after, utils_before))


def allocate_antennas(
    ctx: MatchingContext,
    max_swaps: int | None = None,
) -> MatchingState:
    """Propose-then-swap assignment of splits to clusters.

    After the initial proposals, the first swap-blocking pair in ascending
    scan order is executed and the scan restarts, until no pair blocks.  The
    swap count is capped at ``4 M^2 Q^2``; hitting the cap leaves the current
    state with ``capped`` set.
    """
    state = initial_matching(ctx)
    m_total = ctx.num_clusters
    q_span = len(ctx.strategies) - 1  # strategy indices above the mandatory minimum
    if max_swaps is None:
        max_swaps = max(1, 4 * m_total**2 * max(q_span, 1) ** 2)

    rounds = 0
    while state.swaps < max_swaps:
        rounds += 1
        blocking = None
        for m1 in range(m_total):
            for m2 in range(m1 + 1, m_total):
                if is_swap_blocking(ctx, state, m1, m2):
                    blocking = (m1, m2)
                    break
            if blocking:
                break
        if blocking is None:
            return state
        m1, m2 = blocking
        before_total = ctx.evaluate(tuple(state.assignment)).total
        state.assignment[m1], state.assignment[m2] = (
            state.assignment[m2],
            state.assignment[m1],
        )
        state.swaps += 1
        after_total = ctx.evaluate(tuple(state.assignment)).total
        state.trace.append((rounds, m1, m2, after_total - before_total))

    state.capped = True
    log.warning("swap cap %d reached before the matching stabilised", max_swaps)
    return state
