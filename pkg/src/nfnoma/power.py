"""Power allocation solvers.

Two entry points share one constraint structure:

* :func:`solve_single_focus` — after zero-forcing has removed all interference
  at the high-QoS users, maximising their sum rate is a concave problem over a
  polyhedron and is solved directly;
* :func:`solve_split_focus` — with residual interference at the high-QoS
  users, each high-rate term is a log of a ratio; the ratios are rewritten
  with the quadratic transform and the resulting concave surrogate is
  maximised alternately in the auxiliary scale factors and the powers.

Variables are ordered ``x = [p_{1,h}, p_{1,l}, p_{2,h}, p_{2,l}, ...]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .rates import HIGH, LOW, EffectiveGains, inter_cluster_interference
from .solver import (
    DomainError,
    InfeasibleError,
    SolverOptions,
    SolverResult,
    maximize_concave,
    strictly_feasible_point,
)

LN2 = math.log(2.0)


def sinr_threshold(rate_min: float) -> float:
    """Minimum SINR achieving a rate floor: ``2**rate_min - 1``."""
    return 2.0**rate_min - 1.0


@dataclass(frozen=True)
class QosThresholds:
    """Per-user minimum rates, shape (M, 2); high-QoS first column."""

    rate_min: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rate_min, dtype=float)
        if r.ndim != 2 or r.shape[1] != 2:
            raise ValueError(f"expected rate floors of shape (M, 2), got {r.shape}")
        if np.any(r < 0.0):
            raise ValueError("rate floors must be nonnegative")
        object.__setattr__(self, "rate_min", r)

    @classmethod
    def uniform(cls, num_clusters: int, high: float, low: float) -> "QosThresholds":
        return cls(np.tile([float(high), float(low)], (num_clusters, 1)))

    @property
    def sinr(self) -> np.ndarray:
        return 2.0**self.rate_min - 1.0


def _squared_gains(gains: EffectiveGains, zero_high_cross: bool):
    own = gains.own_power()
    cross = gains.cross_power()
    cross_h = np.zeros_like(cross[:, :, HIGH]) if zero_high_cross else cross[:, :, HIGH]
    return own[:, HIGH], own[:, LOW], cross_h, cross[:, :, LOW]


def constraint_rows(
    gains: EffectiveGains,
    thresholds: QosThresholds,
    p_max: float,
    noise: float,
    zero_high_cross: bool = False,
    floor: float | None = None,
):
    """Linear inequality rows ``A x <= b`` encoding the QoS floors, the power
    budget and the strict-positivity floors.

    With ``zero_high_cross`` the high-QoS users are treated as interference
    free, which is the post-ZF single-focus problem; otherwise the residual
    cross gains enter the high-QoS floor and the decode-ordering floor.
    """
    m = gains.num_clusters
    n = 2 * m
    gh, gl, ch, cl = _squared_gains(gains, zero_high_cross)
    if np.any(gh <= 0.0) or np.any(gl <= 0.0):
        raise ValueError("every user needs a strictly positive own-channel gain")
    r = thresholds.sinr
    if r.shape[0] != m:
        raise ValueError(f"thresholds for {r.shape[0]} clusters, gains for {m}")
    if floor is None:
        floor = SolverOptions().power_floor_fraction * p_max

    rows, rhs, labels = [], [], []

    rows.append(np.ones(n))
    rhs.append(p_max)
    labels.append("budget")

    for m_i in range(m):
        for k, tag in ((HIGH, "high"), (LOW, "low")):
            row = np.zeros(n)
            row[2 * m_i + k] = -1.0
            rows.append(row)
            rhs.append(-floor)
            labels.append(f"floor[{m_i},{tag}]")

    # Cross-gain coefficients: beam i's total power (p_{i,h} + p_{i,l}) leaks
    # onto user (m, k) with weight cross[i, m].
    for m_i in range(m):
        rh, rl = r[m_i, HIGH], r[m_i, LOW]

        row = np.zeros(n)
        row[2 * m_i + HIGH] = -1.0
        for i in range(m):
            if i != m_i:
                row[2 * i + HIGH] += rh * ch[i, m_i] / gh[m_i]
                row[2 * i + LOW] += rh * ch[i, m_i] / gh[m_i]
        rows.append(row)
        rhs.append(-rh * noise / gh[m_i])
        labels.append(f"qos_high[{m_i}]")

        row = np.zeros(n)
        row[2 * m_i + HIGH] = rl
        row[2 * m_i + LOW] = -1.0
        for i in range(m):
            if i != m_i:
                row[2 * i + HIGH] += rl * cl[i, m_i] / gl[m_i]
                row[2 * i + LOW] += rl * cl[i, m_i] / gl[m_i]
        rows.append(row)
        rhs.append(-rl * noise / gl[m_i])
        labels.append(f"qos_low_direct[{m_i}]")

        row = np.zeros(n)
        row[2 * m_i + HIGH] = rl
        row[2 * m_i + LOW] = -1.0
        for i in range(m):
            if i != m_i:
                row[2 * i + HIGH] += rl * ch[i, m_i] / gh[m_i]
                row[2 * i + LOW] += rl * ch[i, m_i] / gh[m_i]
        rows.append(row)
        rhs.append(-rl * noise / gh[m_i])
        labels.append(f"qos_low_decode[{m_i}]")

    return np.array(rows), np.array(rhs), labels


def _violation(a, b, x):
    return float(np.max(a @ x - b))


def find_feasible(
    gains: EffectiveGains,
    thresholds: QosThresholds,
    p_max: float,
    noise: float,
    options: SolverOptions = SolverOptions(),
    zero_high_cross: bool = False,
) -> np.ndarray:
    """Any power vector satisfying the QoS floors and the budget.

    A uniform split is returned when it already works; otherwise the worst
    violation is minimised and an :class:`InfeasibleError` names the blocking
    constraint when the set is empty.
    """
    a, b, labels = constraint_rows(gains, thresholds, p_max, noise, zero_high_cross)
    m = gains.num_clusters
    uniform = np.full(2 * m, p_max / (2 * m))
    if _violation(a, b, uniform) <= 0.0:
        return uniform.reshape(m, 2)
    x = strictly_feasible_point(a, b, x0=uniform, labels=labels, options=options)
    return x.reshape(m, 2)


def _is_strict(a, b, x, p_max):
    slack = b - a @ x
    return np.min(slack / np.max(np.abs(a), axis=1)) > 1e-11 * max(1.0, p_max)


def _strict_start(a, b, labels, p_max, n, options, hint=None):
    if hint is not None and _is_strict(a, b, hint, p_max):
        return hint
    guess = np.full(n, p_max / n) * (1.0 - 1e-9) if hint is None else hint
    if hint is None and _is_strict(a, b, guess, p_max):
        return guess
    return strictly_feasible_point(a, b, x0=guess, labels=labels, options=options)


@dataclass
class PowerSolution:
    p: np.ndarray
    value: float
    kkt_residual: float
    newton_steps: int
    converged: bool
    barrier_parameter: float = float("nan")


def solve_single_focus(
    gains: EffectiveGains,
    thresholds: QosThresholds,
    p_max: float,
    noise: float,
    options: SolverOptions = SolverOptions(),
) -> PowerSolution:
    """Optimal powers when the high-QoS users see no inter-cluster interference.

    Maximises ``sum_m log2(1 + p_{m,h} |g_{m,h}|^2 / noise)`` subject to the
    rate floors of both users in every cluster and the total budget.
    """
    m = gains.num_clusters
    a, b, labels = constraint_rows(gains, thresholds, p_max, noise, zero_high_cross=True)
    gh = gains.own_power()[:, HIGH]
    snr_coef = gh / noise
    idx_h = 2 * np.arange(m)

    def objective(x):
        s = snr_coef * x[idx_h]
        value = float(np.log2(1.0 + s).sum())
        grad = np.zeros(2 * m)
        grad[idx_h] = snr_coef / ((1.0 + s) * LN2)
        hess = np.zeros((2 * m, 2 * m))
        hess[idx_h, idx_h] = -(snr_coef**2) / ((1.0 + s) ** 2 * LN2)
        return value, grad, hess

    x0 = _strict_start(a, b, labels, p_max, 2 * m, options)
    res = maximize_concave(objective, a, b, x0=x0, labels=labels, options=options)
    return PowerSolution(
        p=res.x.reshape(m, 2), value=res.value, kkt_residual=res.kkt_residual,
        newton_steps=res.newton_steps, converged=res.converged,
        barrier_parameter=res.barrier_parameter,
    )


def optimal_beta(p: np.ndarray, gains: EffectiveGains, noise: float) -> np.ndarray:
    """Stationary auxiliary scale factors for fixed powers.

    ``beta_m = sqrt(p_{m,h} |g_{m,h}|^2) / (interference_m + noise)``; plugging
    these back into the surrogate recovers the true high-QoS sum rate.
    """
    inter = inter_cluster_interference(p, gains)[:, HIGH]
    gh = gains.own_power()[:, HIGH]
    return np.sqrt(np.asarray(p)[:, HIGH] * gh) / (inter + noise)


def quadratic_objective(p: np.ndarray, beta: np.ndarray, gains: EffectiveGains, noise: float) -> float:
    """Concave surrogate of the high-QoS sum rate for fixed scale factors."""
    p = np.asarray(p, dtype=float)
    inter = inter_cluster_interference(p, gains)[:, HIGH]
    gh = gains.own_power()[:, HIGH]
    args = 1.0 + 2.0 * beta * np.sqrt(p[:, HIGH] * gh) - beta**2 * (inter + noise)
    if np.any(args <= 0.0):
        raise DomainError(
            f"surrogate log argument nonpositive (min {args.min():.3e}); "
            "powers left the transform's domain"
        )
    return float(np.log2(args).sum())


def solve_quadratic_inner(
    beta: np.ndarray,
    gains: EffectiveGains,
    thresholds: QosThresholds,
    p_max: float,
    noise: float,
    options: SolverOptions = SolverOptions(),
    start: np.ndarray | None = None,
    t0: float | None = None,
) -> PowerSolution:
    """Maximise the surrogate over the power polyhedron for fixed scale factors."""
    m = gains.num_clusters
    a, b, labels = constraint_rows(gains, thresholds, p_max, noise, zero_high_cross=False)
    gh = gains.own_power()[:, HIGH]
    cross_h = gains.cross_power()[:, :, HIGH]  # [i, m]: beam i onto user (m, high); diag 0
    beta = np.asarray(beta, dtype=float)
    beta2 = beta**2
    idx_h = 2 * np.arange(m)

    # d(interference_m)/d(p_{i,k}) = cross_h[i, m]; rows 2i and 2i+1 are beam i.
    d_inter = np.repeat(cross_h, 2, axis=0)

    def objective(x):
        ph = x[idx_h]
        if np.any(ph <= 0.0):
            return -np.inf, None, None
        inter = x.reshape(m, 2).sum(axis=1) @ cross_h
        root = np.sqrt(ph * gh)
        args = 1.0 + 2.0 * beta * root - beta2 * (inter + noise)
        if np.any(args <= 1e-12):
            return -np.inf, None, None
        value = float(np.log2(args).sum())
        inv = 1.0 / (args * LN2)

        d_args = -d_inter * beta2[None, :]  # (2M, M)
        d_args[idx_h, np.arange(m)] += beta * gh / root
        grad = d_args @ inv

        hess = -(d_args * (inv / args)[None, :]) @ d_args.T
        hess[idx_h, idx_h] += inv * (-0.5) * beta * gh**2 / root**3
        return value, grad, hess

    hint = np.asarray(start, dtype=float).ravel() if start is not None else None
    x0 = _strict_start(a, b, labels, p_max, 2 * m, options, hint=hint)
    res = maximize_concave(objective, a, b, x0=x0, labels=labels, options=options, t0=t0)
    return PowerSolution(
        p=res.x.reshape(m, 2), value=res.value, kkt_residual=res.kkt_residual,
        newton_steps=res.newton_steps, converged=res.converged,
        barrier_parameter=res.barrier_parameter,
    )


@dataclass
class FpResult:
    """Outcome of the alternating surrogate maximisation."""

    p: np.ndarray
    beta: np.ndarray
    value: float
    trace: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    kkt_residual: float = np.inf
    newton_steps: int = 0


def solve_split_focus(
    gains: EffectiveGains,
    thresholds: QosThresholds,
    p_max: float,
    noise: float,
    options: SolverOptions = SolverOptions(),
    start: np.ndarray | None = None,
) -> FpResult:
    """Alternating power allocation under residual high-QoS interference.

    Repeats scale-factor updates and surrogate maximisations from a feasible
    start until the surrogate value stabilises.  The recorded trace of
    surrogate values never decreases: an inner result that would (through
    solver noise) lower the objective is discarded in favour of the incumbent.
    """
    m = gains.num_clusters
    a, b, labels = constraint_rows(gains, thresholds, p_max, noise)
    hint = np.asarray(start, dtype=float).ravel() if start is not None else None
    p = _strict_start(a, b, labels, p_max, 2 * m, options, hint=hint).reshape(m, 2)

    # While the alternation is still moving, the inner solves only need enough
    # accuracy to drive it; the returned point comes from a final tight solve.
    loose = SolverOptions(
        tolerance=max(options.tolerance, 1e-5),
        barrier_growth=options.barrier_growth,
        max_newton_steps=options.max_newton_steps,
    )
    result = FpResult(p=p, beta=optimal_beta(p, gains, noise), value=-np.inf)
    t_hint = None
    for it in range(1, options.fp_max_iterations + 1):
        beta = optimal_beta(p, gains, noise)
        value_pre = quadratic_objective(p, beta, gains, noise)
        inner = solve_quadratic_inner(
            beta, gains, thresholds, p_max, noise,
            options=loose, start=p.ravel(), t0=t_hint,
        )
        result.newton_steps += inner.newton_steps
        result.iterations = it
        if np.isfinite(inner.barrier_parameter):
            t_hint = inner.barrier_parameter / loose.barrier_growth**2
        if inner.value >= value_pre:
            p = inner.p
            achieved = inner.value
        else:
            achieved = value_pre  # keep the incumbent point
        result.trace.append(achieved)
        result.p, result.beta = p, beta
        if abs(achieved - value_pre) <= options.fp_tolerance * max(1.0, abs(achieved)):
            result.converged = True
            break

    final = solve_quadratic_inner(
        optimal_beta(p, gains, noise), gains, thresholds, p_max, noise,
        options=options, start=p.ravel(), t0=t_hint,
    )
    result.newton_steps += final.newton_steps
    result.kkt_residual = final.kkt_residual
    if final.value >= result.trace[-1]:
        result.p = final.p
        result.trace.append(final.value)
    result.value = quadratic_objective(
        result.p, optimal_beta(result.p, gains, noise), gains, noise
    )
    return result
