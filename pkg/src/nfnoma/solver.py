"""Dense log-barrier interior-point solver for small concave maximisation
problems over linear inequality constraints ``A x <= b``.

The problems solved here have a handful of variables (twice the RF chain
count), so everything is kept dense and deterministic.  Objectives are
callables ``f(x) -> (value, grad, hess)`` returning ``-inf`` as the value when
``x`` is outside the objective's domain.

Optimality is certified the way interior-point methods do it: the reported
``kkt_residual`` combines the relative duality gap ``m / t`` of the final
barrier stage with the squared Newton decrement of its centering.  Both are
affine invariant and computable to machine precision, unlike a raw
stationarity norm on problems whose constraint slacks span many decades.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SolverOptions:
    tolerance: float = 1e-8          # relative optimality (duality gap) target
    barrier_growth: float = 30.0
    max_newton_steps: int = 4000
    fp_tolerance: float = 1e-6       # relative objective change for the outer loop
    fp_max_iterations: int = 200
    power_floor_fraction: float = 1e-9


@dataclass
class SolverResult:
    x: np.ndarray
    value: float
    kkt_residual: float
    multipliers: np.ndarray
    newton_steps: int
    barrier_parameter: float
    converged: bool
    message: str = ""


class InfeasibleError(RuntimeError):
    """No point satisfies the constraint set; carries the worst residual."""

    def __init__(self, message: str, residual: float | None = None, label: str | None = None):
        super().__init__(message)
        self.residual = residual
        self.label = label


class DomainError(ValueError):
    """Objective evaluated outside its domain (nonpositive log argument)."""


def _normalize_rows(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    scale = np.max(np.abs(a), axis=1)
    if np.any(scale == 0.0):
        raise ValueError("constraint matrix has an all-zero row")
    return a / scale[:, None], b / scale


def _newton(objective, a, b, x, t, max_steps, target, early=None):
    """Center ``t * (-f) - sum log(b - A x)`` until the half squared Newton
    decrement drops to ``target``.

    Step rule for self-concordant barriers: damped ``1 / (1 + decrement)``
    outside the quadratic zone, full steps inside, backtracking only to stay
    in the domain.  ``early(x)`` may end the loop prematurely.  Returns
    ``(x, steps, half_decrement, stalled)``.
    """
    steps = 0
    half_dec = np.inf
    no_progress = 0
    best = np.inf
    for _ in range(max_steps):
        if early is not None and early(x):
            break
        slack = b - a @ x
        value, grad, hess = objective(x)
        inv_s = 1.0 / slack
        g = -t * grad + a.T @ inv_s
        h = -t * hess + (a.T * inv_s**2) @ a
        try:
            step = -np.linalg.solve(h, g)
        except np.linalg.LinAlgError:
            h = h + np.eye(h.shape[0]) * (1e-12 * abs(np.trace(h)) / h.shape[0])
            step = -np.linalg.solve(h, g)
        steps += 1
        half_dec = max(float(-g @ step), 0.0) / 2.0
        if half_dec <= target:
            break
        if half_dec <= 0.9 * best:
            best = half_dec
            no_progress = 0
        else:
            no_progress += 1
            if no_progress >= 5:
                return x, steps, half_dec, True
        lam = math.sqrt(2.0 * half_dec)
        alpha = 1.0 if lam < 0.25 else 1.0 / (1.0 + lam)
        while True:
            xn = x + alpha * step
            sn = b - a @ xn
            if np.all(sn > 0.0) and np.isfinite(objective(xn)[0]):
                x = xn
                break
            alpha *= 0.5
            if alpha < 1e-16:
                return x, steps, half_dec, True
    return x, steps, half_dec, False


def maximize_concave(
    objective,
    a: np.ndarray,
    b: np.ndarray,
    x0: np.ndarray | None = None,
    labels: list[str] | None = None,
    options: SolverOptions = SolverOptions(),
    t0: float | None = None,
) -> SolverResult:
    """Maximise a concave objective over ``{x : A x <= b}``.

    A strictly feasible ``x0`` may be supplied; otherwise a feasibility phase
    runs first and raises :class:`InfeasibleError` when the polyhedron has no
    interior.  ``t0`` warm-starts the barrier parameter when the caller knows
    ``x0`` is already near-optimal.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.asarray(b, dtype=float)
    a, b = _normalize_rows(a, b)
    m, n = a.shape

    if x0 is None:
        x0 = strictly_feasible_point(a, b, labels=labels, options=options, prenormalized=True)
    x = np.asarray(x0, dtype=float).copy()
    if np.any(b - a @ x <= 0.0):
        raise ValueError("starting point is not strictly feasible")

    value = objective(x)[0]
    if not np.isfinite(value):
        raise DomainError("starting point lies outside the objective domain")
    t = t0 if t0 is not None else m / max(1.0, abs(value))
    total_steps = 0
    final_rounds = 0
    residual = np.inf

    while total_steps < options.max_newton_steps:
        t_needed = m / (0.45 * options.tolerance * max(1.0, abs(value)))
        final_stage = t >= t_needed
        target = 0.125 * options.tolerance if final_stage else 5e-3
        x, steps, half_dec, stalled = _newton(
            objective, a, b, x, t, options.max_newton_steps - total_steps, target
        )
        total_steps += max(steps, 1)
        value = objective(x)[0]
        gap = (m / t) / max(1.0, abs(value))
        lam_newton = math.sqrt(2.0 * half_dec) if np.isfinite(half_dec) else np.inf
        residual = max(gap * (1.0 + lam_newton), 2.0 * half_dec)
        if final_stage and residual <= options.tolerance:
            slack = b - a @ x
            return SolverResult(
                x=x, value=value, kkt_residual=residual,
                multipliers=1.0 / (t * slack), newton_steps=total_steps,
                barrier_parameter=t, converged=True,
            )
        if final_stage:
            final_rounds += 1
            if final_rounds > 3 or stalled:
                break
        t = min(t * options.barrier_growth, t_needed * options.barrier_growth**final_rounds)

    slack = b - a @ x
    return SolverResult(
        x=x, value=value, kkt_residual=residual, multipliers=1.0 / (t * slack),
        newton_steps=total_steps, barrier_parameter=t, converged=False,
        message="newton budget or arithmetic precision exhausted before the target residual",
    )


def strictly_feasible_point(
    a: np.ndarray,
    b: np.ndarray,
    x0: np.ndarray | None = None,
    labels: list[str] | None = None,
    options: SolverOptions = SolverOptions(),
    margin: float = 1e-12,
    prenormalized: bool = False,
) -> np.ndarray:
    """Feasibility phase: minimise the worst constraint violation.

    Solves ``min v s.t. A x - b <= v`` from any starting guess and returns an
    interior ``x`` as soon as the worst violation is safely negative.  Raises
    :class:`InfeasibleError` (naming the worst row) when the minimum is not.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.asarray(b, dtype=float)
    if not prenormalized:
        a, b = _normalize_rows(a, b)
    m, n = a.shape
    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).copy()

    v0 = float(np.max(a @ x - b)) + 1.0
    aug_a = np.hstack([a, -np.ones((m, 1))])
    cap = np.zeros((1, n + 1))
    cap[0, -1] = 1.0
    aug_a = np.vstack([aug_a, cap])
    aug_b = np.concatenate([b, [v0 + 1.0]])
    y = np.concatenate([x, [v0]])

    grad = np.zeros(n + 1)
    grad[-1] = -1.0
    hess = np.zeros((n + 1, n + 1))

    def lp_objective(yc):
        return -yc[-1], grad, hess

    t = (m + 1) / max(1.0, v0)
    steps = 0
    target_v = -max(margin, 10.0 * np.finfo(float).eps)
    while steps < options.max_newton_steps:
        y, used, half_dec, stalled = _newton(
            lp_objective, aug_a, aug_b, y, t,
            options.max_newton_steps - steps, 5e-3,
            early=lambda yc: yc[-1] <= target_v,
        )
        steps += max(used, 1)
        if y[-1] <= target_v:
            return y[:n]
        if stalled or (m + 1) / t <= 1e-13 * max(1.0, abs(y[-1])):
            break
        t *= options.barrier_growth

    worst = int(np.argmax(a @ y[:n] - b))
    label = labels[worst] if labels else f"row {worst}"
    raise InfeasibleError(
        f"constraint set has no interior point; most violated: {label} "
        f"(normalized residual {float(y[-1]):.3e})",
        residual=float(y[-1]),
        label=label,
    )
