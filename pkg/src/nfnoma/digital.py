"""Beamspace (equivalent) channels and zero-forcing digital beamformers.

Two ZF flavours share one core: plain ZF on the high-QoS users' beamspace
channels, and ZF on per-cluster representative vectors derived from a rank-2
decomposition of each cluster's beamspace pair.
"""

from __future__ import annotations

import numpy as np

GRAM_CONDITION_LIMIT = 1e12


class IllConditionedGramError(RuntimeError):
    """Raised when the ZF Gram matrix is numerically singular.

    Usually signals co-located (indistinguishable) clusters.
    """

    def __init__(self, condition_number: float):
        super().__init__(
            f"beamspace Gram matrix condition number {condition_number:.3e} exceeds "
            f"{GRAM_CONDITION_LIMIT:.0e}; clusters are not separable"
        )
        self.condition_number = condition_number


def beamspace_channels(channels: np.ndarray, analog_matrix: np.ndarray) -> np.ndarray:
    """Project channels through the analog stage: row u is ``g_u^H W_A``.

    ``channels`` has one user channel per row (U, N); the result is (U, M_RF).
    """
    channels = np.atleast_2d(np.asarray(channels))
    if channels.shape[1] != analog_matrix.shape[0]:
        raise ValueError(
            f"channel length {channels.shape[1]} does not match analog beamformer "
            f"rows {analog_matrix.shape[0]}"
        )
    return channels.conj() @ analog_matrix


def _zf_columns(columns: np.ndarray) -> np.ndarray:
    """Column-normalised ZF solution ``C (C^H C)^-1`` for a square full-rank C."""
    gram = columns.conj().T @ columns
    evals = np.linalg.eigvalsh(gram)
    if evals[0] <= 0.0:
        raise IllConditionedGramError(np.inf)
    cond = float(evals[-1] / evals[0])
    if cond > GRAM_CONDITION_LIMIT:
        raise IllConditionedGramError(cond)
    low = np.linalg.cholesky(gram)
    low_inv = np.linalg.inv(low)
    raw = columns @ (low_inv.conj().T @ low_inv)
    return raw / np.linalg.norm(raw, axis=0, keepdims=True)


def zf_digital(gtilde: np.ndarray) -> np.ndarray:
    """ZF digital beamformer from the matrix whose column m is cluster m's
    high-QoS beamspace channel.

    Column m of the result is orthogonal to every other cluster's high-QoS
    beamspace channel and has unit norm.
    """
    gtilde = np.asarray(gtilde)
    if gtilde.ndim != 2 or gtilde.shape[0] != gtilde.shape[1]:
        raise ValueError(f"expected a square beamspace matrix, got shape {gtilde.shape}")
    return _zf_columns(gtilde)


def left_singular_2xm(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form left singular basis of a 2-row matrix.

    Returns ``(U, sigmas)`` with U unitary 2x2, singular values descending.
    Columns are phase-normalised so their first nonzero component is real and
    nonnegative; exact ties pick the identity basis.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != 2:
        raise ValueError(f"expected a 2-row matrix, got shape {a.shape}")
    h = a @ a.conj().T
    h11 = h[0, 0].real
    h22 = h[1, 1].real
    off = h[0, 1]
    mean = 0.5 * (h11 + h22)
    radius = np.hypot(0.5 * (h11 - h22), abs(off))
    lam_hi = mean + radius
    lam_lo = max(mean - radius, 0.0)

    if abs(off) == 0.0:
        u1 = np.array([1.0, 0.0], dtype=complex) if h11 >= h22 else np.array([0.0, 1.0], dtype=complex)
    elif h11 <= h22:
        u1 = np.array([off, lam_hi - h11])
    else:
        u1 = np.array([lam_hi - h22, off.conjugate()])
    u1 = u1 / np.linalg.norm(u1)
    u1 = _fix_phase(u1)
    u2 = _fix_phase(np.array([-u1[1].conjugate(), u1[0].conjugate()]))
    basis = np.column_stack([u1, u2])
    return basis, np.sqrt(np.array([lam_hi, lam_lo]))


def _fix_phase(v: np.ndarray) -> np.ndarray:
    for comp in v:
        if comp != 0.0:
            return v * (comp.conjugate() / abs(comp))
    return v


def svd_cluster_channel(gtilde_m: np.ndarray) -> np.ndarray:
    """Representative beamspace vector of one cluster.

    ``gtilde_m`` stacks the cluster's high and low beamspace channels as
    columns (M_RF, 2).  The transposed matrix is decomposed and the cluster
    channels are combined with the principal left singular vector.
    """
    gtilde_m = np.asarray(gtilde_m, dtype=complex)
    if gtilde_m.ndim != 2 or gtilde_m.shape[1] != 2:
        raise ValueError(f"expected an (M, 2) cluster beamspace matrix, got {gtilde_m.shape}")
    if not np.any(gtilde_m):
        raise ValueError("cluster beamspace matrix is zero")
    basis, _ = left_singular_2xm(gtilde_m.T)
    return gtilde_m @ basis[:, 0]


def svd_zf_digital(gbar: np.ndarray) -> np.ndarray:
    """ZF digital beamformer on the per-cluster representative vectors.

    ``gbar`` has one representative column per cluster; column m of the result
    is orthogonal to every other cluster's representative.
    """
    gbar = np.asarray(gbar)
    if gbar.ndim != 2 or gbar.shape[0] != gbar.shape[1]:
        raise ValueError(f"expected a square representative matrix, got shape {gbar.shape}")
    return _zf_columns(gbar)
