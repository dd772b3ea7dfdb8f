"""Effective channel gains, interference bookkeeping and NOMA achievable rates.

Power vectors are arrays of shape (M, 2): column ``HIGH`` holds the high-QoS
per-cluster powers, column ``LOW`` the low-QoS ones.  All rates are in
bit/s/Hz (log base 2), powers and noise in watts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HIGH = 0
LOW = 1


@dataclass(frozen=True)
class EffectiveGains:
    """Complex gains of every beam at every user.

    ``beam_at_user[i, m, k]`` is the effective channel from the beam serving
    cluster ``i`` to user ``(m, k)``, i.e. ``g_{m,k}^H W_A w_i``.  The
    diagonal ``i == m`` carries each user's own-cluster gain.
    """

    beam_at_user: np.ndarray

    def __post_init__(self):
        t = self.beam_at_user
        if t.ndim != 3 or t.shape[0] != t.shape[1] or t.shape[2] != 2:
            raise ValueError(f"expected shape (M, M, 2), got {t.shape}")

    @classmethod
    def from_beamformers(
        cls,
        channels: np.ndarray,
        analog_matrix: np.ndarray,
        digital_matrix: np.ndarray,
    ) -> "EffectiveGains":
        """Build the gain tensor from (M, 2, N) channels and the two beamforming stages."""
        m = digital_matrix.shape[1]
        flat = channels.reshape(2 * m, -1)
        rows = flat.conj() @ analog_matrix @ digital_matrix  # (2M, M): user u vs beam i
        return cls(beam_at_user=rows.reshape(m, 2, m).transpose(2, 0, 1).copy())

    @property
    def num_clusters(self) -> int:
        return self.beam_at_user.shape[0]

    @property
    def own(self) -> np.ndarray:
        """Own-cluster complex gains, shape (M, 2)."""
        m = self.num_clusters
        return self.beam_at_user[np.arange(m), np.arange(m), :]

    def own_power(self) -> np.ndarray:
        return np.abs(self.own) ** 2

    def cross_power(self) -> np.ndarray:
        """|gain|^2 of beam i at user (m, k) with the own-beam diagonal zeroed."""
        p = np.abs(self.beam_at_user) ** 2
        m = self.num_clusters
        p[np.arange(m), np.arange(m), :] = 0.0
        return p


def inter_cluster_interference(p: np.ndarray, gains: EffectiveGains) -> np.ndarray:
    """Received interference power from other clusters' beams, shape (M, 2).

    Entry (m, k) is ``sum_{i != m} (p_{i,high} + p_{i,low}) |gain of beam i at (m, k)|^2``.
    """
    cluster_power = np.asarray(p).sum(axis=1)
    return np.einsum("i,imk->mk", cluster_power, gains.cross_power())


def rate_high(p: np.ndarray, gains: EffectiveGains, noise: float) -> np.ndarray:
    """Rate of each high-QoS user decoding its own message after SIC."""
    inter = inter_cluster_interference(p, gains)[:, HIGH]
    own = gains.own_power()[:, HIGH]
    return np.log2(1.0 + p[:, HIGH] * own / (inter + noise))


def rate_low_at_high(p: np.ndarray, gains: EffectiveGains, noise: float) -> np.ndarray:
    """Rate at which each high-QoS user can decode its cluster's low-QoS message."""
    inter = inter_cluster_interference(p, gains)[:, HIGH]
    own = gains.own_power()[:, HIGH]
    return np.log2(1.0 + p[:, LOW] * own / (p[:, HIGH] * own + inter + noise))


def rate_low_at_low(p: np.ndarray, gains: EffectiveGains, noise: float) -> np.ndarray:
    """Rate of each low-QoS user decoding directly, high-QoS signal untreated."""
    inter = inter_cluster_interference(p, gains)[:, LOW]
    own = gains.own_power()[:, LOW]
    return np.log2(1.0 + p[:, LOW] * own / (p[:, HIGH] * own + inter + noise))


def rate_low(p: np.ndarray, gains: EffectiveGains, noise: float) -> np.ndarray:
    """Achievable low-QoS rate: the decode at the high-QoS user must succeed too."""
    return np.minimum(rate_low_at_high(p, gains, noise), rate_low_at_low(p, gains, noise))


def sic_condition(gains: EffectiveGains, p: np.ndarray, noise: float) -> np.ndarray:
    """Per-cluster test that the far-to-near decode ordering is consistent.

    True where the high-QoS user's interference-normalised gain dominates the
    low-QoS user's, so cancelling the low message first cannot hurt it.
    """
    inter = inter_cluster_interference(p, gains)
    own = gains.own_power()
    lhs = own[:, HIGH] / (inter[:, HIGH] + noise)
    rhs = own[:, LOW] / (inter[:, LOW] + noise)
    return lhs >= rhs


@dataclass(frozen=True)
class RateReport:
    """Achieved rates per cluster; low = min of the two decode routes."""

    high: np.ndarray
    low_at_high: np.ndarray
    low_at_low: np.ndarray
    low: np.ndarray

    @property
    def per_user(self) -> np.ndarray:
        """(M, 2) array of the achieved high and low rates."""
        return np.column_stack([self.high, self.low])


def rate_report(p: np.ndarray, gains: EffectiveGains, noise: float) -> RateReport:
    l2h = rate_low_at_high(p, gains, noise)
    l2l = rate_low_at_low(p, gains, noise)
    return RateReport(
        high=rate_high(p, gains, noise),
        low_at_high=l2h,
        low_at_low=l2l,
        low=np.minimum(l2h, l2l),
    )


def sum_rate_high(report: RateReport) -> float:
    """Objective value: total rate of the high-QoS users."""
    return float(report.high.sum())
