"""Constant-modulus analog beamformers.

Two constructions are provided: a beamformer phase-aligned to a single focal
point, and a split-array beamformer whose first block of elements focuses on
one point while the remaining block focuses on another.  Every constructed
weight vector has entrywise modulus ``1/sqrt(N)`` (phase-shifter hardware
constraint).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import ArrayGeometry, UserLocation, element_distances, near_field_steering


@dataclass(frozen=True)
class AntennaSplit:
    """Partition of the array between the high- and low-QoS sub-beams.

    The high-QoS sub-array takes the first ``num_high`` contiguous elements,
    the low-QoS sub-array the remaining ``num_low``.
    """

    num_high: int
    num_low: int

    def __post_init__(self):
        if int(self.num_high) != self.num_high or int(self.num_low) != self.num_low:
            raise ValueError("antenna counts must be integers")
        if self.num_high < 1 or self.num_low < 1:
            raise ValueError(
                f"both sub-arrays need at least one element, got ({self.num_high}, {self.num_low})"
            )

    @property
    def total(self) -> int:
        return self.num_high + self.num_low

    def validate(self, geometry: ArrayGeometry, min_per_user: int = 1) -> None:
        if self.total != geometry.num_antennas:
            raise ValueError(
                f"split {self.num_high}+{self.num_low} does not cover "
                f"{geometry.num_antennas} antennas"
            )
        if self.num_high < min_per_user or self.num_low < min_per_user:
            raise ValueError(
                f"split ({self.num_high}, {self.num_low}) violates the "
                f"minimum of {min_per_user} antennas per user"
            )


def focused_beamformer(geometry: ArrayGeometry, focus: UserLocation) -> np.ndarray:
    """Weights phase-aligned to the spherical wavefront at ``focus``.

    The array gain evaluated at the focus itself is exactly 1.
    """
    return near_field_steering(geometry, focus)


def split_beamformer(
    geometry: ArrayGeometry,
    split: AntennaSplit,
    loc_high: UserLocation,
    loc_low: UserLocation,
    min_per_user: int = 1,
) -> np.ndarray:
    """Two-focus beamformer: first block aligned to ``loc_high``, rest to ``loc_low``.

    Distances are always indexed by the global element position, so the two
    blocks are cut out of the full-array phase profiles of the two foci.
    """
    split.validate(geometry, min_per_user)
    k = 2.0 * math.pi / geometry.wavelength
    weights = np.empty(geometry.num_antennas, dtype=complex)
    nh = split.num_high
    weights[:nh] = np.exp(-1j * k * element_distances(geometry, loc_high)[:nh])
    weights[nh:] = np.exp(-1j * k * element_distances(geometry, loc_low)[nh:])
    return weights / math.sqrt(geometry.num_antennas)


def split_steered_beamformer(
    geometry: ArrayGeometry,
    split: AntennaSplit,
    angle_high: float,
    angle_low: float,
    min_per_user: int = 1,
) -> np.ndarray:
    """Far-field counterpart of :func:`split_beamformer`: each block carries a
    planar phase ramp toward its target azimuth, ignoring range."""
    split.validate(geometry, min_per_user)
    n = geometry.num_antennas
    delta = (np.arange(n) - (n - 1) / 2.0) * geometry.spacing
    k = 2.0 * math.pi / geometry.wavelength
    weights = np.empty(n, dtype=complex)
    nh = split.num_high
    weights[:nh] = np.exp(1j * k * delta[:nh] * math.sin(angle_high))
    weights[nh:] = np.exp(1j * k * delta[nh:] * math.sin(angle_low))
    return weights / math.sqrt(n)


def array_gain(weights: np.ndarray, geometry: ArrayGeometry, probe: UserLocation) -> float:
    """Normalised gain ``|b(probe)^H w|`` in [0, 1] (up to rounding)."""
    return float(abs(np.vdot(near_field_steering(geometry, probe), weights)))


def split_focus_gains(
    geometry: ArrayGeometry,
    split: AntennaSplit,
    loc_high: UserLocation,
    loc_low: UserLocation,
) -> tuple[float, float]:
    """Closed-form gains of the split beamformer at its own two foci.

    At the high focus the aligned block contributes its element count while the
    other block contributes a cross phasor sum, and symmetrically at the low
    focus.  Equals :func:`array_gain` of the constructed beamformer at each
    focus, via an independent code path.
    """
    split.validate(geometry)
    k = 2.0 * math.pi / geometry.wavelength
    n = geometry.num_antennas
    nh = split.num_high
    dist_h = element_distances(geometry, loc_high)
    dist_l = element_distances(geometry, loc_low)
    cross_low = np.exp(1j * k * (dist_h - dist_l))[nh:].sum()
    cross_high = np.exp(1j * k * (dist_l - dist_h))[:nh].sum()
    gain_high = abs(nh + cross_low) / n
    gain_low = abs(split.num_low + cross_high) / n
    return float(gain_high), float(gain_low)


def split_gain_bound(
    geometry: ArrayGeometry,
    split: AntennaSplit,
    loc_high: UserLocation,
    loc_low: UserLocation,
) -> tuple[bool, tuple[float, float, float]]:
    """Check that neither focus of a split beam outgains a dedicated single-focus beam.

    Returns ``(holds, (gain_high, gain_low, single_focus_peak))``; the peak is
    evaluated honestly rather than assumed to be 1.
    """
    weights = split_beamformer(geometry, split, loc_high, loc_low)
    gain_high = array_gain(weights, geometry, loc_high)
    gain_low = array_gain(weights, geometry, loc_low)
    peak = array_gain(focused_beamformer(geometry, loc_high), geometry, loc_high)
    holds = max(gain_high, gain_low) <= peak + 1e-12
    return holds, (gain_high, gain_low, peak)


@dataclass(frozen=True)
class GainMap:
    """Array gain rasterised on a polar grid; radii index rows."""

    radii: np.ndarray   # metres, ascending
    angles: np.ndarray  # radians, ascending
    values: np.ndarray  # shape (len(radii), len(angles)), clipped to [0, 1]


def gain_map(
    weights: np.ndarray,
    geometry: ArrayGeometry,
    r_range: tuple[float, float] = (5.0, 100.0),
    angle_range: tuple[float, float] = (-math.pi / 3.0, math.pi / 3.0),
    resolution: int | tuple[int, int] = 400,
) -> GainMap:
    """Evaluate the array gain of ``weights`` on an (r, angle) grid."""
    if isinstance(resolution, int):
        n_r = n_a = resolution
    else:
        n_r, n_a = resolution
    if n_r < 1 or n_a < 1:
        raise ValueError(f"grid must be non-empty, got resolution ({n_r}, {n_a})")
    if r_range[0] <= 0.0 or r_range[1] < r_range[0]:
        raise ValueError(f"invalid radial range {r_range}")
    if angle_range[1] < angle_range[0]:
        raise ValueError(f"invalid angular range {angle_range}")

    radii = np.linspace(r_range[0], r_range[1], n_r)
    angles = np.linspace(angle_range[0], angle_range[1], n_a)
    delta = (np.arange(geometry.num_antennas) - (geometry.num_antennas - 1) / 2.0)
    delta = delta * geometry.spacing
    k = 2.0 * math.pi / geometry.wavelength
    sin_a = np.sin(angles)
    root_n = math.sqrt(geometry.num_antennas)

    values = np.empty((n_r, n_a))
    for i, r in enumerate(radii):
        dist = np.sqrt(r * r + delta[None, :] ** 2 - 2.0 * delta[None, :] * r * sin_a[:, None])
        probe_conj = np.exp(1j * k * dist) / root_n
        values[i] = np.abs(probe_conj @ weights)
    np.clip(values, 0.0, 1.0, out=values)
    return GainMap(radii=radii, angles=angles, values=values)


def gain_map_csv(gmap: GainMap) -> str:
    """Render a gain map as CSV: header row of angles in degrees, first column
    radii in metres, 9 significant digits throughout."""
    from .csvio import sig9

    lines = ["radius_m," + ",".join(sig9(math.degrees(a)) for a in gmap.angles)]
    for r, row in zip(gmap.radii, gmap.values):
        lines.append(sig9(r) + "," + ",".join(sig9(v) for v in row))
    return "\n".join(lines) + "\n"
