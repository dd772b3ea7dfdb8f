"""Uniform linear array geometry, spherical/planar wavefront responses and the
line-of-sight channel model.

Conventions used throughout the package:

* the array lies on the x-axis, centred on the origin, element ``n`` at
  ``x = (n - (N - 1) / 2) * spacing``;
* a user at ``(radius, angle)`` sits at Cartesian
  ``(radius * sin(angle), radius * cos(angle))``, i.e. the angle is measured
  from broadside;
* all distances are metres, angles radians, powers watts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array: element count, inter-element spacing, wavelength."""

    num_antennas: int
    spacing: float
    wavelength: float

    def __post_init__(self):
        if self.num_antennas < 1:
            raise ValueError(f"num_antennas must be at least 1, got {self.num_antennas}")
        if self.spacing <= 0.0:
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        if self.wavelength <= 0.0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")

    @classmethod
    def half_wavelength(cls, num_antennas: int, wavelength: float) -> "ArrayGeometry":
        """Geometry with the default half-wavelength spacing."""
        return cls(num_antennas=num_antennas, spacing=wavelength / 2.0, wavelength=wavelength)

    @classmethod
    def from_carrier(cls, num_antennas: int, carrier_hz: float) -> "ArrayGeometry":
        return cls.half_wavelength(num_antennas, SPEED_OF_LIGHT / carrier_hz)

    @property
    def aperture(self) -> float:
        return self.num_antennas * self.spacing

    @property
    def fraunhofer_distance(self) -> float:
        """Range beyond which the wavefront across the aperture is effectively planar."""
        return 2.0 * self.aperture**2 / self.wavelength


@dataclass(frozen=True)
class UserLocation:
    """Polar position relative to the array centre: range in metres, azimuth in
    radians from broadside."""

    radius: float
    angle: float

    def __post_init__(self):
        if self.radius <= 0.0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        if not -math.pi / 2.0 < self.angle < math.pi / 2.0:
            raise ValueError(f"angle must lie in (-pi/2, pi/2), got {self.angle}")

    @classmethod
    def from_degrees(cls, radius: float, angle_deg: float) -> "UserLocation":
        return cls(radius, math.radians(angle_deg))

    @property
    def angle_deg(self) -> float:
        return math.degrees(self.angle)

    @property
    def xy(self) -> tuple[float, float]:
        return (self.radius * math.sin(self.angle), self.radius * math.cos(self.angle))


@dataclass(frozen=True)
class Cluster:
    """Two co-scheduled users sharing one RF chain: high-QoS and low-QoS."""

    high: UserLocation
    low: UserLocation


def element_offsets(geometry: ArrayGeometry) -> np.ndarray:
    """Signed element indices ``n - (N - 1) / 2``, symmetric about zero."""
    n = geometry.num_antennas
    return np.arange(n, dtype=float) - (n - 1) / 2.0


def element_distance(geometry: ArrayGeometry, location: UserLocation, n: int) -> float:
    """Exact distance from element ``n`` to the user (law of cosines)."""
    if not 0 <= n < geometry.num_antennas:
        raise IndexError(
            f"antenna index {n} out of range for {geometry.num_antennas} elements"
        )
    delta = (n - (geometry.num_antennas - 1) / 2.0) * geometry.spacing
    r = location.radius
    return math.sqrt(r * r + delta * delta - 2.0 * delta * r * math.sin(location.angle))


def element_distances(geometry: ArrayGeometry, location: UserLocation) -> np.ndarray:
    """Vector of exact element-to-user distances, one per antenna."""
    delta = element_offsets(geometry) * geometry.spacing
    r = location.radius
    return np.sqrt(r * r + delta * delta - 2.0 * delta * r * math.sin(location.angle))


def near_field_steering(geometry: ArrayGeometry, location: UserLocation) -> np.ndarray:
    """Spherical-wavefront array response; each entry has modulus 1/sqrt(N)."""
    phase = (-2.0 * math.pi / geometry.wavelength) * element_distances(geometry, location)
    return np.exp(1j * phase) / math.sqrt(geometry.num_antennas)


def far_field_steering(geometry: ArrayGeometry, angle: float) -> np.ndarray:
    """Planar-wavefront array response at the given azimuth.

    This is the large-range limit of :func:`near_field_steering` up to a global
    phase, so the inner product between the two tends to unit modulus beyond
    the Fraunhofer distance.
    """
    delta = element_offsets(geometry) * geometry.spacing
    phase = (2.0 * math.pi / geometry.wavelength) * delta * math.sin(angle)
    return np.exp(1j * phase) / math.sqrt(geometry.num_antennas)


def path_loss(radius: float, wavelength: float) -> float:
    """Free-space amplitude gain ``wavelength / (4 pi radius)``."""
    if radius <= 0.0:
        raise ValueError(f"radius must be positive, got {radius}")
    return wavelength / (4.0 * math.pi * radius)


@dataclass(frozen=True)
class Channel:
    """Line-of-sight channel vector together with its amplitude path gain."""

    entries: np.ndarray
    path_gain: float


def channel(geometry: ArrayGeometry, location: UserLocation) -> Channel:
    """Channel ``sqrt(N) * path_gain * steering`` toward the user."""
    gain = path_loss(location.radius, geometry.wavelength)
    entries = math.sqrt(geometry.num_antennas) * gain * near_field_steering(geometry, location)
    return Channel(entries=entries, path_gain=gain)


def cluster_channels(geometry: ArrayGeometry, clusters: list[Cluster]) -> np.ndarray:
    """Stacked channel entries, shape (M, 2, N); index 0 = high-QoS user."""
    rows = np.empty((len(clusters), 2, geometry.num_antennas), dtype=complex)
    for m, cl in enumerate(clusters):
        rows[m, 0] = channel(geometry, cl.high).entries
        rows[m, 1] = channel(geometry, cl.low).entries
    return rows
