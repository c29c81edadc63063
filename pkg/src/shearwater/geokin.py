"""Geodesic distances and kinematic series derived from a trajectory.

All functions are pure. Degenerate inputs (too few points for a
difference) yield empty series rather than errors; series never contain
NaN or infinities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .trajdata import Trajectory

# Mean Earth radius, meters (IUGG mean radius R1).
EARTH_RADIUS_M = 6371008.8

# The twelve per-point feature series, in canonical order: seven base
# series plus the five deltas.
SERIES_NAMES = (
    "velocity",
    "acceleration",
    "distance",
    "longitude",
    "latitude",
    "azimuth",
    "elevation",
    "velocity_delta",
    "longitude_delta",
    "latitude_delta",
    "azimuth_delta",
    "elevation_delta",
)


@dataclass
class Series:
    """A named, finite-valued sequence of reals (possibly empty)."""

    name: str
    values: np.ndarray

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.size and not np.isfinite(self.values).all():
            raise ValueError(f"series {self.name!r} contains non-finite values")

    def __len__(self) -> int:
        return len(self.values)


def haversine(lat1, lon1, lat2, lon2):
    """Great-circle distance in meters on a sphere of mean Earth radius.

    Accepts scalars or aligned arrays (degrees); symmetric and nonnegative.
    """
    phi1, phi2 = np.radians(lat1), np.radians(lat2)
    dphi = phi2 - phi1
    dlam = np.radians(np.asarray(lon2) - np.asarray(lon1))
    a = np.sin(dphi / 2.0) ** 2 + np.cos(phi1) * np.cos(phi2) * np.sin(dlam / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_M * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


def step_distances(traj: Trajectory) -> Series:
    """Per-step great-circle distance, length n-1 (empty when n < 2)."""
    if len(traj) < 2:
        return Series("distance", np.empty(0))
    d = haversine(
        traj.latitude[:-1], traj.longitude[:-1], traj.latitude[1:], traj.longitude[1:]
    )
    return Series("distance", d)


def velocities(traj: Trajectory) -> Series:
    """Per-step speed in m/s: step distance over the elapsed gap."""
    if len(traj) < 2:
        return Series("velocity", np.empty(0))
    dt = np.diff(traj.elapsed)
    return Series("velocity", step_distances(traj).values / dt)


def accelerations(traj: Trajectory) -> Series:
    """Forward difference of velocity over the following elapsed gap.

    Element t is (v[t+1] - v[t]) / (elapsed[t+2] - elapsed[t+1]); length
    n-2, empty when n < 3.
    """
    if len(traj) < 3:
        return Series("acceleration", np.empty(0))
    v = velocities(traj).values
    dt = np.diff(traj.elapsed)[1:]
    return Series("acceleration", np.diff(v) / dt)


def wrap_degrees(delta):
    """Wrap an angular difference in degrees into (-180, 180]."""
    return 180.0 - np.mod(180.0 - np.asarray(delta, dtype=np.float64), 360.0)


def delta_series(s: Series, angular: bool = False) -> Series:
    """Consecutive differences s[t+1] - s[t]; angular mode wraps into (-180, 180]."""
    if len(s) < 2:
        return Series(f"{s.name}_delta", np.empty(0))
    d = np.diff(s.values)
    if angular:
        d = wrap_degrees(d)
    return Series(f"{s.name}_delta", d)


def feature_series(traj: Trajectory) -> list[Series]:
    """The twelve per-point series of a trajectory, in SERIES_NAMES order.

    Point-aligned series (longitude, latitude, azimuth, elevation) keep full
    length n; step series have length n-1 and acceleration n-2. Azimuth
    deltas wrap; the remaining deltas are plain differences (the breeding
    range never crosses the antimeridian, so longitude is treated as linear).
    """
    vel = velocities(traj)
    lon = Series("longitude", traj.longitude)
    lat = Series("latitude", traj.latitude)
    azi = Series("azimuth", traj.sun_azimuth)
    ele = Series("elevation", traj.sun_elevation)
    return [
        vel,
        accelerations(traj),
        step_distances(traj),
        lon,
        lat,
        azi,
        ele,
        delta_series(vel),
        delta_series(lon),
        delta_series(lat),
        delta_series(azi, angular=True),
        delta_series(ele),
    ]
