"""Closed-form reference solutions and synthetic measurement sets.

Everything here is independent of the spline machinery: oscillator solutions
come from the characteristic-root formulas, diffusion fields from an explicit
finite-difference march, and the synthetic velocity table from a fixed smooth
analytic model.  These serve as ground truth for the experiments and tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "damped_oscillator_solution",
    "oscillator_measurements",
    "diffusion_reference",
    "DiffusionDataset",
    "diffusion_dataset",
    "synthetic_velocity_field",
    "write_synthetic_station_table",
]


def damped_oscillator_solution(mass, damping, stiffness, value0, rate0, times):
    """Displacement of m u'' + c u' + k u = 0 with u(0) = value0, u'(0) = rate0.

    Handles the underdamped, critically damped, and overdamped regimes.
    """
    m, c, k = float(mass), float(damping), float(stiffness)
    if m <= 0 or k <= 0 or c < 0:
        raise ValueError("need mass > 0, stiffness > 0, damping >= 0")
    t = np.asarray(times, dtype=float)
    disc = c * c - 4.0 * m * k
    if abs(disc) <= 1e-12 * 4.0 * m * k:
        r = -c / (2.0 * m)
        return (value0 + (rate0 - r * value0) * t) * np.exp(r * t)
    if disc > 0:
        root = np.sqrt(disc)
        r1 = (-c - root) / (2.0 * m)
        r2 = (-c + root) / (2.0 * m)
        b = (rate0 - r1 * value0) / (r2 - r1)
        a = value0 - b
        return a * np.exp(r1 * t) + b * np.exp(r2 * t)
    decay = -c / (2.0 * m)
    omega = np.sqrt(-disc) / (2.0 * m)
    return np.exp(decay * t) * (
        value0 * np.cos(omega * t)
        + (rate0 - decay * value0) / omega * np.sin(omega * t)
    )


def oscillator_measurements(
    times, mass, damping, stiffness, value0, rate0, noise=0.0, seed=0
):
    """Noisy point samples of the closed-form oscillator solution."""
    clean = damped_oscillator_solution(mass, damping, stiffness, value0, rate0, times)
    if noise == 0.0:
        return clean
    rng = np.random.default_rng(seed)
    return clean + noise * rng.standard_normal(clean.shape)


def diffusion_reference(
    initial,
    diffusivity,
    record_times,
    n_cells: int = 400,
    courant: float = 0.25,
):
    """Explicit finite-difference solution of u_t = k u_xx on [0, 1].

    ``initial`` maps x to the starting profile; the field is held at zero on
    both ends.  Snapshots are taken at the nearest time step to each entry of
    ``record_times``.  Returns (x, snapshots) with snapshots of shape
    ``(len(record_times), n_cells + 1)``.
    """
    k = float(diffusivity)
    if k <= 0:
        raise ValueError("diffusivity must be positive")
    record_times = np.asarray(record_times, dtype=float)
    if np.any(record_times < 0):
        raise ValueError("record times must be >= 0")
    x = np.linspace(0.0, 1.0, n_cells + 1)
    dx = x[1] - x[0]
    duration = float(record_times.max())
    dt = courant * dx * dx / k
    n_steps = max(int(np.ceil(duration / dt)), 1) if duration > 0 else 0
    if n_steps:
        dt = duration / n_steps
    record_steps = np.rint(record_times / dt).astype(int) if n_steps else np.zeros(
        record_times.shape, dtype=int
    )
    u = np.asarray(initial(x), dtype=float).copy()
    u[0] = u[-1] = 0.0
    snapshots = np.empty((record_times.size, x.size))
    remaining = {step: [] for step in record_steps}
    for idx, step in enumerate(record_steps):
        remaining[step].append(idx)
    for idx in remaining.get(0, []):
        snapshots[idx] = u
    r = k * dt / (dx * dx) if n_steps else 0.0
    for step in range(1, n_steps + 1):
        u[1:-1] = u[1:-1] + r * (u[2:] - 2.0 * u[1:-1] + u[:-2])
        for idx in remaining.get(step, []):
            snapshots[idx] = u
    return x, snapshots


def _unimodal_profile(x):
    return np.exp(-(((x - 0.5) / 0.15) ** 2))


def _bimodal_profile(x):
    return np.exp(-(((x - 0.3) / 0.1) ** 2)) + 0.7 * np.exp(-(((x - 0.7) / 0.08) ** 2))


@dataclass(frozen=True)
class DiffusionDataset:
    """Sensor-lattice measurements of a diffusing field plus its ground truth."""

    kind: str
    diffusivity: float
    sensor_times: np.ndarray
    sensor_x: np.ndarray
    points: tuple  # (coords=(t, x), component, value) triples for point_system
    x_grid: np.ndarray
    snapshot_times: np.ndarray  # sensor times prefixed with t = 0
    snapshots: np.ndarray
    noise: float
    seed: int

    @property
    def duration(self) -> float:
        return float(self.snapshot_times.max())


def diffusion_dataset(kind: str = "unimodal", noise: float = 0.0, seed: int = 0):
    """Synthetic diffusion measurements on a uniform space-time lattice.

    The true field has diffusivity 0.1 on x in [0, 1] for t in [0, 2], starting
    from one Gaussian bump ("unimodal") or two ("bimodal"; sampled on a denser
    lattice).  Values come from the finite-difference reference solution, plus
    optional Gaussian noise.
    """
    if kind == "unimodal":
        times = np.array([0.4, 0.8, 1.2, 1.6, 2.0])
        xs = np.linspace(0.1, 0.9, 9)
        profile = _unimodal_profile
    elif kind == "bimodal":
        times = np.array([0.2, 0.4, 0.8, 1.2, 2.0])
        xs = np.linspace(0.05, 0.95, 19)
        profile = _bimodal_profile
    else:
        raise ValueError(f"unknown dataset kind {kind!r}")
    diffusivity = 0.1
    snapshot_times = np.concatenate([[0.0], times])
    x_grid, snapshots = diffusion_reference(profile, diffusivity, snapshot_times)
    columns = np.rint(xs * (x_grid.size - 1)).astype(int)
    rng = np.random.default_rng(seed)
    points = []
    for row, t in enumerate(times, start=1):
        values = snapshots[row, columns]
        if noise:
            values = values + noise * rng.standard_normal(values.shape)
        points.extend((((t, x), 0, v) for x, v in zip(xs, values)))
    return DiffusionDataset(
        kind=kind,
        diffusivity=diffusivity,
        sensor_times=times,
        sensor_x=xs,
        points=tuple(points),
        x_grid=x_grid,
        snapshot_times=snapshot_times,
        snapshots=snapshots,
        noise=float(noise),
        seed=int(seed),
    )


def synthetic_velocity_field(x, y):
    """Smooth two-component velocity model on local km coordinates (mm/yr).

    A broad linear trend plus localized shear bands and bumps; deliberately
    not a solution of any equilibrium equation.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    u = (
        8.0 * np.exp(-((x - 50.0) ** 2 + (y - 80.0) ** 2) / (2.0 * 60.0**2))
        - 6.0 * np.exp(-((x + 100.0) ** 2 + (y + 60.0) ** 2) / (2.0 * 80.0**2))
        + 0.01 * x
        - 0.005 * y
    )
    v = (
        10.0 * np.tanh((x + 40.0) / 70.0) * np.exp(-(y**2) / (2.0 * 120.0**2))
        + 5.0 * np.exp(-((x - 120.0) ** 2 + (y + 120.0) ** 2) / (2.0 * 50.0**2))
    )
    return u, v


def write_synthetic_station_table(
    path,
    n_stations: int = 150,
    noise: float = 1.0,
    seed: int = 7,
    center_lon: float = 138.0,
    center_lat: float = 36.0,
    half_width_km: float = 200.0,
    margin_km: float = 0.0,
):
    """Write a station velocity table sampled from the synthetic field.

    Station positions are uniform over the square extended by ``margin_km``
    (stations in the margin exercise region filtering).  The file carries the
    standard header columns lon_deg lat_deg ve_mm_yr vn_mm_yr.  Returns the
    noise-free local-coordinate ground truth (x, y, u, v).
    """
    from .strain import Region, unproject

    rng = np.random.default_rng(seed)
    extent = half_width_km + margin_km
    x = rng.uniform(-extent, extent, n_stations)
    y = rng.uniform(-extent, extent, n_stations)
    u, v = synthetic_velocity_field(x, y)
    east = u + noise * rng.standard_normal(n_stations) if noise else u
    north = v + noise * rng.standard_normal(n_stations) if noise else v
    region = Region(center_lon, center_lat, half_width_km)
    lon, lat = unproject(region, x, y)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("lon_deg lat_deg ve_mm_yr vn_mm_yr\n")
        for values in zip(lon, lat, east, north):
            handle.write(" ".join(f"{value:.12f}" for value in values) + "\n")
    return x, y, u, v
