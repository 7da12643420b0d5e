"""Crustal strain-rate estimation from station velocity tables.

Horizontal station velocities inside a square region are regressed onto a
two-component tensor-spline velocity field; strain rates are the symmetrized
spatial gradients of that field.  Local coordinates are kilometres from the
region center (equirectangular projection); velocities are mm/yr, strain
rates are reported in nanostrain/yr.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import StationFileError
from .penalties import PenaltyMatrix, elasticity_penalty, smoothness_penalty
from .solver import ObservationSystem, PilmFit, evaluate, point_system
from .splines import BSplineBasis1D

__all__ = [
    "EARTH_RADIUS_KM",
    "Region",
    "StationSet",
    "StrainRateGrid",
    "project",
    "unproject",
    "load_stations",
    "build_problem",
    "strain_rates",
]

EARTH_RADIUS_KM = 6371.0
REQUIRED_COLUMNS = ("lon_deg", "lat_deg", "ve_mm_yr", "vn_mm_yr")


@dataclass(frozen=True)
class Region:
    """Square analysis region: center (degrees) and half-width (km)."""

    center_lon: float
    center_lat: float
    half_width_km: float

    def __post_init__(self):
        if self.half_width_km <= 0:
            raise ValueError("region half-width must be positive")

    @property
    def side_km(self) -> float:
        return 2.0 * self.half_width_km


def project(region: Region, lon, lat):
    """Degrees to local km east/north of the region center (equirectangular)."""
    scale = np.pi / 180.0 * EARTH_RADIUS_KM
    x = (np.asarray(lon, dtype=float) - region.center_lon) * scale * np.cos(
        np.deg2rad(region.center_lat)
    )
    y = (np.asarray(lat, dtype=float) - region.center_lat) * scale
    return x, y


def unproject(region: Region, x, y):
    """Inverse of :func:`project`: local km back to degrees."""
    scale = np.pi / 180.0 * EARTH_RADIUS_KM
    lon = region.center_lon + np.asarray(x, dtype=float) / (
        scale * np.cos(np.deg2rad(region.center_lat))
    )
    lat = region.center_lat + np.asarray(y, dtype=float) / scale
    return lon, lat


@dataclass(frozen=True)
class StationSet:
    """Stations inside the region, with both geographic and local coordinates."""

    lon: np.ndarray
    lat: np.ndarray
    east: np.ndarray  # east velocity, mm/yr
    north: np.ndarray  # north velocity, mm/yr
    x: np.ndarray  # local km
    y: np.ndarray
    region: Region
    n_source: int  # row count of the source table before region filtering

    @property
    def n(self) -> int:
        return self.lon.size


def _split_row(line: str) -> list[str]:
    return line.replace(",", " ").split()


def load_stations(source, region: Region) -> StationSet:
    """Read a station velocity table and keep the stations inside the region.

    The table is delimiter-separated text (whitespace or commas) whose header
    must contain the columns lon_deg, lat_deg, ve_mm_yr, vn_mm_yr; extra
    columns are ignored.  Malformed rows and an empty result raise
    :class:`StationFileError` with line numbers.
    """
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as handle:
            lines = handle.readlines()
    elif isinstance(source, io.IOBase) or hasattr(source, "readlines"):
        lines = source.readlines()
    else:
        raise TypeError(f"unsupported station source {type(source)!r}")
    rows = [
        (number, line.strip())
        for number, line in enumerate(lines, start=1)
        if line.strip() and not line.lstrip().startswith("#")
    ]
    if not rows:
        raise StationFileError("station table is empty")
    header = _split_row(rows[0][1])
    try:
        columns = [header.index(name) for name in REQUIRED_COLUMNS]
    except ValueError:
        raise StationFileError(
            f"station table header must contain {REQUIRED_COLUMNS}, got {header}"
        ) from None
    records = []
    bad = []
    for number, line in rows[1:]:
        fields = _split_row(line)
        try:
            records.append([float(fields[c]) for c in columns])
        except (IndexError, ValueError):
            bad.append(number)
    if bad:
        raise StationFileError(f"malformed station rows at lines {bad}")
    if not records:
        raise StationFileError("station table contains a header but no data rows")
    table = np.asarray(records, dtype=float)
    lon, lat, east, north = table.T
    x, y = project(region, lon, lat)
    hw = region.half_width_km
    keep = (np.abs(x) <= hw) & (np.abs(y) <= hw)
    if not keep.any():
        raise StationFileError(
            f"no stations inside the {region.side_km:g} km square at "
            f"({region.center_lon}, {region.center_lat})"
        )
    return StationSet(
        lon=lon[keep],
        lat=lat[keep],
        east=east[keep],
        north=north[keep],
        x=x[keep],
        y=y[keep],
        region=region,
        n_source=len(records),
    )


def build_problem(
    stations: StationSet,
    spacing_km: float,
    regularization: str,
    nu: float = 0.5,
) -> tuple[ObservationSystem, list[PenaltyMatrix], tuple[BSplineBasis1D, BSplineBasis1D]]:
    """Two-component velocity regression over the region square.

    ``spacing_km`` must divide the square side; the basis then has
    side/spacing + 3 functions per axis.  ``regularization`` selects the
    penalty list: "math" (curvature), "phys" (elastic equilibrium at Poisson
    ratio ``nu``), or "hybrid" (both, in that order).  Basis coordinates run
    over [0, side]; local km coordinates map to them by adding the half-width.
    """
    side = stations.region.side_km
    per_axis = side / spacing_km
    if abs(per_axis - round(per_axis)) > 1e-9:
        raise ValueError(
            f"knot spacing {spacing_km} km does not divide the {side:g} km side"
        )
    n_basis = int(round(per_axis)) + 3
    basis = BSplineBasis1D(side, n_basis)
    bases = (basis, basis)
    hw = stations.region.half_width_km
    points = [
        ((x + hw, y + hw), 0, ve)
        for x, y, ve in zip(stations.x, stations.y, stations.east)
    ]
    points += [
        ((x + hw, y + hw), 1, vn)
        for x, y, vn in zip(stations.x, stations.y, stations.north)
    ]
    obs = point_system(bases, points, n_components=2)
    integrals = basis.integral_matrices()
    if regularization == "math":
        penalties = [smoothness_penalty(integrals, integrals)]
    elif regularization == "phys":
        penalties = [elasticity_penalty(integrals, integrals, nu)]
    elif regularization == "hybrid":
        penalties = [
            smoothness_penalty(integrals, integrals),
            elasticity_penalty(integrals, integrals, nu),
        ]
    else:
        raise ValueError(
            f"unknown regularization {regularization!r}; expected math, phys or hybrid"
        )
    return obs, penalties, bases


MM_PER_KM_TO_NANOSTRAIN = 1e3  # (mm/yr)/km = 1e-6/yr = 1000 nanostrain/yr


@dataclass(frozen=True)
class StrainRateGrid:
    """Velocity and strain-rate fields on a tensor grid of local km coordinates.

    Strain components are the symmetrized velocity gradients of the fitted
    field; max_shear is sqrt(((exx - eyy)/2)^2 + exy^2) and rotation is the
    antisymmetric part (dv/dx - du/dy)/2.  Strain units: nanostrain/yr.
    """

    x: np.ndarray  # (nx,) km
    y: np.ndarray  # (ny,)
    u: np.ndarray  # (nx, ny) mm/yr
    v: np.ndarray
    exx: np.ndarray  # nanostrain/yr
    exy: np.ndarray
    eyy: np.ndarray
    max_shear: np.ndarray
    rotation: np.ndarray

    def to_csv(self, path) -> Path:
        """Long-form CSV, one row per grid node, units in the header."""
        path = Path(path)
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(
                "x_km,y_km,u_mm_yr,v_mm_yr,exx_nstr_yr,exy_nstr_yr,eyy_nstr_yr,"
                "max_shear_nstr_yr,rotation_nstr_yr\n"
            )
            for i, xi in enumerate(self.x):
                for j, yj in enumerate(self.y):
                    handle.write(
                        f"{xi:.17g},{yj:.17g},{self.u[i, j]:.17g},{self.v[i, j]:.17g},"
                        f"{self.exx[i, j]:.17g},{self.exy[i, j]:.17g},"
                        f"{self.eyy[i, j]:.17g},{self.max_shear[i, j]:.17g},"
                        f"{self.rotation[i, j]:.17g}\n"
                    )
        return path


def strain_rates(fit: PilmFit, bases, grid_x, grid_y) -> StrainRateGrid:
    """Velocity and strain-rate fields of a fitted model on a local-km grid.

    ``grid_x`` and ``grid_y`` are axis coordinate arrays in local km (region
    center at 0); they must lie inside the model square.
    """
    basis_x, basis_y = bases
    hw_x = basis_x.length / 2.0
    hw_y = basis_y.length / 2.0
    gx = np.asarray(grid_x, dtype=float)
    gy = np.asarray(grid_y, dtype=float)
    shifted = (gx + hw_x, gy + hw_y)
    u = evaluate(fit, bases, shifted, (0, 0), component=0)
    v = evaluate(fit, bases, shifted, (0, 0), component=1)
    du_dx = evaluate(fit, bases, shifted, (1, 0), component=0)
    du_dy = evaluate(fit, bases, shifted, (0, 1), component=0)
    dv_dx = evaluate(fit, bases, shifted, (1, 0), component=1)
    dv_dy = evaluate(fit, bases, shifted, (0, 1), component=1)
    exx = du_dx * MM_PER_KM_TO_NANOSTRAIN
    eyy = dv_dy * MM_PER_KM_TO_NANOSTRAIN
    exy = 0.5 * (du_dy + dv_dx) * MM_PER_KM_TO_NANOSTRAIN
    rotation = 0.5 * (dv_dx - du_dy) * MM_PER_KM_TO_NANOSTRAIN
    max_shear = np.sqrt(((exx - eyy) / 2.0) ** 2 + exy**2)
    return StrainRateGrid(
        x=gx,
        y=gy,
        u=u,
        v=v,
        exx=exx,
        exy=exy,
        eyy=eyy,
        max_shear=max_shear,
        rotation=rotation,
    )
