"""Profile-likelihood estimation of unknown scalar equation coefficients.

For each candidate coefficient value the optimal spline coefficients have a
closed form, so the profiled loss L*(theta) is evaluated exactly on a grid
and its minimizer estimates the coefficient.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import PilmError
from .penalties import PenaltyMatrix, diffusion_penalty, ode_penalty
from .solver import ObservationSystem, PilmFit, point_system, solve
from .splines import BSplineBasis1D

__all__ = [
    "ProfileProblem",
    "ProfilePoint",
    "profile_curve",
    "profile_minimum",
    "write_profile_csv",
    "oscillator_profile_problem",
    "diffusion_profile_problem",
]


@dataclass(frozen=True)
class ProfileProblem:
    """A coefficient search grid and the solve family it parameterizes.

    ``build`` maps a coefficient value to (observation system, penalty list);
    the observation system may or may not depend on the coefficient.
    """

    grid: np.ndarray
    build: Callable[[float], tuple[ObservationSystem, list[tuple[float, PenaltyMatrix]]]]

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float).ravel()
        if grid.size < 1:
            raise ValueError("search grid must contain at least one value")
        if grid.size > 1 and not np.all(np.diff(grid) > 0):
            raise ValueError("search grid must be strictly increasing")
        grid.setflags(write=False)
        object.__setattr__(self, "grid", grid)


@dataclass(frozen=True)
class ProfilePoint:
    """One grid point of a profile curve; ``loss`` is NaN when unsolvable."""

    theta: float
    loss: float
    fit: PilmFit | None
    solved: bool
    message: str = ""


def profile_curve(problem: ProfileProblem) -> list[ProfilePoint]:
    """Profiled loss L*(theta) over the grid, in grid order.

    Coefficient values whose system cannot be solved are flagged rather than
    raised, so one bad grid point does not abort the scan.
    """
    curve = []
    for theta in problem.grid:
        obs, penalties = problem.build(float(theta))
        try:
            fit = solve(obs, penalties)
        except PilmError as exc:
            curve.append(ProfilePoint(float(theta), float("nan"), None, False, str(exc)))
            continue
        curve.append(ProfilePoint(float(theta), fit.total_loss, fit, True))
    return curve


def profile_minimum(curve: Sequence[ProfilePoint]) -> tuple[float, PilmFit]:
    """Grid point with the smallest profiled loss (ties go to the smaller theta).

    A minimum at either end of the grid triggers a boundary warning since the
    true optimum may lie outside the scanned range.
    """
    curve = list(curve)
    if not curve:
        raise ValueError("profile curve is empty")
    best = None
    for point in curve:
        if point.solved and (best is None or point.loss < best.loss):
            best = point
    if best is None:
        raise PilmError("no solvable grid point in the profile curve")
    if best is curve[0] or best is curve[-1]:
        warnings.warn(
            f"profile minimum {best.theta} lies on the grid boundary; "
            "the scanned range may not bracket the optimum",
            stacklevel=2,
        )
    return best.theta, best.fit


def write_profile_csv(curve: Sequence[ProfilePoint], path) -> Path:
    """Write the (theta, loss) curve as CSV; unsolvable points carry loss=nan."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("theta,loss,solved\n")
        for point in curve:
            handle.write(f"{point.theta:.17g},{point.loss:.17g},{int(point.solved)}\n")
    return path


def oscillator_profile_problem(
    times,
    values,
    damping_grid,
    *,
    length: float = 10.0,
    n_basis: int = 103,
    mass: float = 1.0,
    stiffness: float = 1.0,
) -> ProfileProblem:
    """Profile problem for an unknown damping coefficient.

    Mass and stiffness are assumed known; the initial conditions are free and
    absorbed by the spline coefficients.  Only the residual penalty depends on
    the scanned damping value.
    """
    basis = BSplineBasis1D(length, n_basis)
    integrals = basis.integral_matrices()
    obs = point_system(basis, [(t, 0, v) for t, v in zip(times, values)])

    def build(damping):
        return obs, [(1.0, ode_penalty(integrals, mass, damping, stiffness))]

    return ProfileProblem(grid=np.asarray(damping_grid, dtype=float), build=build)


def diffusion_profile_problem(
    points,
    diffusivity_grid,
    *,
    duration: float = 2.0,
    extent: float = 1.0,
    n_basis_time: int = 13,
    n_basis_space: int = 13,
) -> ProfileProblem:
    """Profile problem for an unknown diffusivity from scattered samples.

    ``points`` are (coords=(t, x), component, value) triples.  Boundary and
    initial conditions are not imposed; the residual penalty alone
    regularizes the field away from the sensors.
    """
    time_basis = BSplineBasis1D(duration, n_basis_time)
    space_basis = BSplineBasis1D(extent, n_basis_space)
    time_integrals = time_basis.integral_matrices()
    space_integrals = space_basis.integral_matrices()
    obs = point_system((time_basis, space_basis), points)

    def build(diffusivity):
        penalty = diffusion_penalty(time_integrals, space_integrals, diffusivity)
        return obs, [(1.0, penalty)]

    return ProfileProblem(grid=np.asarray(diffusivity_grid, dtype=float), build=build)
