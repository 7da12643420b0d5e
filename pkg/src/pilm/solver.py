"""Observation systems and closed-form penalized least-squares solves.

The total loss is the squared data misfit plus weighted quadratic penalties;
its unique minimizer solves the normal equations
(H'H + sum_i w_i G_i) a = H'd, handled here by a Cholesky factorization with
condition and residual diagnostics.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import UnderdeterminedSystemError
from .penalties import PenaltyMatrix
from .splines import BSplineBasis1D

__all__ = [
    "ObservationRow",
    "ObservationSystem",
    "PilmFit",
    "ic_system",
    "point_system",
    "solve",
    "evaluate",
    "evaluate_expansion",
]

CONDITION_WARN_THRESHOLD = 1e12
SINGULARITY_TOL = 1e-12


@dataclass(frozen=True)
class ObservationRow:
    """Provenance of one observation row: what was measured and where."""

    kind: str  # "value" or "derivative"
    location: tuple[float, ...]
    component: int = 0


@dataclass(frozen=True)
class ObservationSystem:
    """Design matrix and data vector of a linear observation model."""

    design: np.ndarray
    data: np.ndarray
    rows: tuple[ObservationRow, ...] = ()

    def __post_init__(self):
        design = np.atleast_2d(np.asarray(self.design, dtype=float)).copy()
        data = np.asarray(self.data, dtype=float).ravel().copy()
        if design.shape[0] != data.shape[0]:
            raise ValueError(
                f"{design.shape[0]} design rows but {data.shape[0]} data values"
            )
        design.setflags(write=False)
        data.setflags(write=False)
        object.__setattr__(self, "design", design)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "rows", tuple(self.rows))

    @property
    def n_data(self) -> int:
        return self.data.shape[0]

    @property
    def n_params(self) -> int:
        return self.design.shape[1]


@dataclass(frozen=True)
class PilmFit:
    """Optimal coefficients of a solve plus its loss decomposition and diagnostics."""

    coefficients: np.ndarray
    data_misfit: float
    penalty_values: tuple[float, ...]
    penalty_weights: tuple[float, ...]
    total_loss: float
    normal_residual: float  # ||A a - b|| relative to ||b||
    normal_logdet: float  # log det of the normal matrix H'H + sum w G
    condition_estimate: float

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=float).copy()
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)


def ic_system(basis: BSplineBasis1D, value: float, rate: float) -> ObservationSystem:
    """Two-row system pinning the expansion and its first derivative at t = 0."""
    design = np.vstack([basis.eval_at(0.0, 0), basis.eval_at(0.0, 1)])
    data = np.array([value, rate], dtype=float)
    rows = (
        ObservationRow("value", (0.0,)),
        ObservationRow("derivative", (0.0,)),
    )
    return ObservationSystem(design, data, rows)


def _as_bases(bases) -> tuple[BSplineBasis1D, ...]:
    if isinstance(bases, BSplineBasis1D):
        return (bases,)
    bases = tuple(bases)
    if not 1 <= len(bases) <= 2 or not all(isinstance(b, BSplineBasis1D) for b in bases):
        raise ValueError("bases must be one BSplineBasis1D or a pair of them")
    return bases


def _point_row(bases: tuple[BSplineBasis1D, ...], coords: tuple[float, ...]) -> np.ndarray:
    row = bases[0].eval_at(coords[0], 0)
    if len(bases) == 2:
        row = np.kron(row, bases[1].eval_at(coords[1], 0))
    return row


def point_system(bases, points: Sequence, n_components: int = 1) -> ObservationSystem:
    """One observation row per scalar measurement of a field component.

    ``points`` is a sequence of (coords, component, value) with coords a scalar
    for a 1-D basis or an (axis1, axis2) pair for a tensor-product basis.
    Multi-component problems stack one coefficient block per component, in
    component order.
    """
    bases = _as_bases(bases)
    block = math.prod(b.n_basis for b in bases)
    points = list(points)
    design = np.zeros((len(points), n_components * block))
    data = np.empty(len(points))
    rows = []
    for idx, (coords, component, value) in enumerate(points):
        coords = tuple(np.atleast_1d(np.asarray(coords, dtype=float)))
        if len(coords) != len(bases):
            raise ValueError(
                f"point {idx}: got {len(coords)} coordinates for {len(bases)} axes"
            )
        if not 0 <= component < n_components:
            raise ValueError(f"point {idx}: component {component} out of range")
        try:
            row = _point_row(bases, coords)
        except ValueError as exc:
            raise ValueError(f"point {idx}: {exc}") from exc
        design[idx, component * block : (component + 1) * block] = row
        data[idx] = value
        rows.append(ObservationRow("value", coords, component))
    return ObservationSystem(design, data, tuple(rows))


def solve(
    obs: ObservationSystem,
    penalties: Sequence[tuple[float, PenaltyMatrix]] = (),
) -> PilmFit:
    """Minimize ||d - H a||^2 + sum_i w_i a'G_i a in closed form.

    Raises :class:`UnderdeterminedSystemError` when the normal matrix is not
    positive definite, naming the deficiency size.  A condition estimate above
    1e12 triggers a warning, not an error.
    """
    penalties = list(penalties)
    H, d = obs.design, obs.data
    normal = H.T @ H
    for weight, penalty in penalties:
        if weight < 0:
            raise ValueError(f"penalty weight must be >= 0, got {weight}")
        if penalty.size != obs.n_params:
            raise ValueError(
                f"penalty size {penalty.size} does not match {obs.n_params} parameters"
            )
        normal = normal + weight * penalty.matrix
    rhs = H.T @ d
    try:
        factor = scipy.linalg.cho_factor(normal, lower=True)
    except np.linalg.LinAlgError as exc:
        ev = np.linalg.eigvalsh(normal)
        deficiency = int(np.sum(ev <= SINGULARITY_TOL * max(ev[-1], 0.0)))
        raise UnderdeterminedSystemError(
            f"underdetermined system: normal matrix is not positive definite "
            f"({deficiency} of {normal.shape[0]} modes unconstrained)"
        ) from exc
    coeffs = scipy.linalg.cho_solve(factor, rhs)

    anorm = float(np.abs(normal).sum(axis=0).max())
    rcond, info = scipy.linalg.lapack.dpocon(factor[0], anorm, uplo=b"L")
    condition = float("inf") if rcond == 0 else 1.0 / float(rcond)
    if info == 0 and condition > CONDITION_WARN_THRESHOLD:
        warnings.warn(
            f"normal matrix condition estimate {condition:.2e} exceeds "
            f"{CONDITION_WARN_THRESHOLD:.0e}; solution may lose accuracy",
            stacklevel=2,
        )
    logdet = 2.0 * float(np.sum(np.log(np.diag(factor[0]))))

    residual = d - H @ coeffs
    misfit = float(residual @ residual)
    values = tuple(penalty.quad_form(coeffs) for _, penalty in penalties)
    weights = tuple(float(w) for w, _ in penalties)
    total = misfit + sum(w * v for w, v in zip(weights, values))
    normal_err = float(np.linalg.norm(normal @ coeffs - rhs))
    rhs_norm = float(np.linalg.norm(rhs))
    rel_residual = normal_err / rhs_norm if rhs_norm > 0 else normal_err
    return PilmFit(
        coefficients=coeffs,
        data_misfit=misfit,
        penalty_values=values,
        penalty_weights=weights,
        total_loss=total,
        normal_residual=rel_residual,
        normal_logdet=logdet,
        condition_estimate=condition,
    )


def evaluate_expansion(coeffs: np.ndarray, bases, grid, orders=0) -> np.ndarray:
    """Field values of a coefficient vector on points (1-D) or a tensor grid (2-D).

    For one axis, ``grid`` is an array of coordinates and ``orders`` a single
    derivative order; the result has the shape of ``grid``.  For two axes,
    ``grid`` is a pair of per-axis coordinate arrays and ``orders`` a pair of
    derivative orders; the result has shape ``(len(grid[0]), len(grid[1]))``.
    """
    bases = _as_bases(bases)
    coeffs = np.asarray(coeffs, dtype=float)
    if len(bases) == 1:
        order = int(orders) if np.isscalar(orders) else int(tuple(orders)[0])
        grid_arr = np.asarray(grid, dtype=float)
        values = bases[0].eval_matrix(grid_arr.ravel(), order) @ coeffs
        return values.reshape(grid_arr.shape) if grid_arr.ndim else float(values[0])
    order1, order2 = (orders, orders) if np.isscalar(orders) else tuple(orders)
    axis1, axis2 = grid
    b1 = bases[0].eval_matrix(np.asarray(axis1, dtype=float), int(order1))
    b2 = bases[1].eval_matrix(np.asarray(axis2, dtype=float), int(order2))
    table = coeffs.reshape(bases[0].n_basis, bases[1].n_basis)
    return b1 @ table @ b2.T


def evaluate(fit: PilmFit, bases, grid, orders=0, component: int = 0) -> np.ndarray:
    """Field values of a fit (see :func:`evaluate_expansion`) for one component."""
    bases = _as_bases(bases)
    block = math.prod(b.n_basis for b in bases)
    total = fit.coefficients.shape[0]
    if total % block:
        raise ValueError(f"{total} coefficients do not divide into blocks of {block}")
    n_components = total // block
    if not 0 <= component < n_components:
        raise ValueError(f"component {component} out of range (have {n_components})")
    coeffs = fit.coefficients[component * block : (component + 1) * block]
    return evaluate_expansion(coeffs, bases, grid, orders)
