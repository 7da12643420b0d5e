"""Quadratic penalty matrices for integrated squared linear residuals.

A constant-coefficient linear residual of a spline expansion, squared and
integrated over the domain, is a quadratic form in the coefficients.
Expanding the square turns every pairwise product of residual terms into a
derivative-product integral matrix (1-D) or a Kronecker product of two of
them (2-D tensor basis).  One assembler covers ODE residuals, second-order
PDE residuals, curvature smoothing, and thin-sheet elastic equilibrium; the
named penalty builders below are thin wrappers around it.

Kronecker convention: the left factor acts on the first axis and the right
factor on the second, with the flat parameter index i = k * M2 + l for
first-axis index k and second-axis index l.  Multi-component problems stack
one coefficient block per component in component order.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .splines import IntegralMatrixSet

__all__ = [
    "ResidualTerm",
    "PenaltyMatrix",
    "assemble_penalty",
    "ode_penalty",
    "diffusion_penalty",
    "smoothness_penalty",
    "elasticity_penalty",
    "combine",
]

DEFAULT_RANK_TOL = 1e-10


@dataclass(frozen=True)
class ResidualTerm:
    """One term ``weight * d^orders u_component`` of a residual expression.

    ``orders`` holds one derivative order per axis (each 0..2).
    """

    component: int
    orders: tuple[int, ...]
    weight: float


class PenaltyMatrix:
    """Symmetric positive-semidefinite quadratic form with a cached spectrum.

    Immutable after construction; the eigenvalue cache is computed on first
    use and shared by all subsequent reads, so concurrent reads are safe.
    """

    def __init__(self, matrix: np.ndarray, label: str = "pde"):
        matrix = np.asarray(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"penalty matrix must be square, got shape {matrix.shape}")
        matrix = matrix.copy()
        matrix.setflags(write=False)
        self.matrix = matrix
        self.label = label
        self._eigenvalues = None
        self._lock = threading.Lock()

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def quad_form(self, coeffs: np.ndarray) -> float:
        """Value of the quadratic form a' G a."""
        coeffs = np.asarray(coeffs, dtype=float)
        return float(coeffs @ self.matrix @ coeffs)

    @property
    def eigenvalues(self) -> np.ndarray:
        """All eigenvalues in ascending order (cached, thread-safe)."""
        if self._eigenvalues is None:
            with self._lock:
                if self._eigenvalues is None:
                    if not np.all(np.isfinite(self.matrix)):
                        raise ValueError("penalty matrix contains non-finite entries")
                    ev = np.linalg.eigvalsh(self.matrix)
                    ev.setflags(write=False)
                    self._eigenvalues = ev
        return self._eigenvalues

    def spectrum(self, tol: float = DEFAULT_RANK_TOL) -> tuple[int, float]:
        """Rank and log pseudo-determinant of the form.

        Eigenvalues below ``tol`` times the largest eigenvalue count as zero;
        the log pseudo-determinant is the sum of the logs of the retained
        eigenvalues (0.0 for the zero matrix).
        """
        ev = self.eigenvalues
        largest = ev[-1] if ev.size else 0.0
        if largest <= 0.0:
            return 0, 0.0
        kept = ev[ev > tol * largest]
        return int(kept.size), float(np.sum(np.log(kept)))

    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues[0])

    def max_eigenvalue(self) -> float:
        return float(self.eigenvalues[-1])


def _component_count(equations, n_components):
    seen = -1
    for eq in equations:
        for term in eq:
            seen = max(seen, term.component)
    if n_components is None:
        return seen + 1
    if seen + 1 > n_components:
        raise ValueError(f"component index {seen} exceeds n_components={n_components}")
    return n_components


def assemble_penalty(
    integrals: Sequence[IntegralMatrixSet] | IntegralMatrixSet,
    equations: Iterable[Iterable[ResidualTerm]],
    n_components: int | None = None,
    label: str = "pde",
) -> PenaltyMatrix:
    """Quadratic form of the summed integrated squared residual expressions.

    ``integrals`` holds one integral-matrix set per axis (one or two axes);
    ``equations`` is an iterable of residual expressions, each an iterable of
    :class:`ResidualTerm`.  The result is the sum over expressions of the
    integrated square of that expression.
    """
    if isinstance(integrals, IntegralMatrixSet):
        integrals = (integrals,)
    integrals = tuple(integrals)
    if len(integrals) not in (1, 2):
        raise ValueError(f"expected 1 or 2 axes, got {len(integrals)}")
    equations = [list(eq) for eq in equations]
    for eq in equations:
        for term in eq:
            if len(term.orders) != len(integrals):
                raise ValueError(
                    f"term {term} has {len(term.orders)} derivative orders "
                    f"for {len(integrals)} axes"
                )
            for order in term.orders:
                if order not in (0, 1, 2):
                    raise ValueError(f"derivative order {order} not supported (max 2)")
            if term.component < 0:
                raise ValueError(f"negative component index in {term}")
    n_comp = _component_count(equations, n_components)
    block = math.prod(R.n_basis for R in integrals)
    total = n_comp * block
    G = np.zeros((total, total))
    for eq in equations:
        for t1 in eq:
            for t2 in eq:
                piece = integrals[0][t1.orders[0], t2.orders[0]]
                if len(integrals) == 2:
                    piece = np.kron(piece, integrals[1][t1.orders[1], t2.orders[1]])
                r0, c0 = t1.component * block, t2.component * block
                G[r0 : r0 + block, c0 : c0 + block] += t1.weight * t2.weight * piece
    # the exact form is symmetric; remove last-ulp accumulation-order skew
    G = 0.5 * (G + G.T)
    return PenaltyMatrix(G, label=label)


def ode_penalty(
    integrals: IntegralMatrixSet, mass: float, damping: float, stiffness: float
) -> PenaltyMatrix:
    """Integrated squared residual of m u'' + c u' + k u over the domain."""
    eq = [
        ResidualTerm(0, (2,), float(mass)),
        ResidualTerm(0, (1,), float(damping)),
        ResidualTerm(0, (0,), float(stiffness)),
    ]
    return assemble_penalty((integrals,), [eq], n_components=1, label="ode")


def diffusion_penalty(
    time_integrals: IntegralMatrixSet,
    space_integrals: IntegralMatrixSet,
    diffusivity: float,
) -> PenaltyMatrix:
    """Integrated squared residual of u_t - k u_xx on the tensor basis."""
    eq = [
        ResidualTerm(0, (1, 0), 1.0),
        ResidualTerm(0, (0, 2), -float(diffusivity)),
    ]
    return assemble_penalty((time_integrals, space_integrals), [eq], n_components=1, label="pde")


def smoothness_penalty(
    x_integrals: IntegralMatrixSet, y_integrals: IntegralMatrixSet
) -> PenaltyMatrix:
    """Integrated squared second derivatives of a two-component field.

    Both mixed derivatives are penalized, so the per-component block is
    R22 (x) R00 + 2 R11 (x) R11 + R00 (x) R22, and the full matrix is block
    diagonal over the two components.
    """
    equations = []
    for comp in (0, 1):
        equations += [
            [ResidualTerm(comp, (2, 0), 1.0)],
            [ResidualTerm(comp, (1, 1), 1.0)],
            [ResidualTerm(comp, (1, 1), 1.0)],
            [ResidualTerm(comp, (0, 2), 1.0)],
        ]
    return assemble_penalty(
        (x_integrals, y_integrals), equations, n_components=2, label="math"
    )


def elasticity_penalty(
    x_integrals: IntegralMatrixSet,
    y_integrals: IntegralMatrixSet,
    poisson_ratio: float,
) -> PenaltyMatrix:
    """Integrated squared in-plane equilibrium force of a thin elastic sheet.

    The two velocity components couple through the off-diagonal blocks unless
    poisson_ratio = -1, which decouples them.
    """
    nu = float(poisson_ratio)
    if not -1.0 <= nu <= 0.5:
        raise ValueError(f"Poisson ratio must lie in [-1, 0.5], got {nu}")
    a = 2.0 / (1.0 - nu)
    b = (1.0 + nu) / (1.0 - nu)
    equations = [
        [
            ResidualTerm(0, (2, 0), a),
            ResidualTerm(1, (1, 1), b),
            ResidualTerm(0, (0, 2), 1.0),
        ],
        [
            ResidualTerm(1, (0, 2), a),
            ResidualTerm(0, (1, 1), b),
            ResidualTerm(1, (2, 0), 1.0),
        ],
    ]
    return assemble_penalty(
        (x_integrals, y_integrals), equations, n_components=2, label="phys"
    )


def combine(terms: Sequence[tuple[float, PenaltyMatrix]], label: str = "hybrid") -> PenaltyMatrix:
    """Weighted sum of penalty matrices (weights >= 0, equal sizes)."""
    terms = list(terms)
    if not terms:
        raise ValueError("need at least one (weight, penalty) pair")
    size = terms[0][1].size
    total = np.zeros((size, size))
    for weight, penalty in terms:
        if weight < 0:
            raise ValueError(f"penalty weight must be >= 0, got {weight}")
        if penalty.size != size:
            raise ValueError(f"size mismatch: {penalty.size} != {size}")
        total += weight * penalty.matrix
    return PenaltyMatrix(total, label=label)
