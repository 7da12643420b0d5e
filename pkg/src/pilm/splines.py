"""Uniform cubic B-spline bases and exact integrals of their derivative products.

The model space is spanned by ``n_basis`` shifted copies of one reference
cubic B-spline, placed at spacing ``length / (n_basis - 3)`` over
``[0, length]``; the three functions at each end are truncated by the domain
boundary.  Every quadratic residual penalty downstream reduces to the matrices

    R[a, b][i, j] = integral over [0, length] of phi_i^(a) * phi_j^(b)

for derivative orders a, b in {0, 1, 2}.  The integrands are piecewise
polynomials of degree <= 6 per knot interval, so these matrices are computed
here in closed form (antiderivatives of polynomial products).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.polynomial import Polynomial

__all__ = [
    "MAX_DERIVATIVE_ORDER",
    "REFERENCE_SUPPORT",
    "BSplineBasis1D",
    "IntegralMatrixSet",
    "eval_reference",
]

MAX_DERIVATIVE_ORDER = 2
REFERENCE_SUPPORT = (-2.0, 2.0)

_x = Polynomial([0.0, 1.0])
# Cubic pieces of the reference spline on [-2,-1], [-1,0], [0,1], [1,2].
_PIECES = (
    (_x + 2.0) ** 3 / 6.0,
    (-3.0 * _x**3 - 6.0 * _x**2 + 4.0) / 6.0,
    (3.0 * _x**3 - 6.0 * _x**2 + 4.0) / 6.0,
    -((_x - 2.0) ** 3) / 6.0,
)
_PIECE_DERIVS = tuple(tuple(p.deriv(m) for p in _PIECES) for m in range(3))


def _check_order(order: int) -> None:
    if order not in (0, 1, 2):
        raise ValueError(
            f"derivative order must be 0, 1 or 2, got {order!r}; "
            "the basis is only twice continuously differentiable"
        )


def eval_reference(x, order: int = 0):
    """Evaluate the reference cubic B-spline or one of its first two derivatives.

    The reference function is supported on [-2, 2], twice continuously
    differentiable, symmetric, and sums to one over integer shifts.  Returns
    exactly zero outside the support.  Scalar input gives a float, array input
    an array of the same shape.
    """
    _check_order(order)
    arr = np.asarray(x, dtype=float)
    flat = np.atleast_1d(arr).ravel()
    out = np.zeros(flat.shape)
    for p, poly in enumerate(_PIECE_DERIVS[order]):
        lo = p - 2.0
        # open at -2 so the support boundary is exactly zero, not round-off
        mask = (flat > lo if p == 0 else flat >= lo) & (flat < lo + 1.0)
        if mask.any():
            out[mask] = poly(flat[mask])
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


@dataclass(frozen=True)
class BSplineBasis1D:
    """Uniformly spaced cubic B-splines on [0, length], truncated at the ends.

    Basis function i (i = 0..n_basis-1) is the reference spline scaled to
    spacing ``length / (n_basis - 3)`` and centred at ``(i - 1) * spacing``;
    the three leftmost and rightmost functions lose part of their support to
    the domain boundary.  At every interior point at most four functions are
    nonzero and they sum to one.
    """

    length: float
    n_basis: int

    def __post_init__(self):
        length = float(self.length)
        if not np.isfinite(length) or length <= 0.0:
            raise ValueError(f"domain length must be positive, got {self.length!r}")
        n = self.n_basis
        if int(n) != n or n < 4:
            raise ValueError(f"need an integer basis count >= 4, got {self.n_basis!r}")
        object.__setattr__(self, "length", length)
        object.__setattr__(self, "n_basis", int(n))

    @property
    def spacing(self) -> float:
        return self.length / (self.n_basis - 3)

    @property
    def n_intervals(self) -> int:
        return self.n_basis - 3

    @property
    def centers(self) -> np.ndarray:
        return (np.arange(self.n_basis) - 1.0) * self.spacing

    def _to_units(self, t) -> np.ndarray:
        """Validate domain membership and rescale coordinates to knot units."""
        t = np.asarray(t, dtype=float)
        slack = 1e-12 * max(1.0, self.length)
        bad = (t < -slack) | (t > self.length + slack)
        if bad.any():
            offender = np.atleast_1d(t)[np.atleast_1d(bad)][0]
            raise ValueError(
                f"coordinate {offender!r} outside the model domain [0, {self.length}]"
            )
        return np.clip(t, 0.0, self.length) / self.spacing

    def eval_matrix(self, t, order: int = 0) -> np.ndarray:
        """Rows of basis-function values (or derivatives) at the given coordinates.

        Returns an array of shape ``(len(t), n_basis)`` with at most four
        nonzero entries per row.
        """
        _check_order(order)
        s = np.atleast_1d(self._to_units(t))
        cell = np.clip(np.floor(s).astype(int), 0, self.n_intervals - 1)
        out = np.zeros((s.size, self.n_basis))
        scale = self.spacing ** (-order)
        rows = np.arange(s.size)
        for offset in range(4):
            i = cell + offset
            out[rows, i] = eval_reference(s - (i - 1.0), order) * scale
        return out

    def eval_at(self, t: float, order: int = 0) -> np.ndarray:
        """Basis evaluation vector at a single coordinate (length n_basis)."""
        return self.eval_matrix(np.atleast_1d(float(t)), order)[0]

    def integral_matrices(self) -> "IntegralMatrixSet":
        """All nine matrices of exactly integrated derivative products.

        Works interval by interval: on each knot interval exactly four basis
        functions are active and each restricts to one of four fixed segment
        polynomials, so a 4x4 table of elementary integrals fills the whole
        band.  Boundary truncation falls out of integrating over the domain
        intervals only.
        """
        n, dt = self.n_basis, self.spacing
        n_cells = self.n_intervals
        # Segment polynomials in the local interval variable tau in [0, 1]:
        # segment p is the restriction of the basis function active with local
        # index p, i.e. the reference piece shifted by p - 2.
        segments = [_PIECES[p](Polynomial([p - 2.0, 1.0])) for p in range(4)]
        matrices: dict[tuple[int, int], np.ndarray] = {}
        for a in range(3):
            for b in range(a, 3):
                w = np.empty((4, 4))
                for p in range(4):
                    for q in range(4):
                        if a == b and q < p:
                            w[p, q] = w[q, p]  # exact operand-swap symmetry
                            continue
                        anti = (segments[p].deriv(a) * segments[q].deriv(b)).integ()
                        w[p, q] = anti(1.0) - anti(0.0)
                mat = np.zeros((n, n))
                for p in range(4):
                    for q in range(4):
                        i = np.arange(3 - p, 3 - p + n_cells)
                        j = np.arange(3 - q, 3 - q + n_cells)
                        mat[i, j] += w[p, q]
                mat *= dt ** (1 - a - b)
                mat.setflags(write=False)
                matrices[(a, b)] = mat
        for a in range(3):
            for b in range(a):
                mat = matrices[(b, a)].T.copy()
                mat.setflags(write=False)
                matrices[(a, b)] = mat
        return IntegralMatrixSet(basis=self, matrices=matrices)


@dataclass(frozen=True)
class IntegralMatrixSet:
    """The nine matrices R[a, b] of integrated basis-derivative products.

    Entries vanish for |i - j| >= 4 (disjoint supports), R[a, b] is exactly
    the transpose of R[b, a], and rescaling the domain length by c rescales
    R[a, b] by c**(1 - a - b).
    """

    basis: BSplineBasis1D
    matrices: dict = field(repr=False)

    def __getitem__(self, key: tuple[int, int]) -> np.ndarray:
        a, b = key
        _check_order(a)
        _check_order(b)
        return self.matrices[(a, b)]

    @property
    def n_basis(self) -> int:
        return self.basis.n_basis

    def to_csv(self, directory) -> list[Path]:
        """Debug dump of all nine matrices as CSV files R{a}{b}.csv."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        written = []
        for (a, b), mat in sorted(self.matrices.items()):
            path = directory / f"R{a}{b}.csv"
            np.savetxt(path, mat, delimiter=",", fmt="%.17g")
            written.append(path)
        return written
