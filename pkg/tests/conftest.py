"""Shared test oracles, independent of the package's evaluation paths.

The reference-polynomial table here is hand-expanded (np.polyval layout), the
basis evaluation loops over every function without support windowing, and all
integrals use fixed-order Gauss-Legendre quadrature (4 nodes per knot
interval: exact for the degree <= 6 piecewise-polynomial integrands, and for
their degree <= 6 squares in each variable of a residual).
"""

import numpy as np
import pytest

from pilm import BSplineBasis1D

# reference spline pieces on [-2,-1], [-1,0], [0,1], [1,2];
# coefficients highest order first (np.polyval layout)
ORACLE_PIECES = np.array(
    [
        [1.0 / 6.0, 1.0, 2.0, 4.0 / 3.0],  # (x+2)^3 / 6
        [-0.5, -1.0, 0.0, 2.0 / 3.0],  # (-3x^3 - 6x^2 + 4) / 6
        [0.5, -1.0, 0.0, 2.0 / 3.0],  # (3x^3 - 6x^2 + 4) / 6
        [-1.0 / 6.0, 1.0, -2.0, 4.0 / 3.0],  # -(x-2)^3 / 6
    ]
)

GAUSS_NODES, GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(4)


def oracle_reference(x, order=0):
    """Reference spline (or derivative) via the hand-expanded piece table."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape)
    for piece, coeffs in enumerate(ORACLE_PIECES):
        lo = piece - 2.0
        mask = (x >= lo) & (x < lo + 1.0)
        if mask.any():
            out[mask] = np.polyval(np.polyder(coeffs, order) if order else coeffs, x[mask])
    return out


def oracle_basis_matrix(length, n_basis, t, order=0):
    """(len(t), n_basis) basis values by brute force over every function."""
    t = np.asarray(t, dtype=float)
    dt = length / (n_basis - 3)
    out = np.empty((t.size, n_basis))
    for i in range(n_basis):
        out[:, i] = oracle_reference((t - (i - 1) * dt) / dt, order) * dt ** (-order)
    return out


def _cell_nodes(length, n_cells):
    """Gauss-Legendre nodes and weights tiled over every knot interval."""
    dt = length / n_cells
    edges = dt * np.arange(n_cells)
    nodes = (edges[:, None] + 0.5 * dt * (GAUSS_NODES + 1.0)[None, :]).ravel()
    weights = np.tile(0.5 * dt * GAUSS_WEIGHTS, n_cells)
    return nodes, weights


def quad_integral_matrix(length, n_basis, a, b):
    """Quadrature oracle for the derivative-product integral matrix R[a, b]."""
    nodes, weights = _cell_nodes(length, n_basis - 3)
    left = oracle_basis_matrix(length, n_basis, nodes, a)
    right = oracle_basis_matrix(length, n_basis, nodes, b)
    return left.T @ (weights[:, None] * right)


def quad_residual_1d(length, n_basis, equations, coeffs):
    """Quadrature oracle for the summed integrated squared 1-D residuals.

    ``equations`` uses the same (component, orders, weight) terms as the
    package's assembler; coefficients are stacked per component.
    """
    nodes, weights = _cell_nodes(length, n_basis - 3)
    tables = {
        order: oracle_basis_matrix(length, n_basis, nodes, order) for order in range(3)
    }
    coeffs = np.asarray(coeffs, dtype=float)
    total = 0.0
    for eq in equations:
        residual = np.zeros(nodes.size)
        for term in eq:
            block = coeffs[term.component * n_basis : (term.component + 1) * n_basis]
            residual += term.weight * (tables[term.orders[0]] @ block)
        total += float(weights @ residual**2)
    return total


def quad_residual_2d(lengths, sizes, equations, coeffs):
    """Quadrature oracle for integrated squared residuals on a tensor basis."""
    nodes1, w1 = _cell_nodes(lengths[0], sizes[0] - 3)
    nodes2, w2 = _cell_nodes(lengths[1], sizes[1] - 3)
    tab1 = {o: oracle_basis_matrix(lengths[0], sizes[0], nodes1, o) for o in range(3)}
    tab2 = {o: oracle_basis_matrix(lengths[1], sizes[1], nodes2, o) for o in range(3)}
    block = sizes[0] * sizes[1]
    coeffs = np.asarray(coeffs, dtype=float)
    weight_grid = np.outer(w1, w2)
    total = 0.0
    for eq in equations:
        residual = np.zeros((nodes1.size, nodes2.size))
        for term in eq:
            table = coeffs[term.component * block : (term.component + 1) * block]
            table = table.reshape(sizes[0], sizes[1])
            residual += term.weight * (
                tab1[term.orders[0]] @ table @ tab2[term.orders[1]].T
            )
        total += float(np.sum(weight_grid * residual**2))
    return total


def lsq_coeffs_1d(basis: BSplineBasis1D, fn):
    """Least-squares spline coefficients of a function on a dense grid."""
    grid = np.linspace(0.0, basis.length, max(4 * basis.n_basis, 60))
    design = basis.eval_matrix(grid, 0)
    return np.linalg.lstsq(design, fn(grid), rcond=None)[0]


def lsq_coeffs_2d(basis1: BSplineBasis1D, basis2: BSplineBasis1D, fn):
    """Tensor least-squares coefficients via the separable normal equations."""
    g1 = np.linspace(0.0, basis1.length, 4 * basis1.n_basis)
    g2 = np.linspace(0.0, basis2.length, 4 * basis2.n_basis)
    b1 = basis1.eval_matrix(g1, 0)
    b2 = basis2.eval_matrix(g2, 0)
    values = fn(g1[:, None], g2[None, :])
    normal = np.kron(b1.T @ b1, b2.T @ b2)
    rhs = (b1.T @ values @ b2).ravel()
    return np.linalg.solve(normal, rhs)


@pytest.fixture(scope="session")
def station_table(tmp_path_factory):
    """Frozen synthetic station table (150 stations, 20 km margin, seed 7)."""
    from pilm import write_synthetic_station_table

    path = tmp_path_factory.mktemp("stations") / "stations.txt"
    truth = write_synthetic_station_table(
        path, n_stations=150, noise=1.0, seed=7, margin_km=20.0
    )
    return path, truth
