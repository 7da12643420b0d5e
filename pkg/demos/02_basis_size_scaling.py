"""How accuracy scales with the number of basis functions.

A harmonic oscillator over one hundred time units (sixteen periods) is a
stress test for a fixed uniform basis: coarse models cannot represent the
oscillation at all, then convergence sets in.  In the decay regime the loss
and RMS error fall faster than size^-3, and the smallest eigenvalue of the
residual quadratic form (which would be zero if the model space contained an
exact solution) falls as size^-4 once measured against the function-space
norm.  The coefficient-space eigenvalue falls one power faster.
"""

import warnings

import numpy as np
import scipy.linalg

import pilm

sizes = [2**e for e in range(3, 10)]  # extend to 2**11 for the full study
grid = np.linspace(0.0, 100.0, 2000)
exact = np.cos(grid)

rows = []
print(f"{'size':>6} {'loss':>10} {'rms error':>10} {'min eig':>10} {'min eig/mass':>13}")
for n_basis in sizes:
    basis = pilm.BSplineBasis1D(100.0, n_basis)
    integrals = basis.integral_matrices()
    penalty = pilm.ode_penalty(integrals, 1.0, 0.0, 1.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # large sizes run near the conditioning limit
        fit = pilm.solve(pilm.ic_system(basis, 1.0, 0.0), [(1.0, penalty)])
    rms = float(np.sqrt(np.mean((pilm.evaluate(fit, basis, grid, 0) - exact) ** 2)))
    generalized = float(
        scipy.linalg.eigh(
            penalty.matrix, integrals[0, 0], eigvals_only=True, subset_by_index=[0, 0]
        )[0]
    )
    rows.append((n_basis, fit.total_loss, rms, penalty.min_eigenvalue(), generalized))
    print(
        f"{n_basis:6d} {fit.total_loss:10.2e} {rms:10.2e} "
        f"{penalty.min_eigenvalue():10.2e} {generalized:13.2e}"
    )

table = np.array(rows)
tail = table[-4:]  # decay regime only
logm = np.log(tail[:, 0])
for column, name in ((1, "loss"), (2, "rms error"), (3, "min eigenvalue"),
                     (4, "mass-normalized min eigenvalue")):
    slope = np.polyfit(logm, np.log(np.abs(tail[:, column])), 1)[0]
    print(f"decay-regime slope of {name}: {slope:.2f}")
