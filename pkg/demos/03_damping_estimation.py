"""Estimate an unknown damping coefficient from ten noisy samples.

Only the equation family is assumed (mass and stiffness known, damping not),
and the initial conditions are unknown too: they are absorbed by the spline
coefficients.  For each candidate damping value the optimal fit is a closed
form, so the profiled loss L*(c) is scanned exactly on a grid; its minimum
estimates the damping.  With clean data the minimum is sharp and lands on the
true value 0.5; rising noise first thickens, then biases the estimate.
"""

import numpy as np

import pilm
from pilm.inverse import write_profile_csv

TRUE_DAMPING = 0.5
times = np.arange(0.5, 10.0, 1.0)
grid = np.round(np.arange(0.0, 1.5 + 1e-9, 0.01), 10)

for noise in (0.0, 0.01, 0.05, 0.1):
    values = pilm.oscillator_measurements(
        times, 1.0, TRUE_DAMPING, 1.0, 0.5, 0.5, noise=noise, seed=0
    )
    problem = pilm.oscillator_profile_problem(times, values, grid)
    curve = pilm.profile_curve(problem)
    c_star, fit = pilm.profile_minimum(curve)
    print(
        f"noise sigma = {noise:<5g} estimated damping = {c_star:.2f} "
        f"(loss at minimum {fit.total_loss:.3e})"
    )
    if noise == 0.0:
        write_profile_csv(curve, "demo03_profile_clean.csv")

print("wrote demo03_profile_clean.csv (columns: theta, loss, solved)")
print("note: a single noisy realization can land away from 0.5 at high noise;")
print("the estimate is reliable in the low-noise regime")
