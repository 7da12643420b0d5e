"""From a station velocity table to a strain-rate map.

Reads a station table (synthetic here; pass a real file as the first
argument), regresses the two velocity components onto a tensor-spline field
with a curvature penalty whose weight is chosen by marginal likelihood, and
evaluates velocities and strain rates on a regular grid.  Strain rates are
the symmetrized spatial gradients of the fitted velocity field, reported in
nanostrain/yr.
"""

import sys
import warnings

import numpy as np

import pilm

region = pilm.Region(center_lon=138.0, center_lat=36.0, half_width_km=200.0)

if len(sys.argv) > 1:
    table = sys.argv[1]
    spacing = 20.0
else:
    table = "demo06_stations.txt"
    spacing = 40.0
    pilm.write_synthetic_station_table(table, n_stations=150, noise=1.0, seed=7)
    print(f"wrote synthetic table {table}")

stations = pilm.load_stations(table, region)
print(f"{stations.n} stations inside the square (of {stations.n_source} in the file)")

observations, penalties, bases = pilm.build_problem(stations, spacing, "math")
print(f"{observations.n_data} scalar data, {observations.n_params} coefficients")

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    alpha2, best = pilm.optimize_alpha(observations, penalties[0])
print(
    f"penalty weight by marginal likelihood: {alpha2:.3e} "
    f"(log likelihood {best.log_likelihood:.2f}, noise {best.sigma_opt:.2f} mm/yr, "
    f"rmse {best.rmse:.2f} mm/yr)"
)

axis = np.arange(-200.0, 200.0 + 1e-9, 5.0)
field = pilm.strain_rates(best.fit, bases, axis, axis)
field.to_csv("demo06_strain_grid.csv")
peak = np.unravel_index(np.argmax(field.max_shear), field.max_shear.shape)
print(
    f"max shear strain rate {field.max_shear.max():.1f} nanostrain/yr "
    f"at x = {field.x[peak[0]]:g} km, y = {field.y[peak[1]]:g} km"
)
print("wrote demo06_strain_grid.csv")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.5, 5.5))
    mesh = ax.pcolormesh(field.x, field.y, field.max_shear.T, shading="auto")
    ax.quiver(stations.x, stations.y, stations.east, stations.north, color="white")
    ax.set_xlabel("x (km)")
    ax.set_ylabel("y (km)")
    ax.set_title("max shear strain rate (nanostrain/yr) and station velocities")
    fig.colorbar(mesh, ax=ax)
    fig.tight_layout()
    fig.savefig("demo06_strain_map.png", dpi=120)
    print("wrote demo06_strain_map.png")
except ImportError:
    print("matplotlib not available; skipping the figure")
