"""Reference solutions and synthetic datasets (independent of the splines)."""

import numpy as np
import pytest

from pilm import (
    damped_oscillator_solution,
    diffusion_dataset,
    diffusion_reference,
    oscillator_measurements,
    synthetic_velocity_field,
)


class TestOscillatorSolution:
    @pytest.mark.parametrize("damping", [0.0, 1.0, 2.0, 3.0])
    @pytest.mark.parametrize("ic", [(1.0, 0.0), (0.5, 0.5), (0.0, 1.0)])
    def test_satisfies_equation_and_initial_conditions(self, damping, ic):
        value0, rate0 = ic
        t = np.linspace(0.0, 10.0, 2001)
        u = damped_oscillator_solution(1.0, damping, 1.0, value0, rate0, t)
        h = t[1] - t[0]
        # centered finite differences on the interior
        ddu = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / h**2
        du = (u[2:] - u[:-2]) / (2.0 * h)
        residual = ddu + damping * du + u[1:-1]
        assert np.abs(residual).max() < 5e-3
        assert u[0] == pytest.approx(value0, abs=1e-12)
        assert (u[1] - u[0]) / h == pytest.approx(rate0, abs=5e-2)

    def test_critical_damping_closed_form(self):
        t = np.linspace(0.0, 5.0, 50)
        u = damped_oscillator_solution(1.0, 2.0, 1.0, 1.0, 0.0, t)
        np.testing.assert_allclose(u, (1.0 + t) * np.exp(-t), rtol=1e-12)

    def test_invalid_parameters_rejected(self):
        with pytest.raises(ValueError):
            damped_oscillator_solution(0.0, 1.0, 1.0, 1.0, 0.0, [0.0])

    def test_measurement_noise_reproducible(self):
        t = np.arange(0.5, 10.0, 1.0)
        a = oscillator_measurements(t, 1.0, 0.5, 1.0, 0.5, 0.5, noise=0.01, seed=3)
        b = oscillator_measurements(t, 1.0, 0.5, 1.0, 0.5, 0.5, noise=0.01, seed=3)
        c = oscillator_measurements(t, 1.0, 0.5, 1.0, 0.5, 0.5, noise=0.01, seed=4)
        np.testing.assert_array_equal(a, b)
        assert np.any(a != c)


class TestDiffusionReference:
    def test_matches_separable_analytic_solution(self):
        # u = exp(-k pi^2 t) sin(pi x) solves the equation with zero ends
        k = 0.1
        times = np.array([0.0, 0.5, 1.0, 2.0])
        x, snapshots = diffusion_reference(
            lambda x: np.sin(np.pi * x), k, times, n_cells=200
        )
        for row, t in zip(snapshots, times):
            exact = np.exp(-k * np.pi**2 * t) * np.sin(np.pi * x)
            assert np.abs(row - exact).max() < 5e-5

    def test_grid_refinement_converges(self):
        k = 0.1
        times = np.array([1.0])
        errors = []
        for n_cells in (100, 200):
            x, snap = diffusion_reference(
                lambda x: np.sin(np.pi * x), k, times, n_cells=n_cells
            )
            exact = np.exp(-k * np.pi**2) * np.sin(np.pi * x)
            errors.append(np.abs(snap[0] - exact).max())
        assert errors[1] < errors[0] / 2.0

    def test_amplitude_decays(self):
        x, snapshots = diffusion_reference(
            lambda x: np.exp(-(((x - 0.5) / 0.15) ** 2)), 0.1, [0.0, 0.5, 1.0, 2.0]
        )
        peaks = snapshots.max(axis=1)
        assert np.all(np.diff(peaks) < 0)


class TestDiffusionDataset:
    def test_unimodal_lattice(self):
        ds = diffusion_dataset("unimodal")
        assert len(ds.points) == 45
        np.testing.assert_array_equal(ds.sensor_times, [0.4, 0.8, 1.2, 1.6, 2.0])
        assert ds.sensor_x.size == 9

    def test_bimodal_is_denser(self):
        ds = diffusion_dataset("bimodal")
        assert len(ds.points) == 95
        np.testing.assert_array_equal(ds.sensor_times, [0.2, 0.4, 0.8, 1.2, 2.0])
        assert ds.sensor_x.size == 19

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError, match="kind"):
            diffusion_dataset("trimodal")

    def test_clean_values_come_from_reference_field(self):
        ds = diffusion_dataset("unimodal")
        columns = np.rint(ds.sensor_x * (ds.x_grid.size - 1)).astype(int)
        (coords, comp, value) = ds.points[0]
        assert comp == 0
        assert coords[0] == ds.sensor_times[0]
        assert value == ds.snapshots[1, columns[0]]

    def test_noise_reproducible(self):
        a = diffusion_dataset("unimodal", noise=0.01, seed=5)
        b = diffusion_dataset("unimodal", noise=0.01, seed=5)
        assert [p[2] for p in a.points] == [p[2] for p in b.points]


class TestVelocityField:
    def test_smooth_and_bounded(self):
        x = np.linspace(-200.0, 200.0, 21)
        u, v = synthetic_velocity_field(x[:, None], x[None, :])
        assert np.all(np.isfinite(u)) and np.all(np.isfinite(v))
        assert np.abs(u).max() < 50.0 and np.abs(v).max() < 50.0

    def test_station_table_ground_truth(self, station_table):
        path, (x, y, u, v) = station_table
        uu, vv = synthetic_velocity_field(x, y)
        np.testing.assert_allclose(uu, u, rtol=1e-12)
        np.testing.assert_allclose(vv, v, rtol=1e-12)
        header = path.read_text().splitlines()[0].split()
        assert header == ["lon_deg", "lat_deg", "ve_mm_yr", "vn_mm_yr"]
