"""Command-line front end: batch experiments with reproducible artifacts.

Every subcommand resolves its knobs from built-in defaults, an optional flat
key=value config file, and command-line flags (in that order), writes the
resolved config next to its outputs, and emits plot-ready CSV files plus a
key=value report.  Exit codes: 0 success, 2 config error, 3 data error,
4 numerical failure, 5 comparison tolerance exceeded.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

import numpy as np

from . import bayes, inverse, penalties, solver, splines, strain, synthetic
from .errors import PilmError, StationFileError

__all__ = ["main"]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4
EXIT_TOLERANCE = 5


class ConfigError(Exception):
    pass


class CompareMismatch(Exception):
    pass


def _parse_config_file(path: Path) -> dict:
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    values = {}
    for number, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{number}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    return values


def _resolve(defaults: dict, args: argparse.Namespace) -> dict:
    """Defaults, overridden by config-file entries, overridden by flags."""
    config = dict(defaults)
    if getattr(args, "config", None):
        for key, raw in _parse_config_file(Path(args.config)).items():
            if key not in defaults:
                raise ConfigError(f"unknown config key {key!r}")
            try:
                config[key] = type(defaults[key])(raw)
            except ValueError as exc:
                raise ConfigError(f"config key {key!r}: {exc}") from exc
    for key in defaults:
        flag = getattr(args, key.replace("-", "_"), None)
        if flag is not None:
            config[key] = flag
    return config


def _prepare_outdir(config: dict, name: str) -> Path:
    outdir = Path(config["out"]) if config["out"] else Path("runs") / name
    outdir.mkdir(parents=True, exist_ok=True)
    lines = [f"experiment = {name}"]
    lines += [f"{key} = {config[key]}" for key in sorted(config) if key != "out"]
    (outdir / "config.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return outdir


def _write_report(outdir: Path, name: str, metrics: dict) -> Path:
    lines = [f"experiment = {name}"]
    lines += [f"{key} = {value}" for key, value in metrics.items()]
    path = outdir / "report.txt"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _floats(text: str) -> list[float]:
    return [float(part) for part in str(text).split(",") if part.strip()]


def _log_grid(spec: str) -> np.ndarray:
    """Parse 'start:stop:step' into an inclusive arange."""
    try:
        start, stop, step = (float(part) for part in spec.split(":"))
    except ValueError as exc:
        raise ConfigError(f"expected 'start:stop:step', got {spec!r}") from exc
    if step <= 0 or stop < start:
        raise ConfigError(f"bad grid range {spec!r}")
    return np.arange(start, stop + 1e-9, step)


# ---------------------------------------------------------------------------
# experiments

OSC_FORWARD_DEFAULTS = {
    "length": 10.0,
    "mass": 1.0,
    "stiffness": 1.0,
    "dampings": "0,1,2,3",
    "sizes": "13,103",
    "grid-points": 1000,
    "out": "",
}


def run_oscillator_forward(config: dict) -> dict:
    outdir = _prepare_outdir(config, "oscillator-forward")
    ics = [(1.0, 0.0), (0.5, 0.5), (0.0, 1.0)]
    tgrid = np.linspace(0.0, config["length"], int(config["grid-points"]))
    metrics = {}
    worst = 0.0
    for n_basis in (int(m) for m in _floats(config["sizes"])):
        basis = splines.BSplineBasis1D(config["length"], n_basis)
        integrals = basis.integral_matrices()
        for damping in _floats(config["dampings"]):
            penalty = penalties.ode_penalty(
                integrals, config["mass"], damping, config["stiffness"]
            )
            columns = [tgrid]
            header = ["t"]
            for value0, rate0 in ics:
                fit = solver.solve(
                    solver.ic_system(basis, value0, rate0), [(1.0, penalty)]
                )
                estimate = solver.evaluate(fit, basis, tgrid, 0)
                exact = synthetic.damped_oscillator_solution(
                    config["mass"], damping, config["stiffness"], value0, rate0, tgrid
                )
                columns += [estimate, exact]
                header += [f"u_{value0}_{rate0}", f"exact_{value0}_{rate0}"]
                err = float(np.abs(estimate - exact).max())
                worst = max(worst, err)
                metrics[f"max_error_c{damping:g}_M{n_basis}_ic{value0:g}_{rate0:g}"] = (
                    f"{err:.3e}"
                )
            np.savetxt(
                outdir / f"solution_c{damping:g}_M{n_basis}.csv",
                np.column_stack(columns),
                delimiter=",",
                fmt="%.17g",
                header=",".join(header),
                comments="",
            )
    metrics["max_error_overall"] = f"{worst:.3e}"
    _write_report(outdir, "oscillator-forward", metrics)
    return metrics


OSC_SCALING_DEFAULTS = {
    "length": 100.0,
    "min-exp": 3,
    "max-exp": 11,
    "grid-points": 2000,
    "out": "",
}


def run_oscillator_scaling(config: dict) -> dict:
    outdir = _prepare_outdir(config, "oscillator-scaling")
    sizes = [2**e for e in range(int(config["min-exp"]), int(config["max-exp"]) + 1)]
    tgrid = np.linspace(0.0, config["length"], int(config["grid-points"]))
    exact = np.cos(tgrid)
    rows = []
    for n_basis in sizes:
        basis = splines.BSplineBasis1D(config["length"], n_basis)
        penalty = penalties.ode_penalty(basis.integral_matrices(), 1.0, 0.0, 1.0)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            fit = solver.solve(solver.ic_system(basis, 1.0, 0.0), [(1.0, penalty)])
        estimate = solver.evaluate(fit, basis, tgrid, 0)
        rms = float(np.sqrt(np.mean((estimate - exact) ** 2)))
        rows.append((n_basis, fit.total_loss, rms, penalty.min_eigenvalue()))
    table = np.array(rows)
    np.savetxt(
        outdir / "scaling.csv",
        table,
        delimiter=",",
        fmt="%.17g",
        header="n_basis,loss,rms_error,min_eigenvalue",
        comments="",
    )
    logm = np.log(table[:, 0])
    metrics = {}
    for column, name in ((1, "loss"), (2, "rms_error"), (3, "min_eigenvalue")):
        values = np.log(np.abs(table[:, column]))
        metrics[f"slope_{name}"] = f"{np.polyfit(logm, values, 1)[0]:.3f}"
        tail = slice(len(sizes) // 2, None)
        metrics[f"slope_{name}_decay_regime"] = (
            f"{np.polyfit(logm[tail], values[tail], 1)[0]:.3f}"
        )
    _write_report(outdir, "oscillator-scaling", metrics)
    return metrics


OSC_INVERSE_DEFAULTS = {
    "length": 10.0,
    "n-basis": 103,
    "mass": 1.0,
    "stiffness": 1.0,
    "true-damping": 0.5,
    "value0": 0.5,
    "rate0": 0.5,
    "noise": 0.0,
    "seed": 0,
    "grid-min": 0.0,
    "grid-max": 1.5,
    "grid-step": 0.01,
    "out": "",
}


def run_oscillator_inverse(config: dict) -> dict:
    outdir = _prepare_outdir(config, "oscillator-inverse")
    times = np.arange(0.5, config["length"], 1.0)
    values = synthetic.oscillator_measurements(
        times,
        config["mass"],
        config["true-damping"],
        config["stiffness"],
        config["value0"],
        config["rate0"],
        noise=config["noise"],
        seed=int(config["seed"]),
    )
    grid = np.round(
        np.arange(config["grid-min"], config["grid-max"] + 1e-9, config["grid-step"]),
        12,
    )
    problem = inverse.oscillator_profile_problem(
        times,
        values,
        grid,
        length=config["length"],
        n_basis=int(config["n-basis"]),
        mass=config["mass"],
        stiffness=config["stiffness"],
    )
    curve = inverse.profile_curve(problem)
    c_star, fit = inverse.profile_minimum(curve)
    inverse.write_profile_csv(curve, outdir / "profile.csv")
    np.savetxt(
        outdir / "data_points.csv",
        np.column_stack([times, values]),
        delimiter=",",
        fmt="%.17g",
        header="t,u",
        comments="",
    )
    basis = splines.BSplineBasis1D(config["length"], int(config["n-basis"]))
    tgrid = np.linspace(0.0, config["length"], 500)
    np.savetxt(
        outdir / "solution_at_optimum.csv",
        np.column_stack([tgrid, solver.evaluate(fit, basis, tgrid, 0)]),
        delimiter=",",
        fmt="%.17g",
        header="t,u",
        comments="",
    )
    metrics = {
        "c_star": f"{c_star:.2f}",
        "loss_at_optimum": f"{fit.total_loss:.6e}",
    }
    _write_report(outdir, "oscillator-inverse", metrics)
    return metrics


DIFFUSION_DEFAULTS = {
    "dataset": "unimodal",
    "noise": 0.0,
    "seed": 0,
    "n-basis-time": 13,
    "n-basis-space": 13,
    "grid-min": 0.01,
    "grid-max": 0.3,
    "grid-step": 0.005,
    "out": "",
}


def run_diffusion_inverse(config: dict) -> dict:
    outdir = _prepare_outdir(config, "diffusion-inverse")
    dataset = synthetic.diffusion_dataset(
        config["dataset"], noise=config["noise"], seed=int(config["seed"])
    )
    grid = np.round(
        np.arange(config["grid-min"], config["grid-max"] + 1e-9, config["grid-step"]),
        12,
    )
    problem = inverse.diffusion_profile_problem(
        dataset.points,
        grid,
        n_basis_time=int(config["n-basis-time"]),
        n_basis_space=int(config["n-basis-space"]),
    )
    curve = inverse.profile_curve(problem)
    k_star, fit = inverse.profile_minimum(curve)
    inverse.write_profile_csv(curve, outdir / "profile.csv")
    bases = (
        splines.BSplineBasis1D(2.0, int(config["n-basis-time"])),
        splines.BSplineBasis1D(1.0, int(config["n-basis-space"])),
    )
    xs = dataset.x_grid
    initial_estimate = solver.evaluate(fit, bases, (np.array([0.0]), xs), (0, 0))[0]
    np.savetxt(
        outdir / "initial_reconstruction.csv",
        np.column_stack([xs, dataset.snapshots[0], initial_estimate]),
        delimiter=",",
        fmt="%.17g",
        header="x,true_initial,estimated_initial",
        comments="",
    )
    metrics = {
        "k_star": f"{k_star:.3f}",
        "loss_at_optimum": f"{fit.total_loss:.6e}",
        "n_measurements": len(dataset.points),
    }
    _write_report(outdir, "diffusion-inverse", metrics)
    return metrics


ELASTICITY_DEFAULTS = {
    "case": "both",
    "boundary-points": 80,
    "out": "",
}

_ELASTICITY_CASES = {
    "quadratic": {
        "u": lambda x, y: x * x - y * y,
        "v": lambda x, y: -2.0 * x * y,
        "nu": 0.5,
        "n_axis": 23,
    },
    "quartic": {
        "u": lambda x, y: x**4 - 6.0 * x**2 * y**2 + y**4,
        "v": lambda x, y: -4.0 * x * y * (x**2 - y**2),
        "nu": 0.0,
        "n_axis": 43,
    },
}


def run_elasticity_case(name: str, n_boundary: int, outdir: Path | None = None):
    """Solve one boundary-data equilibrium verification on the unit square."""
    case = _ELASTICITY_CASES[name]
    half = 0.5
    basis = splines.BSplineBasis1D(1.0, case["n_axis"])
    bases = (basis, basis)
    integrals = basis.integral_matrices()
    per_side = n_boundary // 4
    s = np.linspace(-half, half, per_side + 1)[:-1]
    boundary = (
        [(x, -half) for x in s]
        + [(half, y) for y in s]
        + [(-x, half) for x in s]
        + [(-half, -y) for y in s]
    )
    points = [((x + half, y + half), 0, case["u"](x, y)) for x, y in boundary]
    points += [((x + half, y + half), 1, case["v"](x, y)) for x, y in boundary]
    obs = solver.point_system(bases, points, n_components=2)
    penalty = penalties.elasticity_penalty(integrals, integrals, case["nu"])
    fit = solver.solve(obs, [(1.0, penalty)])
    axis = np.linspace(0.0, 1.0, 41)
    u_fit = solver.evaluate(fit, bases, (axis, axis), (0, 0), component=0)
    v_fit = solver.evaluate(fit, bases, (axis, axis), (0, 0), component=1)
    gx, gy = np.meshgrid(axis - half, axis - half, indexing="ij")
    residual = np.maximum(
        np.abs(u_fit - case["u"](gx, gy)), np.abs(v_fit - case["v"](gx, gy))
    )
    if outdir is not None:
        rows = np.column_stack(
            [gx.ravel(), gy.ravel(), u_fit.ravel(), v_fit.ravel(), residual.ravel()]
        )
        np.savetxt(
            outdir / f"residual_{name}.csv",
            rows,
            delimiter=",",
            fmt="%.17g",
            header="x,y,u,v,abs_residual",
            comments="",
        )
    return float(residual.max())


def run_elasticity_verify(config: dict) -> dict:
    outdir = _prepare_outdir(config, "elasticity-verify")
    which = config["case"]
    names = list(_ELASTICITY_CASES) if which == "both" else [which]
    if not set(names) <= set(_ELASTICITY_CASES):
        raise ConfigError(f"unknown elasticity case {which!r}")
    metrics = {}
    for name in names:
        residual = run_elasticity_case(name, int(config["boundary-points"]), outdir)
        metrics[f"max_residual_{name}"] = f"{residual:.3e}"
    _write_report(outdir, "elasticity-verify", metrics)
    return metrics


STRAIN_DEFAULTS = {
    "data": "",
    "reg": "math",
    "nu": 0.5,
    "center-lon": 138.0,
    "center-lat": 36.0,
    "half-width": 200.0,
    "spacing": 20.0,
    "grid-spacing": 5.0,
    "alpha-grid": "-12:6:0.25",
    "rank-tol": 1e-10,
    "out": "",
}


def _load_station_set(config: dict) -> strain.StationSet:
    if not config["data"]:
        raise ConfigError("a station table is required (--data)")
    region = strain.Region(
        config["center-lon"], config["center-lat"], config["half-width"]
    )
    return strain.load_stations(config["data"], region)


def run_strain(config: dict) -> dict:
    outdir = _prepare_outdir(config, "strain")
    if config["reg"] not in ("math", "phys"):
        raise ConfigError(
            f"strain supports reg = math or phys, got {config['reg']!r}; "
            "use hybrid-scan for the two-penalty search"
        )
    stations = _load_station_set(config)
    obs, penalty_list, bases = strain.build_problem(
        stations, config["spacing"], config["reg"], nu=config["nu"]
    )
    penalty = penalty_list[0]
    grid = _log_grid(config["alpha-grid"])
    curve = bayes.ll_curve(obs, penalty, grid, rank_tol=config["rank-tol"])
    bayes.write_curve_csv(curve, outdir / "ll_curve.csv")
    alpha2_star, best = bayes.optimize_alpha(
        obs, penalty, grid, rank_tol=config["rank-tol"]
    )
    hw = config["half-width"]
    axis = np.arange(-hw, hw + 1e-9, config["grid-spacing"])
    field = strain.strain_rates(best.fit, bases, axis, axis)
    field.to_csv(outdir / "strain_grid.csv")
    label = config["reg"] if config["reg"] == "math" else f"phys(nu={config['nu']:g})"
    metrics = {
        "regularization": label,
        "stations": stations.n,
        "parameters": obs.n_params,
        "alpha2_star": f"{alpha2_star:.6e}",
        "log_marginal_likelihood": f"{best.log_likelihood:.2f}",
        "sigma_star_mm_yr": f"{best.sigma_opt:.2f}",
        "rmse_mm_yr": f"{best.rmse:.2f}",
        "abic": f"{bayes.abic(best.log_likelihood, 1):.2f}",
    }
    _write_report(outdir, "strain", metrics)
    return metrics


HYBRID_DEFAULTS = {
    "data": "",
    "nu": 0.5,
    "center-lon": 138.0,
    "center-lat": 36.0,
    "half-width": 200.0,
    "spacing": 20.0,
    "math-grid": "-4:8:1",
    "phys-grid": "-8:4:1",
    "alpha-grid": "-12:6:0.25",
    "rank-tol": 1e-10,
    "out": "",
}


def run_hybrid_scan(config: dict) -> dict:
    outdir = _prepare_outdir(config, "hybrid-scan")
    stations = _load_station_set(config)
    obs, (g_math, g_phys), bases = strain.build_problem(
        stations, config["spacing"], "hybrid", nu=config["nu"]
    )
    alpha2_star, best = bayes.optimize_alpha(
        obs, g_math, _log_grid(config["alpha-grid"]), rank_tol=config["rank-tol"]
    )
    surface = bayes.hybrid_surface(
        obs,
        g_math,
        g_phys,
        10.0 ** _log_grid(config["math-grid"]),
        np.concatenate([[0.0], 10.0 ** _log_grid(config["phys-grid"])]),
        rank_tol=config["rank-tol"],
    )
    bayes.write_surface_csv(surface, outdir / "ll_surface.csv")
    max_hybrid = surface.max_feasible()
    metrics = {
        "ll_star_math": f"{best.log_likelihood:.2f}",
        "alpha2_star_math": f"{alpha2_star:.6e}",
        "max_ll_hybrid": f"{max_hybrid:.2f}",
        "hybrid_exceeds_math": str(max_hybrid > best.log_likelihood + 1e-6),
        "abic_math": f"{bayes.abic(best.log_likelihood, 1):.2f}",
        "abic_hybrid_best": f"{bayes.abic(max_hybrid, 2):.2f}",
        "max_factorization_gap": f"{np.nanmax(surface.factorization_gap):.3e}",
    }
    _write_report(outdir, "hybrid-scan", metrics)
    return metrics


def run_compare(args: argparse.Namespace) -> int:
    reports = []
    for path in (args.report_a, args.report_b):
        path = Path(path)
        if not path.exists():
            raise StationFileError(f"report not found: {path}")
        entries = {}
        for line in path.read_text(encoding="utf-8").splitlines():
            if "=" in line:
                key, _, value = line.partition("=")
                entries[key.strip()] = value.strip()
        reports.append(entries)
    first, second = reports
    if first.get("experiment") != second.get("experiment"):
        raise CompareMismatch(
            f"cannot compare {first.get('experiment')!r} with "
            f"{second.get('experiment')!r}"
        )
    exceeded = False
    shared = [k for k in first if k in second and k != "experiment"]
    for key in shared:
        try:
            delta = float(second[key]) - float(first[key])
        except ValueError:
            state = "equal" if first[key] == second[key] else "differs"
            print(f"{key}: {first[key]} vs {second[key]} ({state})")
            continue
        print(f"{key}: {first[key]} -> {second[key]} (delta {delta:+.6g})")
        if args.tolerance is not None and abs(delta) > args.tolerance:
            exceeded = True
    only = [k for k in (set(first) ^ set(second)) if k != "experiment"]
    for key in sorted(only):
        print(f"{key}: present in only one report")
    if exceeded:
        print(f"tolerance {args.tolerance} exceeded")
        return EXIT_TOLERANCE
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing

EXPERIMENTS = {
    "oscillator-forward": (
        OSC_FORWARD_DEFAULTS,
        run_oscillator_forward,
        "damped-oscillator solutions for several damping values, initial "
        "conditions and basis sizes, with closed-form comparisons",
    ),
    "oscillator-scaling": (
        OSC_SCALING_DEFAULTS,
        run_oscillator_scaling,
        "harmonic-oscillator accuracy, loss and penalty min-eigenvalue versus "
        "basis size (powers of two), with log-log slopes",
    ),
    "oscillator-inverse": (
        OSC_INVERSE_DEFAULTS,
        run_oscillator_inverse,
        "grid-search estimation of an unknown damping coefficient from noisy "
        "point data with unknown initial conditions",
    ),
    "diffusion-inverse": (
        DIFFUSION_DEFAULTS,
        run_diffusion_inverse,
        "grid-search estimation of an unknown diffusivity from sensor-lattice "
        "data with unknown boundary and initial conditions",
    ),
    "elasticity-verify": (
        ELASTICITY_DEFAULTS,
        run_elasticity_verify,
        "equilibrium-penalty solves against closed-form elastic fields given "
        "only boundary values (quadratic and quartic cases)",
    ),
    "strain": (
        STRAIN_DEFAULTS,
        run_strain,
        "station-velocity regression over a square region with curvature or "
        "equilibrium regularization; emits velocity/strain-rate grids and a "
        "marginal-likelihood report",
    ),
    "hybrid-scan": (
        HYBRID_DEFAULTS,
        run_hybrid_scan,
        "marginal-likelihood surface over a grid of combined curvature + "
        "equilibrium penalty weights, compared with the single-penalty optimum",
    ),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pilm",
        description="Physics-informed linear model experiments on spline bases.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (defaults, _, help_text) in EXPERIMENTS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("--config", help="flat key = value config file")
        for key, default in defaults.items():
            flag = f"--{key}"
            if isinstance(default, bool):
                p.add_argument(flag, type=lambda s: s.lower() == "true", default=None)
            elif isinstance(default, int):
                p.add_argument(flag, type=int, default=None)
            elif isinstance(default, float):
                p.add_argument(flag, type=float, default=None)
            else:
                p.add_argument(flag, type=str, default=None)
    cmp_parser = sub.add_parser(
        "compare", help="diff two run reports of the same experiment"
    )
    cmp_parser.add_argument("report_a")
    cmp_parser.add_argument("report_b")
    cmp_parser.add_argument(
        "--tolerance",
        type=float,
        default=None,
        help="max allowed absolute delta per numeric metric",
    )
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "compare":
            return run_compare(args)
        defaults, runner, _ = EXPERIMENTS[args.command]
        config = _resolve(defaults, args)
        metrics = runner(config)
        for key, value in metrics.items():
            print(f"{key} = {value}")
        return EXIT_OK
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CompareMismatch as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (StationFileError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except PilmError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
