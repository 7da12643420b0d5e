"""Marginal-likelihood hyperparameter selection for penalized solves.

Treating a quadratic penalty as a (possibly rank-deficient) Gaussian prior
with weight alpha2 = sigma2 / rho2, the noise variance maximizing the
marginal likelihood has a closed form, and the remaining log marginal
likelihood of alpha2 involves only the solve diagnostics plus the rank and
log pseudo-determinant of the penalty.  Hybrid (two-penalty) priors reduce to
the single-penalty formula through the weighted-sum matrices built here.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import InsufficientDataError, PilmError
from .penalties import DEFAULT_RANK_TOL, PenaltyMatrix, combine
from .solver import ObservationSystem, PilmFit, solve

__all__ = [
    "MarginalLikelihoodResult",
    "CurvePoint",
    "HybridSurface",
    "log_marginal_likelihood",
    "ll_curve",
    "optimize_alpha",
    "hybrid_surface",
    "abic",
    "write_curve_csv",
    "write_surface_csv",
]

DEFAULT_LOG10_ALPHA2_GRID = np.arange(-12.0, 6.0 + 1e-9, 0.25)


@dataclass(frozen=True)
class MarginalLikelihoodResult:
    """Log marginal likelihood at one penalty weight, with its MAP fit."""

    alpha2: float
    log_likelihood: float
    sigma2_opt: float  # closed-form optimal noise variance
    fit: PilmFit
    rank: int  # rank of the penalty (count of retained eigenvalues)
    log_pdet: float  # log pseudo-determinant of the penalty
    n_data: int
    n_params: int

    @property
    def sigma_opt(self) -> float:
        return float(np.sqrt(self.sigma2_opt))

    @property
    def rmse(self) -> float:
        """Root-mean-square misfit on the data."""
        return float(np.sqrt(self.fit.data_misfit / self.n_data))


def log_marginal_likelihood(
    obs: ObservationSystem,
    alpha2: float,
    penalty: PenaltyMatrix,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> MarginalLikelihoodResult:
    """Log marginal likelihood of a penalty weight, noise variance profiled out.

    Requires alpha2 > 0, a positive-definite normal matrix, and more data than
    unconstrained degrees of freedom (N - M + P > 0).
    """
    alpha2 = float(alpha2)
    if alpha2 <= 0:
        raise ValueError(f"penalty weight must be positive, got {alpha2}")
    rank, log_pdet = penalty.spectrum(rank_tol)
    n, m = obs.n_data, obs.n_params
    dof = n - m + rank
    if dof <= 0:
        raise InsufficientDataError(
            f"insufficient effective data: N - M + P = {n} - {m} + {rank} <= 0"
        )
    fit = solve(obs, [(alpha2, penalty)])
    sigma2 = fit.total_loss / dof
    ll = 0.5 * (
        -dof * (np.log(2.0 * np.pi * sigma2) + 1.0)
        + rank * np.log(alpha2)
        + log_pdet
        - fit.normal_logdet
    )
    return MarginalLikelihoodResult(
        alpha2=alpha2,
        log_likelihood=float(ll),
        sigma2_opt=float(sigma2),
        fit=fit,
        rank=rank,
        log_pdet=log_pdet,
        n_data=n,
        n_params=m,
    )


@dataclass(frozen=True)
class CurvePoint:
    """One grid point of a likelihood curve; result is None when infeasible."""

    log10_alpha2: float
    log_likelihood: float
    result: MarginalLikelihoodResult | None
    feasible: bool
    message: str = ""


def ll_curve(
    obs: ObservationSystem,
    penalty: PenaltyMatrix,
    log10_grid,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> list[CurvePoint]:
    """Log marginal likelihood over a grid of log10 penalty weights."""
    curve = []
    for log10_a2 in np.asarray(log10_grid, dtype=float):
        try:
            result = log_marginal_likelihood(obs, 10.0**log10_a2, penalty, rank_tol)
        except PilmError as exc:
            curve.append(CurvePoint(float(log10_a2), float("nan"), None, False, str(exc)))
            continue
        curve.append(CurvePoint(float(log10_a2), result.log_likelihood, result, True))
    return curve


def optimize_alpha(
    obs: ObservationSystem,
    penalty: PenaltyMatrix,
    log10_grid=None,
    refine: bool = True,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> tuple[float, MarginalLikelihoodResult]:
    """Grid-search maximizer of the log marginal likelihood.

    Scans the given log10(alpha2) grid (a broad default when omitted) and,
    unless disabled, refines once with a ten-times-finer grid around the
    coarse maximizer.  A maximum on the grid boundary triggers a warning.
    """
    grid = DEFAULT_LOG10_ALPHA2_GRID if log10_grid is None else np.asarray(log10_grid, float)
    curve = ll_curve(obs, penalty, grid, rank_tol)
    feasible = [p for p in curve if p.feasible]
    if not feasible:
        raise PilmError(
            f"no feasible penalty weight on the grid; first failure: {curve[0].message}"
        )
    best = max(feasible, key=lambda p: p.log_likelihood)
    if best is curve[0] or best is curve[-1]:
        warnings.warn(
            f"marginal-likelihood maximum at the grid boundary "
            f"(log10 alpha2 = {best.log10_alpha2}); widen the search range",
            stacklevel=2,
        )
    if refine and grid.size > 1:
        step = np.median(np.diff(grid))
        fine = np.arange(
            best.log10_alpha2 - 2.0 * step,
            best.log10_alpha2 + 2.0 * step + 1e-12,
            step / 10.0,
        )
        fine_curve = ll_curve(obs, penalty, fine, rank_tol)
        candidates = [p for p in fine_curve if p.feasible] + [best]
        best = max(candidates, key=lambda p: p.log_likelihood)
    return best.result.alpha2, best.result


def _round_ratio(ratio: float) -> float:
    # cache key: collapse last-ulp differences between equal weight ratios
    return float(f"{ratio:.12e}")


@dataclass(frozen=True)
class HybridSurface:
    """Log marginal likelihood over a grid of two penalty weights.

    ``log_likelihood[i, j]`` corresponds to first-penalty weight
    ``alpha2_first[i]`` and second-penalty weight ``alpha2_second[j]``.
    ``factorization_gap`` holds the absolute difference between evaluating via
    the first-penalty and second-penalty weighted-sum forms (NaN where only
    one applies); the two are algebraically identical.
    """

    alpha2_first: np.ndarray
    alpha2_second: np.ndarray
    log_likelihood: np.ndarray
    feasible: np.ndarray
    factorization_gap: np.ndarray
    messages: tuple

    def max_feasible(self) -> float:
        if not self.feasible.any():
            raise PilmError("no feasible cell in the hybrid surface")
        return float(np.nanmax(self.log_likelihood[self.feasible]))


def hybrid_surface(
    obs: ObservationSystem,
    first: PenaltyMatrix,
    second: PenaltyMatrix,
    alpha2_first_grid,
    alpha2_second_grid,
    rank_tol: float = DEFAULT_RANK_TOL,
) -> HybridSurface:
    """Two-penalty marginal likelihood, cell by cell over the weight grids.

    Each cell folds the pair of weights into a single weighted-sum penalty
    (spectra cached by weight ratio) and reuses the one-penalty formula.  When
    both weights are positive the two possible foldings are evaluated and
    their gap recorded; cells that fail are flagged, not raised.
    """
    a2_first = np.asarray(alpha2_first_grid, dtype=float).ravel()
    a2_second = np.asarray(alpha2_second_grid, dtype=float).ravel()
    if a2_first.size == 0 or a2_second.size == 0:
        raise ValueError("hybrid weight grids must be nonempty")
    if np.any(a2_first < 0) or np.any(a2_second < 0):
        raise ValueError("penalty weights must be >= 0")
    shape = (a2_first.size, a2_second.size)
    ll = np.full(shape, np.nan)
    ok = np.zeros(shape, dtype=bool)
    gap = np.full(shape, np.nan)
    messages = []
    cache: dict[tuple[str, float], PenaltyMatrix] = {}

    def folded(primary, secondary, ratio, tag):
        key = (tag, _round_ratio(ratio))
        if key not in cache:
            cache[key] = combine([(1.0, primary), (ratio, secondary)], label=tag)
        return cache[key]

    for i, a2_f in enumerate(a2_first):
        for j, a2_s in enumerate(a2_second):
            results = []
            message = ""
            try:
                if a2_f == 0.0 and a2_s == 0.0:
                    raise PilmError("both penalty weights are zero")
                if a2_f > 0.0:
                    tilde = folded(first, second, a2_s / a2_f, "first")
                    results.append(
                        log_marginal_likelihood(obs, a2_f, tilde, rank_tol)
                    )
                if a2_s > 0.0:
                    tilde = folded(second, first, a2_f / a2_s, "second")
                    results.append(
                        log_marginal_likelihood(obs, a2_s, tilde, rank_tol)
                    )
            except PilmError as exc:
                message = str(exc)
            if results and not message:
                ll[i, j] = results[0].log_likelihood
                ok[i, j] = True
                if len(results) == 2:
                    gap[i, j] = abs(
                        results[0].log_likelihood - results[1].log_likelihood
                    )
            if message:
                messages.append((i, j, message))
    return HybridSurface(
        alpha2_first=a2_first,
        alpha2_second=a2_second,
        log_likelihood=ll,
        feasible=ok,
        factorization_gap=gap,
        messages=tuple(messages),
    )


def abic(log_likelihood: float, n_hyper: int) -> float:
    """Information criterion -2 LL + 2 n_hyper (n_hyper >= 1 hyperparameters)."""
    if not np.isfinite(log_likelihood):
        raise ValueError(f"log likelihood must be finite, got {log_likelihood}")
    if int(n_hyper) != n_hyper or n_hyper < 1:
        raise ValueError(f"hyperparameter count must be an integer >= 1, got {n_hyper}")
    return -2.0 * float(log_likelihood) + 2.0 * int(n_hyper)


def write_curve_csv(curve: Sequence[CurvePoint], path) -> Path:
    """Write a likelihood curve as CSV (log10_alpha2, LL, feasible)."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("log10_alpha2,log_likelihood,feasible\n")
        for point in curve:
            handle.write(
                f"{point.log10_alpha2:.17g},{point.log_likelihood:.17g},"
                f"{int(point.feasible)}\n"
            )
    return path


def write_surface_csv(surface: HybridSurface, path) -> Path:
    """Write a hybrid surface as long-form CSV (one row per weight pair)."""
    path = Path(path)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("log10_alpha2_first,log10_alpha2_second,log_likelihood,feasible\n")
        for i, a2_f in enumerate(surface.alpha2_first):
            for j, a2_s in enumerate(surface.alpha2_second):
                lf = np.log10(a2_f) if a2_f > 0 else float("-inf")
                ls = np.log10(a2_s) if a2_s > 0 else float("-inf")
                handle.write(
                    f"{lf:.17g},{ls:.17g},{surface.log_likelihood[i, j]:.17g},"
                    f"{int(surface.feasible[i, j])}\n"
                )
    return path
