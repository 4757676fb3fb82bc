"""Correlation decay of the process (long-range dependence) and of its
increments Z_h(t) = M(t + h) - M(t) (short-range dependence).

A process has correlation decaying like c(s) t^(-theta); theta in (0, 1) is
classed as LRD and theta in (1, 2) as SRD.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DomainError, FitError
from .gcp import gcp_increment_counts
from .montecarlo import correlation_with_se, run_chunks
from .params import GfcpParams
from .process import correlation, covariance, mean_var
from .subordinator import inverse_paths

__all__ = [
    "Approx",
    "DependenceReport",
    "increment_cov",
    "increment_var",
    "increment_var_leading",
    "increment_corr",
    "c0",
    "c1",
    "default_t_grid",
    "classify",
    "mc_correlations",
    "fit_decay_exponent",
]


class Approx(NamedTuple):
    exact: float
    asymptotic: float


@dataclass(frozen=True)
class DependenceReport:
    s: float
    h: float
    t_grid: np.ndarray
    corr_exact: np.ndarray
    corr_mc: np.ndarray | None
    corr_mc_se: np.ndarray | None
    fitted_theta: float
    fit_residual: float
    target_theta: float
    prefactor: float
    fitted_prefactor: float
    classification: str
    source: str

    def summary(self) -> dict:
        return {
            "s": self.s,
            "h": self.h,
            "source": self.source,
            "fitted_theta": self.fitted_theta,
            "fit_residual": self.fit_residual,
            "target_theta": self.target_theta,
            "prefactor": self.prefactor,
            "fitted_prefactor": self.fitted_prefactor,
            "classification": self.classification,
        }


def increment_cov(p: GfcpParams, s: float, t: float, h: float) -> Approx:
    """Cov(Z_h(s), Z_h(t)) for 0 < s + h <= t, with its large-t form
    alpha^2 h (1 - alpha) / (alpha + 1) ((s + h)^(alpha+1) - s^(alpha+1)) S^2 t^(alpha-2).
    """
    if not (s > 0 and h > 0 and s + h <= t):
        raise DomainError(f"need s > 0, h > 0 and s + h <= t, got s={s}, h={h}, t={t}")
    exact = math.fsum((
        covariance(p, s + h, t + h),
        -covariance(p, s + h, t),
        -covariance(p, s, t + h),
        covariance(p, s, t),
    ))
    a = p.alpha
    asym = a * a * h * (1 - a) / (a + 1) * ((s + h) ** (a + 1) - s ** (a + 1)) * p.S**2 * t ** (a - 2)
    return Approx(exact, asym)


def increment_var(p: GfcpParams, t: float, h: float) -> Approx:
    """Var Z_h(t) and its large-t form alpha h T t^(alpha-1)."""
    if not (t > 0 and h > 0):
        raise DomainError(f"need t > 0 and h > 0, got t={t}, h={h}")
    exact = math.fsum((mean_var(p, t + h)[1], mean_var(p, t)[1], -2.0 * covariance(p, t, t + h)))
    return Approx(exact, p.alpha * h * p.T * t ** (p.alpha - 1))


def increment_var_leading(p: GfcpParams, t: float, h: float) -> float:
    """Complete leading large-t term of Var Z_h(t).

    Besides alpha h T t^(alpha-1), the time change contributes
    (sum_j j lambda_j)^2 Var(Y(t+h) - Y(t)), which is of the same order:
    Var(Y(t+h) - Y(t)) ~ 2 alpha h^(alpha+1) t^(alpha-1) / ((alpha+1) Gamma(alpha+1)^2).
    """
    if not (t > 0 and h > 0):
        raise DomainError(f"need t > 0 and h > 0, got t={t}, h={h}")
    a = p.alpha
    return (a * h * p.T + 2 * a * p.S**2 * h ** (a + 1) / (a + 1)) * t ** (a - 1)


def increment_corr(p: GfcpParams, s: float, t: float, h: float) -> float:
    cov = increment_cov(p, s, t, h).exact
    return cov / math.sqrt(increment_var(p, s, h).exact * increment_var(p, t, h).exact)


def _require_fractional(p):
    if not 0 < p.alpha < 1:
        raise DomainError("correlation asymptotics need 0 < alpha < 1")


def c0(p: GfcpParams, s: float) -> float:
    """Prefactor of Corr(M(s), M(t)) ~ c0(s) t^(-alpha)."""
    _require_fractional(p)
    a = p.alpha
    g = math.gamma(2 * a + 1)
    num = g * p.T * s**a + p.mean_rate**2 * s ** (2 * a)
    return num / (g * math.sqrt(mean_var(p, s)[1] * p.R))


def c1(p: GfcpParams, s: float, h: float) -> float:
    """Prefactor of Corr(Z_h(s), Z_h(t)) ~ c1(s) t^(-(3-alpha)/2)."""
    _require_fractional(p)
    a = p.alpha
    num = a * a * h * (1 - a) * ((s + h) ** (a + 1) - s ** (a + 1)) * p.S**2
    den = (a + 1) * math.sqrt(increment_var(p, s, h).exact) * math.sqrt(a * h * p.T)
    return num / den


def default_t_grid(s: float, points: int = 20) -> np.ndarray:
    """``points`` log-spaced times with t / s from 1e2 to 1e4."""
    return s * np.logspace(2, 4, points)


def classify(theta: float) -> str:
    if 0 < theta < 1:
        return "LRD"
    if 1 < theta < 2:
        return "SRD"
    return "neither"


def _exact_corr(p, s, h, t_grid):
    if h == 0:
        return np.array([correlation(p, s, t) for t in t_grid])
    return np.array([increment_corr(p, s, t, h) for t in t_grid])


def _mc_chunk(p, s, h, t_grid, x_step, rel_step):
    times = np.unique(np.concatenate(([s, s + h], t_grid, t_grid + h)))

    def run(g, n):
        y = inverse_paths(p.alpha, times, x_step, n, g, rel_step=rel_step)
        dy = np.diff(np.concatenate((np.zeros((n, 1)), y), axis=1), axis=1)
        m = np.cumsum(gcp_increment_counts(p, dy, g), axis=1).astype(float)
        col = {float(t): i for i, t in enumerate(times)}
        if h == 0:
            base = m[:, col[s]]
            others = np.stack([m[:, col[float(t)]] for t in t_grid], axis=1)
        else:
            base = m[:, col[s + h]] - m[:, col[s]]
            others = np.stack([m[:, col[float(t + h)]] - m[:, col[float(t)]] for t in t_grid], axis=1)
        return base, others

    return run


def mc_correlations(
    p: GfcpParams,
    s: float,
    h: float,
    t_grid,
    n_paths: int,
    seed: int,
    threads: int = 1,
    *,
    x_step: float | None = None,
    rel_step: float = 1e-3,
    chunk: int = 10_000,
):
    """Monte Carlo correlations and standard errors from path-coupled samples.

    Each path evaluates one GCP at one inverse-subordinator path, so values
    at s and at every t come from the same trajectory. The inverse uses a
    grid whose cells grow geometrically (relative width ``rel_step``) past an
    initial width ``x_step``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if x_step is None:
        x_step = 1e-3 * s**p.alpha
    parts = run_chunks(_mc_chunk(p, s, h, t_grid, x_step, rel_step), n_paths, seed, threads, chunk)
    base = np.concatenate([b for b, _ in parts])
    others = np.concatenate([o for _, o in parts])
    est = [correlation_with_se(base, others[:, i]) for i in range(t_grid.size)]
    return np.array([e[0] for e in est]), np.array([e[1] for e in est])


def fit_decay_exponent(
    p: GfcpParams,
    s: float,
    h: float = 0.0,
    t_grid=None,
    source: str = "exact",
    *,
    n_paths: int = 100_000,
    seed: int = 0,
    threads: int = 1,
    x_step: float | None = None,
    rel_step: float = 1e-3,
) -> DependenceReport:
    """Least-squares slope of log corr against log t.

    ``h = 0`` studies Corr(M(s), M(t)) with target alpha; ``h > 0`` studies
    the increments with target (3 - alpha) / 2. With ``source="mc"`` the fit
    uses Monte Carlo correlations (the exact ones are reported alongside).
    """
    _require_fractional(p)
    if source not in ("exact", "mc"):
        raise DomainError(f"source must be 'exact' or 'mc', got {source!r}")
    if h < 0:
        raise DomainError(f"h must be >= 0, got {h}")
    t_grid = default_t_grid(s) if t_grid is None else np.asarray(t_grid, dtype=float)
    if t_grid.size < 2 or np.any(np.diff(t_grid) <= 0) or t_grid[0] < s + h:
        raise DomainError("t_grid must be increasing, with at least two points, all >= s + h")
    exact = _exact_corr(p, s, h, t_grid)
    mc = se = None
    if source == "mc":
        mc, se = mc_correlations(p, s, h, t_grid, n_paths, seed, threads, x_step=x_step, rel_step=rel_step)
    used = exact if source == "exact" else mc
    if not np.all(used > 0):
        bad = t_grid[~(used > 0)]
        raise FitError(f"non-positive or undefined correlation at t = {bad.tolist()}; log-log fit undefined")
    x, y = np.log(t_grid), np.log(used)
    slope, icpt = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + icpt)) ** 2)))
    theta = float(-slope)
    if h == 0:
        target, pref = p.alpha, c0(p, s)
    else:
        target, pref = (3 - p.alpha) / 2, c1(p, s, h)
    return DependenceReport(
        s=float(s),
        h=float(h),
        t_grid=t_grid,
        corr_exact=exact,
        corr_mc=mc,
        corr_mc_se=se,
        fitted_theta=theta,
        fit_residual=resid,
        target_theta=target,
        prefactor=pref,
        fitted_prefactor=float(math.exp(icpt)),
        classification=classify(theta),
        source=source,
    )
