"""Surplus process U(t) = u + c t - sum_{i <= M(t)} Z_i with GCP claim counts.

A size-j jump of M brings j iid claims at the same epoch, so the expected
outflow is mu * E M(t). Ruin is checked at claim epochs, the only times the
surplus moves down.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate, special

from .errors import UnsupportedDist, ValidationError
from .gcp import gcp_sample_path
from .montecarlo import as_generator, run_chunks
from .params import GfcpParams, jump_distribution

__all__ = [
    "Exponential",
    "Deterministic",
    "Empirical",
    "RiskModel",
    "RuinSample",
    "SurplusPath",
    "RuinEstimate",
    "safety_loading",
    "mixture_H",
    "g_zero",
    "psi_zero",
    "default_horizon",
    "surplus_path",
    "simulate_surplus",
    "ruin_mc",
]


@dataclass(frozen=True)
class Exponential:
    mean: float

    def __post_init__(self):
        if not (self.mean > 0 and math.isfinite(self.mean)):
            raise ValidationError("mu", f"claim mean must be > 0, got {self.mean}")

    def sum_of(self, j, g):
        """Totals of j[i] iid claims for each entry of the integer array j."""
        j = np.asarray(j)
        out = np.zeros(j.shape)
        pos = j > 0
        out[pos] = g.gamma(j[pos], self.mean)
        return out

    def convolution_cdf(self, j: int, x: float) -> float:
        # Erlang(j) with scale mu
        return float(special.gammainc(j, x / self.mean)) if x > 0 else 0.0


@dataclass(frozen=True)
class Deterministic:
    mean: float

    def __post_init__(self):
        if not (self.mean > 0 and math.isfinite(self.mean)):
            raise ValidationError("mu", f"claim size must be > 0, got {self.mean}")

    def sum_of(self, j, g):
        return np.asarray(j, dtype=float) * self.mean

    def convolution_cdf(self, j: int, x: float) -> float:
        return 1.0 if x >= j * self.mean else 0.0


@dataclass(frozen=True)
class Empirical:
    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals or any(not (v > 0 and math.isfinite(v)) for v in vals):
            raise ValidationError("claims", "empirical claims must be a non-empty list of positive numbers")
        object.__setattr__(self, "values", vals)

    @property
    def mean(self) -> float:
        return math.fsum(self.values) / len(self.values)

    def sum_of(self, j, g):
        j = np.asarray(j)
        width = int(j.max()) if j.size else 0
        if width == 0:
            return np.zeros(j.shape)
        draws = g.choice(np.asarray(self.values), size=j.shape + (width,))
        mask = np.arange(width) < j[..., None]
        return (draws * mask).sum(axis=-1)

    def convolution_cdf(self, j: int, x: float) -> float:
        raise UnsupportedDist("no closed-form convolution for empirical claims; use Monte Carlo")


CLAIM_LAWS = (Exponential, Deterministic, Empirical)


@dataclass(frozen=True)
class RiskModel:
    gcp: GfcpParams
    c: float
    claims: object
    u: float = 0.0
    horizon: float | None = None

    def __post_init__(self):
        if self.gcp.alpha != 1.0:
            raise ValidationError("alpha", "claim arrivals must follow the GCP (alpha = 1)")
        if not (self.c > 0 and math.isfinite(self.c)):
            raise ValidationError("c", f"premium rate must be > 0, got {self.c}")
        if not (self.u >= 0 and math.isfinite(self.u)):
            raise ValidationError("u", f"initial capital must be >= 0, got {self.u}")
        if self.horizon is not None and not self.horizon > 0:
            raise ValidationError("horizon", f"horizon must be > 0, got {self.horizon}")
        if not isinstance(self.claims, CLAIM_LAWS):
            raise ValidationError("claims", f"unsupported claim law {type(self.claims).__name__}")

    @property
    def mu(self) -> float:
        return self.claims.mean

    @property
    def outflow_rate(self) -> float:
        """Expected claim amount per unit time, mu * sum_j j lambda_j."""
        return self.mu * self.gcp.mean_rate

    @property
    def positive_loading(self) -> bool:
        return self.c > self.outflow_rate


@dataclass(frozen=True)
class RuinSample:
    ruined: bool
    ruin_time: float | None
    deficit: float | None


@dataclass(frozen=True)
class SurplusPath:
    """Surplus right after each claim epoch, up to ruin or the horizon."""

    u: float
    c: float
    times: np.ndarray
    claims_total: np.ndarray  # cumulative claims paid at each epoch
    surplus: np.ndarray


@dataclass(frozen=True)
class RuinEstimate:
    y: float
    estimate: float
    se: float
    n_paths: int
    horizon: float


def safety_loading(m: RiskModel) -> float:
    """eta = c / (mu sum_j j lambda_j) - 1."""
    return m.c / m.outflow_rate - 1.0


def mixture_H(m: RiskModel, x: float) -> float:
    """H(x) = (1 / Lambda) sum_j lambda_j F^{*j}(x)."""
    if x < 0:
        return 0.0
    p = m.gcp
    return math.fsum(lam * m.claims.convolution_cdf(j, x) for j, lam in enumerate(p.lambdas, start=1) if lam > 0) / p.Lambda


def g_zero(m: RiskModel, y: float) -> float:
    """Probability of ruin from u = 0 with deficit at most y: (Lambda / c) int_0^y (1 - H)."""
    if isinstance(m.claims, Empirical):
        raise UnsupportedDist("G(0, y) needs an analytic claim law")
    if y <= 0:
        return 0.0
    if math.isinf(y):
        return psi_zero(m, clamp_warning=False)
    p = m.gcp
    breaks = None
    if isinstance(m.claims, Deterministic):
        breaks = [j * m.mu for j in range(1, p.k + 1) if j * m.mu < y] or None
    val, _ = integrate.quad(
        lambda v: 1.0 - mixture_H(m, v), 0.0, y, points=breaks, epsabs=1e-10, epsrel=1e-10, limit=500
    )
    return p.Lambda / m.c * val


def psi_zero(m: RiskModel, clamp_warning: bool = True) -> float:
    """Ruin probability from zero capital, (mu / c) sum_j j lambda_j, clamped at 1."""
    val = m.outflow_rate / m.c
    if val >= 1.0:
        if clamp_warning:
            warnings.warn("no positive safety loading: ruin is certain, returning 1", RuntimeWarning)
        return 1.0
    return val


def default_horizon(m: RiskModel) -> float:
    """max(1e3 / Lambda, 1e3 mu / (c - mu sum_j j lambda_j)); the first term alone without positive loading."""
    base = 1e3 / m.gcp.Lambda
    drift = m.c - m.outflow_rate
    if drift <= 0:
        return base
    return max(base, 1e3 * m.mu / drift)


def surplus_path(m: RiskModel, rng, stop_at_ruin: bool = True) -> SurplusPath:
    """Event-driven surplus on (0, T] from one exact GCP path."""
    g = as_generator(rng)
    T = m.horizon if m.horizon is not None else default_horizon(m)
    path = gcp_sample_path(m.gcp, T, g)
    paid = np.cumsum(m.claims.sum_of(path.jumps, g)) if path.jumps.size else np.empty(0)
    surplus = m.u + m.c * path.times - paid
    times = path.times
    if stop_at_ruin:
        below = np.flatnonzero(surplus < 0)
        if below.size:
            end = below[0] + 1
            times, paid, surplus = times[:end], paid[:end], surplus[:end]
    return SurplusPath(m.u, m.c, times, paid, surplus)


def simulate_surplus(m: RiskModel, rng) -> RuinSample:
    sp = surplus_path(m, rng)
    if sp.surplus.size and sp.surplus[-1] < 0:
        return RuinSample(True, float(sp.times[-1]), float(-sp.surplus[-1]))
    return RuinSample(False, None, None)


def _ruin_chunk(m, T):
    q = jump_distribution(m.gcp)
    sizes = np.arange(1, m.gcp.k + 1)
    lam = m.gcp.Lambda

    def run(g, n):
        clock = np.zeros(n)
        level = np.full(n, float(m.u))
        deficit = np.full(n, np.nan)
        active = np.arange(n)
        while active.size:
            w = g.standard_exponential(active.size) / lam
            j = g.choice(sizes, size=active.size, p=q)
            clock[active] += w
            alive = clock[active] <= T
            active, w, j = active[alive], w[alive], j[alive]
            level[active] += m.c * w - m.claims.sum_of(j, g)
            ruined = level[active] < 0
            deficit[active[ruined]] = -level[active[ruined]]
            active = active[~ruined]
        return deficit

    return run


def ruin_mc(
    m: RiskModel,
    y: float | Sequence[float] = math.inf,
    n_paths: int = 100_000,
    seed: int = 0,
    threads: int = 1,
    chunk: int = 20_000,
) -> list[RuinEstimate]:
    """Fraction of paths ruined by the horizon with deficit at most y.

    The finite horizon can only miss ruins, so the estimate is biased low for
    the infinite-horizon probability.
    """
    ys = [float(v) for v in (y if isinstance(y, (list, tuple, np.ndarray)) else [y])]
    T = m.horizon if m.horizon is not None else default_horizon(m)
    deficits = np.concatenate(run_chunks(_ruin_chunk(m, T), n_paths, seed, threads, chunk))
    out = []
    for yy in ys:
        hit = ~np.isnan(deficits) & (np.nan_to_num(deficits, nan=0.0) <= yy)
        est = float(hit.mean())
        out.append(RuinEstimate(yy, est, math.sqrt(est * (1 - est) / deficits.size), deficits.size, T))
    return out
