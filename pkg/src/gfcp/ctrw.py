"""A continuous-time random walk whose rescaled marginals approach the GFCP.

Waiting times are Pareto with Pr{W > t} = t^(-alpha) for t >= 1. With
b_n = (n Gamma(1 - alpha))^(-1/alpha) the sums b_n (W_1 + ... + W_n) converge
to the standard one-sided stable law, and b~(c) = c^alpha / Gamma(1 - alpha)
inverts that scaling. The walk observed at time t is

    sum_{i <= floor(Lambda R(ct))} X_i V_i,

with R the renewal count, X_i iid jump sizes and V_i Bernoulli(1 / b~(c)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, DomainError, ValidationError
from .montecarlo import Distance, as_generator, run_chunks, tv_to_pmf
from .params import GfcpParams, jump_distribution
from .process import PMF_N_CAP, pmf_vector

__all__ = [
    "CtrwConfig",
    "ConvergenceRow",
    "b_n",
    "b_tilde",
    "pareto_waits",
    "ctrw_sample",
    "ctrw_samples",
    "normalization_self_test",
    "convergence_report",
    "DEFAULT_MAX_RENEWALS",
]

DEFAULT_MAX_RENEWALS = 10**7
_BLOCK = 32


def b_n(alpha: float, n: float) -> float:
    return (n * math.gamma(1 - alpha)) ** (-1.0 / alpha)


def b_tilde(alpha: float, c: float) -> float:
    return c**alpha / math.gamma(1 - alpha)


@dataclass(frozen=True)
class CtrwConfig:
    params: GfcpParams
    c: float
    max_renewals: int = DEFAULT_MAX_RENEWALS

    def __post_init__(self):
        a = self.params.alpha
        if not 0 < a < 1:
            raise ValidationError("alpha", f"the walk needs 0 < alpha < 1, got {a}")
        if not (math.isfinite(self.c) and self.c >= 1):
            raise ValidationError("c", f"c must be >= 1, got {self.c}")
        if not self.thinning <= 1:
            c_min = math.gamma(1 - a) ** (1 / a)
            raise ValidationError(
                "c", f"thinning probability 1/b~(c) exceeds 1; need c >= {c_min:.6g}"
            )

    @property
    def alpha(self) -> float:
        return self.params.alpha

    @property
    def b_tilde(self) -> float:
        return b_tilde(self.alpha, self.c)

    @property
    def thinning(self) -> float:
        return 1.0 / self.b_tilde


def pareto_waits(alpha: float, size, rng) -> np.ndarray:
    """Pareto waiting times with Pr{W > t} = t^(-alpha), t >= 1."""
    g = as_generator(rng)
    return (1.0 - g.random(size)) ** (-1.0 / alpha)


def _renewal_counts(alpha, horizon, n, g, cap):
    """R(horizon) for n independent Pareto renewal sequences."""
    counts = np.zeros(n, dtype=np.int64)
    clock = np.zeros(n)
    active = np.arange(n)
    while active.size:
        w = pareto_waits(alpha, (active.size, _BLOCK), g)
        arrivals = clock[active, None] + np.cumsum(w, axis=1)
        inside = (arrivals <= horizon).sum(axis=1)
        counts[active] += inside
        clock[active] = arrivals[:, -1]
        if counts.max() > cap:
            raise BudgetError(f"renewal count exceeded the cap of {cap}")
        active = active[inside == _BLOCK]
    return counts


def ctrw_samples(cfg: CtrwConfig, t: float, n: int, rng) -> np.ndarray:
    """``n`` independent draws of the walk at time ``t``."""
    if not t > 0:
        raise DomainError(f"t must be > 0, got {t}")
    g = as_generator(rng)
    p = cfg.params
    r = _renewal_counts(cfg.alpha, cfg.c * t, int(n), g, cfg.max_renewals)
    trials = np.floor(p.Lambda * r).astype(np.int64)
    kept = g.binomial(trials, cfg.thinning)
    q = jump_distribution(p)
    out = np.zeros(int(n), dtype=np.int64)
    mask = kept > 0
    if mask.any():
        out[mask] = g.multinomial(kept[mask], q) @ np.arange(1, p.k + 1)
    return out


def ctrw_sample(cfg: CtrwConfig, t: float, rng) -> int:
    return int(ctrw_samples(cfg, t, 1, rng)[0])


@dataclass(frozen=True)
class LaplaceCheck:
    s: float
    estimate: float
    se: float
    target: float

    @property
    def z(self) -> float:
        return (self.estimate - self.target) / self.se if self.se > 0 else math.inf


def normalization_self_test(
    alpha: float,
    n: int = 100_000,
    n_samples: int = 2_000,
    s_values=(0.5, 1.0, 2.0),
    seed: int = 0,
    threads: int = 1,
) -> list[LaplaceCheck]:
    """Compare E exp(-s b_n (W_1 + ... + W_n)) with exp(-s^alpha)."""
    scale = b_n(alpha, n)
    s_values = np.asarray(s_values, dtype=float)

    def run(g, m):
        out = np.empty(m)
        for i in range(m):
            out[i] = pareto_waits(alpha, n, g).sum()
        return np.exp(-np.outer(scale * out, s_values))

    vals = np.concatenate(run_chunks(run, n_samples, seed, threads, chunk=250))
    return [
        LaplaceCheck(
            s=float(s),
            estimate=float(vals[:, i].mean()),
            se=float(vals[:, i].std(ddof=1) / math.sqrt(vals.shape[0])),
            target=math.exp(-(s**alpha)),
        )
        for i, s in enumerate(s_values)
    ]


@dataclass(frozen=True)
class ConvergenceRow:
    c: float
    tv: float
    tv_se: float
    sup_gap: float


def convergence_report(
    params: GfcpParams,
    c_grid,
    t: float,
    n_samples: int,
    seed: int,
    threads: int = 1,
    n_max: int = PMF_N_CAP,
    chunk: int = 100_000,
) -> list[ConvergenceRow]:
    """Distance between the walk at time t and the exact GFCP law for each c.

    Total variation and the largest pointwise gap are taken over 0..n_max plus
    one lumped tail cell. Each c uses its own sub-seed of ``seed``.
    """
    if n_samples < 10_000:
        raise DomainError(f"n_samples must be >= 1e4, got {n_samples}")
    exact = pmf_vector(params, n_max, t)
    rows = []
    for i, c in enumerate(c_grid):
        cfg = CtrwConfig(params, float(c))
        draws = np.concatenate(
            run_chunks(lambda g, m: ctrw_samples(cfg, t, m, g), n_samples, _sub_seed(seed, i), threads, chunk)
        )
        d: Distance = tv_to_pmf(draws, exact)
        rows.append(ConvergenceRow(float(c), d.tv, d.tv_se, d.sup_gap))
    return rows


def _sub_seed(seed, i):
    return int(np.random.SeedSequence([int(seed), 1_000_003, i]).generate_state(1, dtype=np.uint64)[0])
