"""Exact distribution, moments, covariance and samplers of the generalized
fractional counting process M(t) with jump sizes 1..k, rates lambda_j and
fractional order alpha in (0, 1].
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np
from scipy import special

from .errors import CapError, DomainError
from .gcp import gcp_increment_counts, gcp_values
from .montecarlo import as_generator
from .params import GfcpParams, jump_distribution
from .specfun import DEFAULT_ACCURACY, MlAccuracy, ml_three, ml_three_array
from .subordinator import inverse_marginal_samples, inverse_paths, stable_samples
from . import subordinator

__all__ = [
    "CompositionTuple",
    "MomentSpec",
    "PMF_N_CAP",
    "MOMENT_R_CAP",
    "compositions",
    "pmf",
    "pmf_vector",
    "pmf_grid",
    "pgf",
    "mean_var",
    "factorial_moment",
    "raw_moment",
    "moment",
    "covariance",
    "correlation",
    "SAMPLING_METHODS",
    "sample",
    "sample_values",
    "ode_residual",
]

PMF_N_CAP = 60
MOMENT_R_CAP = 10
SAMPLING_METHODS = ("time_change", "compound", "superpose_gcp")


@dataclass(frozen=True)
class CompositionTuple:
    """Multiplicities (i_1, ..., i_k) of jump sizes 1..k."""

    entries: tuple[int, ...]

    @property
    def r(self) -> int:
        return sum(self.entries)

    @property
    def n(self) -> int:
        return sum(j * i for j, i in enumerate(self.entries, start=1))


@dataclass(frozen=True)
class MomentSpec:
    order: int
    kind: str = "raw"

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 1:
            raise DomainError(f"moment order must be a positive integer, got {self.order}")
        if self.kind not in ("raw", "factorial"):
            raise DomainError(f"moment kind must be 'raw' or 'factorial', got {self.kind!r}")


def compositions(n: int, r: int, k: int) -> Iterator[CompositionTuple]:
    """All (i_1..i_k) >= 0 with sum i_j = r and sum j i_j = n, in lexicographic order.

    Depth-first over i_1, i_2, ...; a branch is cut as soon as the remaining
    count and weight cannot be met by the sizes still available.
    """
    if n < 0 or r < 0 or k < 1:
        return
    entries = [0] * k

    def rec(j, count, weight):
        # sizes j..k remain; need `count` more jumps totalling `weight`
        if j == k:
            if count * k == weight:
                entries[k - 1] = count
                yield CompositionTuple(tuple(entries))
            return
        for i in range(count + 1):
            c, w = count - i, weight - i * j
            if w < 0:
                break
            # remaining c jumps from sizes j+1..k: weight must lie in [c(j+1), ck]
            if c * (j + 1) <= w <= c * k:
                entries[j - 1] = i
                yield from rec(j + 1, c, w)
        entries[j - 1] = 0

    if k == 1:
        if n == r:
            yield CompositionTuple((r,))
        return
    yield from rec(1, r, n)


@lru_cache(maxsize=256)
def _pmf_coefficients(lambdas: tuple[float, ...], n_max: int) -> tuple[tuple[tuple[int, float], ...], ...]:
    """For each n <= n_max, the pairs (r, c_r(n)) with
    c_r(n) = sum over compositions of multinomial(r; i) prod lambda_j^{i_j}.

    Each summand is formed in log space; zero rates drop their compositions.
    """
    k = len(lambdas)
    logs = [math.log(lam) if lam > 0 else -math.inf for lam in lambdas]
    table = []
    for n in range(n_max + 1):
        row = []
        for r in range(-(-n // k), n + 1):
            parts = []
            for comp in compositions(n, r, k):
                if any(i > 0 and logs[j] == -math.inf for j, i in enumerate(comp.entries)):
                    continue
                lg = math.lgamma(r + 1) + sum(
                    i * logs[j] - math.lgamma(i + 1) for j, i in enumerate(comp.entries) if i
                )
                parts.append(lg)
            if parts:
                top = max(parts)
                row.append((r, top, math.fsum(math.exp(x - top) for x in parts)))
        table.append(tuple((r, (top, rest)) for r, top, rest in row))
    return tuple(table)


def _check_n(n, cap=PMF_N_CAP):
    if int(n) != n or n < 0:
        raise DomainError(f"n must be a non-negative integer, got {n}")
    if n > cap:
        raise CapError(f"pmf is evaluated exactly only for n <= {cap}, got {n}")


def _check_t(t):
    t = float(t)
    if not (t >= 0 and math.isfinite(t)):
        raise DomainError(f"t must be finite and >= 0, got {t}")
    return t


def pmf_vector(
    p: GfcpParams, n_max: int, t: float, acc: MlAccuracy = DEFAULT_ACCURACY, *, cap: int = PMF_N_CAP
) -> np.ndarray:
    """P(M(t) = n) for n = 0..n_max.

    p(n, t) = sum_r c_r(n) t^{r alpha} E^{r+1}_{alpha, r alpha + 1}(-Lambda t^alpha);
    the Mittag-Leffler factor depends on r only and is shared across n.
    The cost grows with the number of partitions of n_max, hence ``cap``.
    """
    _check_n(n_max, cap)
    n_max = int(n_max)
    t = _check_t(t)
    if t == 0:
        out = np.zeros(n_max + 1)
        out[0] = 1.0
        return out
    a = p.alpha
    x = -p.Lambda * t**a
    log_t = math.log(t)
    coeffs = _pmf_coefficients(p.lambdas, n_max)
    ml = {}
    out = np.zeros(n_max + 1)
    for n, row in enumerate(coeffs):
        terms = []
        for r, (top, rest) in row:
            if r not in ml:
                if a == 1.0:
                    # E^{r+1}_{1,r+1}(x) = e^x / r!
                    ml[r] = math.exp(x - math.lgamma(r + 1))
                else:
                    ml[r] = ml_three(a, r * a + 1, r + 1, x, acc)
            terms.append(math.exp(top + r * a * log_t) * rest * ml[r])
        out[n] = math.fsum(terms)
    return out


def pmf(p: GfcpParams, n: int, t: float, acc: MlAccuracy = DEFAULT_ACCURACY, *, cap: int = PMF_N_CAP) -> float:
    _check_n(n, cap)
    return float(pmf_vector(p, int(n), t, acc, cap=cap)[-1])


def pmf_grid(
    p: GfcpParams, n_max: int, ts, acc: MlAccuracy = DEFAULT_ACCURACY, *, cap: int = PMF_N_CAP
) -> np.ndarray:
    """pmf on many times at once, shape (len(ts), n_max + 1)."""
    _check_n(n_max, cap)
    n_max = int(n_max)
    ts = np.asarray(ts, dtype=float)
    if ts.ndim != 1 or np.any(ts < 0) or not np.all(np.isfinite(ts)):
        raise DomainError("ts must be a 1-d array of finite times >= 0")
    a = p.alpha
    pos = ts > 0
    tp = ts[pos]
    x = -p.Lambda * tp**a
    log_t = np.log(tp)
    coeffs = _pmf_coefficients(p.lambdas, n_max)
    out = np.zeros((ts.size, n_max + 1))
    out[~pos, 0] = 1.0
    ml = {}
    for n, row in enumerate(coeffs):
        acc_n = np.zeros(tp.size)
        for r, (top, rest) in row:
            if r not in ml:
                ml[r] = ml_three_array(a, r * a + 1, r + 1, x, acc)
            acc_n += np.exp(top + r * a * log_t) * rest * ml[r]
        out[pos, n] = acc_n
    return out


def pgf(p: GfcpParams, u: float, t: float, acc: MlAccuracy = DEFAULT_ACCURACY) -> float:
    """E u^{M(t)} = E_{alpha,1}(sum_j lambda_j (u^j - 1) t^alpha) for |u| <= 1."""
    u = float(u)
    if not abs(u) <= 1:
        raise DomainError(f"pgf needs |u| <= 1, got {u}")
    t = _check_t(t)
    expo = math.fsum(lam * (u**j - 1.0) for j, lam in enumerate(p.lambdas, start=1))
    if p.alpha == 1.0:
        return math.exp(expo * t)
    return ml_three(p.alpha, 1.0, 1.0, expo * t**p.alpha, acc)


def mean_var(p: GfcpParams, t: float) -> tuple[float, float]:
    """(S t^alpha, R t^{2 alpha} + T t^alpha)."""
    t = _check_t(t)
    ta = t**p.alpha
    return p.S * ta, p.R * ta * ta + p.T * ta


def _check_r(r):
    if int(r) != r or r < 1:
        raise DomainError(f"moment order must be a positive integer, got {r}")
    if r > MOMENT_R_CAP:
        raise CapError(f"moments are available for r <= {MOMENT_R_CAP}, got {r}")


def _ordered_compositions(r, parts):
    """Ordered tuples of ``parts`` positive integers summing to r."""
    if parts == 1:
        yield (r,)
        return
    for first in range(1, r - parts + 2):
        for rest in _ordered_compositions(r - first, parts - 1):
            yield (first,) + rest


def _moment(p, r, t, weight):
    _check_r(r)
    t = _check_t(t)
    r = int(r)
    a = p.alpha
    # inner[m] = (1/m!) sum_j w(j, m) lambda_j
    inner = [0.0] + [
        math.fsum(weight(j, m) * lam for j, lam in enumerate(p.lambdas, start=1)) / math.factorial(m)
        for m in range(1, r + 1)
    ]
    total = []
    for n in range(1, r + 1):
        s = math.fsum(math.prod(inner[m] for m in comp) for comp in _ordered_compositions(r, n))
        total.append(t ** (n * a) * float(special.rgamma(n * a + 1)) * s)
    return math.factorial(r) * math.fsum(total)


def _falling(j, m):
    out = 1
    for i in range(m):
        out *= j - i
    return out


def factorial_moment(p: GfcpParams, r: int, t: float) -> float:
    """E[M(t)(M(t)-1)...(M(t)-r+1)]."""
    return _moment(p, r, t, _falling)


def raw_moment(p: GfcpParams, r: int, t: float) -> float:
    """E[M(t)^r]."""
    return _moment(p, r, t, lambda j, m: j**m)


def moment(p: GfcpParams, spec: MomentSpec, t: float) -> float:
    if spec.kind == "factorial":
        return factorial_moment(p, spec.order, t)
    return raw_moment(p, spec.order, t)


def covariance(p: GfcpParams, s: float, t: float) -> float:
    """Cov(M(s), M(t)) for 0 < s <= t.

    Conditioning on the time change: Var(M(1) | alpha=1) E Y(s) plus
    (sum_j j lambda_j)^2 Cov(Y(s), Y(t)).
    """
    if not 0 < s <= t:
        raise DomainError(f"need 0 < s <= t, got s={s}, t={t}")
    if p.alpha == 1.0:
        return p.second_rate * s
    return p.T * s**p.alpha + p.mean_rate**2 * subordinator.inverse_cov(p.alpha, s, t)


def correlation(p: GfcpParams, s: float, t: float) -> float:
    cov = covariance(p, s, t)
    return cov / math.sqrt(mean_var(p, s)[1] * mean_var(p, t)[1])


def _grid(t_grid):
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise DomainError("t_grid must be a non-empty 1-d sequence")
    if t[0] < 0 or np.any(np.diff(t) < 0) or not np.all(np.isfinite(t)):
        raise DomainError("t_grid must be finite, non-decreasing and >= 0")
    return t


def _renewal_counts(alpha, rate, t, n_paths, g):
    """Counts on grid ``t`` of a renewal process whose waiting times have
    Laplace transform rate / (rate + s^alpha) (exponential when alpha = 1).

    Such a waiting time is rate^(-1/alpha) E^(1/alpha) D with E ~ Exp(1) and D
    standard one-sided stable.
    """
    counts = np.zeros((n_paths, t.size), dtype=np.int64)
    clock = np.zeros(n_paths)
    active = np.arange(n_paths)
    t_max = t[-1]
    while active.size:
        e = g.standard_exponential(active.size)
        if alpha == 1.0:
            w = e / rate
        else:
            w = (e / rate) ** (1.0 / alpha) * stable_samples(alpha, active.size, g)
        clock[active] += w
        arrived = clock[active] <= t_max
        active = active[arrived]
        counts[active] += clock[active, None] <= t
    return counts


def _compound_values(p, t, n_paths, g):
    n = _renewal_counts(p.alpha, p.Lambda, t, n_paths, g)
    q = jump_distribution(p)
    sizes = np.arange(1, p.k + 1)
    dn = np.diff(np.concatenate((np.zeros((n_paths, 1), dtype=np.int64), n), axis=1), axis=1)
    out = np.zeros_like(dn)
    # the total of m iid jumps is sum_j j * Multinomial(m, q)_j
    flat = dn.ravel()
    mask = flat > 0
    if mask.any():
        draws = g.multinomial(flat[mask], q)
        out.ravel()[mask] = draws @ sizes
    return np.cumsum(out, axis=1)


def _default_x_step(p, t):
    return 1e-3 * float(t[-1]) ** p.alpha


def sample_values(
    p: GfcpParams,
    t_grid,
    n_paths: int,
    method: str = "time_change",
    rng=None,
    *,
    x_step: float | None = None,
) -> np.ndarray:
    """Values M(t_i) of ``n_paths`` independent paths, shape (n_paths, len(t_grid)).

    time_change: a GCP evaluated at the inverse subordinator. For a single
    time the inverse is drawn exactly as (t / D)^alpha; for several times it
    comes from grid first passage with cell ``x_step``.
    compound: a renewal count with Mittag-Leffler waiting times (the TFPP at
    total rate Lambda) carrying iid jumps from ``jump_distribution``.
    superpose_gcp: alpha = 1 only, independent Poisson streams.
    """
    if method not in SAMPLING_METHODS:
        raise DomainError(f"method must be one of {SAMPLING_METHODS}, got {method!r}")
    t = _grid(t_grid)
    g = as_generator(rng)
    n_paths = int(n_paths)
    if method == "superpose_gcp":
        if p.alpha != 1.0:
            raise DomainError("superpose_gcp requires alpha = 1")
        return gcp_values(p, t, n_paths, g)
    if method == "compound":
        return _compound_values(p, t, n_paths, g)
    if p.alpha == 1.0:
        return gcp_values(p, t, n_paths, g)
    if t.size == 1:
        y = inverse_marginal_samples(p.alpha, float(t[0]), n_paths, g)[:, None]
    else:
        step = _default_x_step(p, t) if x_step is None else x_step
        y = inverse_paths(p.alpha, t, step, n_paths, g)
    dy = np.diff(np.concatenate((np.zeros((n_paths, 1)), y), axis=1), axis=1)
    return np.cumsum(gcp_increment_counts(p, dy, g), axis=1)


def sample(p: GfcpParams, t_grid, method: str = "time_change", rng=None, **kw) -> np.ndarray:
    """One path evaluated on ``t_grid``."""
    return sample_values(p, t_grid, 1, method, rng, **kw)[0]


def _alpha1_coeffs(p, n):
    # at alpha = 1, t^r E^{r+1}_{1,r+1}(-Lambda t) = t^r e^{-Lambda t} / r!
    out = {}
    for r, (top, rest) in _pmf_coefficients(p.lambdas, n)[n]:
        out[r] = math.exp(top) * rest / math.factorial(r)
    return out


def _residual_alpha1(p, n, t):
    lam = p.Lambda
    e = math.exp(-lam * t)

    def value_and_slope(m):
        c = _alpha1_coeffs(p, m)
        val = math.fsum(cr * t**r for r, cr in c.items())
        der = math.fsum(cr * r * t ** (r - 1) for r, cr in c.items() if r > 0)
        return e * val, e * (der - lam * val)

    pn, dpn = value_and_slope(n)
    lower = math.fsum(
        lam_j * value_and_slope(n - j)[0]
        for j, lam_j in enumerate(p.lambdas, start=1)
        if j <= n
    )
    return abs(dpn + lam * pn - lower)


def _residual_l1(p, n, t, steps, acc):
    a = p.alpha
    h = t / steps
    grid = h * np.arange(steps + 1)
    probs = pmf_grid(p, n, grid, acc)
    col = probs[:, n]
    j = np.arange(steps)
    b = (j + 1.0) ** (1 - a) - j ** (1.0 - a)
    # Caputo derivative at t_N: h^-a / Gamma(2-a) sum_j b_j (p_{N-j} - p_{N-j-1})
    dcol = np.diff(col)[::-1]
    caputo = h ** (-a) / math.gamma(2 - a) * math.fsum(b * dcol)
    lower = math.fsum(lam * probs[-1, n - jj] for jj, lam in enumerate(p.lambdas, start=1) if jj <= n)
    return abs(caputo + p.Lambda * col[-1] - lower)


def ode_residual(
    p: GfcpParams,
    n: int,
    t: float,
    scheme: str = "exact_alpha1",
    *,
    steps: int = 10_000,
    acc: MlAccuracy = MlAccuracy(rel_tol=1e-10),
) -> float:
    """|D^alpha p(n, t) + Lambda p(n, t) - sum_j lambda_j p(n - j, t)|.

    exact_alpha1 differentiates the closed form at alpha = 1; l1_caputo
    approximates the Caputo derivative by the L1 scheme on ``steps`` uniform
    steps over [0, t], with first-order bias from the t^alpha behaviour at 0.
    """
    _check_n(n)
    n = int(n)
    t = _check_t(t)
    if not t > 0:
        raise DomainError("residual needs t > 0")
    if scheme == "exact_alpha1":
        if p.alpha != 1.0:
            raise DomainError("exact_alpha1 requires alpha = 1")
        return _residual_alpha1(p, n, t)
    if scheme == "l1_caputo":
        if not p.alpha < 1.0:
            raise DomainError("l1_caputo requires 0 < alpha < 1")
        return _residual_l1(p, n, t, int(steps), acc)
    raise DomainError(f"unknown scheme {scheme!r}")
