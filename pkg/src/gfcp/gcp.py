"""The alpha = 1 case: a Levy process made of k weighted Poisson streams."""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .montecarlo import as_generator
from .params import GfcpParams

__all__ = [
    "SamplePath",
    "gcp_pmf",
    "gcp_pmf_vector",
    "gcp_char_fn",
    "levy_atoms",
    "gcp_sample_path",
    "gcp_values",
    "gcp_increment_counts",
]

_RESCALE = 1e250


@dataclass(frozen=True)
class SamplePath:
    """Piecewise-constant counting path on (0, horizon].

    ``times`` are strictly increasing event epochs and ``jumps[i]`` the jump
    size at ``times[i]``; the path is right-continuous with value 0 at t = 0.
    """

    horizon: float
    times: np.ndarray
    jumps: np.ndarray

    def value(self, t: float) -> int:
        i = np.searchsorted(self.times, t, side="right")
        return int(self.jumps[:i].sum())

    def values(self, ts) -> np.ndarray:
        cum = np.concatenate(([0], np.cumsum(self.jumps)))
        return cum[np.searchsorted(self.times, np.asarray(ts, dtype=float), side="right")]

    def rows(self):
        """(time, jump, cumulative value) per event."""
        cum = np.cumsum(self.jumps)
        return [(float(t), int(j), int(c)) for t, j, c in zip(self.times, self.jumps, cum)]


def _require_levy(p: GfcpParams):
    if p.alpha != 1.0:
        raise DomainError(f"operation defined for alpha = 1 only, got alpha = {p.alpha}")


def gcp_pmf_vector(p: GfcpParams, n_max: int, t: float) -> np.ndarray:
    """p(n, t) for n = 0..n_max from the recurrence
    p(n, t) = (t / n) sum_{j <= min(n, k)} j lambda_j p(n - j, t), p(0, t) = exp(-Lambda t).

    The recursion runs on values scaled by a running factor so that
    exp(-Lambda t) never underflows the intermediate states.
    """
    _require_levy(p)
    t = float(t)
    if t < 0 or not math.isfinite(t):
        raise DomainError(f"t must be finite and >= 0, got {t}")
    n_max = int(n_max)
    w = [j * lam for j, lam in enumerate(p.lambdas, start=1)]
    k = len(w)
    a = np.zeros(n_max + 1)
    out = np.zeros(n_max + 1)
    a[0] = 1.0
    log_off = -p.Lambda * t
    out[0] = math.exp(log_off)
    for n in range(1, n_max + 1):
        lo = max(0, n - k)
        acc = math.fsum(w[n - m - 1] * a[m] for m in range(lo, n))
        a[n] = t / n * acc
        if a[n] > _RESCALE:
            f = a[n]
            a[lo : n + 1] /= f
            log_off += math.log(f)
        out[n] = a[n] * math.exp(log_off)
    return out


def gcp_pmf(p: GfcpParams, n: int, t: float) -> float:
    if int(n) != n or n < 0:
        raise DomainError(f"n must be a non-negative integer, got {n}")
    return float(gcp_pmf_vector(p, int(n), t)[-1])


def gcp_char_fn(p: GfcpParams, xi: float, t: float) -> complex:
    """E exp(i xi M(t)) = exp(-t sum_j (1 - e^{i xi j}) lambda_j)."""
    _require_levy(p)
    expo = -t * sum((1 - cmath.exp(1j * xi * j)) * lam for j, lam in enumerate(p.lambdas, start=1))
    return cmath.exp(expo)


def levy_atoms(p: GfcpParams) -> list[tuple[int, float]]:
    """Levy measure as point masses: rate lambda_j at jump size j."""
    _require_levy(p)
    return [(j, lam) for j, lam in enumerate(p.lambdas, start=1) if lam > 0]


def gcp_sample_path(p: GfcpParams, T: float, rng) -> SamplePath:
    """Exact path on (0, T]: independent Poisson streams, stream j carrying jumps of size j."""
    _require_levy(p)
    if not T > 0:
        raise DomainError(f"horizon must be > 0, got {T}")
    g = as_generator(rng)
    times, jumps = [], []
    for j, lam in enumerate(p.lambdas, start=1):
        if lam == 0:
            continue
        n = g.poisson(lam * T)
        times.append(g.uniform(0.0, T, size=n))
        jumps.append(np.full(n, j, dtype=np.int64))
    times = np.concatenate(times) if times else np.empty(0)
    jumps = np.concatenate(jumps) if jumps else np.empty(0, dtype=np.int64)
    order = np.argsort(times, kind="stable")
    return SamplePath(float(T), times[order], jumps[order])


def gcp_increment_counts(p: GfcpParams, dtimes, rng) -> np.ndarray:
    """Increments of a GCP over consecutive intervals of lengths ``dtimes``.

    ``dtimes`` may be any array shape (e.g. paths x grid); each entry gets an
    independent increment, sum_j j * Poisson(lambda_j * dt).
    """
    g = as_generator(rng)
    dtimes = np.asarray(dtimes, dtype=float)
    out = np.zeros(dtimes.shape, dtype=np.int64)
    for j, lam in enumerate(p.lambdas, start=1):
        if lam > 0:
            out += j * g.poisson(lam * dtimes)
    return out


def gcp_values(p: GfcpParams, t_grid, n_paths: int, rng) -> np.ndarray:
    """Values M(t_i) of ``n_paths`` independent paths, shape (n_paths, len(t_grid))."""
    _require_levy(p)
    t_grid = np.asarray(t_grid, dtype=float)
    dt = np.diff(np.concatenate(([0.0], t_grid)))
    if np.any(dt < 0):
        raise DomainError("t_grid must be non-decreasing and >= 0")
    inc = gcp_increment_counts(p, np.broadcast_to(dt, (int(n_paths), dt.size)), rng)
    return np.cumsum(inc, axis=1)
