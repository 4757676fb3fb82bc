"""Random streams, chunked parallel Monte Carlo, and estimator helpers.

Stream rule: chunk ``i`` of a run with master seed ``m`` draws from
``np.random.default_rng(SeedSequence([m, i]))``. Work is cut into chunks of a
fixed size that does not depend on the thread count, and chunk results are
returned in chunk order, so results are identical for any ``threads``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, TypeVar

import numpy as np

R = TypeVar("R")

DEFAULT_CHUNK = 50_000


def stream(master_seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int(index)]))


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def chunk_sizes(n_total: int, chunk: int = DEFAULT_CHUNK) -> list[int]:
    full, rest = divmod(int(n_total), int(chunk))
    return [chunk] * full + ([rest] if rest else [])


def run_chunks(
    fn: Callable[[np.random.Generator, int], R],
    n_total: int,
    seed: int,
    threads: int = 1,
    chunk: int = DEFAULT_CHUNK,
) -> list[R]:
    """Evaluate ``fn(rng_i, size_i)`` for every chunk; results in chunk order."""
    sizes = chunk_sizes(n_total, chunk)
    jobs = [(stream(seed, i), n) for i, n in enumerate(sizes)]
    if threads <= 1 or len(jobs) <= 1:
        return [fn(g, n) for g, n in jobs]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(lambda job: fn(*job), jobs))


def sample_chunks(fn, n_total, seed, threads=1, chunk=DEFAULT_CHUNK) -> np.ndarray:
    """Concatenate per-chunk sample arrays along the first axis."""
    return np.concatenate(run_chunks(fn, n_total, seed, threads, chunk), axis=0)


def empirical_pmf(samples, n_max: int) -> np.ndarray:
    """Relative frequencies of 0..n_max; the mass above n_max is dropped."""
    samples = np.asarray(samples)
    counts = np.bincount(samples[samples <= n_max].astype(np.int64), minlength=n_max + 1)
    return counts / samples.size


@dataclass(frozen=True)
class Distance:
    tv: float
    tv_se: float
    sup_gap: float


def tv_to_pmf(samples, pmf) -> Distance:
    """Total variation between an empirical law and ``pmf`` on 0..len(pmf)-1.

    Mass outside the support of ``pmf`` (and pmf tail beyond it) is counted as
    one lumped cell. The standard error is the delta-method value for the
    linear functional sum_n sign(p_hat_n - p_n) p_hat_n.
    """
    pmf = np.asarray(pmf, dtype=float)
    n_max = pmf.size - 1
    samples = np.asarray(samples)
    emp = empirical_pmf(samples, n_max)
    emp_tail = 1.0 - emp.sum()
    ref_tail = max(1.0 - math.fsum(pmf), 0.0)
    diff = np.append(emp - pmf, emp_tail - ref_tail)
    p_hat = np.append(emp, emp_tail)
    sgn = np.sign(diff)
    mean = float(np.dot(sgn, p_hat))
    var = float(np.dot(sgn * sgn, p_hat)) - mean * mean
    return Distance(
        tv=0.5 * float(np.abs(diff).sum()),
        tv_se=0.5 * math.sqrt(max(var, 0.0) / samples.size),
        sup_gap=float(np.abs(diff).max()),
    )


def tv_between(a, b, n_max: int) -> float:
    """Total variation between two empirical laws on 0..n_max plus a tail cell."""
    pa, pb = empirical_pmf(a, n_max), empirical_pmf(b, n_max)
    d = np.append(pa - pb, (1 - pa.sum()) - (1 - pb.sum()))
    return 0.5 * float(np.abs(d).sum())


def mean_with_se(x) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def correlation_with_se(x, y) -> tuple[float, float]:
    """Sample correlation and its influence-function standard error."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        # a constant sample gives nan, which callers treat as undefined
        zx = (x - x.mean()) / x.std()
        zy = (y - y.mean()) / y.std()
        r = float(np.mean(zx * zy))
        infl = zx * zy - 0.5 * r * (zx * zx + zy * zy)
    return r, float(infl.std(ddof=1) / math.sqrt(x.size))
