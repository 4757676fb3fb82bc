"""Stable subordinator D with E exp(-s D(t)) = exp(-t s^alpha) and its inverse Y.

Y(t) = inf{x > 0 : D(x) > t}. Single-time marginals are sampled exactly via
self-similarity, Y(t) = (t / D(1))^alpha in law. Path-coupled values at several
times come from first passage of D simulated on a grid in x, which biases each
Y(t_i) upward by less than one grid cell.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, GridError
from .montecarlo import as_generator
from .specfun import beta_function, incomplete_beta

__all__ = [
    "StableGrid",
    "InversePath",
    "stable_sample",
    "stable_samples",
    "stable_grid",
    "inverse_marginal_sample",
    "inverse_marginal_samples",
    "inverse_path",
    "inverse_paths",
    "inverse_mean",
    "inverse_cov",
    "inverse_cov_asymptotic",
    "MAX_GRID_CELLS",
]

MAX_GRID_CELLS = 10**8
_CELL_CHUNK = 256


@dataclass(frozen=True)
class StableGrid:
    alpha: float
    dt: float
    values: np.ndarray  # D(0) = 0, D(dt), D(2 dt), ...


@dataclass(frozen=True)
class InversePath:
    alpha: float
    times: np.ndarray
    values: np.ndarray


def _check_alpha(alpha):
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"stable index must lie in (0, 1), got {alpha}")


def stable_samples(alpha: float, size, rng) -> np.ndarray:
    """One-sided stable variates with Laplace transform exp(-s^alpha).

    Kanter's representation: with U ~ Uniform(0, pi) and E ~ Exp(1),
    D = sin(aU) / sin(U)^(1/a) * (sin((1-a)U) / E)^((1-a)/a).
    """
    _check_alpha(alpha)
    g = as_generator(rng)
    u = math.pi * (1.0 - g.random(size))  # (0, pi]
    e = g.standard_exponential(size)
    a = alpha
    log_d = (
        np.log(np.sin(a * u))
        - np.log(np.sin(u)) / a
        + (1.0 - a) / a * (np.log(np.sin((1.0 - a) * u)) - np.log(e))
    )
    return np.exp(log_d)


def stable_sample(alpha: float, rng) -> float:
    return float(stable_samples(alpha, 1, rng)[0])


def inverse_marginal_samples(alpha: float, t: float, size, rng) -> np.ndarray:
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    d = stable_samples(alpha, size, rng)
    if t == 0:
        return np.zeros_like(d)
    return (t / d) ** alpha


def inverse_marginal_sample(alpha: float, t: float, rng) -> float:
    return float(inverse_marginal_samples(alpha, t, 1, rng)[0])


def stable_grid(alpha: float, dt: float, n_steps: int, rng) -> StableGrid:
    """D on the grid 0, dt, ..., n_steps*dt; increments are dt^(1/alpha) D(1) in law."""
    if not dt > 0:
        raise DomainError(f"dt must be > 0, got {dt}")
    inc = dt ** (1.0 / alpha) * stable_samples(alpha, int(n_steps), rng)
    return StableGrid(alpha, dt, np.concatenate(([0.0], np.cumsum(inc))))


class _Cells:
    """Deterministic grid in x with right edges x_1 < x_2 < ...

    Uniform cells of width ``x_step`` unless ``rel_step`` is set, in which case
    the width is max(x_step, rel_step * x_i), growing geometrically past
    x_step / rel_step.
    """

    def __init__(self, x_step, rel_step=None):
        self.x_step = x_step
        self.rel_step = rel_step

    def edges(self, idx):
        """Right edge x_i for 1-based cell indices ``idx``."""
        i = np.asarray(idx, dtype=float)
        x = i * self.x_step
        if self.rel_step is not None:
            i0 = math.ceil(1.0 / self.rel_step)
            big = i > i0
            x[big] = i0 * self.x_step * (1.0 + self.rel_step) ** (i[big] - i0)
        return x


def _first_passage(alpha, levels, cells, n_paths, g, max_cells):
    """1-based index of the first grid point where D exceeds each sorted level.

    Paths that have passed the top level stop drawing, so the random stream
    layout depends only on the grid, the path count and the draws themselves.
    """
    m = levels.size
    out = np.zeros((n_paths, m), dtype=np.int64)
    active = np.arange(n_paths)
    d_last = np.zeros(n_paths)
    x_last = 0.0
    start = 0
    while active.size:
        if start >= max_cells:
            raise GridError(
                f"D did not exceed {levels[-1]:g} within {max_cells} grid cells"
            )
        count = min(_CELL_CHUNK, max_cells - start)
        edges = cells.edges(np.arange(start + 1, start + count + 1))
        widths = np.diff(np.concatenate(([x_last], edges)))
        inc = widths ** (1.0 / alpha) * stable_samples(alpha, (active.size, count), g)
        dcum = d_last[active, None] + np.cumsum(inc, axis=1)
        for i in range(m):
            todo = out[active, i] == 0
            if not todo.any():
                continue
            below = (dcum[todo] <= levels[i]).sum(axis=1)
            hit = below < count
            out[active[todo][hit], i] = start + 1 + below[hit]
        d_last[active] = dcum[:, -1]
        x_last = edges[-1]
        start += count
        active = active[out[active, -1] == 0]
    return out


def inverse_paths(
    alpha: float,
    t_grid,
    x_step: float,
    n_paths: int,
    rng,
    *,
    rel_step: float | None = None,
    base_step: float | None = None,
    max_cells: int = MAX_GRID_CELLS,
) -> np.ndarray:
    """Path-coupled Y(t_i) for ``n_paths`` independent paths, shape (n_paths, len(t_grid)).

    Y(t) = x_m where x_m is the first grid point with D(x_m) > t. With
    ``base_step`` (which must divide ``x_step``) D is drawn on the finer base
    grid and only checked at multiples of ``x_step``, so runs sharing a seed
    and a base are nested: a coarser ``x_step`` gives values at most one
    coarse cell above a finer one.
    """
    _check_alpha(alpha)
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0:
        raise DomainError("t_grid must be a non-empty 1-d sequence")
    if np.any(np.diff(t) < 0) or t[0] < 0:
        raise DomainError("t_grid must be non-decreasing and >= 0")
    if not x_step > 0:
        raise DomainError(f"x_step must be > 0, got {x_step}")
    sub = 1
    if base_step is not None:
        sub = int(round(x_step / base_step))
        if sub < 1 or abs(sub * base_step - x_step) > 1e-9 * x_step:
            raise DomainError("base_step must divide x_step")
        if rel_step is not None:
            raise DomainError("base_step and rel_step cannot be combined")
    if rel_step is not None and not rel_step > 0:
        raise DomainError(f"rel_step must be > 0, got {rel_step}")
    g = as_generator(rng)
    out = np.zeros((int(n_paths), t.size))
    pos = t > 0
    if pos.any():
        step = x_step / sub
        cells = _Cells(step, rel_step)
        idx = _first_passage(alpha, t[pos], cells, int(n_paths), g, max_cells * sub)
        if sub > 1:
            # first coarse point m * sub at or after the first base crossing
            out[:, pos] = -(-idx // sub) * x_step
        else:
            out[:, pos] = cells.edges(idx)
    return out


def inverse_path(alpha: float, t_grid, x_step: float, rng, **kw) -> InversePath:
    values = inverse_paths(alpha, t_grid, x_step, 1, rng, **kw)[0]
    return InversePath(alpha, np.asarray(t_grid, dtype=float), values)


def inverse_mean(alpha: float, t: float) -> float:
    """E Y(t) = t^alpha / Gamma(alpha + 1)."""
    _check_alpha(alpha)
    return t**alpha / math.gamma(alpha + 1)


def _check_st(s, t):
    if not 0 < s <= t:
        raise DomainError(f"need 0 < s <= t, got s={s}, t={t}")


def inverse_cov(alpha: float, s: float, t: float) -> float:
    """Cov(Y(s), Y(t)) for 0 < s <= t, through the incomplete beta function."""
    _check_alpha(alpha)
    _check_st(s, t)
    a = alpha
    b = beta_function(a, a + 1)
    f = a * t ** (2 * a) * incomplete_beta(a, a + 1, s / t) - (t * s) ** a
    return (a * s ** (2 * a) * b + f) / math.gamma(a + 1) ** 2


def inverse_cov_asymptotic(alpha: float, s: float, t: float) -> float:
    """Large-t form of :func:`inverse_cov` for fixed s."""
    _check_alpha(alpha)
    _check_st(s, t)
    a = alpha
    b = beta_function(a, a + 1)
    return (a * s ** (2 * a) * b - a * a / (a + 1) * s ** (a + 1) / t ** (1 - a)) / math.gamma(a + 1) ** 2
