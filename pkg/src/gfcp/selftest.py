"""Fast acceptance subset behind ``gfcp selftest``.

Each check is a reduced version of a full acceptance test: exact formulas at
their stated tolerances, plus small Monte Carlo runs judged at 4 standard
errors. The whole set runs in well under a minute on one core.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import dependence, process, risk, subordinator
from .gcp import gcp_pmf_vector
from .params import validate
from .specfun import ml_derivative, ml_three


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


def central_derivative(f, x: float, n: int, h: float) -> float:
    """n-th central difference with two Richardson steps (error O(h^6))."""

    def d(step):
        return math.fsum(
            (-1) ** i * math.comb(n, i) * f(x + (n / 2 - i) * step) for i in range(n + 1)
        ) / step**n

    a, b, c = d(h), d(h / 2), d(h / 4)
    ab, bc = (4 * b - a) / 3, (4 * c - b) / 3
    return (16 * bc - ab) / 15


def _ml_checks():
    xs = np.linspace(-20, 20, 81)
    err = max(abs(ml_three(1, 1, 1, x) / math.exp(x) - 1) for x in xs)
    yield Check("ml_exp", err < 1e-12, f"max rel err {err:.3g}")
    worst = 0.0
    for n in (1, 2, 3):
        for x in (-5.0, -0.3, 0.0, 2.0, 5.0):
            fd = central_derivative(lambda v: ml_three(0.8, 1, 1, v), x, n, 0.1)
            worst = max(worst, abs(ml_derivative(0.8, 1, n, x) / fd - 1))
    yield Check("ml_derivative", worst < 1e-6, f"max rel err {worst:.3g}")


def _pmf_checks():
    worst = 0.0
    for lams in ([1.0], [0.5, 1.5], [1, 0.2, 0.3, 0.4, 0.1]):
        p = validate(alpha=1.0, lambdas=lams)
        for t in (0.1, 1.0, 5.0):
            worst = max(worst, float(np.max(np.abs(process.pmf_vector(p, 30, t) - gcp_pmf_vector(p, 30, t)))))
    yield Check("pmf_alpha1", worst < 1e-10, f"max abs diff {worst:.3g}")
    p = validate(alpha=0.6, lambdas=[0.5, 0.3, 0.2])
    vec = process.pmf_vector(p, 60, 1.0)
    n = np.arange(vec.size)
    m, v = process.mean_var(p, 1.0)
    gap = max(abs(vec @ n - m), abs(vec @ n**2 - m * m - v), abs(1 - vec.sum()))
    yield Check("moments", gap < 1e-8, f"max gap {gap:.3g}")


def _structure_checks():
    a = 0.5
    ex, asy = subordinator.inverse_cov(a, 1.0, 100.0), subordinator.inverse_cov_asymptotic(a, 1.0, 100.0)
    yield Check("inverse_cov_asymptote", abs(asy / ex - 1) < 0.05, f"ratio {asy / ex:.6f}")
    g = np.random.default_rng(np.random.SeedSequence([0, 5]))
    y = subordinator.inverse_marginal_samples(a, 1.0, 20_000, g)
    z = (y.mean() - subordinator.inverse_mean(a, 1.0)) / (y.std(ddof=1) / math.sqrt(y.size))
    yield Check("inverse_mean_mc", abs(z) < 4, f"z = {z:.2f}")
    p = validate(alpha=a, lambdas=[3.0, 3.0])
    lrd = dependence.fit_decay_exponent(p, 0.1)
    yield Check("lrd_slope", abs(lrd.fitted_theta - a) < 0.02, f"theta {lrd.fitted_theta:.4f}")
    srd = dependence.fit_decay_exponent(p, 0.1, 0.1)
    yield Check("srd_slope", abs(srd.fitted_theta - (3 - a) / 2) < 0.05, f"theta {srd.fitted_theta:.4f}")
    p1 = validate(alpha=1.0, lambdas=[1.0, 0.5])
    res = max(process.ode_residual(p1, n, 2.0) for n in range(11))
    yield Check("ode_alpha1", res < 1e-6, f"max residual {res:.3g}")


def _ruin_checks(seed, threads):
    p = validate(alpha=1.0, lambdas=[1.0, 1.0])
    m = risk.RiskModel(p, 6.0, risk.Exponential(1.0))
    est = risk.ruin_mc(m, [math.inf, 1.0], 20_000, seed, threads)
    exact = risk.psi_zero(m)
    yield Check("psi_zero_formula", exact == 0.5, f"psi(0) = {exact!r}")
    z = (est[0].estimate - exact) / est[0].se
    yield Check("psi_zero_mc", abs(z) < 4, f"mc {est[0].estimate:.4f}, z = {z:.2f}")
    g = risk.g_zero(m, 1.0)
    z = (est[1].estimate - g) / est[1].se
    yield Check("g_zero_mc", abs(z) < 4, f"exact {g:.5f}, z = {z:.2f}")


def run_selftest(seed: int = 0, threads: int = 1) -> list[Check]:
    out: list[Check] = []
    for group in (_ml_checks(), _pmf_checks(), _structure_checks(), _ruin_checks(seed, threads)):
        out.extend(group)
    return out
