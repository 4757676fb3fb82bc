"""Acceptance criteria 1-10, each with its stated tolerance and runtime budget."""

import contextlib
import io
import math
import time

import numpy as np

from gfcp import ctrw, dependence, process, risk
from gfcp.cli import run as cli_run
from gfcp.gcp import gcp_pmf_vector
from gfcp.montecarlo import mean_with_se, tv_between, tv_to_pmf
from gfcp.params import validate
from gfcp.specfun import ml_derivative, ml_three
from gfcp.subordinator import inverse_cov, inverse_cov_asymptotic, inverse_marginal_samples, inverse_mean, inverse_paths

from conftest import ACCEPTANCE_RESULTS
from oracles import central_derivative


class Criterion:
    def __init__(self, number, budget_s):
        self.number = number
        self.budget = budget_s
        self.notes = []
        self.failures = []

    def check(self, ok, note):
        self.notes.append(note)
        if not ok:
            self.failures.append(note)


@contextlib.contextmanager
def criterion(number, budget_s):
    c = Criterion(number, budget_s)
    start = time.perf_counter()
    try:
        yield c
    except Exception as exc:
        c.failures.append(f"{type(exc).__name__}: {exc}")
    elapsed = time.perf_counter() - start
    c.check(elapsed < budget_s, f"runtime {elapsed:.1f}s < {budget_s:g}s")
    detail = "; ".join(c.failures) if c.failures else f"{len(c.notes)} checks, {elapsed:.1f}s"
    ACCEPTANCE_RESULTS[number] = (not c.failures, detail)
    print(f"criterion {number}: {'PASS' if not c.failures else 'FAIL'} ({detail})")
    assert not c.failures, detail


def test_criterion_01_mittag_leffler():
    with criterion(1, 10) as c:
        xs = np.linspace(-20, 20, 801)
        rel = max(abs(ml_three(1, 1, 1, x) / math.exp(x) - 1) for x in xs)
        c.check(rel < 1e-12, f"max rel err vs exp {rel:.2e}")
        worst = 0.0
        for beta, gamma in ((0.8, 1.0), (0.5, 1.0), (0.7, 1.3)):
            f = lambda v: ml_three(beta, gamma, 1, v)
            for n in (1, 2, 3):
                for x in np.linspace(-5, 3, 9):
                    exact = ml_derivative(beta, gamma, n, x)
                    worst = max(worst, abs(exact / central_derivative(f, x, n, 0.1) - 1))
        c.check(worst < 1e-6, f"derivative identity rel err {worst:.2e}")


def test_criterion_02_pmf_equivalence():
    with criterion(2, 60) as c:
        worst = 0.0
        for k in range(1, 6):
            for lams in ([1.0] * k, [1.0 / j for j in range(1, k + 1)], [0.3 * j for j in range(1, k + 1)]):
                p = validate(alpha=1, lambdas=lams)
                for t in (0.1, 1.0, 5.0):
                    a = process.pmf_vector(p, 30, t)
                    b = gcp_pmf_vector(p, 30, t)
                    worst = max(worst, float(np.max(np.abs(a - b))))
                    for n in (0, 7, 30):
                        worst = max(worst, abs(process.pmf(p, n, t) - b[n]))
        c.check(worst < 1e-10, f"max abs diff {worst:.2e}")


def test_criterion_03_normalization_and_moments():
    with criterion(3, 120) as c:
        N = 150
        n = np.arange(N + 1, dtype=float)
        for alpha, lams, t in ((0.6, [1.0, 0.5], 1.0), (0.4, [0.5, 0.2, 0.3], 2.0), (1.0, [1.0, 1.0], 1.0), (0.85, [2.0], 0.5)):
            p = validate(alpha=alpha, lambdas=lams)
            vec = process.pmf_vector(p, N, t, cap=N)
            mass = math.fsum(vec)
            bound = process.raw_moment(p, 3, t) / (N + 1) ** 3
            c.check(-1e-13 <= 1 - mass <= bound + 1e-13, f"mass defect {1 - mass:.1e} <= {bound:.1e}")
            m, v = process.mean_var(p, t)
            sm = math.fsum(vec * n)
            sv = math.fsum(vec * n * n) - sm * sm
            c.check(abs(sm - m) < 1e-8 and abs(sv - v) < 1e-8, f"mean/var diffs {abs(sm - m):.1e}, {abs(sv - v):.1e}")
            for r in (1, 2, 3):
                fall = np.ones_like(n)
                for j in range(r):
                    fall = fall * (n - j)
                fm, rm = math.fsum(vec * fall), math.fsum(vec * n**r)
                c.check(abs(process.factorial_moment(p, r, t) / fm - 1) < 1e-8, f"factorial r={r}")
                c.check(abs(process.raw_moment(p, r, t) / rm - 1) < 1e-8, f"raw r={r}")


def test_criterion_04_sampler_agreement():
    with criterion(4, 600) as c:
        size = 1_000_000
        cases = (
            (validate(alpha=1, lambdas=[1.0, 1.0]), ("time_change", "compound", "superpose_gcp")),
            (validate(alpha=0.6, lambdas=[1.0, 1.0]), ("time_change", "compound")),
        )
        for i, (p, methods) in enumerate(cases):
            exact = process.pmf_vector(p, 30, 1.0)
            draws = {}
            for j, m in enumerate(methods):
                draws[m] = process.sample_values(p, [1.0], size, m, np.random.default_rng([4, i, j]))[:, 0]
                tv = tv_to_pmf(draws[m], exact).tv
                c.check(tv < 0.01, f"alpha={p.alpha} {m} vs exact TV {tv:.4f}")
            for a in range(len(methods)):
                for b in range(a + 1, len(methods)):
                    tv = tv_between(draws[methods[a]], draws[methods[b]], 30)
                    c.check(tv < 0.01, f"alpha={p.alpha} {methods[a]}/{methods[b]} TV {tv:.4f}")


def test_criterion_05_inverse_subordinator():
    with criterion(5, 300) as c:
        for i, alpha in enumerate((0.3, 0.5, 0.7, 0.9)):
            y = inverse_marginal_samples(alpha, 1.0, 1_000_000, np.random.default_rng([5, i]))
            m, se = mean_with_se(y)
            c.check(abs(m - inverse_mean(alpha, 1.0)) < 4 * se, f"alpha={alpha} mean z={(m - inverse_mean(alpha, 1.0)) / se:.2f}")
            ex = inverse_cov(alpha, 1.0, 100.0)
            asy = inverse_cov_asymptotic(alpha, 1.0, 100.0)
            c.check(abs(asy / ex - 1) < 0.05, f"alpha={alpha} asymptote rel err {abs(asy / ex - 1):.3f}")
        y = inverse_paths(0.5, [1.0, 2.0], 1e-3, 100_000, np.random.default_rng(55))
        cov = float(np.cov(y[:, 0], y[:, 1])[0, 1])
        ex = inverse_cov(0.5, 1.0, 2.0)
        c.check(abs(cov / ex - 1) < 0.05, f"MC Cov(Y(1),Y(2)) rel err {abs(cov / ex - 1):.3f}")
        m, se = mean_with_se(y[:, 1])
        c.check(abs(m - inverse_mean(0.5, 2.0)) < 4 * se + 1e-3, f"path mean at t=2 z={(m - inverse_mean(0.5, 2.0)) / se:.2f}")


def test_criterion_06_dependence_exponents():
    with criterion(6, 60) as c:
        grid = np.logspace(2, 4, 20)
        for alpha in (0.3, 0.5, 0.7, 0.9):
            for k in (1, 2, 3):
                p = validate(alpha=alpha, lambdas=[3.0] * k)
                lrd = dependence.fit_decay_exponent(p, 0.1, 0.0, grid)
                c.check(abs(lrd.fitted_theta - alpha) <= 0.02 and lrd.classification == "LRD",
                        f"alpha={alpha} k={k} LRD slope {-lrd.fitted_theta:.4f}")
                srd = dependence.fit_decay_exponent(p, 0.1, 0.1, grid)
                c.check(abs(srd.fitted_theta - (3 - alpha) / 2) <= 0.05 and srd.classification == "SRD",
                        f"alpha={alpha} k={k} SRD slope {-srd.fitted_theta:.4f}")


def test_criterion_07_ctrw_limit():
    with criterion(7, 900) as c:
        p = validate(alpha=0.5, lambdas=[1.0])
        rows = ctrw.convergence_report(p, [1e2, 1e3, 1e4], 1.0, 1_000_000, seed=7)
        for a, b in zip(rows, rows[1:]):
            slack = 2 * math.hypot(a.tv_se, b.tv_se)
            c.check(b.tv <= a.tv + slack, f"TV c={a.c:g}->{b.c:g}: {a.tv:.4f}->{b.tv:.4f} (2 SE {slack:.4f})")
        for chk in ctrw.normalization_self_test(0.5, n=100_000, n_samples=2_000, seed=77):
            c.check(abs(chk.z) < 4, f"Laplace s={chk.s} z={chk.z:.2f}")


def test_criterion_08_ruin():
    with criterion(8, 600) as c:
        p = validate(alpha=1, lambdas=[1.0, 1.0])
        for i, claims in enumerate((risk.Exponential(1.0), risk.Deterministic(1.0))):
            m = risk.RiskModel(p, 6.0, claims)
            psi = risk.psi_zero(m)
            ys = [math.inf, 0.5, 1.0, 2.0]
            est = risk.ruin_mc(m, ys, 100_000, seed=80 + i)
            name = type(claims).__name__
            c.check(abs(est[0].estimate - psi) < 0.01, f"{name} psi(0) MC {est[0].estimate:.4f} vs {psi}")
            for e in est[1:]:
                g = risk.g_zero(m, e.y)
                c.check(abs(e.estimate - g) < 4 * e.se, f"{name} G(0,{e.y}) z={(e.estimate - g) / e.se:.2f}")
            gaps = [psi - risk.g_zero(m, y) for y in (5.0, 20.0, 50.0)]
            c.check(gaps[0] >= gaps[1] >= gaps[2] >= 0 and gaps[2] < 1e-6, f"{name} psi(0) - G(0,50) {gaps[2]:.1e}")


def test_criterion_09_governing_equation():
    with criterion(9, 300) as c:
        p = validate(alpha=1, lambdas=[0.5, 1.0, 0.25])
        worst = max(process.ode_residual(p, n, t) for n in range(11) for t in (0.5, 1.5))
        c.check(worst < 1e-6, f"alpha=1 residual {worst:.1e}")
        for alpha in (0.5, 0.7):
            q = validate(alpha=alpha, lambdas=[1.0, 2.0])
            worst = max(process.ode_residual(q, n, 1.0, "l1_caputo") for n in range(4))
            c.check(worst < 1e-2, f"alpha={alpha} L1 residual {worst:.1e}")


FRACTIONAL = '{"alpha": 0.6, "lambdas": [1, 1]}'
CLI_CASES = [
    ["ml", "--beta", "0.5", "--x=-3,0,2"],
    ["pmf", "--params", FRACTIONAL, "--n", "0..10", "--t", "1,2"],
    ["moments", "--params", FRACTIONAL, "--t", "1"],
    ["cov", "--params", FRACTIONAL, "--s", "1", "--t", "2,5"],
    ["sample", "--params", FRACTIONAL, "--t", "0.5,1", "--paths", "200", "--seed", "11"],
    ["sample", "--params", FRACTIONAL, "--t", "1", "--paths", "30000", "--method", "compound", "--seed", "3"],
    ["subordinator", "--alpha", "0.6", "--s", "1", "--t", "2"],
    ["dependence", "--params", FRACTIONAL, "--s", "1", "--t", "2,4", "--paths", "25000", "--seed", "5"],
    ["ctrw", "--params", FRACTIONAL, "--c-grid", "100,1000", "--paths", "25000", "--seed", "9"],
    ["ruin", "--params", '{"alpha": 1, "lambdas": [1, 1]}', "--c", "6", "--mu", "1", "--paths", "25000"],
    ["selftest", "--seed", "2"],
]


def _cli_output(argv, threads, path):
    with contextlib.redirect_stdout(io.StringIO()):
        code = cli_run(argv + ["--threads", str(threads), "--out", str(path)])
    return code, path.read_bytes()


def test_criterion_10_cli_determinism(tmp_path):
    with criterion(10, 600) as c:
        for i, argv in enumerate(CLI_CASES):
            outs = [_cli_output(argv, th, tmp_path / f"{i}_{j}.out") for j, th in enumerate((1, 8, 1))]
            same = outs[0] == outs[1] == outs[2] and outs[0][0] == 0
            c.check(same, f"{argv[0]} byte-identical across threads 1/8")
