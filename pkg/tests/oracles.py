"""Independent reference computations used by the tests.

Everything here works in mpmath at high precision or by brute force, and
shares no code with the package.
"""

import itertools
import math

import mpmath as mp


def ml_series(beta, gamma, delta, x, dps=60):
    """Direct three-parameter Mittag-Leffler series, summed term by term with
    enough extra digits to absorb the cancellation for negative x."""
    k_peak = int(abs(float(x)) ** (1.0 / float(beta)) / float(beta)) + 1
    # peak term ~ exp(|x|^(1/beta)) while the sum can be ~ exp(-|x|^(1/beta))
    extra = int(0.9 * abs(float(x)) ** (1.0 / float(beta))) + 10
    with mp.workdps(dps + extra):
        b, g, d, x = mp.mpf(beta), mp.mpf(gamma), mp.mpf(delta), mp.mpf(x)
        total = mp.mpf(0)
        k = 0
        while True:
            term = mp.rf(d, k) * x**k / (mp.factorial(k) * mp.gamma(k * b + g))
            total += term
            if k > k_peak + 20 and abs(term) < mp.mpf(10) ** (-(dps + extra)) * max(abs(total), mp.mpf(10) ** -300):
                break
            k += 1
        return +total


def brute_compositions(n, r, k):
    """All (i_1..i_k) >= 0 with sum i = r and sum j i_j = n, by exhaustive search."""
    out = []
    for tup in itertools.product(range(r + 1), repeat=k):
        if sum(tup) == r and sum((j + 1) * i for j, i in enumerate(tup)) == n:
            out.append(tup)
    return sorted(out)


def pmf_closed_form(alpha, lambdas, n, t, dps=40):
    """Closed-form pmf summed over every (i_1..i_k) with sum j i_j = n."""
    k = len(lambdas)
    lam_tot = sum(lambdas)
    with mp.workdps(dps):
        a, t = mp.mpf(alpha), mp.mpf(t)
        total = mp.mpf(0)
        for r in range(n + 1):
            for tup in brute_compositions(n, r, k):
                coef = mp.factorial(r)
                for i, lam in zip(tup, lambdas):
                    coef *= mp.mpf(lam) ** i / mp.factorial(i)
                ml = ml_series(a, r * a + 1, r + 1, -lam_tot * t**a, dps)
                total += coef * t ** (r * a) * ml
        return total


def inverse_second_product(alpha, s, t):
    """E[Y(s) Y(t)], s <= t, from the renewal-type integral
    (1 / (Gamma(a) Gamma(a+1))) int_0^s ((t - u)^a + (s - u)^a) u^(a-1) du."""
    with mp.workdps(40):
        a = mp.mpf(alpha)
        f = lambda u: ((t - u) ** a + (s - u) ** a) * u ** (a - 1)
        return mp.quad(f, [0, mp.mpf(s) / 2, s], maxdegree=10) / (mp.gamma(a) * mp.gamma(a + 1))


def inverse_cov_oracle(alpha, s, t):
    with mp.workdps(40):
        g = mp.gamma(mp.mpf(alpha) + 1)
        return inverse_second_product(alpha, s, t) - (mp.mpf(s) * t) ** alpha / g**2


def gfcp_cov_oracle(alpha, lambdas, s, t):
    """Cov(M(s), M(t)) by conditioning on the time change:
    sum j^2 lambda_j E Y(s) + (sum j lambda_j)^2 Cov(Y(s), Y(t))."""
    m1 = sum((j + 1) * lam for j, lam in enumerate(lambdas))
    m2 = sum((j + 1) ** 2 * lam for j, lam in enumerate(lambdas))
    if alpha == 1:
        return m2 * min(s, t)
    ey = mp.mpf(s) ** alpha / mp.gamma(mp.mpf(alpha) + 1)
    return m2 * ey + m1**2 * inverse_cov_oracle(alpha, s, t)


def central_derivative(f, x, n, h):
    """n-th central difference with two Richardson extrapolations."""

    def d(step):
        return math.fsum((-1) ** i * math.comb(n, i) * f(x + (n / 2 - i) * step) for i in range(n + 1)) / step**n

    a, b, c = d(h), d(h / 2), d(h / 4)
    ab, bc = (4 * b - a) / 3, (4 * c - b) / 3
    return (16 * bc - ab) / 15


def stirling2(r, j):
    return sum((-1) ** i * math.comb(j, i) * (j - i) ** r for i in range(j + 1)) // math.factorial(j)
