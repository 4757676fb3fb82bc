"""Three-parameter Mittag-Leffler function and (incomplete) beta functions.

The Mittag-Leffler series is summed term by term with the term ratio

    t_k / t_{k-1} = x (delta + k - 1) / k * Gamma((k-1) beta + gamma) / Gamma(k beta + gamma)

A double-precision pass is tried first. Its rounding error is bounded by
``sum_k |t_k| (2k + 3) u``; when that bound exceeds the requested relative
tolerance (heavy cancellation for negative arguments) the series is re-summed
in double-double arithmetic, and failing that in exact fixed-point integer
arithmetic with as many fraction bits as the observed cancellation needs.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy import special

from .errors import ConvergenceError, DomainError

__all__ = [
    "MlAccuracy",
    "DEFAULT_ACCURACY",
    "ml_three",
    "ml_three_array",
    "ml_derivative",
    "incomplete_beta",
    "beta_function",
]

_U = 2.0**-53
_MAX_PREC = 8192


@dataclass(frozen=True)
class MlAccuracy:
    rel_tol: float = 1e-12
    max_terms: int = 10_000
    arg_magnitude_cap: float = 50.0

    def __post_init__(self):
        if not (self.rel_tol > 0 and math.isfinite(self.rel_tol)):
            raise DomainError(f"rel_tol must be > 0, got {self.rel_tol}")
        if int(self.max_terms) != self.max_terms or self.max_terms < 1:
            raise DomainError(f"max_terms must be a positive integer, got {self.max_terms}")
        if not self.arg_magnitude_cap > 0:
            raise DomainError(f"arg_magnitude_cap must be > 0, got {self.arg_magnitude_cap}")


DEFAULT_ACCURACY = MlAccuracy()


def _check_args(beta, gamma, delta, acc):
    for name, v in (("beta", beta), ("gamma", gamma), ("delta", delta)):
        if not (math.isfinite(v) and v > 0):
            raise DomainError(f"{name} must be a finite positive number, got {v}")


def _check_x(x, acc):
    if not math.isfinite(x):
        raise DomainError(f"x must be finite, got {x}")
    if abs(x) > acc.arg_magnitude_cap:
        raise ConvergenceError(
            f"|x| = {abs(x):g} exceeds the series cap {acc.arg_magnitude_cap:g}"
        )


def _monotone_from(beta, delta):
    # past this index the term ratios decrease, so a geometric tail bound is valid
    if delta >= 1:
        return 1
    return int(math.ceil((1.0 - delta) / beta)) + 1


@lru_cache(maxsize=2048)
def _ratio_table(beta, gamma, delta, size):
    """Ratios c_k / c_{k-1} (k = 1..size) as correctly rounded Python floats (entry 0 is c_0)."""
    return tuple(_dd_table(beta, gamma, delta, size)[0].tolist())


def _ratios(beta, gamma, delta, k_needed, acc):
    size = 64
    while size < k_needed:
        size *= 2
    size = min(size, acc.max_terms)
    return _ratio_table(float(beta), float(gamma), float(delta), size)


def _series_double(beta, gamma, delta, x, acc):
    """Return (sum, error_bound) or None if the double pass cannot finish."""
    c0 = float(special.rgamma(gamma))
    if c0 == 0.0 or not math.isfinite(c0):
        return None
    k_mono = _monotone_from(beta, delta)
    ratios = _ratios(beta, gamma, delta, 64, acc)
    terms = [c0]
    running = c0
    abs_sum = abs(c0)
    weighted = 3.0 * abs(c0)
    term = c0
    k = 1
    while True:
        if k >= len(ratios):
            if len(ratios) - 1 >= acc.max_terms:
                raise ConvergenceError(
                    f"Mittag-Leffler series did not converge in {acc.max_terms} terms"
                )
            ratios = _ratios(beta, gamma, delta, 2 * (len(ratios) - 1), acc)
            continue
        term = term * x * ratios[k]
        if not math.isfinite(term):
            return None
        terms.append(term)
        running += term
        abs_sum += abs(term)
        weighted += (2 * k + 3) * abs(term)
        if k >= k_mono and k + 1 < len(ratios):
            rho = abs(x * ratios[k + 1])
            tail = abs(term) * rho / (1.0 - rho) if rho < 1.0 else math.inf
            if tail <= 0.02 * acc.rel_tol * abs(running) or tail <= _U * _U * abs_sum:
                try:
                    s = math.fsum(terms)
                except OverflowError:
                    return None
                if tail <= 0.01 * acc.rel_tol * abs(s) or tail <= _U * _U * abs_sum:
                    return s, weighted * _U + tail, abs_sum
        k += 1


_fixed_cache: dict = {}
_fixed_lock = threading.Lock()


def _fixed_table(beta, gamma, delta, bits, size):
    """round(c_0 * 2^bits) followed by round(ratio_k * 2^bits), k = 1..size-1.

    One master table per parameter triple is kept at the highest precision
    requested so far; lower precisions are obtained by rounding shifts.
    """
    key = (beta, gamma, delta)
    with _fixed_lock:
        entry = _fixed_cache.get(key)
        if entry is None or entry["bits"] < bits or len(entry["master"]) < size:
            top = max(bits, entry["bits"] if entry else 0)
            n = max(size, len(entry["master"]) if entry else 0)
            ctx = mpmath.MPContext()
            ctx.prec = top + 64
            b, g, d = ctx.mpf(beta), ctx.mpf(gamma), ctx.mpf(delta)
            scale = ctx.ldexp(1, top)
            rg_prev = ctx.rgamma(g)
            master = [int(ctx.nint(rg_prev * scale))]
            for k in range(1, n):
                rg = ctx.rgamma(k * b + g)
                master.append(int(ctx.nint((d + k - 1) / k * rg / rg_prev * scale)))
                rg_prev = rg
            entry = _fixed_cache[key] = {"bits": top, "master": master, "views": {}}
        views = entry["views"]
        view = views.get(bits)
        if view is None or len(view) < size:
            shift = entry["bits"] - bits
            if shift == 0:
                view = entry["master"]
            else:
                half = 1 << (shift - 1)
                view = [(v + half) >> shift for v in entry["master"]]
            views[bits] = view
        return view


def _series_fixed(beta, gamma, delta, x, acc, bits):
    """Series summed in fixed point with ``bits`` fraction bits on Python integers.

    Term k is formed from term k-1 by exact multiplication with the mantissa
    of x and the scaled ratio, then truncated; an integer error bound follows
    every truncation through the recursion. Returns (value, error / |value|),
    the second entry being inf when the value is zero.
    """
    frac, ex = math.frexp(x)
    mant = int(math.ldexp(frac, 53))
    ex -= 53
    am = abs(mant)
    inv_tol = math.ceil(1.0 / acc.rel_tol)
    k_mono = _monotone_from(beta, delta)
    table = _fixed_table(beta, gamma, delta, bits, 64)
    term = table[0]
    total = term
    err = 1  # units of 2^-bits
    err_sum = err

    def shift(v):
        return v << ex if ex >= 0 else v >> -ex

    k = 1
    while k <= acc.max_terms:
        if k + 1 >= len(table):
            table = _fixed_table(beta, gamma, delta, bits, 2 * len(table))
        ratio = table[k]
        prod = shift(term * mant)
        term = (prod * ratio) >> bits
        err = ((shift(err * am) + 1) * (ratio + 1) >> bits) + (abs(prod) >> (bits + 1)) + 2
        err_sum += err
        total += term
        if k >= k_mono:
            # tail bound |t_k| rho / (1 - rho), rho = |x| ratio_{k+1} = num / den
            num = am * table[k + 1]
            den = 1 << (bits - ex) if ex < 0 else (1 << bits)
            if ex > 0:
                num <<= ex
            if num < den:
                tail = abs(term) * num // (den - num) + 1
                # stop once the tail is negligible, or below the resolution so
                # that only more bits can help
                if tail * 100 * inv_tol <= abs(total) or tail <= 2:
                    err_sum += tail
                    if total == 0:
                        return 0.0, math.inf
                    try:
                        value = total / (1 << bits)
                    except OverflowError as exc:
                        raise ConvergenceError("Mittag-Leffler value exceeds double range") from exc
                    return value, err_sum / abs(total)
        k += 1
    raise ConvergenceError(f"Mittag-Leffler series did not converge in {acc.max_terms} terms")


def _log_term_peak(beta, gamma, delta, x, acc):
    """Natural log of the largest |term| and the number of terms needed.

    Raises ConvergenceError when the series cannot be summed within
    ``acc.max_terms`` terms or the precision cap.
    """
    # terms peak near k = |x|^(1/beta) / beta; look a few times beyond that first
    guess = abs(x) ** (1.0 / beta) / beta
    for n in (min(acc.max_terms, int(4 * guess + 256)), acc.max_terms):
        k = np.arange(n + 1, dtype=float)
        logt = (
            special.gammaln(delta + k) - special.gammaln(delta) - special.gammaln(k + 1)
            - special.gammaln(k * beta + gamma) + k * math.log(abs(x))
        )
        peak = float(logt.max())
        # for negative x the sum can be as small as exp(-peak)
        floor = min(-peak, 0.0) + math.log(acc.rel_tol) - 10.0
        after = np.flatnonzero((logt < floor) & (k > logt.argmax()))
        if after.size:
            return peak, int(after[0])
    raise ConvergenceError(
        f"Mittag-Leffler series needs more than {acc.max_terms} terms at x = {x:g}"
    )


def _ml_fixed(beta, gamma, delta, x, acc):
    peak, _ = _log_term_peak(beta, gamma, delta, x, acc)
    # room for cancellation down from exp(peak) to exp(-peak), and for a sum
    # that is itself far below 1 when every term is
    bits = int(64 + (2 * max(peak, 0.0) + max(-peak, 0.0)) / math.log(2) - math.log2(acc.rel_tol))
    while True:
        bits = -(-bits // 256) * 256
        if bits > _MAX_PREC:
            raise ConvergenceError("Mittag-Leffler series: cancellation exceeds the precision cap")
        s, rel_err = _series_fixed(beta, gamma, delta, x, acc, bits)
        if rel_err <= 0.5 * acc.rel_tol:
            return s
        if not math.isfinite(rel_err):
            bits *= 2
        else:
            bits += max(int(math.log2(rel_err) - math.log2(0.25 * acc.rel_tol)), 64)


def ml_three(beta, gamma, delta, x, acc: MlAccuracy = DEFAULT_ACCURACY) -> float:
    """Three-parameter (Prabhakar) Mittag-Leffler function E^delta_{beta,gamma}(x).

    Relative error is held below ``acc.rel_tol``. Raises ConvergenceError for
    ``|x| > acc.arg_magnitude_cap``.
    """
    beta, gamma, delta, x = float(beta), float(gamma), float(delta), float(x)
    _check_args(beta, gamma, delta, acc)
    _check_x(x, acc)
    if x == 0.0:
        return float(special.rgamma(gamma))
    res = _series_double(beta, gamma, delta, x, acc)
    hint = None
    if res is not None:
        s, err, hint = res
        if s != 0.0 and err <= 0.5 * acc.rel_tol * abs(s):
            return s
    return _ml_fixed(beta, gamma, delta, x, acc)


@lru_cache(maxsize=512)
def _dd_table(beta, gamma, delta, size):
    """c_0 and the ratios c_k / c_{k-1} as double-double (hi, lo) arrays."""
    ctx = mpmath.MPContext()
    ctx.dps = 40
    b, g, d = ctx.mpf(beta), ctx.mpf(gamma), ctx.mpf(delta)
    hi = np.empty(size + 1)
    lo = np.empty(size + 1)
    vals = [ctx.rgamma(g)]
    rg_prev = vals[0]
    for k in range(1, size + 1):
        rg = ctx.rgamma(k * b + g)
        vals.append((d + k - 1) / k * rg / rg_prev)
        rg_prev = rg
    for k, v in enumerate(vals):
        hi[k] = float(v)
        lo[k] = float(v - hi[k])
    return hi, lo


_SPLIT = 134217729.0  # 2^27 + 1


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(a):
    c = _SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _dd_mul(ah, al, bh, bl):
    p, e = _two_prod(ah, bh)
    e = e + (ah * bl + al * bh)
    return _two_sum(p, e)


def _dd_add(ah, al, bh, bl):
    s, e = _two_sum(ah, bh)
    e = e + (al + bl)
    return _two_sum(s, e)


def _series_dd(beta, gamma, delta, xs, acc):
    """Double-double summation of the series for each x in ``xs``.

    Returns (value, ok) where ok marks entries whose error bound meets
    ``acc.rel_tol``; the rest need higher precision.
    """
    k_mono = _monotone_from(beta, delta)
    size = 64
    hi, lo = _dd_table(beta, gamma, delta, size)
    th = np.full(xs.shape, hi[0])
    tl = np.full(xs.shape, lo[0])
    sh, sl = th.copy(), tl.copy()
    abs_sum = np.abs(th)
    weighted = 3.0 * abs_sum
    done = xs == 0.0
    tail = np.zeros(xs.shape)
    k = 1
    with np.errstate(over="ignore", invalid="ignore"):
        while not done.all():
            if k + 1 >= size:
                if size >= acc.max_terms:
                    raise ConvergenceError(
                        f"Mittag-Leffler series did not converge in {acc.max_terms} terms"
                    )
                size = min(2 * size, acc.max_terms)
                hi, lo = _dd_table(beta, gamma, delta, size)
                continue
            p, e = _two_prod(th, xs)
            th, tl = _two_sum(p, e + tl * xs)
            th, tl = _dd_mul(th, tl, hi[k], lo[k])
            sh, sl = _dd_add(sh, sl, th, tl)
            at = np.abs(th)
            abs_sum += at
            weighted += (2 * k + 3) * at
            if k >= k_mono:
                rho = np.abs(xs * hi[k + 1])
                tb = np.where(rho < 1, at * rho / (1 - rho), np.inf)
                fin = (tb <= 0.01 * acc.rel_tol * np.abs(sh)) | (tb <= _U**4 * abs_sum)
                newly = fin & ~done
                tail[newly] = tb[newly]
                done |= fin
                done |= ~np.isfinite(sh)
            k += 1
    err = 4.0 * weighted * _U * _U + tail
    ok = np.isfinite(sh) & (sh != 0) & (err <= 0.5 * acc.rel_tol * np.abs(sh))
    return sh + sl, ok


def ml_three_array(beta, gamma, delta, xs, acc: MlAccuracy = DEFAULT_ACCURACY) -> np.ndarray:
    """Vectorised :func:`ml_three` over an array of arguments.

    All arguments share one term recursion carried in double-double
    arithmetic (about 32 significant digits), which absorbs the cancellation
    of moderately large negative arguments; entries whose error bound still
    fails are recomputed with mpmath.
    """
    beta, gamma, delta = float(beta), float(gamma), float(delta)
    _check_args(beta, gamma, delta, acc)
    xs = np.asarray(xs, dtype=float)
    flat = xs.ravel()
    if flat.size == 0:
        return np.empty_like(xs)
    for x in (flat.min(), flat.max()):
        _check_x(float(x), acc)
    out, ok = _series_dd(beta, gamma, delta, flat, acc)
    zero = flat == 0.0
    out[zero] = float(special.rgamma(gamma))
    ok |= zero
    for i in np.flatnonzero(~ok):
        out[i] = ml_three(beta, gamma, delta, float(flat[i]), acc)
    return out.reshape(xs.shape)


def ml_derivative(beta, gamma, n: int, x, acc: MlAccuracy = DEFAULT_ACCURACY) -> float:
    """n-th derivative of the two-parameter function E_{beta,gamma} at x."""
    if int(n) != n or n < 0:
        raise DomainError(f"derivative order must be a non-negative integer, got {n}")
    n = int(n)
    return math.factorial(n) * ml_three(beta, n * beta + gamma, n + 1, x, acc)


def beta_function(a, b) -> float:
    return float(special.beta(a, b))


def incomplete_beta(a, b, x) -> float:
    """Unregularised incomplete beta integral, int_0^x u^(a-1) (1-u)^(b-1) du."""
    a, b, x = float(a), float(b), float(x)
    if not (a > 0 and b > 0 and math.isfinite(a) and math.isfinite(b)):
        raise DomainError(f"a and b must be positive, got a={a}, b={b}")
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x must lie in [0, 1], got {x}")
    if x == 1.0:
        return beta_function(a, b)
    return float(special.betainc(a, b, x) * special.beta(a, b))
