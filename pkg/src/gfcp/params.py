"""Process parameters and the special-case factories."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .errors import TruncationError, ValidationError

__all__ = [
    "GfcpParams",
    "SpecialCase",
    "SPECIAL_CASE_TAGS",
    "validate",
    "from_special_case",
    "jump_distribution",
    "params_from_json",
    "DEFAULT_TRUNCATION_CAP",
]

SPECIAL_CASE_TAGS = ("TFPP", "PPoK", "PAPoK", "PAP", "NBP", "CPP")
DEFAULT_TRUNCATION_CAP = 10_000


@dataclass(frozen=True)
class GfcpParams:
    """Fractional index ``alpha`` and jump rates ``lambdas[j-1]`` for jump size j.

    The constants used throughout the moment formulas are precomputed:
    ``Lambda`` (total rate), ``mean_rate`` = sum j*lambda_j,
    ``second_rate`` = sum j^2*lambda_j, and ``S``, ``R``, ``T`` with
    mean = S t^alpha and variance = R t^(2 alpha) + T t^alpha.
    """

    alpha: float
    lambdas: tuple[float, ...]
    discarded_mass: float = 0.0
    Lambda: float = field(init=False)
    mean_rate: float = field(init=False)
    second_rate: float = field(init=False)
    S: float = field(init=False)
    R: float = field(init=False)
    T: float = field(init=False)

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        j = np.arange(1, lam.size + 1)
        g1 = math.gamma(self.alpha + 1)
        m1 = math.fsum(j * lam)
        m2 = math.fsum(j * j * lam)
        set_ = object.__setattr__
        set_(self, "Lambda", math.fsum(lam))
        set_(self, "mean_rate", m1)
        set_(self, "second_rate", m2)
        set_(self, "S", m1 / g1)
        set_(self, "T", m2 / g1)
        if self.alpha == 1.0:
            set_(self, "R", 0.0)
        else:
            set_(self, "R", (2.0 / math.gamma(2 * self.alpha + 1) - 1.0 / g1**2) * m1 * m1)

    @property
    def k(self) -> int:
        return len(self.lambdas)

    @property
    def is_levy(self) -> bool:
        return self.alpha == 1.0

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"alpha": self.alpha, "lambdas": list(self.lambdas)}
        if self.discarded_mass:
            d["discarded_mass"] = self.discarded_mass
        return d

    def digest(self) -> str:
        """Short stable hash used to tag emitted results."""
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _finite(field_name, v):
    try:
        v = float(v)
    except (TypeError, ValueError):
        raise ValidationError(field_name, f"not a number: {v!r}") from None
    if not math.isfinite(v):
        raise ValidationError(field_name, f"must be finite, got {v}")
    return v


def _check_alpha(alpha):
    alpha = _finite("alpha", alpha)
    if not 0.0 < alpha <= 1.0:
        raise ValidationError("alpha", f"must lie in (0, 1], got {alpha}")
    return alpha


def validate(raw: Mapping[str, Any] | None = None, **kwargs) -> GfcpParams:
    """Build :class:`GfcpParams` from a mapping such as ``{"alpha": .5, "lambdas": [1, 2]}``.

    Rates may be zero (that jump size is simply absent) but their sum must be
    positive.
    """
    data = dict(raw or {}, **kwargs)
    if "special_case" in data:
        sc = data["special_case"]
        if not isinstance(sc, SpecialCase):
            sc = SpecialCase.from_dict(sc)
        return from_special_case(sc, data.get("alpha", 1.0))
    if "alpha" not in data:
        raise ValidationError("alpha", "missing")
    if "lambdas" not in data:
        raise ValidationError("lambdas", "missing")
    alpha = _check_alpha(data["alpha"])
    lams = data["lambdas"]
    if isinstance(lams, (str, bytes, Mapping)):
        raise ValidationError("lambdas", "must be a list of rates")
    try:
        lams = list(lams)
    except TypeError:
        raise ValidationError("lambdas", "must be a list of rates") from None
    if len(lams) == 0:
        raise ValidationError("lambdas", "must contain at least one rate")
    out = []
    for i, v in enumerate(lams):
        v = _finite(f"lambdas[{i}]", v)
        if v < 0:
            raise ValidationError(f"lambdas[{i}]", f"must be >= 0, got {v}")
        out.append(v)
    if not any(v > 0 for v in out):
        raise ValidationError("lambdas", "at least one rate must be positive")
    mass = _finite("discarded_mass", data.get("discarded_mass", 0.0))
    return GfcpParams(alpha, tuple(out), mass)


@dataclass(frozen=True)
class SpecialCase:
    """A named family from the literature mapped onto jump rates.

    ========  ==========================================  ===================
    tag       rates lambda_j                              used fields
    ========  ==========================================  ===================
    TFPP      [lam]                                       lam
    PPoK      lam for j = 1..k                            lam, k
    PAPoK     lam (1-rho) rho^(j-1) / (1 - rho^k)         lam, k, rho
    PAP       lam (1-rho) rho^(j-1), j >= 1               lam, rho
    NBP       (1-p)^j / j, j >= 1                         p
    CPP       beta_(j-1) - beta_j, j >= 1                 betas, beta_ratio
    ========  ==========================================  ===================

    The infinite families are truncated at the smallest k whose discarded
    rate mass is at most ``tail_eps`` times the full total rate. For CPP the
    listed ``betas`` are continued geometrically with ``beta_ratio``
    (defaults to the ratio of the last two entries).
    """

    tag: str
    lam: float = 1.0
    k: int | None = None
    rho: float = 0.0
    p: float | None = None
    betas: tuple[float, ...] | None = None
    beta_ratio: float | None = None
    tail_eps: float = 1e-12

    def __post_init__(self):
        if self.tag not in SPECIAL_CASE_TAGS:
            raise ValidationError("tag", f"unknown special case {self.tag!r}; expected one of {SPECIAL_CASE_TAGS}")
        if not 0.0 < self.tail_eps < 1.0:
            raise ValidationError("tail_eps", f"must lie in (0, 1), got {self.tail_eps}")
        if self.tag in ("TFPP", "PPoK", "PAPoK", "PAP"):
            lam = _finite("lam", self.lam)
            if lam <= 0:
                raise ValidationError("lam", f"must be > 0, got {lam}")
        if self.tag in ("PPoK", "PAPoK"):
            if self.k is None or int(self.k) != self.k or self.k < 1:
                raise ValidationError("k", f"must be a positive integer, got {self.k}")
        if self.tag in ("PAPoK", "PAP"):
            rho = _finite("rho", self.rho)
            if not 0.0 <= rho < 1.0:
                raise ValidationError("rho", f"must lie in [0, 1), got {rho}")
        if self.tag == "NBP":
            if self.p is None or not 0.0 < _finite("p", self.p) < 1.0:
                raise ValidationError("p", f"must lie in (0, 1), got {self.p}")
        if self.tag == "CPP":
            self._check_betas()

    def _check_betas(self):
        b = self.betas
        if not b or len(b) < 1:
            raise ValidationError("betas", "CPP needs a non-empty beta sequence")
        vals = [_finite(f"betas[{i}]", v) for i, v in enumerate(b)]
        if any(v <= 0 for v in vals):
            raise ValidationError("betas", "entries must be positive")
        if any(b1 >= b0 for b0, b1 in zip(vals, vals[1:])):
            raise ValidationError("betas", "sequence must be strictly decreasing")
        q = self.cpp_ratio()
        if not 0.0 < q < 1.0:
            raise ValidationError("beta_ratio", f"limiting ratio must lie in (0, 1), got {q}")

    def cpp_ratio(self) -> float:
        if self.beta_ratio is not None:
            return _finite("beta_ratio", self.beta_ratio)
        b = self.betas or ()
        if len(b) < 2:
            raise ValidationError("beta_ratio", "needed when fewer than two betas are given")
        return float(b[-1]) / float(b[-2])

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> "SpecialCase":
        d = dict(d)
        if "tag" not in d:
            raise ValidationError("tag", "missing")
        if d.get("betas") is not None:
            d["betas"] = tuple(float(v) for v in d["betas"])
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ValidationError(sorted(extra)[0], "unknown special-case field")
        return cls(**d)


def _truncate(rate, tail_after, total, eps, cap):
    """Smallest k with tail_after(k) <= eps * total; returns (rates, tail)."""
    rates = []
    k = 0
    while True:
        k += 1
        if k > cap:
            raise TruncationError(
                f"truncation needs more than {cap} jump sizes for tail_eps={eps:g}"
            )
        rates.append(rate(k))
        tail = tail_after(k)
        if tail <= eps * total:
            return rates, tail


def _nbp_tail(q, k):
    # sum_{j>k} q^j / j, summed directly until the remainder is below 1 ulp
    s = 0.0
    j = k + 1
    term = q**j / j
    while term > 1e-18 * (s + term) and term > 0:
        s += term
        j += 1
        term = q**j / j
    return s


def from_special_case(sc: SpecialCase, alpha: float = 1.0, cap: int = DEFAULT_TRUNCATION_CAP) -> GfcpParams:
    alpha = _check_alpha(alpha)
    tag = sc.tag
    if tag == "TFPP":
        lams, tail = [sc.lam], 0.0
    elif tag == "PPoK":
        lams, tail = [sc.lam] * int(sc.k), 0.0
    elif tag == "PAPoK":
        k, rho = int(sc.k), sc.rho
        norm = (1.0 - rho) / (1.0 - rho**k)
        lams, tail = [sc.lam * norm * rho ** (j - 1) for j in range(1, k + 1)], 0.0
    elif tag == "PAP":
        lam, rho = sc.lam, sc.rho
        lams, tail = _truncate(
            lambda j: lam * (1 - rho) * rho ** (j - 1),
            lambda k: lam * rho**k,
            lam,
            sc.tail_eps,
            cap,
        )
    elif tag == "NBP":
        q = 1.0 - sc.p
        lams, tail = _truncate(
            lambda j: q**j / j,
            lambda k: _nbp_tail(q, k),
            math.log(1.0 / sc.p),
            sc.tail_eps,
            cap,
        )
    else:  # CPP
        given = [float(v) for v in sc.betas]
        q = sc.cpp_ratio()

        def beta_at(j):
            if j < len(given):
                return given[j]
            return given[-1] * q ** (j - len(given) + 1)

        lams, tail = _truncate(
            lambda j: beta_at(j - 1) - beta_at(j),
            beta_at,  # sum_{j>k} (beta_{j-1} - beta_j) telescopes to beta_k
            given[0],
            sc.tail_eps,
            cap,
        )
    return validate({"alpha": alpha, "lambdas": lams, "discarded_mass": tail})


def jump_distribution(p: GfcpParams) -> np.ndarray:
    """Law of a single jump size: Pr{X = j} = lambda_j / Lambda, j = 1..k.

    The rounding residual is pushed into the positive entries, largest first,
    so that the exactly rounded sum is one. Each step works at a finer ulp.
    """
    lam = np.asarray(p.lambdas, dtype=float)
    q = lam / p.Lambda
    for i in sorted(np.flatnonzero(q > 0), key=lambda j: -q[j]):
        resid = 1.0 - math.fsum(q)
        if resid == 0.0:
            break
        q[i] = max(q[i] + resid, 0.0)
    return q


def params_from_json(text_or_path: str) -> GfcpParams:
    """Parse inline JSON (starting with ``{``) or a path to a JSON file."""
    s = text_or_path.strip()
    if s.startswith("{"):
        try:
            data = json.loads(s)
        except json.JSONDecodeError as e:
            raise ValidationError("params", f"invalid JSON: {e}") from None
    else:
        try:
            with open(s, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as e:
            raise ValidationError("params", f"cannot read {s}: {e}") from None
        except json.JSONDecodeError as e:
            raise ValidationError("params", f"invalid JSON in {s}: {e}") from None
    if not isinstance(data, dict):
        raise ValidationError("params", "JSON must be an object")
    return validate(data)
