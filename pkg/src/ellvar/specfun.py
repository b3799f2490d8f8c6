"""Scalar special functions and semi-infinite quadrature.

The quantile and tail machinery upstream needs four things: log-gamma,
the beta function, the regularized incomplete beta, and the Gauss
hypergeometric function on the negative real axis.  Everything here is
scalar float-in/float-out; vectorization happens at the call sites that
need it.

``hyp2f1`` only supports z <= 0.  That is the branch the tail formulas
actually evaluate, and it is reachable from a single Pfaff transformation
into the unit disk, which keeps the series analysis short.  Arguments far
out on the negative axis map close to the disk boundary, so the series is
summed in vectorized blocks with a geometric tail estimate rather than
term by term.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .errors import DomainError, NumericalError, QuadratureError

__all__ = [
    "log_gamma",
    "beta",
    "reg_inc_beta",
    "hyp2f1",
    "hyp2f1_log",
    "QuadratureSpec",
    "DEFAULT_QUADRATURE",
    "integrate_semi_infinite",
]

_SERIES_TOL = 1e-13
_SERIES_BLOCK = 65536
_MAX_SERIES_TERMS = 8_000_000


def log_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0."""
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"log_gamma requires finite x > 0, got {x!r}")
    return math.lgamma(x)


def beta(a: float, b: float) -> float:
    """Euler beta function B(a, b) for a, b > 0, evaluated in log space."""
    return math.exp(log_gamma(a) + log_gamma(b) - log_gamma(a + b))


def _inc_beta_cf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta, modified Lentz scheme.

    Converges quickly only for x < (a + 1) / (a + b + 2); the caller is
    responsible for switching to the symmetric tail outside that region.
    """
    max_iter = 600
    eps = 1e-16
    tiny = 1e-300

    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        # even step
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        # odd step
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise NumericalError(
        "incomplete beta continued fraction did not converge",
        a=a,
        b=b,
        x=x,
        iterations=max_iter,
        partial=h,
    )


def reg_inc_beta(x: float, a: float, b: float) -> float:
    """Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1]."""
    x, a, b = float(x), float(a), float(b)
    if not (math.isfinite(a) and a > 0.0 and math.isfinite(b) and b > 0.0):
        raise DomainError(f"reg_inc_beta requires a, b > 0, got a={a!r}, b={b!r}")
    if not (math.isfinite(x) and 0.0 <= x <= 1.0):
        raise DomainError(f"reg_inc_beta requires x in [0, 1], got {x!r}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        a * math.log(x)
        + b * math.log1p(-x)
        - (log_gamma(a) + log_gamma(b) - log_gamma(a + b))
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _inc_beta_cf(a, b, x) / a
    return 1.0 - front * _inc_beta_cf(b, a, 1.0 - x) / b


def _series_2f1(a: float, b: float, c: float, z: float) -> float:
    """Sum the Gauss series at 0 <= z < 1 in vectorized blocks.

    Stops when a geometric bound on the remaining tail drops below the
    relative tolerance.  The callers always land here with z in [0, 1);
    z very close to 1 (slow decay) is where the block structure pays off.
    """
    total = 1.0
    term = 1.0
    k = 0
    while k < _MAX_SERIES_TERMS:
        n = min(_SERIES_BLOCK, _MAX_SERIES_TERMS - k)
        kk = k + np.arange(n, dtype=np.float64)
        ratios = (a + kk) * (b + kk) / ((c + kk) * (kk + 1.0)) * z
        terms = term * np.cumprod(ratios)
        total += float(terms.sum())
        last = float(terms[-1])
        k += n
        if last == 0.0:
            return total
        # geometric tail estimate from the last observed ratio
        r = abs(float(ratios[-1]))
        if r < 1.0:
            tail_bound = abs(last) * r / (1.0 - r)
            if tail_bound <= _SERIES_TOL * abs(total):
                return total
        term = last
    raise NumericalError(
        "hypergeometric series did not converge within the term budget",
        a=a,
        b=b,
        c=c,
        z=z,
        terms=_MAX_SERIES_TERMS,
        partial_sum=total,
    )


def _hyp2f1_parts(a: float, b: float, c: float, z: float) -> tuple[float, float]:
    """Return (exponent, series) with 2F1(a,b;c;z) = (1-z)^exponent * series.

    Valid for z <= 0 only.  The Pfaff transformation maps the argument to
    z/(z-1) in [0, 1); of its two variants we keep the one whose series
    terms decay like k^(-|a-b|-1), i.e. we transform away the larger of
    a and b.
    """
    for val, name in ((a, "a"), (b, "b"), (c, "c"), (z, "z")):
        if not math.isfinite(val):
            raise DomainError(f"hyp2f1 parameter {name} must be finite, got {val!r}")
    if z > 0.0:
        raise DomainError(f"hyp2f1 is only implemented for z <= 0, got z={z!r}")
    if c <= 0.0 and c == math.floor(c):
        raise DomainError(f"hyp2f1 undefined for non-positive integer c={c!r}")
    if z == 0.0:
        return 0.0, 1.0
    zeta = z / (z - 1.0)
    if a <= b:
        series = _series_2f1(a, c - b, c, zeta)
        return -a, series
    series = _series_2f1(c - a, b, c, zeta)
    return -b, series


def hyp2f1(a: float, b: float, c: float, z: float) -> float:
    """Gauss hypergeometric 2F1(a, b; c; z) for real z <= 0."""
    a, b, c, z = float(a), float(b), float(c), float(z)
    exponent, series = _hyp2f1_parts(a, b, c, z)
    return (1.0 - z) ** exponent * series


def hyp2f1_log(a: float, b: float, c: float, z: float) -> float:
    """ln 2F1(a, b; c; z) for z <= 0 when the value is positive.

    Needed where the hypergeometric factor pairs with a prefactor that
    overflows on its own; composing in log space keeps the product finite.
    """
    a, b, c, z = float(a), float(b), float(c), float(z)
    exponent, series = _hyp2f1_parts(a, b, c, z)
    if series <= 0.0:
        raise DomainError(
            f"hyp2f1({a}, {b}; {c}; {z}) is not positive; no real logarithm"
        )
    return exponent * math.log1p(-z) + math.log(series)


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerance and budget settings for adaptive quadrature."""

    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_subdivisions: int = 200

    def __post_init__(self):
        if not (math.isfinite(self.rel_tol) and self.rel_tol > 0.0):
            raise DomainError(f"rel_tol must be positive, got {self.rel_tol!r}")
        if not (math.isfinite(self.abs_tol) and self.abs_tol > 0.0):
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol!r}")
        if self.max_subdivisions < 10:
            raise DomainError(
                f"max_subdivisions must be at least 10, got {self.max_subdivisions!r}"
            )


DEFAULT_QUADRATURE = QuadratureSpec()


def integrate_semi_infinite(
    f: Callable[[float], float],
    lower: float,
    spec: QuadratureSpec | None = None,
) -> float:
    """Integrate f over [lower, infinity) to the requested tolerance.

    QUADPACK's QAGI routine does the work: it compactifies the interval
    with a rational change of variables and refines panels adaptively.
    Non-convergence within the subdivision budget raises QuadratureError
    carrying the achieved error estimate.
    """
    if spec is None:
        spec = DEFAULT_QUADRATURE
    lower = float(lower)
    if not math.isfinite(lower):
        raise DomainError(f"lower limit must be finite, got {lower!r}")
    out = integrate.quad(
        f,
        lower,
        np.inf,
        epsabs=spec.abs_tol,
        epsrel=spec.rel_tol,
        limit=spec.max_subdivisions,
        full_output=True,
    )
    value, abserr = out[0], out[1]
    if len(out) > 3 or not math.isfinite(value):
        raise QuadratureError(
            "semi-infinite quadrature did not converge: " + str(out[3] if len(out) > 3 else value),
            value=value,
            achieved_abs_error=abserr,
            lower=lower,
            rel_tol=spec.rel_tol,
            abs_tol=spec.abs_tol,
        )
    return value
