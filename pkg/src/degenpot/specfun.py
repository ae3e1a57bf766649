"""Gamma, Pochhammer and Gauss hypergeometric evaluation.

The kernels of this package only ever need the Gauss series on the real
interval z <= 0 (mapped into [0, 1) by the Pfaff transformation
F(a,b;c;z) = (1-z)^(-b) F(c-a,b;c;z/(z-1))) or directly on [0, 1].  Close
to z = 1 the raw series is impractically slow, so the evaluation switches
to the classical  z -> 1-z  connection formula whenever the parametric
excess c-a-b is positive and non-integer; accuracy and error behaviour of
the public contract are unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    GammaPoleError,
    HypergeometricConvergenceError,
    HypergeometricDivergenceError,
    HypergeometricParameterError,
)

# Argument above which the direct series hands over to the 1-z connection
# formula (both backends use the same constant).
UNIT_SWITCH = 0.875

_INT_EPS = 1e-9


@dataclass(frozen=True)
class SeriesControl:
    """Termination control for the Gauss series.

    tol is a relative tolerance on the last added term, max_terms a hard
    cap; exceeding the cap raises instead of silently truncating.
    """

    tol: float = 1e-14
    max_terms: int = 10000

    def __post_init__(self):
        if not self.tol > 0.0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_terms < 1:
            raise ValueError(f"max_terms must be >= 1, got {self.max_terms}")


DEFAULT_CONTROL = SeriesControl()


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0.5 and abs(x - round(x)) < _INT_EPS


def gamma(x: float) -> float:
    """Gamma function on the real line, poles excluded."""
    if _is_nonpositive_integer(x):
        raise GammaPoleError(f"gamma pole at x = {x}")
    return math.gamma(x)


def pochhammer(kappa: float, n: int) -> float:
    """Shifted factorial kappa (kappa+1) ... (kappa+n-1), with value 1 at n=0."""
    if n < 0:
        raise ValueError(f"pochhammer order must be non-negative, got {n}")
    out = 1.0
    for i in range(n):
        out *= kappa + i
    return out


def _series(a: float, b: float, c: float, z: float, ctl: SeriesControl) -> float:
    """Raw Gauss series; caller guarantees |z| < 1 (or polynomial case)."""
    term = 1.0
    total = 1.0
    small_streak = 0
    for n in range(ctl.max_terms):
        term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z
        total += term
        if term == 0.0:  # polynomial case: (a)_n or (b)_n hit zero
            return total
        if abs(term) <= ctl.tol * abs(total):
            small_streak += 1
            if small_streak >= 2:
                return total
        else:
            small_streak = 0
    raise HypergeometricConvergenceError(
        f"series for F({a},{b};{c};{z}) did not converge in {ctl.max_terms} terms"
    )


def _gauss_sum(a: float, b: float, c: float) -> float:
    """F(a,b;c;1) via the Gamma quotient; requires c-a-b > 0."""
    s = c - a - b
    if s <= 0.0:
        raise HypergeometricDivergenceError(
            f"F(a,b;c;1) diverges for c-a-b = {s} <= 0"
        )
    return gamma(c) * gamma(s) / (gamma(c - a) * gamma(c - b))


def connection_constants(a: float, b: float, c: float):
    """Prefactors of the z -> 1-z connection formula, or None when the
    parametric excess is integer (log case, not needed by the kernels)."""
    s = c - a - b
    if s <= 0.0 or abs(s - round(s)) < _INT_EPS:
        return None
    p = gamma(c) * gamma(s) / (gamma(c - a) * gamma(c - b))
    q = gamma(c) * gamma(-s) / (gamma(a) * gamma(b))
    return s, p, q


def hyp2f1_unit_interval(
    a: float, b: float, c: float, z: float, ctl: SeriesControl = DEFAULT_CONTROL
) -> float:
    """Gauss function for arguments in [0, 1); series with connection-formula
    hand-over close to 1.  Shared by the scalar kernels and both backends."""
    if z > UNIT_SWITCH:
        cc = connection_constants(a, b, c)
        if cc is not None:
            s, p, q = cc
            v = 1.0 - z
            return p * _series(a, b, 1.0 - s, v, ctl) + q * v**s * _series(
                c - a, c - b, 1.0 + s, v, ctl
            )
    return _series(a, b, c, z, ctl)


def gauss_2f1(
    a: float,
    b: float,
    c: float,
    z: float,
    ctl: SeriesControl = DEFAULT_CONTROL,
    route: str = "auto",
) -> float:
    """Gauss hypergeometric function F(a, b; c; z) on the real ranges the
    layer-potential kernels require.

    Supported arguments: z <= 0 (any magnitude), 0 <= z < 1, and z = 1 when
    c-a-b > 0.  route selects the evaluation path: "auto" maps negative
    arguments through the Pfaff transformation, "series" forces direct
    summation (|z| < 1 only), "pfaff" forces the transformation (z <= 0
    only).  The two explicit routes exist so tests can cross-check them.
    """
    if _is_nonpositive_integer(c):
        raise HypergeometricParameterError(f"lower parameter c = {c} is a pole")
    if z > 1.0:
        raise HypergeometricParameterError(f"argument z = {z} outside supported range")

    if route == "series":
        if abs(z) >= 1.0:
            raise HypergeometricParameterError(
                f"direct series requires |z| < 1, got z = {z}"
            )
        return _series(a, b, c, z, ctl)
    if route == "pfaff":
        if z > 0.0:
            raise HypergeometricParameterError(
                f"Pfaff route requires z <= 0, got z = {z}"
            )
        w = z / (z - 1.0) if z != 0.0 else 0.0
        return (1.0 - z) ** (-b) * hyp2f1_unit_interval(c - a, b, c, w, ctl)
    if route != "auto":
        raise ValueError(f"unknown route {route!r}")

    if z == 1.0:
        return _gauss_sum(a, b, c)
    if z < 0.0:
        w = z / (z - 1.0)
        return (1.0 - z) ** (-b) * hyp2f1_unit_interval(c - a, b, c, w, ctl)
    return hyp2f1_unit_interval(a, b, c, z, ctl)
