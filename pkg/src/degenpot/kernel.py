"""Fundamental solutions of the degenerate operator and their kernels.

The operator is  sum_i u_{x_i x_i} + (2 alpha / x_1) u_{x_1}  on the
half-space x_1 > 0, with 0 < 2 alpha < 1 and spatial dimension m >= 3.
Everything here is a pure scalar function; the array backends in
``_pykern`` / ``_ckern`` mirror the same formulas for the hot paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import specfun
from .errors import CoincidentPointsError
from .specfun import DEFAULT_CONTROL, SeriesControl

Point = Sequence[float]


@dataclass(frozen=True)
class Params:
    """Operator parameters: spatial dimension m and singularity exponent alpha."""

    m: int
    alpha: float

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 3:
            raise ValueError(f"dimension m must be an integer >= 3, got {self.m}")
        if not 0.0 < 2.0 * self.alpha < 1.0:
            raise ValueError(f"alpha must satisfy 0 < 2*alpha < 1, got {self.alpha}")


@dataclass(frozen=True)
class PairGeometry:
    """Squared distance r2, squared reflected distance r12 and the
    hypergeometric argument zeta = 1 - r12/r2 = -4 x1 xi1 / r2."""

    r2: float
    r12: float
    zeta: float


def _as_point(x, m: int | None = None) -> np.ndarray:
    p = np.asarray(x, dtype=float)
    if p.ndim != 1 or p.size < 3:
        raise ValueError(f"point must be a flat vector of length >= 3, got shape {p.shape}")
    if m is not None and p.size != m:
        raise ValueError(f"point has length {p.size}, expected m = {m}")
    return p


def pair_geometry(x: Point, xi: Point) -> PairGeometry:
    """Distance invariants of a point pair (Eq. forms chosen to avoid
    cancellation: r12 = r2 + 4 x1 xi1 and zeta = -4 x1 xi1 / r2 exactly)."""
    xa = _as_point(x)
    xb = _as_point(xi, xa.size)
    d = xa - xb
    r2 = float(d @ d)
    if r2 == 0.0:
        raise CoincidentPointsError("pair geometry undefined for coincident points")
    cross = 4.0 * float(xa[0]) * float(xb[0])
    return PairGeometry(r2=r2, r12=r2 + cross, zeta=-cross / r2)


def normalization_constants(prm: Params) -> tuple[float, float]:
    """The two kernel normalization constants (even and odd solution)."""
    m, a = prm.m, prm.alpha
    k1 = (
        specfun.gamma(a)
        * specfun.gamma(a + (m - 2) / 2.0)
        / (4.0 ** (1.0 - a) * math.pi ** (m / 2.0) * specfun.gamma(2.0 * a))
    )
    k2 = (
        specfun.gamma(1.0 - a)
        * specfun.gamma(m / 2.0 - a)
        / (4.0**a * math.pi ** (m / 2.0) * specfun.gamma(2.0 - 2.0 * a))
    )
    return k1, k2


def fundamental_solution(
    x: Point, xi: Point, prm: Params, ctl: SeriesControl = DEFAULT_CONTROL
) -> float:
    """First fundamental solution (flux-free on the degeneration plane).

    Production path is the transformed representation
    k1 r^(2-m) r1^(-2 alpha) F(alpha-(m-2)/2, alpha; 2 alpha; 1 - r2/r12)
    whose argument lies in [0, 1) for points in the closed half-space; the
    series converges up to the argument's supremum because the parametric
    excess is (m-2)/2 > 0.  For x1*xi1 < 0 (boundary finite-difference
    probes) the raw form with argument zeta in (0, 1) is used instead.
    """
    m, a = prm.m, prm.alpha
    k1, _ = normalization_constants(prm)
    g = pair_geometry(x, xi)
    if g.r12 >= g.r2:  # x1*xi1 >= 0: transformed representation
        w = 1.0 - g.r2 / g.r12 if g.r12 > 0.0 else 0.0
        f = specfun.hyp2f1_unit_interval(a - (m - 2) / 2.0, a, 2.0 * a, w, ctl)
        return k1 * g.r2 ** (-(m - 2) / 2.0) * g.r12 ** (-a) * f
    f = specfun.hyp2f1_unit_interval(a + (m - 2) / 2.0, a, 2.0 * a, g.zeta, ctl)
    return k1 * g.r2 ** (-a - (m - 2) / 2.0) * f


def fundamental_solution_odd(
    x: Point, xi: Point, prm: Params, ctl: SeriesControl = DEFAULT_CONTROL
) -> float:
    """Second fundamental solution; vanishes on the degeneration plane x1 = 0."""
    m, a = prm.m, prm.alpha
    _, k2 = normalization_constants(prm)
    xa = _as_point(x)
    xb = _as_point(xi, xa.size)
    if xa[0] < 0.0 or xb[0] < 0.0:
        raise ValueError("odd solution requires both points in the closed half-space")
    g = pair_geometry(xa, xb)
    weight = xa[0] ** (1.0 - 2.0 * a) * xb[0] ** (1.0 - 2.0 * a)
    if weight == 0.0:
        return 0.0
    # Pfaff-transformed form, argument w = 1 - r2/r12 in [0, 1).
    w = 1.0 - g.r2 / g.r12
    f = specfun.hyp2f1_unit_interval(2.0 - a - m / 2.0, 1.0 - a, 2.0 - 2.0 * a, w, ctl)
    f *= (g.r2 / g.r12) ** (1.0 - a)
    return k2 * g.r2 ** (a - m / 2.0) * weight * f


def grad_fundamental_solution(
    xi: Point, x: Point, prm: Params, ctl: SeriesControl = DEFAULT_CONTROL
) -> np.ndarray:
    """Gradient of the first fundamental solution in its first argument.

    First component carries the extra degeneration term proportional to the
    second point's x1; components i >= 2 are radial.  Both hypergeometric
    factors are evaluated through their Pfaff transforms at the common
    argument 1 - r2/r12.
    """
    m, a = prm.m, prm.alpha
    k1, _ = normalization_constants(prm)
    pa = _as_point(xi)
    pb = _as_point(x, pa.size)
    if pa[0] < 0.0 or pb[0] < 0.0:
        raise ValueError("gradient requires both points in the closed half-space")
    g = pair_geometry(pa, pb)
    w = 1.0 - g.r2 / g.r12
    ratio = g.r2 / g.r12
    f1 = ratio**a * specfun.hyp2f1_unit_interval(a - m / 2.0, a, 2.0 * a, w, ctl)
    f2 = ratio ** (1.0 + a) * specfun.hyp2f1_unit_interval(
        a - (m - 2) / 2.0, 1.0 + a, 1.0 + 2.0 * a, w, ctl
    )
    pref = k1 * (2.0 * a + m - 2.0) * g.r2 ** (-a - m / 2.0)
    grad = -pref * f1 * (pa - pb)
    grad[0] -= pref * pb[0] * f2
    return grad


def normal_derivative(
    xi: Point,
    normal: Point,
    x: Point,
    prm: Params,
    ctl: SeriesControl = DEFAULT_CONTROL,
) -> float:
    """Directional derivative of the first fundamental solution along the
    given unit vector, taken in the first argument slot."""
    n = _as_point(normal)
    return float(n @ grad_fundamental_solution(xi, x, prm, ctl))


def layer_kernel(
    s: Point,
    normal_s: Point,
    t: Point,
    prm: Params,
    ctl: SeriesControl = DEFAULT_CONTROL,
) -> float:
    """Weighted double-layer kernel: s1^(2 alpha) times the normal derivative
    of the fundamental solution at the surface point s, pole t."""
    s = _as_point(s)
    weight = s[0] ** (2.0 * prm.alpha)
    if weight == 0.0:
        return 0.0
    return weight * normal_derivative(s, normal_s, t, prm, ctl)


def kernel_bound(x: Point, xi: Point, prm: Params) -> float:
    """Pointwise majorant k1 * r1^(-2 alpha) / r^(m-2) of the first
    fundamental solution."""
    k1, _ = normalization_constants(prm)
    g = pair_geometry(x, xi)
    return k1 * g.r12 ** (-prm.alpha) * g.r2 ** (-(prm.m - 2) / 2.0)


def operator_residual(
    u: Callable[[np.ndarray], float],
    x: Point,
    prm: Params,
    h: float = 1e-3,
) -> float:
    """Normalized central-difference residual of the operator applied to u.

    The raw second-order stencil residual is divided by the sum of the
    absolute stencil terms, the natural scale of a cancellation-heavy
    evaluation; an exact solution gives values at rounding level while the
    truncation error stays well below 1e-4 for probes a few stencil widths
    away from singular points.  The scale is floored at |u(x)| (unit domain
    length) so that solutions whose stencil terms are pure rounding noise,
    e.g. products of coordinates, do not divide noise by noise.
    """
    p = _as_point(x)
    m = p.size
    u0 = u(p)
    terms = []
    for i in range(m):
        e = np.zeros(m)
        e[i] = h
        terms.append((u(p + e) - 2.0 * u0 + u(p - e)) / (h * h))
    e1 = np.zeros(m)
    e1[0] = h
    first = (u(p + e1) - u(p - e1)) / (2.0 * h)
    terms.append(2.0 * prm.alpha / p[0] * first)
    residual = math.fsum(terms)
    scale = max(math.fsum(abs(t) for t in terms), abs(u0))
    if scale == 0.0:
        return 0.0
    return abs(residual) / scale
