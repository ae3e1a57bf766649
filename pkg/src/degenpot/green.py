"""Green's function of the mixed boundary value problem.

BEM route: the regular part is a double-layer potential whose density
solves the second-kind equation with the fundamental solution as data, or
equivalently a simple-layer potential with the adjoint density; both
densities come from one LU factorization.  Closed route: on a hemisphere
the Green's function is a Kelvin-image difference with the reflection
exponent 2 alpha + m - 2, fixed by the on-sphere distance identities
r(x, a^2 xi / R^2) = (a/R) r(x, xi) (and the same for the reflected
distance), under which the hypergeometric argument is invariant.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import backend
from .bie import DiscreteOperator, SecondKindSolver, assemble
from .errors import NearBoundaryPoleWarning
from .kernel import Params, fundamental_solution, pair_geometry
from .potentials import double_layer, simple_layer
from .specfun import DEFAULT_CONTROL, SeriesControl
from .surface import SurfaceMesh

#: Relative residual bound on the density solves (GreenParts invariant).
DENSITY_RESIDUAL = 1e-10


@dataclass(frozen=True)
class GreenParts:
    """Pole plus the two densities representing the regular part: mu for
    the double-layer form, rho for the simple-layer form (rho is also the
    weighted normal derivative of the Green's function on the surface)."""

    pole: np.ndarray
    mu: np.ndarray
    rho: np.ndarray

    def __post_init__(self):
        self.pole.setflags(write=False)
        self.mu.setflags(write=False)
        self.rho.setflags(write=False)


def _check_pole(mesh: SurfaceMesh, pole: np.ndarray) -> None:
    if pole[0] <= 0.0:
        raise ValueError("pole must lie strictly inside the half-space (x1 > 0)")
    d2 = np.einsum("ki,ki->k", mesh.nodes - pole, mesh.nodes - pole)
    near = int(np.argmin(d2))
    dist = np.sqrt(d2[near])
    spacing = np.sqrt(mesh.weights[near])
    if dist < 2.0 * spacing:
        warnings.warn(
            f"pole {dist:.3e} from the surface (local spacing {spacing:.3e}); "
            "density resolution degrades for near-boundary poles",
            NearBoundaryPoleWarning,
            stacklevel=3,
        )


def green_densities(
    mesh: SurfaceMesh,
    pole,
    prm: Params,
    solver: SecondKindSolver | None = None,
    op: DiscreteOperator | None = None,
    ctl: SeriesControl = DEFAULT_CONTROL,
) -> GreenParts:
    """Solve the two second-kind systems defining the regular part.

    mu solves (I - 2K) mu = 2 q(., pole); rho solves the adjoint system
    with the weighted normal-derivative data 2 x1^(2a) dq/dn(., pole).
    A supplied solver (factorization of I - 2K) is reused for both.
    """
    pole = np.asarray(pole, dtype=float)
    _check_pole(mesh, pole)
    if solver is None:
        solver = SecondKindSolver(op if op is not None else assemble(mesh, prm, ctl), 2.0)
    rhs_mu = 2.0 * backend.q1_cross(mesh.nodes, pole[None, :], prm, ctl)[:, 0]
    rhs_rho = 2.0 * backend.k1_cross(
        mesh.nodes, mesh.normals, mesh.x1w, pole[None, :], prm, ctl
    )[:, 0]
    mu = solver.solve(rhs_mu)
    rho = solver.solve_adjoint(rhs_rho)
    return GreenParts(pole=pole.copy(), mu=mu, rho=rho)


def green_regular_part(
    parts: GreenParts,
    mesh: SurfaceMesh,
    x,
    prm: Params,
    via: str = "simple",
    ctl: SeriesControl = DEFAULT_CONTROL,
) -> float:
    """Regular part of the Green's function at an interior point, through
    either the double-layer or the simple-layer representation."""
    if via == "double":
        return double_layer(mesh, parts.mu, x, prm, ctl)
    if via == "simple":
        return simple_layer(mesh, parts.rho, x, prm, ctl)
    raise ValueError(f"via must be 'double' or 'simple', got {via!r}")


def green_value(
    parts: GreenParts,
    mesh: SurfaceMesh,
    x,
    prm: Params,
    via: str = "simple",
    ctl: SeriesControl = DEFAULT_CONTROL,
) -> float:
    """Full Green's function q(x, pole) + regular part at an interior point."""
    return fundamental_solution(x, parts.pole, prm, ctl) + green_regular_part(
        parts, mesh, x, prm, via, ctl
    )


def _image(xi: np.ndarray, a: float) -> tuple[np.ndarray, float]:
    r2 = float(xi @ xi)
    if r2 == 0.0:
        raise ValueError("image pole undefined for a pole at the origin")
    return (a * a / r2) * xi, np.sqrt(r2)


def reflection_factor(big_r: float, a: float, prm: Params) -> float:
    """Kelvin-image strength (a/R)^(2 alpha + m - 2)."""
    return (a / big_r) ** (2.0 * prm.alpha + prm.m - 2.0)


def hemisphere_green(
    x, xi, a: float, prm: Params, ctl: SeriesControl = DEFAULT_CONTROL
) -> float:
    """Closed-form Green's function of the hemisphere of radius a:
    q(x, xi) - (a/R)^(2 alpha + m - 2) q(x, a^2 xi / R^2); vanishes for
    |x| = a and has zero first-derivative on the plane x1 = 0."""
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    img, big_r = _image(xi, a)
    return fundamental_solution(x, xi, prm, ctl) - reflection_factor(
        big_r, a, prm
    ) * fundamental_solution(x, img, prm, ctl)


def hemisphere_green_regular(
    x, xi, a: float, prm: Params, ctl: SeriesControl = DEFAULT_CONTROL
) -> float:
    """Regular (image) part of the hemisphere Green's function, the closed
    counterpart of green_regular_part."""
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    img, big_r = _image(xi, a)
    return -reflection_factor(big_r, a, prm) * fundamental_solution(x, img, prm, ctl)


def h1_correction(
    mesh: SurfaceMesh,
    parts: GreenParts,
    x,
    xi,
    a: float,
    prm: Params,
    ctl: SeriesControl = DEFAULT_CONTROL,
) -> float:
    """Difference between the domain Green's function and the hemisphere
    closed form, as a surface integral of the hemisphere kernel against
    the simple-layer density anchored at x (parts.pole must equal x)."""
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if not np.array_equal(parts.pole, x):
        raise ValueError("parts must be built with pole == x for the correction term")
    img, big_r = _image(xi, a)
    vals = backend.q1_cross(mesh.nodes, np.vstack([xi, img]), prm, ctl)
    g01 = vals[:, 0] - reflection_factor(big_r, a, prm) * vals[:, 1]
    return float(g01 @ (parts.rho * mesh.weights))
