"""Solver for the mixed boundary value problem: Dirichlet data on the
curved surface, weighted flux  lim x1^(2a) du/dx1  on the flat base.

The solution representation integrates the boundary data against the
Green's function: the base term needs G at points of the plane x1 = 0
(fundamental solution plus simple-layer regular part, which is well
defined there), and the curved-surface term needs the weighted normal
derivative of G, which equals the adjoint density itself — an exact
identity of the discrete system, so no trace evaluation is required.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import backend
from .bie import DiscreteOperator, SecondKindSolver, assemble
from .errors import NearBoundaryPoleWarning
from .green import reflection_factor
from .kernel import (
    Params,
    fundamental_solution,
    grad_fundamental_solution,
    operator_residual,
)
from .specfun import DEFAULT_CONTROL, SeriesControl
from .surface import BaseDisk, SurfaceMesh, _graded_gauss, _azimuth


@dataclass(frozen=True)
class BoundaryData:
    """Dirichlet samples/callable phi on the curved surface and weighted
    flux samples/callable nu on the base region."""

    phi: Callable[[np.ndarray], float] | np.ndarray
    nu: Callable[[np.ndarray], float] | np.ndarray

    def sample_phi(self, mesh: SurfaceMesh) -> np.ndarray:
        return _sample(self.phi, mesh.nodes, "phi", mesh.n_nodes)

    def sample_nu(self, base: BaseDisk) -> np.ndarray:
        return _sample(self.nu, base.nodes, "nu", base.n_nodes)


def _sample(data, points, name, expected) -> np.ndarray:
    if callable(data):
        out = np.array([float(data(p)) for p in points])
    else:
        out = np.asarray(data, dtype=float)
        if out.shape != (expected,):
            raise ValueError(
                f"{name} samples have shape {out.shape}, expected ({expected},); "
                "samples must match quadrature nodes exactly"
            )
    if not np.isfinite(out).all():
        raise ValueError(f"{name} contains non-finite values")
    return out


@dataclass(frozen=True)
class ManufacturedSolution:
    """Exact solution used for end-to-end verification: the field, its
    gradient, and the weighted-flux limit on the base."""

    name: str
    u: Callable[[np.ndarray], float]
    grad_u: Callable[[np.ndarray], np.ndarray]
    nu: Callable[[np.ndarray], float]

    def boundary_data(self) -> BoundaryData:
        return BoundaryData(phi=self.u, nu=self.nu)


#: Probes and stencil width of the registration residual gate.
_GATE_PROBES = (
    (0.55, 0.12, -0.21),
    (0.72, -0.28, 0.18),
    (0.48, 0.33, 0.27),
    (0.85, -0.1, -0.3),
)
_GATE_H = 1e-4


def register_manufactured(
    prm: Params, gate: float = 1e-6, exterior_pole=(0.6, 1.9, 0.4)
) -> list[ManufacturedSolution]:
    """Catalog of exact solutions of the operator, each gated by a
    finite-difference residual check before being handed out."""
    if prm.m != 3:
        raise ValueError("manufactured catalog is fixed at m = 3")
    a = prm.alpha
    s = 1.0 - 2.0 * a
    pole = np.asarray(exterior_pole, dtype=float)

    def power_x1(p):
        return p[0] ** s

    def grad_power_x1(p):
        return np.array([s * p[0] ** (-2.0 * a), 0.0, 0.0])

    def power_x1_x2(p):
        return p[0] ** s * p[1]

    def grad_power_x1_x2(p):
        return np.array([s * p[0] ** (-2.0 * a) * p[1], p[0] ** s, 0.0])

    def fs_ext(p):
        return fundamental_solution(p, pole, prm)

    def grad_fs_ext(p):
        return grad_fundamental_solution(p, pole, prm)

    catalog = [
        ManufacturedSolution("one", lambda p: 1.0, lambda p: np.zeros(3), lambda b: 0.0),
        ManufacturedSolution("x2", lambda p: p[1], lambda p: np.array([0.0, 1.0, 0.0]), lambda b: 0.0),
        ManufacturedSolution("x3", lambda p: p[2], lambda p: np.array([0.0, 0.0, 1.0]), lambda b: 0.0),
        ManufacturedSolution(
            "x2_x3",
            lambda p: p[1] * p[2],
            lambda p: np.array([0.0, p[2], p[1]]),
            lambda b: 0.0,
        ),
        ManufacturedSolution(
            "x2sq_minus_x3sq",
            lambda p: p[1] ** 2 - p[2] ** 2,
            lambda p: np.array([0.0, 2.0 * p[1], -2.0 * p[2]]),
            lambda b: 0.0,
        ),
        ManufacturedSolution("x1_power", power_x1, grad_power_x1, lambda b: s),
        ManufacturedSolution("x1_power_x2", power_x1_x2, grad_power_x1_x2, lambda b: s * b[1]),
        ManufacturedSolution("fs_exterior_pole", fs_ext, grad_fs_ext, lambda b: 0.0),
    ]
    for ms in catalog:
        worst = max(
            operator_residual(ms.u, np.array(p), prm, h=_GATE_H) for p in _GATE_PROBES
        )
        if worst > gate:
            raise ValueError(
                f"manufactured solution {ms.name!r} failed the residual gate: "
                f"{worst:.3e} > {gate:.1e}"
            )
    return catalog


def _check_target(mesh: SurfaceMesh, base: BaseDisk, x0: np.ndarray) -> None:
    if x0[0] <= 0.0:
        raise ValueError("targets must lie strictly inside the half-space (x1 > 0)")
    d2 = np.einsum("ki,ki->k", mesh.nodes - x0, mesh.nodes - x0)
    near = int(np.argmin(d2))
    spacing = np.sqrt(mesh.weights[near])
    base_spacing = base.radius / np.sqrt(base.n_nodes)
    if np.sqrt(d2[near]) < 2.0 * spacing or x0[0] < 2.0 * base_spacing:
        warnings.warn(
            f"target {x0} within two node spacings of the boundary; "
            "representation accuracy degrades",
            NearBoundaryPoleWarning,
            stacklevel=3,
        )


def solve(
    mesh: SurfaceMesh,
    base: BaseDisk,
    data: BoundaryData,
    targets: Sequence,
    prm: Params,
    op: DiscreteOperator | None = None,
    solver: SecondKindSolver | None = None,
    ctl: SeriesControl = DEFAULT_CONTROL,
    n_threads: int = 1,
) -> np.ndarray:
    """Evaluate the solution at interior targets via the Green-function
    representation; one adjoint solve per target on a shared factorization."""
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    if targets.size == 0:
        return np.zeros(0)
    phi = data.sample_phi(mesh)
    nu = data.sample_nu(base)
    if solver is None:
        solver = SecondKindSolver(op if op is not None else assemble(mesh, prm, ctl), 2.0)
    for x0 in targets:
        _check_target(mesh, base, x0)

    # Simple-layer table for the regular part at base nodes (target
    # independent): entry (k, b) = q(s_k, base_b).
    s_base = backend.q1_cross(mesh.nodes, base.nodes, prm, ctl)
    q_base = backend.q1_cross(base.nodes, targets, prm, ctl)  # (Nb, T)
    k_rhs = backend.k1_cross(mesh.nodes, mesh.normals, mesh.x1w, targets, prm, ctl)
    phi_w = phi * mesh.weights
    nu_w = nu * base.weights
    rho_w = mesh.weights  # weights applied to each solved density

    def one_target(t: int) -> float:
        rho = solver.solve_adjoint(2.0 * k_rhs[:, t])
        g_base = q_base[:, t] + s_base.T @ (rho * rho_w)
        return -float(nu_w @ g_base) - float(phi_w @ rho)

    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            return np.array(list(pool.map(one_target, range(targets.shape[0]))))
    return np.array([one_target(t) for t in range(targets.shape[0])])


def solve_hemisphere(
    a: float,
    base: BaseDisk,
    mesh: SurfaceMesh,
    data: BoundaryData,
    targets: Sequence,
    prm: Params,
    ctl: SeriesControl = DEFAULT_CONTROL,
) -> np.ndarray:
    """Same contract as solve on the hemisphere of radius a, but with the
    closed-form Green's function (no density solves): both kernels are
    image differences with analytic gradients."""
    targets = np.atleast_2d(np.asarray(targets, dtype=float))
    if targets.size == 0:
        return np.zeros(0)
    phi = data.sample_phi(mesh)
    nu = data.sample_nu(base)
    big_r2 = np.einsum("ti,ti->t", targets, targets)
    if (big_r2 == 0.0).any():
        raise ValueError("target at the origin has no image pole")
    images = targets * (a * a / big_r2)[:, None]
    fac = reflection_factor(np.sqrt(big_r2), a, prm)

    q_base = backend.q1_cross(base.nodes, targets, prm, ctl)
    q_base_img = backend.q1_cross(base.nodes, images, prm, ctl)
    g_base = q_base - q_base_img * fac[None, :]

    k_gam = backend.k1_cross(mesh.nodes, mesh.normals, mesh.x1w, targets, prm, ctl)
    k_gam_img = backend.k1_cross(mesh.nodes, mesh.normals, mesh.x1w, images, prm, ctl)
    g_gam = k_gam - k_gam_img * fac[None, :]

    return -(nu * base.weights) @ g_base - (phi * mesh.weights) @ g_gam


def energy_identity_check(
    mesh: SurfaceMesh,
    base: BaseDisk,
    u: ManufacturedSolution,
    prm: Params,
    volume_resolution: int = 24,
) -> tuple[float, float]:
    """Weighted Dirichlet energy over the hemisphere vs the boundary-flux
    form, each by independent quadrature.

    Left side: tensor spherical rule (radial Gauss-Legendre x graded polar
    x uniform azimuth).  Right side: surface rule with outward normals,
    x1^(2a) u du/dn on the curved part minus u nu on the base.
    """
    a = mesh.rim_radius
    if a is None:
        raise ValueError("mesh does not carry a rim radius; hemisphere required")
    n = volume_resolution
    xg, wg = np.polynomial.legendre.leggauss(n)
    r = 0.5 * a * (xg + 1.0)
    wr = 0.5 * a * wg
    tpol, wpol = _graded_gauss(n, 3.0)
    theta = 0.5 * np.pi * tpol
    wth = 0.5 * np.pi * wpol
    phi_az, wphi = _azimuth(2 * n)

    two_a = 2.0 * prm.alpha
    lhs = 0.0
    for i in range(n):
        for j in range(n):
            x1 = r[i] * np.cos(theta[j])
            rs = r[i] * np.sin(theta[j])
            jac = wr[i] * wth[j] * wphi * r[i] ** 2 * np.sin(theta[j])
            for p in phi_az:
                pt = np.array([x1, rs * np.cos(p), rs * np.sin(p)])
                g = np.asarray(u.grad_u(pt))
                lhs += x1**two_a * float(g @ g) * jac

    rhs = 0.0
    for k in range(mesh.n_nodes):
        g = np.asarray(u.grad_u(mesh.nodes[k]))
        rhs += (
            mesh.x1w[k]
            * u.u(mesh.nodes[k])
            * float(g @ mesh.normals[k])
            * mesh.weights[k]
        )
    for b in range(base.n_nodes):
        rhs -= u.u(base.nodes[b]) * u.nu(base.nodes[b]) * base.weights[b]
    return lhs, rhs
