"""Quadrature meshes for the curved surface and the flat base region.

The curved surface is a surface of revolution about the x1-axis meeting
the plane x1 = 0 at right angle; nodes are a tensor grid of a graded
Gauss-Legendre rule along the generator and the uniform periodic rule in
azimuth.  Grading clusters nodes toward the equator where the weight
x1^(2 alpha) loses smoothness.  The base region is a disk in the plane
x1 = 0 with a polar Gauss-Legendre x periodic rule.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import MeshInvariantError
from .kernel import Params

MESH_CSV_COLUMNS = ("x1", "x2", "x3", "n1", "n2", "n3", "w", "x1w")


@dataclass(frozen=True)
class SurfaceMesh:
    """Quadrature nodes, outward unit normals, weights and precomputed
    x1^(2 alpha) node weights on the curved surface."""

    nodes: np.ndarray  # (N, 3)
    normals: np.ndarray  # (N, 3)
    weights: np.ndarray  # (N,)
    x1w: np.ndarray  # (N,)
    rim_radius: float | None = None

    def __post_init__(self):
        for name in ("nodes", "normals", "weights", "x1w"):
            getattr(self, name).setflags(write=False)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def area(self) -> float:
        return float(self.weights.sum())

    def dump_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(MESH_CSV_COLUMNS)
            for k in range(self.n_nodes):
                writer.writerow(
                    [repr(v) for v in (*self.nodes[k], *self.normals[k], self.weights[k], self.x1w[k])]
                )


def load_mesh_csv(path) -> SurfaceMesh:
    """Rebuild a mesh from its CSV dump (rim radius is not stored)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != MESH_CSV_COLUMNS:
            raise ValueError(f"unexpected mesh CSV header {header}")
        rows = np.array([[float(v) for v in row] for row in reader])
    if rows.size == 0:
        raise ValueError("empty mesh CSV")
    return SurfaceMesh(
        nodes=rows[:, 0:3].copy(),
        normals=rows[:, 3:6].copy(),
        weights=rows[:, 6].copy(),
        x1w=rows[:, 7].copy(),
    )


@dataclass(frozen=True)
class BaseDisk:
    """Quadrature for the flat base region in the plane x1 = 0."""

    radius: float
    nodes: np.ndarray  # (Nb, 3), first column exactly 0
    weights: np.ndarray  # (Nb,)

    def __post_init__(self):
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]


@dataclass(frozen=True)
class GeneratorCurve:
    """Generator (x1(t), rho(t)) of the surface of revolution, t in [0, 1].

    Must close on the axis at t = 0 (rho(0) = 0) and meet the plane x1 = 0
    at t = 1 with nonzero slope (right-angle condition)."""

    x1: Callable[[float], float]
    rho: Callable[[float], float]
    dx1: Callable[[float], float]
    drho: Callable[[float], float]


def hemisphere_generator(a: float) -> GeneratorCurve:
    h = math.pi / 2.0
    return GeneratorCurve(
        x1=lambda t: a * math.cos(h * t),
        rho=lambda t: a * math.sin(h * t),
        dx1=lambda t: -a * h * math.sin(h * t),
        drho=lambda t: a * h * math.cos(h * t),
    )


def half_ellipsoid_generator(a: float, c: float) -> GeneratorCurve:
    """Half-ellipsoid with polar semi-axis c along x1 and equatorial radius a."""
    h = math.pi / 2.0
    return GeneratorCurve(
        x1=lambda t: c * math.cos(h * t),
        rho=lambda t: a * math.sin(h * t),
        dx1=lambda t: -c * h * math.sin(h * t),
        drho=lambda t: a * h * math.cos(h * t),
    )


def _graded_gauss(n: int, grading: float):
    """Gauss-Legendre nodes/weights on (0, 1) composed with the grading map
    t = 1 - (1-u)^p that clusters points toward t = 1."""
    if n < 4:
        raise ValueError(f"need at least 4 generator nodes, got {n}")
    if grading < 1.0:
        raise ValueError(f"grading exponent must be >= 1, got {grading}")
    x, w = np.polynomial.legendre.leggauss(n)
    u = 0.5 * (x + 1.0)
    wu = 0.5 * w
    t = 1.0 - (1.0 - u) ** grading
    jac = grading * (1.0 - u) ** (grading - 1.0)
    return t, wu * jac


def _azimuth(n_phi: int):
    if n_phi < 4:
        raise ValueError(f"need at least 4 azimuthal nodes, got {n_phi}")
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    return phi, 2.0 * math.pi / n_phi


def revolve_mesh(
    g: GeneratorCurve, n_t: int, n_phi: int, grading: float, prm: Params
) -> SurfaceMesh:
    """Surface-of-revolution quadrature; nodes ordered generator-major."""
    tol = 1e-12 * max(abs(g.x1(0.0)), abs(g.rho(1.0)), 1.0)
    if abs(g.rho(0.0)) > tol:
        raise MeshInvariantError(f"generator must close on the axis: rho(0) = {g.rho(0.0)}")
    if abs(g.x1(1.0)) > tol:
        raise MeshInvariantError(f"generator must reach the plane x1=0: x1(1) = {g.x1(1.0)}")

    t, wt = _graded_gauss(n_t, grading)
    phi, wphi = _azimuth(n_phi)
    cphi, sphi = np.cos(phi), np.sin(phi)

    x1 = np.array([g.x1(v) for v in t])
    rho = np.array([g.rho(v) for v in t])
    dx1 = np.array([g.dx1(v) for v in t])
    drho = np.array([g.drho(v) for v in t])
    if (x1 <= 0.0).any():
        raise MeshInvariantError("generator first coordinate must stay positive on (0, 1)")
    speed = np.hypot(dx1, drho)

    nodes = np.empty((n_t * n_phi, 3))
    normals = np.empty_like(nodes)
    weights = np.empty(n_t * n_phi)
    k = 0
    for i in range(n_t):
        # Unnormalized meridian normal (drho, -dx1 cos, -dx1 sin).
        for j in range(n_phi):
            nodes[k] = (x1[i], rho[i] * cphi[j], rho[i] * sphi[j])
            normals[k] = (drho[i] / speed[i], -dx1[i] * cphi[j] / speed[i], -dx1[i] * sphi[j] / speed[i])
            weights[k] = wt[i] * rho[i] * speed[i] * wphi
            k += 1

    # Orient outward: positive mean projection on rays from an interior
    # reference point on the axis.
    ref = np.array([0.25 * g.x1(0.0), 0.0, 0.0])
    if np.mean(np.einsum("ki,ki->k", normals, nodes - ref)) < 0.0:
        normals = -normals

    return SurfaceMesh(
        nodes=nodes,
        normals=normals,
        weights=weights,
        x1w=nodes[:, 0] ** (2.0 * prm.alpha),
        rim_radius=float(g.rho(1.0)),
    )


def hemisphere_mesh(
    a: float, n_theta: int, n_phi: int, grading: float, prm: Params
) -> SurfaceMesh:
    """Hemisphere of radius a about the origin; radial normals."""
    if a <= 0.0:
        raise ValueError(f"radius must be positive, got {a}")
    mesh = revolve_mesh(hemisphere_generator(a), n_theta, n_phi, grading, prm)
    # Radial normals are exact for the sphere; replace the generator-based
    # ones to avoid rounding in the orientation arithmetic.
    normals = mesh.nodes / a
    return SurfaceMesh(
        nodes=mesh.nodes.copy(),
        normals=normals,
        weights=mesh.weights.copy(),
        x1w=mesh.x1w.copy(),
        rim_radius=a,
    )


def base_disk(radius: float, n_r: int, n_phi: int) -> BaseDisk:
    """Polar quadrature on the disk x1 = 0, |x'| < radius."""
    if radius <= 0.0:
        raise ValueError(f"radius must be positive, got {radius}")
    if n_r < 4:
        raise ValueError(f"need at least 4 radial nodes, got {n_r}")
    x, w = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * radius * (x + 1.0)
    wr = 0.5 * radius * w
    phi, wphi = _azimuth(n_phi)
    cphi, sphi = np.cos(phi), np.sin(phi)

    nodes = np.empty((n_r * n_phi, 3))
    weights = np.empty(n_r * n_phi)
    k = 0
    for i in range(n_r):
        for j in range(n_phi):
            nodes[k] = (0.0, r[i] * cphi[j], r[i] * sphi[j])
            weights[k] = wr[i] * r[i] * wphi
            k += 1
    return BaseDisk(radius=radius, nodes=nodes, weights=weights)


def weighted_flux(
    mesh: SurfaceMesh,
    base: BaseDisk,
    grad_u: Callable[[np.ndarray], np.ndarray],
    prm: Params,
    nu: Callable[[np.ndarray], float] | None = None,
) -> float:
    """Total weighted flux of a solution through the closed boundary.

    The curved part sums x1^(2 alpha) (grad u . n); on the base the outward
    normal is (-1, 0, 0) and the integrand is the negative of the weighted
    limit of x1^(2 alpha) du/dx1, which vanishes identically for solutions
    with bounded first derivative; supply nu to integrate prescribed
    weighted-flux data instead.
    """
    terms = [
        mesh.x1w[k] * float(np.asarray(grad_u(mesh.nodes[k])) @ mesh.normals[k]) * mesh.weights[k]
        for k in range(mesh.n_nodes)
    ]
    total = math.fsum(terms)
    if nu is not None:
        total -= math.fsum(nu(base.nodes[b]) * base.weights[b] for b in range(base.n_nodes))
    return total
