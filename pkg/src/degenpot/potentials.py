"""Double- and simple-layer potentials: off-surface evaluation by plain
quadrature and boundary traces by the limit formulas.

Densities are plain float vectors indexed by mesh nodes.  Traces never
evaluate the singular integral at a node; they use the jump relations with
the gauge-subtracted discrete operator, which makes the constant-density
values and the jump identities exact.
"""

from __future__ import annotations

import warnings

import numpy as np

from . import backend
from .bie import DiscreteOperator, assemble
from .errors import EvaluationAtNodeError, NearSurfaceWarning
from .kernel import Params
from .specfun import DEFAULT_CONTROL, SeriesControl
from .surface import SurfaceMesh


def _as_density(mesh: SurfaceMesh, values) -> np.ndarray:
    v = np.asarray(values, dtype=float)
    if v.shape != (mesh.n_nodes,):
        raise ValueError(f"density shape {v.shape} does not match mesh ({mesh.n_nodes},)")
    if not np.isfinite(v).all():
        raise ValueError("density contains non-finite values")
    return v


def _check_off_surface(mesh: SurfaceMesh, x: np.ndarray) -> None:
    d2 = np.einsum("ki,ki->k", mesh.nodes - x, mesh.nodes - x)
    near = int(np.argmin(d2))
    dist = np.sqrt(d2[near])
    scale = np.sqrt(mesh.weights[near])  # local node spacing estimate
    if dist <= 1e-12 * max(1.0, np.abs(x).max()):
        raise EvaluationAtNodeError(
            "evaluation point coincides with a quadrature node; "
            "use the trace operations for on-surface values"
        )
    if dist < 0.5 * scale:
        warnings.warn(
            f"evaluation {dist:.3e} from the surface (local spacing {scale:.3e}); "
            "plain quadrature is inaccurate in the near field",
            NearSurfaceWarning,
            stacklevel=3,
        )


def double_layer(
    mesh: SurfaceMesh,
    mu,
    x,
    prm: Params,
    ctl: SeriesControl = DEFAULT_CONTROL,
) -> float:
    """Double-layer potential at an off-surface point."""
    mu = _as_density(mesh, mu)
    x = np.asarray(x, dtype=float)
    _check_off_surface(mesh, x)
    col = backend.k1_cross(mesh.nodes, mesh.normals, mesh.x1w, x[None, :], prm, ctl)[:, 0]
    return float(col @ (mu * mesh.weights))


def simple_layer(
    mesh: SurfaceMesh,
    rho,
    x,
    prm: Params,
    ctl: SeriesControl = DEFAULT_CONTROL,
) -> float:
    """Simple-layer potential at an off-surface point; continuous across
    the surface."""
    rho = _as_density(mesh, rho)
    x = np.asarray(x, dtype=float)
    _check_off_surface(mesh, x)
    col = backend.q1_cross(mesh.nodes, x[None, :], prm, ctl)[:, 0]
    return float(col @ (rho * mesh.weights))


def double_layer_trace(
    mesh: SurfaceMesh,
    mu,
    side: str,
    prm: Params,
    op: DiscreteOperator | None = None,
) -> np.ndarray:
    """Boundary trace of the double-layer potential from the chosen side
    ("interior" or "exterior"): -mu/2 + K mu, resp. +mu/2 + K mu."""
    mu = _as_density(mesh, mu)
    if op is None:
        op = assemble(mesh, prm)
    core = op.apply(mu)
    if side == "interior":
        return core - 0.5 * mu
    if side == "exterior":
        return core + 0.5 * mu
    raise ValueError(f"side must be 'interior' or 'exterior', got {side!r}")


def simple_layer_dn_trace(
    mesh: SurfaceMesh,
    rho,
    side: str,
    prm: Params,
    op: DiscreteOperator | None = None,
) -> np.ndarray:
    """Weighted normal-derivative trace x1^(2 alpha) dv/dn of the
    simple-layer potential from the chosen side: +rho/2 + K* rho from the
    interior, -rho/2 + K* rho from the exterior, with K* the Nystrom
    adjoint of the double-layer operator."""
    rho = _as_density(mesh, rho)
    if op is None:
        op = assemble(mesh, prm)
    core = op.apply_adjoint(rho)
    if side == "interior":
        return core + 0.5 * rho
    if side == "exterior":
        return core - 0.5 * rho
    raise ValueError(f"side must be 'interior' or 'exterior', got {side!r}")
