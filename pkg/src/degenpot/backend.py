"""Backend selection for the hot kernel batches.

The compiled Cython core (``_ckern``) is preferred; the vectorized numpy
fallback (``_pykern``) is semantically identical.  Selection happens once
at import time and can be forced with DEGENPOT_BACKEND=compiled|python.
``benchmarks/bench_backends.py`` compares the two.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .kernel import Params, normalization_constants
from .specfun import DEFAULT_CONTROL, SeriesControl, connection_constants

_requested = os.environ.get("DEGENPOT_BACKEND", "auto").strip().lower()
if _requested in ("", "auto"):
    try:
        from . import _ckern as _impl

        BACKEND = "compiled"
    except ImportError:
        from . import _pykern as _impl

        BACKEND = "python"
elif _requested in ("compiled", "c"):
    from . import _ckern as _impl

    BACKEND = "compiled"
elif _requested in ("python", "py"):
    from . import _pykern as _impl

    BACKEND = "python"
else:
    raise ValueError(f"unknown DEGENPOT_BACKEND value {_requested!r}")


@dataclass(frozen=True)
class KernelTables:
    """Precomputed per-parameter data consumed by both backends: the three
    hypergeometric parameter sets (with connection-formula prefactors) and
    the kernel normalization constants."""

    m: int
    alpha: float
    k1: float
    c0: float
    forms: np.ndarray  # (3, 7): a, b, c, s, P, Q, has_connection
    tol: float
    max_terms: int


@lru_cache(maxsize=32)
def tables(prm: Params, ctl: SeriesControl = DEFAULT_CONTROL) -> KernelTables:
    m, a = prm.m, prm.alpha
    k1, _ = normalization_constants(prm)
    rows = []
    for abc in (
        (a - (m - 2) / 2.0, a, 2.0 * a),  # transformed fundamental solution
        (a - m / 2.0, a, 2.0 * a),  # radial gradient factor (Pfaff form)
        (a - (m - 2) / 2.0, 1.0 + a, 1.0 + 2.0 * a),  # degeneration-term factor
    ):
        cc = connection_constants(*abc)
        if cc is None:
            rows.append((*abc, 0.0, 0.0, 0.0, 0.0))
        else:
            s, p, q = cc
            rows.append((*abc, s, p, q, 1.0))
    forms = np.asarray(rows, dtype=float)
    forms.setflags(write=False)
    return KernelTables(
        m=m,
        alpha=a,
        k1=k1,
        c0=k1 * (2.0 * a + m - 2.0),
        forms=forms,
        tol=ctl.tol,
        max_terms=ctl.max_terms,
    )


def _arr2(x, m=None, name="array"):
    a = np.ascontiguousarray(x, dtype=float)
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-d, got shape {a.shape}")
    if m is not None and a.shape[1] != m:
        raise ValueError(f"{name} has row length {a.shape[1]}, expected {m}")
    return a


def _arr1(x, n=None, name="array"):
    a = np.ascontiguousarray(x, dtype=float)
    if a.ndim != 1:
        raise ValueError(f"{name} must be 1-d, got shape {a.shape}")
    if n is not None and a.size != n:
        raise ValueError(f"{name} has length {a.size}, expected {n}")
    return a


def q1_cross(points, poles, prm: Params, ctl: SeriesControl = DEFAULT_CONTROL):
    """Fundamental solution for every (point, pole) pair; shape (P, T)."""
    kt = tables(prm, ctl)
    return _impl.q1_cross(_arr2(points, kt.m, "points"), _arr2(poles, kt.m, "poles"), kt)


def k1_cross(points, normals, x1w, poles, prm: Params, ctl: SeriesControl = DEFAULT_CONTROL):
    """Weighted double-layer kernel for every (surface point, pole) pair."""
    kt = tables(prm, ctl)
    pts = _arr2(points, kt.m, "points")
    return _impl.k1_cross(
        pts,
        _arr2(normals, kt.m, "normals"),
        _arr1(x1w, pts.shape[0], "x1w"),
        _arr2(poles, kt.m, "poles"),
        kt,
    )


def assemble_offdiag(nodes, normals, weights, x1w, prm: Params, ctl: SeriesControl = DEFAULT_CONTROL):
    """Off-diagonal Nystrom matrix of the weighted double-layer operator."""
    kt = tables(prm, ctl)
    nd = _arr2(nodes, kt.m, "nodes")
    n = nd.shape[0]
    return _impl.assemble_offdiag(
        nd,
        _arr2(normals, kt.m, "normals"),
        _arr1(weights, n, "weights"),
        _arr1(x1w, n, "x1w"),
        kt,
    )
