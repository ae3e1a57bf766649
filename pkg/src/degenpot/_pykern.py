"""Pure-numpy implementation of the hot kernel batches.

Mirrors ``_ckern`` exactly (same series recurrence, same connection-formula
switch) so the two backends agree to rounding; selected at import time by
``backend`` when the compiled extension is unavailable or disabled.
"""

from __future__ import annotations

import numpy as np

from .errors import CoincidentPointsError, HypergeometricConvergenceError
from .specfun import UNIT_SWITCH

# Cap on elements of a pairwise temporary (doubles); keeps peak memory flat.
_CHUNK_ELEMENTS = 1 << 22


def _series_vec(a, b, c, z, tol, max_terms):
    """Gauss series on an array of arguments with |z| < 1, per-element stop."""
    z = np.asarray(z, dtype=float)
    term = np.ones_like(z)
    total = np.ones_like(z)
    active = np.ones(z.shape, dtype=bool)
    streak = np.zeros(z.shape, dtype=np.int64)
    n = 0
    while n < max_terms:
        if not active.any():
            return total
        term = term * ((a + n) * (b + n) / ((c + n) * (n + 1.0)) * z)
        np.add(total, term, out=total, where=active)
        small = np.abs(term) <= tol * np.abs(total)
        streak = np.where(small, streak + 1, 0)
        active &= ~((term == 0.0) | (streak >= 2))
        n += 1
    if active.any():
        raise HypergeometricConvergenceError(
            f"batch series F({a},{b};{c};z) exceeded {max_terms} terms "
            f"(worst argument {z[active].max():.17g})"
        )
    return total


def _hyp_unit_vec(form, w, tol, max_terms):
    """Gauss function on [0, 1): direct series below the switch argument,
    1-z connection formula above it (when available for the parameter set)."""
    a, b, c, s, p, q, has = form
    out = np.empty_like(w)
    hi = (w > UNIT_SWITCH) if has != 0.0 else np.zeros(w.shape, dtype=bool)
    lo = ~hi
    if lo.any():
        out[lo] = _series_vec(a, b, c, w[lo], tol, max_terms)
    if hi.any():
        v = 1.0 - w[hi]
        out[hi] = p * _series_vec(a, b, 1.0 - s, v, tol, max_terms) + q * v**s * _series_vec(
            c - a, c - b, 1.0 + s, v, tol, max_terms
        )
    return out


def _chunk(total, width):
    step = max(1, _CHUNK_ELEMENTS // max(width, 1))
    for lo in range(0, total, step):
        yield slice(lo, min(lo + step, total))


def _geometry(points, poles_block):
    d = points[:, None, :] - poles_block[None, :, :]
    r2 = np.einsum("ptk,ptk->pt", d, d)
    if not (r2 > 0.0).all():
        raise CoincidentPointsError("coincident point/pole pair in batch evaluation")
    r12 = r2 + 4.0 * points[:, 0:1] * poles_block[None, :, 0]
    w = 1.0 - r2 / r12
    return d, r2, r12, w


def q1_cross(points, poles, kt):
    """Fundamental-solution values, shape (n_points, n_poles)."""
    half = (kt.m - 2) / 2.0
    out = np.empty((points.shape[0], poles.shape[0]))
    for sl in _chunk(poles.shape[0], points.shape[0]):
        _, r2, r12, w = _geometry(points, poles[sl])
        f = _hyp_unit_vec(kt.forms[0], w, kt.tol, kt.max_terms)
        out[:, sl] = kt.k1 * r2 ** (-half) * r12 ** (-kt.alpha) * f
    return out


def k1_cross(points, normals, x1w, poles, kt):
    """Weighted double-layer kernel values  x1w_p * (grad_p q . n_p),
    shape (n_points, n_poles)."""
    a = kt.alpha
    out = np.empty((points.shape[0], poles.shape[0]))
    for sl in _chunk(poles.shape[0], points.shape[0]):
        d, r2, r12, w = _geometry(points, poles[sl])
        ratio = r2 / r12
        f1 = ratio**a * _hyp_unit_vec(kt.forms[1], w, kt.tol, kt.max_terms)
        f2 = ratio ** (1.0 + a) * _hyp_unit_vec(kt.forms[2], w, kt.tol, kt.max_terms)
        pref = kt.c0 * r2 ** (-a - kt.m / 2.0)
        dot = np.einsum("pk,ptk->pt", normals, d)
        vals = -pref * (f1 * dot + f2 * poles[None, sl, 0] * normals[:, 0:1])
        out[:, sl] = x1w[:, None] * vals
    return out


def assemble_offdiag(nodes, normals, weights, x1w, kt):
    """Nystrom matrix of the weighted double-layer operator with zero
    diagonal: entry (j, k) is K(s_k -> t_j) * w_k."""
    a = kt.alpha
    n = nodes.shape[0]
    out = np.empty((n, n))
    for sl in _chunk(n, n):
        d = nodes[:, None, :] - nodes[None, sl, :]
        r2 = np.einsum("ptk,ptk->pt", d, d)
        rows = np.arange(sl.start, sl.stop)
        diag = (rows[None, :] == np.arange(n)[:, None])
        r2[diag] = 1.0  # dummy, masked out below
        r12 = r2 + 4.0 * nodes[:, 0:1] * nodes[None, sl, 0]
        w = 1.0 - r2 / r12
        ratio = r2 / r12
        f1 = ratio**a * _hyp_unit_vec(kt.forms[1], w, kt.tol, kt.max_terms)
        f2 = ratio ** (1.0 + a) * _hyp_unit_vec(kt.forms[2], w, kt.tol, kt.max_terms)
        pref = kt.c0 * r2 ** (-a - kt.m / 2.0)
        dot = np.einsum("pk,ptk->pt", normals, d)
        vals = -pref * (f1 * dot + f2 * nodes[None, sl, 0] * normals[:, 0:1])
        vals *= x1w[:, None]
        vals[diag] = 0.0
        out[sl, :] = (vals * weights[:, None]).T
    return out
