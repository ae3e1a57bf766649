# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False, language_level=3
"""Compiled implementation of the hot kernel batches.

Same series recurrence and connection-formula switch as ``_pykern``; the
scalar inner loops avoid the large pairwise temporaries of the numpy path.
"""

from libc.math cimport fabs, pow, NAN, isnan

import numpy as np

from .errors import CoincidentPointsError, HypergeometricConvergenceError
from .specfun import UNIT_SWITCH as _UNIT_SWITCH

cdef double UNIT_SWITCH = _UNIT_SWITCH


cdef double _series(double a, double b, double c, double z,
                    double tol, int max_terms, int* fail) nogil:
    cdef double term = 1.0, total = 1.0
    cdef int n = 0, streak = 0
    while n < max_terms:
        term = term * ((a + n) * (b + n) / ((c + n) * (n + 1.0)) * z)
        total = total + term
        if term == 0.0:
            return total
        if fabs(term) <= tol * fabs(total):
            streak += 1
            if streak >= 2:
                return total
        else:
            streak = 0
        n += 1
    fail[0] = 1
    return total


cdef inline double _hyp_unit(const double* f, double w,
                             double tol, int max_terms, int* fail) nogil:
    # f holds a, b, c, s, P, Q, has_connection
    cdef double v
    if w > UNIT_SWITCH and f[6] != 0.0:
        v = 1.0 - w
        return (f[4] * _series(f[0], f[1], 1.0 - f[3], v, tol, max_terms, fail)
                + f[5] * pow(v, f[3])
                * _series(f[2] - f[0], f[2] - f[1], 1.0 + f[3], v, tol, max_terms, fail))
    return _series(f[0], f[1], f[2], w, tol, max_terms, fail)


def q1_cross(const double[:, ::1] points, const double[:, ::1] poles, kt):
    cdef Py_ssize_t np_ = points.shape[0], nt = poles.shape[0], m = points.shape[1]
    cdef double alpha = kt.alpha, k1 = kt.k1, tol = kt.tol
    cdef int max_terms = kt.max_terms
    cdef double[:, ::1] forms = np.array(kt.forms, dtype=np.float64, order="C", copy=True)
    out_np = np.empty((np_, nt), dtype=np.float64)
    cdef double[:, ::1] out = out_np
    cdef double half = (m - 2.0) / 2.0
    cdef Py_ssize_t p, t, i
    cdef int fail = 0, coincident = 0
    cdef double r2, r12, w, d, f
    with nogil:
        for p in range(np_):
            for t in range(nt):
                r2 = 0.0
                for i in range(m):
                    d = points[p, i] - poles[t, i]
                    r2 += d * d
                if r2 <= 0.0:
                    coincident = 1
                    out[p, t] = NAN
                    continue
                r12 = r2 + 4.0 * points[p, 0] * poles[t, 0]
                w = 1.0 - r2 / r12
                f = _hyp_unit(&forms[0, 0], w, tol, max_terms, &fail)
                out[p, t] = k1 * pow(r2, -half) * pow(r12, -alpha) * f
    if coincident:
        raise CoincidentPointsError("coincident point/pole pair in batch evaluation")
    if fail:
        raise HypergeometricConvergenceError(
            f"batch series exceeded {max_terms} terms")
    return out_np


def k1_cross(const double[:, ::1] points, const double[:, ::1] normals,
             const double[::1] x1w, const double[:, ::1] poles, kt):
    cdef Py_ssize_t np_ = points.shape[0], nt = poles.shape[0], m = points.shape[1]
    cdef double alpha = kt.alpha, c0 = kt.c0, tol = kt.tol
    cdef int max_terms = kt.max_terms
    cdef double[:, ::1] forms = np.array(kt.forms, dtype=np.float64, order="C", copy=True)
    out_np = np.empty((np_, nt), dtype=np.float64)
    cdef double[:, ::1] out = out_np
    cdef Py_ssize_t p, t, i
    cdef int fail = 0, coincident = 0
    cdef double r2, r12, w, d, dot, ratio, f1, f2, pref
    with nogil:
        for p in range(np_):
            for t in range(nt):
                r2 = 0.0
                dot = 0.0
                for i in range(m):
                    d = points[p, i] - poles[t, i]
                    r2 += d * d
                    dot += normals[p, i] * d
                if r2 <= 0.0:
                    coincident = 1
                    out[p, t] = NAN
                    continue
                r12 = r2 + 4.0 * points[p, 0] * poles[t, 0]
                w = 1.0 - r2 / r12
                ratio = r2 / r12
                f1 = pow(ratio, alpha) * _hyp_unit(&forms[1, 0], w, tol, max_terms, &fail)
                f2 = pow(ratio, 1.0 + alpha) * _hyp_unit(&forms[2, 0], w, tol, max_terms, &fail)
                pref = c0 * pow(r2, -alpha - m / 2.0)
                out[p, t] = -x1w[p] * pref * (f1 * dot + f2 * poles[t, 0] * normals[p, 0])
    if coincident:
        raise CoincidentPointsError("coincident point/pole pair in batch evaluation")
    if fail:
        raise HypergeometricConvergenceError(
            f"batch series exceeded {max_terms} terms")
    return out_np


def assemble_offdiag(const double[:, ::1] nodes, const double[:, ::1] normals,
                     const double[::1] weights, const double[::1] x1w, kt):
    cdef Py_ssize_t n = nodes.shape[0], m = nodes.shape[1]
    cdef double alpha = kt.alpha, c0 = kt.c0, tol = kt.tol
    cdef int max_terms = kt.max_terms
    cdef double[:, ::1] forms = np.array(kt.forms, dtype=np.float64, order="C", copy=True)
    out_np = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] out = out_np
    cdef Py_ssize_t j, k, i
    cdef int fail = 0
    cdef double r2, r12, w, d, dot, ratio, f1, f2, pref
    with nogil:
        for j in range(n):
            for k in range(n):
                if k == j:
                    out[j, k] = 0.0
                    continue
                r2 = 0.0
                dot = 0.0
                for i in range(m):
                    d = nodes[k, i] - nodes[j, i]
                    r2 += d * d
                    dot += normals[k, i] * d
                r12 = r2 + 4.0 * nodes[k, 0] * nodes[j, 0]
                w = 1.0 - r2 / r12
                ratio = r2 / r12
                f1 = pow(ratio, alpha) * _hyp_unit(&forms[1, 0], w, tol, max_terms, &fail)
                f2 = pow(ratio, 1.0 + alpha) * _hyp_unit(&forms[2, 0], w, tol, max_terms, &fail)
                pref = c0 * pow(r2, -alpha - m / 2.0)
                out[j, k] = (-x1w[k] * pref
                             * (f1 * dot + f2 * nodes[j, 0] * normals[k, 0])
                             * weights[k])
    if fail:
        raise HypergeometricConvergenceError(
            f"batch series exceeded {max_terms} terms")
    return out_np
