# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of _kernels_py: thin-QR append / project / residual.

Same buffer layout and acceptance semantics as the pure-numpy module;
see _kernels_py for the documentation.  The point of this module is to
collapse the handful of numpy calls per TDMA slot into single C loops,
which dominates the round engine's runtime for small d.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


cdef double _norm(const double* v, Py_ssize_t d) noexcept nogil:
    cdef Py_ssize_t j
    cdef double s = 0.0
    for j in range(d):
        s += v[j] * v[j]
    return sqrt(s)


cdef void _orthogonalize(const double[:, ::1] qt, Py_ssize_t k,
                         const double* g, double* y, double* w,
                         Py_ssize_t d) noexcept nogil:
    # Two-pass modified Gram-Schmidt: y = Q^T g, w = g - Q y.
    cdef Py_ssize_t i, j
    cdef double s
    for j in range(d):
        w[j] = g[j]
    for i in range(k):
        s = 0.0
        for j in range(d):
            s += qt[i, j] * w[j]
        for j in range(d):
            w[j] -= s * qt[i, j]
        y[i] = s
    for i in range(k):
        s = 0.0
        for j in range(d):
            s += qt[i, j] * w[j]
        for j in range(d):
            w[j] -= s * qt[i, j]
        y[i] += s


def try_append(double[:, ::1] qt, double[:, ::1] rmat, Py_ssize_t k,
               const double[::1] v, double tol):
    cdef Py_ssize_t d = qt.shape[1]
    cdef Py_ssize_t i, j
    cdef double vnorm, rnorm
    vnorm = _norm(&v[0], d)
    if vnorm == 0.0 or k >= qt.shape[0]:
        return k
    if k == 0:
        for j in range(d):
            qt[0, j] = v[j] / vnorm
        rmat[0, 0] = vnorm
        return 1
    cdef cnp.ndarray[double, ndim=1] y = np.empty(k, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] w = np.empty(d, dtype=np.float64)
    cdef double* yp = <double*> y.data
    cdef double* wp = <double*> w.data
    _orthogonalize(qt, k, &v[0], yp, wp, d)
    rnorm = _norm(wp, d)
    if rnorm <= tol * vnorm:
        return k
    for j in range(d):
        qt[k, j] = wp[j] / rnorm
    for i in range(k):
        rmat[i, k] = yp[i]
    rmat[k, k] = rnorm
    return k + 1


def project(const double[:, ::1] qt, const double[:, ::1] rmat,
            Py_ssize_t k, const double[::1] g):
    cdef Py_ssize_t d = qt.shape[1]
    cdef Py_ssize_t i, j
    cdef double s, rnorm
    cdef cnp.ndarray[double, ndim=1] coeffs = np.zeros(k, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] echo = np.zeros(d, dtype=np.float64)
    if k == 0:
        return coeffs, echo, _norm(&g[0], d)
    cdef cnp.ndarray[double, ndim=1] y = np.empty(k, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] w = np.empty(d, dtype=np.float64)
    cdef double* yp = <double*> y.data
    cdef double* wp = <double*> w.data
    cdef double* xp = <double*> coeffs.data
    cdef double* ep = <double*> echo.data
    _orthogonalize(qt, k, &g[0], yp, wp, d)
    for j in range(d):
        ep[j] = g[j] - wp[j]
    rnorm = _norm(wp, d)
    # Back-substitution R x = y.
    for i in range(k - 1, -1, -1):
        s = yp[i]
        for j in range(i + 1, k):
            s -= rmat[i, j] * xp[j]
        xp[i] = s / rmat[i, i]
    return coeffs, echo, rnorm


def residual_norm(const double[:, ::1] qt, Py_ssize_t k,
                  const double[::1] g):
    cdef Py_ssize_t d = qt.shape[1]
    if k == 0:
        return _norm(&g[0], d)
    cdef cnp.ndarray[double, ndim=1] y = np.empty(k, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] w = np.empty(d, dtype=np.float64)
    _orthogonalize(qt, k, &g[0], <double*> y.data, <double*> w.data, d)
    return _norm(<double*> w.data, d)
