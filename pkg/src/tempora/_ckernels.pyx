# cython: language_level=3
"""Compiled kernel backend.

Same call surface as `_pykernels`: symmetric eigendecomposition via
Householder tridiagonalization followed by implicit-shift QL iteration,
a dense Cholesky solve, and the fused class-averaging projection.  All
routines work on float64 C-contiguous buffers.
"""

import numpy as np

cimport numpy as cnp
from libc.float cimport DBL_EPSILON
from libc.math cimport fabs, hypot, isnan, sqrt

cnp.import_array()

NAME = "compiled"


cdef void _tred2(double[:, ::1] z, double[::1] d, double[::1] e, Py_ssize_t n):
    # Householder reduction to tridiagonal form, accumulating the
    # orthogonal transform in z (EISPACK tred2 lineage).
    cdef Py_ssize_t i, j, k, l
    cdef double scale, hh, h, g, f

    for i in range(n - 1, 0, -1):
        l = i - 1
        h = 0.0
        scale = 0.0
        if l > 0:
            for k in range(l + 1):
                scale += fabs(z[i, k])
            if scale == 0.0:
                e[i] = z[i, l]
            else:
                for k in range(l + 1):
                    z[i, k] /= scale
                    h += z[i, k] * z[i, k]
                f = z[i, l]
                g = -sqrt(h) if f >= 0.0 else sqrt(h)
                e[i] = scale * g
                h -= f * g
                z[i, l] = f - g
                f = 0.0
                for j in range(l + 1):
                    z[j, i] = z[i, j] / h
                    g = 0.0
                    for k in range(j + 1):
                        g += z[j, k] * z[i, k]
                    for k in range(j + 1, l + 1):
                        g += z[k, j] * z[i, k]
                    e[j] = g / h
                    f += e[j] * z[i, j]
                hh = f / (h + h)
                for j in range(l + 1):
                    f = z[i, j]
                    g = e[j] - hh * f
                    e[j] = g
                    for k in range(j + 1):
                        z[j, k] -= f * e[k] + g * z[i, k]
        else:
            e[i] = z[i, l]
        d[i] = h

    d[0] = 0.0
    e[0] = 0.0
    for i in range(n):
        l = i - 1
        if d[i] != 0.0:
            for j in range(l + 1):
                g = 0.0
                for k in range(l + 1):
                    g += z[i, k] * z[k, j]
                for k in range(l + 1):
                    z[k, j] -= g * z[k, i]
        d[i] = z[i, i]
        z[i, i] = 1.0
        for j in range(l + 1):
            z[j, i] = 0.0
            z[i, j] = 0.0


cdef int _tql2(double[::1] d, double[::1] e, double[:, ::1] z,
               Py_ssize_t n) except -1:
    # Implicit-shift QL iteration on the tridiagonal (d, e), rotations
    # accumulated into the columns of z.
    cdef Py_ssize_t i, k, l, m
    cdef int its
    cdef double s, r, p, g, f, dd, c, b
    cdef bint underflow

    for i in range(1, n):
        e[i - 1] = e[i]
    e[n - 1] = 0.0

    for l in range(n):
        its = 0
        while True:
            m = l
            while m < n - 1:
                dd = fabs(d[m]) + fabs(d[m + 1])
                if fabs(e[m]) <= DBL_EPSILON * dd:
                    break
                m += 1
            if m == l:
                break
            its += 1
            if its > 60:
                raise np.linalg.LinAlgError(
                    "eigenvalue iteration failed to converge"
                )
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + (r if g >= 0.0 else -r))
            s = 1.0
            c = 1.0
            p = 0.0
            underflow = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                for k in range(n):
                    f = z[k, i + 1]
                    z[k, i + 1] = s * z[k, i] + c * f
                    z[k, i] = c * z[k, i] - s * f
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return 0


cdef void _sort_ascending(double[::1] d, double[:, ::1] z, Py_ssize_t n):
    cdef Py_ssize_t i, j, k, best
    cdef double tmp
    for i in range(n - 1):
        best = i
        for j in range(i + 1, n):
            if d[j] < d[best]:
                best = j
        if best != i:
            tmp = d[i]
            d[i] = d[best]
            d[best] = tmp
            for k in range(n):
                tmp = z[k, i]
                z[k, i] = z[k, best]
                z[k, best] = tmp


def eigh_sym(a):
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns)."""
    cdef cnp.ndarray[double, ndim=2] z = np.array(
        a, dtype=np.float64, order="C", copy=True
    )
    cdef Py_ssize_t n = z.shape[0]
    if z.shape[1] != n:
        raise ValueError("expected a square matrix")
    cdef cnp.ndarray[double, ndim=1] d = np.empty(n, dtype=np.float64)
    if n == 0:
        return d, z
    cdef cnp.ndarray[double, ndim=1] e = np.empty(n, dtype=np.float64)
    if n == 1:
        d[0] = z[0, 0]
        z[0, 0] = 1.0
        return d, z
    _tred2(z, d, e, n)
    _tql2(d, e, z, n)
    _sort_ascending(d, z, n)
    return d, z


cdef int _cholesky(double[:, ::1] l, Py_ssize_t n) except -1:
    # In-place lower Cholesky factor; a non-positive pivot means the
    # matrix is not positive definite.
    cdef Py_ssize_t i, j, k
    cdef double s
    for j in range(n):
        s = l[j, j]
        for k in range(j):
            s -= l[j, k] * l[j, k]
        if not s > 0.0 or isnan(s):
            raise np.linalg.LinAlgError("matrix is not positive definite")
        s = sqrt(s)
        l[j, j] = s
        for i in range(j + 1, n):
            l[i, j] = (l[i, j] - _dot_rows(l, i, j, j)) / s
    return 0


cdef inline double _dot_rows(double[:, ::1] l, Py_ssize_t i, Py_ssize_t j,
                             Py_ssize_t length):
    cdef Py_ssize_t k
    cdef double s = 0.0
    for k in range(length):
        s += l[i, k] * l[j, k]
    return s


cdef void _chol_substitute(double[:, ::1] l, double[:, ::1] x,
                           Py_ssize_t n, Py_ssize_t m):
    # Solve L y = b then L^T x = y, column by column, in place.
    cdef Py_ssize_t i, k, col
    cdef double s
    for col in range(m):
        for i in range(n):
            s = x[i, col]
            for k in range(i):
                s -= l[i, k] * x[k, col]
            x[i, col] = s / l[i, i]
        for i in range(n - 1, -1, -1):
            s = x[i, col]
            for k in range(i + 1, n):
                s -= l[k, i] * x[k, col]
            x[i, col] = s / l[i, i]


def chol_solve(a, b):
    """Solve a x = b for symmetric positive definite a.

    Raises ``numpy.linalg.LinAlgError`` when the matrix is not positive
    definite.  ``b`` may be a vector or a matrix of stacked columns.
    """
    cdef cnp.ndarray[double, ndim=2] l = np.array(
        a, dtype=np.float64, order="C", copy=True
    )
    cdef Py_ssize_t n = l.shape[0]
    if l.shape[1] != n:
        raise ValueError("expected a square matrix")
    rhs = np.asarray(b, dtype=np.float64)
    single = rhs.ndim == 1
    if single:
        rhs = rhs[:, None]
    if rhs.shape[0] != n:
        raise ValueError("right-hand side length does not match the matrix")
    cdef cnp.ndarray[double, ndim=2] x = np.array(rhs, order="C", copy=True)
    if n:
        _cholesky(l, n)
        _chol_substitute(l, x, n, x.shape[1])
    return x[:, 0] if single else x


def class_project(flat, ids, counts, pins):
    """Replace each entry by its class mean, or by the pinned class value.

    ``flat`` is a flattened symmetric matrix, ``ids`` the class id per
    entry, ``counts`` the entry count per class and ``pins`` the per-class
    pinned value with NaN marking free classes.
    """
    cdef const double[::1] values = np.ascontiguousarray(flat, dtype=np.float64)
    cdef const cnp.int32_t[::1] cls = np.ascontiguousarray(ids, dtype=np.int32)
    cdef const double[::1] sizes = np.ascontiguousarray(counts, dtype=np.float64)
    cdef const double[::1] pinned = np.ascontiguousarray(pins, dtype=np.float64)
    cdef Py_ssize_t n_entries = values.shape[0]
    cdef Py_ssize_t n_classes = sizes.shape[0]
    if cls.shape[0] != n_entries:
        raise ValueError("class ids do not match the entry count")
    if pinned.shape[0] != n_classes:
        raise ValueError("pins do not match the class count")

    cdef cnp.ndarray[double, ndim=1] means = np.zeros(n_classes, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] out = np.empty(n_entries, dtype=np.float64)
    cdef double[::1] mv = means
    cdef double[::1] ov = out
    cdef Py_ssize_t idx, c

    for idx in range(n_entries):
        c = cls[idx]
        if c < 0 or c >= n_classes:
            raise ValueError("class id out of range")
        mv[c] += values[idx]
    for c in range(n_classes):
        mv[c] /= sizes[c] if sizes[c] > 0.0 else 1.0
        if not isnan(pinned[c]):
            mv[c] = pinned[c]
    for idx in range(n_entries):
        ov[idx] = mv[cls[idx]]
    return out
