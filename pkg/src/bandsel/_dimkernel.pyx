# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled moving-window lambda kernels.

Inputs are deviations from the per-frequency class means, so every cell
reduces to sums of squares over the window, accumulated in ascending
frequency order. ``dim_block`` grows each window one frequency at a time
from its start, which performs exactly the same floating-point additions
as summing every cell from scratch.
"""

from libc.math cimport sqrt
from libc.stdlib cimport malloc, free


cdef double EPS = 1e-12


cdef inline double _ratio(double sx, double sy, double dd, Py_ssize_t n,
                          Py_ssize_t ny, double rw) nogil:
    cdef double s = sx / (n * rw) + sy / (ny * rw)
    cdef double d = sqrt(dd) / rw
    if s < EPS:
        return 0.0 if d < EPS else d / EPS
    return d / s


def sweep_width(const double[:, ::1] dx, const double[:, ::1] dy,
                const double[::1] dmu, Py_ssize_t w, double[::1] out):
    """Fill ``out[k]`` with lambda for the window ``[k, k + w)``."""
    cdef Py_ssize_t n = dx.shape[0], ny = dy.shape[0], m = dx.shape[1]
    cdef Py_ssize_t k, i, q
    cdef double sx, sy, acc, v, rw
    if w < 1 or w > m:
        raise ValueError("window width out of range")
    if out.shape[0] != m - w + 1:
        raise ValueError("output length must be m - w + 1")
    rw = sqrt(<double>w)
    with nogil:
        for k in range(m - w + 1):
            sx = 0.0
            for i in range(n):
                acc = 0.0
                for q in range(k, k + w):
                    v = dx[i, q]
                    acc = acc + v * v
                sx = sx + sqrt(acc)
            sy = 0.0
            for i in range(ny):
                acc = 0.0
                for q in range(k, k + w):
                    v = dy[i, q]
                    acc = acc + v * v
                sy = sy + sqrt(acc)
            acc = 0.0
            for q in range(k, k + w):
                acc = acc + dmu[q] * dmu[q]
            out[k] = _ratio(sx, sy, acc, n, ny, rw)


def dim_block(const double[:, ::1] dx, const double[:, ::1] dy,
              const double[::1] dmu, Py_ssize_t k_lo, Py_ssize_t k_hi,
              double[::1] values):
    """Fill every DIM cell whose start lies in ``[k_lo, k_hi)``.

    ``values`` is the flat width-major triangle of length ``m (m + 1) / 2``.
    """
    cdef Py_ssize_t n = dx.shape[0], ny = dy.shape[0], m = dx.shape[1]
    cdef Py_ssize_t k, w, i, q, off
    cdef double sx, sy, dd, v
    cdef double *ax
    cdef double *ay
    if values.shape[0] != m * (m + 1) // 2:
        raise ValueError("values must hold m(m+1)/2 cells")
    if k_lo < 0 or k_hi > m or k_lo > k_hi:
        raise ValueError("start range out of bounds")
    ax = <double *> malloc(n * sizeof(double))
    ay = <double *> malloc(ny * sizeof(double))
    if ax == NULL or ay == NULL:
        free(ax)
        free(ay)
        raise MemoryError()
    with nogil:
        for k in range(k_lo, k_hi):
            for i in range(n):
                ax[i] = 0.0
            for i in range(ny):
                ay[i] = 0.0
            dd = 0.0
            for w in range(1, m - k + 1):
                q = k + w - 1
                sx = 0.0
                for i in range(n):
                    v = dx[i, q]
                    ax[i] = ax[i] + v * v
                    sx = sx + sqrt(ax[i])
                sy = 0.0
                for i in range(ny):
                    v = dy[i, q]
                    ay[i] = ay[i] + v * v
                    sy = sy + sqrt(ay[i])
                dd = dd + dmu[q] * dmu[q]
                off = (w - 1) * (m + 1) - (w - 1) * w // 2
                values[off + k] = _ratio(sx, sy, dd, n, ny, sqrt(<double>w))
    free(ax)
    free(ay)
