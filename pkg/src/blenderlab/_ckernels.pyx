# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_pykernels``; same signatures."""
import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, fmax

cnp.import_array()


cdef inline void _pb_taylor(const double[::1] c, const double[:, ::1] bumps,
                            double x, double* t) noexcept nogil:
    cdef Py_ssize_t d = c.shape[0] - 1
    cdef Py_ssize_t i, k
    cdef double p0 = c[d], p1 = 0.0, p2 = 0.0, p3 = 0.0
    cdef double u, w, a, v, v2, v3, v4
    for i in range(d - 1, -1, -1):
        p3 = p3 * x + p2
        p2 = p2 * x + p1
        p1 = p1 * x + p0
        p0 = p0 * x + c[i]
    for k in range(bumps.shape[0]):
        w = bumps[k, 1]
        u = (x - bumps[k, 0]) / w
        if -1.0 < u < 1.0:
            a = bumps[k, 2]
            v = 1.0 - u * u
            v2 = v * v
            v3 = v2 * v
            v4 = v3 * v
            p0 += a * v4 * v
            p1 += a * (-10.0 * u * v4) / w
            p2 += a * (-10.0 * v4 + 80.0 * u * u * v3) / (2.0 * w * w)
            p3 += a * (240.0 * u * v3 - 480.0 * u * u * u * v2) / (6.0 * w * w * w)
    t[0] = p0
    t[1] = p1
    t[2] = p2
    t[3] = p3


cdef double _pb_invert(const double[::1] c, const double[:, ::1] bumps,
                       double y, double lo, double hi, double guess) noexcept nogil:
    cdef double a = lo, b = hi, x, xn, g
    cdef double t[4]
    cdef int it
    x = guess
    if x < a:
        x = a
    if x > b:
        x = b
    for it in range(200):
        _pb_taylor(c, bumps, x, t)
        g = t[0] - y
        if g == 0.0:
            return x
        if g > 0.0:
            b = x
        else:
            a = x
        if t[1] > 0.0:
            xn = x - g / t[1]
        else:
            xn = 0.5 * (a + b)
        if not (a < xn < b):
            xn = 0.5 * (a + b)
        if fabs(xn - x) <= 4e-16 * fmax(1.0, fabs(x)):
            return xn
        x = xn
    return x


def _as_arrays(coeffs, bumps):
    c = np.ascontiguousarray(coeffs, dtype=np.float64)
    b = np.ascontiguousarray(bumps, dtype=np.float64).reshape(-1, 3)
    return c, b


def pb_taylor(coeffs, bumps, double x):
    cdef double t[4]
    c, b = _as_arrays(coeffs, bumps)
    _pb_taylor(c, b, x, t)
    return t[0], t[1], t[2], t[3]


def pb_invert(coeffs, bumps, double y, double lo, double hi, double guess):
    c, b = _as_arrays(coeffs, bumps)
    return _pb_invert(c, b, y, lo, hi, guess)


def forward_orbit(coeffs, bumps, double x0, Py_ssize_t n):
    c_arr, b_arr = _as_arrays(coeffs, bumps)
    cdef const double[::1] c = c_arr
    cdef const double[:, ::1] b = b_arr
    out_arr = np.empty((n + 1, 4))
    cdef double[:, ::1] out = out_arr
    cdef double t[4]
    cdef double x = x0
    cdef Py_ssize_t k
    with nogil:
        for k in range(n + 1):
            _pb_taylor(c, b, x, t)
            out[k, 0] = x
            out[k, 1] = t[1]
            out[k, 2] = t[2]
            out[k, 3] = t[3]
            x = t[0]
    return out_arr


def backward_orbit(coeffs, bumps, double x0, Py_ssize_t n, double lo, double hi):
    c_arr, b_arr = _as_arrays(coeffs, bumps)
    cdef const double[::1] c = c_arr
    cdef const double[:, ::1] b = b_arr
    out_arr = np.empty((n + 1, 4))
    cdef double[:, ::1] out = out_arr
    cdef double t[4]
    cdef double x = x0
    cdef Py_ssize_t k
    with nogil:
        for k in range(n + 1):
            _pb_taylor(c, b, x, t)
            out[k, 0] = x
            out[k, 1] = t[1]
            out[k, 2] = t[2]
            out[k, 3] = t[3]
            if k < n:
                x = _pb_invert(c, b, x, lo, hi, x)
    return out_arr


def word_orbit(table, degrees, letters, x):
    cdef const double[:, ::1] tab = np.ascontiguousarray(table, dtype=np.float64)
    cdef const long[::1] deg = np.ascontiguousarray(degrees, dtype=np.int64)
    cdef const long[::1] word = np.ascontiguousarray(letters, dtype=np.int64)
    xs = np.array(x, dtype=np.float64, copy=True).ravel()
    shape = np.shape(x)
    dys = np.ones_like(xs)
    cdef double[::1] y = xs
    cdef double[::1] dy = dys
    cdef Py_ssize_t j, i, s, d, npts = xs.shape[0], nl = word.shape[0], l
    cdef double p0, p1, z
    with nogil:
        for j in range(npts):
            z = y[j]
            for l in range(nl):
                s = word[l]
                d = deg[s]
                p0 = tab[s, d]
                p1 = 0.0
                for i in range(d - 1, -1, -1):
                    p1 = p1 * z + p0
                    p0 = p0 * z + tab[s, i]
                dy[j] *= p1
                z = p0
            y[j] = z
    return xs.reshape(shape), dys.reshape(shape)


def word_orbit_patched(table, degrees, letters, x, dx, start, patched, lo, hi):
    """Resume :func:`word_orbit` per point from ``start`` and stop where a patched letter lands in a support.

    Returns ``(values, derivative, position)``; ``position[j]`` is the index of
    the letter whose base polynomial just moved point ``j`` into one of the
    intervals ``[lo[k], hi[k]]``, or ``len(letters)`` when the word is done.
    """
    cdef const double[:, ::1] tab = np.ascontiguousarray(table, dtype=np.float64)
    cdef const long[::1] deg = np.ascontiguousarray(degrees, dtype=np.int64)
    cdef const long[::1] word = np.ascontiguousarray(letters, dtype=np.int64)
    cdef const long[::1] pat = np.ascontiguousarray(patched, dtype=np.int64)
    cdef const double[::1] slo = np.ascontiguousarray(lo, dtype=np.float64)
    cdef const double[::1] shi = np.ascontiguousarray(hi, dtype=np.float64)
    xs = np.array(x, dtype=np.float64, copy=True).ravel()
    dys = np.array(dx, dtype=np.float64, copy=True).ravel()
    poss = np.array(start, dtype=np.int64, copy=True).ravel()
    cdef double[::1] y = xs
    cdef double[::1] dy = dys
    cdef long[::1] pos = poss
    cdef Py_ssize_t j, i, s, d, k, l, npts = xs.shape[0], nl = word.shape[0], ns = slo.shape[0]
    cdef double p0, p1, z, dz
    cdef bint hit
    with nogil:
        for j in range(npts):
            z = y[j]
            dz = dy[j]
            l = pos[j]
            hit = False
            while l < nl:
                s = word[l]
                d = deg[s]
                p0 = tab[s, d]
                p1 = 0.0
                for i in range(d - 1, -1, -1):
                    p1 = p1 * z + p0
                    p0 = p0 * z + tab[s, i]
                dz *= p1
                z = p0
                if pat[s]:
                    for k in range(ns):
                        if slo[k] <= z <= shi[k]:
                            hit = True
                            break
                if hit:
                    break
                l += 1
            y[j] = z
            dy[j] = dz
            pos[j] = l
    return xs, dys, poss


def series_compose(f, g):
    cdef const double[::1] fv = np.ascontiguousarray(f, dtype=np.float64)
    cdef const double[::1] gv = np.ascontiguousarray(g, dtype=np.float64)
    cdef Py_ssize_t r = fv.shape[0] - 1
    cdef Py_ssize_t i, j, k
    out_arr = np.zeros(r + 1)
    cdef double[::1] out = out_arr
    cdef double p[32]
    cdef double q[32]
    if r >= 32:
        raise ValueError("series order too large for compiled kernel")
    for i in range(r + 1):
        p[i] = 0.0
    p[0] = 1.0
    out[0] = fv[0]
    for j in range(1, r + 1):
        for i in range(r + 1):
            q[i] = 0.0
        for i in range(r + 1):
            if p[i] == 0.0:
                continue
            for k in range(1, r + 1 - i):
                q[i + k] += p[i] * gv[k]
        for i in range(r + 1):
            p[i] = q[i]
        for i in range(j, r + 1):
            out[i] += fv[j] * p[i]
    return out_arr
