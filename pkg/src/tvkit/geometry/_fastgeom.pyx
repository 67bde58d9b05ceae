# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled geometry kernels; mirrors tvkit.geometry._pure."""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, fabs, sqrt

BACKEND = "compiled"


cdef inline (double, Py_ssize_t) _min_abs_to_circle(
        const double[::1] xs, const double[::1] ys,
        double cx, double cy, double r) noexcept nogil:
    cdef Py_ssize_t i, n = xs.shape[0], besti = 0
    cdef double dx, dy, d2, best = INFINITY, d
    # pass 1: nearest sample to the center (no sqrt)
    for i in range(n):
        dx = xs[i] - cx
        dy = ys[i] - cy
        d2 = dx * dx + dy * dy
        if d2 < best:
            best = d2
            besti = i
    if best >= r * r:
        return sqrt(best) - r, besti
    # some sample is inside the circle: scan |distance - r| directly
    best = INFINITY
    for i in range(n):
        dx = xs[i] - cx
        dy = ys[i] - cy
        d = fabs(sqrt(dx * dx + dy * dy) - r)
        if d < best:
            best = d
            besti = i
    return best, besti


def min_abs_to_circle(const double[::1] xs, const double[::1] ys,
                      double cx, double cy, double r):
    cdef double d
    cdef Py_ssize_t i
    d, i = _min_abs_to_circle(xs, ys, cx, cy, r)
    return d, i


def min_abs_to_circle_batch(const double[::1] xs, const double[::1] ys,
                            const double[::1] cxs, const double[::1] cys,
                            const double[::1] rs):
    cdef Py_ssize_t k, n = cxs.shape[0]
    dists = np.empty(n)
    idxs = np.empty(n, dtype=np.int64)
    cdef double[::1] dv = dists
    cdef long long[::1] iv = idxs
    cdef double d
    cdef Py_ssize_t i
    with nogil:
        for k in range(n):
            d, i = _min_abs_to_circle(xs, ys, cxs[k], cys[k], rs[k])
            dv[k] = d
            iv[k] = i
    return dists, idxs


cdef inline (double, double, double) _point_to_polyline(
        double px, double py, const double[:, ::1] pts) noexcept nogil:
    cdef Py_ssize_t i, n = pts.shape[0]
    cdef double ax, ay, dx, dy, l2, t, fx, fy, d2
    cdef double best = INFINITY, bx = pts[0, 0], by = pts[0, 1]
    for i in range(n - 1):
        ax = pts[i, 0]
        ay = pts[i, 1]
        dx = pts[i + 1, 0] - ax
        dy = pts[i + 1, 1] - ay
        l2 = dx * dx + dy * dy
        t = ((px - ax) * dx + (py - ay) * dy) / l2
        if t < 0.0:
            t = 0.0
        elif t > 1.0:
            t = 1.0
        fx = ax + t * dx
        fy = ay + t * dy
        d2 = (px - fx) * (px - fx) + (py - fy) * (py - fy)
        if d2 < best:
            best = d2
            bx = fx
            by = fy
    return sqrt(best), bx, by


def point_to_polyline(double px, double py, const double[:, ::1] pts):
    cdef double d, bx, by
    d, bx, by = _point_to_polyline(px, py, pts)
    return d, bx, by


def point_to_polyline_batch(const double[::1] pxs, const double[::1] pys,
                            const double[:, ::1] pts):
    cdef Py_ssize_t k, n = pxs.shape[0]
    dists = np.empty(n)
    fxs = np.empty(n)
    fys = np.empty(n)
    cdef double[::1] dv = dists, xv = fxs, yv = fys
    cdef double d, bx, by
    with nogil:
        for k in range(n):
            d, bx, by = _point_to_polyline(pxs[k], pys[k], pts)
            dv[k] = d
            xv[k] = bx
            yv[k] = by
    return dists, fxs, fys
