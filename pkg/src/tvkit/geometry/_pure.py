"""Pure NumPy geometry kernels (fallback for the compiled extension).

Both backends expose the same three functions over contiguous float64
arrays; tvkit.geometry picks one at import time.
"""
from __future__ import annotations

import numpy as np

BACKEND = "pure"


def min_abs_to_circle(xs, ys, cx, cy, r):
    """Minimum of ``| hypot(x - cx, y - cy) - r |`` over the samples.

    Returns (distance, argmin index). Fast path: when every sample lies on
    or outside the circle the argmin of the squared center distance wins.
    """
    dx = xs - cx
    dy = ys - cy
    d2 = dx * dx + dy * dy
    i = int(np.argmin(d2))
    if d2[i] >= r * r:
        return float(np.sqrt(d2[i]) - r), i
    d = np.abs(np.sqrt(d2) - r)
    i = int(np.argmin(d))
    return float(d[i]), i


def min_abs_to_circle_batch(xs, ys, cxs, cys, rs):
    """min_abs_to_circle against one sample set for many circles.

    Expands ``|q - c|^2`` so the cross term becomes one BLAS matmul per
    chunk of circles; only circles that intersect the sample set fall
    back to the per-circle scan.
    """
    n = len(cxs)
    dists = np.empty(n)
    idxs = np.empty(n, dtype=np.int64)
    samples = np.stack([xs, ys], axis=1)
    s2 = xs * xs + ys * ys
    chunk = max(1, int(4e6) // max(1, len(xs)))
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        centers = np.stack([cxs[lo:hi], cys[lo:hi]], axis=0)
        d2 = s2[:, None] - 2.0 * (samples @ centers)
        best = np.argmin(d2, axis=0)
        cols = np.arange(hi - lo)
        c2 = cxs[lo:hi] ** 2 + cys[lo:hi] ** 2
        mind2 = np.maximum(d2[best, cols] + c2, 0.0)
        dists[lo:hi] = np.sqrt(mind2) - rs[lo:hi]
        idxs[lo:hi] = best
        inside = mind2 < rs[lo:hi] ** 2
        for k in np.nonzero(inside)[0]:
            dists[lo + k], idxs[lo + k] = min_abs_to_circle(
                xs, ys, cxs[lo + k], cys[lo + k], rs[lo + k])
    return dists, idxs


def _segment_geometry(pts):
    ax = pts[:-1, 0]
    ay = pts[:-1, 1]
    dx = pts[1:, 0] - ax
    dy = pts[1:, 1] - ay
    return ax, ay, dx, dy, dx * dx + dy * dy


def point_to_polyline(px, py, pts):
    """Exact minimum distance from a point to a polyline's segments.

    Returns (distance, foot_x, foot_y); the foot is the closest point on
    the polyline.
    """
    ax, ay, dx, dy, l2 = _segment_geometry(pts)
    t = np.clip(((px - ax) * dx + (py - ay) * dy) / l2, 0.0, 1.0)
    fx = ax + t * dx
    fy = ay + t * dy
    d2 = (px - fx) ** 2 + (py - fy) ** 2
    i = int(np.argmin(d2))
    return float(np.sqrt(d2[i])), float(fx[i]), float(fy[i])


def point_to_polyline_batch(pxs, pys, pts):
    """point_to_polyline for many query points against one polyline."""
    ax, ay, dx, dy, l2 = _segment_geometry(pts)
    n = len(pxs)
    dists = np.empty(n)
    fxs = np.empty(n)
    fys = np.empty(n)
    for k in range(n):
        t = np.clip(((pxs[k] - ax) * dx + (pys[k] - ay) * dy) / l2, 0.0, 1.0)
        fx = ax + t * dx
        fy = ay + t * dy
        d2 = (pxs[k] - fx) ** 2 + (pys[k] - fy) ** 2
        i = int(np.argmin(d2))
        dists[k] = np.sqrt(d2[i])
        fxs[k] = fx[i]
        fys[k] = fy[i]
    return dists, fxs, fys
