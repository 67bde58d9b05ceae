"""Pure 2-D geometric kernels for constriction measurement.

Circumcircle through three points, point/circle-to-polyline minimum
distances with witness points, and the extended-palatal-trace
construction. The polyline scans are the hot inner loop of track
transformation; a compiled Cython backend is used when available and a
pure NumPy fallback otherwise (set ``TVKIT_PURE_GEOMETRY=1`` to force
the fallback; see ``benchmarks/bench_geometry.py`` for the comparison).
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from ..artic_io import PalatalTrace

if os.environ.get("TVKIT_PURE_GEOMETRY") == "1":
    from . import _pure as _kernels
else:
    try:
        from . import _fastgeom as _kernels  # type: ignore[attr-defined]
    except ImportError:
        from . import _pure as _kernels

__all__ = [
    "Circle",
    "DistanceWitness",
    "CollinearError",
    "backend_name",
    "circumcircle",
    "circumcircle_batch",
    "resample_polyline",
    "point_polyline_distance",
    "circle_polyline_distance",
    "extend_palatal_trace",
]

#: collinearity threshold on |2A| relative to the squared geometry extent
EPS_COLLINEAR = 1e-9


def backend_name() -> str:
    return _kernels.BACKEND


class CollinearError(ValueError):
    """The three points are (numerically) collinear; no circumcircle exists."""


@dataclass(frozen=True)
class Circle:
    center: tuple[float, float]
    radius: float

    def __post_init__(self):
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ValueError(f"radius must be finite and positive, "
                             f"got {self.radius}")
        if not all(map(math.isfinite, self.center)):
            raise ValueError("center must be finite")


@dataclass(frozen=True)
class DistanceWitness:
    """Minimum distance plus the closest-point pair realizing it.

    point_a lies on the queried object (the point itself, or the circle),
    point_b on the polyline.
    """

    distance: float
    point_a: tuple[float, float]
    point_b: tuple[float, float]

    def __post_init__(self):
        gap = math.hypot(self.point_a[0] - self.point_b[0],
                         self.point_a[1] - self.point_b[1])
        if abs(gap - self.distance) > 1e-9:
            raise ValueError(
                f"witness pair is {gap:.12g} mm apart but distance says "
                f"{self.distance:.12g} mm")


def _as_point(p) -> tuple[float, float]:
    x, y = float(p[0]), float(p[1])
    return x, y


def circumcircle(p1, p2, p3) -> Circle:
    """Circle through three points.

    Raises CollinearError when the doubled triangle area is below
    EPS_COLLINEAR times the largest squared pairwise distance, and
    ValueError on non-finite input.
    """
    pts = np.asarray([_as_point(p1), _as_point(p2), _as_point(p3)], dtype=float)
    if not np.isfinite(pts).all():
        raise ValueError("circumcircle input points must be finite")
    # shift to the bounding-box centre for conditioning
    shift = (pts.min(axis=0) + pts.max(axis=0)) / 2.0
    (ax, ay), (bx, by), (cx, cy) = pts - shift
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    d12 = (bx - ax) ** 2 + (by - ay) ** 2
    d13 = (cx - ax) ** 2 + (cy - ay) ** 2
    d23 = (cx - bx) ** 2 + (cy - by) ** 2
    if abs(d) < 2.0 * EPS_COLLINEAR * max(d12, d13, d23):
        raise CollinearError("points are collinear within tolerance")
    a2 = ax * ax + ay * ay
    b2 = bx * bx + by * by
    c2 = cx * cx + cy * cy
    ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d
    uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d
    r = (math.hypot(ux - ax, uy - ay) + math.hypot(ux - bx, uy - by)
         + math.hypot(ux - cx, uy - cy)) / 3.0
    return Circle((float(ux + shift[0]), float(uy + shift[1])), float(r))


def circumcircle_batch(pa, pb, pc):
    """Vectorized circumcircle for (n, 2) point triples.

    Returns (cx, cy, r, ok); rows with collinear or non-finite triples
    have ok=False and NaN outputs.
    """
    pa = np.asarray(pa, float)
    pb = np.asarray(pb, float)
    pc = np.asarray(pc, float)
    stacked = np.stack([pa, pb, pc], axis=1)
    finite = np.isfinite(stacked).all(axis=(1, 2))
    shift = (np.nanmin(stacked, axis=1) + np.nanmax(stacked, axis=1)) / 2.0
    with np.errstate(invalid="ignore", divide="ignore"):
        a = pa - shift
        b = pb - shift
        c = pc - shift
        d = 2.0 * (a[:, 0] * (b[:, 1] - c[:, 1]) + b[:, 0] * (c[:, 1] - a[:, 1])
                   + c[:, 0] * (a[:, 1] - b[:, 1]))
        ext = np.maximum.reduce([((b - a) ** 2).sum(1), ((c - a) ** 2).sum(1),
                                 ((c - b) ** 2).sum(1)])
        ok = finite & (np.abs(d) >= 2.0 * EPS_COLLINEAR * ext)
        a2 = (a ** 2).sum(1)
        b2 = (b ** 2).sum(1)
        c2 = (c ** 2).sum(1)
        ux = (a2 * (b[:, 1] - c[:, 1]) + b2 * (c[:, 1] - a[:, 1])
              + c2 * (a[:, 1] - b[:, 1])) / d
        uy = (a2 * (c[:, 0] - b[:, 0]) + b2 * (a[:, 0] - c[:, 0])
              + c2 * (b[:, 0] - a[:, 0])) / d
        r = (np.hypot(ux - a[:, 0], uy - a[:, 1])
             + np.hypot(ux - b[:, 0], uy - b[:, 1])
             + np.hypot(ux - c[:, 0], uy - c[:, 1])) / 3.0
    cx = np.where(ok, ux + shift[:, 0], np.nan)
    cy = np.where(ok, uy + shift[:, 1], np.nan)
    r = np.where(ok, r, np.nan)
    return cx, cy, r, ok


def resample_polyline(points, resolution_mm: float,
                      with_segments: bool = False):
    """Densify a polyline so consecutive samples are <= resolution_mm apart.

    Every original vertex is kept; each segment is split into
    ceil(length / resolution) equal parts. With ``with_segments`` also
    returns the source segment index of each sample (the final vertex is
    attributed to the last segment).
    """
    if not resolution_mm > 0:
        raise ValueError("resolution_mm must be positive")
    pts = np.asarray(points, float)
    nseg = pts.shape[0] - 1
    chunks = []
    seg_ids = []
    for i in range(nseg):
        a = pts[i]
        b = pts[i + 1]
        n = max(1, int(np.ceil(math.hypot(*(b - a)) / resolution_mm)))
        t = np.arange(n, dtype=float)[:, None] / n
        chunks.append(a + t * (b - a))
        seg_ids.append(np.full(n, i, dtype=np.int64))
    chunks.append(pts[-1:])
    seg_ids.append(np.array([nseg - 1], dtype=np.int64))
    samples = np.ascontiguousarray(np.concatenate(chunks))
    if with_segments:
        return samples, np.concatenate(seg_ids)
    return samples


def _polyline_array(poly) -> np.ndarray:
    pts = poly.points if isinstance(poly, PalatalTrace) else np.asarray(poly, float)
    if pts.shape[0] < 2:
        raise ValueError("polyline needs at least 2 points")
    return np.ascontiguousarray(pts)


def point_polyline_distance(p, poly, resolution_mm: float = 0.05) -> DistanceWitness:
    """Minimum Euclidean distance from a point to a polyline.

    Computed by exact point-to-segment projection per segment;
    resolution_mm is unused and kept for interface symmetry with
    circle_polyline_distance.
    """
    if not resolution_mm > 0:
        raise ValueError("resolution_mm must be positive")
    px, py = _as_point(p)
    if not (math.isfinite(px) and math.isfinite(py)):
        raise ValueError("query point must be finite")
    pts = _polyline_array(poly)
    d, fx, fy = _kernels.point_to_polyline(px, py, pts)
    return DistanceWitness(float(d), (px, py), (float(fx), float(fy)))


def circle_polyline_distance(c: Circle, poly,
                             resolution_mm: float = 0.05) -> DistanceWitness:
    """Minimum distance between a circle and a polyline.

    The polyline is resampled at <= resolution_mm spacing; each sample's
    distance to the circle is the closed-form ``|‖q - center‖ - radius|``.
    When the winning sample coincides with the center the distance is the
    radius and the circle witness sits along the left-hand normal of that
    sample's segment (documented tie-break).
    """
    pts = _polyline_array(poly)
    samples, seg_ids = resample_polyline(pts, resolution_mm, with_segments=True)
    xs = np.ascontiguousarray(samples[:, 0])
    ys = np.ascontiguousarray(samples[:, 1])
    cx, cy = c.center
    d, idx = _kernels.min_abs_to_circle(xs, ys, cx, cy, c.radius)
    qx, qy = float(xs[idx]), float(ys[idx])
    vx, vy = qx - cx, qy - cy
    norm = math.hypot(vx, vy)
    if norm == 0.0:
        seg = int(seg_ids[idx])
        tx, ty = pts[seg + 1] - pts[seg]
        tlen = math.hypot(tx, ty)
        ux, uy = -ty / tlen, tx / tlen  # left-hand normal of the segment
    else:
        ux, uy = vx / norm, vy / norm
    wa = (cx + c.radius * ux, cy + c.radius * uy)
    return DistanceWitness(float(d), wa, (qx, qy))


def extend_palatal_trace(palate: PalatalTrace, wall_x: float, step_mm: float,
                         wall_drop_mm: float = 30.0) -> PalatalTrace:
    """Prolong a hard-palate trace to the anterior pharyngeal wall.

    Continues the direction of the last palate segment in a straight line
    until x reaches wall_x (posterior means smaller x), then descends
    vertically by wall_drop_mm; both parts are sampled at <= step_mm. The
    input points are preserved as a prefix and the result is marked
    extended.
    """
    if palate.extended:
        raise ValueError("palate is already extended")
    if not step_mm > 0:
        raise ValueError("step_mm must be positive")
    if not wall_drop_mm > 0:
        raise ValueError("wall_drop_mm must be positive")
    pts = palate.points
    last = pts[-1]
    seg = last - pts[-2]
    seg_len = math.hypot(*seg)
    ux, uy = seg / seg_len
    if wall_x >= last[0]:
        raise ValueError(
            f"wall_x={wall_x:g} must be posterior to (less than) the last "
            f"palate x={last[0]:g}")
    if ux >= 0:
        raise ValueError("last palate segment points anteriorly; cannot "
                         "reach the pharyngeal wall")
    reach = (wall_x - last[0]) / ux
    n1 = max(1, int(np.ceil(reach / step_mm)))
    t1 = np.arange(1, n1 + 1, dtype=float)[:, None] * (reach / n1)
    soft = last + t1 * np.array([ux, uy])
    soft[-1, 0] = wall_x  # land the junction exactly on the wall
    junction = soft[-1]
    n2 = max(1, int(np.ceil(wall_drop_mm / step_mm)))
    t2 = np.arange(1, n2 + 1, dtype=float)[:, None] * (wall_drop_mm / n2)
    wall = junction - t2 * np.array([0.0, 1.0])
    out = np.concatenate([pts, soft, wall])
    return PalatalTrace(palate.speaker_id, out, extended=True)
