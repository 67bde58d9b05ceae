"""Per-frame tract variables from pellet positions and a palatal trace.

Six TVs are produced: lip aperture (LA) and protrusion (LP), tongue-body
constriction degree/location (TBCD/TBCL) from a circle fitted through
T2/T3/T4 against the extended palatal trace, and tongue-tip constriction
degree/location (TTCD/TTCL) from T1 against the same trace. Location TVs
carry a leading minus, so posterior (negative-x) constrictions come out
positive.

Variants: ``proposed`` reads LP off the lower lip, ``baseline`` off the
upper lip. The baseline's own tongue-body location formula is not
restated in this toolkit, so the two variants differ in LP only.

Mistracked pellets yield NaN for exactly the TVs that depend on them;
the other TVs of the same frame are unaffected.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .artic_io import PalatalTrace, PelletId, PelletTrack, TvTrack
from . import geometry
from .geometry import CollinearError, circumcircle, circumcircle_batch

__all__ = ["TvConfig", "compute_la", "compute_lp", "compute_tongue_body",
           "compute_tongue_tip", "compute_tv_track"]

COLLINEAR_POLICIES = ("emit-sentinel", "polyline-fallback")

_UL = PelletId.UL.value
_LL = PelletId.LL.value
_T1 = PelletId.T1.value
_T2 = PelletId.T2.value
_T3 = PelletId.T3.value
_T4 = PelletId.T4.value


@dataclass(frozen=True)
class TvConfig:
    variant: str = "proposed"
    resolution_mm: float = 0.05
    collinear_policy: str = "polyline-fallback"

    def __post_init__(self):
        if self.variant not in ("baseline", "proposed"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if not self.resolution_mm > 0:
            raise ValueError("resolution_mm must be positive")
        if self.collinear_policy not in COLLINEAR_POLICIES:
            raise ValueError(f"collinear_policy must be one of "
                             f"{COLLINEAR_POLICIES}")


def _finite(*points) -> bool:
    return all(math.isfinite(c) for p in points for c in (p[0], p[1]))


def compute_la(ul, ll) -> float:
    """Lip aperture: Euclidean distance between the lip pellets."""
    if not _finite(ul, ll):
        return math.nan
    return math.hypot(ul[0] - ll[0], ul[1] - ll[1])


def compute_lp(ul, ll, variant: str = "proposed") -> float:
    """Lip protrusion: horizontal lip offset from the Y axis.

    The proposed transformation reads the lower lip, the baseline the
    upper lip.
    """
    p = ll if variant == "proposed" else ul
    if not _finite(p):
        return math.nan
    return float(p[0])


def _require_extended(epal: PalatalTrace):
    if not epal.extended:
        raise ValueError("palatal trace must be extended "
                         "(see geometry.extend_palatal_trace)")


def _tongue_polyline_min(tongue_pts: np.ndarray, epal: PalatalTrace,
                         resolution_mm: float) -> tuple[float, float]:
    """Collinear fallback: nearest approach of the T2-T3-T4 polyline to
    the palate, sampled on the tongue side, exact on the palate side."""
    keep = [0]
    for i in range(1, len(tongue_pts)):
        if not np.array_equal(tongue_pts[i], tongue_pts[keep[-1]]):
            keep.append(i)
    tongue = tongue_pts[keep]
    if len(tongue) == 1:
        w = geometry.point_polyline_distance(tongue[0], epal, resolution_mm)
        return w.distance, -w.point_a[0]
    samples = geometry.resample_polyline(tongue, resolution_mm)
    d, _, _ = _best_point_to_polyline(samples, epal.points)
    i = int(np.argmin(d))
    return float(d[i]), -float(samples[i, 0])


def _best_point_to_polyline(samples, pts):
    from .geometry import _kernels
    xs = np.ascontiguousarray(samples[:, 0])
    ys = np.ascontiguousarray(samples[:, 1])
    return _kernels.point_to_polyline_batch(xs, ys, np.ascontiguousarray(pts))


def compute_tongue_body(t2, t3, t4, epal: PalatalTrace,
                        cfg: TvConfig = TvConfig()) -> tuple[float, float]:
    """(TBCD, TBCL): minimum circle-to-palate distance and minus the x of
    the circle-side witness point."""
    _require_extended(epal)
    if not _finite(t2, t3, t4):
        return math.nan, math.nan
    try:
        circle = circumcircle(t2, t3, t4)
    except CollinearError:
        if cfg.collinear_policy == "emit-sentinel":
            return math.nan, math.nan
        return _tongue_polyline_min(np.asarray([t2, t3, t4], float), epal,
                                    cfg.resolution_mm)
    w = geometry.circle_polyline_distance(circle, epal, cfg.resolution_mm)
    return w.distance, -w.point_a[0]


def compute_tongue_tip(t1, epal: PalatalTrace,
                       cfg: TvConfig = TvConfig()) -> tuple[float, float]:
    """(TTCD, TTCL): minimum T1-to-palate distance and minus T1's x."""
    _require_extended(epal)
    if not _finite(t1):
        return math.nan, math.nan
    w = geometry.point_polyline_distance(t1, epal, cfg.resolution_mm)
    return w.distance, -float(t1[0])


def compute_tv_track(track: PelletTrack, epal: PalatalTrace,
                     cfg: TvConfig = TvConfig()) -> TvTrack:
    """Frame-wise TV computation over a whole pellet track.

    Output rate, length and timing equal the input's; the variant is
    recorded for provenance. Sentinels propagate per frame and per TV
    group (lips / tongue body / tongue tip independently).
    """
    _require_extended(epal)
    if track.n_frames == 0:
        raise ValueError("pellet track is empty")
    from .geometry import _kernels

    pos = track.positions
    n = track.n_frames
    ul = pos[:, _UL]
    ll = pos[:, _LL]
    t1 = pos[:, _T1]

    la = np.hypot(ul[:, 0] - ll[:, 0], ul[:, 1] - ll[:, 1])
    lp = (ll if cfg.variant == "proposed" else ul)[:, 0].copy()
    ttcl = -t1[:, 0]

    # tongue tip: exact per-segment scan for the valid frames only
    ttcd = np.full(n, np.nan)
    t1_ok = np.isfinite(t1).all(axis=1)
    if t1_ok.any():
        d, _, _ = _best_point_to_polyline(t1[t1_ok], epal.points)
        ttcd[t1_ok] = d

    # tongue body: one palate resampling shared by every frame
    tbcd = np.full(n, np.nan)
    tbcl = np.full(n, np.nan)
    cx, cy, r, ok = circumcircle_batch(pos[:, _T2], pos[:, _T3], pos[:, _T4])
    if ok.any():
        samples, seg_ids = geometry.resample_polyline(
            epal.points, cfg.resolution_mm, with_segments=True)
        xs = np.ascontiguousarray(samples[:, 0])
        ys = np.ascontiguousarray(samples[:, 1])
        d, idx = _kernels.min_abs_to_circle_batch(
            xs, ys, np.ascontiguousarray(cx[ok]),
            np.ascontiguousarray(cy[ok]), np.ascontiguousarray(r[ok]))
        qx = xs[idx]
        qy = ys[idx]
        vx = qx - cx[ok]
        vy = qy - cy[ok]
        norm = np.hypot(vx, vy)
        degenerate = norm == 0.0
        if degenerate.any():
            # palate sample on the circle center: left-normal tie-break
            segs = seg_ids[idx[degenerate]]
            a = epal.points[segs]
            b = epal.points[segs + 1]
            tx, ty = (b - a).T
            tlen = np.hypot(tx, ty)
            vx[degenerate] = -ty / tlen
            vy[degenerate] = tx / tlen
            norm[degenerate] = 1.0
        wx = cx[ok] + r[ok] * (vx / norm)
        tbcd[ok] = d
        tbcl[ok] = -wx

    collinear = ~ok & np.isfinite(pos[:, [_T2, _T3, _T4]]).all(axis=(1, 2))
    if collinear.any() and cfg.collinear_policy == "polyline-fallback":
        for i in np.nonzero(collinear)[0]:
            tbcd[i], tbcl[i] = _tongue_polyline_min(
                pos[i, [_T2, _T3, _T4]], epal, cfg.resolution_mm)

    values = np.stack([la, lp, tbcl, tbcd, ttcl, ttcd], axis=1)
    return TvTrack(track.speaker_id, track.utterance_id, track.rate_hz,
                   cfg.variant, values, t0=track.t0)
