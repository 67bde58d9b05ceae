"""Independent brute-force oracles used to check the library.

Everything here deliberately avoids the library's own algorithms:
distances come from dense sampling, circle minima from angle-grid
snapping, spectra from direct DFT summation, and interpolation from
scipy. Keep it that way; the whole point is a second route to the same
numbers.
"""
import numpy as np
import scipy.interpolate


def densify_polyline(points, spacing):
    """All polyline vertices plus per-segment uniform samples <= spacing apart."""
    pts = np.asarray(points, float)
    chunks = []
    for a, b in zip(pts[:-1], pts[1:]):
        n = max(1, int(np.ceil(np.hypot(*(b - a)) / spacing)))
        t = np.arange(n, dtype=float)[:, None] / n
        chunks.append(a + t * (b - a))
    chunks.append(pts[-1:])
    return np.concatenate(chunks)


def brute_point_polyline(p, points, spacing=1e-4):
    """Min distance from p to a polyline densified at `spacing`."""
    dense = densify_polyline(points, spacing)
    d = np.hypot(dense[:, 0] - p[0], dense[:, 1] - p[1])
    i = int(np.argmin(d))
    return float(d[i]), dense[i]


def brute_circle_polyline(center, radius, points, spacing=1e-4,
                          n_circle=100_000):
    """Min distance between an n_circle-point circle grid and a polyline
    densified at `spacing`.

    For each polyline sample the nearest grid angle is found by snapping
    the sample's bearing, which is the exact minimum over the angular
    grid (chord distance is monotone in the angular offset).
    """
    dense = densify_polyline(points, spacing)
    step = 2.0 * np.pi / n_circle
    best = np.inf
    best_pair = None
    for lo in range(0, len(dense), 200_000):
        q = dense[lo:lo + 200_000]
        dx = q[:, 0] - center[0]
        dy = q[:, 1] - center[1]
        alpha = np.arctan2(dy, dx)
        j = np.floor(alpha / step)
        for jj in (j, j + 1):
            ang = jj * step
            gx = center[0] + radius * np.cos(ang)
            gy = center[1] + radius * np.sin(ang)
            d = np.hypot(q[:, 0] - gx, q[:, 1] - gy)
            i = int(np.argmin(d))
            if d[i] < best:
                best = float(d[i])
                best_pair = ((float(gx[i]), float(gy[i])),
                             (float(q[i, 0]), float(q[i, 1])))
    return best, best_pair


def grid_search_circumcenter(p1, p2, p3, levels=6, half_width=None):
    """Coarse-to-fine grid minimizer of the max deviation among the three
    point-to-center radii; returns (center, spread_at_optimum)."""
    pts = np.asarray([p1, p2, p3], float)
    center = pts.mean(axis=0)
    if half_width is None:
        half_width = 4.0 * np.ptp(pts, axis=0).max() + 1.0
    for _ in range(levels):
        gx = np.linspace(center[0] - half_width, center[0] + half_width, 21)
        gy = np.linspace(center[1] - half_width, center[1] + half_width, 21)
        cx, cy = np.meshgrid(gx, gy)
        radii = np.stack([np.hypot(cx - x, cy - y) for x, y in pts])
        spread = radii.max(axis=0) - radii.min(axis=0)
        i, j = np.unravel_index(np.argmin(spread), spread.shape)
        center = np.array([cx[i, j], cy[i, j]])
        half_width = half_width * 2 / 20  # keep neighbours of the best cell
    radii = np.hypot(pts[:, 0] - center[0], pts[:, 1] - center[1])
    return center, float(radii.max() - radii.min())


def direct_power_spectrum(frame, fft_size):
    """Magnitude-squared spectrum by explicit DFT summation (zero-padded)."""
    n = len(frame)
    k = np.arange(fft_size // 2 + 1)
    angles = -2.0j * np.pi * np.outer(k, np.arange(n)) / fft_size
    return np.abs(np.exp(angles) @ frame) ** 2


def reference_linear_interp(src_t, values, dst_t):
    """scipy piecewise-linear reference, clamped at the support edges."""
    f = scipy.interpolate.interp1d(src_t, values, kind="linear",
                                   bounds_error=False,
                                   fill_value=(values[0], values[-1]))
    return f(dst_t)


def pearson_naive(x, y):
    """Textbook two-pass Pearson correlation, no pairwise deletion."""
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    mx, my = x.mean(), y.mean()
    num = ((x - mx) * (y - my)).sum()
    den = np.sqrt(((x - mx) ** 2).sum() * ((y - my) ** 2).sum())
    return num / den
