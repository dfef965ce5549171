"""Mode extraction from the density grid and conversion to image axes.

A grid cell is a peak when it is strictly greater than every other cell in
its non-maximum-suppression window (the theta axis wraps with period pi,
the rho axis clamps at its ends) and reaches a fraction of the global
maximum. Peaks are reported strongest-first; equal scores order by
(rho_bin, theta_bin).

Each peak is then grounded back in the image: the votes whose (rho,
theta) fall within kernel-scaled tolerances of the peak are its support,
and the supporting feature points projected onto the axis line give the
drawn segment's endpoints.
"""

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import maximum_filter

from .errors import ConfigError, DegenerateExtentError, NoEvidenceError
from .features import denormalize_point
from .density import DensityGrid, KernelParams

__all__ = [
    "Peak",
    "SymmetryAxis",
    "find_peaks",
    "supporting_pairs",
    "axis_extent",
    "support_hull",
]


@dataclass(frozen=True)
class Peak:
    """One density mode, located by grid cell and by cell-center value."""

    rho_bin: int
    theta_bin: int
    rho: float
    theta: float
    score: float


@dataclass(frozen=True)
class SymmetryAxis:
    """A detected mirror axis as a drawable segment.

    ``endpoints`` is a (2, 2) array of pixel coordinates, lexicographically
    ordered (x first, then y). theta/rho keep the normalized-frame line
    parameters; ``score`` is the peak density value.
    """

    theta: float
    rho: float
    score: float
    endpoints: np.ndarray
    support_count: int


def find_peaks(
    grid: DensityGrid,
    nms_rho_radius: int = 17,
    nms_theta_radius: int = 5,
    rel_threshold: float = 0.05,
    top_k: int = 5,
) -> list[Peak]:
    """Non-maximum suppression over the density grid.

    Raises :class:`NoEvidenceError` on an all-zero grid. Returns at most
    ``top_k`` peaks, sorted by score descending (ties by ascending
    (rho_bin, theta_bin)).
    """
    if nms_rho_radius < 1 or nms_theta_radius < 1:
        raise ConfigError("suppression radii must be >= 1")
    if not (0.0 <= rel_threshold <= 1.0):
        raise ConfigError(f"rel_threshold must be in [0, 1], got {rel_threshold}")
    if top_k < 1:
        raise ConfigError(f"top_k must be >= 1, got {top_k}")

    values = grid.values
    n_rho, n_theta = values.shape
    global_max = float(values.max())
    if global_max <= 0.0:
        raise NoEvidenceError("density grid is identically zero")

    window = (2 * nms_rho_radius + 1, 2 * nms_theta_radius + 1)
    local_max = maximum_filter(values, size=window, mode=("nearest", "wrap"))
    candidates = np.argwhere(
        (values >= local_max) & (values >= rel_threshold * global_max)
    )

    rho_c = grid.spec.rho_centers()
    theta_c = grid.spec.theta_centers()
    peaks = []
    for ri, ti in candidates:
        r0 = max(0, ri - nms_rho_radius)
        r1 = min(n_rho, ri + nms_rho_radius + 1)
        cols = np.arange(ti - nms_theta_radius, ti + nms_theta_radius + 1) % n_theta
        window_vals = values[r0:r1][:, cols]
        center = values[ri, ti]
        # Strict dominance: the cell must exceed every other cell in its
        # window (its own single occurrence is the only one equal to it).
        if center < window_vals.max() or (window_vals == center).sum() != 1:
            continue
        peaks.append(
            Peak(
                rho_bin=int(ri),
                theta_bin=int(ti),
                rho=float(rho_c[ri]),
                theta=float(theta_c[ti]),
                score=float(center),
            )
        )

    peaks.sort(key=lambda p: (-p.score, p.rho_bin, p.theta_bin))
    return peaks[:top_k]


def supporting_pairs(peak: Peak, cands, params: KernelParams) -> np.ndarray:
    """Indices of votes backing a peak.

    A vote supports a peak when its weight is positive, its rho lies
    within two bandwidths of the peak's, and its doubled angle lies within
    2 / sqrt(k) of the peak's on the circle (every angle qualifies when
    k = 0, where the circular kernel is uniform).
    """
    rho_tol = 2.0 * params.g
    mask = (np.asarray(cands.weight) > 0.0) & (
        np.abs(np.asarray(cands.rho) - peak.rho) <= rho_tol
    )
    if params.k > 0.0:
        ang_tol = 2.0 / np.sqrt(params.k)
        delta = np.mod(
            2.0 * (np.asarray(cands.theta) - peak.theta) + np.pi, 2.0 * np.pi
        ) - np.pi
        mask &= np.abs(delta) <= ang_tol
    return np.flatnonzero(mask)


def _support_positions(support: np.ndarray, cands, features) -> np.ndarray:
    """Positions of every feature involved in the supporting votes."""
    idx = np.unique(
        np.concatenate([
            np.asarray(cands.pair_i)[support],
            np.asarray(cands.pair_j)[support],
        ])
    )
    return np.array([features[i].pos for i in idx])


def axis_extent(
    peak: Peak,
    support: np.ndarray,
    cands,
    features,
    width: int,
    height: int,
) -> SymmetryAxis:
    """Clip the infinite peak line to the span of its supporting features.

    Supporting feature points are projected onto the line; the two extreme
    projections, mapped back to pixel coordinates, bound the drawn
    segment. Raises :class:`DegenerateExtentError` when the projections
    collapse to a point.
    """
    if support.size == 0:
        raise DegenerateExtentError("peak has no supporting votes")
    pos = _support_positions(support, cands, features)

    normal = np.array([np.cos(peak.theta), np.sin(peak.theta)])
    tangent = np.array([-np.sin(peak.theta), np.cos(peak.theta)])
    proj = pos @ tangent
    s_min, s_max = float(proj.min()), float(proj.max())
    if s_max - s_min < 1e-12:
        raise DegenerateExtentError("supporting features project to a point")

    foot = peak.rho * normal
    ends_norm = np.array([foot + s_min * tangent, foot + s_max * tangent])
    ends_px = np.array([denormalize_point(e, width, height) for e in ends_norm])
    order = np.lexsort((ends_px[:, 1], ends_px[:, 0]))
    return SymmetryAxis(
        theta=peak.theta,
        rho=peak.rho,
        score=peak.score,
        endpoints=ends_px[order],
        support_count=int(support.size),
    )


def support_hull(support: np.ndarray, cands, features) -> np.ndarray:
    """Convex hull (monotone chain) of the supporting feature positions,
    in normalized coordinates; used only for overlay rendering."""
    pos = _support_positions(support, cands, features)
    pts = sorted(map(tuple, pos))
    if len(pts) <= 2:
        return np.array(pts)

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])
