"""Shared synthetic inputs and independent numerical oracles."""

import numpy as np
import pytest
from scipy.ndimage import gaussian_filter


def smooth_texture(size, seed=7, sigma=2.0):
    """Random texture with energy at the filter-bank wavelengths."""
    rng = np.random.default_rng(seed)
    tex = gaussian_filter(rng.random((size, size)), sigma)
    tex -= tex.min()
    tex /= tex.max()
    return tex


def mirrored_texture(size=256, seed=7):
    """Texture mirrored about its vertical midline (axis at x = size/2)."""
    tex = smooth_texture(size, seed=seed)
    half = tex[:, : size // 2]
    return np.concatenate([half, half[:, ::-1]], axis=1)


def fourfold_texture(size=256, seed=7):
    """Texture mirrored about both midlines (vertical and horizontal axes)."""
    tex = smooth_texture(size, seed=seed)
    q = tex[: size // 2, : size // 2]
    top = np.concatenate([q, q[:, ::-1]], axis=1)
    return np.concatenate([top, top[::-1, :]], axis=0)


def bessel_i0_series(x: float) -> float:
    """Power-series oracle sum_m (x/2)^(2m) / (m!)^2, summed to convergence.

    Thirty terms suffice below x ~ 10; larger arguments need terms out to
    roughly x, so the loop runs until the term underflows relative to the
    partial sum. Terms are built recursively to avoid factorial overflow.
    """
    term, total, m = 1.0, 1.0, 0
    while True:
        m += 1
        term *= (x / 2.0) ** 2 / m ** 2
        total += term
        if term < total * 1e-18 or m > 5000:
            return total


def vmf_quadrature_mass(k: float, n_points: int = 100_001) -> float:
    """Trapezoid integral of the normalized circular kernel over one turn."""
    phi = np.linspace(0.0, 2.0 * np.pi, n_points)
    density = np.exp(k * (np.cos(phi) - 1.0)) * np.exp(k) \
        / (2.0 * np.pi * bessel_i0_series(k))
    return float(np.trapezoid(density, phi))


def naive_joint_density(cands, x: float, theta: float, g: float, k: float) -> float:
    """Direct per-vote sum of the joint kernel density at one point,
    written with scalar math and the series Bessel normalizer."""
    import math

    n = len(cands)
    c_norm = 1.0 / (2.0 * math.pi * bessel_i0_series(k))
    cy, sy = math.cos(2.0 * theta), math.sin(2.0 * theta)
    total = 0.0
    for i in range(n):
        gauss = math.exp(-0.5 * ((x - float(cands.rho[i])) / g) ** 2) \
            / math.sqrt(2.0 * math.pi)
        dot = cy * math.cos(2.0 * float(cands.theta[i])) \
            + sy * math.sin(2.0 * float(cands.theta[i]))
        total += float(cands.weight[i]) * gauss * math.exp(k * dot)
    return c_norm / (n * g) * total


@pytest.fixture(scope="session")
def mirror_image_256():
    return mirrored_texture(256)


@pytest.fixture(scope="session")
def fourfold_image_256():
    return fourfold_texture(256)


def segment(cx, cy, angle_deg, length):
    """Pixel-space segment of given center, direction (degrees), length."""
    phi = np.radians(angle_deg)
    half = 0.5 * length * np.array([np.cos(phi), np.sin(phi)])
    center = np.array([cx, cy], dtype=np.float64)
    return np.array([center - half, center + half])


def toy_benchmark():
    """Three hand-counted images exercising every matching rule.

    Image 1 (two perpendicular truths): an exact vertical hit (0.95), a
    near-duplicate that clustering removes (0.90), and a 10.1-degree
    impostor that is outside the angle tolerance (0.70) -> TP 1, FP 1,
    FN 1 (the horizontal truth).

    Image 2 (two vertical truths): detections at +9.9 and -9.9 degrees
    both match the first truth; they sit 19.8 degrees apart so clustering
    keeps both -> TP 2, FN 1 (the second truth).

    Image 3: two truths, no detections -> FN 2.

    Full-sweep totals: TP 3, FP 1, FN 4.
    """
    from symkde import Detection, GtAxis

    img1 = (
        [
            Detection(endpoints=segment(100, 100, 90, 160), score=0.95),
            Detection(endpoints=segment(103, 100, 90, 150), score=0.90),
            Detection(endpoints=segment(100, 100, 90 - 10.1, 160), score=0.70),
        ],
        [
            GtAxis(endpoints=segment(100, 100, 90, 160)),
            GtAxis(endpoints=segment(100, 100, 0, 160)),
        ],
    )
    img2 = (
        [
            Detection(endpoints=segment(60, 100, 90 - 9.9, 160), score=0.85),
            Detection(endpoints=segment(60, 100, 90 + 9.9, 160), score=0.80),
        ],
        [
            GtAxis(endpoints=segment(60, 100, 90, 160)),
            GtAxis(endpoints=segment(160, 100, 90, 140)),
        ],
    )
    img3 = (
        [],
        [
            GtAxis(endpoints=segment(50, 50, 0, 80)),
            GtAxis(endpoints=segment(50, 50, 90, 80)),
        ],
    )
    return [img1, img2, img3]
