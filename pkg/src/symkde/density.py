"""Weighted kernel density over axis space: linear in rho, circular in theta.

The vote set defines a density on a cylinder: a Gaussian kernel of
bandwidth ``g`` smooths the signed distances rho, and a von Mises-Fisher
kernel of concentration ``k`` smooths the normal angles. Because an axis
orientation is only defined modulo pi, angles are doubled before embedding
on the unit circle: theta -> (cos 2 theta, sin 2 theta). The joint density
at a cylinder point (x, y) is

    f(x, y) = C(k) / (N g) * sum_n w_n * G((x - rho_n) / g) * exp(k y.mu_n)

with G the standard normal kernel, mu_n the embedded vote angle, w_n the
normalized weights (summing to N), and C(k) = 1 / (2 pi I0(k)) the
circular normalizer built from the modified Bessel function I0. It
integrates to one over (x on the rho range) x (the doubled-angle circle).

To stay finite at large concentrations the evaluator never forms
exp(k * dot) directly; it computes exp(k * (dot - 1)) <= 1 and folds the
factor exp(k) into the normalizer via the exponentially scaled Bessel
function, so nothing exceeds O(sqrt(k)).

Evaluation on the default 800 x 180 grid reduces to a dense matrix
product per block of votes; blocks and row-bands are fixed sizes, so
results are bit-identical regardless of the worker-thread count.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import i0 as _scipy_i0
from scipy.special import i0e as _scipy_i0e

from .errors import ConfigError, NoEvidenceError

__all__ = [
    "RHO_MAX",
    "KernelParams",
    "GridSpec",
    "DensityGrid",
    "gaussian_kernel",
    "bessel_i0",
    "vmf_kernel",
    "vmf_norm_const",
    "scaled_vmf_norm_const",
    "embed_angle",
    "rho_bin_centers",
    "theta_bin_centers",
    "evaluate_joint_density",
    "linear_density",
    "directional_density",
]

# Signed distances of axes through the unit normalized frame never exceed
# half its diagonal.
RHO_MAX = float(np.sqrt(2.0) / 2.0)

# Fixed work-partition sizes. They shape the blocked matrix products and
# therefore the floating-point evaluation order; keeping them constant
# (rather than derived from the worker count) makes results bit-identical
# at any parallelism level.
_VOTE_BLOCK = 8192
_ROW_BAND = 128


@dataclass(frozen=True)
class KernelParams:
    """Smoothing parameters: Gaussian bandwidth g, circular concentration k."""

    g: float = 0.03
    k: float = 40.0

    def __post_init__(self):
        if not (self.g > 0.0):
            raise ConfigError(f"bandwidth g must be > 0, got {self.g}")
        if not (0.0 <= self.k <= 500.0):
            raise ConfigError(f"concentration k must be in [0, 500], got {self.k}")


@dataclass(frozen=True)
class GridSpec:
    """Cell counts of the evaluation grid over [-RHO_MAX, RHO_MAX) x [0, pi)."""

    n_rho: int = 800
    n_theta: int = 180

    def __post_init__(self):
        if self.n_rho < 2 or self.n_theta < 2:
            raise ConfigError(
                f"grid must be at least 2x2, got {self.n_rho}x{self.n_theta}"
            )

    @property
    def rho_width(self) -> float:
        return 2.0 * RHO_MAX / self.n_rho

    @property
    def theta_width(self) -> float:
        return np.pi / self.n_theta

    def rho_centers(self) -> np.ndarray:
        return rho_bin_centers(self.n_rho)

    def theta_centers(self) -> np.ndarray:
        return theta_bin_centers(self.n_theta)


@dataclass(frozen=True)
class DensityGrid:
    """Joint density sampled at cell centers: rows are rho bins, columns
    are theta bins."""

    values: np.ndarray
    spec: GridSpec
    params: KernelParams = field(default_factory=KernelParams)


def rho_bin_centers(n_bins: int) -> np.ndarray:
    """Centers of n_bins equal cells spanning [-RHO_MAX, RHO_MAX]."""
    width = 2.0 * RHO_MAX / n_bins
    return -RHO_MAX + (np.arange(n_bins) + 0.5) * width


def theta_bin_centers(n_bins: int) -> np.ndarray:
    """Centers of n_bins equal cells spanning [0, pi)."""
    width = np.pi / n_bins
    return (np.arange(n_bins) + 0.5) * width


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

def gaussian_kernel(u):
    """Standard normal kernel G(u) = exp(-u^2 / 2) / sqrt(2 pi)."""
    u = np.asarray(u, dtype=np.float64)
    out = np.exp(-0.5 * u * u) / np.sqrt(2.0 * np.pi)
    return out if out.ndim else float(out)


def bessel_i0(k):
    """Modified Bessel function of the first kind, order zero."""
    out = _scipy_i0(np.asarray(k, dtype=np.float64))
    return out if out.ndim else float(out)


def vmf_kernel(dot, k: float):
    """Unnormalized circular kernel exp(k * dot), dot = cosine similarity."""
    dot = np.asarray(dot, dtype=np.float64)
    out = np.exp(k * dot)
    return out if out.ndim else float(out)


def vmf_norm_const(k: float) -> float:
    """Circular normalizer C(k) = 1 / (2 pi I0(k))."""
    return 1.0 / (2.0 * np.pi * bessel_i0(k))


def scaled_vmf_norm_const(k: float) -> float:
    """exp(k) * C(k), computed without overflow via the exponentially
    scaled Bessel function: exp(k) / (2 pi I0(k)) = 1 / (2 pi i0e(k))."""
    return float(1.0 / (2.0 * np.pi * _scipy_i0e(k)))


def embed_angle(theta):
    """Embed an orientation (mod pi) on the unit circle by angle doubling:
    theta -> (cos 2 theta, sin 2 theta). Accepts scalars or arrays; the
    pair goes into the last axis."""
    theta = np.asarray(theta, dtype=np.float64)
    return np.stack([np.cos(2.0 * theta), np.sin(2.0 * theta)], axis=-1)


# ---------------------------------------------------------------------------
# density evaluation
# ---------------------------------------------------------------------------

def _require_normalized(cands) -> int:
    n = len(cands)
    if n == 0:
        raise NoEvidenceError("empty candidate set")
    if not getattr(cands, "normalized", False):
        raise ValueError("candidate weights must be normalized (sum to N) first")
    return n


def evaluate_joint_density(
    cands,
    spec: GridSpec | None = None,
    params: KernelParams | None = None,
    workers: int = 1,
) -> DensityGrid:
    """Evaluate the joint density at every cell center of the grid.

    Votes are consumed in fixed-size blocks; within a block, fixed
    row-bands of the grid are independent and may be computed by worker
    threads. Band results land in disjoint slices and blocks accumulate in
    a fixed order, so output bits do not depend on ``workers``.
    """
    spec = spec or GridSpec()
    params = params or KernelParams()
    n = _require_normalized(cands)
    if workers < 1:
        raise ConfigError(f"workers must be >= 1, got {workers}")

    g, k = params.g, params.k
    rho_c = spec.rho_centers()
    theta_c = spec.theta_centers()
    cos_grid = np.cos(2.0 * theta_c)
    sin_grid = np.sin(2.0 * theta_c)

    cos_mu = np.cos(2.0 * cands.theta)
    sin_mu = np.sin(2.0 * cands.theta)
    rho_n = np.asarray(cands.rho, dtype=np.float64)
    w_n = np.asarray(cands.weight, dtype=np.float64)

    prefactor = scaled_vmf_norm_const(k) / (n * g * np.sqrt(2.0 * np.pi))
    values = np.zeros((spec.n_rho, spec.n_theta))
    bands = [
        (r0, min(r0 + _ROW_BAND, spec.n_rho))
        for r0 in range(0, spec.n_rho, _ROW_BAND)
    ]

    def run_block(lo: int, hi: int, pool) -> None:
        # Angular factor once per block: exp(k (dot - 1)) stays in (0, 1].
        dot = np.outer(cos_mu[lo:hi], cos_grid) + np.outer(sin_mu[lo:hi], sin_grid)
        ang = np.exp(k * (dot - 1.0))
        wb, rb = w_n[lo:hi], rho_n[lo:hi]

        def band(r0: int, r1: int) -> None:
            u = (rho_c[r0:r1][None, :] - rb[:, None]) / g
            lin = wb[:, None] * np.exp(-0.5 * u * u)
            values[r0:r1] += lin.T @ ang

        if pool is None:
            for r0, r1 in bands:
                band(r0, r1)
        else:
            list(pool.map(lambda b: band(*b), bands))

    blocks = range(0, len(cands), _VOTE_BLOCK)
    if workers == 1:
        for lo in blocks:
            run_block(lo, min(lo + _VOTE_BLOCK, len(cands)), None)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for lo in blocks:
                run_block(lo, min(lo + _VOTE_BLOCK, len(cands)), pool)

    values *= prefactor
    return DensityGrid(values=values, spec=spec, params=params)


def linear_density(cands, n_bins: int = 800, g: float = 0.03) -> np.ndarray:
    """Gaussian-smoothed marginal over rho at the bin centers of
    :func:`rho_bin_centers`; integrates to one over the rho range."""
    n = _require_normalized(cands)
    if not (g > 0.0):
        raise ConfigError(f"bandwidth g must be > 0, got {g}")
    centers = rho_bin_centers(n_bins)
    u = (centers[None, :] - np.asarray(cands.rho)[:, None]) / g
    contrib = np.asarray(cands.weight)[:, None] * np.exp(-0.5 * u * u)
    return contrib.sum(axis=0) / (n * g * np.sqrt(2.0 * np.pi))


def directional_density(cands, n_bins: int = 180, k: float = 40.0) -> np.ndarray:
    """Circular-smoothed marginal over theta at the bin centers of
    :func:`theta_bin_centers`; integrates to one over the doubled-angle
    circle."""
    n = _require_normalized(cands)
    if not (0.0 <= k <= 500.0):
        raise ConfigError(f"concentration k must be in [0, 500], got {k}")
    centers = theta_bin_centers(n_bins)
    dot = np.cos(2.0 * (centers[None, :] - np.asarray(cands.theta)[:, None]))
    contrib = np.asarray(cands.weight)[:, None] * np.exp(k * (dot - 1.0))
    return contrib.sum(axis=0) * (scaled_vmf_norm_const(k) / n)
