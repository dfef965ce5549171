"""Multi-scale oriented edge features sampled on a regular grid.

A bank of complex Morlet-type filters (an oriented carrier wave under an
isotropic Gaussian envelope, mean-corrected and L2-normalized) is
correlated with the image at several dyadic scales and orientations.
Responses are sampled on a per-scale grid; each surviving sample becomes a
feature point carrying

* ``pos``       -- position in the aspect-preserving normalized frame,
* ``magnitude`` -- strongest response magnitude, rescaled per scale so the
                   best sample of each scale has magnitude 1,
* ``direction`` -- local edge direction (perpendicular to the carrier of
                   the winning filter), an orientation modulo pi,
* ``texture``   -- L1-normalized histogram of per-orientation response
                   magnitude accumulated over a disk around the point.

Positions use the pixel-center convention: pixel (ix, iy) sits at
continuous coordinates (ix + 0.5, iy + 0.5) in the [0, W] x [0, H] frame.
This makes a horizontal flip of the image an exact sign flip of the
normalized x coordinate.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .errors import ConfigError, InputError

__all__ = [
    "GrayImage",
    "FilterBankConfig",
    "FilterBank",
    "FeaturePoint",
    "normalize_point",
    "denormalize_point",
    "build_filter_bank",
    "extract_features",
]

# Response magnitudes below this absolute floor are treated as numerical
# noise: a scale whose strongest sample is quieter than this yields no
# features instead of normalizing noise up to magnitude 1.
_RESPONSE_FLOOR = 1e-9


# ---------------------------------------------------------------------------
# image container and coordinate frame
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GrayImage:
    """Single-channel image with float64 intensities in [0, 1]."""

    intensities: np.ndarray  # shape (height, width)

    def __post_init__(self):
        arr = np.asarray(self.intensities, dtype=np.float64)
        if arr.ndim != 2:
            raise InputError(f"expected a 2-D intensity array, got shape {arr.shape}")
        h, w = arr.shape
        if h < 8 or w < 8:
            raise InputError(f"image too small: {w}x{h}, need at least 8x8")
        if not np.isfinite(arr).all():
            raise InputError("image intensities contain non-finite values")
        lo, hi = float(arr.min()), float(arr.max())
        if lo < 0.0 or hi > 1.0:
            raise InputError(f"intensities outside [0, 1]: min={lo}, max={hi}")
        object.__setattr__(self, "intensities", arr)

    @property
    def width(self) -> int:
        return self.intensities.shape[1]

    @property
    def height(self) -> int:
        return self.intensities.shape[0]

    @classmethod
    def from_array(cls, arr) -> "GrayImage":
        return cls(np.asarray(arr, dtype=np.float64))


def normalize_point(p, width: int, height: int) -> np.ndarray:
    """Map pixel coordinates into the aspect-preserving centered frame.

    p_hat = (p - (W/2, H/2)) / max(W, H)

    Both axes share the max(W, H) divisor, so distances keep their aspect
    ratio and every image point lands inside [-0.5, 0.5]^2.
    """
    p = np.asarray(p, dtype=np.float64)
    center = np.array([width / 2.0, height / 2.0])
    return (p - center) / float(max(width, height))


def denormalize_point(p_hat, width: int, height: int) -> np.ndarray:
    """Inverse of :func:`normalize_point`: back to pixel coordinates."""
    p_hat = np.asarray(p_hat, dtype=np.float64)
    center = np.array([width / 2.0, height / 2.0])
    return p_hat * float(max(width, height)) + center


# ---------------------------------------------------------------------------
# filter bank
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FilterBankConfig:
    """Geometry of the oriented filter bank.

    Scales are dyadic: scale s uses wavelength base_wavelength * 2**s.
    Orientations are uniform over [0, pi). ``grid_stride`` fixes the
    sampling step in pixels; None means one stride per scale equal to the
    scale wavelength.
    """

    num_scales: int = 4
    num_orientations: int = 8
    base_wavelength: float = 4.0
    grid_stride: float | None = None

    def __post_init__(self):
        if self.num_scales < 1:
            raise ConfigError(f"num_scales must be >= 1, got {self.num_scales}")
        if self.num_orientations < 2:
            raise ConfigError(
                f"num_orientations must be >= 2, got {self.num_orientations}"
            )
        if self.base_wavelength < 2.0:
            raise ConfigError(
                f"base_wavelength must be >= 2 pixels, got {self.base_wavelength}"
            )
        if self.grid_stride is not None and self.grid_stride < 1:
            raise ConfigError(f"grid_stride must be >= 1, got {self.grid_stride}")

    def wavelength(self, scale: int) -> float:
        return self.base_wavelength * (2.0 ** scale)

    def stride(self, scale: int) -> int:
        step = self.wavelength(scale) if self.grid_stride is None else self.grid_stride
        return max(1, int(round(step)))

    def orientations(self) -> np.ndarray:
        return np.arange(self.num_orientations) * (np.pi / self.num_orientations)


@dataclass(frozen=True)
class FilterBank:
    """Complex filters indexed [scale][orientation], plus their geometry."""

    config: FilterBankConfig
    filters: tuple  # tuple of tuples of complex 2-D arrays
    orientations: np.ndarray = field(repr=False)

    def filter_size(self, scale: int) -> int:
        return self.filters[scale][0].shape[0]


def _morlet_filter(wavelength: float, alpha: float) -> np.ndarray:
    """One complex oriented filter: carrier at angle alpha under an
    isotropic Gaussian envelope, mean-corrected so the discrete sum is
    exactly zero, then scaled to unit L2 norm."""
    sigma = 0.5 * wavelength
    radius = int(np.ceil(3.0 * sigma))
    ax = np.arange(-radius, radius + 1, dtype=np.float64)
    xx, yy = np.meshgrid(ax, ax)
    envelope = np.exp(-(xx ** 2 + yy ** 2) / (2.0 * sigma ** 2))
    k0 = 2.0 * np.pi / wavelength
    carrier = np.exp(1j * k0 * (xx * np.cos(alpha) + yy * np.sin(alpha)))
    gabor = carrier * envelope
    # Subtracting the envelope-projected mean zeroes the DC component.
    filt = gabor - (gabor.sum() / envelope.sum()) * envelope
    return filt / np.linalg.norm(filt)


def build_filter_bank(config: FilterBankConfig) -> FilterBank:
    """Construct the full bank: num_scales x num_orientations filters."""
    orientations = config.orientations()
    filters = tuple(
        tuple(_morlet_filter(config.wavelength(s), a) for a in orientations)
        for s in range(config.num_scales)
    )
    return FilterBank(config=config, filters=filters, orientations=orientations)


# ---------------------------------------------------------------------------
# feature extraction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FeaturePoint:
    """One sampled edge feature in the normalized coordinate frame."""

    pos: np.ndarray        # (2,) normalized coordinates, in [-0.5, 0.5]^2
    scale: int
    magnitude: float       # in [0, 1], best sample of each scale is 1
    direction: float       # edge direction, in [0, pi)
    texture: np.ndarray    # (num_orientations,) L1-normalized, entries >= 0

    def __post_init__(self):
        pos = np.asarray(self.pos, dtype=np.float64)
        tex = np.asarray(self.texture, dtype=np.float64)
        object.__setattr__(self, "pos", pos)
        object.__setattr__(self, "texture", tex)
        if pos.shape != (2,) or np.abs(pos).max() > 0.5 + 1e-12:
            raise ValueError(f"feature position outside normalized frame: {pos}")
        if not (0.0 <= self.magnitude <= 1.0 + 1e-12):
            raise ValueError(f"feature magnitude outside [0, 1]: {self.magnitude}")
        if not (0.0 <= self.direction < np.pi):
            raise ValueError(f"feature direction outside [0, pi): {self.direction}")
        if tex.min() < 0.0 or abs(tex.sum() - 1.0) > 1e-9:
            raise ValueError("texture histogram must be nonnegative and sum to 1")


def _correlate(padded: np.ndarray, filt: np.ndarray) -> np.ndarray:
    """Correlation of a padded image with a complex filter (same size)."""
    kernel = np.conj(filt)[::-1, ::-1]
    return fftconvolve(padded, kernel, mode="same")


def _grid_indices(dim: int, stride: int) -> np.ndarray:
    """Centered sampling indices: as symmetric about the image middle as
    integer positions allow, step ``stride``."""
    count = (dim - 1) // stride + 1
    offset = ((dim - 1) - (count - 1) * stride) // 2
    return offset + stride * np.arange(count)


def _disk_kernel(radius: int) -> np.ndarray:
    ax = np.arange(-radius, radius + 1, dtype=np.float64)
    xx, yy = np.meshgrid(ax, ax)
    return (xx ** 2 + yy ** 2 <= radius ** 2).astype(np.float64)


def extract_features(
    image: GrayImage,
    config: FilterBankConfig | None = None,
    magnitude_threshold: float = 0.05,
    bank: FilterBank | None = None,
) -> list[FeaturePoint]:
    """Run the filter bank over the image and collect grid features.

    For each scale the image is padded symmetrically (so a constant image
    keeps exactly zero response and mirrored images give mirrored
    responses), correlated with every orientation, and sampled on the
    scale's grid. Samples are kept when their per-scale normalized
    magnitude reaches ``magnitude_threshold``. Features are returned
    scale-major, then row-major in grid order.
    """
    if config is None:
        config = bank.config if bank is not None else FilterBankConfig()
    if not (0.0 <= magnitude_threshold <= 1.0):
        raise ConfigError(
            f"magnitude_threshold must be in [0, 1], got {magnitude_threshold}"
        )
    if bank is None:
        bank = build_filter_bank(config)
    elif bank.config != config:
        raise ConfigError("provided filter bank was built for a different config")

    arr = image.intensities
    h, w = arr.shape
    n_orient = config.num_orientations
    features: list[FeaturePoint] = []

    for s in range(config.num_scales):
        size = bank.filter_size(s)
        if size > min(w, h):
            raise ConfigError(
                f"scale {s} filter ({size}x{size}) exceeds image size {w}x{h}"
            )
        radius = size // 2
        padded = np.pad(arr, radius, mode="symmetric")

        mags = np.empty((n_orient, h, w), dtype=np.float64)
        for o in range(n_orient):
            resp = _correlate(padded, bank.filters[s][o])
            mags[o] = np.abs(resp[radius:-radius, radius:-radius])

        gy = _grid_indices(h, config.stride(s))
        gx = _grid_indices(w, config.stride(s))
        sampled = mags[:, gy[:, None], gx[None, :]]      # (n_orient, ny, nx)
        best = sampled.max(axis=0)
        best_orient = sampled.argmax(axis=0)

        scale_max = best.max()
        if scale_max <= _RESPONSE_FLOOR:
            continue
        norm_mag = best / scale_max
        keep = norm_mag >= magnitude_threshold
        if not keep.any():
            continue

        # Texture: per-orientation magnitude accumulated over a disk of
        # radius twice the wavelength, then L1-normalized per point.
        disk_r = max(1, int(round(2.0 * config.wavelength(s))))
        disk = _disk_kernel(disk_r)
        acc = np.empty_like(mags)
        for o in range(n_orient):
            padded_mag = np.pad(mags[o], disk_r, mode="symmetric")
            conv = fftconvolve(padded_mag, disk, mode="same")
            acc[o] = conv[disk_r:-disk_r, disk_r:-disk_r]
        hist = acc[:, gy[:, None], gx[None, :]]          # (n_orient, ny, nx)

        tau_all = np.mod(bank.orientations[best_orient] + np.pi / 2.0, np.pi)
        max_dim = float(max(w, h))

        ys, xs = np.nonzero(keep)
        for iy, ix in zip(ys, xs):
            hvec = hist[:, iy, ix].copy()
            total = hvec.sum()
            if total > 0.0:
                hvec /= total
            else:
                hvec = np.full(n_orient, 1.0 / n_orient)
            px = gx[ix] + 0.5
            py = gy[iy] + 0.5
            pos = np.array([(px - w / 2.0) / max_dim, (py - h / 2.0) / max_dim])
            features.append(
                FeaturePoint(
                    pos=pos,
                    scale=s,
                    magnitude=float(norm_mag[iy, ix]),
                    direction=float(tau_all[iy, ix]),
                    texture=hvec,
                )
            )

    return features
