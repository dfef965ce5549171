"""Pairwise mirror-axis voting.

Every pair of same-scale features casts one vote for the axis that would
map one feature onto the other: the perpendicular bisector of the segment
joining them. An axis is parameterized by its normal angle theta in
[0, pi) and signed distance rho from the origin of the normalized frame,
so points x on the axis satisfy x . (cos theta, sin theta) = rho.

Each vote carries a weight that is the product of three unitless factors:

* ``m`` -- geometric mean of the two feature magnitudes,
* ``c`` -- alignment of the two edge directions with a mirror reflection
           across the axis, |cos(tau_i + tau_j - 2 theta)|,
* ``d`` -- texture agreement, 1 - L1/2 distance between histograms.

Weights are rescaled so they sum to the number of candidates N (i.e. the
mean weight is 1), which keeps downstream density estimates normalized.
"""

from dataclasses import dataclass, replace

import numpy as np

from .errors import DegeneratePairError, NoEvidenceError

__all__ = [
    "AxisCandidate",
    "CandidateSet",
    "generate_pairs",
    "triangulate",
    "pair_weight",
    "build_candidates",
    "normalize_weights",
]


@dataclass(frozen=True)
class AxisCandidate:
    """One vote: an axis hypothesis with its weight and provenance."""

    theta: float               # normal angle, [0, pi)
    rho: float                 # signed distance, |rho| <= sqrt(2)/2
    weight: float
    components: tuple          # (m, c, d)
    pair: tuple                # (i, j) indices into the feature list


@dataclass(frozen=True)
class CandidateSet:
    """Column-oriented store of all votes from one image.

    ``weight`` holds raw products m*c*d until :func:`normalize_weights`
    rescales them to sum to N (``normalized`` flips to True and
    ``total_raw_weight`` keeps the pre-scaling sum). Zero-weight votes are
    retained: they contribute nothing to densities but keep pair indices
    addressable.
    """

    theta: np.ndarray
    rho: np.ndarray
    weight: np.ndarray
    m: np.ndarray
    c: np.ndarray
    d: np.ndarray
    pair_i: np.ndarray
    pair_j: np.ndarray
    normalized: bool = False
    total_raw_weight: float = 0.0

    def __len__(self) -> int:
        return self.theta.shape[0]

    def __getitem__(self, n: int) -> AxisCandidate:
        return AxisCandidate(
            theta=float(self.theta[n]),
            rho=float(self.rho[n]),
            weight=float(self.weight[n]),
            components=(float(self.m[n]), float(self.c[n]), float(self.d[n])),
            pair=(int(self.pair_i[n]), int(self.pair_j[n])),
        )

    @classmethod
    def from_axes(cls, theta, rho, weight) -> "CandidateSet":
        """Build a synthetic set from bare (theta, rho, weight) columns;
        component factors are filled with ones and pair indices with -1."""
        theta = np.asarray(theta, dtype=np.float64)
        rho = np.asarray(rho, dtype=np.float64)
        weight = np.asarray(weight, dtype=np.float64)
        n = theta.shape[0]
        ones = np.ones(n)
        none = np.full(n, -1, dtype=np.int64)
        return cls(
            theta=theta, rho=rho, weight=weight,
            m=ones, c=ones.copy(), d=ones.copy(),
            pair_i=none, pair_j=none.copy(),
        )


def generate_pairs(features, max_per_scale: int = 300) -> np.ndarray:
    """Index pairs (i, j), i < j, of features sharing a scale.

    When a scale holds more than ``max_per_scale`` features, only the
    strongest ``max_per_scale`` by magnitude take part (ties keep the
    earlier feature). Returns an (P, 2) int array, ordered by scale and
    lexicographically within each scale.
    """
    by_scale: dict[int, list[int]] = {}
    for idx, f in enumerate(features):
        by_scale.setdefault(f.scale, []).append(idx)

    pairs = []
    for scale in sorted(by_scale):
        idxs = by_scale[scale]
        if len(idxs) > max_per_scale:
            mags = np.array([features[i].magnitude for i in idxs])
            order = np.argsort(-mags, kind="stable")[:max_per_scale]
            idxs = sorted(idxs[t] for t in order)
        k = len(idxs)
        if k < 2:
            continue
        arr = np.array(idxs, dtype=np.int64)
        iu, ju = np.triu_indices(k, 1)
        pairs.append(np.column_stack([arr[iu], arr[ju]]))

    if not pairs:
        return np.empty((0, 2), dtype=np.int64)
    return np.concatenate(pairs, axis=0)


def triangulate(p_i, p_j) -> tuple[float, float]:
    """Axis of the reflection mapping point p_i to point p_j.

    The axis is the perpendicular bisector of the segment p_i -> p_j: its
    normal angle is the segment direction folded into [0, pi), and rho is
    the projection of the midpoint onto that normal. Raises
    :class:`DegeneratePairError` for coincident points.
    """
    p_i = np.asarray(p_i, dtype=np.float64)
    p_j = np.asarray(p_j, dtype=np.float64)
    delta = p_j - p_i
    if float(delta @ delta) < 1e-30:
        raise DegeneratePairError(f"coincident feature points at {p_i}")
    theta = float(np.mod(np.arctan2(delta[1], delta[0]), np.pi))
    mid = 0.5 * (p_i + p_j)
    rho = float(mid[0] * np.cos(theta) + mid[1] * np.sin(theta))
    return theta, rho


def pair_weight(f_i, f_j, theta: float) -> tuple[float, float, float, float]:
    """Weight factors (m, c, d, omega) for one feature pair and its axis."""
    m = float(np.sqrt(f_i.magnitude * f_j.magnitude))
    c = float(np.abs(np.cos(f_i.direction + f_j.direction - 2.0 * theta)))
    l1 = float(np.abs(f_i.texture - f_j.texture).sum())
    d = max(0.0, 1.0 - 0.5 * l1)
    omega = m * c * d
    return m, c, d, omega


def build_candidates(features, max_per_scale: int = 300) -> CandidateSet:
    """Vectorized voting: triangulate and weight every same-scale pair.

    Coincident pairs are skipped (they cannot define an axis); everything
    else, including zero-weight votes, is kept. Raises
    :class:`NoEvidenceError` when no pair survives.
    """
    pairs = generate_pairs(features, max_per_scale=max_per_scale)
    if pairs.shape[0] == 0:
        raise NoEvidenceError("no same-scale feature pairs to vote with")

    pos = np.array([f.pos for f in features])              # (F, 2)
    mag = np.array([f.magnitude for f in features])
    tau = np.array([f.direction for f in features])
    tex = np.array([f.texture for f in features])          # (F, B)

    pi_idx, pj_idx = pairs[:, 0], pairs[:, 1]
    delta = pos[pj_idx] - pos[pi_idx]
    ok = np.einsum("nk,nk->n", delta, delta) >= 1e-30
    if not ok.any():
        raise NoEvidenceError("all feature pairs are coincident")
    pi_idx, pj_idx, delta = pi_idx[ok], pj_idx[ok], delta[ok]

    theta = np.mod(np.arctan2(delta[:, 1], delta[:, 0]), np.pi)
    mid = 0.5 * (pos[pi_idx] + pos[pj_idx])
    rho = mid[:, 0] * np.cos(theta) + mid[:, 1] * np.sin(theta)

    m = np.sqrt(mag[pi_idx] * mag[pj_idx])
    c = np.abs(np.cos(tau[pi_idx] + tau[pj_idx] - 2.0 * theta))
    l1 = np.abs(tex[pi_idx] - tex[pj_idx]).sum(axis=1)
    d = np.maximum(0.0, 1.0 - 0.5 * l1)
    weight = m * c * d

    return CandidateSet(
        theta=theta, rho=rho, weight=weight, m=m, c=c, d=d,
        pair_i=pi_idx.astype(np.int64), pair_j=pj_idx.astype(np.int64),
    )


def normalize_weights(cands: CandidateSet) -> CandidateSet:
    """Rescale weights to sum to N (mean weight 1).

    Raises :class:`NoEvidenceError` when the set is empty or every weight
    is zero — there is nothing to normalize against.
    """
    n = len(cands)
    if n == 0:
        raise NoEvidenceError("empty candidate set")
    total = float(cands.weight.sum())
    if total <= 0.0:
        raise NoEvidenceError("all vote weights are zero")
    return replace(
        cands,
        weight=cands.weight * (n / total),
        normalized=True,
        total_raw_weight=total,
    )
