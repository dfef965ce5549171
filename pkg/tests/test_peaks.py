"""Mode extraction, vote support, and clipping axes to their evidence.

Hand-checked extent example: peak (theta=0, rho=0) in a 200x200 image is
the vertical line through the image center. Supporting features at
normalized y in {-0.2, 0.1, 0.3} project onto the tangent (0, 1) to the
span [-0.2, 0.3], so the segment runs from pixel (100, 60) to (100, 160):
p = p_hat * 200 + (100, 100).
"""

import numpy as np
import pytest

from symkde import (
    CandidateSet,
    ConfigError,
    DegenerateExtentError,
    DensityGrid,
    FeaturePoint,
    GridSpec,
    KernelParams,
    NoEvidenceError,
    Peak,
    axis_extent,
    find_peaks,
    normalize_point,
    support_hull,
    supporting_pairs,
)

UNIFORM_TEX = np.full(8, 1.0 / 8.0)


def make_grid(values):
    values = np.asarray(values, dtype=np.float64)
    spec = GridSpec(n_rho=values.shape[0], n_theta=values.shape[1])
    return DensityGrid(values=values, spec=spec, params=KernelParams())


def make_features(positions):
    return [
        FeaturePoint(
            pos=np.asarray(p, dtype=np.float64),
            scale=0,
            magnitude=0.5,
            direction=0.0,
            texture=UNIFORM_TEX,
        )
        for p in positions
    ]


def make_cands(theta, rho, weight, pair_i, pair_j):
    theta = np.asarray(theta, dtype=np.float64)
    n = theta.shape[0]
    ones = np.ones(n)
    return CandidateSet(
        theta=theta,
        rho=np.asarray(rho, dtype=np.float64),
        weight=np.asarray(weight, dtype=np.float64),
        m=ones,
        c=ones.copy(),
        d=ones.copy(),
        pair_i=np.asarray(pair_i, dtype=np.int64),
        pair_j=np.asarray(pair_j, dtype=np.int64),
        normalized=True,
        total_raw_weight=float(np.sum(weight)),
    )


class TestFindPeaks:
    def test_single_cell(self):
        values = np.zeros((100, 60))
        values[40, 10] = 2.0
        grid = make_grid(values)
        peaks = find_peaks(grid, nms_rho_radius=3, nms_theta_radius=3)
        assert len(peaks) == 1
        p = peaks[0]
        assert (p.rho_bin, p.theta_bin) == (40, 10)
        assert p.rho == grid.spec.rho_centers()[40]
        assert p.theta == grid.spec.theta_centers()[10]
        assert p.score == 2.0

    def test_equal_twins_in_one_window_suppress_each_other(self):
        values = np.zeros((100, 60))
        values[40, 10] = 2.0
        values[42, 12] = 2.0
        peaks = find_peaks(make_grid(values), nms_rho_radius=3, nms_theta_radius=3)
        assert peaks == []

    def test_separated_maxima_both_survive(self):
        values = np.zeros((100, 60))
        values[10, 10] = 2.0
        values[80, 40] = 1.5
        peaks = find_peaks(make_grid(values), nms_rho_radius=3, nms_theta_radius=3)
        assert [(p.rho_bin, p.theta_bin, p.score) for p in peaks] == [
            (10, 10, 2.0),
            (80, 40, 1.5),
        ]

    def test_orientation_axis_wraps(self):
        # bins 0 and 59 are one step apart around the circle
        values = np.zeros((100, 60))
        values[50, 0] = 2.0
        values[50, 59] = 1.9
        peaks = find_peaks(make_grid(values), nms_rho_radius=3, nms_theta_radius=2)
        assert [(p.rho_bin, p.theta_bin) for p in peaks] == [(50, 0)]

    def test_distance_axis_does_not_wrap(self):
        # rows 0 and 99 touch only if the rho axis wrapped; both must stay
        values = np.zeros((100, 60))
        values[0, 20] = 2.0
        values[99, 20] = 1.9
        peaks = find_peaks(make_grid(values), nms_rho_radius=3, nms_theta_radius=2)
        assert [(p.rho_bin, p.theta_bin) for p in peaks] == [(0, 20), (99, 20)]

    def test_relative_threshold_drops_weak_modes(self):
        values = np.zeros((100, 60))
        values[20, 10] = 2.0
        values[70, 40] = 0.08  # below 0.05 * 2.0 = 0.1
        peaks = find_peaks(make_grid(values), nms_rho_radius=3, nms_theta_radius=3)
        assert [(p.rho_bin, p.theta_bin) for p in peaks] == [(20, 10)]

    def test_top_k_truncates_after_sorting(self):
        values = np.zeros((100, 60))
        values[10, 5] = 1.0
        values[40, 20] = 3.0
        values[80, 50] = 2.0
        peaks = find_peaks(
            make_grid(values), nms_rho_radius=3, nms_theta_radius=3, top_k=2
        )
        assert [p.score for p in peaks] == [3.0, 2.0]

    def test_ties_order_by_grid_position(self):
        values = np.zeros((100, 60))
        values[60, 30] = 2.0
        values[10, 5] = 2.0
        peaks = find_peaks(make_grid(values), nms_rho_radius=3, nms_theta_radius=3)
        assert [(p.rho_bin, p.theta_bin) for p in peaks] == [(10, 5), (60, 30)]

    def test_rolling_orientation_rolls_peaks(self):
        rng = np.random.default_rng(11)
        values = rng.random((80, 36))
        grid = make_grid(values)
        base = find_peaks(grid, nms_rho_radius=4, nms_theta_radius=3, top_k=50)
        roll = 13
        rolled = find_peaks(
            make_grid(np.roll(values, roll, axis=1)),
            nms_rho_radius=4,
            nms_theta_radius=3,
            top_k=50,
        )
        expect = sorted((p.rho_bin, (p.theta_bin + roll) % 36, p.score) for p in base)
        got = sorted((p.rho_bin, p.theta_bin, p.score) for p in rolled)
        assert got == expect

    def test_reruns_on_cleaned_grid_reproduce_peaks(self):
        rng = np.random.default_rng(12)
        values = rng.random((80, 36))
        peaks = find_peaks(make_grid(values), nms_rho_radius=4, nms_theta_radius=3,
                           top_k=50)
        cleaned = np.zeros_like(values)
        for p in peaks:
            cleaned[p.rho_bin, p.theta_bin] = p.score
        again = find_peaks(make_grid(cleaned), nms_rho_radius=4, nms_theta_radius=3,
                           top_k=50)
        assert {(p.rho_bin, p.theta_bin, p.score) for p in again} == {
            (p.rho_bin, p.theta_bin, p.score) for p in peaks
        }

    def test_all_zero_grid_is_no_evidence(self):
        with pytest.raises(NoEvidenceError):
            find_peaks(make_grid(np.zeros((50, 30))))

    def test_parameter_validation(self):
        grid = make_grid(np.ones((50, 30)))
        with pytest.raises(ConfigError):
            find_peaks(grid, nms_rho_radius=0)
        with pytest.raises(ConfigError):
            find_peaks(grid, nms_theta_radius=0)
        with pytest.raises(ConfigError):
            find_peaks(grid, rel_threshold=1.5)
        with pytest.raises(ConfigError):
            find_peaks(grid, top_k=0)


class TestSupportingPairs:
    PEAK = Peak(rho_bin=0, theta_bin=0, rho=0.1, theta=0.8, score=1.0)

    def test_distance_window_is_two_bandwidths(self):
        # g = 0.03 so the window is |rho - 0.1| <= 0.06, ends inclusive
        cands = make_cands(
            theta=[0.8, 0.8, 0.8, 0.8],
            rho=[0.1, 0.15, 0.16, 0.17],
            weight=[1.0, 1.0, 1.0, 1.0],
            pair_i=[0, 0, 0, 0],
            pair_j=[1, 1, 1, 1],
        )
        idx = supporting_pairs(self.PEAK, cands, KernelParams(g=0.03, k=40.0))
        assert idx.tolist() == [0, 1, 2]

    def test_angle_window_shrinks_with_concentration(self):
        # doubled-angle tolerance 2/sqrt(40) = 0.3162...; offsets 0.15 and
        # 0.17 double to 0.30 (kept) and 0.34 (dropped)
        cands = make_cands(
            theta=[0.8, 0.95, 0.97],
            rho=[0.1, 0.1, 0.1],
            weight=[1.0, 1.0, 1.0],
            pair_i=[0, 0, 0],
            pair_j=[1, 1, 1],
        )
        idx = supporting_pairs(self.PEAK, cands, KernelParams(g=0.03, k=40.0))
        assert idx.tolist() == [0, 1]

    def test_angle_window_wraps_mod_pi(self):
        # 0.05 and pi - 0.05 are 0.1 apart as orientations
        peak = Peak(rho_bin=0, theta_bin=0, rho=0.0, theta=0.05, score=1.0)
        cands = make_cands(
            theta=[np.pi - 0.05],
            rho=[0.0],
            weight=[1.0],
            pair_i=[0],
            pair_j=[1],
        )
        idx = supporting_pairs(peak, cands, KernelParams(g=0.03, k=40.0))
        assert idx.tolist() == [0]

    def test_zero_concentration_accepts_every_orientation(self):
        cands = make_cands(
            theta=[0.8, 2.3],
            rho=[0.1, 0.12],
            weight=[1.0, 1.0],
            pair_i=[0, 0],
            pair_j=[1, 1],
        )
        idx = supporting_pairs(self.PEAK, cands, KernelParams(g=0.03, k=0.0))
        assert idx.tolist() == [0, 1]

    def test_zero_weight_votes_never_support(self):
        cands = make_cands(
            theta=[0.8, 0.8],
            rho=[0.1, 0.1],
            weight=[1.0, 0.0],
            pair_i=[0, 0],
            pair_j=[1, 1],
        )
        idx = supporting_pairs(self.PEAK, cands, KernelParams(g=0.03, k=40.0))
        assert idx.tolist() == [0]


class TestAxisExtent:
    def test_vertical_axis_segment(self):
        features = make_features([(0.1, -0.2), (-0.1, 0.3), (0.05, 0.1)])
        cands = make_cands(
            theta=[0.0, 0.0],
            rho=[0.0, 0.0],
            weight=[1.0, 1.0],
            pair_i=[0, 1],
            pair_j=[1, 2],
        )
        peak = Peak(rho_bin=0, theta_bin=0, rho=0.0, theta=0.0, score=1.0)
        axis = axis_extent(peak, np.array([0, 1]), cands, features, 200, 200)
        np.testing.assert_allclose(axis.endpoints, [[100.0, 60.0], [100.0, 160.0]])
        assert axis.support_count == 2
        assert axis.score == 1.0

    def test_interior_supports_do_not_move_endpoints(self):
        features = make_features([(0.1, -0.2), (-0.1, 0.3), (0.05, 0.0)])
        peak = Peak(rho_bin=0, theta_bin=0, rho=0.0, theta=0.0, score=1.0)
        two = make_cands([0.0], [0.0], [1.0], pair_i=[0], pair_j=[1])
        three = make_cands(
            [0.0, 0.0], [0.0, 0.0], [1.0, 1.0], pair_i=[0, 0], pair_j=[1, 2]
        )
        a = axis_extent(peak, np.array([0]), two, features, 200, 200)
        b = axis_extent(peak, np.array([0, 1]), three, features, 200, 200)
        np.testing.assert_allclose(a.endpoints, b.endpoints)
        assert b.support_count == 2

    def test_endpoints_lie_on_the_peak_line(self):
        rng = np.random.default_rng(21)
        for _ in range(50):
            theta = float(rng.uniform(0, np.pi))
            rho = float(rng.uniform(-0.3, 0.3))
            normal = np.array([np.cos(theta), np.sin(theta)])
            tangent = np.array([-np.sin(theta), np.cos(theta)])
            s = rng.uniform(-0.4, 0.4, 4)
            offs = rng.uniform(-0.05, 0.05, 4)
            pos = rho * normal + s[:, None] * tangent + offs[:, None] * normal
            pos = np.clip(pos, -0.5, 0.5)
            features = make_features(pos)
            cands = make_cands(
                [theta] * 3, [rho] * 3, [1.0] * 3,
                pair_i=[0, 1, 2], pair_j=[1, 2, 3],
            )
            peak = Peak(rho_bin=0, theta_bin=0, rho=rho, theta=theta, score=1.0)
            axis = axis_extent(peak, np.arange(3), cands, features, 640, 480)
            for end in axis.endpoints:
                back = normalize_point(end, 640, 480)
                assert float(back @ normal) == pytest.approx(rho, abs=1e-12)

    def test_endpoints_are_lexicographically_ordered(self):
        rng = np.random.default_rng(22)
        for _ in range(50):
            theta = float(rng.uniform(0, np.pi))
            pos = rng.uniform(-0.5, 0.5, (3, 2))
            features = make_features(pos)
            cands = make_cands(
                [theta] * 2, [0.0] * 2, [1.0] * 2, pair_i=[0, 1], pair_j=[1, 2]
            )
            peak = Peak(rho_bin=0, theta_bin=0, rho=0.0, theta=theta, score=1.0)
            try:
                axis = axis_extent(peak, np.arange(2), cands, features, 300, 300)
            except DegenerateExtentError:
                continue
            (x1, y1), (x2, y2) = axis.endpoints
            assert (x1, y1) <= (x2, y2)

    def test_empty_support_is_degenerate(self):
        features = make_features([(0.0, 0.0), (0.1, 0.1)])
        cands = make_cands([0.0], [0.0], [1.0], pair_i=[0], pair_j=[1])
        peak = Peak(rho_bin=0, theta_bin=0, rho=0.0, theta=0.0, score=1.0)
        with pytest.raises(DegenerateExtentError):
            axis_extent(peak, np.array([], dtype=np.int64), cands, features, 100, 100)

    def test_collapsed_projections_are_degenerate(self):
        # both features share y = 0.1: zero span along a vertical axis
        features = make_features([(0.2, 0.1), (-0.2, 0.1)])
        cands = make_cands([0.0], [0.0], [1.0], pair_i=[0], pair_j=[1])
        peak = Peak(rho_bin=0, theta_bin=0, rho=0.0, theta=0.0, score=1.0)
        with pytest.raises(DegenerateExtentError):
            axis_extent(peak, np.array([0]), cands, features, 100, 100)


class TestSupportHull:
    def test_square_with_interior_point(self):
        features = make_features(
            [(-0.2, -0.2), (0.2, -0.2), (0.2, 0.2), (-0.2, 0.2), (0.0, 0.0)]
        )
        cands = make_cands(
            [0.0] * 4, [0.0] * 4, [1.0] * 4,
            pair_i=[0, 1, 2, 3], pair_j=[1, 2, 3, 4],
        )
        hull = support_hull(np.arange(4), cands, features)
        assert hull.shape == (4, 2)
        got = {tuple(p) for p in hull}
        assert got == {(-0.2, -0.2), (0.2, -0.2), (0.2, 0.2), (-0.2, 0.2)}

    def test_two_points_pass_through(self):
        features = make_features([(0.0, 0.0), (0.1, 0.2)])
        cands = make_cands([0.0], [0.0], [1.0], pair_i=[0], pair_j=[1])
        hull = support_hull(np.array([0]), cands, features)
        assert hull.shape == (2, 2)
