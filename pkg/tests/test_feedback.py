import csv
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from conftest import make_ball
from swinglab.errors import DimensionMismatch, EmptyDataset, NoFeasibleRegion
from swinglab.evaluation import TruthFeature, generate_synthetic
from swinglab.features import Standardizer
from swinglab.feedback import (
    MAXIMIZE_OUTPUT,
    MAXIMIZE_STRAIGHT,
    ShapeCurve,
    compare_sessions,
    default_density_floor,
    export_curves_csv,
    extract_curves,
    generate_feedback,
    optimal_value,
    render_curve_svg,
)
from swinglab.models import Task, TrainingConfig, train_nam

CFG = TrainingConfig(learning_rate=0.05, epochs=120, batch_size=128,
                     hidden_sizes=(32, 16), seed=4)


@pytest.fixture(scope="module")
def peaked_model():
    """NAM trained on a truth whose first feature peaks at x* = 0.5."""
    truths = [
        TruthFeature("quadratic", scale=-1.0, low=-1.5, high=2.5),  # shifted below
        TruthFeature("linear", scale=0.5),
        TruthFeature("zero"),
    ]
    data = generate_synthetic(seed=21, n=1500, truths=truths, noise_std=0.05)
    x = data.features.copy()
    # move the quadratic's peak to 0.5 by baking the shift into the target
    y = -((x[:, 0] - 0.5) ** 2) + 0.5 * x[:, 1] + data.bias
    std = Standardizer.fit(x)
    model = train_nam(x, y, Task.REGRESSION, CFG, standardizer=std,
                      feature_names=["peaked", "rising", "flat"])
    return model, x


def simple_curve(ys, counts=None, xs=None) -> ShapeCurve:
    ys = np.asarray(ys, dtype=float)
    xs = np.linspace(0.0, 1.0, ys.size) if xs is None else np.asarray(xs, float)
    counts = np.ones(ys.size - 1) if counts is None else np.asarray(counts, float)
    return ShapeCurve("f", xs, ys, xs.copy(), counts)


class TestExtractCurves:
    def test_one_curve_per_feature(self, peaked_model):
        model, x = peaked_model
        curves = extract_curves(model, x, grid_size=32)
        assert len(curves) == 3
        assert [c.feature for c in curves] == ["peaked", "rising", "flat"]
        for curve in curves:
            assert curve.xs.shape == (32,)
            assert np.all(np.diff(curve.xs) > 0)
            assert curve.bin_counts.shape == (31,)

    def test_grid_spans_inner_percentiles(self, peaked_model):
        model, x = peaked_model
        (curve, *_) = extract_curves(model, x, grid_size=16)
        lo, hi = np.percentile(x[:, 0], [1.0, 99.0])
        assert curve.xs[0] == pytest.approx(lo)
        assert curve.xs[-1] == pytest.approx(hi)

    def test_ys_match_contributions(self, peaked_model):
        model, x = peaked_model
        curves = extract_curves(model, x, grid_size=8)
        for i, curve in enumerate(curves):
            for gx, gy in zip(curve.xs, curve.ys):
                v = np.zeros(3)
                v[i] = gx
                assert model.contributions(v)[i] == pytest.approx(gy, abs=1e-9)

    def test_empty_train(self, peaked_model):
        model, _ = peaked_model
        with pytest.raises(EmptyDataset):
            extract_curves(model, np.empty((0, 3)))


class TestOptimalValue:
    def test_increasing_curve_speed_objective_right_endpoint(self):
        curve = simple_curve(np.linspace(-1, 1, 11))
        assert optimal_value(curve, MAXIMIZE_OUTPUT, 0.0) == 1.0

    def test_centered_peak_straight_objective(self):
        ys = -np.abs(np.linspace(-1, 1, 11))  # peak at the center point
        curve = simple_curve(ys)
        assert optimal_value(curve, MAXIMIZE_STRAIGHT, 0.0) == 0.5

    def test_density_floor_excludes_unvisited_extreme(self):
        ys = np.linspace(0, 1, 5)  # best at right endpoint
        counts = np.array([10.0, 10.0, 10.0, 0.0])  # but nobody visits it
        curve = simple_curve(ys, counts)
        assert optimal_value(curve, MAXIMIZE_OUTPUT, 1.0) < 1.0

    def test_no_feasible_region(self):
        curve = simple_curve(np.linspace(0, 1, 5), counts=np.zeros(4))
        with pytest.raises(NoFeasibleRegion):
            optimal_value(curve, MAXIMIZE_OUTPUT, 1.0)

    def test_flat_curve_breaks_tie_toward_density_mode(self):
        ys = np.zeros(5)
        counts = np.array([1.0, 1.0, 5.0, 1.0])
        curve = simple_curve(ys, counts)
        xs = curve.xs
        assert optimal_value(curve, MAXIMIZE_OUTPUT, 0.0) == xs[2]

    def test_planted_peak_recovered(self, peaked_model):
        model, x = peaked_model
        curves = extract_curves(model, x, grid_size=64)
        step = curves[0].xs[1] - curves[0].xs[0]
        best = optimal_value(curves[0], MAXIMIZE_OUTPUT, default_density_floor(curves[0]))
        assert abs(best - 0.5) <= step + 1e-9

    def test_optimum_always_in_feasible_bin(self, rng):
        for _ in range(200):
            size = int(rng.integers(3, 20))
            curve = simple_curve(rng.normal(0, 1, size), rng.integers(0, 6, size - 1))
            floor = float(rng.uniform(0, 4))
            density = curve.point_density()
            try:
                best = optimal_value(curve, MAXIMIZE_OUTPUT, floor)
            except NoFeasibleRegion:
                assert np.all(density < floor)
                continue
            idx = int(np.argmin(np.abs(curve.xs - best)))
            assert density[idx] >= floor


class TestGenerateFeedback:
    def test_displaced_feature_ranks_first(self, peaked_model):
        model, x = peaked_model
        curves = extract_curves(model, x, grid_size=64)
        golfer = np.tile(
            np.array([[ -1.2, 0.0, 0.0 ]]), (5, 1)
        )  # far from the 0.5 peak on the planted feature only
        report = generate_feedback(model, curves, golfer, target="speed",
                                   golfer_id="g7", k=3)
        assert report.items[0].feature == "peaked"
        assert report.n_swings == 5
        assert report.golfer_id == "g7"
        assert [it.rank for it in report.items] == [1, 2, 3]

    def test_k_limits_items(self, peaked_model):
        model, x = peaked_model
        curves = extract_curves(model, x)
        report = generate_feedback(model, curves, x[:3], target="speed", k=2)
        assert len(report.items) == 2

    def test_golfer_at_optimum_all_deltas_zero(self, peaked_model):
        model, x = peaked_model
        curves = extract_curves(model, x, grid_size=32)
        optima = [
            optimal_value(c, MAXIMIZE_OUTPUT, default_density_floor(c)) for c in curves
        ]
        golfer = np.array([optima])
        report = generate_feedback(model, curves, golfer, target="speed", k=3,
                                   density_floor=None)
        for item in report.items:
            assert item.effect_delta == 0.0
        # rank order falls back to feature name on all-zero magnitudes
        assert [it.feature for it in report.items] == sorted(
            it.feature for it in report.items
        )

    def test_swing_order_irrelevant(self, peaked_model, rng):
        model, x = peaked_model
        curves = extract_curves(model, x)
        swings = rng.normal(0.5, 0.3, (6, 3))
        a = generate_feedback(model, curves, swings, target="speed", k=3)
        b = generate_feedback(model, curves, swings[::-1].copy(), target="speed", k=3)
        assert [(i.feature, i.rank) for i in a.items] == [
            (i.feature, i.rank) for i in b.items
        ]

    def test_dimension_mismatch(self, peaked_model):
        model, x = peaked_model
        curves = extract_curves(model, x)
        with pytest.raises(DimensionMismatch):
            generate_feedback(model, curves, np.zeros((2, 5)), target="speed")


class TestCompareSessions:
    def test_identical_sessions_zero_deltas(self):
        balls = [make_ball(f"s{i}", direction_angle=2.0, lr_distance_out=4.0)
                 for i in range(4)]
        feats = np.random.default_rng(0).normal(0, 1, (4, 3))
        cmp = compare_sessions(balls, feats, balls, feats, ["a", "b", "c"])
        assert np.allclose(cmp.mean_shifts, 0.0, atol=0)
        assert cmp.before_lr_std == cmp.after_lr_std
        assert cmp.before_mean_abs_direction == cmp.after_mean_abs_direction

    def test_known_mean_shift_head_loc(self):
        # session means -1.07 -> -0.90: reported shift +0.17
        before = np.full((10, 1), -1.07)
        after = np.full((10, 1), -0.90)
        balls_b = [make_ball(f"b{i}") for i in range(10)]
        balls_a = [make_ball(f"a{i}") for i in range(10)]
        cmp = compare_sessions(balls_b, before, balls_a, after, ["2-HEAD-LOC"])
        assert cmp.mean_shifts[0] == pytest.approx(0.17, abs=1e-9)

    def test_known_mean_shift_shoulder_angle(self):
        # 27.07 -> 23.55: shift -3.52
        before = np.full((10, 1), 27.07)
        after = np.full((10, 1), 23.55)
        balls_b = [make_ball(f"b{i}") for i in range(10)]
        balls_a = [make_ball(f"a{i}") for i in range(10)]
        cmp = compare_sessions(balls_b, before, balls_a, after, ["5-SHOULDER-ANGLE"])
        assert cmp.mean_shifts[0] == pytest.approx(-3.52, abs=1e-9)

    def test_dispersion_statistics(self):
        balls_b = [make_ball(f"b{i}", direction_angle=d, lr_distance_out=lr)
                   for i, (d, lr) in enumerate([(-8, -20), (6, 15), (2, 5)])]
        balls_a = [make_ball(f"a{i}", direction_angle=d, lr_distance_out=lr)
                   for i, (d, lr) in enumerate([(-2, -5), (1, 3), (2, 4)])]
        feats = np.zeros((3, 1))
        cmp = compare_sessions(balls_b, feats, balls_a, feats, ["f"])
        assert cmp.after_lr_std < cmp.before_lr_std
        assert cmp.after_mean_abs_direction < cmp.before_mean_abs_direction
        assert cmp.before_mean_abs_direction == pytest.approx((8 + 6 + 2) / 3)

    def test_empty_session_rejected(self):
        with pytest.raises(EmptyDataset):
            compare_sessions([], np.zeros((0, 1)), [make_ball()], np.zeros((1, 1)), ["f"])


class TestRendering:
    def test_svg_is_strict_xml(self, peaked_model):
        model, x = peaked_model
        (curve, *_) = extract_curves(model, x, grid_size=24)
        svg = render_curve_svg(curve, optimal_marker=0.5)
        root = ET.fromstring(svg)  # raises on malformed XML
        assert root.tag.endswith("svg")

    def test_marker_element_present_at_mapped_position(self):
        curve = simple_curve(np.linspace(-1, 1, 9))
        with_marker = render_curve_svg(curve, optimal_marker=0.25)
        without = render_curve_svg(curve, optimal_marker=None)
        red_lines = [
            el for el in ET.fromstring(with_marker).iter()
            if el.tag.endswith("line") and el.get("stroke") == "red"
        ]
        assert len(red_lines) == 1
        assert not [
            el for el in ET.fromstring(without).iter()
            if el.tag.endswith("line") and el.get("stroke") == "red"
        ]

    def test_flat_curve_renders(self):
        svg = render_curve_svg(simple_curve(np.zeros(5)))
        ET.fromstring(svg)

    def test_curves_csv_row_count(self, tmp_path, peaked_model):
        model, x = peaked_model
        curves = extract_curves(model, x, grid_size=17)
        path = tmp_path / "curves.csv"
        export_curves_csv(curves, str(path))
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["feature", "x", "f", "density_bin_count"]
        assert len(rows) - 1 == sum(c.xs.size for c in curves)


class TestFortyFeatureModel:
    """Spec-scale sanity: a 40-feature additive model end to end."""

    @pytest.fixture(scope="class")
    def wide_model(self):
        rng = np.random.default_rng(55)
        x = rng.normal(0, 1, (120, 40))
        y = x[:, 0] * 0.8 - 0.5 * x[:, 3] + rng.normal(0, 0.1, 120)
        cfg = TrainingConfig(epochs=15, batch_size=64, hidden_sizes=(8, 4), seed=1)
        model = train_nam(x, y, Task.REGRESSION, cfg,
                          standardizer=Standardizer.fit(x),
                          feature_names=[f"f{i:02d}" for i in range(40)])
        return model, x

    def test_forty_curves(self, wide_model):
        model, x = wide_model
        curves = extract_curves(model, x, grid_size=16)
        assert len(curves) == 40

    def test_k_two_items(self, wide_model):
        model, x = wide_model
        curves = extract_curves(model, x, grid_size=16)
        report = generate_feedback(model, curves, x[:4], target="speed", k=2)
        assert len(report.items) == 2
        assert report.items[0].rank == 1 and report.items[1].rank == 2
