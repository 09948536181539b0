"""Control-point repair: endpoint-jet prescription, rule sets, travel time."""

import math

import numpy as np
import pytest

from agv_path_kit import (BezierCurve, Crab, JunctionContext, PathSegment,
                          RepairInfeasibleError, RepairProblem, Tangential,
                          VehicleModel, Wheel,
                          estimate_travel_time, prescribe_endpoint_jet,
                          repair_exponential, repair_tangential)
from agv_path_kit.continuity import SMOOTH
from agv_path_kit.curve import evaluate

from conftest import (NOMINAL_SMOOTHED_RIGHT, junction_of, random_regular_curve,
                      straight_segment)
from test_continuity import ctx_for


class TestPrescribeEndpointJet:
    def test_identity_prescription(self):
        rng = np.random.default_rng(0)
        curve = random_regular_curve(rng, degree=6)
        jet = curve.jet(0.0)
        new = prescribe_endpoint_jet(curve, "start", jet.d1, jet.d2, jet.d3)
        assert np.allclose(new.control_points, curve.control_points, atol=1e-12)

    def test_doubled_tangent_moves_only_first_interior_point(self):
        rng = np.random.default_rng(1)
        curve = random_regular_curve(rng, degree=6)
        jet = curve.jet(0.0)
        new = prescribe_endpoint_jet(curve, "start", 2.0 * jet.d1)
        p = curve.control_points
        expected_p1 = p[0] + 2.0 * (p[1] - p[0])
        assert np.allclose(new.control_points[1], expected_p1, atol=1e-12)
        assert np.allclose(new.control_points[0], p[0])
        assert np.allclose(new.control_points[2:], p[2:])

    def test_end_side_mirror(self):
        rng = np.random.default_rng(2)
        curve = random_regular_curve(rng, degree=6)
        jet = curve.jet(1.0)
        new = prescribe_endpoint_jet(curve, "end", jet.d1, jet.d2, jet.d3)
        assert np.allclose(new.control_points, curve.control_points, atol=1e-12)

    def test_prescription_is_exact(self):
        rng = np.random.default_rng(3)
        curve = random_regular_curve(rng, degree=6)
        d1 = np.array([2.5, 1.0])
        d2 = np.array([-4.0, 3.0])
        d3 = np.array([10.0, -20.0])
        for end, u in (("start", 0.0), ("end", 1.0)):
            new = prescribe_endpoint_jet(curve, end, d1, d2, d3)
            jet = evaluate(new, u)
            assert np.allclose(jet.d1, d1, atol=1e-10)
            assert np.allclose(jet.d2, d2, atol=1e-9)
            assert np.allclose(jet.d3, d3, atol=1e-8)

    def test_smoothed_fixture_jet_reproduces_its_points(self, layout_g1,
                                                        layout_smoothed):
        # Prescribing the smoothed curve's start jet onto the initial curve
        # must reproduce the smoothed control points: the map is linear and
        # only the three junction-adjacent points differ.
        initial = layout_g1.segments[1].segment.curve
        smoothed = layout_smoothed.segments[1].segment.curve
        jet = smoothed.jet(0.0)
        rebuilt = prescribe_endpoint_jet(initial, "start", jet.d1, jet.d2, jet.d3)
        assert np.allclose(rebuilt.control_points, smoothed.control_points,
                           atol=1e-9)
        # and those points sit within print precision of the nominal layout
        assert np.abs(rebuilt.control_points
                      - NOMINAL_SMOOTHED_RIGHT).max() < 2.5e-3

    def test_degree_too_low(self):
        curve = BezierCurve([(0, 0), (1, 0), (2, 0)])
        with pytest.raises(ValueError):
            prescribe_endpoint_jet(curve, "start", np.array([1, 0]),
                                   np.array([0, 0]), np.array([0, 0]))

    def test_contiguous_orders_required(self):
        curve = BezierCurve([(0, 0), (1, 0), (2, 0), (3, 0)])
        with pytest.raises(ValueError):
            prescribe_endpoint_jet(curve, "start", None, np.array([1.0, 0.0]))


@pytest.fixture(scope="module")
def fixture_repair(layout_g1):
    ctx = junction_of(layout_g1)
    return ctx, repair_tangential(RepairProblem(ctx, objective="min_travel_time"))


class TestTangentialRepair:
    def test_fixture_repair_is_smooth_and_fast(self, fixture_repair,
                                               layout_smoothed):
        _, result = fixture_repair
        assert result.report_after.verdict == SMOOTH
        # either close to the bundled smoothed geometry or at least as fast
        table = layout_smoothed.segments[1].segment
        t_table = estimate_travel_time(table, layout_smoothed.vehicle)
        close = np.abs(result.new_right_curve.control_points
                       - table.curve.control_points).max() < 5e-2
        assert close or result.objective_value <= t_table + 1e-9

    def test_far_points_untouched(self, fixture_repair):
        ctx, result = fixture_repair
        before = ctx.right.curve.control_points
        after = result.new_right_curve.control_points
        assert np.array_equal(before[0], after[0])
        assert np.array_equal(before[4:], after[4:])
        assert np.array_equal(ctx.left.curve.control_points,
                              result.new_left_curve.control_points)

    def test_min_displacement_on_smooth_junction_is_identity(self, layout_smoothed):
        ctx = junction_of(layout_smoothed)
        result = repair_tangential(RepairProblem(ctx, objective="min_displacement"))
        assert result.objective_value < 1e-9
        assert np.allclose(result.new_right_curve.control_points,
                           ctx.right.curve.control_points, atol=1e-6)

    def test_random_g1_junctions_all_repaired(self, two_wheel_vehicle):
        rng = np.random.default_rng(4)
        repaired = 0
        for _ in range(100):
            left = random_regular_curve(rng, degree=6)
            template = random_regular_curve(rng, degree=6)
            template = BezierCurve(template.control_points
                                   - template.control_points[0]
                                   + left.jet(1.0).position)
            right = prescribe_endpoint_jet(
                template, "start", left.jet(1.0).d1 / float(rng.uniform(0.5, 2)))
            ctx = ctx_for(left, right, two_wheel_vehicle)
            result = repair_tangential(RepairProblem(ctx,
                                                     objective="min_displacement"))
            assert result.report_after.verdict == SMOOTH
            repaired += 1
        assert repaired == 100

    def test_left_side_repair(self, layout_g1):
        ctx = junction_of(layout_g1)
        result = repair_tangential(RepairProblem(ctx, objective="min_displacement",
                                                 side="left"))
        assert result.report_after.verdict == SMOOTH
        assert np.array_equal(ctx.right.curve.control_points,
                              result.new_right_curve.control_points)
        before = ctx.left.curve.control_points
        after = result.new_left_curve.control_points
        assert np.array_equal(before[:3], after[:3])
        assert np.array_equal(before[6], after[6])

    def test_mode_mismatch_rejected(self, layout_g1):
        doc = layout_g1
        left = PathSegment(doc.segments[0].segment.curve, Tangential(0.0), 1.5)
        right = PathSegment(doc.segments[1].segment.curve, Tangential(0.3), 1.5)
        ctx = JunctionContext(left, right, doc.vehicle)
        with pytest.raises(RepairInfeasibleError):
            repair_tangential(RepairProblem(ctx))
        crab_right = PathSegment(doc.segments[1].segment.curve, Crab(0.0), 1.5)
        ctx = JunctionContext(left, crab_right, doc.vehicle)
        with pytest.raises(RepairInfeasibleError):
            repair_tangential(RepairProblem(ctx))


@pytest.fixture(scope="module")
def exponential_repair(layout_g1, layout_exponential):
    from agv_path_kit import ExponentialAnticipated
    alpha = layout_exponential.segments[0].segment.mode.alpha
    n = layout_exponential.segments[1].segment.mode.n
    left = PathSegment(layout_g1.segments[0].segment.curve, Tangential(alpha), 1.5)
    right = PathSegment(layout_g1.segments[1].segment.curve,
                        ExponentialAnticipated(alpha, n), 1.5)
    ctx = JunctionContext(left, right, layout_exponential.vehicle)
    return ctx, repair_exponential(RepairProblem(ctx, objective="min_travel_time"))


class TestExponentialRepair:
    def test_repair_is_smooth(self, exponential_repair):
        _, result = exponential_repair
        assert result.report_after.verdict == SMOOTH
        # both endpoint curvatures collapse to zero by construction
        for curve, u in ((result.new_left_curve, 1.0), (result.new_right_curve, 0.0)):
            jet = evaluate(curve, u)
            det = jet.d1[0] * jet.d2[1] - jet.d1[1] * jet.d2[0]
            assert abs(det) < 1e-9 * max(1.0, float(np.linalg.norm(jet.d2)))

    def test_junction_heading_preserved(self, exponential_repair):
        ctx, result = exponential_repair
        t_old = ctx.left_jet.d1 / np.linalg.norm(ctx.left_jet.d1)
        d1_new = evaluate(result.new_left_curve, 1.0).d1
        t_new = d1_new / np.linalg.norm(d1_new)
        assert np.allclose(t_old, t_new, atol=1e-9)

    def test_objective_not_worse_than_bundled_layout(self, exponential_repair,
                                                     layout_exponential):
        _, result = exponential_repair
        bundled = sum(estimate_travel_time(ls.segment, layout_exponential.vehicle)
                      for ls in layout_exponential.segments)
        assert result.objective_value <= bundled + 1e-6

    def test_collinear_straights_identity(self, two_wheel_vehicle):
        from agv_path_kit import ExponentialAnticipated
        left = BezierCurve([(x, 0.0) for x in np.linspace(0, 4, 7)])
        right = BezierCurve([(x, 0.0) for x in np.linspace(4, 8, 7)])
        ctx = ctx_for(left, right, two_wheel_vehicle, Tangential(0.0),
                      ExponentialAnticipated(0.0, 1.7))
        result = repair_exponential(RepairProblem(ctx, objective="min_displacement"))
        assert result.objective_value < 1e-12
        assert np.allclose(result.new_right_curve.control_points,
                           right.control_points, atol=1e-7)


class TestTravelTime:
    def test_straight_segment_closed_form(self, two_wheel_vehicle):
        t = estimate_travel_time(straight_segment(length=3.0, v_max=1.5),
                                 two_wheel_vehicle)
        assert t == pytest.approx(2.0, abs=1e-9)

    def test_halving_actuator_limits_doubles_time(self):
        rng = np.random.default_rng(5)
        curve = random_regular_curve(rng)
        # huge segment limit so only actuator constraints bind
        seg = PathSegment(curve, Tangential(0.0), 1e9)
        full = VehicleModel((Wheel("w1", (1.0, 0.5), 1.7, math.radians(45)),
                             Wheel("w2", (-1.0, -0.5), 1.7, math.radians(45))))
        half = VehicleModel((Wheel("w1", (1.0, 0.5), 0.85, math.radians(22.5)),
                             Wheel("w2", (-1.0, -0.5), 0.85, math.radians(22.5))))
        t_full = estimate_travel_time(seg, full)
        t_half = estimate_travel_time(seg, half)
        assert t_half == pytest.approx(2.0 * t_full, rel=1e-9)

    def test_fixture_comparison_recorded(self, layout_g1, layout_smoothed):
        t_initial = estimate_travel_time(layout_g1.segments[1].segment,
                                         layout_g1.vehicle)
        t_smoothed = estimate_travel_time(layout_smoothed.segments[1].segment,
                                          layout_smoothed.vehicle)
        assert math.isfinite(t_initial) and math.isfinite(t_smoothed)
        # continuity constraints cost travel time on the downstream segment
        assert t_smoothed > t_initial
