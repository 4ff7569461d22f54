import math
from dataclasses import replace

import numpy as np
import pytest

from handleopt import (
    JointLimits,
    NoFeasiblePoint,
    ObjectiveConfig,
    ObjectiveLandscape,
    Placement,
    PlacementContext,
    RobotParams,
    Vec2,
    arm_force_expanded,
    build_chain,
    evaluate_grid,
    feasibility_check,
    fixture_path,
    grid_axis,
    handle_position,
    load_scenario,
    make_context,
    objective,
    optimize_placement,
    torque_signs,
)
from oracles import arm_force_atan2, best_sign_combo, random_unit, sample_chain, sample_in_branch_chain

# Optimizer pins for the packaged scenarios, frozen from a verified run.
FIXTURE_OPTIMA = {
    "toilet_sit_to_stand": {
        "theta5_deg": -41.99999999999999,
        "theta6_deg": 119.99999999999999,
        "objective": 3.9995100065978533,
        "handle": (0.2927995666429939, 1.035756912188626),
        "signs": (-1, -1, 1),
    },
    "sit_to_stand_bed": {
        "theta5_deg": 80.0,
        "theta6_deg": 107.49999999999999,
        "objective": 3.77450136713868,
        "handle": (-0.26239108800736144, 0.9886518032418063),
        "signs": (1, 1, -1),
    },
    "bathtub_stand": {
        "theta5_deg": 80.0,
        "theta6_deg": 119.99999999999999,
        "objective": 6.088207419778035,
        "handle": (-0.028909535310235213, 0.723579757746802),
        "signs": (-1, -1, -1),
    },
    "lie_to_sit_bed": {
        "theta5_deg": 59.99999999999999,
        "theta6_deg": 119.99999999999999,
        "objective": 4.530582233770077,
        "handle": (-1.2784765023271303, 0.4850000000000002),
        "signs": (1, 1, 1),
    },
}


def toilet_context():
    scenario = load_scenario(fixture_path("toilet_sit_to_stand"))
    ctx, _ = make_context(scenario)
    return scenario, ctx


def context_of_chain(chain, v):
    return PlacementContext(
        shoulder=chain.shoulder,
        theta_04=chain.theta_04,
        com=chain.com,
        v=v,
        upper_len=chain.r5.norm(),
        fore_len=chain.r6.norm(),
    )


def test_grid_axis_inclusive_endpoints():
    axis = grid_axis(0.0, 1.0, 0.25)
    assert axis.size == 5
    assert axis[0] == 0.0
    assert axis[-1] == 1.0
    short = grid_axis(0.0, 1.0, 0.3)
    assert short.size == 4
    assert short[-1] == pytest.approx(0.9)
    single = grid_axis(2.0, 2.0, 0.5)
    assert single.size == 1 and single[0] == 2.0
    # a span that is a near-exact multiple of the step still reaches the end
    deg = grid_axis(math.radians(-60.0), math.radians(80.0), math.radians(0.5))
    assert deg.size == 281
    assert deg[-1] == pytest.approx(math.radians(80.0), abs=1e-12)


def test_grid_axis_rejects_nonpositive_step():
    with pytest.raises(ValueError):
        grid_axis(0.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        grid_axis(0.0, 1.0, -0.1)


def test_torque_signs_make_every_term_push_along_v(rng):
    for _ in range(60):
        chain = sample_chain(rng)
        v = random_unit(rng)
        mags = tuple(rng.uniform(0.5, 2.0, 3))
        torques = torque_signs(chain, v, mags)
        u5, u6, u7 = chain.unit_directions()
        assert torques.tau5 / chain.lever5 * u5.dot(v) >= -1e-12
        assert torques.tau6 / chain.lever6 * u6.dot(v) >= -1e-12
        assert torques.tau7 / chain.lever7 * u7.dot(v) >= -1e-12
        assert abs(torques.tau5) == mags[0]
        assert abs(torques.tau6) == mags[1]
        assert abs(torques.tau7) == mags[2]


def test_torque_signs_beat_every_sign_combo(rng):
    for _ in range(200):
        chain = sample_chain(rng)
        v = random_unit(rng)
        mags = tuple(rng.uniform(0.5, 2.0, 3))
        chosen = arm_force_expanded(chain, torque_signs(chain, v, mags)).dot(v)
        assert chosen >= best_sign_combo(chain, v, mags) - 1e-12


def test_objective_matches_in_branch_sign_search(rng):
    config = ObjectiveConfig(a=0.0, torque_magnitudes=(1.0, 1.2, 0.7))
    for _ in range(40):
        chain = sample_in_branch_chain(rng)
        v = random_unit(rng)
        ctx = context_of_chain(chain, v)
        got = objective(chain.theta5, chain.theta6, ctx, config)
        want = best_sign_combo(chain, v, config.torque_magnitudes, force=arm_force_atan2)
        assert got == pytest.approx(want, abs=1e-9)


def test_penalty_vanishes_at_right_angle_elbow():
    _, ctx = toilet_context()
    with_pen = ObjectiveConfig(a=0.2)
    without = ObjectiveConfig(a=0.0)
    for t5 in (-0.4, 0.1, 0.9):
        a = objective(t5, math.pi / 2.0, ctx, with_pen)
        b = objective(t5, math.pi / 2.0, ctx, without)
        assert abs(a - b) < 1e-15


def test_objective_is_pure_penalty_when_levers_align():
    # straight arm along +x with the COM on the same line: every force
    # direction is vertical, so nothing projects onto v = +x
    ctx = PlacementContext(
        shoulder=Vec2(0.0, 0.0), theta_04=0.0, com=Vec2(0.5, 0.0),
        v=Vec2(1.0, 0.0), upper_len=0.32, fore_len=0.30,
    )
    value = objective(0.0, 0.0, ctx, ObjectiveConfig(a=0.2))
    assert value == pytest.approx(-0.2, abs=1e-12)


def test_objective_scalar_matches_grid_cells():
    scenario, ctx = toilet_context()
    landscape = evaluate_grid(ctx, scenario.limits, scenario.objective)
    i5, i6 = 17, 101
    got = objective(float(landscape.theta5[i5]), float(landscape.theta6[i6]),
                    ctx, scenario.objective)
    assert got == pytest.approx(float(landscape.objective[i5, i6]), abs=1e-12)


def test_evaluate_grid_shapes_and_axes():
    scenario, ctx = toilet_context()
    landscape = evaluate_grid(ctx, scenario.limits, scenario.objective)
    n5, n6 = landscape.theta5.size, landscape.theta6.size
    assert landscape.objective.shape == (n5, n6)
    assert landscape.eligible.shape == (n5, n6)
    assert landscape.eligible.dtype == bool
    # the packaged limits keep the grid clear of the lever singularities
    assert np.isfinite(landscape.objective).all()
    assert landscape.eligible.all()


def test_evaluate_grid_marks_singular_rows():
    # the COM sits exactly one upper-arm length above the shoulder, so the
    # grid row that points the upper arm straight up collapses the elbow lever
    ctx = PlacementContext(
        shoulder=Vec2(0.0, 0.0), theta_04=math.pi / 2.0, com=Vec2(0.0, 0.32),
        v=Vec2(0.0, 1.0), upper_len=0.32, fore_len=0.30,
    )
    limits = JointLimits(
        theta5_min=math.radians(-10.0), theta5_max=math.radians(10.0),
        theta6_min=math.radians(10.0), theta6_max=math.radians(20.0),
    )
    config = ObjectiveConfig(grid_step=math.radians(5.0))
    landscape = evaluate_grid(ctx, limits, config)
    assert landscape.theta5.size == 5
    assert np.isnan(landscape.objective[2, :]).all()
    assert not landscape.eligible[2, :].any()
    other_rows = np.delete(landscape.objective, 2, axis=0)
    assert np.isfinite(other_rows).all()
    placement, _ = optimize_placement(ctx, limits, config)
    assert abs(placement.theta5_opt - float(landscape.theta5[2])) > 1e-9


def test_evaluate_grid_with_com_on_shoulder_is_all_singular():
    ctx = PlacementContext(
        shoulder=Vec2(0.1, 0.2), theta_04=0.0, com=Vec2(0.1, 0.2),
        v=Vec2(1.0, 0.0), upper_len=0.32, fore_len=0.30,
    )
    landscape = evaluate_grid(ctx, JointLimits(), ObjectiveConfig(grid_step=math.radians(10.0)))
    assert np.isnan(landscape.objective).all()
    assert not landscape.eligible.any()
    with pytest.raises(NoFeasiblePoint):
        optimize_placement(ctx, JointLimits(), ObjectiveConfig(grid_step=math.radians(10.0)))


def hand_landscape(obj, eligible=None):
    obj = np.asarray(obj, dtype=float)
    n5, n6 = obj.shape
    if eligible is None:
        eligible = np.ones((n5, n6), dtype=bool)
    return ObjectiveLandscape(
        theta5=np.arange(n5, dtype=float),
        theta6=np.arange(n6, dtype=float),
        objective=obj,
        eligible=eligible,
    )


def test_argmax_prefers_smaller_theta6_then_theta5():
    from handleopt import argmax_lexicographic

    landscape = hand_landscape([[1.0, 5.0], [5.0, 2.0], [5.0, 5.0]])
    assert argmax_lexicographic(landscape) == (1, 0)


def test_argmax_skips_ineligible_cells():
    from handleopt import argmax_lexicographic

    eligible = np.array([[True, True], [False, True], [False, True]])
    landscape = hand_landscape([[1.0, 5.0], [9.0, 2.0], [9.0, 5.0]], eligible)
    assert argmax_lexicographic(landscape) == (0, 1)


def test_argmax_raises_when_nothing_is_eligible():
    from handleopt import argmax_lexicographic

    with pytest.raises(NoFeasiblePoint):
        argmax_lexicographic(hand_landscape([[1.0]], np.zeros((1, 1), dtype=bool)))
    nan_grid = hand_landscape(np.full((2, 2), np.nan))
    with pytest.raises(NoFeasiblePoint):
        argmax_lexicographic(nan_grid)


def test_optimum_dominates_every_grid_cell():
    scenario, ctx = toilet_context()
    placement, landscape = optimize_placement(ctx, scenario.limits, scenario.objective)
    vals = landscape.objective[landscape.eligible]
    assert placement.objective_value == np.max(vals)
    assert (vals <= placement.objective_value).all()


def test_torque_scaling_scales_the_landscape_linearly():
    scenario, ctx = toilet_context()
    base = ObjectiveConfig(a=0.0, torque_magnitudes=(1.0, 1.0, 1.0),
                           grid_step=math.radians(2.0))
    double = replace(base, torque_magnitudes=(2.0, 2.0, 2.0))
    l1 = evaluate_grid(ctx, scenario.limits, base)
    l2 = evaluate_grid(ctx, scenario.limits, double)
    np.testing.assert_allclose(l2.objective, 2.0 * l1.objective, rtol=1e-12)
    from handleopt import argmax_lexicographic

    assert argmax_lexicographic(l1) == argmax_lexicographic(l2)


def test_halving_the_step_never_lowers_the_maximum():
    # the half-step grid contains every coarse point bit-for-bit
    scenario, ctx = toilet_context()
    coarse = evaluate_grid(ctx, scenario.limits, scenario.objective)
    fine = evaluate_grid(
        ctx, scenario.limits,
        replace(scenario.objective, grid_step=scenario.objective.grid_step / 2.0),
    )
    assert coarse.objective[coarse.eligible].max() <= fine.objective[fine.eligible].max()
    assert np.isin(coarse.theta5, fine.theta5).all()
    assert np.isin(coarse.theta6, fine.theta6).all()


def test_single_point_grid_is_usable():
    scenario, ctx = toilet_context()
    limits = JointLimits(theta5_min=0.3, theta5_max=0.3 + 1e-9,
                         theta6_min=0.9, theta6_max=0.9 + 1e-9)
    placement, landscape = optimize_placement(ctx, limits, scenario.objective)
    assert landscape.objective.shape == (1, 1)
    assert placement.theta5_opt == 0.3
    assert placement.theta6_opt == 0.9
    assert placement.objective_value == pytest.approx(
        objective(0.3, 0.9, ctx, scenario.objective), abs=1e-12
    )


def test_handle_position_matches_chain(segments):
    shoulder = Vec2(2.0, 0.0)
    h = handle_position(shoulder, 0.0, 0.0, math.pi / 2.0, segments)
    assert h.x == pytest.approx(2.32, abs=1e-12)
    assert h.y == pytest.approx(0.30, abs=1e-12)
    chain = build_chain(shoulder, 0.0, 0.0, math.pi / 2.0, 0.32, 0.30, Vec2(1.0, 1.0))
    assert h == chain.handle


def test_optimizer_results_on_packaged_fixtures():
    for name, pin in FIXTURE_OPTIMA.items():
        scenario = load_scenario(fixture_path(name))
        ctx, _ = make_context(scenario)
        placement, _ = optimize_placement(
            ctx, scenario.limits, scenario.objective,
            robot=scenario.robot, floor_y=scenario.floor_y,
        )
        assert math.degrees(placement.theta5_opt) == pytest.approx(pin["theta5_deg"], abs=1e-9), name
        assert math.degrees(placement.theta6_opt) == pytest.approx(pin["theta6_deg"], abs=1e-9), name
        assert placement.objective_value == pytest.approx(pin["objective"], abs=1e-9), name
        assert placement.handle.x == pytest.approx(pin["handle"][0], abs=1e-9), name
        assert placement.handle.y == pytest.approx(pin["handle"][1], abs=1e-9), name
        assert placement.torque_signs == pin["signs"], name
        assert placement.feasibility == (), name
        assert (placement.handle - ctx.shoulder).norm() <= 0.62 + 1e-12


def test_feasibility_check_reports_height_violations():
    robot = RobotParams()
    low = Placement(0.0, 1.0, Vec2(0.2, -0.1), 0.0, Vec2(0, 0), (1, 1, 1), ())
    found = feasibility_check(low, robot, floor_y=0.0)
    assert [v.kind for v in found] == ["handle_height"]
    assert found[0].limit == 0.15
    high = Placement(0.0, 1.0, Vec2(0.2, 2.0), 0.0, Vec2(0, 0), (1, 1, 1), ())
    found = feasibility_check(high, robot, floor_y=0.0)
    assert [v.kind for v in found] == ["handle_height"]
    assert found[0].limit == 1.60
    # raising the floor moves the window with it
    assert feasibility_check(high, robot, floor_y=1.0) == []


def test_feasibility_check_reach_needs_a_base_point():
    robot = RobotParams()
    placement = Placement(0.0, 1.0, Vec2(0.5, 0.5), 0.0, Vec2(0, 0), (1, 1, 1), ())
    assert feasibility_check(placement, robot, floor_y=0.0) == []
    found = feasibility_check(placement, robot, floor_y=0.0, robot_base=Vec2(0.0, 0.5))
    assert [v.kind for v in found] == ["robot_reach"]
    assert found[0].value == pytest.approx(0.5)
    assert found[0].limit == 0.44
    near = feasibility_check(placement, robot, floor_y=0.0, robot_base=Vec2(0.2, 0.5))
    assert near == []


def test_feasibility_check_flags_out_of_reach_arm():
    robot = RobotParams()
    placement = Placement(0.0, 1.0, Vec2(0.7, 0.5), 0.0, Vec2(0, 0), (1, 1, 1), ())
    found = feasibility_check(placement, robot, floor_y=0.0,
                              shoulder=Vec2(0.0, 0.5), arm_reach=0.62)
    assert [v.kind for v in found] == ["arm_reach"]


def test_constrained_mode_excludes_but_still_scores():
    scenario, ctx = toilet_context()
    robot = replace(scenario.robot, handle_height_range=(0.9, 1.2))
    free = evaluate_grid(ctx, scenario.limits, scenario.objective)
    tight = evaluate_grid(ctx, scenario.limits, scenario.objective,
                          robot=robot, floor_y=scenario.floor_y, constrained=True)
    np.testing.assert_array_equal(free.objective, tight.objective)
    assert (tight.eligible <= free.eligible).all()
    excluded = free.eligible & ~tight.eligible
    assert excluded.any()
    assert np.isfinite(tight.objective[excluded]).all()
    placement, _ = optimize_placement(ctx, scenario.limits, scenario.objective,
                                      robot=robot, floor_y=scenario.floor_y,
                                      constrained=True)
    assert 0.9 <= placement.handle.y - scenario.floor_y <= 1.2


def test_constrained_mode_with_impossible_window_raises():
    scenario, ctx = toilet_context()
    robot = replace(scenario.robot, handle_height_range=(10.0, 11.0))
    with pytest.raises(NoFeasiblePoint):
        optimize_placement(ctx, scenario.limits, scenario.objective,
                           robot=robot, floor_y=scenario.floor_y, constrained=True)


def test_constrained_mode_respects_a_fixed_base():
    scenario, ctx = toilet_context()
    base = Vec2(0.45, 0.9)
    placement, _ = optimize_placement(ctx, scenario.limits, scenario.objective,
                                      robot=scenario.robot, floor_y=scenario.floor_y,
                                      robot_base=base, constrained=True)
    assert (placement.handle - base).norm() <= scenario.robot.reach_limit + 1e-12
    assert placement.feasibility == ()


def test_context_rotation_equivariance(rng):
    scenario, ctx = toilet_context()
    for phi in rng.uniform(-math.pi, math.pi, 3):
        rotated = ctx.rotated(phi)
        a, _ = optimize_placement(ctx, scenario.limits, scenario.objective)
        b, _ = optimize_placement(rotated, scenario.limits, scenario.objective)
        assert abs(a.theta5_opt - b.theta5_opt) < 1e-9
        assert abs(a.theta6_opt - b.theta6_opt) < 1e-9
        assert abs(a.objective_value - b.objective_value) < 1e-9
        assert (b.handle - a.handle.rotated(phi)).norm() < 1e-9


def test_placement_context_rotated_transforms_fields():
    ctx = PlacementContext(
        shoulder=Vec2(1.0, 0.0), theta_04=0.3, com=Vec2(0.5, 0.5),
        v=Vec2(0.0, 1.0), upper_len=0.32, fore_len=0.30,
    )
    rot = ctx.rotated(math.pi / 2.0)
    assert (rot.shoulder - Vec2(0.0, 1.0)).norm() < 1e-15
    assert rot.theta_04 == 0.3 + math.pi / 2.0
    assert (rot.com - Vec2(-0.5, 0.5)).norm() < 1e-15
    assert (rot.v - Vec2(-1.0, 0.0)).norm() < 1e-15
    assert rot.upper_len == 0.32 and rot.fore_len == 0.30
