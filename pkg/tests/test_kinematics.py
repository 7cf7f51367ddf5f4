import math

import numpy as np
import pytest

import reachplan as rp
from reachplan.geometry import Pose6, pose_metric
from reachplan.kinematics import (
    DEGENERATE_PLANAR_TARGET,
    Joint,
    KinematicChain,
    manipulability_rows,
)

from .support import numeric_jacobian, random_chain, wrapped_inf_dist

POSITION_FREE = (False, False, False, True, True, True)


def test_fk_straight_arm(chain2):
    pose = rp.forward_kinematics(chain2, [0.0, 0.0])
    np.testing.assert_allclose(pose.as_array(), [2, 0, 0, 0, 0, 0], atol=1e-12)


def test_fk_quarter_turn(chain2):
    pose = rp.forward_kinematics(chain2, [math.pi / 2, 0.0])
    np.testing.assert_allclose(pose.as_array(),
                               [0, 2, 0, 0, 0, math.pi / 2], atol=1e-12)


def test_fk_bent_elbow_matches_hand_composition(chain2):
    # rotate (1,0) by 45 deg, then a further 90 deg for the second link
    c, s = math.cos(math.pi / 4), math.sin(math.pi / 4)
    first = np.array([c, s])
    second = np.array([c * 0 - s * 1, s * 0 + c * 1])  # 135 deg direction
    expected = first + second
    pose = rp.forward_kinematics(chain2, [math.pi / 4, math.pi / 2])
    np.testing.assert_allclose([pose.x, pose.y], expected, atol=1e-12)
    assert pose.yaw == pytest.approx(3 * math.pi / 4)


def test_fk_dimension_mismatch(chain2):
    with pytest.raises(ValueError):
        rp.forward_kinematics(chain2, [0.0, 0.0, 0.0])


def test_joint_limit_validation():
    with pytest.raises(ValueError):
        Joint(limit_lo=1.0, limit_hi=1.0)
    with pytest.raises(ValueError):
        Joint(limit_lo=-7.0, limit_hi=0.0)
    with pytest.raises(ValueError):
        KinematicChain(())


def test_jacobian_single_link():
    chain = rp.planar_chain(1.0)
    col = rp.jacobian(chain, [0.0]).ravel()
    np.testing.assert_allclose(col, [0, 1, 0, 0, 0, 1], atol=1e-12)


def test_jacobian_two_link_second_column(chain2):
    j = rp.jacobian(chain2, [0.0, 0.0])
    np.testing.assert_allclose(j[:3, 1], [0, 1, 0], atol=1e-10)


def test_jacobian_matches_finite_differences():
    rng = np.random.default_rng(42)
    for _ in range(200):
        chain = random_chain(rng)
        config = rng.uniform(-math.pi, math.pi, chain.njoints)
        analytic = rp.jacobian(chain, config)
        numeric = numeric_jacobian(chain, config)
        np.testing.assert_allclose(analytic, numeric, atol=1e-5)


def test_manipulability_straight_arm_singular(chain2):
    rng = np.random.default_rng(5)
    for theta1 in rng.uniform(-math.pi, math.pi, 20):
        assert rp.manipulability(chain2, [theta1, 0.0]) < 1e-9


def test_manipulability_right_angle(chain2):
    # independent numeric determinant of the planar position sub-Jacobian
    def planar_jac(config, h=1e-7):
        cols = []
        for i in range(2):
            hi = np.array(config, dtype=float)
            lo = hi.copy()
            hi[i] += h
            lo[i] -= h
            phi = rp.forward_kinematics(chain2, hi)
            plo = rp.forward_kinematics(chain2, lo)
            cols.append([(phi.x - plo.x) / (2 * h), (phi.y - plo.y) / (2 * h)])
        return np.array(cols).T

    j = planar_jac([0.0, math.pi / 2])
    oracle = math.sqrt(np.linalg.det(j @ j.T))
    w = rp.manipulability(chain2, [0.0, math.pi / 2])
    assert w == pytest.approx(1.0, abs=1e-6)
    assert w == pytest.approx(oracle, abs=1e-6)
    assert rp.manipulability(chain2, [0.3, math.pi / 2]) > 0.5


def test_manipulability_matches_svd():
    rng = np.random.default_rng(9)
    chain3 = rp.planar_chain(0.5, 0.4, 0.3)
    for _ in range(25):
        config = rng.uniform(-math.pi, math.pi, 3)
        rows = manipulability_rows(chain3)
        j = rp.jacobian(chain3, config)[list(rows), :]
        oracle = float(np.prod(np.linalg.svd(j, compute_uv=False)))
        assert rp.manipulability(chain3, config) == pytest.approx(oracle, abs=1e-8)


def test_manipulability_row_selection():
    assert manipulability_rows(rp.planar_chain(1.0, 1.0)) == (0, 1)
    spatial = KinematicChain(tuple(
        Joint(a=0.3, alpha=math.pi / 2) for _ in range(3)))
    assert manipulability_rows(spatial) == (0, 1, 2)
    six = KinematicChain(tuple(Joint(a=0.2, alpha=0.4) for _ in range(6)))
    assert manipulability_rows(six) == (0, 1, 2, 3, 4, 5)


def test_refine_ik_fixed_point(chain2):
    seed = np.array([0.3, 0.8])
    target = rp.forward_kinematics(chain2, seed)
    result = rp.refine_ik(chain2, seed, target, tol=1e-9)
    np.testing.assert_allclose(result, seed, atol=1e-12)


def test_refine_ik_matches_analytic_branch(chain2):
    target_xy = (1.2, 0.5)
    branches = rp.planar_two_link_ik(1.0, 1.0, *target_xy)
    target = Pose6(target_xy[0], target_xy[1], 0, 0, 0, 0)
    seed = branches[0] + np.array([0.15, -0.2])
    result = rp.refine_ik(chain2, seed, target, tol=1e-10, free=POSITION_FREE)
    assert result is not None
    pose = rp.forward_kinematics(chain2, result)
    assert pose_metric(pose, target, free=POSITION_FREE) <= 1e-10
    assert min(np.linalg.norm(result - b) for b in branches) < 1e-6


def test_refine_ik_unreachable_returns_none(chain2):
    target = Pose6(3.0, 0.0, 0, 0, 0, 0)
    assert rp.refine_ik(chain2, [0.1, 0.1], target, tol=1e-9, max_iter=80,
                        free=POSITION_FREE) is None


def test_refine_ik_respects_limits():
    chain = rp.planar_chain(1.0, 1.0, limit_lo=-1.0, limit_hi=1.0)
    target = rp.forward_kinematics(chain, [0.9, 0.9])
    result = rp.refine_ik(chain, [0.5, 0.5], target, tol=1e-8)
    assert result is not None
    assert chain.within_limits(result)
    # iterates are clamped: no intermediate step may leave the limits
    stalled = rp.refine_ik(chain, [0.0, 0.0],
                           rp.forward_kinematics(chain, [0.95, -0.95]),
                           tol=1e-12, max_iter=20)
    assert stalled is None or chain.within_limits(stalled)


def test_refine_ik_success_is_sound(chain2):
    rng = np.random.default_rng(17)
    tol = 1e-8
    for _ in range(50):
        truth = rng.uniform(-math.pi + 0.2, math.pi - 0.2, 2)
        target = rp.forward_kinematics(chain2, truth)
        seed = truth + rng.uniform(-0.3, 0.3, 2)
        result = rp.refine_ik(chain2, seed, target, tol=tol, max_iter=300)
        if result is not None:
            pose = rp.forward_kinematics(chain2, result)
            assert pose_metric(pose, target) <= tol


def test_planar_ik_boundary_single_solution():
    sols = rp.planar_two_link_ik(1.0, 1.0, 2.0, 0.0)
    assert len(sols) == 1
    np.testing.assert_allclose(sols[0], [0.0, 0.0], atol=1e-9)


def test_planar_ik_degenerate_marker():
    assert rp.planar_two_link_ik(1.0, 1.0, 0.0, 0.0) is DEGENERATE_PLANAR_TARGET


def test_planar_ik_two_branches():
    sols = rp.planar_two_link_ik(1.0, 1.0, 1.0, 1.0)
    assert len(sols) == 2
    thetas2 = sorted(s[1] for s in sols)
    np.testing.assert_allclose(thetas2, [-math.pi / 2, math.pi / 2], atol=1e-12)
    thetas1 = sorted(s[0] for s in sols)
    np.testing.assert_allclose(thetas1, [0.0, math.pi / 2], atol=1e-12)


def test_planar_ik_fk_round_trip(chain2):
    rng = np.random.default_rng(23)
    for _ in range(200):
        truth = rng.uniform(-math.pi, math.pi, 2)
        pose = rp.forward_kinematics(chain2, truth)
        sols = rp.planar_two_link_ik(1.0, 1.0, pose.x, pose.y)
        assert sols is not DEGENERATE_PLANAR_TARGET and len(sols) >= 1
        for sol in sols:
            p = rp.forward_kinematics(chain2, sol)
            assert math.hypot(p.x - pose.x, p.y - pose.y) < 1e-9
        assert any(wrapped_inf_dist(sol, truth) < 1e-9 for sol in sols)


def test_planar_ik_completeness_dense_sweep(chain2):
    """No third solution exists: the elbow-angle equation has at most two
    roots, confirmed by a dense sweep."""
    rng = np.random.default_rng(29)
    sweep = np.arange(-math.pi, math.pi, 1e-3)
    cos_sweep = np.cos(sweep)
    for _ in range(1000):
        truth = rng.uniform(-math.pi, math.pi, 2)
        pose = rp.forward_kinematics(chain2, truth)
        r2 = pose.x**2 + pose.y**2
        sols = rp.planar_two_link_ik(1.0, 1.0, pose.x, pose.y)
        residual = 2.0 + 2.0 * cos_sweep - r2
        signs = np.sign(residual)
        crossings = int(np.count_nonzero(np.diff(signs[signs != 0])))
        assert crossings <= 2
        for sol in sols:
            p = rp.forward_kinematics(chain2, sol)
            assert math.hypot(p.x - pose.x, p.y - pose.y) < 1e-9
        # every sweep angle that nearly solves the radius equation sits near
        # a returned elbow angle (the residual is quadratic at its roots
        # when sin(theta2) ~ 0, hence the sqrt-scaled tolerance)
        near = sweep[np.abs(residual) < 1e-3]
        for theta2 in near[:: max(1, len(near) // 8)]:
            assert min(abs(theta2 - s[1]) for s in sols) < 5e-2
