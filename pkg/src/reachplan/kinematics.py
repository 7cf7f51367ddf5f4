"""Serial-chain manipulator model.

Forward kinematics, geometric Jacobian, manipulability, a damped
pseudo-inverse IK refiner, and the closed-form two-link planar IK used as a
test oracle.  Joints are revolute and parameterized by per-joint transforms
A(theta) = Rz(theta + theta_offset) Tz(d) Tx(a) Rx(alpha).
"""

from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    Pose6,
    matrix_pose,
    metric_norm,
    pose_matrix,
    wrap_angle,
)

TWO_PI = 2.0 * math.pi

# Sentinel returned by planar_two_link_ik for the target-at-origin case with
# equal link lengths, where the solution set is a continuum.
DEGENERATE_PLANAR_TARGET = "degenerate-planar-target"


@dataclass(frozen=True)
class Joint:
    """One revolute joint: transform parameters and limits (SI units)."""

    a: float = 0.0
    alpha: float = 0.0
    d: float = 0.0
    theta_offset: float = 0.0
    limit_lo: float = -math.pi
    limit_hi: float = math.pi

    def __post_init__(self):
        if not self.limit_lo < self.limit_hi:
            raise ValueError("joint limits must satisfy lower < upper")
        if self.limit_lo < -TWO_PI - 1e-12 or self.limit_hi > TWO_PI + 1e-12:
            raise ValueError("joint limits must lie within [-2*pi, 2*pi]")


@dataclass(frozen=True)
class KinematicChain:
    """An ordered list of revolute joints plus a tool transform."""

    joints: tuple[Joint, ...]
    tool: Pose6 = field(default_factory=Pose6)

    def __post_init__(self):
        if len(self.joints) < 1:
            raise ValueError("chain needs at least one joint")
        object.__setattr__(self, "joints", tuple(self.joints))

    @property
    def njoints(self) -> int:
        return len(self.joints)

    @property
    def is_planar(self) -> bool:
        """True when all motion stays in the z = 0 plane (joints about z)."""
        for j in self.joints:
            if abs(j.alpha) > 1e-12 or abs(j.d) > 1e-12:
                return False
        t = self.tool
        return abs(t.z) <= 1e-12 and abs(t.roll) <= 1e-12 and abs(t.pitch) <= 1e-12

    def fingerprint(self) -> bytes:
        """32-byte content digest of the chain parameters."""
        h = hashlib.sha256()
        h.update(struct.pack("<I", self.njoints))
        for j in self.joints:
            h.update(struct.pack("<6d", j.a, j.alpha, j.d, j.theta_offset,
                                 j.limit_lo, j.limit_hi))
        t = self.tool
        h.update(struct.pack("<6d", t.x, t.y, t.z, t.roll, t.pitch, t.yaw))
        return h.digest()

    def check_config(self, config) -> np.ndarray:
        q = np.asarray(config, dtype=float)
        if q.shape != (self.njoints,):
            raise ValueError(
                f"config has {q.shape} entries, chain has {self.njoints} joints")
        return q

    def within_limits(self, config, tol: float = 1e-9) -> bool:
        q = self.check_config(config)
        for value, joint in zip(q, self.joints):
            if value < joint.limit_lo - tol or value > joint.limit_hi + tol:
                return False
        return True


def joint_transform(joint: Joint, theta: float) -> np.ndarray:
    th = theta + joint.theta_offset
    ct, st = math.cos(th), math.sin(th)
    ca, sa = math.cos(joint.alpha), math.sin(joint.alpha)
    return np.array(
        [
            [ct, -st * ca, st * sa, joint.a * ct],
            [st, ct * ca, -ct * sa, joint.a * st],
            [0.0, sa, ca, joint.d],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


def link_frames(chain: KinematicChain, config) -> list[np.ndarray]:
    """Cumulative transforms for link 0 (base) through link n.

    frames[0] is the identity; frames[i] is the frame after joint i.  The
    end-effector frame is frames[n] @ pose_matrix(chain.tool).
    """
    q = chain.check_config(config)
    frames = [np.eye(4)]
    t = np.eye(4)
    for joint, theta in zip(chain.joints, q):
        t = t @ joint_transform(joint, float(theta))
        frames.append(t)
    return frames


def ee_matrix(chain: KinematicChain, config) -> np.ndarray:
    return link_frames(chain, config)[-1] @ pose_matrix(chain.tool)


def forward_kinematics(chain: KinematicChain, config) -> Pose6:
    """End-effector pose at the given configuration (canonical RPY)."""
    return matrix_pose(ee_matrix(chain, config))


def jacobian(chain: KinematicChain, config) -> np.ndarray:
    """Geometric Jacobian (6 x n): linear (m/s) over angular (rad/s) rows."""
    frames = link_frames(chain, config)
    ee = frames[-1] @ pose_matrix(chain.tool)
    p_ee = ee[:3, 3]
    cols = np.zeros((6, chain.njoints))
    for i in range(chain.njoints):
        z = frames[i][:3, 2]
        o = frames[i][:3, 3]
        cols[:3, i] = np.cross(z, p_ee - o)
        cols[3:, i] = z
    return cols


def manipulability_rows(chain: KinematicChain) -> tuple[int, ...]:
    """Task rows used in the manipulability measure for this chain."""
    if chain.is_planar:
        return (0, 1)
    if chain.njoints >= 6:
        return (0, 1, 2, 3, 4, 5)
    return (0, 1, 2)


def manipulability(chain: KinematicChain, config, rows=None) -> float:
    """sqrt(det(J Jt)) over the task-relevant Jacobian rows; 0 at singularities."""
    if rows is None:
        rows = manipulability_rows(chain)
    j = jacobian(chain, config)[list(rows), :]
    if j.shape[0] == j.shape[1]:
        # square task Jacobian: sqrt(det(J Jt)) == |det J|, numerically exact
        return abs(float(np.linalg.det(j)))
    det = float(np.linalg.det(j @ j.T))
    return math.sqrt(det) if det > 0.0 else 0.0


def _clamp_to_limits(chain: KinematicChain, q: np.ndarray) -> np.ndarray:
    lo = np.array([j.limit_lo for j in chain.joints])
    hi = np.array([j.limit_hi for j in chain.joints])
    return np.clip(q, lo, hi)


def _rotvec_of(rot: np.ndarray) -> np.ndarray:
    """Axis-angle vector of a rotation matrix (magnitude <= pi).

    Uses atan2(sin, cos) so small angles keep full precision.
    """
    vec = 0.5 * np.array([rot[2, 1] - rot[1, 2], rot[0, 2] - rot[2, 0],
                          rot[1, 0] - rot[0, 1]])
    s = float(np.linalg.norm(vec))          # sin(angle)
    c = (float(np.trace(rot)) - 1.0) / 2.0  # cos(angle)
    c = min(1.0, max(-1.0, c))
    angle = math.atan2(s, c)
    if angle < 1e-300:
        return np.zeros(3)
    if c > -0.99:
        return vec * (angle / s) if s > 0.0 else np.zeros(3)
    # angle near pi: recover the axis from the diagonal
    diag = np.clip((np.diag(rot) + 1.0) / 2.0, 0.0, None)
    axis = np.sqrt(diag)
    k = int(np.argmax(axis))
    axis[(k + 1) % 3] = math.copysign(axis[(k + 1) % 3],
                                      rot[k, (k + 1) % 3] + rot[(k + 1) % 3, k])
    axis[(k + 2) % 3] = math.copysign(axis[(k + 2) % 3],
                                      rot[k, (k + 2) % 3] + rot[(k + 2) % 3, k])
    norm = float(np.linalg.norm(axis))
    return angle * axis / norm if norm > 0.0 else np.zeros(3)


def refine_ik(
    chain: KinematicChain,
    seed,
    target: Pose6,
    tol: float = 1e-9,
    max_iter: int = 200,
    free=None,
    damping: float = 1e-3,
    step_limit: float = 0.2,
    rot_weight: float = 1.0,
):
    """Damped pseudo-inverse IK from a seed configuration.

    Pose components flagged True in ``free`` are left unconstrained.  Returns
    a configuration within joint limits whose pose error is <= tol under the
    shared pose metric, or None if max_iter iterations do not converge.
    Raises ArithmeticError if the iteration produces non-finite values.
    """
    q = _clamp_to_limits(chain, chain.check_config(seed).copy())
    free_mask = np.zeros(6, dtype=bool) if free is None else np.asarray(free, dtype=bool)
    if free_mask.shape != (6,):
        raise ValueError("free mask must have six entries")
    keep = ~free_mask
    target_t = pose_matrix(target)
    use_rotvec = bool(keep[3:].all())

    for it in range(max_iter + 1):
        current_t = ee_matrix(chain, q)
        err = np.zeros(6)
        err[:3] = target_t[:3, 3] - current_t[:3, 3]
        if use_rotvec:
            err[3:] = _rotvec_of(target_t[:3, :3] @ current_t[:3, :3].T)
        else:
            cur = matrix_pose(current_t)
            err[3] = wrap_angle(target.roll - cur.roll)
            err[4] = wrap_angle(target.pitch - cur.pitch)
            err[5] = wrap_angle(target.yaw - cur.yaw)
        if not np.isfinite(err).all():
            raise ArithmeticError("IK refinement produced non-finite pose error")
        if metric_norm(err, rot_weight=rot_weight, free=free_mask) <= tol:
            return q
        if it == max_iter:
            break
        j = jacobian(chain, q)[keep, :]
        e = err[keep]
        k = j.shape[0]
        step = j.T @ np.linalg.solve(j @ j.T + damping**2 * np.eye(k), e)
        step = np.clip(step, -step_limit, step_limit)
        if not np.isfinite(step).all():
            raise ArithmeticError("IK refinement produced non-finite step")
        q = _clamp_to_limits(chain, q + step)
    return None


def planar_two_link_ik(l1: float, l2: float, x: float, y: float):
    """Closed-form IK of a two-link planar arm (joints about z).

    Returns a list with zero, one, or two configurations [theta1, theta2]
    whose forward position is (x, y), or DEGENERATE_PLANAR_TARGET for the
    origin target with l1 == l2 (a solution continuum).
    """
    if l1 <= 0.0 or l2 <= 0.0:
        raise ValueError("link lengths must be positive")
    r2 = x * x + y * y
    if r2 < 1e-24 and abs(l1 - l2) < 1e-12:
        return DEGENERATE_PLANAR_TARGET
    c2 = (r2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)
    if c2 > 1.0:
        if c2 > 1.0 + 1e-9:
            return []
        c2 = 1.0
    if c2 < -1.0:
        if c2 < -1.0 - 1e-9:
            return []
        c2 = -1.0
    t2 = math.acos(c2)
    solutions = []
    # theta2 = 0 and theta2 = pi each collapse the two elbow branches
    branches = [t2] if t2 < 1e-12 or t2 > math.pi - 1e-12 else [t2, -t2]
    for theta2 in branches:
        theta1 = math.atan2(y, x) - math.atan2(
            l2 * math.sin(theta2), l1 + l2 * math.cos(theta2))
        solutions.append(np.array([wrap_angle(theta1), wrap_angle(theta2)]))
    return solutions


def planar_chain(*lengths: float, limit_lo: float = -math.pi,
                 limit_hi: float = math.pi) -> KinematicChain:
    """A planar chain with the given link lengths, all joints about z."""
    return KinematicChain(tuple(
        Joint(a=float(l), limit_lo=limit_lo, limit_hi=limit_hi) for l in lengths))
