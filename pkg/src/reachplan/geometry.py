"""Rigid-body poses and the shared pose metric.

A pose is six numbers (x, y, z, roll, pitch, yaw): position in meters and
fixed-axis roll/pitch/yaw in radians with rotation matrix
R = Rz(yaw) @ Ry(pitch) @ Rx(roll).

Canonical ranges are roll, yaw in [-pi, pi) and pitch in [-pi/2, pi/2];
out-of-range pitch is folded through the equivalent representation
(roll+pi, pi-pitch, yaw+pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

# |cos(pitch)| below this marks a pose as too close to the roll/yaw
# degeneracy for its Euler angles to be individually meaningful.
GIMBAL_EPS = 1e-6


def wrap_angle(value: float) -> float:
    """Wrap an angle to [-pi, pi)."""
    r = math.fmod(float(value) + math.pi, TWO_PI)
    if r < 0.0:
        r += TWO_PI
    return r - math.pi


def canonicalize_rpy(roll: float, pitch: float, yaw: float) -> tuple[float, float, float]:
    """Reduce an RPY triple to the canonical ranges without changing R."""
    p = wrap_angle(pitch)
    if abs(p) > math.pi / 2.0:
        roll = roll + math.pi
        yaw = yaw + math.pi
        p = wrap_angle(math.pi - p)
    return wrap_angle(roll), p, wrap_angle(yaw)


@dataclass(frozen=True)
class Pose6:
    """A 6-DOF pose: position (m) and fixed-axis roll/pitch/yaw (rad)."""

    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    roll: float = 0.0
    pitch: float = 0.0
    yaw: float = 0.0

    @classmethod
    def canonical(cls, x, y, z, roll, pitch, yaw) -> "Pose6":
        r, p, w = canonicalize_rpy(roll, pitch, yaw)
        return cls(float(x), float(y), float(z), r, p, w)

    @classmethod
    def from_array(cls, values) -> "Pose6":
        x, y, z, r, p, w = (float(v) for v in values)
        return cls(x, y, z, r, p, w)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z, self.roll, self.pitch, self.yaw])

    def canonicalized(self) -> "Pose6":
        return Pose6.canonical(self.x, self.y, self.z, self.roll, self.pitch, self.yaw)

    @property
    def near_gimbal(self) -> bool:
        return abs(math.cos(self.pitch)) < GIMBAL_EPS


def rpy_matrix(roll: float, pitch: float, yaw: float) -> np.ndarray:
    """Rotation matrix Rz(yaw) @ Ry(pitch) @ Rx(roll)."""
    cr, sr = math.cos(roll), math.sin(roll)
    cp, sp = math.cos(pitch), math.sin(pitch)
    cy, sy = math.cos(yaw), math.sin(yaw)
    return np.array(
        [
            [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
            [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
            [-sp, cp * sr, cp * cr],
        ]
    )


def matrix_rpy(rot: np.ndarray) -> tuple[float, float, float]:
    """Extract canonical roll/pitch/yaw from a rotation matrix.

    Near the pitch = +-pi/2 degeneracy roll is fixed to zero and the
    remaining rotation folded into yaw.
    """
    sp = -float(rot[2, 0])
    sp = min(1.0, max(-1.0, sp))
    pitch = math.asin(sp)
    if abs(math.cos(pitch)) < GIMBAL_EPS:
        roll = 0.0
        yaw = math.atan2(-float(rot[0, 1]), float(rot[1, 1]))
    else:
        roll = math.atan2(float(rot[2, 1]), float(rot[2, 2]))
        yaw = math.atan2(float(rot[1, 0]), float(rot[0, 0]))
    return wrap_angle(roll), pitch, wrap_angle(yaw)


def pose_matrix(pose: Pose6) -> np.ndarray:
    """Homogeneous 4x4 transform of a pose."""
    t = np.eye(4)
    t[:3, :3] = rpy_matrix(pose.roll, pose.pitch, pose.yaw)
    t[0, 3] = pose.x
    t[1, 3] = pose.y
    t[2, 3] = pose.z
    return t


def matrix_pose(transform: np.ndarray) -> Pose6:
    """Canonical pose of a homogeneous 4x4 transform."""
    roll, pitch, yaw = matrix_rpy(transform[:3, :3])
    return Pose6(
        float(transform[0, 3]), float(transform[1, 3]), float(transform[2, 3]),
        roll, pitch, yaw,
    )


def compose(a: Pose6, b: Pose6) -> Pose6:
    """Pose of frame b expressed through frame a (a then b)."""
    return matrix_pose(pose_matrix(a) @ pose_matrix(b))


def invert(pose: Pose6) -> Pose6:
    t = pose_matrix(pose)
    ti = np.eye(4)
    ti[:3, :3] = t[:3, :3].T
    ti[:3, 3] = -t[:3, :3].T @ t[:3, 3]
    return matrix_pose(ti)


def planar_base_matrix(x: float, y: float, heading: float) -> np.ndarray:
    """World transform of a mobile base at (x, y) with the given heading."""
    c, s = math.cos(heading), math.sin(heading)
    return np.array(
        [
            [c, -s, 0.0, float(x)],
            [s, c, 0.0, float(y)],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


def pose_delta(a: Pose6, b: Pose6) -> np.ndarray:
    """Componentwise difference a - b with wrapped angular entries."""
    return np.array(
        [
            a.x - b.x,
            a.y - b.y,
            a.z - b.z,
            wrap_angle(a.roll - b.roll),
            wrap_angle(a.pitch - b.pitch),
            wrap_angle(a.yaw - b.yaw),
        ]
    )


def metric_norm(delta, rot_weight: float = 1.0, free=None) -> float:
    """Weighted norm of a 6-component pose displacement.

    sqrt(|dpos|^2 + rot_weight^2 * |dang|^2); entries flagged True in
    ``free`` are excluded.
    """
    d = np.asarray(delta, dtype=float).copy()
    if free is not None:
        d[np.asarray(free, dtype=bool)] = 0.0
    return float(math.sqrt(d[0] ** 2 + d[1] ** 2 + d[2] ** 2
                           + rot_weight ** 2 * (d[3] ** 2 + d[4] ** 2 + d[5] ** 2)))


def pose_metric(a: Pose6, b: Pose6, rot_weight: float = 1.0, free=None) -> float:
    """Distance between two poses under the shared weighted metric."""
    return metric_norm(pose_delta(a, b), rot_weight=rot_weight, free=free)
