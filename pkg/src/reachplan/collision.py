"""Boolean collision checks between spheres, capsules, and oriented boxes.

Shapes are closed solids: touching counts as collision.  All pairwise tests
are closed-form (boxes against boxes use separating axes; capsules against
boxes minimize an exact piecewise-quadratic segment distance), so results
carry no sampling error.  The hot paths work on flat tuples of floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import Pose6, pose_matrix, planar_base_matrix, rpy_matrix
from .kinematics import KinematicChain, link_frames


@dataclass(frozen=True)
class Sphere:
    center: tuple[float, float, float]
    radius: float

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ValueError("sphere radius must be positive")
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))


@dataclass(frozen=True)
class Capsule:
    p0: tuple[float, float, float]
    p1: tuple[float, float, float]
    radius: float

    def __post_init__(self):
        if not self.radius > 0.0:
            raise ValueError("capsule radius must be positive")
        object.__setattr__(self, "p0", tuple(float(v) for v in self.p0))
        object.__setattr__(self, "p1", tuple(float(v) for v in self.p1))


@dataclass(frozen=True)
class Box:
    center: tuple[float, float, float]
    half_extents: tuple[float, float, float]
    rotation: tuple[float, float, float] = (0.0, 0.0, 0.0)  # roll, pitch, yaw

    def __post_init__(self):
        if not all(h > 0.0 for h in self.half_extents):
            raise ValueError("box half-extents must be positive")
        object.__setattr__(self, "center", tuple(float(v) for v in self.center))
        object.__setattr__(self, "half_extents",
                           tuple(float(v) for v in self.half_extents))
        object.__setattr__(self, "rotation",
                           tuple(float(v) for v in self.rotation))


Shape = Sphere | Capsule | Box


@dataclass(frozen=True)
class PlacedShape:
    """A shape together with the pose of its frame (world or link frame)."""

    shape: Shape
    pose: Pose6 = field(default_factory=Pose6)


# ---------------------------------------------------------------------------
# baked representation: plain float tuples in the world frame
#   ("s", cx, cy, cz, r)
#   ("c", ax, ay, az, bx, by, bz, r)
#   ("b", cx, cy, cz, xx, xy, xz, yx, yy, yz, zx, zy, zz, hx, hy, hz)


def bake_shape(shape: Shape, transform: np.ndarray, margin: float = 0.0):
    """World-frame tuple of a shape under a 4x4 frame transform."""
    r = transform[:3, :3]
    t = transform[:3, 3]
    if isinstance(shape, Sphere):
        c = r @ shape.center + t
        return ("s", float(c[0]), float(c[1]), float(c[2]),
                shape.radius + margin)
    if isinstance(shape, Capsule):
        a = r @ shape.p0 + t
        b = r @ shape.p1 + t
        return ("c", float(a[0]), float(a[1]), float(a[2]),
                float(b[0]), float(b[1]), float(b[2]), shape.radius + margin)
    if isinstance(shape, Box):
        c = r @ shape.center + t
        rb = r @ rpy_matrix(*shape.rotation)
        hx, hy, hz = shape.half_extents
        return ("b", float(c[0]), float(c[1]), float(c[2]),
                float(rb[0, 0]), float(rb[1, 0]), float(rb[2, 0]),
                float(rb[0, 1]), float(rb[1, 1]), float(rb[2, 1]),
                float(rb[0, 2]), float(rb[1, 2]), float(rb[2, 2]),
                hx + margin, hy + margin, hz + margin)
    raise TypeError(f"unknown shape type {type(shape)!r}")


def bake_placed(placed: PlacedShape, margin: float = 0.0):
    return bake_shape(placed.shape, pose_matrix(placed.pose), margin)


def _seg_point_sqdist(ax, ay, az, bx, by, bz, px, py, pz):
    dx, dy, dz = bx - ax, by - ay, bz - az
    dd = dx * dx + dy * dy + dz * dz
    if dd <= 0.0:
        t = 0.0
    else:
        t = ((px - ax) * dx + (py - ay) * dy + (pz - az) * dz) / dd
        t = min(1.0, max(0.0, t))
    qx, qy, qz = ax + t * dx, ay + t * dy, az + t * dz
    return (px - qx) ** 2 + (py - qy) ** 2 + (pz - qz) ** 2


def _seg_seg_sqdist(ax, ay, az, bx, by, bz, cx, cy, cz, dx_, dy_, dz_):
    # Ericson, Real-Time Collision Detection, closest points of two segments
    d1x, d1y, d1z = bx - ax, by - ay, bz - az
    d2x, d2y, d2z = dx_ - cx, dy_ - cy, dz_ - cz
    rx, ry, rz = ax - cx, ay - cy, az - cz
    a = d1x * d1x + d1y * d1y + d1z * d1z
    e = d2x * d2x + d2y * d2y + d2z * d2z
    f = d2x * rx + d2y * ry + d2z * rz
    if a <= 1e-18 and e <= 1e-18:
        return rx * rx + ry * ry + rz * rz
    if a <= 1e-18:
        s = 0.0
        t = min(1.0, max(0.0, f / e))
    else:
        c = d1x * rx + d1y * ry + d1z * rz
        if e <= 1e-18:
            t = 0.0
            s = min(1.0, max(0.0, -c / a))
        else:
            b = d1x * d2x + d1y * d2y + d1z * d2z
            denom = a * e - b * b
            s = min(1.0, max(0.0, (b * f - c * e) / denom)) if denom > 1e-18 else 0.0
            t = (b * s + f) / e
            if t < 0.0:
                t = 0.0
                s = min(1.0, max(0.0, -c / a))
            elif t > 1.0:
                t = 1.0
                s = min(1.0, max(0.0, (b - c) / a))
    px, py, pz = ax + s * d1x, ay + s * d1y, az + s * d1z
    qx, qy, qz = cx + t * d2x, cy + t * d2y, cz + t * d2z
    return (px - qx) ** 2 + (py - qy) ** 2 + (pz - qz) ** 2


def _to_box_frame(box, px, py, pz):
    dx, dy, dz = px - box[1], py - box[2], pz - box[3]
    return (dx * box[4] + dy * box[5] + dz * box[6],
            dx * box[7] + dy * box[8] + dz * box[9],
            dx * box[10] + dy * box[11] + dz * box[12])


def _point_box_sqdist(box, px, py, pz):
    lx, ly, lz = _to_box_frame(box, px, py, pz)
    ex = max(abs(lx) - box[13], 0.0)
    ey = max(abs(ly) - box[14], 0.0)
    ez = max(abs(lz) - box[15], 0.0)
    return ex * ex + ey * ey + ez * ez


def _segment_box_sqdist(box, ax, ay, az, bx, by, bz):
    """Exact min over t in [0,1] of the point-to-box squared distance.

    In the box frame each axis contributes a piecewise-linear excess, so the
    squared distance is piecewise quadratic in t; minimize per piece.
    """
    s = _to_box_frame(box, ax, ay, az)
    e = _to_box_frame(box, bx, by, bz)
    d = (e[0] - s[0], e[1] - s[1], e[2] - s[2])
    h = (box[13], box[14], box[15])

    cuts = {0.0, 1.0}
    for i in range(3):
        if abs(d[i]) > 1e-15:
            for bound in (h[i], -h[i]):
                t = (bound - s[i]) / d[i]
                if 0.0 < t < 1.0:
                    cuts.add(t)
    ts = sorted(cuts)

    best = math.inf
    for t0, t1 in zip(ts[:-1], ts[1:]):
        tm = 0.5 * (t0 + t1)
        qa = 0.0
        qb = 0.0
        qc = 0.0
        for i in range(3):
            pi = s[i] + tm * d[i]
            if pi > h[i]:
                off = s[i] - h[i]
            elif pi < -h[i]:
                off = s[i] + h[i]
            else:
                continue
            qa += d[i] * d[i]
            qb += 2.0 * d[i] * off
            qc += off * off
        if qa > 1e-18:
            tstar = min(t1, max(t0, -qb / (2.0 * qa)))
        else:
            tstar = t0
        val = qa * tstar * tstar + qb * tstar + qc
        if val < best:
            best = val
        if best <= 0.0:
            return 0.0
    return best


def _box_box_collide(a, b):
    """Separating-axis test; touching boxes count as colliding."""
    au = ((a[4], a[5], a[6]), (a[7], a[8], a[9]), (a[10], a[11], a[12]))
    bu = ((b[4], b[5], b[6]), (b[7], b[8], b[9]), (b[10], b[11], b[12]))
    ah = (a[13], a[14], a[15])
    bh = (b[13], b[14], b[15])
    tx, ty, tz = b[1] - a[1], b[2] - a[2], b[3] - a[3]
    # translation and relative rotation in a's frame
    t = tuple(tx * au[i][0] + ty * au[i][1] + tz * au[i][2] for i in range(3))
    rot = [[sum(au[i][k] * bu[j][k] for k in range(3)) for j in range(3)]
           for i in range(3)]
    # absolute values padded to keep near-parallel cross axes conservative
    absr = [[abs(rot[i][j]) + 1e-12 for j in range(3)] for i in range(3)]

    for i in range(3):
        if abs(t[i]) > ah[i] + bh[0] * absr[i][0] + bh[1] * absr[i][1] + bh[2] * absr[i][2]:
            return False
    for j in range(3):
        proj = abs(t[0] * rot[0][j] + t[1] * rot[1][j] + t[2] * rot[2][j])
        if proj > bh[j] + ah[0] * absr[0][j] + ah[1] * absr[1][j] + ah[2] * absr[2][j]:
            return False
    for i in range(3):
        i1, i2 = (i + 1) % 3, (i + 2) % 3
        for j in range(3):
            j1, j2 = (j + 1) % 3, (j + 2) % 3
            ra = ah[i1] * absr[i2][j] + ah[i2] * absr[i1][j]
            rb = bh[j1] * absr[i][j2] + bh[j2] * absr[i][j1]
            proj = abs(t[i2] * rot[i1][j] - t[i1] * rot[i2][j])
            if proj > ra + rb:
                return False
    return True


def baked_collide(a, b) -> bool:
    """Collision between two baked world-frame shapes."""
    ka, kb = a[0], b[0]
    if ka > kb:  # order tags: "b" < "c" < "s"
        a, b, ka, kb = b, a, kb, ka
    if ka == "s":  # sphere-sphere
        rr = a[4] + b[4]
        dx, dy, dz = a[1] - b[1], a[2] - b[2], a[3] - b[3]
        return dx * dx + dy * dy + dz * dz <= rr * rr
    if ka == "c":
        if kb == "s":
            rr = a[7] + b[4]
            return _seg_point_sqdist(a[1], a[2], a[3], a[4], a[5], a[6],
                                     b[1], b[2], b[3]) <= rr * rr
        rr = a[7] + b[7]  # capsule-capsule
        return _seg_seg_sqdist(a[1], a[2], a[3], a[4], a[5], a[6],
                               b[1], b[2], b[3], b[4], b[5], b[6]) <= rr * rr
    if kb == "s":
        return _point_box_sqdist(a, b[1], b[2], b[3]) <= b[4] * b[4]
    if kb == "c":
        return _segment_box_sqdist(a, b[1], b[2], b[3],
                                   b[4], b[5], b[6]) <= b[7] * b[7]
    return _box_box_collide(a, b)


def shapes_collide(shape_a: Shape, pose_a: Pose6, shape_b: Shape, pose_b: Pose6) -> bool:
    """True iff the two posed solids intersect or touch."""
    return baked_collide(bake_shape(shape_a, pose_matrix(pose_a)),
                         bake_shape(shape_b, pose_matrix(pose_b)))


@dataclass(frozen=True)
class RobotGeometry:
    """Collision shapes per link frame plus the self-collision pair allowlist.

    link_shapes[0] belongs to the mobile base (virtual link 0); entry i > 0
    is attached to the frame after joint i.  Allowlisted pairs must be
    non-adjacent link indices.
    """

    link_shapes: tuple[tuple[Shape, ...], ...]
    self_pairs: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "link_shapes",
                           tuple(tuple(s) for s in self.link_shapes))
        pairs = []
        nlinks = len(self.link_shapes)
        for i, j in self.self_pairs:
            i, j = int(i), int(j)
            if not (0 <= i < nlinks and 0 <= j < nlinks):
                raise ValueError(f"self-collision pair ({i}, {j}) out of range")
            if abs(i - j) <= 1:
                raise ValueError(
                    f"self-collision pair ({i}, {j}) involves adjacent links")
            pairs.append((min(i, j), max(i, j)))
        object.__setattr__(self, "self_pairs", tuple(pairs))


@dataclass
class World:
    """Static scene: obstacles, tray shape groups, object shape groups."""

    obstacles: tuple[PlacedShape, ...] = ()
    trays: dict[str, tuple[PlacedShape, ...]] = field(default_factory=dict)
    objects: dict[str, tuple[PlacedShape, ...]] = field(default_factory=dict)

    def __post_init__(self):
        self.obstacles = tuple(self.obstacles)
        self.trays = {k: tuple(v) for k, v in self.trays.items()}
        self.objects = {k: tuple(v) for k, v in self.objects.items()}
        self._baked_cache: dict = {}

    def group_ids(self) -> list[str]:
        return ["obstacles", *sorted(self.trays), *sorted(self.objects)]

    def baked_shapes(self, ignore=frozenset()) -> list:
        """World-frame shape tuples of all groups not in ``ignore``."""
        key = frozenset(ignore)
        cached = self._baked_cache.get(key)
        if cached is not None:
            return cached
        baked = []
        if "obstacles" not in key:
            baked.extend(bake_placed(p) for p in self.obstacles)
        for name in sorted(self.trays):
            if name not in key:
                baked.extend(bake_placed(p) for p in self.trays[name])
        for name in sorted(self.objects):
            if name not in key:
                baked.extend(bake_placed(p) for p in self.objects[name])
        self._baked_cache[key] = baked
        return baked


def robot_link_world_shapes(
    chain: KinematicChain,
    geometry: RobotGeometry,
    base_matrix: np.ndarray,
    config,
    margin: float = 0.0,
    frames: list[np.ndarray] | None = None,
) -> list[list]:
    """Baked world shapes per link at a base transform and configuration."""
    if frames is None:
        frames = link_frames(chain, config)
    out = []
    for link, shapes in enumerate(geometry.link_shapes):
        if not shapes:
            out.append([])
            continue
        world_t = base_matrix @ frames[link]
        out.append([bake_shape(s, world_t, margin) for s in shapes])
    return out


def robot_in_collision(
    chain: KinematicChain,
    geometry: RobotGeometry,
    base: tuple[float, float, float],
    config,
    world: World,
    ignore=frozenset(),
    margin: float = 0.0,
    frames: list[np.ndarray] | None = None,
    world_baked: list | None = None,
) -> bool:
    """Self-collision (allowlisted pairs) or robot-vs-world collision test.

    ``base`` is (x, y, heading); world groups named in ``ignore`` are
    skipped.  ``frames``/``world_baked`` allow callers to reuse kinematics
    and baked world shapes across many checks.
    """
    base_t = planar_base_matrix(*base)
    link_shapes = robot_link_world_shapes(
        chain, geometry, base_t, config, margin=margin, frames=frames)
    for i, j in geometry.self_pairs:
        for sa in link_shapes[i]:
            for sb in link_shapes[j]:
                if baked_collide(sa, sb):
                    return True
    if world_baked is None:
        world_baked = world.baked_shapes(frozenset(ignore))
    for shapes in link_shapes:
        for sa in shapes:
            for sb in world_baked:
                if baked_collide(sa, sb):
                    return True
    return False
