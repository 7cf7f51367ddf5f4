"""Independent oracles used by the unit and acceptance suites.

Everything here is deliberately written without reusing the library's
implementation paths: brute-force enumeration, surface sampling, finite
differences, union-find.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from reachplan.collision import Box, Capsule, Sphere
from reachplan.geometry import rpy_matrix


# --- finite-difference Jacobian oracle --------------------------------------

def numeric_jacobian(chain, config, step=1e-6):
    """Central finite differences of the pose map (angular part via rotation
    logs), column by column."""
    from reachplan.kinematics import ee_matrix

    config = np.asarray(config, dtype=float)
    cols = np.zeros((6, config.size))
    for i in range(config.size):
        hi = config.copy()
        lo = config.copy()
        hi[i] += step
        lo[i] -= step
        t_hi = ee_matrix(chain, hi)
        t_lo = ee_matrix(chain, lo)
        cols[:3, i] = (t_hi[:3, 3] - t_lo[:3, 3]) / (2 * step)
        r_rel = t_hi[:3, :3] @ t_lo[:3, :3].T
        angle_vec = _log_so3(r_rel)
        cols[3:, i] = angle_vec / (2 * step)
    return cols


def _log_so3(rot):
    cos_a = (np.trace(rot) - 1.0) / 2.0
    cos_a = min(1.0, max(-1.0, cos_a))
    angle = math.acos(cos_a)
    if angle < 1e-12:
        return np.zeros(3)
    axis = np.array([rot[2, 1] - rot[1, 2], rot[0, 2] - rot[2, 0],
                     rot[1, 0] - rot[0, 1]]) / (2 * math.sin(angle))
    return angle * axis


def random_chain(rng):
    """A small random serial chain with varied twists and offsets."""
    from reachplan.kinematics import Joint, KinematicChain

    n = int(rng.integers(2, 5))
    joints = []
    for _ in range(n):
        alpha = float(rng.choice([0.0, math.pi / 2, -math.pi / 2,
                                  rng.uniform(-1.0, 1.0)]))
        joints.append(Joint(
            a=float(rng.uniform(0.1, 0.8)),
            alpha=alpha,
            d=float(rng.uniform(-0.3, 0.3)),
            theta_offset=float(rng.uniform(-0.5, 0.5)),
            limit_lo=-math.pi, limit_hi=math.pi))
    return KinematicChain(tuple(joints))


# --- surface-sampling collision oracle ---------------------------------------

def _point_in_shape(shape, pose_t, point):
    local = pose_t[:3, :3].T @ (point - pose_t[:3, 3])
    if isinstance(shape, Sphere):
        return np.linalg.norm(local - shape.center) <= shape.radius
    if isinstance(shape, Capsule):
        a = np.asarray(shape.p0)
        b = np.asarray(shape.p1)
        ab = b - a
        denom = float(ab @ ab)
        t = float((local - a) @ ab) / denom if denom > 0 else 0.0
        t = min(1.0, max(0.0, t))
        return np.linalg.norm(local - (a + t * ab)) <= shape.radius
    rot = rpy_matrix(*shape.rotation)
    boxlocal = rot.T @ (local - shape.center)
    return bool(np.all(np.abs(boxlocal) <= shape.half_extents))


def _point_shape_distance(shape, pose_t, point):
    """Signed-ish distance: negative means inside."""
    return float(_points_shape_distance(shape, pose_t,
                                        np.asarray(point)[None, :])[0])


def _points_shape_distance(shape, pose_t, points):
    """Vectorized signed-ish distances of an (N, 3) point array."""
    local = (points - pose_t[:3, 3]) @ pose_t[:3, :3]
    if isinstance(shape, Sphere):
        return np.linalg.norm(local - shape.center, axis=1) - shape.radius
    if isinstance(shape, Capsule):
        a = np.asarray(shape.p0)
        b = np.asarray(shape.p1)
        ab = b - a
        denom = float(ab @ ab)
        if denom > 0:
            t = np.clip((local - a) @ ab / denom, 0.0, 1.0)
        else:
            t = np.zeros(len(local))
        closest = a + t[:, None] * ab
        return np.linalg.norm(local - closest, axis=1) - shape.radius
    rot = rpy_matrix(*shape.rotation)
    p = (local - shape.center) @ rot
    h = np.asarray(shape.half_extents)
    excess = np.abs(p) - h
    outside = np.linalg.norm(np.maximum(excess, 0.0), axis=1)
    inside_depth = np.max(excess, axis=1)  # negative when inside
    return np.where(outside > 0.0, outside, inside_depth)


def surface_points(shape, pose_t, count):
    """Roughly uniform samples on the shape surface (world frame)."""
    rng_idx = np.arange(count)
    golden = math.pi * (3.0 - math.sqrt(5.0))
    if isinstance(shape, Sphere):
        z = 1.0 - 2.0 * (rng_idx + 0.5) / count
        r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
        phi = golden * rng_idx
        local = shape.center + shape.radius * np.stack(
            [r * np.cos(phi), r * np.sin(phi), z], axis=1)
    elif isinstance(shape, Capsule):
        # spiral over the cylinder plus both hemispherical caps
        a = np.asarray(shape.p0)
        b = np.asarray(shape.p1)
        axis = b - a
        length = float(np.linalg.norm(axis))
        axis_dir = axis / length if length > 0 else np.array([0.0, 0.0, 1.0])
        tmp = np.array([1.0, 0.0, 0.0])
        if abs(axis_dir @ tmp) > 0.9:
            tmp = np.array([0.0, 1.0, 0.0])
        u = np.cross(axis_dir, tmp)
        u /= np.linalg.norm(u)
        v = np.cross(axis_dir, u)
        pts = []
        n_cyl = count // 2
        for i in range(n_cyl):
            t = (i + 0.5) / n_cyl
            phi = golden * i
            pts.append(a + t * axis + shape.radius *
                       (math.cos(phi) * u + math.sin(phi) * v))
        n_cap = count - n_cyl
        for i in range(n_cap):
            z = 1.0 - 2.0 * (i + 0.5) / n_cap
            r = math.sqrt(max(0.0, 1.0 - z * z))
            phi = golden * i
            offset = shape.radius * (r * math.cos(phi) * u
                                     + r * math.sin(phi) * v
                                     + abs(z) * (axis_dir if z > 0 else -axis_dir))
            pts.append((b if z > 0 else a) + offset)
        local = np.array(pts)
    else:
        rot = rpy_matrix(*shape.rotation)
        h = np.asarray(shape.half_extents)
        areas = np.array([h[1] * h[2], h[0] * h[2], h[0] * h[1]], dtype=float)
        weights = areas / areas.sum()
        pts = []
        for face_axis in range(3):
            n_face = max(1, int(round(count * weights[face_axis] / 2)))
            side = max(1, int(math.sqrt(n_face)))
            for sign in (-1.0, 1.0):
                for i in range(side):
                    for j in range(side):
                        p = np.zeros(3)
                        p[face_axis] = sign * h[face_axis]
                        o1, o2 = (face_axis + 1) % 3, (face_axis + 2) % 3
                        p[o1] = (2 * (i + 0.5) / side - 1) * h[o1]
                        p[o2] = (2 * (j + 0.5) / side - 1) * h[o2]
                        pts.append(shape.center + rot @ p)
        local = np.array(pts)
    return (pose_t[:3, :3] @ local.T).T + pose_t[:3, 3]


def sampled_collision_verdict(shape_a, pose_a_t, shape_b, pose_b_t, count=10000):
    """(collide, confidence_margin): min sampled distance of A's surface to B
    (plus containment checks), and the margin below which the verdict is
    ambiguous at this sampling resolution."""
    pts = surface_points(shape_a, pose_a_t, count)
    dists = _points_shape_distance(shape_b, pose_b_t, pts)
    min_dist = float(dists.min())
    collide = min_dist <= 0.0
    if not collide:
        # B could still contain A or A contain B without surface contact
        center_b = pose_b_t[:3, :3] @ _shape_center(shape_b) + pose_b_t[:3, 3]
        center_a = pose_a_t[:3, :3] @ _shape_center(shape_a) + pose_a_t[:3, 3]
        if _point_in_shape(shape_a, pose_a_t, center_b) or \
           _point_in_shape(shape_b, pose_b_t, center_a):
            collide = True
            min_dist = -abs(min_dist)
    area = _shape_area(shape_a)
    resolution = math.sqrt(area / count)
    return collide, abs(min_dist), resolution


def _shape_center(shape):
    if isinstance(shape, Sphere):
        return np.asarray(shape.center, dtype=float)
    if isinstance(shape, Capsule):
        return (np.asarray(shape.p0) + np.asarray(shape.p1)) / 2.0
    return np.asarray(shape.center, dtype=float)


def _shape_area(shape):
    if isinstance(shape, Sphere):
        return 4 * math.pi * shape.radius**2
    if isinstance(shape, Capsule):
        length = float(np.linalg.norm(np.asarray(shape.p1)
                                      - np.asarray(shape.p0)))
        return 2 * math.pi * shape.radius * length + 4 * math.pi * shape.radius**2
    h = shape.half_extents
    return 8 * (h[0] * h[1] + h[1] * h[2] + h[0] * h[2])


def random_shape(rng):
    kind = rng.integers(3)
    if kind == 0:
        return Sphere(center=tuple(rng.uniform(-0.2, 0.2, 3)),
                      radius=float(rng.uniform(0.05, 0.4)))
    if kind == 1:
        return Capsule(p0=tuple(rng.uniform(-0.4, 0.4, 3)),
                       p1=tuple(rng.uniform(-0.4, 0.4, 3)),
                       radius=float(rng.uniform(0.05, 0.3)))
    return Box(center=tuple(rng.uniform(-0.2, 0.2, 3)),
               half_extents=tuple(rng.uniform(0.05, 0.4, 3)),
               rotation=tuple(rng.uniform(-math.pi, math.pi, 3)))


def random_pose(rng, span=1.0):
    from reachplan.geometry import Pose6

    return Pose6(*rng.uniform(-span, span, 3),
                 *rng.uniform(-math.pi, math.pi, 3)).canonicalized()


# --- grid oracles ------------------------------------------------------------

def brute_force_distance_sq(mask):
    """O(W^2 H^2) nearest-infeasible-cell squared distances (two pad rings)."""
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    infeasible = [(r, c) for r in range(-2, h + 2) for c in range(-2, w + 2)
                  if not (0 <= r < h and 0 <= c < w) or not mask[r, c]]
    inf_arr = np.array(infeasible)
    out = np.zeros((h, w), dtype=np.int64)
    for r in range(h):
        for c in range(w):
            if mask[r, c]:
                d2 = (inf_arr[:, 0] - r) ** 2 + (inf_arr[:, 1] - c) ** 2
                out[r, c] = int(d2.min())
    return out


def union_find_components(mask):
    """4-connected components by union-find, as a label array."""
    mask = np.asarray(mask, dtype=bool)
    h, w = mask.shape
    parent = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[rb] = ra

    for r in range(h):
        for c in range(w):
            if mask[r, c]:
                parent[(r, c)] = (r, c)
    for r in range(h):
        for c in range(w):
            if not mask[r, c]:
                continue
            if r + 1 < h and mask[r + 1, c]:
                union((r, c), (r + 1, c))
            if c + 1 < w and mask[r, c + 1]:
                union((r, c), (r, c + 1))
    labels = np.zeros((h, w), dtype=int)
    roots = {}
    for r in range(h):
        for c in range(w):
            if mask[r, c]:
                root = find((r, c))
                if root not in roots:
                    roots[root] = len(roots) + 1
                labels[r, c] = roots[root]
    return labels


# --- covering and routing oracles --------------------------------------------

def exhaustive_min_cover(trays, candidate_subsets):
    """Smallest-cardinality cover by cardinality-ascending enumeration,
    preferring exact covers then the lexicographically smallest inclusion
    vector (independent reimplementation of the selection rule)."""
    n = len(candidate_subsets)
    tray_list = list(trays)
    best = None
    best_key = None
    for k in range(1, n + 1):
        for combo in itertools.combinations(range(n), k):
            counts = {t: 0 for t in tray_list}
            for i in combo:
                for t in candidate_subsets[i]:
                    counts[t] += 1
            if any(v == 0 for v in counts.values()):
                continue
            exact = all(v == 1 for v in counts.values())
            inclusion = tuple(1 if i in combo else 0 for i in range(n))
            key = (0 if exact else 1, inclusion)
            if best_key is None or key < best_key:
                best_key = key
                best = list(combo)
        if best is not None:
            return best
    return None


def enumerate_open_path(start, goal, stops):
    """Brute-force optimal open path with reversed iteration order."""
    m = len(stops)
    best_len = math.inf
    best = None
    for perm in reversed(list(itertools.permutations(range(m)))):
        pts = [start] + [stops[i] for i in perm] + [goal]
        length = sum(math.hypot(pts[i + 1][0] - pts[i][0],
                                pts[i + 1][1] - pts[i][1])
                     for i in range(len(pts) - 1))
        if length < best_len - 1e-15 or (
                abs(length - best_len) <= 1e-15 and best is not None
                and list(perm) < best):
            best_len = length
            best = list(perm)
    return best, best_len


def wrapped_inf_dist(a, b):
    """Max over joints of the circular angle distance."""
    d = np.abs(np.asarray(a) - np.asarray(b)) % (2 * math.pi)
    d = np.minimum(d, 2 * math.pi - d)
    return float(d.max()) if d.size else 0.0
