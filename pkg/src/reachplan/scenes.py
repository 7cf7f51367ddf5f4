"""Bundled demo scenes: a desk-scale mobile manipulator collecting objects
from trays on a table.

The robot is a three-joint arm (vertical turret, shoulder, elbow) on a box
base.  Grasp poses sit above each object with orientation left free, so the
database query matches end-effector positions.  Builders return scene
documents (plain dicts); ``build_scene`` turns one into a validated Scene
through the regular parser.
"""

from __future__ import annotations

import math

from .scene import Scene, canonical_json, parse_scene

ARM_D1 = 0.75       # shoulder height above the ground (m)
ARM_A2 = 0.45       # upper-arm length (m)
ARM_A3 = 0.40       # forearm length (m)
TABLE_TOP = 0.55    # table surface height (m)
TRAY_HALF = 0.18    # tray outer half-width (m)
WALL_T = 0.02       # tray wall thickness (m)
OBJECT_R = 0.03     # object sphere radius (m)
GRASP_LIFT = 0.14   # grasp point height above the object center (m)


def _box(center, half, rotation=(0.0, 0.0, 0.0)):
    return {"type": "box", "center": list(center), "half_extents": list(half),
            "rotation": list(rotation)}


def _sphere(center, radius):
    return {"type": "sphere", "center": list(center), "radius": radius}


def _capsule(p0, p1, radius):
    return {"type": "capsule", "p0": list(p0), "p1": list(p1), "radius": radius}


def robot_document() -> dict:
    """Three-joint arm on a box base, facing +y (heading pi/2)."""
    return {
        "joints": [
            {"a": 0.0, "alpha": math.pi / 2, "d": ARM_D1, "theta_offset": 0.0,
             "limit_lo": -math.pi, "limit_hi": math.pi},
            {"a": ARM_A2, "alpha": 0.0, "d": 0.0, "theta_offset": 0.0,
             "limit_lo": -math.pi / 3, "limit_hi": 2 * math.pi / 3},
            {"a": ARM_A3, "alpha": 0.0, "d": 0.0, "theta_offset": 0.0,
             "limit_lo": -5 * math.pi / 6, "limit_hi": 5 * math.pi / 6},
        ],
        "tool": [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        "links": [
            {"shapes": [_box((0.0, 0.0, 0.15), (0.18, 0.18, 0.15))]},
            # the shoulder column turns with joint 1, keeping it adjacent to
            # the upper arm instead of a permanently-touching link-0 pair;
            # frame-1 -y points down, so this spans world z 0.30..0.67
            {"shapes": [_capsule((0.0, -0.45, 0.0), (0.0, -0.08, 0.0), 0.05)]},
            {"shapes": [_capsule((-ARM_A2, 0.0, 0.0), (0.0, 0.0, 0.0), 0.05)]},
            {"shapes": [_capsule((-ARM_A3, 0.0, 0.0), (0.0, 0.0, 0.0), 0.04)]},
        ],
        "self_collision_pairs": [[0, 2], [0, 3], [1, 3]],
        "heading": math.pi / 2,
    }


def tray_shapes(cx: float, cy: float, wall_height: float = 0.10,
                front_wall_height: float | None = None) -> list[dict]:
    """Open-top tray: floor plus four walls, resting on the table."""
    floor_top = TABLE_TOP + 2 * WALL_T / 2
    shapes = [_box((cx, cy, TABLE_TOP + WALL_T / 2),
                   (TRAY_HALF, TRAY_HALF, WALL_T / 2))]
    if front_wall_height is None:
        front_wall_height = wall_height
    for side, height in (("front", front_wall_height), ("back", wall_height)):
        zc = floor_top + height / 2
        y = cy - (TRAY_HALF - WALL_T / 2) if side == "front" else \
            cy + (TRAY_HALF - WALL_T / 2)
        shapes.append(_box((cx, y, zc), (TRAY_HALF, WALL_T / 2, height / 2)))
    for sx in (-1.0, 1.0):
        zc = floor_top + wall_height / 2
        shapes.append(_box((cx + sx * (TRAY_HALF - WALL_T / 2), cy, zc),
                           (WALL_T / 2, TRAY_HALF - WALL_T, wall_height / 2)))
    return shapes


def _object_task(object_id: str, x: float, y: float) -> dict:
    z = TABLE_TOP + WALL_T + OBJECT_R
    return {
        "id": object_id,
        "pose": [x, y, z, 0.0, 0.0, 0.0],
        "shapes": [dict(_sphere((0.0, 0.0, 0.0), OBJECT_R),
                        pose=[x, y, z, 0.0, 0.0, 0.0])],
        "grasps": [[0.0, 0.0, GRASP_LIFT, 0.0, 0.0, 0.0]],
    }


def _table(x_lo: float, x_hi: float, tray_y: float) -> dict:
    cx = (x_lo + x_hi) / 2
    return _box((cx, tray_y, TABLE_TOP / 2),
                ((x_hi - x_lo) / 2, 0.25, TABLE_TOP / 2))


def three_tray_document(
    tray_y: float = 0.75,
    tray_x=(-0.25, 0.25, 1.55),
    sigma: float = 0.10,
    grid_x=(-1.1, 2.5),
    grid_y=(0.0, 0.3),
    cell: float = 0.05,
) -> dict:
    """Three trays on one table; the first two are adjacent, the third apart.

    Designed so the combined region of tray1 and tray2 passes the 0.10 m
    uncertainty filter while no robust pairing includes tray3, giving a
    two-stop plan against the three-stop naive sequence.
    """
    trays = {}
    tasks = []
    for i, cx in enumerate(tray_x, start=1):
        tray_id = f"tray{i}"
        trays[tray_id] = {"shapes": [dict(s, pose=[0.0] * 6)
                                     for s in tray_shapes(cx, tray_y)]}
        tasks.append({
            "tray": tray_id,
            "objects": [_object_task(f"part{i}", cx, tray_y)],
        })
    width = round((grid_x[1] - grid_x[0]) / cell)
    height = round((grid_y[1] - grid_y[0]) / cell)
    return {
        "robot": robot_document(),
        "world": {
            "obstacles": [dict(_table(min(tray_x) - 0.5, max(tray_x) + 0.5,
                                      tray_y), pose=[0.0] * 6)],
            "trays": trays,
        },
        "tasks": tasks,
        "base_grid": {"origin": [grid_x[0], grid_y[0]], "cell_size": cell,
                      "width": width, "height": height},
        "uncertainty": {"sigma": sigma, "model": "boundary-worst-case",
                        "seed": 0},
        "start": [-1.4, 0.0],
        "goal": [2.3, 0.0],
        "options": {"grasp_free_axes": ["roll", "pitch", "yaw"]},
    }


def walled_tray_document(
    front_wall_height: float = 0.26,
    tray_y: float = 0.75,
    cell: float = 0.05,
) -> dict:
    """One tray whose raised front wall blocks shallow frontal reaches.

    Low, stretched-out arm configurations collide with the wall; steep
    over-the-top configurations clear it.  Used to compare the exhaustive
    database feasibility check against a single-candidate (IK-solver style)
    check.
    """
    tray_id = "tray1"
    trays = {tray_id: {"shapes": [
        dict(s, pose=[0.0] * 6)
        for s in tray_shapes(0.0, tray_y,
                             front_wall_height=front_wall_height)]}}
    objects = [_object_task("part1", -0.06, tray_y),
               _object_task("part2", 0.06, tray_y)]
    return {
        "robot": robot_document(),
        "world": {
            "obstacles": [dict(_table(-0.7, 0.7, tray_y), pose=[0.0] * 6)],
            "trays": trays,
        },
        "tasks": [{"tray": tray_id, "objects": objects}],
        "base_grid": {"origin": [-0.6, 0.0], "cell_size": cell,
                      "width": round(1.2 / cell), "height": round(0.3 / cell)},
        "uncertainty": {"sigma": 0.10, "model": "boundary-worst-case",
                        "seed": 0},
        "start": [-1.0, 0.0],
        "goal": [1.0, 0.0],
        "options": {"grasp_free_axes": ["roll", "pitch", "yaw"]},
    }


def build_scene(document: dict) -> Scene:
    """Validate a scene document through the regular parser."""
    return parse_scene(canonical_json(document))


def scene_text(document: dict) -> str:
    return canonical_json(document) + "\n"
