"""Scene ingestion: robot, world, tasks, grid, uncertainty from one JSON file.

parse_scene validates the whole document and reports problems with a stable
error code and the JSON path of the offending value.  emit_scene writes the
canonical form (sorted keys, floats formatted %.9g), which round-trips:
parsing the emitted text reproduces the same scene and the same bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .baseregion import BaseGridSpec, GraspSet
from .collision import Box, Capsule, PlacedShape, RobotGeometry, Shape, Sphere, World
from .geometry import Pose6
from .kinematics import Joint, KinematicChain
from .regiongeo import UNCERTAINTY_MODELS, UncertaintyModel


class SceneError(Exception):
    """A scene document problem: stable code plus the offending JSON path."""

    def __init__(self, code: str, path: str, message: str):
        self.code = code
        self.path = path
        super().__init__(f"{code} at {path}: {message}")


@dataclass
class TrayTask:
    tray_id: str
    graspsets: list[GraspSet]


@dataclass
class Scene:
    """Validated scene: everything the planning pipeline consumes."""

    chain: KinematicChain
    geometry: RobotGeometry
    heading: float
    world: World
    tasks: list[TrayTask]
    grid: BaseGridSpec
    uncertainty: UncertaintyModel
    start: tuple[float, float]
    goal: tuple[float, float]
    grasp_free_axes: tuple[bool, ...] = (False,) * 6

    def task_for(self, tray_id: str) -> TrayTask:
        for task in self.tasks:
            if task.tray_id == tray_id:
                return task
        raise KeyError(tray_id)


_AXIS_NAMES = ("x", "y", "z", "roll", "pitch", "yaw")


def _need(obj, key, path, kind=None):
    if not isinstance(obj, dict):
        raise SceneError("SCENE_BAD_TYPE", path, "expected an object")
    if key not in obj:
        raise SceneError("SCENE_MISSING_FIELD", f"{path}.{key}", "missing field")
    value = obj[key]
    if kind is not None and not isinstance(value, kind):
        raise SceneError("SCENE_BAD_TYPE", f"{path}.{key}",
                         f"expected {getattr(kind, '__name__', kind)}")
    return value


def _number(obj, key, path) -> float:
    value = _need(obj, key, path)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SceneError("SCENE_BAD_TYPE", f"{path}.{key}", "expected a number")
    return float(value)


def _positive(obj, key, path) -> float:
    value = _number(obj, key, path)
    if not value > 0.0:
        raise SceneError("SCENE_BAD_DIMENSION", f"{path}.{key}",
                         "must be strictly positive")
    return value


def _vec(obj, key, path, n) -> tuple:
    value = _need(obj, key, path, list)
    if len(value) != n or any(isinstance(v, bool) or not isinstance(v, (int, float))
                              for v in value):
        raise SceneError("SCENE_BAD_TYPE", f"{path}.{key}",
                         f"expected {n} numbers")
    return tuple(float(v) for v in value)


def _pose(obj, key, path) -> Pose6:
    return Pose6.from_array(_vec(obj, key, path, 6))


def _parse_shape(doc, path) -> Shape:
    kind = _need(doc, "type", path, str)
    try:
        if kind == "sphere":
            return Sphere(center=_vec(doc, "center", path, 3),
                          radius=_positive(doc, "radius", path))
        if kind == "capsule":
            return Capsule(p0=_vec(doc, "p0", path, 3),
                           p1=_vec(doc, "p1", path, 3),
                           radius=_positive(doc, "radius", path))
        if kind == "box":
            rotation = (tuple(_vec(doc, "rotation", path, 3))
                        if "rotation" in doc else (0.0, 0.0, 0.0))
            return Box(center=_vec(doc, "center", path, 3),
                       half_extents=_vec(doc, "half_extents", path, 3),
                       rotation=rotation)
    except ValueError as exc:
        raise SceneError("SCENE_BAD_DIMENSION", path, str(exc)) from exc
    raise SceneError("SCENE_BAD_TYPE", f"{path}.type",
                     f"unknown shape type {kind!r}")


def _parse_placed(doc, path) -> PlacedShape:
    pose = _pose(doc, "pose", path) if "pose" in doc else Pose6()
    return PlacedShape(shape=_parse_shape(doc, path), pose=pose)


def _parse_placed_list(docs, path) -> tuple[PlacedShape, ...]:
    if not isinstance(docs, list):
        raise SceneError("SCENE_BAD_TYPE", path, "expected a list")
    return tuple(_parse_placed(d, f"{path}[{i}]") for i, d in enumerate(docs))


def parse_scene(text: str) -> Scene:
    """Parse and validate a scene document (JSON text)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SceneError("SCENE_SYNTAX", f"line {exc.lineno} column {exc.colno}",
                         exc.msg) from exc
    if not isinstance(doc, dict):
        raise SceneError("SCENE_BAD_TYPE", "$", "top level must be an object")

    robot = _need(doc, "robot", "$", dict)
    joints = []
    joint_docs = _need(robot, "joints", "$.robot", list)
    if not joint_docs:
        raise SceneError("SCENE_BAD_DIMENSION", "$.robot.joints",
                         "chain needs at least one joint")
    for i, jd in enumerate(joint_docs):
        p = f"$.robot.joints[{i}]"
        try:
            joints.append(Joint(
                a=_number(jd, "a", p), alpha=_number(jd, "alpha", p),
                d=_number(jd, "d", p), theta_offset=_number(jd, "theta_offset", p),
                limit_lo=_number(jd, "limit_lo", p),
                limit_hi=_number(jd, "limit_hi", p)))
        except ValueError as exc:
            raise SceneError("SCENE_BAD_LIMITS", p, str(exc)) from exc
    tool = _pose(robot, "tool", "$.robot") if "tool" in robot else Pose6()
    chain = KinematicChain(tuple(joints), tool=tool)

    link_docs = _need(robot, "links", "$.robot", list)
    if len(link_docs) != chain.njoints + 1:
        raise SceneError("SCENE_BAD_DIMENSION", "$.robot.links",
                         f"expected {chain.njoints + 1} link entries "
                         f"(base plus one per joint), got {len(link_docs)}")
    link_shapes = []
    for i, ld in enumerate(link_docs):
        p = f"$.robot.links[{i}]"
        shapes = ld.get("shapes", []) if isinstance(ld, dict) else None
        if shapes is None or not isinstance(shapes, list):
            raise SceneError("SCENE_BAD_TYPE", p, "expected {'shapes': [...]}")
        link_shapes.append(tuple(
            _parse_shape(sd, f"{p}.shapes[{j}]") for j, sd in enumerate(shapes)))
    pairs = robot.get("self_collision_pairs", [])
    try:
        geometry = RobotGeometry(link_shapes=tuple(link_shapes),
                                 self_pairs=tuple(tuple(p) for p in pairs))
    except (ValueError, TypeError) as exc:
        raise SceneError("SCENE_BAD_TYPE", "$.robot.self_collision_pairs",
                         str(exc)) from exc
    heading = _number(robot, "heading", "$.robot") if "heading" in robot else 0.0

    world_doc = _need(doc, "world", "$", dict)
    obstacles = _parse_placed_list(world_doc.get("obstacles", []),
                                   "$.world.obstacles")
    trays_doc = _need(world_doc, "trays", "$.world", dict)
    trays = {}
    for tray_id in sorted(trays_doc):
        td = trays_doc[tray_id]
        p = f"$.world.trays.{tray_id}"
        trays[tray_id] = _parse_placed_list(_need(td, "shapes", p, list),
                                            f"{p}.shapes")

    tasks_doc = _need(doc, "tasks", "$", list)
    tasks = []
    objects: dict[str, tuple[PlacedShape, ...]] = {}
    seen_trays = set()
    for ti, td in enumerate(tasks_doc):
        p = f"$.tasks[{ti}]"
        tray_id = _need(td, "tray", p, str)
        if tray_id not in trays:
            raise SceneError("SCENE_UNKNOWN_TRAY", f"{p}.tray",
                             f"tray {tray_id!r} is not defined in the world")
        if tray_id in seen_trays:
            raise SceneError("SCENE_DUPLICATE_ID", f"{p}.tray",
                             f"tray {tray_id!r} appears in more than one task")
        seen_trays.add(tray_id)
        graspsets = []
        object_docs = _need(td, "objects", p, list)
        if not object_docs:
            raise SceneError("SCENE_BAD_DIMENSION", f"{p}.objects",
                             "task needs at least one object")
        for oi, od in enumerate(object_docs):
            op = f"{p}.objects[{oi}]"
            object_id = _need(od, "id", op, str)
            if object_id in objects:
                raise SceneError("SCENE_DUPLICATE_ID", f"{op}.id",
                                 f"object id {object_id!r} reused")
            pose = _pose(od, "pose", op)
            grasp_docs = _need(od, "grasps", op, list)
            if not grasp_docs:
                raise SceneError("SCENE_EMPTY_GRASPSET", f"{op}.grasps",
                                 f"object {object_id!r} has no grasp poses")
            grasps = []
            for gi, gd in enumerate(grasp_docs):
                if (not isinstance(gd, list) or len(gd) != 6
                        or any(isinstance(v, bool) or not isinstance(v, (int, float))
                               for v in gd)):
                    raise SceneError("SCENE_BAD_TYPE", f"{op}.grasps[{gi}]",
                                     "expected 6 numbers")
                grasps.append(Pose6.from_array(gd))
            shape_docs = od.get("shapes", [])
            objects[object_id] = _parse_placed_list(shape_docs, f"{op}.shapes")
            graspsets.append(GraspSet(object_id=object_id, object_pose=pose,
                                      grasps=tuple(grasps)))
        tasks.append(TrayTask(tray_id=tray_id, graspsets=graspsets))

    grid_doc = _need(doc, "base_grid", "$", dict)
    origin = _vec(grid_doc, "origin", "$.base_grid", 2)
    grid = BaseGridSpec(
        x0=origin[0], y0=origin[1],
        cell=_positive(grid_doc, "cell_size", "$.base_grid"),
        width=int(_positive(grid_doc, "width", "$.base_grid")),
        height=int(_positive(grid_doc, "height", "$.base_grid")),
        heading=heading)

    unc_doc = _need(doc, "uncertainty", "$", dict)
    sigma = _number(unc_doc, "sigma", "$.uncertainty")
    if sigma < 0.0:
        raise SceneError("SCENE_BAD_DIMENSION", "$.uncertainty.sigma",
                         "must be non-negative")
    model = unc_doc.get("model", "uniform-disk")
    if model not in UNCERTAINTY_MODELS:
        raise SceneError("SCENE_BAD_TYPE", "$.uncertainty.model",
                         f"expected one of {UNCERTAINTY_MODELS}")
    uncertainty = UncertaintyModel(sigma=sigma, model=model,
                                   seed=int(unc_doc.get("seed", 0)))

    start = _vec(doc, "start", "$", 2)
    goal = _vec(doc, "goal", "$", 2)

    free = [False] * 6
    options = doc.get("options", {})
    if options:
        axes = options.get("grasp_free_axes", [])
        if not isinstance(axes, list):
            raise SceneError("SCENE_BAD_TYPE", "$.options.grasp_free_axes",
                             "expected a list of axis names")
        for name in axes:
            if name not in _AXIS_NAMES:
                raise SceneError("SCENE_BAD_TYPE", "$.options.grasp_free_axes",
                                 f"unknown axis {name!r}")
            free[_AXIS_NAMES.index(name)] = True

    world = World(obstacles=obstacles, trays=trays, objects=objects)
    return Scene(chain=chain, geometry=geometry, heading=heading, world=world,
                 tasks=tasks, grid=grid, uncertainty=uncertainty,
                 start=(start[0], start[1]), goal=(goal[0], goal[1]),
                 grasp_free_axes=tuple(free))


def load_scene(path) -> Scene:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scene(fh.read())


# --- canonical emission ----------------------------------------------------

def canonical_json(value, indent: int = 0) -> str:
    """Deterministic JSON: sorted keys, floats formatted %.9g."""
    pad = "  " * indent
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = []
        for key in sorted(value):
            items.append(f'{pad}  {json.dumps(str(key))}: '
                         + canonical_json(value[key], indent + 1))
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(value, (list, tuple)):
        if not value:
            return "[]"
        items = [canonical_json(v, indent + 1) for v in value]
        joined = ", ".join(items)
        if len(joined) <= 70 and "\n" not in joined:
            return "[" + joined + "]"
        return ("[\n" + ",\n".join(f"{pad}  {v}" for v in items)
                + f"\n{pad}]")
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if value == int(value) and abs(value) < 1e15:
            return format(value, ".1f")
        return format(value, ".9g")
    if isinstance(value, str):
        return json.dumps(value)
    if value is None:
        return "null"
    raise TypeError(f"cannot serialize {type(value)!r}")


def _shape_doc(shape: Shape) -> dict:
    if isinstance(shape, Sphere):
        return {"type": "sphere", "center": list(shape.center),
                "radius": shape.radius}
    if isinstance(shape, Capsule):
        return {"type": "capsule", "p0": list(shape.p0), "p1": list(shape.p1),
                "radius": shape.radius}
    return {"type": "box", "center": list(shape.center),
            "half_extents": list(shape.half_extents),
            "rotation": list(shape.rotation)}


def _placed_doc(placed: PlacedShape) -> dict:
    doc = _shape_doc(placed.shape)
    doc["pose"] = list(placed.pose.as_array())
    return doc


def scene_document(scene: Scene) -> dict:
    """Plain-dict form of a scene, suitable for canonical_json."""
    free = [name for name, used in zip(_AXIS_NAMES, scene.grasp_free_axes)
            if used]
    doc = {
        "robot": {
            "joints": [
                {"a": j.a, "alpha": j.alpha, "d": j.d,
                 "theta_offset": j.theta_offset,
                 "limit_lo": j.limit_lo, "limit_hi": j.limit_hi}
                for j in scene.chain.joints
            ],
            "tool": list(scene.chain.tool.as_array()),
            "links": [{"shapes": [_shape_doc(s) for s in shapes]}
                      for shapes in scene.geometry.link_shapes],
            "self_collision_pairs": [list(p) for p in scene.geometry.self_pairs],
            "heading": scene.heading,
        },
        "world": {
            "obstacles": [_placed_doc(p) for p in scene.world.obstacles],
            "trays": {tid: {"shapes": [_placed_doc(p) for p in shapes]}
                      for tid, shapes in sorted(scene.world.trays.items())},
        },
        "tasks": [
            {
                "tray": task.tray_id,
                "objects": [
                    {
                        "id": gs.object_id,
                        "pose": list(gs.object_pose.as_array()),
                        "shapes": [_placed_doc(p)
                                   for p in scene.world.objects[gs.object_id]],
                        "grasps": [list(g.as_array()) for g in gs.grasps],
                    }
                    for gs in task.graspsets
                ],
            }
            for task in scene.tasks
        ],
        "base_grid": {
            "origin": [scene.grid.x0, scene.grid.y0],
            "cell_size": scene.grid.cell,
            "width": scene.grid.width,
            "height": scene.grid.height,
        },
        "uncertainty": {"sigma": scene.uncertainty.sigma,
                        "model": scene.uncertainty.model,
                        "seed": scene.uncertainty.seed},
        "start": list(scene.start),
        "goal": list(scene.goal),
        "options": {"grasp_free_axes": free},
    }
    return doc


def emit_scene(scene: Scene) -> str:
    """Canonical text form of a scene (stable across runs)."""
    return canonical_json(scene_document(scene)) + "\n"
