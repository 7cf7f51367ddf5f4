"""Feasible mobile-base positions for grasping every object in a tray.

A base grid cell is feasible when the base itself is collision-free there
and every object in the tray has at least one grasp pose whose
reachability-database candidates contain a collision-free arm configuration.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .collision import RobotGeometry, World, bake_shape, robot_in_collision
from .geometry import Pose6, matrix_pose, planar_base_matrix, pose_matrix
from .kinematics import KinematicChain, link_frames, refine_ik
from .reachdb import FULLY_CONSTRAINED, ReachDB, query_rows


@dataclass(frozen=True)
class GraspSet:
    """Candidate grasp poses (object frame) for one object placed in a tray."""

    object_id: str
    object_pose: Pose6
    grasps: tuple[Pose6, ...]

    def __post_init__(self):
        if len(self.grasps) == 0:
            raise ValueError(f"grasp set for {self.object_id!r} is empty")
        object.__setattr__(self, "grasps", tuple(self.grasps))


@dataclass(frozen=True)
class BaseGridSpec:
    """Grid of candidate base positions with a fixed heading."""

    x0: float
    y0: float
    cell: float
    width: int
    height: int
    heading: float = 0.0

    def __post_init__(self):
        if not self.cell > 0.0:
            raise ValueError("cell size must be positive")
        if self.width < 1 or self.height < 1:
            raise ValueError("grid extents must be positive")

    def cell_center(self, row: int, col: int) -> tuple[float, float]:
        return (self.x0 + (col + 0.5) * self.cell,
                self.y0 + (row + 0.5) * self.cell)

    def cell_of(self, x: float, y: float) -> tuple[int, int] | None:
        col = math.floor((x - self.x0) / self.cell)
        row = math.floor((y - self.y0) / self.cell)
        if 0 <= row < self.height and 0 <= col < self.width:
            return int(row), int(col)
        return None


@dataclass
class BaseRegion:
    """Boolean feasibility mask over a base grid for one tray."""

    grid: BaseGridSpec
    mask: np.ndarray
    tray_id: str

    def __post_init__(self):
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.mask.shape != (self.grid.height, self.grid.width):
            raise ValueError("mask shape does not match grid spec")

    @property
    def feasible_cells(self) -> int:
        return int(self.mask.sum())


@dataclass(frozen=True)
class GraspCheckOptions:
    """Options shared by object_graspable and compute_base_region.

    strategy "multi" tries every database candidate; "single" emulates a
    plain IK solver by testing only the lowest-norm candidate per grasp.
    ``free`` marks pose components unconstrained during the query (and
    refinement); ``interval`` selects the boundary-tolerant interval query.
    """

    strategy: str = "multi"
    interval: bool = True
    refine: bool = False
    refine_tol: float = 1e-3
    refine_max_iter: int = 60
    free: tuple[bool, ...] = FULLY_CONSTRAINED
    margin: float = 0.0
    threads: int = 1

    def __post_init__(self):
        if self.strategy not in ("multi", "single"):
            raise ValueError("strategy must be 'multi' or 'single'")


@dataclass(frozen=True)
class GraspWitness:
    """Evidence that an object is graspable from a base position."""

    grasp_index: int
    config: np.ndarray
    record_row: int
    refined: bool = False


class _Caches:
    """Query and forward-kinematics caches reused across grid cells."""

    def __init__(self):
        self.queries: dict = {}
        self.frames: dict = {}

    def rows_for(self, db: ReachDB, target: Pose6, free, interval) -> np.ndarray:
        key = (tuple(int(round(v / 1e-9)) for v in target.as_array()),
               free, interval)
        rows = self.queries.get(key)
        if rows is None:
            rows = query_rows(db, target, free=free, interval=interval)
            self.queries[key] = rows
        return rows

    def frames_for(self, db: ReachDB, chain: KinematicChain, row: int):
        frames = self.frames.get(row)
        if frames is None:
            frames = link_frames(chain, db.configs[row])
            self.frames[row] = frames
        return frames


def grasp_in_base_frame(grasp: Pose6, object_pose: Pose6,
                        base: tuple[float, float, float]) -> Pose6:
    """Express an object-frame grasp pose in the mobile-base frame."""
    world_t = pose_matrix(object_pose) @ pose_matrix(grasp)
    base_t = planar_base_matrix(*base)
    inv = np.eye(4)
    inv[:3, :3] = base_t[:3, :3].T
    inv[:3, 3] = -base_t[:3, :3].T @ base_t[:3, 3]
    return matrix_pose(inv @ world_t)


def object_graspable(
    db: ReachDB,
    chain: KinematicChain,
    geometry: RobotGeometry,
    world: World,
    graspset: GraspSet,
    base: tuple[float, float, float],
    options: GraspCheckOptions = GraspCheckOptions(),
    caches: _Caches | None = None,
) -> tuple[bool, GraspWitness | None]:
    """Can this object be grasped collision-free from the base position?

    Grasp poses are tried in file order and database candidates in storage
    order; the first collision-free configuration wins.  The object's own
    shape group is ignored during collision checks.  With refinement on, the
    witness is numerically refined and re-checked, falling back to the
    unrefined candidate when refinement fails.
    """
    db.check_chain(chain)
    if caches is None:
        caches = _Caches()
    ignore = frozenset({graspset.object_id})
    world_baked = world.baked_shapes(ignore)

    for grasp_index, grasp in enumerate(graspset.grasps):
        target = grasp_in_base_frame(grasp, graspset.object_pose, base)
        rows = caches.rows_for(db, target, options.free, options.interval)
        if rows.size == 0:
            continue
        if options.strategy == "single":
            norms = np.linalg.norm(db.configs[rows], axis=1)
            rows = rows[[int(np.argmin(norms))]]
        for row in rows:
            row = int(row)
            config = db.configs[row]
            frames = caches.frames_for(db, chain, row)
            if robot_in_collision(chain, geometry, base, config, world,
                                  ignore=ignore, margin=options.margin,
                                  frames=frames, world_baked=world_baked):
                continue
            if options.refine:
                refined = refine_ik(chain, config, target,
                                    tol=options.refine_tol,
                                    max_iter=options.refine_max_iter,
                                    free=options.free)
                if refined is not None and not robot_in_collision(
                        chain, geometry, base, refined, world, ignore=ignore,
                        margin=options.margin, world_baked=world_baked):
                    return True, GraspWitness(grasp_index, refined, row, True)
            return True, GraspWitness(grasp_index, config.copy(), row, False)
    return False, None


def compute_base_region(
    db: ReachDB,
    chain: KinematicChain,
    geometry: RobotGeometry,
    world: World,
    tray_id: str,
    graspsets: list[GraspSet],
    grid: BaseGridSpec,
    options: GraspCheckOptions = GraspCheckOptions(),
) -> BaseRegion:
    """Feasibility mask over the base grid for one tray.

    A cell is feasible iff the base shapes are collision-free at its center
    and every object in ``graspsets`` is graspable from there.  Cells are
    independent; rows may be computed in parallel (options.threads).
    """
    if not graspsets:
        raise ValueError("tray needs at least one grasp set")
    db.check_chain(chain)
    caches = _Caches()
    base_shapes = geometry.link_shapes[0] if geometry.link_shapes else ()
    world_all = world.baked_shapes(frozenset())

    def base_collides(base_t) -> bool:
        from .collision import baked_collide
        for shape in base_shapes:
            baked = bake_shape(shape, base_t, options.margin)
            for other in world_all:
                if baked_collide(baked, other):
                    return True
        return False

    def compute_row(row: int) -> np.ndarray:
        out = np.zeros(grid.width, dtype=bool)
        for col in range(grid.width):
            x, y = grid.cell_center(row, col)
            base = (x, y, grid.heading)
            if base_collides(planar_base_matrix(*base)):
                continue
            ok = True
            for graspset in graspsets:
                good, _ = object_graspable(db, chain, geometry, world,
                                           graspset, base, options, caches)
                if not good:
                    ok = False
                    break
            out[col] = ok
        return out

    mask = np.zeros((grid.height, grid.width), dtype=bool)
    threads = max(1, int(options.threads))
    if threads == 1:
        for row in range(grid.height):
            mask[row] = compute_row(row)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for row, data in enumerate(pool.map(compute_row, range(grid.height))):
                mask[row] = data
    return BaseRegion(grid=grid, mask=mask, tray_id=tray_id)


def _format_float(v: float) -> str:
    return format(float(v), ".9g")


def save_region(region: BaseRegion, path):
    """Write the text-grid form: header line then '#'/'.' rows (row 0 first)."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write(region_text(region))


def region_text(region: BaseRegion) -> str:
    g = region.grid
    lines = [
        "baseregion v1 {} {} {} {} {} {} {}".format(
            region.tray_id, _format_float(g.x0), _format_float(g.y0),
            _format_float(g.cell), g.width, g.height, _format_float(g.heading))
    ]
    for row in range(g.height):
        lines.append("".join("#" if v else "." for v in region.mask[row]))
    return "\n".join(lines) + "\n"


def load_region(path) -> BaseRegion:
    with open(path, "r", encoding="ascii") as fh:
        text = fh.read()
    return parse_region_text(text)


def parse_region_text(text: str) -> BaseRegion:
    lines = text.splitlines()
    if not lines:
        raise ValueError("empty region file")
    parts = lines[0].split()
    if len(parts) != 9 or parts[0] != "baseregion" or parts[1] != "v1":
        raise ValueError("bad region header")
    tray_id = parts[2]
    x0, y0, cell = (float(p) for p in parts[3:6])
    width, height = int(parts[6]), int(parts[7])
    heading = float(parts[8])
    grid = BaseGridSpec(x0, y0, cell, width, height, heading)
    if len(lines) < 1 + height:
        raise ValueError("region file truncated")
    mask = np.zeros((height, width), dtype=bool)
    for row in range(height):
        line = lines[1 + row]
        if len(line) != width or any(c not in "#." for c in line):
            raise ValueError(f"bad region row {row}")
        mask[row] = [c == "#" for c in line]
    return BaseRegion(grid=grid, mask=mask, tray_id=tray_id)
