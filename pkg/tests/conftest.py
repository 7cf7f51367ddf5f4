import math

import pytest

import reachplan as rp
from reachplan import scenes
from reachplan.baseregion import GraspCheckOptions, compute_base_region

DESK_DTHETA = math.pi / 12
DESK_VOXEL = rp.VoxelSpec(0.08, 0.08, 0.08, math.pi / 6, math.pi / 6, math.pi / 6)


@pytest.fixture(scope="session")
def chain2():
    return rp.planar_chain(1.0, 1.0)


@pytest.fixture(scope="session")
def db16(chain2):
    """Quarter-turn joint grid of the two-link arm: 16 records."""
    return rp.build(chain2, rp.SamplingSpec(dtheta=math.pi / 2),
                    rp.VoxelSpec(0.25, 0.25, 0.25, 0.25, 0.25, 0.25))


@pytest.fixture(scope="session")
def desk_scene():
    return scenes.build_scene(scenes.three_tray_document())


@pytest.fixture(scope="session")
def desk_db(desk_scene):
    return rp.build(desk_scene.chain, rp.SamplingSpec(dtheta=DESK_DTHETA),
                    DESK_VOXEL)


@pytest.fixture(scope="session")
def desk_regions(desk_scene, desk_db):
    options = GraspCheckOptions(free=desk_scene.grasp_free_axes)
    regions = []
    for task in desk_scene.tasks:
        regions.append(compute_base_region(
            desk_db, desk_scene.chain, desk_scene.geometry, desk_scene.world,
            task.tray_id, task.graspsets, desk_scene.grid, options))
    return regions
