"""Base regions: from which floor positions can the robot serve each tray?

A grid cell is feasible when the mobile base fits there collision-free and
every object in the tray has some grasp pose with a collision-free arm
configuration found through the reachability database.  On a tray with a
raised front wall, checking every database candidate (instead of a single
IK-style candidate per grasp) grows the region substantially.
"""

import math
import time

import reachplan as rp
from reachplan import scenes
from reachplan.baseregion import GraspCheckOptions, compute_base_region


def show(region):
    print(f"tray {region.tray_id}: {region.feasible_cells} feasible cells")
    for row in range(region.grid.height - 1, -1, -1):  # y grows upward
        print("   " + "".join("#" if v else "." for v in region.mask[row]))


scene = scenes.build_scene(scenes.walled_tray_document())
print("building the reachability database for the desk robot ...")
t0 = time.time()
db = rp.build(scene.chain, rp.SamplingSpec(dtheta=math.pi / 16),
              rp.VoxelSpec(0.08, 0.08, 0.08, math.pi / 6, math.pi / 6,
                           math.pi / 6))
print(f"  {db.record_count} records in {time.time() - t0:.1f}s")

task = scene.task_for("tray1")
for strategy in ("single", "multi"):
    options = GraspCheckOptions(free=scene.grasp_free_axes, strategy=strategy)
    t0 = time.time()
    region = compute_base_region(db, scene.chain, scene.geometry, scene.world,
                                 "tray1", task.graspsets, scene.grid, options)
    label = ("single candidate per grasp (IK-solver style)"
             if strategy == "single" else "every database candidate")
    print(f"\n{label}, {time.time() - t0:.1f}s:")
    show(region)

print("\nThe exhaustive check reaches over the wall with steep elbow-up")
print("configurations that a lowest-norm candidate never tries.")
