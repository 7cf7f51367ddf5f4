"""Approximate inverse kinematics by voxel lookup, then refine numerically.

Instead of running an IK solver, we look up the voxel around a target pose
and return every stored configuration in it.  The hits approximate the IK
solution set; a damped least-squares refiner turns any hit into an exact
solution within a few iterations.
"""

import math

import numpy as np

import reachplan as rp

chain = rp.planar_chain(1.0, 1.0)
db = rp.build(chain, rp.SamplingSpec(dtheta=math.pi / 48),
              rp.VoxelSpec(0.05, 0.05, 0.05, math.pi / 16, math.pi / 16,
                           math.pi / 16))
print(f"database: {db.record_count} records, {db.voxel_count} voxels")

target = rp.Pose6(1.2, 0.5, 0.0, 0.0, 0.0, 1.2)
print(f"target pose: ({target.x}, {target.y}), yaw {target.yaw}")

exact_voxel = rp.query(db, target)
interval = rp.query_interval(db, target)
print(f"exact-voxel query: {len(exact_voxel)} candidates; "
      f"interval query: {len(interval)} candidates")

# with the orientation left free, both elbow branches appear
position_only = (False, False, False, True, True, True)
from reachplan.reachdb import query_rows
rows = query_rows(db, target, free=position_only)
configs = db.configs[rows]
print(f"position-only query: {len(rows)} candidates, elbow angles range "
      f"[{configs[:, 1].min():+.2f}, {configs[:, 1].max():+.2f}] rad")

# every candidate seeds the numerical refiner; each converges to an exact
# solution of the position task
branches = rp.planar_two_link_ik(1.0, 1.0, target.x, target.y)
print("analytic solutions:",
      ", ".join(np.array2string(b, precision=3) for b in branches))
refined = set()
for config in configs[:40]:
    solution = rp.refine_ik(chain, config, target, tol=1e-10,
                            free=position_only)
    if solution is None:
        continue
    pose = rp.forward_kinematics(chain, solution)
    err = math.hypot(pose.x - target.x, pose.y - target.y)
    nearest = min(range(len(branches)),
                  key=lambda i: np.linalg.norm(solution - branches[i]))
    refined.add(nearest)
    assert err < 1e-9
print(f"refinement reached analytic branch(es): {sorted(refined)} "
      "(0 = elbow one way, 1 = the other)")

unreachable = rp.Pose6(3.0, 0.0, 0.0, 0.0, 0.0, 0.0)
print(f"unreachable pose query returns {len(rp.query(db, unreachable))} "
      "candidates (empty means unreachable at this resolution)")
