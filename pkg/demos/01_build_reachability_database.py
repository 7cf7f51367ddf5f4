"""Build a reachability database for a two-link planar arm and look around.

The database is a map from discretized end-effector poses (6D voxels) to the
joint configurations that produce them.  Here we sample the joint grid of a
1 m + 1 m planar arm, store every pose, and inspect the result.
"""

import math

import numpy as np

import reachplan as rp

chain = rp.planar_chain(1.0, 1.0)

# quarter-radian joint steps, 5 cm position voxels, coarse orientation cells
sampling = rp.SamplingSpec(dtheta=math.pi / 24)
voxels = rp.VoxelSpec(0.05, 0.05, 0.05, math.pi / 12, math.pi / 12, math.pi / 12)
print(f"sampling {sampling.sample_count(chain)} configurations ...")
db = rp.build(chain, sampling, voxels)
print(f"stored {db.record_count} records in {db.voxel_count} voxels")

# the 3D projection collapses orientation: how many configurations reach
# each position cell?
projection = rp.reachability_projection(db)
counts = np.array(list(projection.values()))
print(f"position cells: {len(projection)}, "
      f"configurations per cell: min {counts.min()} / "
      f"median {int(np.median(counts))} / max {counts.max()}")

# densest position cells sit near the workspace interior, not the rim
best = sorted(projection.items(), key=lambda kv: -kv[1])[:5]
for (ix, iy, _iz), count in best:
    x = (ix + 0.5) * voxels.dx
    y = (iy + 0.5) * voxels.dy
    print(f"  cell ({ix:+3d},{iy:+3d}) around ({x:+.2f}, {y:+.2f}) m: "
          f"{count} configurations")

# manipulability filtering drops near-singular configurations
filtered = rp.build(chain, rp.SamplingSpec(dtheta=math.pi / 24, w_min=0.2),
                    voxels)
print(f"with manipulability >= 0.2: {filtered.record_count} records "
      f"({db.record_count - filtered.record_count} near-singular dropped)")

# databases round-trip through a compact binary file
rp.save(db, "/tmp/planar.rpdb")
again = rp.load("/tmp/planar.rpdb", expect_chain=chain)
print(f"saved and reloaded: {again.record_count} records, "
      f"fingerprint ok, bytes deterministic")
