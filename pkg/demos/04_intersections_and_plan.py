"""From per-tray regions to a minimal robust stop sequence.

Region intersections let one stop serve several trays; intersections whose
inscribed circle is smaller than the positioning-uncertainty level are
discarded; a branch-and-bound cover picks the fewest robust stops and the
stops are visited on the shortest path from start to goal.
"""

import math
import time
from pathlib import Path

import reachplan as rp
from reachplan import scenes
from reachplan.baseregion import GraspCheckOptions, compute_base_region
from reachplan.regiongeo import enumerate_intersections, filter_by_uncertainty
from reachplan.sequencer import plan
from reachplan.svg import render_plan

scene = scenes.build_scene(scenes.three_tray_document())
print("building database and per-tray regions ...")
t0 = time.time()
db = rp.build(scene.chain, rp.SamplingSpec(dtheta=math.pi / 12),
              rp.VoxelSpec(0.08, 0.08, 0.08, math.pi / 6, math.pi / 6,
                           math.pi / 6))
options = GraspCheckOptions(free=scene.grasp_free_axes)
regions = [compute_base_region(db, scene.chain, scene.geometry, scene.world,
                               task.tray_id, task.graspsets, scene.grid,
                               options)
           for task in scene.tasks]
print(f"  done in {time.time() - t0:.1f}s; cells per tray: "
      f"{[r.feasible_cells for r in regions]}")

records = enumerate_intersections(regions)
print("\nintersections and their inscribed circles:")
for record in records:
    print(f"  {'+'.join(record.trays):24s} cells {int(record.mask.sum()):4d} "
          f"radius {record.robust_radius:.3f} m")

sigma = scene.uncertainty.sigma
kept = filter_by_uncertainty(records, scene.uncertainty)
print(f"\npositioning uncertainty {sigma} m keeps "
      f"{len(kept)} of {len(records)} candidates")
for record in records:
    if record not in kept:
        print(f"  discarded {'+'.join(record.trays)} "
              f"(radius {record.robust_radius:.3f} < {sigma})")

result = plan(regions, scene.uncertainty, scene.start, scene.goal)
print(f"\nplanned {result.stop_count} stops "
      f"(naive would need {len(regions)}):")
for i, stop in enumerate(result.stops):
    print(f"  stop {i + 1}: trays {'+'.join(stop.trays)} at "
          f"({stop.center[0]:+.3f}, {stop.center[1]:+.3f}), "
          f"tolerance radius {stop.radius:.3f} m")
print(f"total path length {result.total_length:.3f} m")

out = Path("/tmp/reachplan_plan.svg")
out.write_text(render_plan(regions, result), encoding="ascii")
print(f"wrote {out}")
