"""Monte-Carlo check: does the plan survive base-positioning error?

Each trial perturbs every stop by a sampled offset and verifies the
perturbed position still lies in the feasibility mask of every tray the
stop serves.  The planned sequence is compared against the naive
one-stop-per-tray baseline across error models and error levels.
"""

import math
import time

import numpy as np

import reachplan as rp
from reachplan import scenes
from reachplan.baseregion import GraspCheckOptions, compute_base_region
from reachplan.regiongeo import UncertaintyModel
from reachplan.robustsim import evaluate
from reachplan.sequencer import plan

scene = scenes.build_scene(scenes.three_tray_document())
print("preparing regions ...")
t0 = time.time()
db = rp.build(scene.chain, rp.SamplingSpec(dtheta=math.pi / 12),
              rp.VoxelSpec(0.08, 0.08, 0.08, math.pi / 6, math.pi / 6,
                           math.pi / 6))
options = GraspCheckOptions(free=scene.grasp_free_axes)
regions = [compute_base_region(db, scene.chain, scene.geometry, scene.world,
                               task.tray_id, task.graspsets, scene.grid,
                               options)
           for task in scene.tasks]
result = plan(regions, scene.uncertainty, scene.start, scene.goal)
print(f"  {result.stop_count}-stop plan ready in {time.time() - t0:.1f}s")

print("\nplanned vs naive at the calibrated error level (0.10 m):")
report = evaluate(result, regions,
                  UncertaintyModel(0.10, model="boundary-worst-case", seed=0),
                  trials=10000)
print(f"  stops:        {report.planned_stops} vs {report.naive_stops}")
print(f"  path length:  {report.planned_length:.2f} vs "
      f"{report.naive_length:.2f} m")
print(f"  time:         {report.planned_time:.1f} vs "
      f"{report.naive_time:.1f} s  (ratio {report.time_ratio:.3f})")
print(f"  success rate: {report.planned_overall:.4f} vs "
      f"{report.naive_overall:.4f}")

print("\nsuccess rate vs error level (uniform-disk error, 10000 trials):")
print("  sigma   planned  naive")
for sigma in np.linspace(0.0, 0.30, 7):
    u = UncertaintyModel(float(sigma), model="uniform-disk", seed=1)
    r = evaluate(result, regions, u, trials=10000)
    print(f"  {sigma:.2f}    {r.planned_overall:6.4f}  {r.naive_overall:6.4f}")

print("\nRates fall once the error level passes each stop's inscribed")
print("radius; the filter guarantees every kept stop tolerates the")
print("calibrated level.")
