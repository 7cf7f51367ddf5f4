"""Command-line pipeline: build-db, query-ik, region, intersect, plan, simulate.

Exit codes: 0 success, 2 usage, 3 scene error, 4 infeasible plan, 5 I/O or
database error.  Failures print one machine-parsable line to stderr:
``error: <code>: <message>``.  All outputs are deterministic under fixed
seeds; REACHPLAN_THREADS overrides --threads.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import reachdb, svg
from .baseregion import (
    BaseRegion,
    GraspCheckOptions,
    compute_base_region,
    load_region,
    save_region,
)
from .geometry import Pose6
from .kinematics import refine_ik
from .reachdb import DatabaseError, SamplingSpec, VoxelSpec
from .regiongeo import (
    UncertaintyModel,
    enumerate_intersections,
    filter_by_uncertainty,
)
from .robustsim import DEFAULT_OVERHEAD, DEFAULT_SPEED, evaluate, sample_offset
from .scene import Scene, SceneError, canonical_json, load_scene
from .sequencer import (
    InfeasibleCoverError,
    InfeasiblePlanError,
    PlanOptions,
    PlanResult,
    PlanStop,
    plan as plan_pipeline,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SCENE = 3
EXIT_INFEASIBLE = 4
EXIT_IO = 5


def _fail(code: str, message: str, status: int) -> int:
    print(f"error: {code}: {message}", file=sys.stderr)
    return status


def _f(value: float) -> str:
    return format(float(value), ".9g")


def _parse_floats(text: str, n: int, what: str) -> list[float]:
    parts = [p for p in text.replace(",", " ").split() if p]
    if len(parts) != n:
        raise ValueError(f"{what} needs {n} comma-separated numbers")
    return [float(p) for p in parts]


def _threads(args) -> int:
    env = os.environ.get("REACHPLAN_THREADS")
    if env is not None:
        return max(1, int(env))
    if args.threads is not None:
        return max(1, args.threads)
    return os.cpu_count() or 1


def _grasp_options(scene: Scene, args, threads: int) -> GraspCheckOptions:
    return GraspCheckOptions(
        strategy=getattr(args, "strategy", "multi"),
        interval=not getattr(args, "exact_voxel", False),
        refine=getattr(args, "refine", False),
        free=scene.grasp_free_axes,
        margin=getattr(args, "margin", 0.0),
        threads=threads,
    )


def _region_paths(out_dir: Path, tray_id: str) -> tuple[Path, Path]:
    return out_dir / f"region_{tray_id}.txt", out_dir / f"region_{tray_id}.svg"


def _load_regions(regions_dir: Path, tray_ids) -> list[BaseRegion]:
    regions = []
    for tray_id in tray_ids:
        path = regions_dir / f"region_{tray_id}.txt"
        if not path.exists():
            raise FileNotFoundError(f"missing region file {path}")
        regions.append(load_region(path))
    return regions


def plan_document(result: PlanResult) -> dict:
    return {
        "start": list(result.start),
        "goal": list(result.goal),
        "sigma": result.sigma,
        "total_length": result.total_length,
        "stops": [
            {"trays": list(s.trays), "center": list(s.center),
             "radius": s.radius}
            for s in result.stops
        ],
        "assignment": dict(sorted(result.assignment.items())),
        "selected_indices": list(result.selected_indices),
    }


def load_plan(path) -> PlanResult:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    stops = [PlanStop(trays=tuple(s["trays"]), center=tuple(s["center"]),
                      radius=float(s["radius"])) for s in doc["stops"]]
    return PlanResult(
        stops=stops,
        assignment={k: int(v) for k, v in doc["assignment"].items()},
        total_length=float(doc["total_length"]),
        start=tuple(doc["start"]),
        goal=tuple(doc["goal"]),
        sigma=float(doc["sigma"]),
        selected_indices=[int(i) for i in doc.get("selected_indices", [])],
    )


def _cmd_build_db(args) -> int:
    scene = load_scene(args.scene)
    voxel = VoxelSpec(*_parse_floats(args.voxel, 6, "--voxel"))
    sampling = SamplingSpec(dtheta=args.dtheta, w_min=args.wmin,
                            thin_exponent=args.thin_exponent,
                            thin_ref=args.thin_ref, seed=args.thin_seed)
    total = sampling.sample_count(scene.chain)
    print(f"sampling {total} configurations")
    db = reachdb.build(scene.chain, sampling, voxel)
    reachdb.save(db, args.out)
    print(f"records {db.record_count}")
    print(f"voxels {db.voxel_count}")
    if args.svg:
        proj = reachdb.reachability_projection(db)
        Path(args.svg).write_text(
            svg.render_projection(proj, voxel.dx, voxel.dy), encoding="ascii")
    return EXIT_OK


def _cmd_query_ik(args) -> int:
    db = reachdb.load(args.db)
    pose = Pose6.from_array(_parse_floats(args.pose, 6, "--pose")).canonicalized()
    if args.interval:
        records = reachdb.query_interval(db, pose)
    else:
        records = reachdb.query(db, pose)
    print(f"{len(records)} configurations")
    for rec_pose, config, manip in records:
        cfg = " ".join(_f(v) for v in config)
        pos = " ".join(_f(v) for v in rec_pose.as_array())
        print(f"config {cfg} | pose {pos} | w {_f(manip)}")
    if args.refine:
        if not args.scene:
            raise SceneError("SCENE_MISSING_FIELD", "--scene",
                             "--refine needs --scene to reconstruct the chain")
        scene = load_scene(args.scene)
        db.check_chain(scene.chain)
        refined_count = 0
        for _, config, _ in records:
            solution = refine_ik(scene.chain, config, pose, tol=args.tol)
            if solution is not None:
                print("refined " + " ".join(_f(v) for v in solution))
                refined_count += 1
        print(f"{refined_count} refined solutions")
    return EXIT_OK


def _cmd_region(args) -> int:
    scene = load_scene(args.scene)
    db = reachdb.load(args.db, expect_chain=scene.chain)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    threads = _threads(args)
    options = _grasp_options(scene, args, threads)

    tray_ids = args.tray if args.tray else [t.tray_id for t in scene.tasks]
    regions = []
    for tray_id in tray_ids:
        task = scene.task_for(tray_id)
        region = compute_base_region(db, scene.chain, scene.geometry,
                                     scene.world, tray_id, task.graspsets,
                                     scene.grid, options)
        regions.append(region)
        txt_path, svg_path = _region_paths(out_dir, tray_id)
        save_region(region, txt_path)
        svg_path.write_text(svg.render_region(region), encoding="ascii")
        print(f"region {tray_id} feasible_cells {region.feasible_cells}")
    (out_dir / "regions.svg").write_text(
        svg.render_regions_overlay(regions), encoding="ascii")
    return EXIT_OK


def _cmd_intersect(args) -> int:
    scene = load_scene(args.scene)
    sigma = args.sigma if args.sigma is not None else scene.uncertainty.sigma
    regions = _load_regions(Path(args.regions),
                            [t.tray_id for t in scene.tasks])
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = enumerate_intersections(regions, args.lambda_max)
    model = UncertaintyModel(sigma=sigma, model=scene.uncertainty.model,
                             seed=scene.uncertainty.seed)
    kept = filter_by_uncertainty(records, model)
    kept_keys = {r.trays for r in kept}

    report_lines = [f"filter v1 sigma {_f(sigma)}"]
    for record in records:
        name = "+".join(record.trays)
        status = "kept" if record.trays in kept_keys else "discarded"
        report_lines.append(
            f"{name} order {record.order} cells {int(record.mask.sum())} "
            f"radius {_f(record.robust_radius)} center "
            f"{_f(record.robust_center[0])} {_f(record.robust_center[1])} "
            f"{status}")
        grid_region = BaseRegion(grid=record.grid, mask=record.mask,
                                 tray_id=name)
        save_region(grid_region, out_dir / f"intersection_{name}.txt")
    (out_dir / "filter_report.txt").write_text(
        "\n".join(report_lines) + "\n", encoding="ascii")
    (out_dir / "intersections.svg").write_text(
        svg.render_intersections(records, sigma=sigma), encoding="ascii")
    print("\n".join(report_lines))
    return EXIT_OK


def _cmd_plan(args) -> int:
    scene = load_scene(args.scene)
    sigma = args.sigma if args.sigma is not None else scene.uncertainty.sigma
    start = (_parse_floats(args.start, 2, "--start") if args.start
             else list(scene.start))
    goal = (_parse_floats(args.goal, 2, "--goal") if args.goal
            else list(scene.goal))
    regions = _load_regions(Path(args.regions),
                            [t.tray_id for t in scene.tasks])
    model = UncertaintyModel(sigma=sigma, model=scene.uncertainty.model,
                             seed=scene.uncertainty.seed)
    result = plan_pipeline(regions, model, start, goal,
                           PlanOptions(lambda_max=args.lambda_max,
                                       sa_seed=args.sa_seed))
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "plan.json").write_text(
        canonical_json(plan_document(result)) + "\n", encoding="ascii")
    (out_dir / "plan.svg").write_text(
        svg.render_plan(regions, result), encoding="ascii")

    print(f"stops {result.stop_count}")
    for i, stop in enumerate(result.stops):
        print(f"stop {i} trays {'+'.join(stop.trays)} center "
              f"{_f(stop.center[0])} {_f(stop.center[1])} "
              f"radius {_f(stop.radius)}")
    for tray, idx in sorted(result.assignment.items()):
        print(f"assign {tray} stop {idx}")
    print(f"total_length {_f(result.total_length)}")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    scene = load_scene(args.scene)
    result = load_plan(args.plan)
    regions = _load_regions(Path(args.regions),
                            [t.tray_id for t in scene.tasks])
    sigma = args.sigma if args.sigma is not None else scene.uncertainty.sigma
    model_name = {"uniform": "uniform-disk", "gaussian": "gaussian-radial",
                  "boundary": "boundary-worst-case"}[args.model]
    model = UncertaintyModel(sigma=sigma, model=model_name, seed=args.seed)
    report = evaluate(result, regions, model, trials=args.trials,
                      speed=args.speed, overhead=args.overhead)
    sys.stdout.write(report.to_text())
    if args.hist_svg:
        rng = np.random.default_rng(model.seed)
        radii = np.hypot(*sample_offset(model, rng, size=args.trials).T)
        Path(args.hist_svg).write_text(svg.render_histogram(radii),
                                       encoding="ascii")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reachplan",
        description="Reachability-database IK queries and robust base-stop planning")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-db", help="sample a chain and save its database")
    p.add_argument("--scene", required=True)
    p.add_argument("--dtheta", type=float, required=True,
                   help="joint-space step (rad)")
    p.add_argument("--voxel", required=True,
                   help='six grid lengths "dx,dy,dz,droll,dpitch,dyaw"')
    p.add_argument("--wmin", type=float, default=0.0,
                   help="drop configurations with manipulability below this")
    p.add_argument("--thin-exponent", type=float, default=0.0)
    p.add_argument("--thin-ref", type=float, default=1.0)
    p.add_argument("--thin-seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--svg", default=None,
                   help="also write the 2D reachability projection")
    p.set_defaults(func=_cmd_build_db)

    p = sub.add_parser("query-ik", help="look up configurations for a pose")
    p.add_argument("--db", required=True)
    p.add_argument("--pose", required=True, help='"x,y,z,roll,pitch,yaw"')
    p.add_argument("--interval", action="store_true",
                   help="query the half-grid interval instead of one voxel")
    p.add_argument("--refine", action="store_true",
                   help="numerically refine each candidate (needs --scene)")
    p.add_argument("--scene", default=None)
    p.add_argument("--tol", type=float, default=1e-9)
    p.set_defaults(func=_cmd_query_ik)

    p = sub.add_parser("region", help="compute base regions for task trays")
    p.add_argument("--scene", required=True)
    p.add_argument("--db", required=True)
    p.add_argument("--tray", action="append", default=None,
                   help="tray id (repeatable; default: all task trays)")
    p.add_argument("--out", required=True)
    p.add_argument("--strategy", choices=("multi", "single"), default="multi")
    p.add_argument("--exact-voxel", action="store_true",
                   help="use exact-voxel queries instead of interval queries")
    p.add_argument("--refine", action="store_true")
    p.add_argument("--margin", type=float, default=0.0,
                   help="inflate all robot shapes by this margin (m)")
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=_cmd_region)

    p = sub.add_parser("intersect", help="intersections, circles, filter report")
    p.add_argument("--scene", required=True)
    p.add_argument("--regions", required=True)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--lambda-max", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_intersect)

    p = sub.add_parser("plan", help="select robust stops and order the path")
    p.add_argument("--scene", required=True)
    p.add_argument("--regions", required=True)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--start", default=None, help='"x,y"')
    p.add_argument("--goal", default=None, help='"x,y"')
    p.add_argument("--sa-seed", type=int, default=42)
    p.add_argument("--lambda-max", type=int, default=None)
    p.add_argument("--out", default=".")
    p.set_defaults(func=_cmd_plan)

    p = sub.add_parser("simulate", help="Monte-Carlo robustness evaluation")
    p.add_argument("--scene", required=True)
    p.add_argument("--plan", required=True)
    p.add_argument("--regions", required=True)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--sigma", type=float, default=None)
    p.add_argument("--model", choices=("uniform", "gaussian", "boundary"),
                   default="uniform")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--speed", type=float, default=DEFAULT_SPEED)
    p.add_argument("--overhead", type=float, default=DEFAULT_OVERHEAD)
    p.add_argument("--hist-svg", default=None)
    p.set_defaults(func=_cmd_simulate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except SceneError as exc:
        return _fail(exc.code, str(exc), EXIT_SCENE)
    except (InfeasiblePlanError, InfeasibleCoverError) as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_INFEASIBLE)
    except DatabaseError as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_IO)
    except (OSError, FileNotFoundError) as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_IO)
    except ValueError as exc:
        return _fail("ValueError", str(exc), EXIT_USAGE)


if __name__ == "__main__":
    sys.exit(main())
