import json
import math

import pytest

from reachplan import scenes
from reachplan.cli import main
from reachplan.scene import SceneError, canonical_json, emit_scene, parse_scene

MINIMAL = {
    "robot": {
        "joints": [{"a": 1.0, "alpha": 0.0, "d": 0.0, "theta_offset": 0.0,
                    "limit_lo": -math.pi, "limit_hi": math.pi},
                   {"a": 1.0, "alpha": 0.0, "d": 0.0, "theta_offset": 0.0,
                    "limit_lo": -math.pi, "limit_hi": math.pi}],
        "tool": [0, 0, 0, 0, 0, 0],
        "links": [{"shapes": []}, {"shapes": []}, {"shapes": []}],
        "self_collision_pairs": [],
        "heading": 0.0,
    },
    "world": {"obstacles": [], "trays": {"tray1": {"shapes": []}}},
    "tasks": [{"tray": "tray1", "objects": [
        {"id": "obj1", "pose": [1.0, 0.2, 0.0, 0, 0, 0], "shapes": [],
         "grasps": [[0, 0, 0, 0, 0, 0]]}]}],
    "base_grid": {"origin": [-2.0, -2.0], "cell_size": 0.25,
                  "width": 16, "height": 16},
    "uncertainty": {"sigma": 0.1, "model": "uniform-disk", "seed": 0},
    "start": [0.0, -3.0],
    "goal": [0.0, 3.0],
    "options": {"grasp_free_axes": ["roll", "pitch", "yaw"]},
}


def _text(doc):
    return canonical_json(doc) + "\n"


def test_parse_minimal_scene():
    scene = parse_scene(_text(MINIMAL))
    assert scene.chain.njoints == 2
    assert scene.grid.width == 16
    assert scene.tasks[0].tray_id == "tray1"
    assert scene.grasp_free_axes == (False, False, False, True, True, True)


def test_emit_parse_fixed_point():
    scene = parse_scene(_text(MINIMAL))
    emitted = emit_scene(scene)
    again = parse_scene(emitted)
    assert emit_scene(again) == emitted


def test_scene_syntax_error_has_position():
    with pytest.raises(SceneError) as err:
        parse_scene("{\n  broken\n}")
    assert err.value.code == "SCENE_SYNTAX"
    assert "line 2" in err.value.path


def test_scene_empty_graspset():
    doc = json.loads(_text(MINIMAL))
    doc["tasks"][0]["objects"][0]["grasps"] = []
    with pytest.raises(SceneError) as err:
        parse_scene(_text(doc))
    assert err.value.code == "SCENE_EMPTY_GRASPSET"
    assert "obj1" in str(err.value)


def test_scene_unknown_tray():
    doc = json.loads(_text(MINIMAL))
    doc["tasks"][0]["tray"] = "missing"
    with pytest.raises(SceneError) as err:
        parse_scene(_text(doc))
    assert err.value.code == "SCENE_UNKNOWN_TRAY"


def test_scene_bad_dimension():
    doc = json.loads(_text(MINIMAL))
    doc["base_grid"]["cell_size"] = -0.25
    with pytest.raises(SceneError) as err:
        parse_scene(_text(doc))
    assert err.value.code == "SCENE_BAD_DIMENSION"
    assert "base_grid" in err.value.path


def test_scene_bad_shape_and_limits():
    doc = json.loads(_text(MINIMAL))
    doc["world"]["trays"]["tray1"]["shapes"] = [
        {"type": "sphere", "center": [0, 0, 0], "radius": -1.0}]
    with pytest.raises(SceneError) as err:
        parse_scene(_text(doc))
    assert err.value.code == "SCENE_BAD_DIMENSION"

    doc = json.loads(_text(MINIMAL))
    doc["robot"]["joints"][0]["limit_lo"] = 5.0
    with pytest.raises(SceneError) as err:
        parse_scene(_text(doc))
    assert err.value.code == "SCENE_BAD_LIMITS"


def test_scene_duplicate_object_id():
    doc = json.loads(_text(MINIMAL))
    obj = dict(doc["tasks"][0]["objects"][0])
    doc["tasks"][0]["objects"] = [obj, dict(obj)]
    with pytest.raises(SceneError) as err:
        parse_scene(_text(doc))
    assert err.value.code == "SCENE_DUPLICATE_ID"


@pytest.fixture(scope="module")
def cli_workspace(tmp_path_factory):
    """Scene file, database, and regions produced through the CLI."""
    root = tmp_path_factory.mktemp("cli")
    scene_path = root / "scene.json"
    scene_path.write_text(scenes.scene_text(scenes.three_tray_document()),
                          encoding="ascii")
    db_path = root / "desk.rpdb"
    code = main(["build-db", "--scene", str(scene_path),
                 "--dtheta", str(math.pi / 12),
                 "--voxel", "0.08,0.08,0.08,0.5235987756,0.5235987756,0.5235987756",
                 "--out", str(db_path)])
    assert code == 0
    regions_dir = root / "regions"
    code = main(["region", "--scene", str(scene_path), "--db", str(db_path),
                 "--out", str(regions_dir), "--threads", "1"])
    assert code == 0
    return {"root": root, "scene": scene_path, "db": db_path,
            "regions": regions_dir}


def test_cli_build_db_outputs(cli_workspace, capsys):
    assert cli_workspace["db"].exists()
    assert (cli_workspace["regions"] / "region_tray1.txt").exists()
    assert (cli_workspace["regions"] / "region_tray1.svg").exists()
    assert (cli_workspace["regions"] / "regions.svg").exists()


def test_cli_query_ik(cli_workspace, capsys):
    code = main(["query-ik", "--db", str(cli_workspace["db"]),
                 "--pose", "0.0,0.6,0.9,0,0,0", "--interval"])
    out = capsys.readouterr().out
    assert code == 0
    assert "configurations" in out.splitlines()[0]


def test_cli_query_ik_unreachable(cli_workspace, capsys):
    code = main(["query-ik", "--db", str(cli_workspace["db"]),
                 "--pose", "9,9,9,0,0,0"])
    out = capsys.readouterr().out
    assert code == 0
    assert out.splitlines()[0] == "0 configurations"


def test_cli_query_ik_refine_needs_scene(cli_workspace, capsys):
    code = main(["query-ik", "--db", str(cli_workspace["db"]),
                 "--pose", "0.0,0.6,0.9,0,0,0", "--refine"])
    assert code == 3
    assert "SCENE_MISSING_FIELD" in capsys.readouterr().err


def test_cli_intersect_and_plan_and_simulate(cli_workspace, capsys):
    root = cli_workspace["root"]
    inter_dir = root / "intersections"
    code = main(["intersect", "--scene", str(cli_workspace["scene"]),
                 "--regions", str(cli_workspace["regions"]),
                 "--out", str(inter_dir)])
    assert code == 0
    report = (inter_dir / "filter_report.txt").read_text()
    assert "tray1+tray2" in report
    assert (inter_dir / "intersections.svg").exists()

    plan_dir = root / "plan"
    code = main(["plan", "--scene", str(cli_workspace["scene"]),
                 "--regions", str(cli_workspace["regions"]),
                 "--out", str(plan_dir)])
    out = capsys.readouterr().out
    assert code == 0
    assert "stops 2" in out
    plan_doc = json.loads((plan_dir / "plan.json").read_text())
    assert len(plan_doc["stops"]) == 2
    assert (plan_dir / "plan.svg").exists()

    code = main(["simulate", "--scene", str(cli_workspace["scene"]),
                 "--plan", str(plan_dir / "plan.json"),
                 "--regions", str(cli_workspace["regions"]),
                 "--trials", "2000", "--model", "boundary", "--seed", "7",
                 "--hist-svg", str(root / "hist.svg")])
    out = capsys.readouterr().out
    assert code == 0
    assert out.startswith("simreport v1")
    assert (root / "hist.svg").exists()
    values = dict(line.split(None, 1) for line in out.strip().splitlines()[1:])
    assert values["planned_stops"] == "2"
    assert values["naive_stops"] == "3"
    assert float(values["planned_overall"]) == 1.0


def test_cli_plan_absurd_sigma_is_infeasible(cli_workspace, capsys):
    code = main(["plan", "--scene", str(cli_workspace["scene"]),
                 "--regions", str(cli_workspace["regions"]),
                 "--sigma", "10", "--out", str(cli_workspace["root"] / "x")])
    err = capsys.readouterr().err
    assert code == 4
    assert "error:" in err
    for tray in ("tray1", "tray2", "tray3"):
        assert tray in err


def test_cli_usage_error_exit_code(capsys):
    assert main(["no-such-command"]) == 2
    assert main(["region", "--scene", "x"]) == 2  # missing required flags


def test_cli_missing_file_is_io_error(tmp_path, capsys):
    code = main(["query-ik", "--db", str(tmp_path / "nope.rpdb"),
                 "--pose", "0,0,0,0,0,0"])
    assert code == 5


def test_cli_scene_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{", encoding="ascii")
    code = main(["build-db", "--scene", str(bad), "--dtheta", "0.5",
                 "--voxel", "0.1,0.1,0.1,0.5,0.5,0.5",
                 "--out", str(tmp_path / "db")])
    assert code == 3
    assert "SCENE_SYNTAX" in capsys.readouterr().err


def test_cli_env_threads_override(cli_workspace, monkeypatch, capsys):
    monkeypatch.setenv("REACHPLAN_THREADS", "2")
    out_dir = cli_workspace["root"] / "regions_env"
    code = main(["region", "--scene", str(cli_workspace["scene"]),
                 "--db", str(cli_workspace["db"]),
                 "--tray", "tray1", "--out", str(out_dir), "--threads", "1"])
    assert code == 0
    got = (out_dir / "region_tray1.txt").read_text()
    want = (cli_workspace["regions"] / "region_tray1.txt").read_text()
    assert got == want
