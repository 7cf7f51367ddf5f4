"""Write the bundled demo scenes to scenes/ in canonical form."""

from pathlib import Path

from reachplan import scenes

OUT = Path(__file__).resolve().parent.parent / "scenes"


def main():
    OUT.mkdir(exist_ok=True)
    targets = {
        "desk_three_trays.json": scenes.three_tray_document(),
        "desk_walled_tray.json": scenes.walled_tray_document(),
    }
    for name, document in targets.items():
        path = OUT / name
        path.write_text(scenes.scene_text(document), encoding="ascii")
        print(f"wrote {path}")


if __name__ == "__main__":
    main()
