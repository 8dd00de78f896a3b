#!/usr/bin/env python3
"""Regenerate the checked-in test fixtures (keypoint files and the golden
overlay). Run from the repository root:

    python3 scripts/make_fixtures.py

The table3 scene is an otherwise straight queue with one person bulged
laterally: the spring model flags the bulged person plus both neighbors
(3 outliers) while the confidence band flags only the bulged person (1),
matching the two detector counts the suite asserts. The queue must stay
exactly straight away from the bulge so every background link force is an
exact zero.
"""

from pathlib import Path

from massimo.ingest import Keypoint, PersonPose, PoseFrame, QueuePoint, COCO_KEYPOINT_COUNT, LEFT_HIP, RIGHT_HIP
from massimo.ingest import serialize_frame
from massimo.pipeline import Config, analyze
from massimo.synth import SceneSpec, generate_queue, scene_to_frame

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "tests" / "data"
GOLDEN = ROOT / "tests" / "golden"

# table3 scene geometry: irregular spacing, one person (index 6) bulged 70 px
TABLE3_XS = [40.0, 97.5, 152.0, 205.5, 262.0, 318.5, 371.0, 428.5, 486.0, 539.5, 597.0, 650.5]
TABLE3_BASE_Y = 300.0
TABLE3_BULGE_INDEX = 6
TABLE3_BULGE_OFFSET = 70.0
HIP_HALFWIDTH = 12.0


def frame_from_points(points: list[QueuePoint], width: int, height: int,
                      halfwidth: float = HIP_HALFWIDTH) -> PoseFrame:
    sentinel = Keypoint(0.0, 0.0, 0.0)
    people = []
    for p in points:
        kpts = [sentinel] * COCO_KEYPOINT_COUNT
        kpts[LEFT_HIP] = Keypoint(p.x - halfwidth, p.y, 0.9)
        kpts[RIGHT_HIP] = Keypoint(p.x + halfwidth, p.y, 0.9)
        people.append(PersonPose(p.person_id, tuple(kpts)))
    return PoseFrame(image_path="", width=width, height=height, people=tuple(people))


def make_table3() -> PoseFrame:
    points = []
    for i, x in enumerate(TABLE3_XS):
        y = TABLE3_BASE_Y + (TABLE3_BULGE_OFFSET if i == TABLE3_BULGE_INDEX else 0.0)
        points.append(QueuePoint(i, x, y))
    return frame_from_points(points, width=720, height=480)


def make_queue5() -> PoseFrame:
    spec = SceneSpec(n_people=5, base_line=(0.12, 280.0), spacing=85.0,
                     noise_sigma=4.0, seed=7)
    points, _ = generate_queue(spec)
    return scene_to_frame(points)


def make_parabola() -> PoseFrame:
    points = [QueuePoint(i, float(x), float(x * x)) for i, x in enumerate([10, 20, 30, 40])]
    return frame_from_points(points, width=80, height=1700, halfwidth=5.0)


def main() -> None:
    DATA.mkdir(parents=True, exist_ok=True)
    GOLDEN.mkdir(parents=True, exist_ok=True)

    (DATA / "table3_scene.json").write_bytes(serialize_frame(make_table3()))
    (DATA / "queue5.json").write_bytes(serialize_frame(make_queue5()))
    (DATA / "parabola.json").write_bytes(serialize_frame(make_parabola()))

    out = GOLDEN / "_scratch"
    report = analyze(DATA / "table3_scene.json", Config(), out)
    print("table3 ci outliers:", report.to_dict()["ci"]["outliers"])
    print("table3 spring outliers:", report.to_dict()["spring"]["outliers"])
    (out / "overlay.png").replace(GOLDEN / "table3_overlay.png")
    (out / "report.json").unlink()
    (out / "topview.svg").replace(GOLDEN / "table3_topview.svg")
    out.rmdir()
    print("fixtures written to", DATA, "and", GOLDEN)


if __name__ == "__main__":
    main()
