"""Keypoint-file ingestion: parse pose JSON, extract hip midpoints, order the queue.

The on-disk schema is::

    {"image": {"path": str, "width": int, "height": int},
     "people": [{"id": int, "keypoints": [[x, y, conf] * 17]}]}

Keypoints follow the 17-point COCO convention; indices 11/12 are the left/right
hip. A keypoint at exactly (0, 0) is the "undetected" sentinel.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ParseError, SchemaError

COCO_KEYPOINT_COUNT = 17
LEFT_HIP = 11
RIGHT_HIP = 12
DEFAULT_CONF_THRESHOLD = 0.5


class Keypoint(NamedTuple):
    """One skeleton joint in image pixel coordinates (origin top-left)."""

    x: float
    y: float
    confidence: float

    @property
    def undetected(self) -> bool:
        return self.x == 0.0 and self.y == 0.0


@dataclass(frozen=True)
class PersonPose:
    id: int
    keypoints: tuple[Keypoint, ...]


@dataclass(frozen=True)
class PoseFrame:
    """All detected people in one image."""

    image_path: str
    width: int
    height: int
    people: tuple[PersonPose, ...]


class QueuePoint(NamedTuple):
    """One person's hip midpoint, the anchor for all queue geometry."""

    person_id: int
    x: float
    y: float


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise SchemaError(message)


def parse_keypoint_file(raw: bytes, warnings: list[str] | None = None) -> PoseFrame:
    """Parse raw keypoint-JSON bytes into a validated PoseFrame.

    People and keypoints keep their declared order. Coordinates of detected
    keypoints (confidence > 0) are clamped into the image rectangle, with a
    warning appended to ``warnings`` for every clamp.
    """
    try:
        doc = json.loads(raw.decode("utf-8") if isinstance(raw, (bytes, bytearray)) else raw)
    except UnicodeDecodeError as exc:
        raise ParseError(f"malformed JSON: not valid UTF-8 at byte offset {exc.start}", offset=exc.start) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON at byte offset {exc.pos}: {exc.msg}", offset=exc.pos) from exc

    _require(isinstance(doc, dict), "top level must be a JSON object")
    _require(isinstance(doc.get("image"), dict), 'missing "image" object')
    image = doc["image"]
    path = image.get("path")
    _require(isinstance(path, str), '"image.path" must be a string')
    width, height = image.get("width"), image.get("height")
    _require(isinstance(width, int) and not isinstance(width, bool) and width > 0,
             '"image.width" must be a positive integer')
    _require(isinstance(height, int) and not isinstance(height, bool) and height > 0,
             '"image.height" must be a positive integer')
    _require(isinstance(doc.get("people"), list), '"people" must be a list')

    people = []
    for entry in doc["people"]:
        _require(isinstance(entry, dict), "each person must be an object")
        pid = entry.get("id")
        _require(isinstance(pid, int) and not isinstance(pid, bool) and pid >= 0,
                 f"person id {pid!r} must be a non-negative integer")
        kpts = entry.get("keypoints")
        _require(isinstance(kpts, list), f"person {pid}: keypoints must be a list")
        if len(kpts) != COCO_KEYPOINT_COUNT:
            raise SchemaError(f"person {pid}: expected {COCO_KEYPOINT_COUNT} keypoints, got {len(kpts)}")
        parsed = []
        for k, triple in enumerate(kpts):
            _require(isinstance(triple, list) and len(triple) == 3,
                     f"person {pid} keypoint {k}: expected [x, y, conf]")
            x, y, conf = (float(v) for v in triple)
            _require(math.isfinite(x) and math.isfinite(y),
                     f"person {pid} keypoint {k}: coordinates must be finite")
            _require(math.isfinite(conf) and 0.0 <= conf <= 1.0,
                     f"person {pid} keypoint {k}: confidence {conf} outside [0, 1]")
            if conf > 0.0:
                cx = min(max(x, 0.0), float(width))
                cy = min(max(y, 0.0), float(height))
                if (cx, cy) != (x, y):
                    if warnings is not None:
                        warnings.append(f"person {pid} keypoint {k}: clamped ({x}, {y}) into image bounds")
                    x, y = cx, cy
            parsed.append(Keypoint(x, y, conf))
        people.append(PersonPose(pid, tuple(parsed)))

    return PoseFrame(image_path=path, width=width, height=height, people=tuple(people))


def serialize_frame(frame: PoseFrame) -> bytes:
    """Write a PoseFrame back to the on-disk JSON schema (round-trips exactly)."""
    doc = {
        "image": {"path": frame.image_path, "width": frame.width, "height": frame.height},
        "people": [
            {"id": p.id, "keypoints": [[k.x, k.y, k.confidence] for k in p.keypoints]}
            for p in frame.people
        ],
    }
    return (json.dumps(doc, indent=2) + "\n").encode("utf-8")


def hip_midpoints(
    frame: PoseFrame,
    conf_threshold: float = DEFAULT_CONF_THRESHOLD,
    warnings: list[str] | None = None,
) -> list[QueuePoint]:
    """Extract one queue point per person from the hip keypoints.

    Both hips valid: their midpoint. Exactly one valid: that hip (single-hip
    fallback, warned). Neither: the person is omitted, with a warning.
    """
    points = []
    for person in frame.people:
        lx, ly, lc = person.keypoints[LEFT_HIP]
        rx, ry, rc = person.keypoints[RIGHT_HIP]
        left_ok = lc >= conf_threshold and (lx != 0.0 or ly != 0.0)
        right_ok = rc >= conf_threshold and (rx != 0.0 or ry != 0.0)
        if left_ok and right_ok:
            points.append(QueuePoint(person.id, (lx + rx) / 2.0, (ly + ry) / 2.0))
        elif left_ok or right_ok:
            points.append(QueuePoint(person.id, lx, ly) if left_ok
                          else QueuePoint(person.id, rx, ry))
            if warnings is not None:
                warnings.append(f"person {person.id}: single-hip fallback")
        else:
            if warnings is not None:
                warnings.append(f"person {person.id}: no usable hip keypoints, omitted")
    return points


def principal_axis(points: list[QueuePoint]) -> tuple[float, float]:
    """Unit direction of maximum variance of the point cloud.

    Sign-normalized so the x component is positive (or, for exactly vertical
    axes, the y component is positive), making the ordering deterministic.
    """
    coords = np.array([(p.x, p.y) for p in points], dtype=float)
    centered = coords - coords.mean(axis=0)
    cov = centered.T @ centered
    _, vecs = np.linalg.eigh(cov)
    axis = vecs[:, -1]  # eigenvalues ascending; last column spans the most variance
    if axis[0] < 0 or (axis[0] == 0 and axis[1] < 0):
        axis = -axis
    return float(axis[0]), float(axis[1])


def order_queue(points: list[QueuePoint]) -> list[QueuePoint]:
    """Order people along the queue.

    Sorts by ascending projection onto the principal axis of the point cloud;
    ties break by ascending y, then person_id.
    """
    if not points:
        raise ValueError("order_queue requires at least one point")
    if len(points) == 1:
        return list(points)
    ax, ay = principal_axis(points)
    return sorted(points, key=lambda p: (p.x * ax + p.y * ay, p.y, p.person_id))
