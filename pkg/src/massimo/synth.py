"""Synthetic queue scenes with known deviants, plus the detection metrics.

Scenes are reproducible from a 64-bit seed via a splitmix64 stream (documented
in the README so other implementations can regenerate identical scenes):
uniforms take the top 53 bits of each output; each Gaussian consumes two
uniforms through the Box-Muller cosine branch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import UndefinedMetricError
from .ingest import Keypoint, PersonPose, PoseFrame, QueuePoint, COCO_KEYPOINT_COUNT, LEFT_HIP, RIGHT_HIP

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """Deterministic 64-bit stream; the only entropy source for scene synthesis."""

    def __init__(self, seed: int):
        self.state = seed & _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_float(self) -> float:
        """Uniform in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * 2.0 ** -53

    def next_gaussian(self) -> float:
        """Box-Muller cosine branch; u1 is shifted into (0, 1] to keep log finite."""
        u1 = ((self.next_u64() >> 11) + 1) * 2.0 ** -53
        u2 = self.next_float()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


@dataclass(frozen=True)
class SceneSpec:
    n_people: int
    base_line: tuple[float, float] = (0.0, 300.0)  # (slope, intercept)
    spacing: float = 60.0
    noise_sigma: float = 0.0
    deviants: tuple[tuple[int, float], ...] = ()
    seed: int = 0

    def __post_init__(self):
        if self.n_people < 2:
            raise ValueError(f"a queue needs at least 2 people, got {self.n_people}")
        if not self.spacing > 0:
            raise ValueError(f"spacing must be > 0, got {self.spacing}")
        if self.noise_sigma < 0:
            raise ValueError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        indices = [i for i, _ in self.deviants]
        if len(set(indices)) != len(indices):
            raise ValueError("deviant indices must be unique")
        for i in indices:
            if not 0 <= i < self.n_people:
                raise ValueError(f"deviant index {i} out of range 0..{self.n_people - 1}")
        object.__setattr__(self, "deviants", tuple((int(i), float(o)) for i, o in self.deviants))

    @classmethod
    def from_dict(cls, doc: dict) -> "SceneSpec":
        return cls(
            n_people=doc["n_people"],
            base_line=tuple(doc.get("base_line", (0.0, 300.0))),
            spacing=doc.get("spacing", 60.0),
            noise_sigma=doc.get("noise_sigma", 0.0),
            deviants=tuple((int(i), float(o)) for i, o in doc.get("deviants", [])),
            seed=doc.get("seed", 0),
        )

    def to_dict(self) -> dict:
        return {
            "n_people": self.n_people,
            "base_line": list(self.base_line),
            "spacing": self.spacing,
            "noise_sigma": self.noise_sigma,
            "deviants": [[i, o] for i, o in self.deviants],
            "seed": self.seed,
        }


@dataclass(frozen=True)
class EvalResult:
    accuracy_paper: float
    precision: float
    recall: float
    f1: float
    detected: frozenset[int]
    truth: frozenset[int]

    def to_dict(self) -> dict:
        return {
            "accuracy_paper": self.accuracy_paper,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "detected": sorted(self.detected),
            "truth": sorted(self.truth),
        }


def generate_queue(spec: SceneSpec) -> tuple[list[QueuePoint], set[int]]:
    """Points at x = i * spacing on the base line with Gaussian y-noise; deviants
    displaced perpendicular to the line so slope does not change the effective
    deviation. Identical spec (seed included) yields identical points."""
    rng = SplitMix64(spec.seed)
    slope, intercept = spec.base_line
    norm = math.hypot(slope, 1.0)
    perp = (-slope / norm, 1.0 / norm)  # unit normal; positive offset = down-image
    offsets = dict(spec.deviants)

    points = []
    for i in range(spec.n_people):
        x = i * spec.spacing
        y = slope * x + intercept
        if spec.noise_sigma > 0:
            y += spec.noise_sigma * rng.next_gaussian()
        off = offsets.get(i)
        if off is not None:
            x += off * perp[0]
            y += off * perp[1]
        points.append(QueuePoint(i, x, y))
    return points, set(offsets)


def scene_to_frame(points: list[QueuePoint], hip_halfwidth: float = 12.0,
                   confidence: float = 0.9, image_path: str = "") -> PoseFrame:
    """Wrap queue points in the keypoint-file schema: hips straddle each
    midpoint horizontally, all other joints are the undetected sentinel.
    Coordinates are shifted so everything fits inside the synthesized image."""
    margin = 2.0 * hip_halfwidth + 40.0
    min_x = min(p.x for p in points) - margin
    min_y = min(p.y for p in points) - margin
    shift_x = -min_x if min_x < 0 else 0.0
    shift_y = -min_y if min_y < 0 else 0.0
    width = int(math.ceil(max(p.x + shift_x for p in points) + margin))
    height = int(math.ceil(max(p.y + shift_y for p in points) + margin))

    sentinel = Keypoint(0.0, 0.0, 0.0)
    people = []
    for p in points:
        kpts = [sentinel] * COCO_KEYPOINT_COUNT
        kpts[LEFT_HIP] = Keypoint(p.x + shift_x - hip_halfwidth, p.y + shift_y, confidence)
        kpts[RIGHT_HIP] = Keypoint(p.x + shift_x + hip_halfwidth, p.y + shift_y, confidence)
        people.append(PersonPose(p.person_id, tuple(kpts)))
    return PoseFrame(image_path=image_path, width=max(width, 64), height=max(height, 64),
                     people=tuple(people))


def accuracy_paper(detected: set[int], truth: set[int]) -> float:
    """Detected count over ground-truth count, times 100. The ratio counts raw
    detections (no intersection), so values above 100 are possible."""
    if not truth:
        raise UndefinedMetricError("accuracy is undefined with no ground-truth outliers")
    return len(detected) / len(truth) * 100.0


def prf1(detected: set[int], truth: set[int]) -> tuple[float, float, float]:
    """Precision, recall, F1 with the degenerate conventions: precision is 1
    with no detections, recall is 1 with empty truth, F1 is 0 when P + R = 0."""
    tp = len(detected & truth)
    fp = len(detected - truth)
    fn = len(truth - detected)
    precision = tp / (tp + fp) if (tp + fp) > 0 else 1.0
    recall = tp / (tp + fn) if (tp + fn) > 0 else 1.0
    f1 = 2.0 * precision * recall / (precision + recall) if (precision + recall) > 0 else 0.0
    return precision, recall, f1


def evaluate(detected: set[int], truth: set[int]) -> EvalResult:
    p, r, f1 = prf1(detected, truth)
    return EvalResult(
        accuracy_paper=accuracy_paper(detected, truth),
        precision=p,
        recall=r,
        f1=f1,
        detected=frozenset(detected),
        truth=frozenset(truth),
    )
