#!/usr/bin/env python3
"""Convert an image into the queue-analysis keypoint JSON schema by running an
off-the-shelf pose model.

    pose_adapter.py <image> --out keypoints.json --conf 0.5

The pinned model is torchvision's keypointrcnn_resnet50_fpn with the COCO_V1
checkpoint, which emits the 17-point COCO skeleton this schema expects. Joint
heatmap scores are squashed through a sigmoid to land in [0, 1]; joints below
the confidence threshold are written as the undetected sentinel (0, 0, 0).

Exit codes: 0 success, 1 unreadable image, 3 model unavailable.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

MODEL_NAME = "keypointrcnn_resnet50_fpn"
MODEL_CHECKPOINT = "COCO_V1"
COCO_KEYPOINT_COUNT = 17

EXIT_OK = 0
EXIT_BAD_IMAGE = 1
EXIT_MODEL_UNAVAILABLE = 3


def load_model(device: str):
    """Build the pinned detector. Raises RuntimeError when the checkpoint
    cannot be loaded (offline host without a cached download)."""
    try:
        import torch
        from torchvision.models.detection import (
            KeypointRCNN_ResNet50_FPN_Weights,
            keypointrcnn_resnet50_fpn,
        )
    except ImportError as exc:
        raise RuntimeError(f"torch/torchvision not installed: {exc}") from exc
    try:
        weights = KeypointRCNN_ResNet50_FPN_Weights[MODEL_CHECKPOINT]
        model = keypointrcnn_resnet50_fpn(weights=weights)
    except Exception as exc:  # URLError, file corruption, missing enum
        raise RuntimeError(f"cannot load {MODEL_NAME}/{MODEL_CHECKPOINT}: {exc}") from exc
    model.eval()
    return model.to(torch.device(device))


def predict_keypoints(model, image, device: str) -> list[dict]:
    """Run the detector on an RGB PIL image.

    Returns one dict per detection: {"score": float, "keypoints": [[x, y, vis], ...17],
    "keypoint_scores": [...17]} with raw heatmap scores.
    """
    import torch

    array = torch.frombuffer(bytearray(image.tobytes()), dtype=torch.uint8)
    tensor = array.reshape(image.height, image.width, 3).permute(2, 0, 1).float() / 255.0
    with torch.no_grad():
        output = model([tensor.to(torch.device(device))])[0]
    detections = []
    for score, kpts, kscores in zip(output["scores"].tolist(),
                                    output["keypoints"].tolist(),
                                    output["keypoints_scores"].tolist()):
        detections.append({"score": score, "keypoints": kpts, "keypoint_scores": kscores})
    return detections


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def detections_to_schema(detections: list[dict], image_path: str,
                         width: int, height: int, conf: float) -> dict:
    """Map raw detections onto the keypoint-file schema.

    People below the box-confidence threshold are dropped. Joint confidences
    are sigmoid-squashed heatmap scores; joints below the threshold (or with
    zero visibility) become the undetected sentinel (0, 0, 0).
    """
    people = []
    pid = 0
    for det in detections:
        if det["score"] < conf:
            continue
        joints = []
        for (x, y, vis), kscore in zip(det["keypoints"], det["keypoint_scores"]):
            joint_conf = _sigmoid(kscore)
            if vis <= 0 or joint_conf < conf:
                joints.append([0.0, 0.0, 0.0])
                continue
            joints.append([min(max(float(x), 0.0), float(width)),
                           min(max(float(y), 0.0), float(height)),
                           joint_conf])
        if len(joints) != COCO_KEYPOINT_COUNT:
            continue  # foreign model output; never valid for this schema
        people.append({"id": pid, "keypoints": joints})
        pid += 1
    return {
        "image": {"path": image_path, "width": width, "height": height},
        "people": people,
    }


def extract_poses(image_path: str, out_path: str, conf: float, device: str,
                  predictor=None) -> int:
    """Full adapter run. `predictor` is injectable for tests: a callable
    (image) -> detections replacing the torchvision model."""
    try:
        from PIL import Image, UnidentifiedImageError
    except ImportError as exc:
        print(f"error: Pillow not installed: {exc}", file=sys.stderr)
        return EXIT_MODEL_UNAVAILABLE

    try:
        with Image.open(image_path) as img:
            image = img.convert("RGB")
    except (FileNotFoundError, UnidentifiedImageError, OSError) as exc:
        print(f"error: cannot read image {image_path!r}: {exc}", file=sys.stderr)
        return EXIT_BAD_IMAGE

    if predictor is None:
        try:
            model = load_model(device)
        except RuntimeError as exc:
            print(f"error: {exc}", file=sys.stderr)
            print("hint: the checkpoint downloads from download.pytorch.org on first "
                  "use; run once on a host with network access (or copy the file "
                  "into ~/.cache/torch/hub/checkpoints/) and retry.", file=sys.stderr)
            return EXIT_MODEL_UNAVAILABLE
        detections = predict_keypoints(model, image, device)
    else:
        detections = predictor(image)

    doc = detections_to_schema(detections, image_path, image.width, image.height, conf)
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    print(out)
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("image", help="input photograph")
    parser.add_argument("--out", default="keypoints.json", help="output JSON path")
    parser.add_argument("--conf", type=float, default=0.5,
                        help="confidence threshold for people and joints")
    parser.add_argument("--device", default="cpu")
    args = parser.parse_args(argv)
    if not 0.0 <= args.conf <= 1.0:
        parser.error(f"--conf must be in [0, 1], got {args.conf}")
    return extract_poses(args.image, args.out, args.conf, args.device)


if __name__ == "__main__":
    sys.exit(main())
