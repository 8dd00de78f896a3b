"""End-to-end analysis: ingest -> fit -> CI flags -> spring forces -> Otsu
flags -> colors, and the report/output writing used by the CLI.

Near-vertical queues make the y-on-x fit degenerate; the pipeline retries with
axes swapped and records the swap in the report, keeping the regression math
unchanged. Springs always act in original image coordinates.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from . import render
from .ci import BandSpec, CiFlags, flag_ci_outliers
from .errors import DegenerateGeometryError, InsufficientDataError, InsufficientQueueError
from .ingest import PoseFrame, QueuePoint, hip_midpoints, order_queue, parse_keypoint_file
from .linefit import (
    DirectionVector,
    FittedLine,
    ModelSpec,
    ResidualStats,
    direction_vector,
    fit_line,
    predict,
    residual_stats,
    top_view,
)
from .render import PixelBuffer, StyleConfig, person_colors
from .springs import ForceField, SpringParams, chain_forces
from .threshold import SpringFlags, flag_force_outliers

DIRECTION_MODES = ("endpoints", "regression")


@dataclass(frozen=True)
class Config:
    model: ModelSpec = ModelSpec()
    band: BandSpec = BandSpec()
    spring: SpringParams = SpringParams()
    direction: str = "endpoints"
    style: StyleConfig = StyleConfig()
    conf_threshold: float = 0.5

    def __post_init__(self):
        if self.direction not in DIRECTION_MODES:
            raise ValueError(f"unknown direction mode {self.direction!r}")
        if not 0.0 <= self.conf_threshold <= 1.0:
            raise ValueError(f"conf_threshold must be in [0, 1], got {self.conf_threshold}")

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "Config":
        model = doc.get("model", {})
        band = doc.get("band", {})
        spring = doc.get("spring", {})
        style = doc.get("style", {})
        box = style.get("outlier_box_color")
        return cls(
            model=ModelSpec(
                kind=model.get("kind", "linear"),
                degree=model.get("degree"),
                lam=model.get("lambda"),
            ),
            band=BandSpec(level=band.get("level", 0.95), mode=band.get("mode", "constant")),
            spring=SpringParams(k=spring.get("k", 1.0)),
            direction=doc.get("direction", "endpoints"),
            style=StyleConfig(
                overlay_alpha=style.get("overlay_alpha", 0.45),
                ellipse_scale=style.get("ellipse_scale", 0.35),
                line_width=style.get("line_width", 3),
                outlier_box_color=tuple(box) if box is not None else (255, 0, 0),
            ),
            conf_threshold=doc.get("conf_threshold", 0.5),
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "model": {"kind": self.model.kind, "degree": self.model.degree,
                      "lambda": self.model.lam},
            "band": {"level": self.band.level, "mode": self.band.mode},
            "spring": {"k": self.spring.k},
            "direction": self.direction,
            "style": {
                "overlay_alpha": self.style.overlay_alpha,
                "ellipse_scale": self.style.ellipse_scale,
                "line_width": self.style.line_width,
                "outlier_box_color": list(self.style.outlier_box_color),
            },
            "conf_threshold": self.conf_threshold,
        }


@dataclass
class PipelineResult:
    frame: PoseFrame
    points: list[QueuePoint]          # ordered queue, original coordinates
    fit_points: list[QueuePoint]      # coordinates the fit ran on (maybe swapped)
    axes_swapped: bool
    line: FittedLine
    stats: ResidualStats | None
    ci_flags: CiFlags | None
    e_v: DirectionVector
    field: ForceField
    spring_flags: SpringFlags
    colors: list[render.Rgb]
    projection: list[tuple[float, float]]
    warnings: list[str] = field(default_factory=list)


@dataclass(frozen=True)
class AnalysisReport:
    """Plain-data report; serializes to JSON losslessly and deterministically."""

    source: str
    points: list[dict[str, Any]]
    line: dict[str, Any]
    ci: dict[str, Any]
    spring: dict[str, Any]
    forces: dict[str, Any]
    colors: list[dict[str, Any]]
    warnings: list[str]

    def to_dict(self) -> dict[str, Any]:
        return {
            "source": self.source,
            "points": self.points,
            "line": self.line,
            "ci": self.ci,
            "spring": self.spring,
            "forces": self.forces,
            "colors": self.colors,
            "warnings": self.warnings,
        }

    def to_json(self) -> bytes:
        return (json.dumps(self.to_dict(), indent=2) + "\n").encode("utf-8")

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "AnalysisReport":
        return cls(
            source=doc["source"],
            points=doc["points"],
            line=doc["line"],
            ci=doc["ci"],
            spring=doc["spring"],
            forces=doc["forces"],
            colors=doc["colors"],
            warnings=doc["warnings"],
        )

    @classmethod
    def from_json(cls, raw: bytes) -> "AnalysisReport":
        return cls.from_dict(json.loads(raw))


def _swap(points: list[QueuePoint]) -> list[QueuePoint]:
    return [QueuePoint(p.person_id, p.y, p.x) for p in points]


def _fit_with_swap(points: list[QueuePoint], spec: ModelSpec,
                   warnings: list[str]) -> tuple[FittedLine, list[QueuePoint], bool]:
    try:
        return fit_line(points, spec), points, False
    except DegenerateGeometryError:
        swapped = _swap(points)
        line = fit_line(swapped, spec)
        warnings.append("x values degenerate; axes swapped for the fit")
        return line, swapped, True


def _queue_direction(config: Config, ordered: list[QueuePoint], line: FittedLine,
                     fit_points: list[QueuePoint], axes_swapped: bool,
                     warnings: list[str]) -> DirectionVector:
    if config.direction == "regression":
        x_f, x_l = fit_points[0].x, fit_points[-1].x
        dx, dy = x_l - x_f, predict(line, x_l) - predict(line, x_f)
        if axes_swapped:
            dx, dy = dy, dx
        if dx != 0.0 or dy != 0.0:
            return DirectionVector(dx, dy)
        warnings.append("regression direction degenerate; falling back to queue endpoints")
    try:
        return direction_vector(ordered)
    except DegenerateGeometryError:
        warnings.append("queue endpoints coincide; using horizontal direction")
        return DirectionVector(1.0, 0.0)


def run_analysis(frame: PoseFrame, config: Config,
                 warnings: list[str] | None = None) -> PipelineResult:
    """Run the full computation on one frame (no file output)."""
    warns = warnings if warnings is not None else []

    midpoints = hip_midpoints(frame, config.conf_threshold, warns)
    if len(midpoints) < 2:
        raise InsufficientQueueError(
            f"insufficient queue: need at least 2 people, got {len(midpoints)}"
        )
    ordered = order_queue(midpoints)

    line, fit_points, axes_swapped = _fit_with_swap(ordered, config.model, warns)

    stats: ResidualStats | None
    ci_flags: CiFlags | None
    try:
        stats = residual_stats(line, fit_points)
        ci_flags = flag_ci_outliers(fit_points, line, stats, config.band)
    except InsufficientDataError:
        stats, ci_flags = None, None
        warns.append("confidence band unavailable: need at least 3 people")

    e_v = _queue_direction(config, ordered, line, fit_points, axes_swapped, warns)
    force_field = chain_forces(ordered, e_v, config.spring, warns)
    spring_flags = flag_force_outliers(force_field, warns)
    colors = person_colors(force_field)
    projection = top_view(fit_points, line)

    return PipelineResult(
        frame=frame,
        points=ordered,
        fit_points=fit_points,
        axes_swapped=axes_swapped,
        line=line,
        stats=stats,
        ci_flags=ci_flags,
        e_v=e_v,
        field=force_field,
        spring_flags=spring_flags,
        colors=colors,
        projection=projection,
        warnings=warns,
    )


def build_report(result: PipelineResult, source: str | None = None) -> AnalysisReport:
    line = result.line
    ci = result.ci_flags
    if ci is not None:
        band = {"method": "ci", "level": ci.level, "mode": ci.mode, "outliers": ci.outlier_ids}
    else:
        band = {"method": "ci", "level": None, "mode": None, "outliers": []}
    spring = result.spring_flags
    field = result.field
    return AnalysisReport(
        source=source if source is not None else result.frame.image_path,
        points=[{"person_id": p.person_id, "x": p.x, "y": p.y} for p in result.points],
        line={
            "kind": line.spec.kind,
            "degree": line.spec.degree,
            "lambda": line.spec.lam,
            "coefficients": list(line.coefficients),
            "axes_swapped": result.axes_swapped,
        },
        ci=band,
        spring={
            "method": "spring",
            "otsu_threshold": spring.otsu_threshold,
            "outliers": spring.outlier_ids,
            "scaled_forces": spring.scaled_forces,
        },
        forces={
            "k": field.k,
            "links": [
                {"i": link.i, "d": link.d, "theta": link.theta, "magnitude": link.magnitude}
                for link in field.links
            ],
            "net": [
                {"person_id": pid, "fx": fx, "fy": fy, "magnitude": mag}
                for pid, (fx, fy), mag in zip(field.person_ids, field.net, field.net_magnitude)
            ],
        },
        colors=[
            {"person_id": pid, "rgb": list(rgb)}
            for pid, rgb in zip(field.person_ids, result.colors)
        ],
        warnings=list(result.warnings),
    )


def render_outputs(result: PipelineResult, style: StyleConfig) -> tuple[PixelBuffer, str]:
    """Overlay buffer and top-view SVG for a finished pipeline run."""
    base = render.load_base_image(result.frame.image_path, result.frame.width,
                                  result.frame.height, result.warnings)
    overlay = render.render_overlay(base, result.points, result.field,
                                    result.ci_flags, result.spring_flags, style)
    topview = render.render_topview(result.projection, result.spring_flags)
    return overlay, topview


def analyze(keypoint_path: str | Path, config: Config, out_dir: str | Path) -> AnalysisReport:
    """Full pipeline on one keypoint file: writes report.json, overlay.png, and
    topview.svg under out_dir and returns the report."""
    raw = Path(keypoint_path).read_bytes()
    warnings: list[str] = []
    frame = parse_keypoint_file(raw, warnings)
    result = run_analysis(frame, config, warnings)
    overlay, topview = render_outputs(result, config.style)
    report = build_report(result, source=frame.image_path)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_bytes(report.to_json())
    overlay.to_image().save(out / "overlay.png", format="PNG")
    (out / "topview.svg").write_text(topview, encoding="utf-8")
    return report
