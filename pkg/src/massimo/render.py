"""Color-coded outputs: the overlay image (ellipses, links, outlier boxes,
legend) and the top-view SVG.

Determinism is guaranteed at the PixelBuffer level: identical inputs produce
byte-identical RGB buffers. PNG encoding happens only at the CLI boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, ImageDraw, ImageFont, UnidentifiedImageError

from .ci import CiFlags
from .errors import RenderError
from .ingest import QueuePoint
from .springs import ForceField
from .threshold import SpringFlags

Rgb = tuple[int, int, int]

LEGEND_ENTRIES: tuple[tuple[float, str], ...] = (
    (0.0, "blue: aligned"),
    (0.5, "green/yellow: moderate"),
    (1.0, "red: misaligned"),
)

_ELLIPSE_VERTICES = 72
_FALLBACK_ELLIPSE_RADIUS = 40.0  # when a single person leaves no link distances


@dataclass(frozen=True)
class StyleConfig:
    overlay_alpha: float = 0.45
    ellipse_scale: float = 0.35  # semi-major axis as a fraction of median link distance
    line_width: int = 3
    outlier_box_color: Rgb = (255, 0, 0)

    def __post_init__(self):
        if not 0.0 <= self.overlay_alpha <= 1.0:
            raise ValueError(f"overlay_alpha must be in [0, 1], got {self.overlay_alpha}")
        if not self.ellipse_scale > 0:
            raise ValueError(f"ellipse_scale must be > 0, got {self.ellipse_scale}")
        if self.line_width < 1:
            raise ValueError(f"line_width must be >= 1, got {self.line_width}")


@dataclass(frozen=True)
class PixelBuffer:
    """Row-major RGB bytes; the deterministic rendering unit."""

    width: int
    height: int
    pixels: bytes

    def __post_init__(self):
        if len(self.pixels) != self.width * self.height * 3:
            raise ValueError("pixel buffer length must be width * height * 3")

    @classmethod
    def from_image(cls, image: Image.Image) -> "PixelBuffer":
        rgb = image.convert("RGB")
        return cls(rgb.width, rgb.height, rgb.tobytes())

    def to_image(self) -> Image.Image:
        return Image.frombytes("RGB", (self.width, self.height), self.pixels)

    @classmethod
    def blank(cls, width: int, height: int, color: Rgb = (235, 235, 235)) -> "PixelBuffer":
        return cls(width, height, bytes(color) * (width * height))


def load_base_image(path: str | Path, width: int, height: int,
                    warnings: list[str] | None = None) -> PixelBuffer:
    """Decode the frame's image, or fall back to a blank canvas when the path
    does not exist (synthetic scenes have no photograph)."""
    p = Path(path) if path else None
    if p is None or not p.is_file():
        if warnings is not None and path:
            warnings.append(f"base image {path!r} not found; rendering on a blank canvas")
        return PixelBuffer.blank(width, height)
    try:
        with Image.open(p) as img:
            return PixelBuffer.from_image(img)
    except UnidentifiedImageError as exc:
        raise RenderError(f"cannot decode base image {path!r}") from exc


def jet_color(v: float) -> Rgb:
    """Classic piecewise-linear jet: blue (0) through green (0.5) to red (1).

    Channels are 255 * clamp(1.5 - |4v - c|, 0, 1) for c = 3, 2, 1, rounded
    half-up. Out-of-range inputs are clamped first.
    """
    v = min(max(v, 0.0), 1.0)

    def ramp(center: float) -> int:
        value = min(max(1.5 - abs(4.0 * v - center), 0.0), 1.0)
        return int(math.floor(255.0 * value + 0.5))

    return ramp(3.0), ramp(2.0), ramp(1.0)


def _normalize(values: list[float]) -> list[float]:
    lo, hi = min(values), max(values)
    if hi == lo:
        return [0.0 for _ in values]
    return [(v - lo) / (hi - lo) for v in values]


def jet_colors(values: list[float]) -> list[Rgb]:
    """Vectorized jet_color; bit-identical to the scalar mapping."""
    v = np.clip(np.asarray(values, dtype=float), 0.0, 1.0)
    channels = []
    for center in (3.0, 2.0, 1.0):
        ramp = np.clip(1.5 - np.abs(4.0 * v - center), 0.0, 1.0)
        channels.append(np.floor(255.0 * ramp + 0.5).astype(np.int64).tolist())
    return list(zip(*channels))


def person_colors(field: ForceField) -> list[Rgb]:
    """Per-person jet color from min-max normalized net force magnitudes."""
    return jet_colors(_normalize(list(field.net_magnitude)))


def _ellipse_polygon(cx: float, cy: float, a: float, b: float, phi: float) -> list[tuple[float, float]]:
    cos_p, sin_p = math.cos(phi), math.sin(phi)
    pts = []
    for i in range(_ELLIPSE_VERTICES):
        t = 2.0 * math.pi * i / _ELLIPSE_VERTICES
        ex, ey = a * math.cos(t), b * math.sin(t)
        pts.append((cx + ex * cos_p - ey * sin_p, cy + ex * sin_p + ey * cos_p))
    return pts


def _median(values: list[float]) -> float:
    ordered = sorted(values)
    mid = len(ordered) // 2
    if len(ordered) % 2 == 1:
        return ordered[mid]
    return 0.5 * (ordered[mid - 1] + ordered[mid])


def render_overlay(
    base: PixelBuffer,
    points: list[QueuePoint],
    field: ForceField,
    ci: CiFlags | None,
    spring: SpringFlags,
    style: StyleConfig,
) -> PixelBuffer:
    """Draw the force overlay and alpha-composite it onto the base image.

    Order: person ellipses (net-force color), link segments (link-magnitude
    color), red boxes around CI outliers, legend strip. With overlay_alpha = 0
    the output equals the base image byte for byte.
    """
    if not points:
        return base

    base_img = base.to_image().convert("RGBA")
    overlay = Image.new("RGBA", base_img.size, (0, 0, 0, 0))
    draw = ImageDraw.Draw(overlay)

    link_ds = [link.d for link in field.links if link.d > 0]
    semi_major = style.ellipse_scale * (_median(link_ds) if link_ds else _FALLBACK_ELLIPSE_RADIUS)
    semi_minor = 0.5 * semi_major
    phi = math.atan2(field.direction[1], field.direction[0])

    colors = person_colors(field)
    polygons = []
    for p, color in zip(points, colors):
        poly = _ellipse_polygon(p.x, p.y, semi_major, semi_minor, phi)
        polygons.append(poly)
        draw.polygon(poly, fill=color + (255,))

    link_norms = _normalize([link.magnitude for link in field.links]) if field.links else []
    for link, v in zip(field.links, link_norms):
        a, b = points[link.i], points[link.i + 1]
        draw.line([(a.x, a.y), (b.x, b.y)], fill=jet_color(v) + (255,), width=style.line_width)

    if ci is not None:
        outliers = {f.person_id for f in ci.flags if f.is_outlier}
        pad = 2.0
        for p, poly in zip(points, polygons):
            if p.person_id not in outliers:
                continue
            xs = [q[0] for q in poly]
            ys = [q[1] for q in poly]
            box = (min(xs) - pad, min(ys) - pad, max(xs) + pad, max(ys) + pad)
            draw.rectangle(box, outline=style.outlier_box_color + (255,), width=style.line_width)

    _draw_legend(draw)

    alpha_byte = int(math.floor(255.0 * style.overlay_alpha + 0.5))
    scaled_alpha = overlay.getchannel("A").point(lambda a: alpha_byte if a > 0 else 0)
    overlay.putalpha(scaled_alpha)
    merged = Image.alpha_composite(base_img, overlay).convert("RGB")
    return PixelBuffer.from_image(merged)


def _draw_legend(draw: ImageDraw.ImageDraw) -> None:
    font = ImageFont.load_default()
    swatch = 12
    row_h = 18
    width = 210
    draw.rectangle((4, 4, 4 + width, 4 + row_h * len(LEGEND_ENTRIES) + 6), fill=(0, 0, 0, 255))
    for row, (v, label) in enumerate(LEGEND_ENTRIES):
        y = 8 + row * row_h
        draw.rectangle((8, y, 8 + swatch, y + swatch), fill=jet_color(v) + (255,))
        draw.text((8 + swatch + 6, y - 1), label, fill=(255, 255, 255, 255), font=font)


def render_topview(projected: list[tuple[float, float]], spring: SpringFlags) -> str:
    """SVG top view: the queue axis horizontal, one circle per person at
    (along, offset), filled with the jet color of the scaled net force."""
    if not projected:
        raise ValueError("top view requires at least one projected point")

    alongs = [a for a, _ in projected]
    offsets = [o for _, o in projected]
    ca = 0.5 * (min(alongs) + max(alongs))
    co = 0.5 * (min(offsets) + max(offsets))
    xs = [a - ca for a in alongs]
    ys = [o - co for o in offsets]

    view_w, view_h, margin = 800.0, 320.0, 50.0
    span_x = max(max(xs) - min(xs), 1e-9)
    span_y = max(max(ys) - min(ys), 1e-9)
    scale = min((view_w - 2 * margin) / span_x, (view_h - 2 * margin) / span_y, 1e6)

    def fmt(v: float) -> str:
        return f"{v:.2f}"

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{fmt(-view_w / 2)} {fmt(-view_h / 2)} '
        f'{fmt(view_w)} {fmt(view_h)}" width="{int(view_w)}" height="{int(view_h)}">',
        f'<rect x="{fmt(-view_w / 2)}" y="{fmt(-view_h / 2)}" width="{fmt(view_w)}" '
        f'height="{fmt(view_h)}" fill="white"/>',
    ]

    max_off = max(abs(o) for o in offsets)
    if max_off > 0:
        step = 10.0 ** math.floor(math.log10(max_off))
        if max_off / step > 5:
            step *= 5.0
        elif max_off / step > 2:
            step *= 2.0
        k = 1
        while k * step <= max_off + 1e-12:
            for sign in (-1.0, 1.0):
                gy = (sign * k * step - co) * scale
                if abs(gy) <= view_h / 2 - 10:
                    lines.append(
                        f'<line x1="{fmt(-view_w / 2 + 10)}" y1="{fmt(gy)}" '
                        f'x2="{fmt(view_w / 2 - 10)}" y2="{fmt(gy)}" '
                        f'stroke="#dddddd" stroke-width="1"/>'
                    )
                    lines.append(
                        f'<text x="{fmt(-view_w / 2 + 12)}" y="{fmt(gy - 3)}" '
                        f'font-size="10" fill="#888888">{fmt(sign * k * step)}</text>'
                    )
            k += 1

    axis_y = (0.0 - co) * scale
    lines.append(
        f'<line x1="{fmt(-view_w / 2 + 10)}" y1="{fmt(axis_y)}" '
        f'x2="{fmt(view_w / 2 - 10)}" y2="{fmt(axis_y)}" stroke="#333333" stroke-width="2"/>'
    )

    for (x, y, flag) in zip(xs, ys, spring.flags):
        color = jet_color(flag.scaled_force / 255.0)
        fill = f"#{color[0]:02x}{color[1]:02x}{color[2]:02x}"
        lines.append(
            f'<circle cx="{fmt(x * scale)}" cy="{fmt(y * scale)}" r="7" '
            f'fill="{fill}" stroke="black" stroke-width="1"/>'
        )

    lines.append("</svg>")
    return "\n".join(lines) + "\n"
