import numpy as np
import pytest
from PIL import Image

from massimo.ci import BandSpec, flag_ci_outliers
from massimo.ingest import QueuePoint, hip_midpoints, order_queue, parse_keypoint_file
from massimo.linefit import ModelSpec, direction_vector, fit_line, residual_stats, top_view
from massimo.render import (
    PixelBuffer,
    StyleConfig,
    jet_color,
    load_base_image,
    render_overlay,
    render_topview,
)
from massimo.springs import SpringParams, chain_forces
from massimo.threshold import flag_force_outliers


def qpoints(coords):
    return [QueuePoint(i, float(x), float(y)) for i, (x, y) in enumerate(coords)]


def scene(coords):
    pts = qpoints(coords)
    e_v = direction_vector(pts)
    field = chain_forces(pts, e_v, SpringParams())
    spring = flag_force_outliers(field)
    line = fit_line(pts, ModelSpec("linear"))
    stats = residual_stats(line, pts)
    ci = flag_ci_outliers(pts, line, stats, BandSpec())
    return pts, field, ci, spring, line


class TestJetColor:
    def test_endpoints_exact(self):
        assert jet_color(0.0) == (0, 0, 128)
        assert jet_color(1.0) == (128, 0, 0)
        assert jet_color(0.5) == (128, 255, 128)

    def test_out_of_range_clamped(self):
        assert jet_color(-3.0) == jet_color(0.0)
        assert jet_color(42.0) == jet_color(1.0)

    def test_total_on_unit_interval(self):
        for v in np.linspace(0.0, 1.0, 10_000):
            r, g, b = jet_color(float(v))
            assert 0 <= r <= 255 and 0 <= g <= 255 and 0 <= b <= 255

    # the pinned endpoint values jet(1) = (128, 0, 0) and jet(0) = (0, 0, 128)
    # force the classic dark tails, so strict channel monotonicity holds up to
    # the saturation knee at |4v - c| = 0.5, not across the whole half-range
    def test_red_nondecreasing_up_to_saturation(self):
        rising = [jet_color(float(v))[0] for v in np.linspace(0.5, 0.875, 376)]
        assert all(a <= b for a, b in zip(rising, rising[1:]))
        falling = [jet_color(float(v))[0] for v in np.linspace(0.875, 1.0, 126)]
        assert all(a >= b for a, b in zip(falling, falling[1:]))
        assert all(r >= 128 for r in rising + falling)

    def test_blue_nonincreasing_down_to_saturation(self):
        falling = [jet_color(float(v))[2] for v in np.linspace(0.125, 0.5, 376)]
        assert all(a >= b for a, b in zip(falling, falling[1:]))
        rising = [jet_color(float(v))[2] for v in np.linspace(0.0, 0.125, 126)]
        assert all(a <= b for a, b in zip(rising, rising[1:]))
        assert all(b >= 128 for b in rising + falling)

    def test_vectorized_matches_scalar(self):
        from massimo.render import jet_colors

        rng = np.random.default_rng(55)
        values = list(map(float, rng.uniform(-0.2, 1.2, 2000)))
        assert jet_colors(values) == [jet_color(v) for v in values]


class TestPixelBuffer:
    def test_length_invariant(self):
        with pytest.raises(ValueError):
            PixelBuffer(2, 2, b"\x00" * 11)

    def test_image_round_trip(self):
        buf = PixelBuffer.blank(4, 3, (10, 20, 30))
        again = PixelBuffer.from_image(buf.to_image())
        assert again == buf


class TestRenderOverlay:
    BASE = PixelBuffer.blank(400, 200)

    def test_zero_people_identity(self):
        pts, field, ci, spring, _ = scene([(40, 100), (120, 110), (200, 90), (280, 105)])
        empty_field = chain_forces([], direction_vector(pts), SpringParams())
        out = render_overlay(self.BASE, [], empty_field, None, spring, StyleConfig())
        assert out.pixels == self.BASE.pixels

    def test_alpha_zero_identity(self):
        pts, field, ci, spring, _ = scene([(40, 100), (120, 110), (200, 90), (280, 105)])
        out = render_overlay(self.BASE, pts, field, ci, spring, StyleConfig(overlay_alpha=0.0))
        assert out.pixels == self.BASE.pixels

    def test_single_person_blue_ellipse(self):
        pts = qpoints([(200, 100)])
        field = chain_forces(pts, direction_vector(qpoints([(0, 0), (1, 0)])), SpringParams())
        from massimo.threshold import SpringFlags, SpringFlag

        spring = SpringFlags(0.0, (SpringFlag(0, 0.0, False),))
        out = render_overlay(self.BASE, pts, field, None, spring,
                             StyleConfig(overlay_alpha=1.0))
        img = out.to_image()
        assert img.getpixel((200, 100)) == (0, 0, 128)  # jet_color(0) at full alpha
        colors = {c for _, c in img.getcolors(maxcolors=10_000)}
        assert (235, 235, 235) in colors  # untouched background remains

    def test_deterministic(self, data_dir):
        frame = parse_keypoint_file((data_dir / "table3_scene.json").read_bytes())
        pts = order_queue(hip_midpoints(frame))
        _, field, ci, spring, _ = scene([(p.x, p.y) for p in pts])
        base = PixelBuffer.blank(frame.width, frame.height)
        a = render_overlay(base, pts, field, ci, spring, StyleConfig())
        b = render_overlay(base, pts, field, ci, spring, StyleConfig())
        assert a.pixels == b.pixels

    def test_golden_table3(self, data_dir, golden_dir):
        frame = parse_keypoint_file((data_dir / "table3_scene.json").read_bytes())
        pts = order_queue(hip_midpoints(frame))
        _, field, ci, spring, _ = scene([(p.x, p.y) for p in pts])
        base = load_base_image("", frame.width, frame.height)
        out = render_overlay(base, pts, field, ci, spring, StyleConfig())
        golden = PixelBuffer.from_image(Image.open(golden_dir / "table3_overlay.png"))
        assert out.width == golden.width and out.height == golden.height
        assert out.pixels == golden.pixels


class TestRenderTopview:
    def test_offsets_zero_on_axis(self):
        pts, field, ci, spring, line = scene([(i * 50.0, 80.0) for i in range(5)])
        projected = top_view(pts, line)
        svg = render_topview(projected, spring)
        for token in svg.splitlines():
            if token.startswith("<circle"):
                cy = float(token.split('cy="')[1].split('"')[0])
                axis = [t for t in svg.splitlines() if 'stroke="#333333"' in t][0]
                axis_y = float(axis.split('y1="')[1].split('"')[0])
                assert cy == pytest.approx(axis_y, abs=1e-6)

    def test_single_person_centered(self):
        from massimo.threshold import SpringFlags, SpringFlag

        spring = SpringFlags(0.0, (SpringFlag(0, 0.0, False),))
        svg = render_topview([(123.0, -45.0)], spring)
        assert 'cx="0.00" cy="0.00"' in svg

    def test_deterministic_text(self, data_dir):
        frame = parse_keypoint_file((data_dir / "table3_scene.json").read_bytes())
        pts = order_queue(hip_midpoints(frame))
        _, field, ci, spring, line = scene([(p.x, p.y) for p in pts])
        projected = top_view(pts, line)
        assert render_topview(projected, spring) == render_topview(projected, spring)

    def test_bulge_scene_middle_displaced_and_red(self):
        coords = [(0.0, 0.0), (50.0, 40.0), (100.0, 0.0)]
        pts, field, ci, spring, line = scene(coords)
        projected = top_view(pts, line)
        svg = render_topview(projected, spring)
        circles = [t for t in svg.splitlines() if t.startswith("<circle")]
        assert len(circles) == 3
        mid = circles[1]
        assert 'fill="#800000"' in mid  # scaled force 255 -> jet(1)
        axis = [t for t in svg.splitlines() if 'stroke="#333333"' in t][0]
        axis_y = float(axis.split('y1="')[1].split('"')[0])

        def dist_from_axis(circle):
            return abs(float(circle.split('cy="')[1].split('"')[0]) - axis_y)

        assert dist_from_axis(mid) > max(dist_from_axis(circles[0]), dist_from_axis(circles[2]))

    def test_empty_rejected(self):
        from massimo.threshold import SpringFlags

        with pytest.raises(ValueError):
            render_topview([], SpringFlags(0.0, ()))


class TestLoadBaseImage:
    def test_missing_path_blank_canvas(self, tmp_path):
        warnings: list[str] = []
        buf = load_base_image(tmp_path / "nope.jpg", 64, 32, warnings)
        assert (buf.width, buf.height) == (64, 32)
        assert warnings and "blank canvas" in warnings[0]

    def test_empty_path_no_warning(self):
        warnings: list[str] = []
        buf = load_base_image("", 16, 16, warnings)
        assert warnings == []

    def test_real_image_decoded(self, tmp_path):
        img = Image.new("RGB", (20, 10), (1, 2, 3))
        img.save(tmp_path / "base.png")
        buf = load_base_image(tmp_path / "base.png", 20, 10)
        assert buf.pixels[:3] == b"\x01\x02\x03"

    def test_undecodable_raises(self, tmp_path):
        from massimo.errors import RenderError

        bad = tmp_path / "broken.png"
        bad.write_bytes(b"this is not an image")
        with pytest.raises(RenderError):
            load_base_image(bad, 10, 10)
