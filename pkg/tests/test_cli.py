import json

import pytest
from PIL import Image

from massimo.cli import main
from massimo.ingest import parse_keypoint_file
from massimo.pipeline import AnalysisReport, Config, analyze, run_analysis
from massimo.render import PixelBuffer

ONE_PERSON = {
    "image": {"path": "", "width": 640, "height": 480},
    "people": [{"id": 0, "keypoints": [[0.0, 0.0, 0.0]] * 11
                + [[100.0, 200.0, 0.9], [140.0, 200.0, 0.9]]
                + [[0.0, 0.0, 0.0]] * 4}],
}


class TestAnalyzeCommand:
    def test_queue5_report_shape(self, data_dir, tmp_path):
        code = main(["analyze", str(data_dir / "queue5.json"), "--out", str(tmp_path)])
        assert code == 0
        report = json.loads((tmp_path / "report.json").read_text())
        assert len(report["points"]) == 5
        assert len(report["forces"]["links"]) == 4
        assert report["ci"]["method"] == "ci" and report["ci"]["level"] == 0.95
        assert report["spring"]["method"] == "spring"
        assert (tmp_path / "overlay.png").is_file()
        assert (tmp_path / "topview.svg").is_file()

    def test_table3_counts(self, data_dir, tmp_path):
        code = main(["analyze", str(data_dir / "table3_scene.json"), "--out", str(tmp_path)])
        assert code == 0
        report = json.loads((tmp_path / "report.json").read_text())
        assert len(report["ci"]["outliers"]) == 1
        assert len(report["spring"]["outliers"]) == 3

    def test_single_person_exit_2(self, tmp_path):
        src = tmp_path / "one.json"
        src.write_text(json.dumps(ONE_PERSON))
        code = main(["analyze", str(src), "--out", str(tmp_path / "out")])
        assert code == 2

    def test_malformed_exit_1(self, tmp_path):
        src = tmp_path / "bad.json"
        src.write_text('{"image": oops')
        assert main(["analyze", str(src), "--out", str(tmp_path / "out")]) == 1

    def test_missing_file_exit_1(self, tmp_path):
        assert main(["analyze", str(tmp_path / "nope.json"), "--out", str(tmp_path)]) == 1

    def test_validate_only(self, data_dir, tmp_path):
        assert main(["analyze", str(data_dir / "queue5.json"), "--validate-only"]) == 0
        bad = tmp_path / "bad.json"
        bad.write_text("{}")
        assert main(["analyze", str(bad), "--validate-only"]) == 1
        assert not (tmp_path / "out").exists()

    def test_batch_mode_writes_subdirs(self, data_dir, tmp_path):
        code = main(["analyze", str(data_dir / "queue5.json"),
                     str(data_dir / "table3_scene.json"),
                     "--out", str(tmp_path), "--jobs", "2"])
        assert code == 0
        assert (tmp_path / "queue5" / "report.json").is_file()
        assert (tmp_path / "table3_scene" / "report.json").is_file()

    def test_batch_exit_code_prefers_input_error(self, data_dir, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("not json")
        code = main(["analyze", str(data_dir / "queue5.json"), str(bad),
                     "--out", str(tmp_path / "out")])
        assert code == 1


class TestDeterminism:
    def test_reports_and_overlays_identical(self, data_dir, tmp_path):
        config = Config()
        a = tmp_path / "a"
        b = tmp_path / "b"
        analyze(data_dir / "queue5.json", config, a)
        analyze(data_dir / "queue5.json", config, b)
        assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
        buf_a = PixelBuffer.from_image(Image.open(a / "overlay.png"))
        buf_b = PixelBuffer.from_image(Image.open(b / "overlay.png"))
        assert buf_a.pixels == buf_b.pixels
        assert (a / "topview.svg").read_text() == (b / "topview.svg").read_text()


class TestConfigHandling:
    def test_config_file_and_flag_override(self, data_dir, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"band": {"level": 0.99}, "spring": {"k": 2.0}}))
        out = tmp_path / "out"
        code = main(["analyze", str(data_dir / "queue5.json"), "--config", str(cfg),
                     "--level", "0.9", "--out", str(out)])
        assert code == 0
        report = json.loads((out / "report.json").read_text())
        assert report["ci"]["level"] == 0.9      # flag beats file
        assert report["forces"]["k"] == 2.0      # file beats default

    def test_env_var_config(self, data_dir, tmp_path, monkeypatch):
        cfg = tmp_path / "env.json"
        cfg.write_text(json.dumps({"spring": {"k": 5.0}}))
        monkeypatch.setenv("MASSIMO_CONFIG", str(cfg))
        out = tmp_path / "out"
        assert main(["analyze", str(data_dir / "queue5.json"), "--out", str(out)]) == 0
        report = json.loads((out / "report.json").read_text())
        assert report["forces"]["k"] == 5.0

    def test_bad_config_rejected(self, data_dir, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"band": {"level": 2.0}}))
        assert main(["analyze", str(data_dir / "queue5.json"), "--config", str(cfg),
                     "--out", str(tmp_path)]) == 1


class TestFitCommand:
    def test_parabola_exact(self, data_dir, capsys):
        code = main(["fit", str(data_dir / "parabola.json"),
                     "--model", "polynomial", "--degree", "2"])
        assert code == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["kind"] == "polynomial"
        assert doc["coefficients"] == pytest.approx([0.0, 0.0, 1.0], abs=1e-9)
        assert doc["axes_swapped"] is False

    def test_linear_default(self, data_dir, capsys):
        assert main(["fit", str(data_dir / "queue5.json")]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["kind"] == "linear"
        assert len(doc["coefficients"]) == 2


class TestSynthEvalCommands:
    def test_synth_writes_keypoints_and_truth(self, tmp_path):
        out = tmp_path / "scene.json"
        code = main(["synth", "--n", "20", "--deviants", "7:40", "--seed", "1",
                     "--out", str(out)])
        assert code == 0
        frame = parse_keypoint_file(out.read_bytes())
        assert len(frame.people) == 20
        sidecar = json.loads((tmp_path / "scene.json.truth.json").read_text())
        assert sidecar["truth"] == [7]

    def test_eval_deterministic_csv(self, tmp_path):
        args = ["eval", "--seeds", "1..10", "--method", "spring", "--noise", "2.0"]
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        text = out1.read_text()
        assert text == out2.read_text()
        lines = text.strip().splitlines()
        assert lines[0] == "seed,n,method,precision,recall,f1,accuracy_paper"
        assert len(lines) == 11

    def test_eval_both_methods(self, tmp_path):
        out = tmp_path / "both.csv"
        assert main(["eval", "--seeds", "1..5", "--method", "both", "--out", str(out)]) == 0
        lines = out.read_text().strip().splitlines()
        assert len(lines) == 11
        assert any(",ci," in line for line in lines[1:])
        assert any(",spring," in line for line in lines[1:])

    def test_eval_json_emission(self, tmp_path):
        out = tmp_path / "r.csv"
        jout = tmp_path / "r.json"
        assert main(["eval", "--seeds", "1..3", "--method", "spring",
                     "--out", str(out), "--json", str(jout)]) == 0
        records = json.loads(jout.read_text())
        assert len(records) == 3
        for rec in records:
            assert {"seed", "n", "method", "accuracy_paper", "precision",
                    "recall", "f1", "detected", "truth"} <= rec.keys()

    def test_synth_from_spec_json(self, tmp_path):
        spec_file = tmp_path / "spec.json"
        spec_file.write_text(json.dumps({
            "n_people": 9, "base_line": [0.1, 250.0], "spacing": 45.0,
            "noise_sigma": 1.0, "deviants": [[4, 60.0]], "seed": 11,
        }))
        out = tmp_path / "scene.json"
        assert main(["synth", "--spec", str(spec_file), "--out", str(out)]) == 0
        frame = parse_keypoint_file(out.read_bytes())
        assert len(frame.people) == 9
        sidecar = json.loads((tmp_path / "scene.json.truth.json").read_text())
        assert sidecar["truth"] == [4]
        assert sidecar["scene"]["seed"] == 11


class TestRenderCommand:
    def test_writes_images_only(self, data_dir, tmp_path):
        out = tmp_path / "r"
        assert main(["render", str(data_dir / "table3_scene.json"), "--out", str(out)]) == 0
        assert (out / "overlay.png").is_file()
        assert (out / "topview.svg").is_file()
        assert not (out / "report.json").exists()


class TestPipelineBehavior:
    def test_warnings_reach_report(self, tmp_path):
        doc = {
            "image": {"path": "", "width": 640, "height": 480},
            "people": [
                {"id": 0, "keypoints": [[0.0, 0.0, 0.0]] * 11
                 + [[0.0, 0.0, 0.0], [100.0, 200.0, 0.9]] + [[0.0, 0.0, 0.0]] * 4},
                {"id": 1, "keypoints": [[0.0, 0.0, 0.0]] * 11
                 + [[150.0, 210.0, 0.9], [190.0, 210.0, 0.9]] + [[0.0, 0.0, 0.0]] * 4},
                {"id": 2, "keypoints": [[0.0, 0.0, 0.0]] * 11
                 + [[250.0, 220.0, 0.9], [290.0, 220.0, 0.9]] + [[0.0, 0.0, 0.0]] * 4},
            ],
        }
        src = tmp_path / "scene.json"
        src.write_text(json.dumps(doc))
        report = analyze(src, Config(), tmp_path / "out")
        assert any("single-hip fallback" in w for w in report.warnings)

    def test_vertical_queue_swaps_axes(self, tmp_path):
        people = []
        for i in range(5):
            y = 100.0 + 60.0 * i
            people.append({"id": i, "keypoints": [[0.0, 0.0, 0.0]] * 11
                           + [[300.0, y, 0.9], [340.0, y, 0.9]] + [[0.0, 0.0, 0.0]] * 4})
        src = tmp_path / "vertical.json"
        src.write_text(json.dumps({"image": {"path": "", "width": 640, "height": 480},
                                   "people": people}))
        report = analyze(src, Config(), tmp_path / "out")
        doc = report.to_dict()
        assert doc["line"]["axes_swapped"] is True
        assert any("axes swapped" in w for w in doc["warnings"])
        assert len(doc["spring"]["outliers"]) == 0  # perfectly straight queue

    def test_two_people_band_unavailable(self, tmp_path):
        doc = {
            "image": {"path": "", "width": 640, "height": 480},
            "people": [
                {"id": 0, "keypoints": [[0.0, 0.0, 0.0]] * 11
                 + [[100.0, 200.0, 0.9], [140.0, 200.0, 0.9]] + [[0.0, 0.0, 0.0]] * 4},
                {"id": 1, "keypoints": [[0.0, 0.0, 0.0]] * 11
                 + [[200.0, 205.0, 0.9], [240.0, 205.0, 0.9]] + [[0.0, 0.0, 0.0]] * 4},
            ],
        }
        src = tmp_path / "two.json"
        src.write_text(json.dumps(doc))
        report = analyze(src, Config(), tmp_path / "out")
        doc = report.to_dict()
        assert doc["ci"]["outliers"] == [] and doc["ci"]["level"] is None
        assert any("confidence band unavailable" in w for w in doc["warnings"])

    def test_report_round_trip(self, data_dir, tmp_path):
        report = analyze(data_dir / "queue5.json", Config(), tmp_path / "out")
        again = AnalysisReport.from_json(report.to_json())
        assert again == report
        assert again.to_json() == report.to_json()

    def test_flag_ids_exist_in_points(self, data_dir, tmp_path):
        report = analyze(data_dir / "table3_scene.json", Config(), tmp_path / "out")
        doc = report.to_dict()
        ids = {p["person_id"] for p in doc["points"]}
        assert set(doc["ci"]["outliers"]) <= ids
        assert set(doc["spring"]["outliers"]) <= ids

    def test_regression_direction_mode(self, data_dir):
        # the regression axis is tilted by the bulge, so background links pick
        # up small forces; the bulge trio must still be flagged
        frame = parse_keypoint_file((data_dir / "table3_scene.json").read_bytes())
        result = run_analysis(frame, Config(direction="regression"))
        assert {5, 6, 7} <= set(result.spring_flags.outlier_ids)
        assert result.e_v.dy != 0.0  # axis actually differs from the endpoints one
