import csv
import json

import numpy as np
import pytest

from conftest import sequence_json_obj, write_keypoints
from swinglab.cli import main

BALL_HEADER = (
    "swing_id,club_type,distance,carry,lr_distance_out,"
    "direction_angle,spin_axis,ball_speed"
)

FAST_FLAGS = [
    "--epochs", "25", "--batch-size", "64", "--hidden-sizes", "8,4",
]


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.fixture
def synth_dir(tmp_path):
    out = tmp_path / "synth"
    assert main(["synth", "--seed", "7", "--n", "120", "--out-dir", str(out)]) == 0
    return out


class TestExtract:
    def test_single_swing_feature_csv(self, tmp_path):
        kp = write_keypoints(tmp_path / "k.json", [sequence_json_obj("s1")])
        out = tmp_path / "features.csv"
        code = main(["extract", "--keypoints", kp, "--out-features", str(out)])
        assert code == 0
        rows = read_rows(out)
        assert len(rows) == 2  # header + 1 swing
        assert len(rows[0]) == 41  # swing_id + 40 features
        assert rows[0][0] == "swing_id"
        assert rows[1][0] == "s1"

    def test_metric_dump_rows(self, tmp_path):
        kp = write_keypoints(tmp_path / "k.json", [sequence_json_obj("s1")])
        out = tmp_path / "features.csv"
        dump = tmp_path / "metrics.csv"
        main(["extract", "--keypoints", kp, "--out-features", str(out),
              "--out-metrics", str(dump)])
        rows = read_rows(dump)
        assert rows[0] == ["swing_id", "view", "event_index", "metric", "value"]
        assert len(rows) - 1 == 120  # 15 metrics x 8 events

    def test_malformed_json_exit_2(self, tmp_path, capsys):
        bad = tmp_path / "k.json"
        bad.write_text("[{", encoding="utf-8")
        out = tmp_path / "features.csv"
        code = main(["extract", "--keypoints", str(bad), "--out-features", str(out)])
        assert code == 2
        assert "line" in capsys.readouterr().err

    def test_missing_keypoints_file_exit_1(self, tmp_path):
        code = main(["extract", "--keypoints", str(tmp_path / "nope.json"),
                     "--out-features", str(tmp_path / "f.csv")])
        assert code == 1

    def test_missing_ball_file_warns_and_leaves_pairing_empty(self, tmp_path, capsys):
        kp = write_keypoints(tmp_path / "k.json", [sequence_json_obj("s1")])
        out = tmp_path / "features.csv"
        code = main(["extract", "--keypoints", kp, "--balls",
                     str(tmp_path / "missing.csv"), "--out-features", str(out)])
        assert code == 0
        assert "warning" in capsys.readouterr().err.lower()
        rows = read_rows(out)
        assert rows[0][-3:] == ["direction_angle", "spin_axis", "ball_speed"]
        assert rows[1][-3:] == ["", "", ""]

    def test_paired_ball_columns_filled(self, tmp_path):
        kp = write_keypoints(tmp_path / "k.json", [sequence_json_obj("s1")])
        balls = tmp_path / "balls.csv"
        balls.write_text(
            BALL_HEADER + "\ns1,W1,250,240,-12,-3.5,8.2,155\n", encoding="utf-8"
        )
        out = tmp_path / "features.csv"
        assert main(["extract", "--keypoints", kp, "--balls", str(balls),
                     "--out-features", str(out)]) == 0
        rows = read_rows(out)
        assert rows[1][-3:] == ["-3.5", "8.2", "155.0"]

    def test_schema_violation_exit_2(self, tmp_path):
        obj = sequence_json_obj("s1")
        obj["events"]["impact"] = obj["events"]["impact"][:15]
        kp = write_keypoints(tmp_path / "k.json", [obj])
        code = main(["extract", "--keypoints", kp,
                     "--out-features", str(tmp_path / "f.csv")])
        assert code == 2


class TestSynth:
    def test_outputs_exist(self, synth_dir):
        assert (synth_dir / "features.csv").exists()
        assert (synth_dir / "balls.csv").exists()
        assert (synth_dir / "truth.json").exists()
        truth = json.loads((synth_dir / "truth.json").read_text())
        assert truth["seed"] == 7
        assert len(truth["functions"]) == 5

    def test_same_seed_identical_files(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        main(["synth", "--seed", "9", "--n", "60", "--out-dir", str(a)])
        main(["synth", "--seed", "9", "--n", "60", "--out-dir", str(b)])
        for name in ("features.csv", "balls.csv", "truth.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_balls_parse_back(self, synth_dir):
        from swinglab.pose_io import parse_ball_csv

        records = parse_ball_csv(str(synth_dir / "balls.csv"))
        assert len(records) == 120
        directions = [r.direction_angle for r in records]
        assert min(directions) < -6 < 6 < max(directions)


class TestBenchmarkCommand:
    def test_six_row_report(self, synth_dir, tmp_path, capsys):
        out = tmp_path / "report.json"
        code = main([
            "benchmark", "--features", str(synth_dir / "features.csv"),
            "--balls", str(synth_dir / "balls.csv"),
            "--seed", "3", "--out", str(out), *FAST_FLAGS,
        ])
        assert code == 0
        stdout = capsys.readouterr().out
        assert "seed: 3" in stdout
        payload = json.loads(out.read_text())
        assert len(payload["reports"]) == 6
        assert payload["seed"] == 3

    def test_byte_identical_reports_same_seed(self, synth_dir, tmp_path):
        outs = []
        for name in ("r1.json", "r2.json"):
            out = tmp_path / name
            main([
                "benchmark", "--features", str(synth_dir / "features.csv"),
                "--balls", str(synth_dir / "balls.csv"),
                "--seed", "5", "--out", str(out), *FAST_FLAGS,
            ])
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_single_class_skip_notice_exit_0(self, synth_dir, tmp_path, capsys):
        # rewrite every ball as dead straight: binary targets degenerate
        rows = read_rows(synth_dir / "balls.csv")
        for row in rows[1:]:
            row[5] = "0.0"
            row[6] = "0.0"
        straight = tmp_path / "straight.csv"
        with open(straight, "w", newline="") as fh:
            csv.writer(fh).writerows(rows)
        code = main([
            "benchmark", "--features", str(synth_dir / "features.csv"),
            "--balls", str(straight), "--seed", "3", *FAST_FLAGS,
        ])
        assert code == 0
        assert "skipped" in capsys.readouterr().out


class TestTrainExplainFeedback:
    @pytest.fixture
    def model_path(self, synth_dir, tmp_path):
        path = tmp_path / "model.json"
        code = main([
            "train", "--features", str(synth_dir / "features.csv"),
            "--balls", str(synth_dir / "balls.csv"),
            "--target", "speed", "--model", "nam",
            "--out", str(path), "--seed", "3", *FAST_FLAGS,
        ])
        assert code == 0
        return path

    def test_explain_writes_svgs_and_csv(self, synth_dir, tmp_path, model_path):
        out_dir = tmp_path / "curves"
        code = main([
            "explain", "--model", str(model_path),
            "--features", str(synth_dir / "features.csv"),
            "--out-dir", str(out_dir), "--grid-size", "24",
        ])
        assert code == 0
        svgs = sorted(out_dir.glob("*.svg"))
        assert len(svgs) == 5
        assert all(p.name.startswith("speed_") for p in svgs)
        assert (out_dir / "curves.csv").exists()

    def test_feedback_top_k(self, synth_dir, tmp_path, model_path, capsys):
        report_path = tmp_path / "feedback.json"
        code = main([
            "feedback", "--model", str(model_path),
            "--train-features", str(synth_dir / "features.csv"),
            "--swings", str(synth_dir / "features.csv"),
            "--target", "speed", "--top-k", "3",
            "--golfer-id", "g1", "--out", str(report_path),
        ])
        assert code == 0
        payload = json.loads(report_path.read_text())
        assert len(payload["items"]) == 3
        assert payload["golfer_id"] == "g1"
        assert "feedback for golfer g1" in capsys.readouterr().out

    def test_linear_model_refused_by_explain(self, synth_dir, tmp_path):
        path = tmp_path / "lin.json"
        main([
            "train", "--features", str(synth_dir / "features.csv"),
            "--balls", str(synth_dir / "balls.csv"),
            "--target", "speed", "--model", "linear",
            "--out", str(path), "--seed", "3", *FAST_FLAGS,
        ])
        code = main([
            "explain", "--model", str(path),
            "--features", str(synth_dir / "features.csv"),
            "--out-dir", str(tmp_path / "x"),
        ])
        assert code == 2


class TestCompareCommand:
    def test_compare_sessions(self, synth_dir, tmp_path, capsys):
        out = tmp_path / "cmp.json"
        code = main([
            "compare",
            "--before-balls", str(synth_dir / "balls.csv"),
            "--after-balls", str(synth_dir / "balls.csv"),
            "--before-features", str(synth_dir / "features.csv"),
            "--after-features", str(synth_dir / "features.csv"),
            "--out", str(out),
        ])
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["n_before"] == payload["n_after"] == 120
        for item in payload["features"]:
            assert item["shift"] == 0.0


class TestExtractVariants:
    def test_dtl_view_column_count(self, tmp_path):
        kp = write_keypoints(tmp_path / "k.json",
                             [sequence_json_obj("d1", view="DTL")])
        out = tmp_path / "dtl.csv"
        code = main(["extract", "--keypoints", kp, "--view", "DTL",
                     "--out-features", str(out)])
        assert code == 0
        rows = read_rows(out)
        assert len(rows[0]) == 31  # swing_id + 30 DTL features
        assert rows[0][1] == "0-SPINE-ANGLE"

    def test_view_filter_skips_other_view(self, tmp_path):
        objs = [sequence_json_obj("f1"), sequence_json_obj("d1", view="DTL")]
        kp = write_keypoints(tmp_path / "k.json", objs)
        out = tmp_path / "f.csv"
        assert main(["extract", "--keypoints", kp, "--out-features", str(out)]) == 0
        rows = read_rows(out)
        assert [r[0] for r in rows[1:]] == ["f1"]

    def test_mirror_negates_signed_feature(self, tmp_path):
        rng = np.random.default_rng(3)
        obj = sequence_json_obj("m1", jitter=0.05, rng=rng)
        kp = write_keypoints(tmp_path / "k.json", [obj])
        plain, mirrored = tmp_path / "plain.csv", tmp_path / "mirror.csv"
        main(["extract", "--keypoints", kp, "--out-features", str(plain)])
        main(["extract", "--keypoints", kp, "--mirror",
              "--out-features", str(mirrored)])
        rows_p, rows_m = read_rows(plain), read_rows(mirrored)
        col = rows_p[0].index("2-HEAD-LOC")
        value_p = float(rows_p[1][col])
        value_m = float(rows_m[1][col])
        assert value_m == pytest.approx(-value_p, abs=1e-9)
        assert value_p != 0.0
