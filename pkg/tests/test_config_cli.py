import numpy as np
import pytest

from facedet.cli import main
from facedet.config import PipelineConfig, load_config_file
from facedet.netpbm import read_pgm, write_pgm, write_ppm
from facedet.synthetic import SKIN_MIX, face_patch


class TestConfig:
    def test_defaults_are_valid(self):
        config = PipelineConfig()
        assert config.stages == 15
        assert config.target_dr == 0.99
        assert config.base_window == 24

    def test_file_overrides_defaults(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("stages = 5\nscale_factor = 1.5\nequalize = true\n# comment\n")
        config = load_config_file(path)
        assert config.stages == 5
        assert config.scale_factor == 1.5
        assert config.equalize is True

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("stagez = 5\n")
        with pytest.raises(ValueError) as err:
            load_config_file(path)
        assert "stagez" in str(err.value)

    def test_invalid_values_rejected(self):
        with pytest.raises(ValueError):
            PipelineConfig(scale_factor=1.0)
        with pytest.raises(ValueError):
            PipelineConfig(block_weights=(1.0,) * 4)

    def test_block_weights_parse(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("block_weights = 1,1,1,2,2,2,1,1,1\n")
        assert load_config_file(path).block_weights == (1, 1, 1, 2, 2, 2, 1, 1, 1)

    def test_flags_beat_config_file(self, tmp_path, capsys):
        # precedence: defaults < file < flags, observable via --help-run output
        cfg = tmp_path / "run.cfg"
        cfg.write_text("min_area = 7\nsobel_threshold = 50\n")
        blue = np.zeros((40, 40, 3), dtype=np.uint8)
        blue[..., 2] = 200
        img = tmp_path / "b.ppm"
        write_ppm(img, blue)
        from facedet.cli import _build_config
        import argparse

        ns = argparse.Namespace(config=str(cfg), min_area=9, block_weights=None)
        built = _build_config(ns)
        assert built.min_area == 9  # flag wins
        assert built.sobel_threshold == 50  # file wins over default
        assert built.stages == 15  # default survives

    def test_block_weights_flag_parses_nine_values(self):
        from facedet.cli import _build_config
        import argparse

        ns = argparse.Namespace(config=None, block_weights="1,2,3,4,5,6,7,8,9")
        assert _build_config(ns).block_weights == (1, 2, 3, 4, 5, 6, 7, 8, 9)


def skin_disk_image(h=60, w=60, radius=18):
    """Skin-toned disk on an equal-luma blue background: the chroma rule
    sees the disk exactly while the gray image is edge-free."""
    ys, xs = np.indices((h, w))
    disk = (xs - w / 2 + 0.5) ** 2 + (ys - h / 2 + 0.5) ** 2 <= radius**2
    rgb = np.empty((h, w, 3), dtype=np.float64)
    v = 190.0
    background = (129, 129, 235)  # same BT.601 luma as the skin tone below
    for c, mix in enumerate(SKIN_MIX):
        rgb[..., c] = np.where(disk, v * mix, background[c])
    return np.clip(rgb, 0, 255).astype(np.uint8), disk


class TestSegmentCommand:
    def test_disk_ratio_matches_geometry(self, tmp_path, capsys):
        rgb, disk = skin_disk_image()
        img = tmp_path / "disk.ppm"
        out = tmp_path / "mask.pgm"
        write_ppm(img, rgb)
        assert main(["segment", "--in", str(img), "--out", str(out)]) == 0
        printed = capsys.readouterr().out
        ratio = float(printed.split("skin_ratio=")[1].split()[0])
        expected = 100.0 * disk.sum() / disk.size
        assert abs(ratio - expected) <= 2.0
        mask = read_pgm(out)
        assert set(np.unique(mask)) <= {0, 255}

    def test_black_image_gives_zero_ratio(self, tmp_path, capsys):
        img = tmp_path / "black.ppm"
        write_ppm(img, np.zeros((40, 40, 3), dtype=np.uint8))
        assert main(["segment", "--in", str(img), "--out", str(tmp_path / "m.pgm")]) == 0
        assert "skin_ratio=0 " in capsys.readouterr().out

    def test_missing_file_exits_2_and_names_path(self, tmp_path, capsys):
        missing = tmp_path / "nope.ppm"
        code = main(["segment", "--in", str(missing), "--out", str(tmp_path / "m.pgm")])
        assert code == 2
        assert "nope.ppm" in capsys.readouterr().err

    def test_gray_input_rejected(self, tmp_path, capsys):
        img = tmp_path / "g.pgm"
        write_pgm(img, np.zeros((30, 30), dtype=np.uint8))
        assert main(["segment", "--in", str(img), "--out", str(tmp_path / "m.pgm")]) == 2


def build_tiny_corpus(root, rng):
    pos_dir = root / "pos"
    neg_dir = root / "neg"
    pos_dir.mkdir()
    neg_dir.mkdir()
    for i in range(25):
        write_pgm(pos_dir / f"p{i:03d}.pgm", face_patch(rng, 24))
    for i in range(50):
        write_pgm(neg_dir / f"n{i:03d}.pgm", rng.integers(0, 200, size=(24, 24)).astype(np.uint8))
    scene = rng.integers(0, 120, size=(70, 90)).astype(np.uint8)
    scene[20:44, 30:54] = face_patch(rng, 24)
    img = root / "scene.pgm"
    write_pgm(img, scene)
    manifest = root / "test.txt"
    manifest.write_text("scene.pgm 1 30 20 24 24\n")
    return pos_dir, neg_dir, img, manifest


TRAIN_FLAGS = ["--stages", "2", "--feature-subsample", "400", "--max-stumps", "4"]


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    rng = np.random.default_rng(60)
    pos_dir, neg_dir, img, manifest = build_tiny_corpus(root, rng)
    model = root / "cascade.txt"
    svm = root / "svm.txt"
    code = main(
        ["train", "--pos", str(pos_dir), "--neg", str(neg_dir), "--out", str(model),
         "--svm-out", str(svm), "--seed", "1", *TRAIN_FLAGS]
    )
    assert code == 0
    return {"root": root, "pos": pos_dir, "neg": neg_dir, "img": img,
            "manifest": manifest, "model": model, "svm": svm}


class TestTrainDetectEval:
    def test_train_prints_stage_metadata(self, workspace, capsys):
        another = workspace["root"] / "again.txt"
        code = main(
            ["train", "--pos", str(workspace["pos"]), "--neg", str(workspace["neg"]),
             "--out", str(another), "--seed", "1", *TRAIN_FLAGS]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "stage 0: dr=" in out and "fpr=" in out

    def test_same_seed_is_byte_identical(self, workspace):
        again = workspace["root"] / "rep.txt"
        main(["train", "--pos", str(workspace["pos"]), "--neg", str(workspace["neg"]),
              "--out", str(again), "--seed", "1", *TRAIN_FLAGS])
        assert again.read_bytes() == workspace["model"].read_bytes()

    def test_detect_writes_candidates_and_annotation(self, workspace, capsys):
        out = workspace["root"] / "dets.txt"
        ppm = workspace["root"] / "annotated.ppm"
        code = main(
            ["detect", "--cascade", str(workspace["model"]), "--image", str(workspace["img"]),
             "--out", str(out), "--annotate", str(ppm)]
        )
        assert code == 0
        assert "evaluated_windows=" in capsys.readouterr().out
        for line in out.read_text().splitlines():
            fields = line.split()
            assert len(fields) == 5
            int(fields[0]), float(fields[4])
        assert ppm.exists()

    def test_validation_output_is_subset(self, workspace):
        plain = workspace["root"] / "plain.txt"
        validated = workspace["root"] / "validated.txt"
        main(["detect", "--cascade", str(workspace["model"]), "--image", str(workspace["img"]),
              "--svm", str(workspace["svm"]), "--no-validate", "--out", str(plain)])
        main(["detect", "--cascade", str(workspace["model"]), "--image", str(workspace["img"]),
              "--svm", str(workspace["svm"]), "--out", str(validated)])
        plain_lines = plain.read_text().splitlines()
        validated_lines = validated.read_text().splitlines()
        assert set(validated_lines) <= set(plain_lines)

    def test_no_validate_equals_cascade_only(self, workspace):
        a = workspace["root"] / "a.txt"
        b = workspace["root"] / "b.txt"
        main(["detect", "--cascade", str(workspace["model"]), "--image", str(workspace["img"]),
              "--out", str(a)])
        main(["detect", "--cascade", str(workspace["model"]), "--image", str(workspace["img"]),
              "--svm", str(workspace["svm"]), "--no-validate", "--out", str(b)])
        assert a.read_bytes() == b.read_bytes()

    def test_detect_determinism(self, workspace):
        a = workspace["root"] / "d1.txt"
        b = workspace["root"] / "d2.txt"
        for path in (a, b):
            main(["detect", "--cascade", str(workspace["model"]),
                  "--image", str(workspace["img"]), "--out", str(path)])
        assert a.read_bytes() == b.read_bytes()

    def test_skinless_color_image_evaluates_no_windows(self, workspace, capsys):
        blue = np.zeros((60, 60, 3), dtype=np.uint8)
        blue[..., 2] = 200
        img = workspace["root"] / "blue.ppm"
        write_ppm(img, blue)
        out = workspace["root"] / "blue_dets.txt"
        code = main(["detect", "--cascade", str(workspace["model"]), "--image", str(img),
                     "--out", str(out)])
        assert code == 0
        printed = capsys.readouterr().out
        assert "detections=0" in printed
        assert "evaluated_windows=0" in printed
        assert out.read_text() == ""

    def test_image_smaller_than_window_rejected(self, workspace, capsys):
        tiny = workspace["root"] / "tiny.pgm"
        write_pgm(tiny, np.zeros((10, 10), dtype=np.uint8))
        code = main(["detect", "--cascade", str(workspace["model"]), "--image", str(tiny),
                     "--out", str(workspace["root"] / "t.txt")])
        assert code == 2
        assert "smaller" in capsys.readouterr().err

    def test_eval_prints_table_and_roc(self, workspace, capsys):
        roc = workspace["root"] / "roc.csv"
        code = main(
            ["eval", "--cascade", str(workspace["model"]), "--svm", str(workspace["svm"]),
             "--manifest", str(workspace["manifest"]), "--roc", str(roc)]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "Adaboost Cascade" in out
        assert "Cascade + validation" in out
        assert "false_alarm_rate[" in out
        lines = roc.read_text().splitlines()
        assert all(len(l.split(",")) == 3 for l in lines)
        thresholds = [float(l.split(",")[0]) for l in lines]
        assert thresholds == sorted(thresholds)

    def test_eval_csv_variant(self, workspace, capsys):
        code = main(
            ["eval", "--cascade", str(workspace["model"]), "--manifest",
             str(workspace["manifest"]), "--csv"]
        )
        assert code == 0
        assert "method,hits,misses,false_positives,detection_rate" in capsys.readouterr().out

    def test_eval_threads_match_single_thread(self, workspace, capsys):
        args = ["eval", "--cascade", str(workspace["model"]), "--manifest",
                str(workspace["manifest"]), "--csv"]
        main(args)
        single = capsys.readouterr().out
        main(args + ["--threads", "4"])
        threaded = capsys.readouterr().out
        assert single == threaded

    def test_roc_subcommand(self, workspace):
        out = workspace["root"] / "roc2.csv"
        code = main(["roc", "--cascade", str(workspace["model"]), "--svm", str(workspace["svm"]),
                     "--manifest", str(workspace["manifest"]), "--out", str(out)])
        assert code == 0
        assert out.exists()


class TestUsageErrors:
    def test_unknown_flag_exits_1(self, capsys):
        assert main(["detect", "--bogus"]) == 1

    def test_missing_subcommand_exits_1(self, capsys):
        assert main([]) == 1

    def test_help_lists_defaults(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["detect", "--help"])
        assert exc.value.code == 0
        out = capsys.readouterr().out
        for flag in ("--scale-factor", "--min-skin-fraction", "--svm-threshold", "--config"):
            assert flag in out
        assert "default" in out
