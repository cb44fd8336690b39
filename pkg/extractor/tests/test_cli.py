import json
import shutil
from pathlib import Path

import pytest

from scenefeat.cli import main

scenepool = pytest.importorskip("scenepool")

TINY_VIDEO = Path(__file__).resolve().parent.parent / "testdata" / "tiny.avi"


@pytest.fixture()
def tree(tmp_path):
    for class_name in ("a", "b"):
        (tmp_path / class_name).mkdir()
        shutil.copy(TINY_VIDEO, tmp_path / class_name / "v.avi")
    return tmp_path


class TestCli:
    def test_fake_extraction_end_to_end(self, tree, tmp_path, capsys):
        out = tmp_path / "out"
        rc = main(
            ["--input", str(tree), "--out", str(out), "--fake", "--n-frames", "6", "--layer", "fc7"]
        )
        assert rc == 0
        assert "manifest.json" in capsys.readouterr().out
        manifest = scenepool.load_manifest(out / "manifest.json")
        scenepool.validate_manifest(manifest, base_dir=out)
        # the pooling pipeline consumes the output directly
        features = {
            v.id: scenepool.read_feature_file(out / v.feature_path) for v in manifest.videos
        }
        desc = scenepool.aggregate_combo(features[manifest.videos[0].id], ["mean", "sd"])
        assert desc.values.size == 8192

    def test_help(self, capsys):
        assert main(["--help"]) == 0
        assert "scenefeat" in capsys.readouterr().out

    def test_missing_input(self, tmp_path, capsys):
        rc = main(["--input", str(tmp_path / "none"), "--out", str(tmp_path / "o"), "--fake"])
        assert rc != 0
        assert "error:" in capsys.readouterr().err

    def test_real_mode_requires_weights(self, tree, tmp_path, capsys):
        rc = main(["--input", str(tree), "--out", str(tmp_path / "o")])
        assert rc != 0
        assert "--fake" in capsys.readouterr().err

    def test_bad_n_frames(self, tree, tmp_path, capsys):
        rc = main(["--input", str(tree), "--out", str(tmp_path / "o"), "--fake", "--n-frames", "x"])
        assert rc != 0
