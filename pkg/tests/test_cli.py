import json

import numpy as np
import pytest

from scenepool.cli import main
from scenepool.featfile import read_feature_file


@pytest.fixture(scope="module")
def dataset_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("ds")
    rc = main(
        [
            "synth",
            "--out",
            str(root),
            "--mode",
            "variance",
            "--classes",
            "3",
            "--videos-per-class",
            "3",
            "--frames",
            "48",
            "--dim",
            "12",
            "--seed",
            "5",
        ]
    )
    assert rc == 0
    return root


def manifest_arg(dataset_dir):
    return str(dataset_dir / "manifest.json")


class TestSynth:
    def test_layout(self, dataset_dir):
        assert (dataset_dir / "manifest.json").is_file()
        features = sorted((dataset_dir / "features").glob("*.safv"))
        assert len(features) == 9
        mat = read_feature_file(features[0])
        assert mat.rows == 48 and mat.cols == 12

    def test_deterministic_rerun(self, dataset_dir, tmp_path):
        rc = main(
            [
                "synth", "--out", str(tmp_path), "--mode", "variance",
                "--classes", "3", "--videos-per-class", "3",
                "--frames", "48", "--dim", "12", "--seed", "5",
            ]
        )
        assert rc == 0
        assert (tmp_path / "manifest.json").read_bytes() == (dataset_dir / "manifest.json").read_bytes()
        for f in sorted((tmp_path / "features").glob("*.safv")):
            twin = dataset_dir / "features" / f.name
            assert f.read_bytes() == twin.read_bytes()


class TestEvaluateLovo:
    def test_writes_report_files(self, dataset_dir, tmp_path):
        prefix = tmp_path / "rep"
        rc = main(
            [
                "evaluate", "lovo", "--manifest", manifest_arg(dataset_dir),
                "--measures", "sd", "--kernel", "linear", "--report", str(prefix),
            ]
        )
        assert rc == 0
        for suffix in (".json", ".txt", "_confusion.csv", "_confusion.png"):
            assert (tmp_path / f"rep{suffix}").is_file()
        doc = json.loads((tmp_path / "rep.json").read_text())
        assert doc["overall_accuracy"] == 100.0
        assert doc["config"]["measures"] == ["sd"]
        csv = (tmp_path / "rep_confusion.csv").read_text().splitlines()
        assert csv[0].startswith("true\\predicted,")
        assert len(csv) == 4

    def test_byte_identical_reports(self, dataset_dir, tmp_path):
        args = [
            "evaluate", "lovo", "--manifest", manifest_arg(dataset_dir),
            "--measures", "mean,sd", "--kernel", "linear",
        ]
        assert main(args + ["--report", str(tmp_path / "a")]) == 0
        assert main(args + ["--report", str(tmp_path / "b")]) == 0
        for suffix in (".json", ".txt", "_confusion.csv"):
            assert (tmp_path / f"a{suffix}").read_bytes() == (tmp_path / f"b{suffix}").read_bytes()

    def test_hik_with_signed_blocks_warns(self, dataset_dir, tmp_path, capsys):
        rc = main(
            [
                "evaluate", "lovo", "--manifest", manifest_arg(dataset_dir),
                "--measures", "mean,skew", "--kernel", "hik", "--report", str(tmp_path / "w"),
            ]
        )
        assert rc == 0
        captured = capsys.readouterr()
        assert "not recommended" in captured.err
        assert "skew" in captured.err

    def test_kernel_both_writes_two_reports(self, dataset_dir, tmp_path):
        rc = main(
            [
                "evaluate", "lovo", "--manifest", manifest_arg(dataset_dir),
                "--measures", "sd", "--kernel", "both", "--report", str(tmp_path / "r"),
            ]
        )
        assert rc == 0
        assert (tmp_path / "r_linear.json").is_file()
        assert (tmp_path / "r_hik.json").is_file()


class TestAggregateAndTrain:
    def test_aggregate_writes_bundle(self, dataset_dir, tmp_path):
        out = tmp_path / "desc.safb"
        rc = main(
            [
                "aggregate", "--manifest", manifest_arg(dataset_dir),
                "--measures", "mean,sd,max", "--n-frames", "10", "--out", str(out),
            ]
        )
        assert rc == 0
        from scenepool.serialize import load_descriptors

        descs, config = load_descriptors(out)
        assert len(descs) == 9
        assert config["measures"] == ["mean", "sd", "max"]
        assert next(iter(descs.values())).values.size == 36

    def test_train_writes_model(self, dataset_dir, tmp_path):
        out = tmp_path / "model.safb"
        rc = main(
            [
                "train", "--manifest", manifest_arg(dataset_dir),
                "--measures", "sd", "--kernel", "linear", "--c", "1.0", "--out", str(out),
            ]
        )
        assert rc == 0
        from scenepool.serialize import load_ovr_model

        model = load_ovr_model(out)
        assert len(model.models) == 3

    def test_skew_with_one_frame_rejected(self, dataset_dir, tmp_path, capsys):
        rc = main(
            [
                "aggregate", "--manifest", manifest_arg(dataset_dir),
                "--measures", "skew", "--n-frames", "1", "--out", str(tmp_path / "x.safb"),
            ]
        )
        captured = capsys.readouterr()
        assert rc != 0
        assert "insufficient frames for higher moments" in captured.err
        assert captured.out == ""
        assert not (tmp_path / "x.safb").exists()


class TestVladCli:
    def test_fit_then_encode_and_evaluate(self, dataset_dir, tmp_path):
        model_path = tmp_path / "vlad.safb"
        rc = main(
            [
                "vlad", "fit", "--manifest", manifest_arg(dataset_dir),
                "--k", "3", "--d-prime", "4", "--seed", "2", "--out", str(model_path),
            ]
        )
        assert rc == 0
        feature = sorted((dataset_dir / "features").glob("*.safv"))[0]
        code_path = tmp_path / "code.safv"
        rc = main(
            ["vlad", "encode", "--model", str(model_path), "--features", str(feature), "--out", str(code_path)]
        )
        assert rc == 0
        code = read_feature_file(code_path)
        assert code.rows == 1 and code.cols == 12
        rc = main(
            [
                "evaluate", "lovo", "--manifest", manifest_arg(dataset_dir),
                "--measures", "vlad", "--vlad-model", str(model_path),
                "--report", str(tmp_path / "vrep"),
            ]
        )
        assert rc == 0

    def test_vlad_measure_requires_model(self, dataset_dir, tmp_path, capsys):
        rc = main(
            [
                "aggregate", "--manifest", manifest_arg(dataset_dir),
                "--measures", "vlad", "--out", str(tmp_path / "no.safb"),
            ]
        )
        assert rc != 0
        assert "--vlad-model" in capsys.readouterr().err


class TestVoteAndExperiment:
    def test_vote_report(self, dataset_dir, tmp_path):
        rc = main(
            [
                "evaluate", "vote", "--manifest", manifest_arg(dataset_dir),
                "--n-frames", "5", "--report", str(tmp_path / "vote"),
            ]
        )
        assert rc == 0
        doc = json.loads((tmp_path / "vote.json").read_text())
        assert doc["config"]["protocol"] == "lovo-vote"
        assert doc["config"]["n_frames"] == 5

    def test_experiment_frames_curve(self, dataset_dir, tmp_path):
        rc = main(
            [
                "experiment", "frames", "--manifest", manifest_arg(dataset_dir),
                "--n-list", "1,8", "--trials", "3", "--seed", "9",
                "--out", str(tmp_path / "curve"),
            ]
        )
        assert rc == 0
        lines = (tmp_path / "curve.csv").read_text().splitlines()
        assert lines[0] == "n,mean,min,max,std"
        assert len(lines) == 3
        assert (tmp_path / "curve.png").is_file()
        doc = json.loads((tmp_path / "curve.json").read_text())
        assert doc["n_values"] == [1, 8]
        assert doc["trials"] == 3


class TestErrorPaths:
    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == 0
        assert "scenepool" in capsys.readouterr().out

    def test_unknown_flag(self, capsys):
        assert main(["synth", "--bogus"]) != 0

    def test_missing_manifest(self, tmp_path, capsys):
        rc = main(
            ["evaluate", "lovo", "--manifest", str(tmp_path / "nope.json"), "--report", str(tmp_path / "r")]
        )
        assert rc != 0
        assert capsys.readouterr().err.startswith("error:")

    def test_corrupt_feature_file(self, dataset_dir, tmp_path, capsys):
        import shutil

        broken = tmp_path / "broken"
        shutil.copytree(dataset_dir, broken)
        victim = sorted((broken / "features").glob("*.safv"))[0]
        victim.write_bytes(b"XXXX" + victim.read_bytes()[4:])
        rc = main(
            [
                "evaluate", "lovo", "--manifest", str(broken / "manifest.json"),
                "--measures", "mean", "--report", str(tmp_path / "r"),
            ]
        )
        captured = capsys.readouterr()
        assert rc != 0
        assert "bad magic" in captured.err

    def test_manifest_validation_failure(self, dataset_dir, tmp_path, capsys):
        doc = json.loads((dataset_dir / "manifest.json").read_text())
        doc["videos"][0]["feature_file"] = "features/missing.safv"
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(doc))
        # feature paths resolve against the manifest's own directory
        rc = main(
            ["evaluate", "lovo", "--manifest", str(bad), "--measures", "mean", "--report", str(tmp_path / "r")]
        )
        assert rc != 0
        assert "missing feature file" in capsys.readouterr().err
