import struct

import numpy as np
import pytest

from scenepool.errors import FeatureFileError
from scenepool.featfile import (
    FLAG_POST_RELU,
    MAGIC,
    VERSION,
    feature_bytes,
    parse_feature_bytes,
    read_bundle,
    read_feature_file,
    write_bundle,
    write_feature_file,
)
from scenepool.model import FeatureMatrix


def header(magic=MAGIC, version=VERSION, rows=1, cols=1, flags=0):
    return struct.pack("<4sIIII", magic, version, rows, cols, flags)


class TestRoundTrip:
    def test_random_matrices(self, tmp_path):
        rng = np.random.default_rng(0)
        for i in range(50):
            rows = int(rng.integers(1, 64))
            cols = int(rng.integers(1, 128))
            mat = FeatureMatrix(rng.normal(size=(rows, cols)).astype(np.float32))
            path = tmp_path / f"m{i}.safv"
            write_feature_file(path, mat)
            back = read_feature_file(path)
            assert np.array_equal(back.values, mat.values)
            assert back.post_relu == mat.post_relu

    def test_post_relu_flag_round_trips(self, tmp_path):
        mat = FeatureMatrix(np.abs(np.random.default_rng(1).normal(size=(3, 4))), post_relu=True)
        write_feature_file(tmp_path / "f.safv", mat)
        assert read_feature_file(tmp_path / "f.safv").post_relu

    def test_1x1_file_size(self, tmp_path):
        write_feature_file(tmp_path / "one.safv", FeatureMatrix(np.zeros((1, 1))))
        assert (tmp_path / "one.safv").stat().st_size == 24  # 20-byte header + 4-byte payload

    def test_deterministic_bytes(self):
        mat = FeatureMatrix(np.random.default_rng(2).normal(size=(5, 7)).astype(np.float32))
        assert feature_bytes(mat) == feature_bytes(mat)


class TestRejections:
    def test_wrong_magic(self):
        buf = header(magic=b"XXXX") + b"\x00" * 4
        with pytest.raises(FeatureFileError, match="bad magic"):
            parse_feature_bytes(buf)

    def test_wrong_version(self):
        buf = header(version=2) + b"\x00" * 4
        with pytest.raises(FeatureFileError, match="version"):
            parse_feature_bytes(buf)

    def test_truncated_payload_reports_needed_bytes(self):
        buf = header(rows=2, cols=3) + b"\x00" * 20
        with pytest.raises(FeatureFileError, match="needs exactly 24"):
            parse_feature_bytes(buf)

    def test_trailing_bytes_rejected(self):
        buf = header(rows=1, cols=1) + b"\x00" * 8
        with pytest.raises(FeatureFileError, match="payload"):
            parse_feature_bytes(buf)

    def test_truncated_header(self):
        with pytest.raises(FeatureFileError, match="truncated header"):
            parse_feature_bytes(b"SAFV\x01")

    def test_nan_payload_rejected(self):
        payload = struct.pack("<f", float("nan"))
        with pytest.raises(FeatureFileError, match="non-finite"):
            parse_feature_bytes(header() + payload)

    def test_zero_rows_rejected(self):
        with pytest.raises(FeatureFileError, match="empty"):
            parse_feature_bytes(header(rows=0, cols=3))

    def test_negative_with_post_relu_flag_rejected(self):
        payload = struct.pack("<f", -1.0)
        with pytest.raises(FeatureFileError, match="negative"):
            parse_feature_bytes(header(flags=FLAG_POST_RELU) + payload)

    def test_nan_matrix_refused_before_write(self, tmp_path):
        target = tmp_path / "never.safv"
        with pytest.raises(ValueError):
            write_feature_file(target, np.array([[np.nan]], dtype=np.float32))
        assert not target.exists()


class TestBundle:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(3)
        mats = {
            "a": rng.normal(size=(4, 6)),
            "b": rng.normal(size=(1, 3)).astype(np.float32),
        }
        meta = {"kind": "test", "alpha": 1.5, "names": ["x", "y"]}
        path = tmp_path / "bundle.safb"
        write_bundle(path, meta, mats)
        got_meta, got = read_bundle(path)
        assert got_meta["kind"] == "test" and got_meta["alpha"] == 1.5
        assert got["a"].dtype == np.float64
        assert got["b"].dtype == np.float32
        assert np.array_equal(got["a"], mats["a"])
        assert np.array_equal(got["b"], mats["b"])

    def test_float64_precision_preserved(self, tmp_path):
        vals = np.array([[1.0 / 3.0, np.pi]])
        write_bundle(tmp_path / "p.safb", {}, {"v": vals})
        _, got = read_bundle(tmp_path / "p.safb")
        assert np.array_equal(got["v"], vals)

    def test_reserved_key(self, tmp_path):
        with pytest.raises(ValueError):
            write_bundle(tmp_path / "x.safb", {"matrices": []}, {})

    def test_bad_magic(self, tmp_path):
        (tmp_path / "junk.safb").write_bytes(b"NOPE" + b"\x00" * 20)
        with pytest.raises(FeatureFileError, match="bad magic"):
            read_bundle(tmp_path / "junk.safb")

    def test_truncated_matrix(self, tmp_path):
        path = tmp_path / "t.safb"
        write_bundle(path, {}, {"v": np.ones((2, 2))})
        data = path.read_bytes()
        path.write_bytes(data[:-8])
        with pytest.raises(FeatureFileError, match="truncated"):
            read_bundle(path)

    def test_trailing_garbage(self, tmp_path):
        path = tmp_path / "g.safb"
        write_bundle(path, {}, {"v": np.ones((1, 1))})
        path.write_bytes(path.read_bytes() + b"zz")
        with pytest.raises(FeatureFileError, match="trailing"):
            read_bundle(path)
