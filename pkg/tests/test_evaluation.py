import warnings

import numpy as np
import pytest

from scenepool.evaluation import (
    EvaluationReport,
    TrialCurve,
    frames_vs_accuracy,
    lovo_evaluate,
    lovo_majority_vote,
    majority_vote_classify,
)
from scenepool.model import DatasetManifest, FeatureMatrix, LabelSpace, VideoRecord
from scenepool.svm import BinarySvmModel, OvrSvmModel, train_ovr


def tiny_manifest(counts, name="tiny"):
    """counts: videos per class; ids are c{class}v{index}."""
    ls = LabelSpace(tuple(f"class{c}" for c in range(len(counts))))
    videos = []
    for c, n in enumerate(counts):
        for v in range(n):
            videos.append(VideoRecord(f"c{c}v{v}", c, 10))
    return DatasetManifest(name=name, label_space=ls, videos=tuple(videos))


def blob_descriptors(manifest, rng, spread=0.05, gap=100.0):
    centers = {}
    out = {}
    for video in manifest.videos:
        if video.class_id not in centers:
            centers[video.class_id] = rng.normal(0, 1, 8) * gap
        out[video.id] = centers[video.class_id] + rng.normal(0, spread, 8)
    return out


class TestLovoEvaluate:
    def test_separable_is_perfect(self):
        manifest = tiny_manifest([3, 3])
        rng = np.random.default_rng(0)
        descriptors = blob_descriptors(manifest, rng)
        report = lovo_evaluate(manifest, descriptors, "linear", 10.0)
        assert report.overall_accuracy == 100.0
        assert np.array_equal(report.confusion, np.diag([3, 3]))
        assert report.per_class_accuracy == {"class0": 100.0, "class1": 100.0}

    def test_identical_descriptors_collapse_to_tiebreak_class(self):
        # With three or more classes, every one-vs-rest problem on identical
        # descriptors is minority-positive, so all per-class decisions tie
        # and the tie-break class absorbs every prediction.
        manifest = tiny_manifest([2, 2, 2])
        same = np.ones(6)
        descriptors = {v.id: same for v in manifest.videos}
        report = lovo_evaluate(manifest, descriptors, "linear", 1.0)
        columns = report.confusion.sum(axis=0)
        assert columns[0] == 6  # lowest class id wins the tie everywhere
        assert report.overall_accuracy == 100.0 * 2 / 6

    def test_missing_descriptor_named(self):
        manifest = tiny_manifest([2, 2])
        descriptors = {v.id: np.ones(4) for v in manifest.videos[:-1]}
        with pytest.raises(ValueError, match="c1v1"):
            lovo_evaluate(manifest, descriptors, "linear", 1.0)

    def test_single_video_class_warns_but_runs(self):
        manifest = tiny_manifest([3, 1])
        rng = np.random.default_rng(1)
        descriptors = blob_descriptors(manifest, rng)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            report = lovo_evaluate(manifest, descriptors, "linear", 1.0)
        assert any("no training samples" in str(w.message) for w in caught)
        assert report.total == 4

    def test_config_recorded(self):
        manifest = tiny_manifest([2, 2])
        rng = np.random.default_rng(2)
        report = lovo_evaluate(manifest, blob_descriptors(manifest, rng), "hik", 2.0)
        assert report.config["kernel"] == "hik"
        assert report.config["c"] == 2.0
        assert report.config["protocol"] == "lovo"


class TestReportInvariants:
    def test_row_sums_and_trace(self):
        ls = LabelSpace(("a", "b"))
        conf = np.array([[4, 1], [2, 3]])
        report = EvaluationReport(label_space=ls, confusion=conf)
        assert report.total == 10
        assert report.overall_accuracy == 70.0
        assert report.per_class_accuracy == {"a": 80.0, "b": 60.0}

    def test_shape_checked(self):
        with pytest.raises(ValueError):
            EvaluationReport(label_space=LabelSpace(("a", "b")), confusion=np.zeros((3, 3)))

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            EvaluationReport(label_space=LabelSpace(("a", "b")), confusion=np.array([[1, -1], [0, 2]]))


def constant_decision_model(weights_and_biases):
    """1-D linear models with fixed weight/bias so decisions are scripted."""
    sv = np.array([[1.0]])
    models = tuple(
        BinarySvmModel(sv, np.array([1.0]), b, "linear", 1.0, weights=np.array([w]))
        for w, b in weights_and_biases
    )
    ls = LabelSpace(tuple(f"k{i}" for i in range(len(models))))
    return OvrSvmModel(models=models, label_space=ls)


class TestMajorityVote:
    def test_unanimous(self):
        model = constant_decision_model([(0.0, -1.0), (0.0, -2.0), (0.0, 1.0)])
        frames = np.zeros((4, 1))
        assert majority_vote_classify(model, frames) == 2

    def test_strict_majority(self):
        # frame value +1 -> class 0 wins; -1 -> class 1 wins
        model = constant_decision_model([(1.0, 0.0), (-1.0, 0.0)])
        frames = np.array([[1.0], [1.0], [-1.0]])
        assert majority_vote_classify(model, frames) == 0

    def test_tie_broken_by_summed_decision_values(self):
        model = constant_decision_model([(1.0, 0.0), (-1.0, 0.0)])
        # one frame each way; class 0's summed decisions higher (+3-1 vs +1-3)
        frames = np.array([[3.0], [-1.0]])
        assert majority_vote_classify(model, frames) == 0
        frames = np.array([[1.0], [-3.0]])
        assert majority_vote_classify(model, frames) == 1

    def test_tie_then_lowest_class_id(self):
        model = constant_decision_model([(1.0, 0.0), (-1.0, 0.0)])
        frames = np.array([[2.0], [-2.0]])  # symmetric: sums tie at 0
        assert majority_vote_classify(model, frames) == 0

    def test_empty_rejected(self):
        model = constant_decision_model([(1.0, 0.0), (-1.0, 0.0)])
        with pytest.raises(ValueError):
            majority_vote_classify(model, np.zeros((0, 1)))

    def test_agrees_with_direct_mode_when_unique(self):
        rng = np.random.default_rng(11)
        model = constant_decision_model([(1.0, 0.0), (-1.0, 0.0), (0.5, -0.2)])
        for _ in range(50):
            frames = rng.normal(0.0, 2.0, (int(rng.integers(1, 15)), 1))
            preds = np.argmax(model.decision_values(frames), axis=1)
            counts = np.bincount(preds, minlength=3)
            top = np.flatnonzero(counts == counts.max())
            if top.size != 1:
                continue  # tie-break policy is covered separately
            assert majority_vote_classify(model, frames) == int(top[0])


def frame_dataset(rng, counts, frames=8, dim=4, gap=50.0):
    ls = LabelSpace(tuple(f"class{c}" for c in range(len(counts))))
    centers = rng.normal(0, 1, (len(counts), dim)) * gap
    videos = []
    features = {}
    for c, n in enumerate(counts):
        for v in range(n):
            vid = f"c{c}v{v}"
            videos.append(VideoRecord(vid, c, frames))
            features[vid] = FeatureMatrix(centers[c] + rng.normal(0, 0.1, (frames, dim)))
    manifest = DatasetManifest(name="frames", label_space=ls, videos=tuple(videos))
    return manifest, features


class TestLovoMajorityVote:
    def test_separable_frames_are_perfect(self):
        rng = np.random.default_rng(3)
        manifest, features = frame_dataset(rng, [3, 3])
        report = lovo_majority_vote(manifest, features, "linear", 1.0, n_frames=4)
        assert report.overall_accuracy == 100.0

    def test_n_frames_one_uses_center_frame(self):
        rng = np.random.default_rng(4)
        manifest, features = frame_dataset(rng, [3, 3], frames=9)
        report = lovo_majority_vote(manifest, features, "linear", 1.0, n_frames=1)
        assert report.config["n_frames"] == 1
        assert report.total == 6

    def test_missing_features_named(self):
        rng = np.random.default_rng(5)
        manifest, features = frame_dataset(rng, [2, 2])
        del features["c0v1"]
        with pytest.raises(ValueError, match="c0v1"):
            lovo_majority_vote(manifest, features)


class TestFramesVsAccuracy:
    def test_deterministic_and_shaped(self):
        rng = np.random.default_rng(6)
        manifest, features = frame_dataset(rng, [3, 3], frames=12)
        a = frames_vs_accuracy(manifest, features, [1, 4], trials=3, base_seed=5)
        b = frames_vs_accuracy(manifest, features, [1, 4], trials=3, base_seed=5)
        assert np.array_equal(a.accuracies, b.accuracies)
        assert a.accuracies.shape == (2, 3)
        assert a.n_values == (1, 4)

    def test_full_length_selection_has_zero_spread(self):
        rng = np.random.default_rng(7)
        manifest, features = frame_dataset(rng, [3, 3], frames=10)
        curve = frames_vs_accuracy(manifest, features, [10], trials=4, base_seed=0)
        assert curve.spread[0] == 0.0
        assert curve.std[0] == 0.0

    def test_caps_at_video_length(self):
        rng = np.random.default_rng(8)
        manifest, features = frame_dataset(rng, [2, 2], frames=6)
        curve = frames_vs_accuracy(manifest, features, [50], trials=2, base_seed=1)
        assert curve.accuracies.shape == (1, 2)

    def test_empty_n_list_rejected(self):
        rng = np.random.default_rng(9)
        manifest, features = frame_dataset(rng, [2, 2])
        with pytest.raises(ValueError, match="n_list"):
            frames_vs_accuracy(manifest, features, [])


class TestTrialCurve:
    def test_stats(self):
        acc = np.array([[50.0, 70.0, 60.0]])
        curve = TrialCurve(n_values=(5,), accuracies=acc, trials=3, base_seed=0)
        assert curve.mean[0] == 60.0
        assert curve.min[0] == 50.0
        assert curve.max[0] == 70.0
        assert curve.spread[0] == 20.0

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            TrialCurve(n_values=(1, 2), accuracies=np.zeros((2, 3)), trials=4, base_seed=0)
