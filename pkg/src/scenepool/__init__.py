"""Video classification by temporal pooling of per-frame deep features.

The pipeline aggregates a video's per-frame feature vectors into a single
descriptor (statistical moments, max pooling, or codebook residual
encoding) and classifies it with one-vs-rest support vector machines
under a leave-one-video-out protocol.
"""

from .aggregation import MomentAccumulator, MomentSet, aggregate, aggregate_combo, l2_normalize
from .errors import (
    FeatureFileError,
    InsufficientFramesError,
    ManifestError,
    RankDeficiencyError,
    ScenePoolError,
)
from .evaluation import (
    EvaluationReport,
    TrialCurve,
    frames_vs_accuracy,
    lovo_evaluate,
    lovo_majority_vote,
    majority_vote_classify,
)
from .featfile import read_feature_file, write_feature_file
from .manifest_io import load_manifest, save_manifest
from .model import (
    MEASURE_ORDER,
    STAT_MEASURES,
    DatasetManifest,
    DescriptorBlock,
    FeatureMatrix,
    LabelSpace,
    VideoDescriptor,
    VideoRecord,
    descriptor_concat,
    validate_manifest,
)
from .sampling import FrameSelection, linspace_indices, random_indices
from .svm import (
    BinarySvmModel,
    OvrSvmModel,
    kernel_eval,
    kernel_matrix,
    predict,
    train_binary,
    train_ovr,
)
from .vlad import (
    Codebook,
    PcaModel,
    VladCode,
    VladModel,
    assign,
    fit_pca,
    fit_vlad_model,
    kmeanspp_fit,
    project,
    vlad_encode,
)

__version__ = "0.1.0"

__all__ = [
    "MEASURE_ORDER",
    "STAT_MEASURES",
    "BinarySvmModel",
    "Codebook",
    "DatasetManifest",
    "DescriptorBlock",
    "EvaluationReport",
    "FeatureFileError",
    "FeatureMatrix",
    "FrameSelection",
    "InsufficientFramesError",
    "LabelSpace",
    "ManifestError",
    "MomentAccumulator",
    "MomentSet",
    "OvrSvmModel",
    "PcaModel",
    "RankDeficiencyError",
    "ScenePoolError",
    "TrialCurve",
    "VideoDescriptor",
    "VideoRecord",
    "VladCode",
    "VladModel",
    "aggregate",
    "aggregate_combo",
    "assign",
    "descriptor_concat",
    "fit_pca",
    "fit_vlad_model",
    "frames_vs_accuracy",
    "kernel_eval",
    "kernel_matrix",
    "kmeanspp_fit",
    "l2_normalize",
    "linspace_indices",
    "load_manifest",
    "lovo_evaluate",
    "lovo_majority_vote",
    "majority_vote_classify",
    "predict",
    "project",
    "random_indices",
    "read_feature_file",
    "save_manifest",
    "train_binary",
    "train_ovr",
    "validate_manifest",
    "vlad_encode",
    "write_feature_file",
]
