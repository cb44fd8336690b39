"""Per-frame CNN activation extraction to scenepool feature files."""

from .config import ExtractorConfig
from .featwrite import write_feature_file
from .manifest import extract_tree, extract_video, scan_tree
from .sampling import linspace_indices

__version__ = "0.1.0"

__all__ = [
    "ExtractorConfig",
    "extract_tree",
    "extract_video",
    "linspace_indices",
    "scan_tree",
    "write_feature_file",
]
