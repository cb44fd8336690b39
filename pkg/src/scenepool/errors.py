"""Exception types shared across the package."""


class ScenePoolError(Exception):
    """Base class for package-specific errors."""


class FeatureFileError(ScenePoolError, ValueError):
    """A feature file is malformed or fails validation."""


class ManifestError(ScenePoolError, ValueError):
    """A dataset manifest violates its invariants.

    Carries the full list of violations so callers can report every
    problem at once.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "\n".join(f"  - {v}" for v in self.violations)
        super().__init__(f"manifest validation failed:\n{lines}")


class InsufficientFramesError(ScenePoolError, ValueError):
    """An operation needs more frames than the input provides."""


class RankDeficiencyError(ScenePoolError, ValueError):
    """A projection was requested beyond the rank of the data."""
