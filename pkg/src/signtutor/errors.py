"""Shared exception hierarchy.

Every signtutor-specific failure derives from :class:`SignTutorError` so the
CLI and the HTTP service can separate expected domain errors from bugs.
"""


class SignTutorError(Exception):
    """Base class for all signtutor domain errors."""


class LoadError(SignTutorError):
    """A sequence, model or dataset on disk could not be loaded."""


class ParseError(SignTutorError):
    """A sidecar or delimited file is malformed; message cites the location."""


class DegenerateShapeError(SignTutorError):
    """A binary mask has too few or collinear foreground pixels."""


class DegenerateBoxError(SignTutorError):
    """A face box has zero area."""


class DegenerateTrajectoryError(SignTutorError):
    """All trajectory points coincide; no scale can be derived."""


class TooShortError(SignTutorError):
    """A sequence became empty after trimming."""


class TrackLostError(SignTutorError):
    """A Kalman track was stepped after it had already been declared lost."""


class TrainingError(SignTutorError):
    """Model estimation failed (numerics, empty classes, bad inputs)."""


class LayoutMismatchError(SignTutorError):
    """A feature sequence does not match the layout a model was trained on."""
