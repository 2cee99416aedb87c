"""Error types raised by the extractor, each with a stable code for the CLI."""


class ExtractError(Exception):
    code = "INTERNAL"


class JobError(ExtractError):
    """The job description itself is invalid."""

    code = "CONFIG"


class ModelLoadError(ExtractError):
    """The model reference cannot be resolved to a usable module."""

    code = "MODEL_LOAD"


class DecodeError(ExtractError):
    """An image file exists but cannot be decoded."""

    code = "DECODE"


class SplitTooLarge(ExtractError):
    """Requested split sizes exceed the images available."""

    code = "SPLIT_TOO_LARGE"


class ManifestConflict(ExtractError):
    """A manifest row for this model exists with different fields."""

    code = "MANIFEST_CONFLICT"


class IoError(ExtractError):
    code = "IO"
