"""Error taxonomy shared across the package.

Every error carries a stable ``code`` so the CLI can emit machine-parseable
``ERROR <code>: <detail>`` lines without inspecting types.
"""

from __future__ import annotations


class ZooselectError(Exception):
    code = "INTERNAL"

    def __init__(self, detail: str = ""):
        super().__init__(detail)
        self.detail = detail


class ConfigError(ZooselectError):
    code = "CONFIG"


class IoError(ZooselectError):
    code = "IO"


class FormatError(ZooselectError):
    code = "FORMAT"


class RangeError(ZooselectError):
    code = "RANGE"


class NumericError(ZooselectError):
    code = "NUMERIC"


class DuplicateRunError(ZooselectError):
    code = "DUPLICATE_RUN"


class CacheConflictError(ZooselectError):
    # same (model, task, kind) cell written under a different config digest
    code = "CACHE_CONFLICT"


class EmptyPoolError(ZooselectError):
    code = "EMPTY_POOL"


class UnknownModelError(ZooselectError):
    code = "UNKNOWN_MODEL"


class DimensionMismatchError(ZooselectError):
    code = "DIMENSION_MISMATCH"


class EmptySplitError(ZooselectError):
    code = "EMPTY_SPLIT"


class MissingEmbeddingError(ZooselectError):
    code = "MISSING_EMBEDDING"


class MissingScoreError(ZooselectError):
    code = "MISSING_SCORE"


class MissingAccuracyError(ZooselectError):
    code = "MISSING_ACCURACY"


class BudgetTooLargeError(ZooselectError):
    code = "BUDGET_TOO_LARGE"


class LengthMismatchError(ZooselectError):
    code = "LENGTH_MISMATCH"


class UndefinedValueError(ZooselectError):
    code = "UNDEFINED_VALUE"
