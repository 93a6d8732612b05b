"""Exception taxonomy shared by every ddoscast module."""


class DdoscastError(Exception):
    """Base class for all domain errors raised by this package."""


# --- ingest ---------------------------------------------------------------


class NotJsonError(DdoscastError):
    """Input is neither a JSON array of objects nor NDJSON."""


class SchemaViolationError(DdoscastError):
    """Strict-mode parse abort: first malformed entry, with its location."""

    def __init__(self, location, reason: str):
        self.location = location
        self.reason = reason
        super().__init__(f"entry {location}: {reason}")


class UnknownSubclassError(SchemaViolationError):
    """Strict-mode parse abort on a subclass outside the known taxonomy."""


class EmptyDateRangeError(DdoscastError):
    """Synthetic spec date range is empty (end before start)."""


class AllZeroWeightsError(DdoscastError):
    """Synthetic spec subclass weights are all zero (or negative weights given)."""


# --- preprocess / analytics ----------------------------------------------


class SubclassAbsentError(DdoscastError):
    """Requested subclass never occurs in the aggregate table."""


class EmptyDatasetError(DdoscastError):
    """Operation requires at least one record."""


class YearAbsentError(DdoscastError):
    """Requested comparison year has no records."""


# --- dataset --------------------------------------------------------------


class TooFewValuesError(DdoscastError):
    """Standard deviation needs at least two values."""


class DegenerateSigmaError(DdoscastError):
    """Constant series: sigma is zero, normalization undefined."""


class SeriesTooShortError(DdoscastError):
    """Series shorter than 10 values cannot be split 50/20/30 with all parts non-empty."""


# --- neural ---------------------------------------------------------------


class NonFiniteStateError(DdoscastError):
    """LSTM state overflowed to inf/nan during a step."""


class LengthMismatchError(DdoscastError):
    """Paired vectors (targets/predictions, series/labels) differ in length."""


class EmptyInputError(DdoscastError):
    """Metric over zero points is undefined."""


class CacheMismatchError(DdoscastError):
    """Backward called with a cache that does not match the targets batch."""


class TrainSetEmptyError(DdoscastError):
    """Training split produced no windows."""


class DivergedNonFiniteError(DdoscastError):
    """Training loss became non-finite; aborted with partial history."""

    def __init__(self, message: str, history=None):
        self.history = history
        super().__init__(message)


class EmptySplitError(DdoscastError):
    """Prediction requested over a split with no samples."""


class VersionMismatchError(DdoscastError):
    """Checkpoint was written by an incompatible format version."""


class CorruptCheckpointError(DdoscastError):
    """Checkpoint bytes are truncated or structurally invalid."""


# --- evalgrid -------------------------------------------------------------


class SeriesTooShortForWindowError(DdoscastError):
    """A grid window size does not fit in every split of the series."""

    def __init__(self, window: int, message: str):
        self.window = window
        super().__init__(message)


class EmptyGridError(DdoscastError):
    """Grid result holds no cells."""


# --- chart ----------------------------------------------------------------


class EmptySeriesError(DdoscastError):
    """Chart needs at least one series of at least two points."""
