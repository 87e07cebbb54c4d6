"""Exception types shared across the toolkit.

Every error raised by gridcast derives from :class:`GridcastError`, so callers
can catch one base class at pipeline boundaries. Subclasses are grouped by the
subsystem that raises them.
"""


class GridcastError(Exception):
    """Base class for all gridcast errors."""


# --- gridstore: file formats -------------------------------------------------

class MagicMismatch(GridcastError):
    """File does not start with the GSF magic bytes."""


class HeaderParse(GridcastError):
    """GSF header is malformed or holds invalid field values."""


class PayloadTruncated(GridcastError):
    """GSF payload is shorter than the header declares."""

    def __init__(self, expected_bytes: int, found_bytes: int):
        self.expected_bytes = expected_bytes
        self.found_bytes = found_bytes
        super().__init__(
            f"payload truncated: expected {expected_bytes} bytes, found {found_bytes}"
        )


class IoFailure(GridcastError):
    """Underlying OS-level read/write failed."""


class NonUniformTimestep(GridcastError):
    """Series timestamps are not on a supported uniform grid."""


class DuplicateTimestamp(GridcastError):
    """Series contains a repeated timestamp."""


class NonNumericValue(GridcastError):
    """Series value could not be parsed as a finite number."""


# --- ingest ------------------------------------------------------------------

class UnknownSector(GridcastError):
    """Sector name is not one of the supported sectors."""


class NegativeCapacity(GridcastError):
    """Facility row declares a capacity <= 0."""


class OutOfDomain(GridcastError):
    """Facility lies farther than one cell outside the grid."""

    def __init__(self, facility_id: str, lat: float, lon: float):
        self.facility_id = facility_id
        super().__init__(f"facility {facility_id!r} at ({lat}, {lon}) is outside the grid domain")


class AllZeroCapacity(GridcastError):
    """Capacity grid sums to zero; weights are undefined."""


class AxisMismatch(GridcastError):
    """Two gridded objects do not share the same grid/time axes."""


class NaNUnderWeight(GridcastError):
    """Missing weather value at a cell that carries positive weight."""


class MisalignedDay(GridcastError):
    """Hourly series is not aligned to whole UTC days."""


# --- features ----------------------------------------------------------------

class SeriesTooShort(GridcastError):
    """Series is too short for the requested decomposition."""


class WindowOutOfRange(GridcastError):
    """A split window falls outside the dataset's date range."""


class RankDeficient(GridcastError):
    """Matrix rank is lower than the requested decomposition size."""


# --- models ------------------------------------------------------------------

class ViewKindMismatch(GridcastError):
    """Model family is incompatible with the dataset view kind."""


class NonFiniteLoss(GridcastError):
    """Training loss became NaN/inf (typically the learning rate is too high)."""


class SchemaMismatch(GridcastError):
    """Prediction input does not match the schema the model was fitted on."""


class SingularSystem(GridcastError):
    """Penalized least-squares system is singular; raise the penalty."""


# --- crossval / hpo ----------------------------------------------------------

class TooFewSamples(GridcastError):
    """Not enough samples for the requested split scheme."""


class SizeExceedsWindow(GridcastError):
    """Requested dataset size is larger than the available window."""


class IllConditioned(GridcastError):
    """Kernel matrix stayed ill-conditioned after jitter escalation."""


class ObjectiveFailure(GridcastError):
    """Objective evaluation raised; recorded in history, trial skipped."""


# --- evaluation --------------------------------------------------------------

class ZeroTarget(GridcastError):
    """MAPE undefined: target contains (near-)zero values."""


class ConstantTarget(GridcastError):
    """nRMSE/R2 undefined: target has zero range."""


class SingleRow(GridcastError):
    """Permutation importance needs at least two rows."""


class PatchTooLarge(GridcastError):
    """Occlusion patch exceeds the image dimensions."""


# --- cli ---------------------------------------------------------------------

class ConfigError(GridcastError):
    """Experiment configuration failed schema validation."""


class MissingArtifacts(GridcastError):
    """Run directory lacks artifacts needed for reporting."""
