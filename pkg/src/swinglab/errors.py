"""Exception hierarchy shared across the package.

Every swinglab-specific failure derives from SwingLabError so callers (and
the CLI exit-code mapping) can distinguish our errors from generic ones.
"""


class SwingLabError(Exception):
    """Base class for all swinglab errors."""


# --- input / validation errors ---------------------------------------------

class MalformedFile(SwingLabError):
    """File cannot be parsed at all (bad JSON/CSV syntax, wrong header)."""


class SchemaViolation(SwingLabError):
    """Parsed content violates the keypoint schema (counts, ranges, fields)."""


class DuplicateSwingId(SwingLabError):
    """The same swing_id appears more than once in one file."""


class UnknownClubType(SwingLabError):
    """Ball record names a club outside the supported set."""


class InvariantViolation(SwingLabError):
    """A domain invariant does not hold (e.g. carry > distance)."""


class EmptyDataset(SwingLabError):
    """An operation that needs data received none."""


class MissingMetric(SwingLabError):
    """Feature assembly could not find a required (metric, event) value."""


# --- geometric degeneracies --------------------------------------------------

class DegenerateBBox(SwingLabError):
    """Bounding box has non-positive width."""


class DegenerateAngle(SwingLabError):
    """Vertex angle requested with a zero-length ray."""


class DegenerateSegment(SwingLabError):
    """Segment angle requested for two coincident points."""


class DegenerateStride(SwingLabError):
    """Ankle separation at Address is zero; ratio metrics are undefined."""


# --- numeric / model errors --------------------------------------------------

class SingularSystem(SwingLabError):
    """Unregularized least squares on a rank-deficient design matrix."""


class NonFiniteLoss(SwingLabError):
    """Training loss became NaN/inf (divergence)."""

    def __init__(self, message: str, epoch: int | None = None):
        super().__init__(message)
        self.epoch = epoch


class DimensionMismatch(SwingLabError):
    """Input vector length does not match the model's feature count."""


class LengthMismatch(SwingLabError):
    """Two parallel sequences differ in length."""


class ZeroVariance(SwingLabError):
    """Correlation requested for a constant sequence."""


class DegenerateLabels(SwingLabError):
    """Binary evaluation requested with a single class present."""


class IndexOutOfRange(SwingLabError):
    """Feature index outside the model's range."""


class NoFeasibleRegion(SwingLabError):
    """Density floor excludes every grid point of a shape curve."""


# --- persistence ------------------------------------------------------------

class VersionMismatch(SwingLabError):
    """Model file carries an unsupported version tag."""


class CorruptFile(SwingLabError):
    """Model file is truncated or structurally invalid."""
