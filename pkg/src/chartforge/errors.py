"""Domain exceptions shared across chartforge modules."""


class ChartforgeError(Exception):
    """Base class for all chartforge errors."""


# --- tabular input ---------------------------------------------------------

class MalformedInput(ChartforgeError):
    """Input bytes could not be parsed as the declared format."""


class EmptyTable(ChartforgeError):
    """Parsed table has no data rows."""


class NoNumericColumn(ChartforgeError):
    """Table contains no column where every non-empty cell is numeric."""


class ColumnMissing(ChartforgeError):
    """Chart spec references a column absent from the table."""


class NegativePieValue(ChartforgeError):
    """Pie charts require non-negative values."""


# --- masks and augmentation ------------------------------------------------

class IncompatibleVariant(ChartforgeError):
    """Mask variant is not defined for the chart type."""


class IntegrityViolated(ChartforgeError):
    """Augmentation moved marks beyond the data-integrity guard."""


class EmptyMask(ChartforgeError):
    """Chart mask contains no set pixels."""


# --- embeddings and keyword retrieval --------------------------------------

class MalformedLine(ChartforgeError):
    """Embedding file line does not match the word/vector/frequency layout."""


class DimensionMismatch(ChartforgeError):
    """Vector or matrix dimensions disagree."""


class UnknownWord(ChartforgeError):
    """Query word is not in the embedding table."""


class ProviderUnavailable(ChartforgeError):
    """External keyword/segmentation provider could not be reached."""


# --- attention / extraction -------------------------------------------------

class NonSquareImage(ChartforgeError):
    """Operation requires a square image."""


# --- generation backend -----------------------------------------------------

class BackendUnreachable(ChartforgeError):
    """Generation backend endpoint refused or failed the request."""


class BackendTimeout(ChartforgeError):
    """Generation backend did not answer within the configured timeout."""


class MissingAttention(ChartforgeError):
    """Backend response lacks an attention grid for the object token."""


# --- modification -----------------------------------------------------------

class TooShort(ChartforgeError):
    """Element is shorter than the requested slice count."""


class SizeMismatch(ChartforgeError):
    """Images or slices have incompatible sizes."""


# --- evaluation --------------------------------------------------------------

class EmptyForeground(ChartforgeError):
    """No foreground pixels found to evaluate."""


class NoEdgesFound(ChartforgeError):
    """Edge detection produced no edges inside the chart mask region."""


class MarkNotFound(ChartforgeError):
    """A chart mark has no opaque pixels in its neighborhood."""


# --- service -----------------------------------------------------------------

class ProjectNotFound(ChartforgeError):
    """No project with the given id."""


class AssetNotFound(ChartforgeError):
    """No asset with the given id."""


class UnsupportedChartType(ChartforgeError):
    """Operation does not apply to this chart type."""


class InvalidPlan(ChartforgeError):
    """Replication plan is inconsistent (e.g. target taller than source)."""


class NoLayers(ChartforgeError):
    """Project canvas has no visible layers to operate on."""


class UnsupportedFormat(ChartforgeError):
    """Unknown export or import format."""
