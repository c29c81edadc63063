"""Exception types raised across the pipeline.

Everything inherits from :class:`PipelineError` so callers (notably the CLI)
can distinguish data problems from genuine bugs with a single except clause.
"""


class PipelineError(ValueError):
    """Base class for all data and modeling errors raised by this package."""


# --- trajectory parsing -------------------------------------------------

class MalformedRow(PipelineError):
    """CSV row has the wrong column count or an unparseable field."""


class NonMonotonicTime(PipelineError):
    """Elapsed-time column is not strictly increasing."""


class OutOfRange(PipelineError):
    """A field value lies outside its documented range."""


class TooShort(PipelineError):
    """Trajectory has fewer than two points."""


class UnknownBirdInLabels(PipelineError):
    """Labels file references a bird with no trajectory file."""


class MissingLabel(PipelineError):
    """A labeled corpus is missing the label for some bird."""


# --- feature extraction / datasets --------------------------------------

class EmptySeries(PipelineError):
    """Quantile requested on an empty series."""


class EmptyPool(PipelineError):
    """No velocity samples available to pool thresholds from."""


class SchemaMismatch(PipelineError):
    """Two feature matrices (or a model and a matrix) disagree on columns."""


# --- learners ------------------------------------------------------------

class DegenerateLabels(PipelineError):
    """Label vector is empty or contains a single class where two are required."""


class SingleClass(PipelineError):
    """Operation needs both classes present (ranking pairs, threshold tuning)."""


# --- evaluation ----------------------------------------------------------

class TooFewPerClass(PipelineError):
    """Stratified folds need at least k instances of every class."""


class LengthMismatch(PipelineError):
    """Prediction and truth vectors have different lengths."""


class BirdSetMismatch(PipelineError):
    """Prediction sets being voted do not cover identical bird ids."""
