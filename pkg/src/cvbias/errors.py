"""Exception types raised across the package."""


class CvBiasError(Exception):
    """Base class for all cvbias errors."""


class TooFewTailSamples(CvBiasError, ValueError):
    """Fewer than the minimum tail samples needed for a GPD fit."""


class NonPositiveExceedance(CvBiasError, ValueError):
    """Exceedances passed to the GPD fitter must be strictly positive."""


class TooFewSamples(CvBiasError, ValueError):
    """Sample too small to locate a tail cutoff."""


class TooFewObservations(CvBiasError, ValueError):
    """Not enough observations for the requested estimate."""


class TooFewModels(CvBiasError, ValueError):
    """Not enough models / difference points for the requested operation."""


class ShapeMismatch(CvBiasError, ValueError):
    """Pointwise vectors have incompatible shapes or orderings."""


class EmptyVector(CvBiasError, ValueError):
    """An operation received an empty vector."""


class NonPositiveSigma(CvBiasError, ValueError):
    """Scale parameter must be strictly positive."""


class NonPositiveSE(CvBiasError, ValueError):
    """Standard error must be strictly positive."""


class DimensionMismatch(CvBiasError, ValueError):
    """Predictor vector does not match the fitted dimension."""


class NonFiniteInput(CvBiasError, ValueError):
    """Input data contain NaN or infinite entries."""


class DegenerateWeights(CvBiasError, ValueError):
    """Importance weights could not be normalized."""


class MissingCandidateDiffs(CvBiasError, ValueError):
    """Search path lacks the per-step candidate diffs needed for correction."""


class IncompletePath(CvBiasError, ValueError):
    """Stopping rule requires a search path run to its full size."""


class EmptyCandidateSet(CvBiasError, ValueError):
    """Forward search was asked for more steps than there are predictors."""


class SchemaMismatch(CvBiasError, ValueError):
    """Input table does not match the expected schema."""


class UnreadableInput(CvBiasError, ValueError):
    """Input file could not be read or parsed."""


class ConfigError(CvBiasError, ValueError):
    """Experiment config file is missing or malformed."""


class InvalidBlocking(CvBiasError, ValueError):
    """Predictor count is not compatible with the block structure."""
