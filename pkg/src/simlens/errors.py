"""Exception hierarchy shared by every simlens module."""


class SimlensError(Exception):
    """Base class for all simlens errors."""


class BackendLoadError(SimlensError):
    """A backend resource (model graph, tokenizer file) could not be loaded."""


class TokenizerLoadError(BackendLoadError):
    pass


class ModelLoadError(BackendLoadError):
    pass


class AttentionUnavailable(BackendLoadError):
    """The serialized graph does not export attention probabilities."""


class EmptyInput(SimlensError, ValueError):
    pass


class SequenceTooLong(SimlensError, ValueError):
    pass


class DimensionMismatch(SimlensError, ValueError):
    """Backend output shape disagrees with the token count or the declared width."""


class DimMismatch(SimlensError, ValueError):
    """Two embedding matrices have different widths."""


class HeadMismatch(SimlensError, ValueError):
    pass


class ZeroNormEmbedding(SimlensError, ValueError):
    pass


class NaNGradient(SimlensError, FloatingPointError):
    pass


class PerplexityTooLarge(SimlensError, ValueError):
    pass


class TooFewPoints(SimlensError, ValueError):
    pass


class DegenerateInputWarning(UserWarning):
    """All input points coincide; the projection collapses to the origin."""
