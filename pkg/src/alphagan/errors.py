"""Exception hierarchy shared by every module of the package."""


class AlphaGanError(Exception):
    """Base class for all package errors."""


class DimensionError(AlphaGanError, ValueError):
    """Array lengths or shapes do not line up."""


class NumericOverflowError(AlphaGanError, ArithmeticError):
    """A non-finite intermediate appeared (alpha/D combination outside the stable range)."""


class UnsupportedOrderError(AlphaGanError, ValueError):
    """The requested Renyi order is not defined for this quantity."""


class InvalidInstanceError(AlphaGanError, ValueError):
    """A probability vector or finite GAN instance violates its invariants."""


class StaleCacheError(AlphaGanError, RuntimeError):
    """backward() called with a gradient that does not match the cached forward pass."""


class FormatError(AlphaGanError, ValueError):
    """A file does not follow the expected binary or text layout."""


class TrainingDivergence(NumericOverflowError):
    """Training produced a non-finite loss."""

    def __init__(self, epoch, alpha, detail=""):
        self.epoch = epoch
        self.alpha = alpha
        msg = f"non-finite loss at epoch {epoch} (alpha={alpha})"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
