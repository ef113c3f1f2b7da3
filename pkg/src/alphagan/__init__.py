"""alpha-GAN laboratory: Renyi-order value function, saddle-point checks and a small numpy GAN."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    AlphaGanError,
    DimensionError,
    FormatError,
    InvalidInstanceError,
    NumericOverflowError,
    StaleCacheError,
    TrainingDivergence,
    UnsupportedOrderError,
)
from .renyi import (  # noqa: E402
    DELTA,
    AlphaOrder,
    FiniteDistribution,
    PairedSampleWeights,
    Regime,
    SoftDecision,
    alpha_classification_loss,
    arimoto_conditional_entropy,
    renyi_conditional_cross_entropy,
    value_function,
)
