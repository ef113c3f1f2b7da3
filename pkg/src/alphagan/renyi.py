"""Renyi-order value function of the alpha-GAN and the information measures around it.

All quantities use natural logarithms. Power terms are evaluated in the log
domain so that small orders (large negative exponents) do not overflow.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.special import entr, logsumexp

from .errors import DimensionError, InvalidInstanceError, NumericOverflowError, UnsupportedOrderError

#: Clamp bound applied to every soft decision before taking logs.
DELTA = 1e-7
#: Half-width of the window around alpha = 1 evaluated with the Shannon limit.
NEAR_ONE_EPS = 1e-6
#: Orders at or above this value use the alpha = infinity expressions.
INFINITE_ALPHA = 1e8

_SUM_TOL = 1e-12


class Regime(enum.Enum):
    ZERO = "zero"
    NEAR_ONE = "near_one"
    FINITE = "finite"
    INFINITE = "infinite"


@dataclass(frozen=True)
class AlphaOrder:
    """A validated Renyi order together with its evaluation regime."""

    value: float

    def __post_init__(self):
        v = float(self.value)
        if np.isnan(v) or v < 0:
            raise UnsupportedOrderError(f"Renyi order must be a non-negative number, got {self.value!r}")
        object.__setattr__(self, "value", v)

    @classmethod
    def of(cls, alpha) -> "AlphaOrder":
        return alpha if isinstance(alpha, cls) else cls(alpha)

    @property
    def regime(self) -> Regime:
        v = self.value
        if v == 0:
            return Regime.ZERO
        if v >= INFINITE_ALPHA:
            return Regime.INFINITE
        if abs(v - 1.0) < NEAR_ONE_EPS:
            return Regime.NEAR_ONE
        return Regime.FINITE

    @property
    def exponent(self) -> float:
        """The power-mean order (alpha - 1) / alpha."""
        if self.value == 0:
            return -np.inf
        if np.isinf(self.value):
            return 1.0
        return (self.value - 1.0) / self.value

    def __float__(self):
        return self.value


@dataclass(frozen=True)
class FiniteDistribution:
    """Probability vector over a finite alphabet."""

    probs: np.ndarray

    def __post_init__(self):
        p = np.array(self.probs, dtype=float).reshape(-1)
        if p.size == 0:
            raise InvalidInstanceError("empty distribution")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise InvalidInstanceError(f"probabilities must be finite and non-negative: {p}")
        if abs(p.sum() - 1.0) > _SUM_TOL:
            raise InvalidInstanceError(f"probabilities sum to {p.sum()!r}, not 1")
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @classmethod
    def normalized(cls, weights) -> "FiniteDistribution":
        w = np.asarray(weights, dtype=float)
        return cls(w / w.sum())

    def __len__(self):
        return self.probs.size

    def __array__(self, dtype=None, copy=None):
        return self.probs if dtype is None else self.probs.astype(dtype)


@dataclass
class SoftDecision:
    """Discriminator outputs D(x), clamped to [delta, 1 - delta]."""

    values: np.ndarray
    delta: float = DELTA

    def __post_init__(self):
        if not 0 < self.delta < 0.01:
            raise ValueError(f"clamp bound must lie in (0, 0.01), got {self.delta}")
        v = np.asarray(self.values, dtype=float)
        if np.any(np.isnan(v)):
            raise NumericOverflowError("soft decision contains NaN")
        self.values = np.clip(v, self.delta, 1.0 - self.delta)

    def __len__(self):
        return self.values.shape[-1]

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


@dataclass(frozen=True)
class PairedSampleWeights:
    """Per-sample probabilities under the real and generated distributions."""

    pr: np.ndarray
    pg: np.ndarray
    real_chance: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        pr = np.array(self.pr, dtype=float).reshape(-1)
        pg = np.array(self.pg, dtype=float).reshape(-1)
        if pr.shape != pg.shape:
            raise DimensionError(f"pr has {pr.size} entries but pg has {pg.size}")
        if np.any(pr < 0) or np.any(pg < 0) or not (np.all(np.isfinite(pr)) and np.all(np.isfinite(pg))):
            raise InvalidInstanceError("sample weights must be finite and non-negative")
        if np.any(pr + pg <= 0):
            raise InvalidInstanceError("every sample needs pr + pg > 0")
        object.__setattr__(self, "pr", pr)
        object.__setattr__(self, "pg", pg)
        object.__setattr__(self, "real_chance", pr / (pr + pg))

    @property
    def fake_chance(self) -> np.ndarray:
        # computed from pg directly so that pg = 0 gives an exact zero
        return self.pg / (self.pr + self.pg)

    def __len__(self):
        return self.pr.size


def fractional_chances(pr, pg) -> tuple[np.ndarray, np.ndarray]:
    """Posterior probabilities P('r'|x), P('g'|x) = pr/(pr+pg), pg/(pr+pg)."""
    w = PairedSampleWeights(pr, pg)
    return w.real_chance, w.fake_chance


def _as_weights(w) -> PairedSampleWeights:
    if isinstance(w, PairedSampleWeights):
        return w
    pr, pg = w
    return PairedSampleWeights(pr, pg)


def _as_decisions(d) -> np.ndarray:
    if isinstance(d, SoftDecision):
        return d.values
    return SoftDecision(d).values


def _finite_or_raise(value, what, alpha):
    if not np.all(np.isfinite(value)):
        raise NumericOverflowError(f"{what} is not finite at alpha={alpha.value}")
    return value


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def value_function(alpha, w, d):
    """Evaluate the alpha-GAN value function V_alpha(D, P_g).

    Parameters
    ----------
    alpha : float or AlphaOrder
        Renyi order in [0, inf].
    w : PairedSampleWeights or (pr, pg)
        Probability of each presented sample under the real and the
        generated distribution. Only the fractional chances matter.
    d : SoftDecision or array-like, shape (..., N)
        Discriminator outputs. Leading axes are treated as a batch of
        independent decision vectors; raw arrays are clamped to
        ``[DELTA, 1 - DELTA]``.

    Returns
    -------
    float or ndarray
        ``alpha/(alpha-1) * log mean_x [w_r D^p + w_g (1-D)^p]`` with
        ``p = (alpha-1)/alpha``, the binary cross-entropy form near
        alpha = 1, the log mean 0-1 gain at alpha = inf and
        ``log min_x min(D, 1-D)`` at alpha = 0.
    """
    alpha = AlphaOrder.of(alpha)
    w = _as_weights(w)
    d = _as_decisions(d)
    if d.shape[-1] != len(w):
        raise DimensionError(f"{d.shape[-1]} decisions for {len(w)} samples")
    wr, wg = w.real_chance, w.fake_chance
    regime = alpha.regime

    if regime is Regime.ZERO:
        out = np.log(np.minimum(d, 1.0 - d).min(axis=-1))
    elif regime is Regime.INFINITE:
        out = np.log(np.mean(wr * d + wg * (1.0 - d), axis=-1))
    elif regime is Regime.NEAR_ONE:
        out = np.mean(wr * np.log(d) + wg * np.log1p(-d), axis=-1)
    else:
        p = alpha.exponent
        out = _log_power_mean(p, wr, wg, np.log(d), np.log1p(-d)) / p
    return _scalar(_finite_or_raise(out, "value function", alpha))


def _log_power_mean(p, wr, wg, log_a, log_b):
    """log mean_x (wr a^p + wg b^p) over the last axis, with wr + wg = 1."""
    n = log_a.shape[-1]
    scale = abs(p) * max(np.max(np.abs(log_a)), np.max(np.abs(log_b)))
    if scale < 0.5:
        # near p = 0 the mean is 1 + O(p); expm1/log1p keep the O(p) part exact
        s = np.mean(wr * np.expm1(p * log_a) + wg * np.expm1(p * log_b), axis=-1)
        return np.log1p(s)
    # weighted log-sum-exp; zero-weight terms are masked so they cannot set the shift
    ta = np.where(wr > 0, p * log_a, -np.inf)
    tb = np.where(wg > 0, p * log_b, -np.inf)
    shift = np.maximum(ta.max(axis=-1), tb.max(axis=-1))[..., None]
    total = np.sum(wr * np.exp(ta - shift) + wg * np.exp(tb - shift), axis=-1)
    return np.log(total) + shift[..., 0] - np.log(n)


def renyi_conditional_cross_entropy(alpha, w, d):
    """Renyi conditional cross entropy H_alpha(P_{Z|X}, P^_{Z|X}) = -V_alpha."""
    return -value_function(alpha, w, d)


def arimoto_conditional_entropy(alpha, w) -> float:
    """Arimoto conditional entropy of the source label given the sample.

    ``alpha/(1-alpha) * log mean_x (w_r^alpha + w_g^alpha)^(1/alpha)``, with the
    conditional Shannon entropy near alpha = 1 and ``-log mean_x max(w_r, w_g)``
    at alpha = inf. Undefined (and rejected) at alpha = 0.
    """
    alpha = AlphaOrder.of(alpha)
    w = _as_weights(w)
    wr, wg = w.real_chance, w.fake_chance
    regime = alpha.regime
    if regime is Regime.ZERO:
        raise UnsupportedOrderError("Arimoto conditional entropy is not defined at alpha = 0")
    if regime is Regime.NEAR_ONE:
        out = np.mean(entr(wr) + entr(wg))
    elif regime is Regime.INFINITE:
        out = -np.log(np.mean(np.maximum(wr, wg)))
    else:
        a = alpha.value
        with np.errstate(divide="ignore"):
            inner = np.logaddexp(a * np.log(wr), a * np.log(wg)) / a
        out = a / (1.0 - a) * (logsumexp(inner) - np.log(inner.size))
    return float(_finite_or_raise(out, "Arimoto conditional entropy", alpha))


def _as_matrix(dists) -> np.ndarray:
    if isinstance(dists, np.ndarray):
        return np.atleast_2d(dists.astype(float))
    rows = [np.asarray(r, dtype=float) for r in dists]
    if len({r.size for r in rows}) > 1:
        raise DimensionError("all per-sample distributions must share one alphabet")
    return np.vstack(rows)


def alpha_classification_loss(alpha, cond, pred) -> float:
    """alpha-loss of a probabilistic classifier.

    ``( mean_x sum_y P(y|x) P^(y|x)^((alpha-1)/alpha) )^(alpha/(1-alpha))``;
    equals ``exp`` of the Shannon cross entropy at alpha = 1.

    ``cond`` and ``pred`` are (N, K) arrays or sequences of per-sample
    distributions over the same K labels.
    """
    alpha = AlphaOrder.of(alpha)
    cond = _as_matrix(cond)
    pred = _as_matrix(pred)
    if cond.shape != pred.shape:
        raise DimensionError(f"cond has shape {cond.shape} but pred has {pred.shape}")
    regime = alpha.regime
    if regime is Regime.ZERO:
        raise UnsupportedOrderError("alpha-loss requires alpha > 0")
    n = cond.shape[0]
    support = cond > 0
    with np.errstate(divide="ignore"):
        log_pred = np.log(pred)
    if regime is Regime.NEAR_ONE:
        ce = -np.sum(cond * np.where(support, log_pred, 0.0)) / n
        out = np.exp(ce)
    elif regime is Regime.INFINITE:
        out = n / np.sum(cond * pred)
    else:
        p = alpha.exponent
        with np.errstate(invalid="ignore"):
            terms = np.where(support, p * log_pred, -np.inf)
        log_mean = logsumexp(terms, b=np.where(support, cond, 1.0)) - np.log(n)
        out = np.exp(-log_mean / p)
    return float(out)
