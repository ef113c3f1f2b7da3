"""Optimal discriminator, saddle value and brute-force oracles on finite alphabets."""

from __future__ import annotations

import warnings
from dataclasses import astuple, dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit

from .errors import InvalidInstanceError, UnsupportedOrderError
from .gradients import grad_wrt_generator
from .io import write_csv
from .renyi import (
    DELTA,
    AlphaOrder,
    FiniteDistribution,
    PairedSampleWeights,
    Regime,
    SoftDecision,
    value_function,
)

DSTAR_HEADER = ("symbol", "alpha", "d_star")


class ConvergenceWarning(UserWarning):
    pass


class FiniteGanInstance:
    """Real and generated distributions over a shared finite alphabet.

    Symbols carrying no mass under either distribution are dropped.
    """

    def __init__(self, pr, pg):
        pr = np.asarray(pr.probs if isinstance(pr, FiniteDistribution) else pr, dtype=float)
        pg = np.asarray(pg.probs if isinstance(pg, FiniteDistribution) else pg, dtype=float)
        if pr.shape != pg.shape or pr.ndim != 1:
            raise InvalidInstanceError(f"pr and pg must share one alphabet, got {pr.shape} and {pg.shape}")
        # validates non-negativity and normalisation
        FiniteDistribution(pr)
        FiniteDistribution(pg)
        keep = (pr + pg) > 0
        self.kept = np.flatnonzero(keep)
        self.pr = pr[keep]
        self.pg = pg[keep]

    @property
    def alphabet_size(self) -> int:
        return self.pr.size

    @property
    def weights(self) -> PairedSampleWeights:
        return PairedSampleWeights(self.pr, self.pg)

    def __repr__(self):
        return f"FiniteGanInstance(pr={self.pr.tolist()}, pg={self.pg.tolist()})"


def random_instance(rng: np.random.Generator, alphabet_size: int) -> FiniteGanInstance:
    """Draw P_r and P_g independently and uniformly from the probability simplex."""
    ones = np.ones(alphabet_size)
    return FiniteGanInstance(rng.dirichlet(ones), rng.dirichlet(ones))


def _dstar(alpha: AlphaOrder, pr, pg) -> np.ndarray:
    regime = alpha.regime
    if regime is Regime.ZERO:
        return np.full(pr.shape, 0.5)
    if regime is Regime.INFINITE:
        return np.where(pr > pg, 1.0, np.where(pr < pg, 0.0, 0.5))
    with np.errstate(divide="ignore"):
        log_ratio = np.log(pr) - np.log(pg)
    # 1 / (1 + (pg/pr)^alpha) evaluated as a logistic of the scaled log ratio
    return expit(alpha.value * log_ratio)


def closed_form_discriminator(alpha, inst: FiniteGanInstance) -> SoftDecision:
    """D*(x) = P_r(x)^alpha / (P_r(x)^alpha + P_g(x)^alpha), clamped."""
    alpha = AlphaOrder.of(alpha)
    if np.any(inst.pr + inst.pg <= 0):
        raise InvalidInstanceError("symbol with zero mass under both distributions")
    return SoftDecision(_dstar(alpha, inst.pr, inst.pg))


def decision_grid(size: int, delta: float = DELTA) -> np.ndarray:
    """``size`` Chebyshev-Lobatto nodes on [delta, 1 - delta].

    Spacing is pi/(2(size-1)) in the middle and shrinks quadratically
    toward both ends, where the value function's curvature is unbounded.
    """
    if size < 2:
        raise ValueError("grid needs at least two points")
    theta = np.pi * np.arange(size) / (size - 1)
    return delta + (1.0 - 2.0 * delta) * 0.5 * (1.0 - np.cos(theta))


def brute_force_max_discriminator(alpha, inst: FiniteGanInstance, grid: int = 10001):
    """Per-coordinate grid search for argmax_D V_alpha(D, P_g).

    V_alpha is a monotone function of a sum of per-symbol terms, so each
    coordinate is scanned with the others held fixed. Ties resolve to the
    first (lowest) grid point. Returns ``(SoftDecision, value)``.
    """
    alpha = AlphaOrder.of(alpha)
    n = inst.alphabet_size
    if grid > 100 and n > 6:
        raise ValueError(f"alphabet size {n} too large for a {grid}-point scan (max 6)")
    nodes = decision_grid(grid)
    w = inst.weights
    candidates = np.full((n, grid, n), 0.5)
    for j in range(n):
        candidates[j, :, j] = nodes
    scores = np.asarray(value_function(alpha, w, SoftDecision(candidates)))
    best = nodes[np.argmax(scores, axis=1)]
    decision = SoftDecision(best)
    return decision, value_function(alpha, w, decision)


def optimal_value(alpha, inst: FiniteGanInstance) -> float:
    """max_D V_alpha(D, P_g), evaluated at the closed-form discriminator."""
    alpha = AlphaOrder.of(alpha)
    if alpha.regime is Regime.ZERO:
        raise UnsupportedOrderError("optimal value requires alpha > 0")
    return value_function(alpha, inst.weights, closed_form_discriminator(alpha, inst))


def project_to_simplex(v, metric=None) -> np.ndarray:
    """Projection onto the probability simplex.

    Euclidean by default. With a positive ``metric`` vector ``s`` the
    projection minimises ``sum((y - v)**2 / s)`` instead, whose solution is
    ``max(v - lam * s, 0)`` for the unique ``lam`` giving unit mass.
    """
    v = np.asarray(v, dtype=float)
    s = np.ones_like(v) if metric is None else np.asarray(metric, dtype=float)
    order = np.argsort(-(v / s), kind="stable")
    lam = (np.cumsum(v[order]) - 1.0) / np.cumsum(s[order])
    rho = np.flatnonzero(v[order] / s[order] > lam)[-1]
    return np.maximum(v - lam[rho] * s, 0.0)


def total_variation(p, q) -> float:
    return 0.5 * float(np.abs(np.asarray(p, float) - np.asarray(q, float)).sum())


def _generator_gradient(alpha: AlphaOrder, pr, pg, value) -> np.ndarray:
    d = SoftDecision(_dstar(alpha, pr, pg)).values
    if alpha.regime is Regime.NEAR_ONE:
        mean_gain = 1.0
    else:
        mean_gain = np.exp(alpha.exponent * value)
    # envelope theorem: dV*/dP_g equals the partial at fixed D = D*
    return grad_wrt_generator(alpha, pr, pg, d) / (pr.size * mean_gain)


def _saddle_value(alpha: AlphaOrder, pr, pg) -> float:
    keep = (pr + pg) > 0
    pr, pg = pr[keep], pg[keep]
    return value_function(alpha, PairedSampleWeights(pr, pg), SoftDecision(_dstar(alpha, pr, pg)))


def minimize_generator(
    alpha, pr, steps: int = 5000, step_size: float = 0.05, start=None, tol: float = 1e-10, preconditioned: bool = True
):
    """Projected gradient descent of the saddle value over P_g on the simplex.

    Each iteration steps along the negative gradient and projects back
    onto the simplex, halving the step while it fails to decrease the
    objective. With ``preconditioned`` the gradient is scaled by
    ``(P_r + P_g)**2`` (normalised to unit mean) and the projection uses the matching metric; near
    the optimum this equalises the curvature across symbols, which
    otherwise grows like ``1/P_r(x)**2``. ``preconditioned=False`` gives
    plain Euclidean projected gradient.

    Returns ``(P_g, value)``. If ``steps`` run out before the
    projected-gradient residual drops below ``tol`` a
    :class:`ConvergenceWarning` is emitted and the last (lowest-value)
    iterate is returned.
    """
    alpha = AlphaOrder.of(alpha)
    if alpha.regime in (Regime.ZERO, Regime.INFINITE):
        raise UnsupportedOrderError("generator minimisation needs a finite alpha > 0")
    pr = np.asarray(pr.probs if isinstance(pr, FiniteDistribution) else pr, dtype=float)
    FiniteDistribution(pr)
    if np.any(pr <= 0):
        raise InvalidInstanceError("P_r must be strictly positive for generator minimisation")
    pg = np.full(pr.size, 1.0 / pr.size) if start is None else np.array(start, dtype=float)
    FiniteDistribution(pg)

    value = _saddle_value(alpha, pr, pg)
    converged = False
    residual = np.inf
    for _ in range(steps):
        metric = None
        if preconditioned:
            metric = (pr + pg) ** 2
            metric /= metric.mean()
        direction = _generator_gradient(alpha, pr, pg, value)
        if metric is not None:
            direction = direction * metric
        residual = np.max(np.abs(project_to_simplex(pg - step_size * direction, metric) - pg)) / step_size
        if residual < tol:
            converged = True
            break
        eta = step_size
        for _ in range(60):
            trial = project_to_simplex(pg - eta * direction, metric)
            trial /= trial.sum()
            trial_value = _saddle_value(alpha, pr, trial)
            if trial_value <= value:
                break
            eta *= 0.5
        else:
            # no step length decreases the objective: stationary to rounding
            converged = True
            break
        if np.array_equal(trial, pg):
            converged = True
            break
        pg, value = trial, trial_value
    if not converged:
        warnings.warn(
            f"minimize_generator did not converge in {steps} steps (alpha={alpha.value}, residual={residual:.3g})",
            ConvergenceWarning,
            stacklevel=2,
        )
    return FiniteDistribution(pg), value


@dataclass(frozen=True)
class DStarRow:
    symbol: int
    alpha: float
    d_star: float


def dstar_monotonicity_scan(inst: FiniteGanInstance, alphas) -> list[DStarRow]:
    """Closed-form D* for every symbol across an ascending list of orders."""
    orders = [AlphaOrder.of(a) for a in alphas]
    values = [a.value for a in orders]
    if any(b < a for a, b in zip(values, values[1:])):
        raise ValueError("alphas must be sorted ascending")
    table = np.array([_dstar(a, inst.pr, inst.pg) for a in orders])
    symbols = inst.kept
    return [
        DStarRow(int(symbols[j]), values[i], float(table[i, j]))
        for j in range(inst.alphabet_size)
        for i in range(len(orders))
    ]


def write_dstar_csv(rows, path) -> Path:
    return write_csv(path, DSTAR_HEADER, (astuple(r) for r in rows))
