"""Closed-form gradients of V_alpha with respect to the soft decision and P_g.

Both gradients are returned up to a positive, sample-independent factor
(the chain rule through the outer log / power mean), which is fixed to 1.
``finite_difference_check`` validates the direction against the exact
value function.
"""

from __future__ import annotations

from dataclasses import astuple, dataclass
from pathlib import Path

import numpy as np

from .errors import UnsupportedOrderError
from .io import write_csv
from .renyi import AlphaOrder, Regime, SoftDecision, _as_weights, value_function

#: Real-sample probability used for the four default sweep scenarios. With it,
#: the generator gradient at alpha = 0.5 reproduces the reference curves'
#: terminal values (1 for P_g = 0.2 and 1/4.84 for P_g = 0.8 at D = 0.4).
DEFAULT_PR = 0.3

#: (pr, pg, d) scenarios: P_g in {0.2, 0.8} crossed with D in {0.4, 0.6}.
DEFAULT_SCENARIOS = tuple((DEFAULT_PR, pg, d) for pg in (0.2, 0.8) for d in (0.4, 0.6))

SWEEP_HEADER = ("family", "alpha", "pr", "pg", "d", "grad")


def _positive_order(alpha, what) -> AlphaOrder:
    alpha = AlphaOrder.of(alpha)
    if alpha.regime is Regime.ZERO:
        raise UnsupportedOrderError(f"{what} is undefined at alpha = 0")
    return alpha


def grad_wrt_discriminator(alpha, pr, pg, d):
    """Proportional form of dV/dD(x).

    ``w_r D^(-1/alpha) - w_g (1-D)^(-1/alpha)`` with ``w_r = pr/(pr+pg)``.
    Broadcasts over array arguments.
    """
    alpha = _positive_order(alpha, "discriminator gradient")
    pr, pg, d = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (pr, pg, d)))
    wr = pr / (pr + pg)
    wg = pg / (pr + pg)
    if alpha.regime is Regime.INFINITE:
        out = wr - wg
    else:
        s = 1.0 / alpha.value
        out = wr * np.exp(-s * np.log(d)) - wg * np.exp(-s * np.log1p(-d))
    return float(out) if out.ndim == 0 else out


def grad_wrt_generator(alpha, pr, pg, d):
    """Proportional form of dV/dP_g(x).

    ``alpha/(alpha-1) * pr/(pr+pg)^2 * ((1-D)^p - D^p)``, ``p = (alpha-1)/alpha``.
    Near alpha = 1 this becomes ``pr/(pr+pg)^2 * log((1-D)/D)``.
    """
    alpha = _positive_order(alpha, "generator gradient")
    pr, pg, d = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in (pr, pg, d)))
    scale = pr / (pr + pg) ** 2
    regime = alpha.regime
    if regime is Regime.NEAR_ONE:
        bracket = np.log1p(-d) - np.log(d)
    elif regime is Regime.INFINITE:
        bracket = 1.0 - 2.0 * d
    else:
        p = alpha.exponent
        # alpha/(alpha-1) = 1/p; expm1 keeps the difference accurate for small p
        bracket = (np.expm1(p * np.log1p(-d)) - np.expm1(p * np.log(d))) / p
    out = scale * bracket
    return float(out) if out.ndim == 0 else out


def numeric_grad_discriminator(alpha, w, d, h=1e-5) -> np.ndarray:
    """Central differences of value_function with respect to each D(x)."""
    w = _as_weights(w)
    d = np.array(d.values if isinstance(d, SoftDecision) else d, dtype=float)
    n = d.size
    bumps = np.eye(n) * h
    # batch of 2n perturbed decision vectors through one value_function call
    batch = np.concatenate([d + bumps, d - bumps])
    vals = np.asarray(value_function(alpha, w, SoftDecision(batch)))
    return (vals[:n] - vals[n:]) / (2 * h)


def finite_difference_check(alpha, w, d, h=1e-5, zero_tol=1e-8) -> float:
    """Return 1 - cosine between the closed-form and numeric D-gradients.

    Vectors with norm below ``zero_tol`` count as zero; two zero vectors
    agree (0.0 returned), a zero and a non-zero vector disagree (1.0).
    """
    if not 1e-8 <= h <= 1e-3:
        raise ValueError(f"step h={h} outside [1e-8, 1e-3]")
    w = _as_weights(w)
    d = np.array(d.values if isinstance(d, SoftDecision) else d, dtype=float)
    analytic = np.atleast_1d(grad_wrt_discriminator(alpha, w.pr, w.pg, d))
    numeric = numeric_grad_discriminator(alpha, w, d, h)
    na, nn = np.linalg.norm(analytic), np.linalg.norm(numeric)
    if na < zero_tol and nn < zero_tol:
        return 0.0
    if na < zero_tol or nn < zero_tol:
        return 1.0
    return float(1.0 - analytic @ numeric / (na * nn))


@dataclass(frozen=True)
class GradientSweepRow:
    family: str
    alpha: float
    pr: float
    pg: float
    d: float
    grad: float


def sweep_alpha(scenarios=DEFAULT_SCENARIOS, alphas=None) -> list[GradientSweepRow]:
    """Both gradient families for every (pr, pg, d) scenario over an alpha grid.

    Rows are ordered family (discriminator first), then scenario, then alpha.
    """
    if alphas is None:
        alphas = default_alpha_grid()
    alphas = [float(a) for a in alphas]
    if any(not 0 < a <= 100 for a in alphas):
        raise ValueError("sweep grid must lie in (0, 100]")
    rows = []
    for family, fn in (("discriminator", grad_wrt_discriminator), ("generator", grad_wrt_generator)):
        for pr, pg, d in scenarios:
            grads = [fn(a, pr, pg, d) for a in alphas]
            rows.extend(GradientSweepRow(family, a, pr, pg, d, g) for a, g in zip(alphas, grads))
    return rows


def default_alpha_grid() -> np.ndarray:
    """0.01, 1.01, ..., 99.01: one point per unit step of the plotted axis."""
    return 0.01 + np.arange(100.0)


def write_sweep_csv(rows, path) -> Path:
    return write_csv(path, SWEEP_HEADER, (astuple(r) for r in rows))
