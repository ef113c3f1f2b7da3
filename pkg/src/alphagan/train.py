"""Alternating alpha-GAN training: discriminator ascent and generator descent on V_alpha."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from .errors import NumericOverflowError, TrainingDivergence, UnsupportedOrderError
from .metrics import discriminator_flatness, histogram_rows, ks_statistic, wasserstein1_1d
from .mnist import load_mnist_subset
from .nn import MlpNetwork, SeededRng, make_optimizer
from .renyi import DELTA, AlphaOrder, Regime

log = logging.getLogger(__name__)

METRICS_HEADER = ("epoch", "d_loss", "g_loss", "wasserstein1", "ks_stat", "d_flatness")

# independent random streams derived from one seed
_INIT_STREAM, _DATA_STREAM, _EVAL_STREAM = 0, 1, 2


@dataclass
class TrainConfig:
    """Hyperparameters of one training run.

    For ``data="gaussian"`` an epoch is a single minibatch step; for
    ``data="mnist"`` it is one pass over the loaded subset.
    """

    alpha: float = 1.0
    latent_dim: int = 5
    batch_size: int = 128
    learning_rate: float = 2e-4
    epochs: int = 10_000
    seed: int = 0
    d_steps_per_g_step: int = 1
    optimizer: str = "sgd"
    data: str = "gaussian"
    mean: float = 0.0
    std: float = 1.0
    mnist_path: str | None = None
    max_images: int = 512
    hidden: int | None = None
    record_interval: int = 100
    histogram_interval: int = 1000
    eval_size: int = 1024
    beta1: float = 0.5
    beta2: float = 0.999

    def __post_init__(self):
        self.validate()

    @classmethod
    def mnist(cls, mnist_path, **overrides) -> "TrainConfig":
        """MNIST defaults: latent 100, batch 64, Adam(2e-4, 0.5, 0.999), hidden 128."""
        base = dict(
            data="mnist",
            mnist_path=str(mnist_path),
            latent_dim=100,
            batch_size=64,
            optimizer="adam",
            epochs=5,
            record_interval=1,
            histogram_interval=1,
            eval_size=256,
        )
        base.update(overrides)
        return cls(**base)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]

    def validate(self):
        AlphaOrder.of(self.alpha)
        if self.batch_size < 2:
            raise ValueError("batch_size must be at least 2")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")
        if self.latent_dim < 1:
            raise ValueError("latent_dim must be at least 1")
        if self.d_steps_per_g_step < 1 or self.record_interval < 1 or self.histogram_interval < 1:
            raise ValueError("step counts and intervals must be positive")
        if self.data not in ("gaussian", "mnist"):
            raise ValueError(f"unknown data source {self.data!r}")
        if self.data == "mnist" and not self.mnist_path:
            raise ValueError("mnist data needs mnist_path")
        if self.optimizer.lower() not in ("sgd", "adam"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def hidden_width(self) -> int:
        if self.hidden is not None:
            return self.hidden
        return 128 if self.data == "mnist" else 32


@dataclass
class MetricsRecord:
    epoch: int
    d_loss: float
    g_loss: float
    wasserstein1: float
    ks_stat: float
    d_flatness: float

    def row(self) -> tuple:
        return (self.epoch, self.d_loss, self.g_loss, self.wasserstein1, self.ks_stat, self.d_flatness)


@dataclass
class TrainResult:
    config: TrainConfig
    discriminator: MlpNetwork
    generator: MlpNetwork
    metrics: list[MetricsRecord] = field(default_factory=list)
    histograms: dict[int, list[tuple]] = field(default_factory=dict)
    optimizers: dict = field(default_factory=dict)


def empirical_value_loss(alpha, d_real, d_fake):
    """Minibatch V_alpha and its exact gradients with respect to each D output.

    Real samples enter only the D branch and generated samples only the
    1 - D branch, all with weight 1/(2B). Near alpha = 1 this is the
    negated binary cross entropy. Outputs are clamped to [DELTA, 1-DELTA];
    the gradient is zero wherever the clamp is active.

    Returns ``(value, grad_real, grad_fake)``.
    """
    alpha = AlphaOrder.of(alpha)
    d_real = np.asarray(d_real, dtype=float).ravel()
    d_fake = np.asarray(d_fake, dtype=float).ravel()
    if d_real.size == 0 or d_fake.size == 0:
        raise ValueError("empty batch")
    regime = alpha.regime
    if regime is Regime.ZERO:
        raise UnsupportedOrderError("alpha = 0 gives a min-type value with no usable gradient")
    mask_r = (d_real >= DELTA) & (d_real <= 1 - DELTA)
    mask_f = (d_fake >= DELTA) & (d_fake <= 1 - DELTA)
    dr = np.clip(d_real, DELTA, 1 - DELTA)
    df = np.clip(d_fake, DELTA, 1 - DELTA)
    n = dr.size + df.size
    log_r = np.log(dr)
    log_f = np.log1p(-df)

    if regime is Regime.NEAR_ONE:
        value = (log_r.sum() + log_f.sum()) / n
        grad_r = 1.0 / (n * dr)
        grad_f = -1.0 / (n * (1.0 - df))
    elif regime is Regime.INFINITE:
        mean_gain = (dr.sum() + (1.0 - df).sum()) / n
        value = np.log(mean_gain)
        grad_r = np.full(dr.shape, 1.0 / (n * mean_gain))
        grad_f = np.full(df.shape, -1.0 / (n * mean_gain))
    else:
        p = alpha.exponent
        inv = 1.0 / alpha.value
        terms = np.concatenate([p * log_r, p * log_f])
        shift = terms.max()
        log_mean = np.log(np.exp(terms - shift).sum()) + shift - np.log(n)
        value = log_mean / p
        # dV/dD = D^(-1/alpha) / (n * mean), and the mirror image for 1 - D
        grad_r = np.exp(-inv * log_r - log_mean) / n
        grad_f = -np.exp(-inv * log_f - log_mean) / n
    if not (np.isfinite(value) and np.all(np.isfinite(grad_r)) and np.all(np.isfinite(grad_f))):
        raise NumericOverflowError(f"minibatch value or gradient not finite at alpha={alpha.value}")
    return float(value), grad_r * mask_r, grad_f * mask_f


class _DataSource:
    def __init__(self, config: TrainConfig):
        self.config = config
        if config.data == "mnist":
            self.images = load_mnist_subset(config.mnist_path, config.max_images)
            self.dim = self.images.shape[1]
            self.steps_per_epoch = int(np.ceil(len(self.images) / config.batch_size))
        else:
            self.images = None
            self.dim = 1
            self.steps_per_epoch = 1

    def sample(self, rng, size) -> np.ndarray:
        if self.images is not None:
            return self.images[rng.integers(0, len(self.images), size)]
        return rng.normal(self.config.mean, self.config.std, size=(size, 1))


def build_networks(config: TrainConfig, data_dim: int, rng):
    """Two-layer ReLU MLPs: D ends in a sigmoid, G in identity (sigmoid for images)."""
    h = config.hidden_width
    disc = MlpNetwork.build([data_dim, h, 1], ["relu", "sigmoid"], rng)
    out_act = "sigmoid" if config.data == "mnist" else "identity"
    gen = MlpNetwork.build([config.latent_dim, h, data_dim], ["relu", out_act], rng)
    return disc, gen


def discriminator_step(alpha, disc: MlpNetwork, real, fake):
    """Value and parameter gradients of V_alpha for D on one real/fake batch."""
    b = len(real)
    out = disc.forward(np.concatenate([real, fake]))[:, 0]
    value, g_real, g_fake = empirical_value_loss(alpha, out[:b], out[b:])
    disc.backward(np.concatenate([g_real, g_fake])[:, None])
    return value, disc.gradients()


def generator_step(alpha, disc: MlpNetwork, gen: MlpNetwork, real, z):
    """Value and G-parameter gradients of V_alpha, back-propagated through D's input."""
    b = len(real)
    fake = gen.forward(z)
    out = disc.forward(np.concatenate([real, fake]))[:, 0]
    value, _, g_fake = empirical_value_loss(alpha, out[:b], out[b:])
    upstream = np.concatenate([np.zeros(b), g_fake])[:, None]
    input_grad = disc.backward(upstream)
    gen.backward(input_grad[b:])
    return value, gen.gradients()


def _evaluate(epoch, d_loss, g_loss, disc, gen, real_eval, z_eval):
    generated = gen.forward(z_eval)
    flat = discriminator_flatness(disc.forward(real_eval)[:, 0])
    return MetricsRecord(
        epoch=epoch,
        d_loss=d_loss,
        g_loss=g_loss,
        wasserstein1=wasserstein1_1d(real_eval, generated),
        ks_stat=ks_statistic(real_eval, generated),
        d_flatness=flat,
    ), generated


def train(config: TrainConfig, initial_record: bool = False) -> TrainResult:
    """Run alternating alpha-GAN training.

    Each step draws a real batch and latent noise, takes
    ``d_steps_per_g_step`` ascent steps on D, then one descent step on G
    with the gradient passed through D's input. Metrics are recorded
    after every ``record_interval``-th epoch and after the last one (plus
    epoch 0 when ``initial_record``); histograms follow
    ``histogram_interval``. Fully deterministic given ``config.seed``.

    Raises TrainingDivergence when a loss becomes non-finite; the
    exception's ``partial`` attribute holds the TrainResult so far.
    """
    config.validate()
    alpha = AlphaOrder.of(config.alpha)
    root = SeededRng(config.seed)
    init_rng = root.child(_INIT_STREAM)
    data_rng = root.child(_DATA_STREAM)
    eval_rng = root.child(_EVAL_STREAM)

    data = _DataSource(config)
    disc, gen = build_networks(config, data.dim, init_rng)
    opt_d = make_optimizer(config.optimizer, config.learning_rate, config.beta1, config.beta2)
    opt_g = make_optimizer(config.optimizer, config.learning_rate, config.beta1, config.beta2)
    result = TrainResult(config, disc, gen, optimizers={"discriminator": opt_d, "generator": opt_g})

    real_eval = data.sample(eval_rng, config.eval_size)
    z_eval = eval_rng.normal(size=(config.eval_size, config.latent_dim))
    if initial_record:
        rec, generated = _evaluate(0, float("nan"), float("nan"), disc, gen, real_eval, z_eval)
        result.metrics.append(rec)
        result.histograms[0] = histogram_rows(real_eval, generated)

    b = config.batch_size
    for epoch in range(1, config.epochs + 1):
        try:
            for _ in range(data.steps_per_epoch):
                for _ in range(config.d_steps_per_g_step):
                    real = data.sample(data_rng, b)
                    fake = gen.forward(data_rng.normal(size=(b, config.latent_dim)))
                    d_value, grads = discriminator_step(alpha, disc, real, fake)
                    opt_d.step(disc.parameters(), grads, maximize=True)
                z = data_rng.normal(size=(b, config.latent_dim))
                g_value, grads = generator_step(alpha, disc, gen, real, z)
                opt_g.step(gen.parameters(), grads)
            if not all(np.all(np.isfinite(p)) for p in disc.parameters() + gen.parameters()):
                raise NumericOverflowError("parameters became non-finite")
        except NumericOverflowError as exc:
            err = TrainingDivergence(epoch, alpha.value, str(exc))
            err.partial = result
            log.error("%s", err)
            raise err from exc

        last = epoch == config.epochs
        if epoch % config.record_interval == 0 or last:
            # discriminator loss is the cross entropy -V it minimises
            rec, generated = _evaluate(epoch, -d_value, g_value, disc, gen, real_eval, z_eval)
            result.metrics.append(rec)
            if epoch % config.histogram_interval == 0 or last:
                result.histograms[epoch] = histogram_rows(real_eval, generated)
    return result


def config_dict(config: TrainConfig) -> dict:
    return asdict(config)


def discriminator_gradient_norm(alpha, disc: MlpNetwork, gen: MlpNetwork, real, z, proportional: bool = False) -> float:
    """Euclidean norm of the discriminator's parameter gradient at one (D, G) state.

    By default this is the exact gradient of the minibatch V_alpha. With
    ``proportional`` the per-output gradients are rescaled by the mean gain
    exp(p V), which removes the chain-rule factor of the outer logarithm:
    each sample then contributes ``D^(-1/alpha)/(2B)`` (real) or
    ``-(1-D)^(-1/alpha)/(2B)`` (generated), the constant-1 convention of
    :func:`grad_wrt_discriminator`.
    """
    alpha = AlphaOrder.of(alpha)
    value, grads = discriminator_step(alpha, disc, real, gen.forward(z))
    scale = 1.0
    if proportional and alpha.regime is not Regime.NEAR_ONE:
        scale = float(np.exp(alpha.exponent * value))
    return scale * float(np.sqrt(sum(np.sum(g * g) for g in grads)))
