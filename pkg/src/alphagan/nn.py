"""Minimal dense network with hand-written backprop, SGD/Adam and JSON checkpoints."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from scipy.special import expit

from .errors import DimensionError, FormatError, StaleCacheError

ACTIVATIONS = ("relu", "sigmoid", "identity")
CHECKPOINT_MAGIC = "AGANCKPT1"
CHECKPOINT_VERSION = 1


class SeededRng:
    """Deterministic numpy Generator keyed by a 64-bit seed and a stream id.

    Distinct streams of one seed are statistically independent, so e.g.
    weight initialisation and minibatch sampling never share draws.
    Unknown attributes are forwarded to the underlying Generator.
    """

    def __init__(self, seed: int, stream: int = 0):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self.stream = int(stream)
        self.generator = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, self.stream])))

    def child(self, stream: int) -> "SeededRng":
        return SeededRng(self.seed, stream)

    def __getattr__(self, name):
        return getattr(self.generator, name)


class DenseLayer:
    def __init__(self, weights, biases, activation: str = "identity"):
        if activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {activation!r}")
        self.weights = np.array(weights, dtype=float)
        self.biases = np.array(biases, dtype=float)
        if self.weights.ndim != 2 or self.biases.shape != (self.weights.shape[0],):
            raise DimensionError(f"weights {self.weights.shape} and biases {self.biases.shape} do not match")
        self.activation = activation
        self.grad_weights = np.zeros_like(self.weights)
        self.grad_biases = np.zeros_like(self.biases)
        self._input = None
        self._pre = None
        self._out = None

    @classmethod
    def glorot(cls, n_in: int, n_out: int, activation: str, rng) -> "DenseLayer":
        """Uniform fan-in/fan-out initialisation, zero biases."""
        limit = np.sqrt(6.0 / (n_in + n_out))
        return cls(rng.uniform(-limit, limit, size=(n_out, n_in)), np.zeros(n_out), activation)

    @property
    def n_in(self) -> int:
        return self.weights.shape[1]

    @property
    def n_out(self) -> int:
        return self.weights.shape[0]

    def forward(self, x: np.ndarray) -> np.ndarray:
        pre = x @ self.weights.T + self.biases
        if self.activation == "relu":
            out = np.maximum(pre, 0.0)
        elif self.activation == "sigmoid":
            out = expit(pre)
        else:
            out = pre
        self._input, self._pre, self._out = x, pre, out
        return out

    def backward(self, upstream: np.ndarray) -> np.ndarray:
        if self._out is None or upstream.shape != self._out.shape:
            cached = None if self._out is None else self._out.shape
            raise StaleCacheError(f"upstream gradient {upstream.shape} does not match cached output {cached}")
        if self.activation == "relu":
            # subgradient 0 at a zero pre-activation
            g = upstream * (self._pre > 0)
        elif self.activation == "sigmoid":
            g = upstream * self._out * (1.0 - self._out)
        else:
            g = upstream
        self.grad_weights = g.T @ self._input
        self.grad_biases = g.sum(axis=0)
        return g @ self.weights


class MlpNetwork:
    """A chain of dense layers."""

    def __init__(self, layers):
        self.layers = list(layers)
        for a, b in zip(self.layers, self.layers[1:]):
            if a.n_out != b.n_in:
                raise DimensionError(f"layer widths {a.n_out} -> {b.n_in} do not chain")

    @classmethod
    def build(cls, sizes, activations, rng) -> "MlpNetwork":
        """``sizes = [n_in, h1, ..., n_out]`` with one activation per layer."""
        if len(activations) != len(sizes) - 1:
            raise ValueError("need one activation per layer")
        return cls(DenseLayer.glorot(i, o, act, rng) for i, o, act in zip(sizes, sizes[1:], activations))

    @property
    def n_in(self) -> int:
        return self.layers[0].n_in

    @property
    def n_out(self) -> int:
        return self.layers[-1].n_out

    def forward(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[1] != self.n_in:
            raise DimensionError(f"expected a batch of width {self.n_in}, got shape {x.shape}")
        for layer in self.layers:
            x = layer.forward(x)
        return x

    __call__ = forward

    def backward(self, upstream) -> np.ndarray:
        """Back-propagate dLoss/dOutput; stores parameter gradients and returns dLoss/dInput."""
        g = np.asarray(upstream, dtype=float)
        for layer in reversed(self.layers):
            g = layer.backward(g)
        return g

    def parameters(self) -> list[np.ndarray]:
        return [p for layer in self.layers for p in (layer.weights, layer.biases)]

    def gradients(self) -> list[np.ndarray]:
        return [g for layer in self.layers for g in (layer.grad_weights, layer.grad_biases)]

    def to_dict(self) -> dict:
        return {
            "layers": [
                {
                    "in": layer.n_in,
                    "out": layer.n_out,
                    "activation": layer.activation,
                    "weights": layer.weights.ravel().tolist(),
                    "biases": layer.biases.tolist(),
                }
                for layer in self.layers
            ]
        }

    @classmethod
    def from_dict(cls, data) -> "MlpNetwork":
        layers = []
        for entry in data["layers"]:
            w = np.asarray(entry["weights"], dtype=float).reshape(entry["out"], entry["in"])
            layers.append(DenseLayer(w, entry["biases"], entry["activation"]))
        return cls(layers)


class SGD:
    def __init__(self, lr: float = 2e-4):
        self.lr = lr

    def step(self, params, grads, maximize: bool = False) -> None:
        sign = 1.0 if maximize else -1.0
        for p, g in zip(params, grads):
            p += sign * self.lr * g

    def state_dict(self) -> dict:
        return {"type": "sgd", "lr": self.lr}


class Adam:
    """Adam with bias-corrected moments; buffers are created on the first step."""

    def __init__(self, lr: float = 2e-4, beta1: float = 0.5, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = None
        self.v = None
        self.t = 0

    def step(self, params, grads, maximize: bool = False) -> None:
        if self.m is None:
            self.m = [np.zeros_like(p) for p in params]
            self.v = [np.zeros_like(p) for p in params]
        self.t += 1
        bc1 = 1.0 - self.beta1**self.t
        bc2 = 1.0 - self.beta2**self.t
        sign = 1.0 if maximize else -1.0
        for p, g, m, v in zip(params, grads, self.m, self.v):
            if m.shape != p.shape:
                raise DimensionError("Adam buffers do not match parameter shapes")
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * (g * g)
            p += sign * self.lr * (m / bc1) / (np.sqrt(v / bc2) + self.eps)

    def state_dict(self) -> dict:
        return {
            "type": "adam",
            "lr": self.lr,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "eps": self.eps,
            "t": self.t,
            "m": None if self.m is None else [a.ravel().tolist() for a in self.m],
            "v": None if self.v is None else [a.ravel().tolist() for a in self.v],
        }

    def load_state_dict(self, state, params) -> None:
        self.lr, self.beta1, self.beta2, self.eps = state["lr"], state["beta1"], state["beta2"], state["eps"]
        self.t = state["t"]
        if state["m"] is None:
            self.m = self.v = None
        else:
            self.m = [np.asarray(a, float).reshape(p.shape) for a, p in zip(state["m"], params)]
            self.v = [np.asarray(a, float).reshape(p.shape) for a, p in zip(state["v"], params)]


def make_optimizer(name: str, lr: float, beta1: float = 0.5, beta2: float = 0.999):
    name = name.lower()
    if name == "sgd":
        return SGD(lr)
    if name == "adam":
        return Adam(lr, beta1, beta2)
    raise ValueError(f"unknown optimizer {name!r}")


def save_checkpoint(path, networks: dict, optimizers: dict | None = None, extra: dict | None = None) -> Path:
    """Write ``AGANCKPT1`` on the first line followed by a JSON body.

    Arrays are stored row-major as flat lists with their shapes; floats use
    Python's shortest round-trip repr, so a reload is bit-exact.
    """
    body = {
        "version": CHECKPOINT_VERSION,
        "networks": {name: net.to_dict() for name, net in networks.items()},
        "optimizers": {name: opt.state_dict() for name, opt in (optimizers or {}).items()},
        "extra": extra or {},
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(CHECKPOINT_MAGIC + "\n" + json.dumps(body, sort_keys=True) + "\n")
    return path


def load_checkpoint(path) -> dict:
    """Inverse of :func:`save_checkpoint`; networks come back as MlpNetwork objects."""
    text = Path(path).read_text()
    magic, _, rest = text.partition("\n")
    if magic != CHECKPOINT_MAGIC:
        raise FormatError(f"{path}: not a checkpoint (magic {magic[:16]!r})")
    try:
        body = json.loads(rest)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: corrupt checkpoint body: {exc}") from exc
    if body.get("version") != CHECKPOINT_VERSION:
        raise FormatError(f"{path}: unsupported checkpoint version {body.get('version')!r}")
    body["networks"] = {name: MlpNetwork.from_dict(d) for name, d in body["networks"].items()}
    return body
