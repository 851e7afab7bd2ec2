"""Dense-network substrate: forward/backward by hand, optimizers, checkpoints.

All six networks of the model (two sample generators, the label generator,
three discriminators) are plain MLPs built from this module. Everything is
float64 numpy and deterministic given a seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

# Probabilities are clamped to [PROB_EPS, 1 - PROB_EPS] before any log.
PROB_EPS = 1e-7

ACTIVATIONS = ("relu", "tanh", "sigmoid", "identity")

CHECKPOINT_VERSION = 1


class CheckpointError(ValueError):
    """Raised when a checkpoint file cannot be loaded."""


@dataclass
class Layer:
    weight: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)
    activation: str


@dataclass
class NeuralNet:
    layers: list[Layer]

    @property
    def input_dim(self) -> int:
        return self.layers[0].weight.shape[1]

    @property
    def output_dim(self) -> int:
        return self.layers[-1].weight.shape[0]

    def copy(self) -> "NeuralNet":
        return NeuralNet(
            [Layer(l.weight.copy(), l.bias.copy(), l.activation) for l in self.layers]
        )


# ParamGrads: one (dW, db) pair per layer, same shapes as the net's parameters.
ParamGrads = list[tuple[np.ndarray, np.ndarray]]


def net_init(layer_dims: list[int], activations: list[str], seed: int) -> NeuralNet:
    """Build a net with dims [d0, d1, ..., dk] and one activation per layer.

    Weights ~ N(0, 1/fan_in) (std 1/sqrt(fan_in)), biases zero.
    """
    if len(layer_dims) < 2:
        raise ValueError("need at least one layer (two dims)")
    if any(d <= 0 for d in layer_dims):
        raise ValueError(f"dims must be positive, got {layer_dims}")
    if len(activations) != len(layer_dims) - 1:
        raise ValueError(
            f"{len(layer_dims) - 1} layers but {len(activations)} activations"
        )
    for a in activations:
        if a not in ACTIVATIONS:
            raise ValueError(f"unknown activation {a!r}")
    rng = np.random.default_rng(seed)
    layers = []
    for fan_in, fan_out, act in zip(layer_dims[:-1], layer_dims[1:], activations):
        w = rng.normal(0.0, 1.0 / np.sqrt(fan_in), size=(fan_out, fan_in))
        layers.append(Layer(w, np.zeros(fan_out), act))
    return NeuralNet(layers)


def _apply_activation(act: str, z: np.ndarray) -> np.ndarray:
    if act == "relu":
        return np.maximum(z, 0.0)
    if act == "tanh":
        return np.tanh(z)
    if act == "sigmoid":
        s = np.where(z >= 0, 1.0 / (1.0 + np.exp(-np.abs(z))),
                     np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))))
        return np.clip(s, PROB_EPS, 1.0 - PROB_EPS)
    if act == "identity":
        return z
    raise ValueError(f"unknown activation {act!r}")


def forward(net: NeuralNet, batch: np.ndarray) -> tuple[np.ndarray, list]:
    """Run the net on a (m, input_dim) batch.

    Returns (outputs, cache); the cache holds per-layer inputs and
    post-activation values for `backward`.
    """
    batch = np.asarray(batch, dtype=np.float64)
    if batch.ndim != 2 or batch.shape[1] != net.input_dim:
        raise ValueError(
            f"batch shape {batch.shape} incompatible with input_dim {net.input_dim}"
        )
    if not np.all(np.isfinite(batch)):
        raise ValueError("non-finite input batch")
    cache = []
    h = batch
    for layer in net.layers:
        z = h @ layer.weight.T + layer.bias
        out = _apply_activation(layer.activation, z)
        cache.append((h, z, out))
        h = out
    return h, cache


def _activation_grad(act: str, z: np.ndarray, out: np.ndarray) -> np.ndarray:
    if act == "relu":
        return (z > 0).astype(np.float64)
    if act == "tanh":
        return 1.0 - out * out
    if act == "sigmoid":
        # out is the clamped value; inside the clamp this is the exact
        # derivative, at the clamp it is a vanishing surrogate.
        return out * (1.0 - out)
    if act == "identity":
        return np.ones_like(z)
    raise ValueError(f"unknown activation {act!r}")


def backward(
    net: NeuralNet, cache: list, output_grad: np.ndarray
) -> tuple[ParamGrads, np.ndarray]:
    """Reverse-mode gradients given dLoss/dOutput.

    Returns (per-layer (dW, db), dLoss/dInput). The input gradient is what
    lets a discriminator's judgment backpropagate into a generator.
    """
    output_grad = np.asarray(output_grad, dtype=np.float64)
    if output_grad.shape != cache[-1][2].shape:
        raise ValueError(
            f"output_grad shape {output_grad.shape} != output shape {cache[-1][2].shape}"
        )
    grads: ParamGrads = [None] * len(net.layers)  # type: ignore[list-item]
    delta = output_grad
    for k in range(len(net.layers) - 1, -1, -1):
        h_in, z, out = cache[k]
        layer = net.layers[k]
        dz = delta * _activation_grad(layer.activation, z, out)
        grads[k] = (dz.T @ h_in, dz.sum(axis=0))
        delta = dz @ layer.weight
    return grads, delta


def zero_grads(net: NeuralNet) -> ParamGrads:
    return [(np.zeros_like(l.weight), np.zeros_like(l.bias)) for l in net.layers]


def add_grads(a: ParamGrads, b: ParamGrads) -> ParamGrads:
    return [(aw + bw, ab + bb) for (aw, ab), (bw, bb) in zip(a, b)]


def scale_grads(g: ParamGrads, c: float) -> ParamGrads:
    return [(c * w, c * b) for w, b in g]


def numeric_gradients(net: NeuralNet, value_fn, eps: float = 1e-5) -> ParamGrads:
    """Central finite differences of value_fn() w.r.t. every parameter of net.

    value_fn must read the net's current (mutated) parameters; they are
    restored afterward.
    """
    grads: ParamGrads = []
    for layer in net.layers:
        pair = []
        for arr in (layer.weight, layer.bias):
            g = np.zeros_like(arr)
            it = np.nditer(arr, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                orig = arr[idx]
                arr[idx] = orig + eps
                plus = value_fn()
                arr[idx] = orig - eps
                minus = value_fn()
                arr[idx] = orig
                g[idx] = (plus - minus) / (2.0 * eps)
            pair.append(g)
        grads.append((pair[0], pair[1]))
    return grads


def max_relative_error(analytic: ParamGrads, numeric: ParamGrads) -> float:
    worst = 0.0
    for (aw, ab), (nw, nb) in zip(analytic, numeric):
        for a, n in ((aw, nw), (ab, nb)):
            denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), 1e-12)
            worst = max(worst, float(np.max(np.abs(a - n) / denom)))
    return worst


def grad_check(net: NeuralNet, loss_fn, batch: np.ndarray, eps: float = 1e-5) -> float:
    """Max relative error between backprop and central differences.

    loss_fn(outputs) -> (scalar_value, dLoss/dOutputs).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    out, cache = forward(net, batch)
    _, out_grad = loss_fn(out)
    analytic, _ = backward(net, cache, out_grad)

    def value():
        o, _ = forward(net, batch)
        v, _ = loss_fn(o)
        return v

    numeric = numeric_gradients(net, value, eps)
    return max_relative_error(analytic, numeric)


@dataclass
class OptimizerState:
    algorithm: str  # "sgd" | "adam"
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: ParamGrads | None = field(default=None, repr=False)
    v: ParamGrads | None = field(default=None, repr=False)


def make_optimizer(net: NeuralNet, algorithm: str = "adam", lr: float = 1e-3) -> OptimizerState:
    if algorithm not in ("sgd", "adam"):
        raise ValueError(f"unknown optimizer {algorithm!r}")
    if lr <= 0:
        raise ValueError("learning rate must be positive")
    state = OptimizerState(algorithm=algorithm, lr=lr)
    if algorithm == "adam":
        state.m = zero_grads(net)
        state.v = zero_grads(net)
    return state


def optimizer_step(
    net: NeuralNet, grads: ParamGrads, state: OptimizerState, direction: str
) -> None:
    """Move parameters along +/-grads in place; state is updated in place.

    Non-finite gradients reject the whole step and leave net and state
    untouched.
    """
    if direction not in ("ascend", "descend"):
        raise ValueError(f"direction must be ascend or descend, got {direction!r}")
    if len(grads) != len(net.layers):
        raise ValueError("gradient/layer count mismatch")
    for layer, (gw, gb) in zip(net.layers, grads):
        if gw.shape != layer.weight.shape or gb.shape != layer.bias.shape:
            raise ValueError("gradient shape mismatch")
        if not (np.all(np.isfinite(gw)) and np.all(np.isfinite(gb))):
            raise ValueError("non-finite gradients; step rejected")
    sign = 1.0 if direction == "ascend" else -1.0
    state.step += 1
    if state.algorithm == "sgd":
        for layer, (gw, gb) in zip(net.layers, grads):
            layer.weight += sign * state.lr * gw
            layer.bias += sign * state.lr * gb
        return
    # adam with bias correction
    t = state.step
    b1, b2 = state.beta1, state.beta2
    for k, (layer, (gw, gb)) in enumerate(zip(net.layers, grads)):
        for arr, g, which in ((layer.weight, gw, 0), (layer.bias, gb, 1)):
            m = state.m[k][which]
            v = state.v[k][which]
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            m_hat = m / (1 - b1**t)
            v_hat = v / (1 - b2**t)
            arr += sign * state.lr * m_hat / (np.sqrt(v_hat) + state.eps)


def checkpoint_save(nets: dict[str, NeuralNet], path) -> None:
    """Write all nets to a versioned JSON document, losslessly."""
    doc = {"version": CHECKPOINT_VERSION, "nets": {}}
    for name, net in nets.items():
        dims = [net.input_dim] + [l.weight.shape[0] for l in net.layers]
        doc["nets"][name] = {
            "dims": dims,
            "activations": [l.activation for l in net.layers],
            "weights": [l.weight.tolist() for l in net.layers],
            "biases": [l.bias.tolist() for l in net.layers],
        }
    with open(path, "w") as f:
        json.dump(doc, f)


def checkpoint_load(path) -> dict[str, NeuralNet]:
    try:
        with open(path) as f:
            doc = json.load(f)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise CheckpointError(f"malformed checkpoint: {e}") from e
    if not isinstance(doc, dict) or "version" not in doc:
        raise CheckpointError("malformed checkpoint: missing version")
    if doc["version"] != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"checkpoint version {doc['version']} unsupported (expected {CHECKPOINT_VERSION})"
        )
    nets = {}
    try:
        for name, rec in doc["nets"].items():
            dims = rec["dims"]
            acts = rec["activations"]
            layers = []
            for k, act in enumerate(acts):
                w = np.array(rec["weights"][k], dtype=np.float64)
                b = np.array(rec["biases"][k], dtype=np.float64)
                if w.shape != (dims[k + 1], dims[k]) or b.shape != (dims[k + 1],):
                    raise CheckpointError(f"net {name!r}: parameter shape mismatch")
                if act not in ACTIVATIONS:
                    raise CheckpointError(f"net {name!r}: unknown activation {act!r}")
                layers.append(Layer(w, b, act))
            nets[name] = NeuralNet(layers)
    except (KeyError, IndexError, TypeError) as e:
        raise CheckpointError(f"malformed checkpoint: {e}") from e
    return nets
