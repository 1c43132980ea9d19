"""Pareto front learning: a small MLP from weight angles to objectives.

The network is ``m-1 -> hidden... -> m`` with ``tanh`` hidden units and a
linear output layer. All weights and biases live in one flat parameter
vector; layer ``l`` stores its ``(out, in)`` matrix followed by its bias.
Both the parameter gradient of the MSE loss and the input Jacobian are
computed by hand-written reverse mode.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .errors import ConfigurationError

_MAGIC = b"PFL1"


@dataclass(frozen=True)
class PflModel:
    layer_dims: tuple[int, ...]
    params: np.ndarray
    activation: str = "tanh"

    def __post_init__(self):
        dims = tuple(int(d) for d in self.layer_dims)
        params = np.array(self.params, dtype=float)
        if params.shape != (param_count(dims),):
            raise ConfigurationError(
                f"parameter vector has {params.size} entries, layer_dims {dims} need {param_count(dims)}"
            )
        if self.activation != "tanh":
            raise ConfigurationError(f"unsupported activation {self.activation!r}")
        params.flags.writeable = False
        object.__setattr__(self, "layer_dims", dims)
        object.__setattr__(self, "params", params)

    @property
    def m(self) -> int:
        return self.layer_dims[-1]

    def layers(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return _unpack(self.params, self.layer_dims)

    def predict(self, theta) -> np.ndarray:
        return pfl_forward(self, theta)

    def input_jacobian(self, theta) -> np.ndarray:
        return pfl_input_grad(self, theta)


def param_count(layer_dims) -> int:
    dims = list(layer_dims)
    return sum(dims[i + 1] * dims[i] + dims[i + 1] for i in range(len(dims) - 1))


def _unpack(flat: np.ndarray, dims) -> list[tuple[np.ndarray, np.ndarray]]:
    out = []
    pos = 0
    for d_in, d_out in zip(dims[:-1], dims[1:]):
        W = flat[pos : pos + d_out * d_in].reshape(d_out, d_in)
        pos += d_out * d_in
        b = flat[pos : pos + d_out]
        pos += d_out
        out.append((W, b))
    return out


def pfl_init(m: int, hidden=(64, 64), seed: int = 0) -> PflModel:
    """Glorot-uniform weights and zero biases from a seeded generator."""
    if m < 2:
        raise ConfigurationError(f"need at least two objectives, got m={m}")
    dims = (m - 1, *(int(h) for h in hidden), m)
    if any(d < 1 for d in dims):
        raise ConfigurationError(f"layer widths must be positive, got {dims}")
    rng = np.random.default_rng(seed)
    chunks = []
    for d_in, d_out in zip(dims[:-1], dims[1:]):
        limit = np.sqrt(6.0 / (d_in + d_out))
        chunks.append(rng.uniform(-limit, limit, size=d_out * d_in))
        chunks.append(np.zeros(d_out))
    return PflModel(dims, np.concatenate(chunks))


def _as_batch(model: PflModel, theta) -> tuple[np.ndarray, bool]:
    theta = np.asarray(theta, dtype=float)
    single = theta.ndim == 1
    batch = theta[None, :] if single else theta
    if batch.ndim != 2 or batch.shape[1] != model.layer_dims[0]:
        raise ConfigurationError(f"expected angles of width {model.layer_dims[0]}, got shape {theta.shape}")
    return batch, single


def _forward_cache(layers, A: np.ndarray):
    acts = [A]
    for W, b in layers[:-1]:
        A = np.tanh(A @ W.T + b)
        acts.append(A)
    W, b = layers[-1]
    return acts, A @ W.T + b


def pfl_forward(model: PflModel, theta) -> np.ndarray:
    """Predicted objectives for one angle vector or a batch of them."""
    batch, single = _as_batch(model, theta)
    _, out = _forward_cache(model.layers(), batch)
    return out[0] if single else out


def pfl_input_grad(model: PflModel, theta) -> np.ndarray:
    """Jacobian ``d h / d theta`` of shape ``(m, m-1)`` (or ``(K, m, m-1)``)."""
    batch, single = _as_batch(model, theta)
    layers = model.layers()
    acts, _ = _forward_cache(layers, batch)
    K, m = batch.shape[0], model.m
    # G[k, o, :] = d out_o / d (current layer input), seeded with the identity
    G = np.broadcast_to(np.eye(m), (K, m, m))
    for li in range(len(layers) - 1, -1, -1):
        W, _ = layers[li]
        G = G @ W
        if li > 0:
            G = G * (1.0 - acts[li] ** 2)[:, None, :]
    return G[0] if single else G


def mse_loss_and_grad(model: PflModel, thetas, Y) -> tuple[float, np.ndarray]:
    """Mean squared error over all entries and its gradient w.r.t. ``params``."""
    batch, _ = _as_batch(model, thetas)
    Y = np.asarray(Y, dtype=float).reshape(batch.shape[0], model.m)
    layers = model.layers()
    acts, out = _forward_cache(layers, batch)
    resid = out - Y
    loss = float(np.mean(resid**2))

    grads = []
    delta = 2.0 * resid / resid.size
    for li in range(len(layers) - 1, -1, -1):
        W, _ = layers[li]
        grads.append((delta.sum(axis=0), delta.T @ acts[li]))
        if li > 0:
            delta = (delta @ W) * (1.0 - acts[li] ** 2)
    flat = []
    for gb, gW in reversed(grads):
        flat.append(gW.ravel())
        flat.append(gb)
    return loss, np.concatenate(flat)


def pfl_train(
    model: PflModel,
    thetas,
    Y,
    epochs: int = 1000,
    lr: float = 1e-2,
    momentum: float = 0.0,
    history: list | None = None,
    optimizer: str = "gd",
) -> PflModel:
    """Fit ``model`` to ``(thetas, Y)`` pairs by full-batch training.

    ``optimizer="gd"`` is plain gradient descent (heavy-ball when
    ``momentum > 0``). ``"adam"`` uses Adam with the usual moment decay
    rates, and ``"lbfgs"`` hands the loss to SciPy's L-BFGS-B for at most
    ``epochs`` iterations (``lr`` is ignored there). A new model is
    returned; ``history``, if given, receives the loss before each update.
    """
    thetas = np.asarray(thetas, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if thetas.size == 0 or Y.size == 0:
        raise ConfigurationError("cannot train on an empty set of pairs")
    if thetas.ndim == 1:
        thetas = thetas[None, :]
    if Y.ndim == 1:
        Y = Y[None, :]
    if thetas.shape[0] != Y.shape[0]:
        raise ConfigurationError(f"{thetas.shape[0]} angle rows but {Y.shape[0]} objective rows")
    if epochs < 0:
        raise ConfigurationError("epochs must be nonnegative")
    dims, act = model.layer_dims, model.activation

    def objective(w):
        return mse_loss_and_grad(PflModel(dims, w, act), thetas, Y)

    params = model.params.copy()
    if optimizer == "lbfgs":
        if epochs == 0:
            return model

        def tracked(w):
            loss, grad = objective(w)
            if history is not None:
                history.append(loss)
            return loss, grad

        res = minimize(
            tracked,
            params,
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": epochs, "gtol": 1e-12, "ftol": 1e-16},
        )
        return PflModel(dims, res.x, act)

    if optimizer == "gd":
        velocity = np.zeros_like(params)
        for _ in range(epochs):
            loss, grad = objective(params)
            if history is not None:
                history.append(loss)
            velocity = momentum * velocity - lr * grad
            params = params + velocity
    elif optimizer == "adam":
        first = np.zeros_like(params)
        second = np.zeros_like(params)
        for t in range(1, epochs + 1):
            loss, grad = objective(params)
            if history is not None:
                history.append(loss)
            first = 0.9 * first + 0.1 * grad
            second = 0.999 * second + 0.001 * grad**2
            step = (first / (1.0 - 0.9**t)) / (np.sqrt(second / (1.0 - 0.999**t)) + 1e-8)
            params = params - lr * step
    else:
        raise ConfigurationError(f"unknown optimizer {optimizer!r}")
    return PflModel(dims, params, act)


def save_model(model: PflModel, path) -> None:
    """Write ``PFL1`` magic, a little-endian u32 header length, a JSON header
    and the flat parameters as little-endian float64."""
    header = json.dumps(
        {
            "layer_dims": list(model.layer_dims),
            "activation": model.activation,
            "n_params": int(model.params.size),
            "dtype": "<f8",
        },
        sort_keys=True,
    ).encode("utf-8")
    payload = model.params.astype("<f8").tobytes()
    Path(path).write_bytes(_MAGIC + struct.pack("<I", len(header)) + header + payload)


def load_model(path) -> PflModel:
    raw = Path(path).read_bytes()
    if raw[:4] != _MAGIC:
        raise ConfigurationError(f"{path}: not a PFL checkpoint")
    (hlen,) = struct.unpack("<I", raw[4:8])
    header = json.loads(raw[8 : 8 + hlen].decode("utf-8"))
    params = np.frombuffer(raw[8 + hlen :], dtype="<f8").astype(float)
    if params.size != header["n_params"]:
        raise ConfigurationError(f"{path}: truncated parameter block")
    return PflModel(tuple(header["layer_dims"]), params, header["activation"])
