"""From-first-principles LSTM + fully-connected network with analytic BPTT.

The LSTM cell follows the standard gate recurrences

    i_t = sigmoid(W_ii x_t + b_ii + W_hi h_{t-1} + b_hi)
    f_t = sigmoid(W_if x_t + b_if + W_hf h_{t-1} + b_hf)
    g_t = tanh   (W_ig x_t + b_ig + W_hg h_{t-1} + b_hg)
    o_t = sigmoid(W_io x_t + b_io + W_ho h_{t-1} + b_ho)
    c_t = f_t * c_{t-1} + i_t * g_t
    h_t = o_t * tanh(c_t)

with the double-bias convention (separate input and hidden bias vectors per
gate).  Gate weights are stored stacked in blocks of H in the order
(i, f, g, o).  The last hidden state of the last LSTM layer feeds a stack of
tanh fully-connected layers and an affine output layer.

Gradients are computed by exact backpropagation through time; no autodiff
framework is involved.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError, NumericalError

CHECKPOINT_VERSION = 1


def sigmoid(x: np.ndarray) -> np.ndarray:
    # numerically stable two-sided form
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass
class LstmLayerParams:
    """Stacked gate parameters of one LSTM layer (gate order i, f, g, o)."""

    W_input: np.ndarray   # (4H, input_size)
    W_hidden: np.ndarray  # (4H, H)
    b_input: np.ndarray   # (4H,)
    b_hidden: np.ndarray  # (4H,)

    def __post_init__(self):
        four_h, r = self.W_input.shape
        if four_h % 4 != 0:
            raise DomainError("gate weight row count must be a multiple of 4")
        h = four_h // 4
        if self.W_hidden.shape != (four_h, h):
            raise DomainError(f"W_hidden shape {self.W_hidden.shape} != {(four_h, h)}")
        if self.b_input.shape != (four_h,) or self.b_hidden.shape != (four_h,):
            raise DomainError("bias shapes inconsistent with gate weights")

    @property
    def input_size(self) -> int:
        return self.W_input.shape[1]

    @property
    def hidden_size(self) -> int:
        return self.W_input.shape[0] // 4

    def parameters(self) -> list[np.ndarray]:
        return [self.W_input, self.W_hidden, self.b_input, self.b_hidden]


@dataclass
class FcLayerParams:
    """One fully-connected layer: y = act(W x + b)."""

    weights: np.ndarray  # (out, in)
    bias: np.ndarray     # (out,)
    activation: str = "tanh"  # "tanh" | "identity"

    def __post_init__(self):
        if self.activation not in ("tanh", "identity"):
            raise DomainError(f"unknown activation {self.activation!r}")
        if self.bias.shape != (self.weights.shape[0],):
            raise DomainError("bias shape inconsistent with weights")

    def parameters(self) -> list[np.ndarray]:
        return [self.weights, self.bias]


@dataclass
class Network:
    """Ordered LSTM layers followed by an FC stack ending in an affine map."""

    lstm_layers: list[LstmLayerParams]
    fc_layers: list[FcLayerParams]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.fc_layers and self.fc_layers[-1].activation != "identity":
            raise DomainError("final FC layer must be affine (identity activation)")

    @property
    def input_size(self) -> int:
        return self.lstm_layers[0].input_size if self.lstm_layers else 0

    @property
    def output_size(self) -> int:
        return self.fc_layers[-1].weights.shape[0] if self.fc_layers else 0

    def parameters(self) -> list[np.ndarray]:
        out = []
        for layer in self.lstm_layers:
            out.extend(layer.parameters())
        for layer in self.fc_layers:
            out.extend(layer.parameters())
        return out

    def copy(self) -> "Network":
        return Network(
            lstm_layers=[LstmLayerParams(l.W_input.copy(), l.W_hidden.copy(),
                                         l.b_input.copy(), l.b_hidden.copy())
                         for l in self.lstm_layers],
            fc_layers=[FcLayerParams(l.weights.copy(), l.bias.copy(), l.activation)
                       for l in self.fc_layers],
            meta=dict(self.meta))

    def set_parameters(self, arrays: list[np.ndarray]) -> None:
        own = self.parameters()
        if len(own) != len(arrays):
            raise DomainError("parameter list length mismatch")
        for dst, src in zip(own, arrays):
            if dst.shape != src.shape:
                raise DomainError("parameter shape mismatch")
            dst[...] = src


def init_network(input_size: int, hidden_sizes: list[int], fc_count: int,
                 fc_width: int, output_size: int, seed: int = 0) -> Network:
    """Seeded uniform [-1/sqrt(H), 1/sqrt(H)] initialization per layer.

    ``fc_count`` hidden tanh FC layers of ``fc_width`` units sit between the
    last LSTM hidden state and the affine output layer.
    """
    if input_size < 1 or output_size < 1 or not hidden_sizes:
        raise DomainError("need input_size, output_size >= 1 and one LSTM layer")
    rng = np.random.default_rng(seed)
    lstm_layers = []
    prev = input_size
    for H in hidden_sizes:
        bound = 1.0 / np.sqrt(H)
        lstm_layers.append(LstmLayerParams(
            W_input=rng.uniform(-bound, bound, (4 * H, prev)),
            W_hidden=rng.uniform(-bound, bound, (4 * H, H)),
            b_input=rng.uniform(-bound, bound, 4 * H),
            b_hidden=rng.uniform(-bound, bound, 4 * H)))
        prev = H
    fc_layers = []
    for _ in range(fc_count):
        bound = 1.0 / np.sqrt(prev)
        fc_layers.append(FcLayerParams(
            weights=rng.uniform(-bound, bound, (fc_width, prev)),
            bias=rng.uniform(-bound, bound, fc_width),
            activation="tanh"))
        prev = fc_width
    bound = 1.0 / np.sqrt(prev)
    fc_layers.append(FcLayerParams(
        weights=rng.uniform(-bound, bound, (output_size, prev)),
        bias=rng.uniform(-bound, bound, output_size),
        activation="identity"))
    return Network(lstm_layers=lstm_layers, fc_layers=fc_layers)


def lstm_forward(layer: LstmLayerParams, inputs: np.ndarray,
                 initial_state: tuple[np.ndarray, np.ndarray] | None = None,
                 cache: dict | None = None):
    """Run the gate recurrences over a batch of sequences.

    ``inputs`` is (B, n, input_size); returns (hidden sequence (B, n, H),
    (h_n, c_n)).  When ``cache`` is a dict it is filled with the
    intermediates needed for BPTT.
    """
    if inputs.ndim == 2:  # single sequence convenience
        hs, state = lstm_forward(layer, inputs[None], initial_state, cache)
        return hs[0], (state[0][0], state[1][0])
    B, n, r = inputs.shape
    H = layer.hidden_size
    if r != layer.input_size:
        raise DomainError(f"input feature count {r} != layer input size {layer.input_size}")
    if initial_state is None:
        h = np.zeros((B, H))
        c = np.zeros((B, H))
    else:
        h, c = (np.broadcast_to(s, (B, H)).copy() for s in initial_state)
    bias = layer.b_input + layer.b_hidden
    x_proj = inputs @ layer.W_input.T + bias  # (B, n, 4H)
    hs = np.empty((B, n, H))
    keep = cache is not None
    if keep:
        gates_c = np.empty((B, n, 4 * H))
        c_seq = np.empty((B, n, H))
        tanh_c = np.empty((B, n, H))
        c_prev_seq = np.empty((B, n, H))
    for t in range(n):
        a = x_proj[:, t] + h @ layer.W_hidden.T
        i = sigmoid(a[:, :H])
        f = sigmoid(a[:, H:2 * H])
        g = np.tanh(a[:, 2 * H:3 * H])
        o = sigmoid(a[:, 3 * H:])
        if keep:
            c_prev_seq[:, t] = c
        c = f * c + i * g
        tc = np.tanh(c)
        h = o * tc
        hs[:, t] = h
        if keep:
            gates_c[:, t, :H] = i
            gates_c[:, t, H:2 * H] = f
            gates_c[:, t, 2 * H:3 * H] = g
            gates_c[:, t, 3 * H:] = o
            c_seq[:, t] = c
            tanh_c[:, t] = tc
    if keep:
        cache.update(inputs=inputs, hs=hs, gates=gates_c, c=c_seq,
                     tanh_c=tanh_c, c_prev=c_prev_seq)
    return hs, (h, c)


def _lstm_backward(layer: LstmLayerParams, cache: dict,
                   dh_seq: np.ndarray) -> tuple[list[np.ndarray], np.ndarray]:
    """BPTT through one layer given per-step hidden-state gradients.

    Returns ([dW_input, dW_hidden, db_input, db_hidden], dx sequence).
    """
    inputs, hs = cache["inputs"], cache["hs"]
    gates, tanh_c, c_prev = cache["gates"], cache["tanh_c"], cache["c_prev"]
    B, n, H = hs.shape
    dW_x = np.zeros_like(layer.W_input)
    dW_h = np.zeros_like(layer.W_hidden)
    db = np.zeros_like(layer.b_input)
    dx = np.empty_like(inputs)
    dh_rec = np.zeros((B, H))
    dc_rec = np.zeros((B, H))
    da = np.empty((B, 4 * H))
    for t in range(n - 1, -1, -1):
        dh = dh_seq[:, t] + dh_rec
        i = gates[:, t, :H]
        f = gates[:, t, H:2 * H]
        g = gates[:, t, 2 * H:3 * H]
        o = gates[:, t, 3 * H:]
        tc = tanh_c[:, t]
        dc = dh * o * (1.0 - tc**2) + dc_rec
        da[:, :H] = dc * g * i * (1.0 - i)
        da[:, H:2 * H] = dc * c_prev[:, t] * f * (1.0 - f)
        da[:, 2 * H:3 * H] = dc * i * (1.0 - g**2)
        da[:, 3 * H:] = dh * tc * o * (1.0 - o)
        dW_x += da.T @ inputs[:, t]
        h_prev = hs[:, t - 1] if t > 0 else np.zeros((B, H))
        dW_h += da.T @ h_prev
        db += da.sum(axis=0)
        dx[:, t] = da @ layer.W_input
        dh_rec = da @ layer.W_hidden
        dc_rec = dc * f
    # b_input and b_hidden enter every gate as a sum: identical gradients
    return [dW_x, dW_h, db, db.copy()], dx


def forward(net: Network, X: np.ndarray, caches: list | None = None) -> np.ndarray:
    """Predict a batch: X (B, n, r) or a single window (n, r) -> (B, m) / (m,)."""
    single = X.ndim == 2
    x = X[None] if single else X
    if x.shape[2] != net.input_size:
        raise DomainError(f"feature count {x.shape[2]} != network input size "
                          f"{net.input_size}")
    for layer in net.lstm_layers:
        cache = {} if caches is not None else None
        x, _ = lstm_forward(layer, x, cache=cache)
        if caches is not None:
            caches.append(cache)
    a = x[:, -1]  # last hidden state of the last LSTM layer
    for layer in net.fc_layers:
        z = a @ layer.weights.T + layer.bias
        a = np.tanh(z) if layer.activation == "tanh" else z
        if caches is not None:
            caches.append(a)
    return a[0] if single else a


def mse_loss(pred: np.ndarray, truth: np.ndarray) -> float:
    """Mean of squared differences over every element."""
    pred, truth = np.asarray(pred), np.asarray(truth)
    if pred.shape != truth.shape:
        raise DomainError(f"shape mismatch: {pred.shape} vs {truth.shape}")
    return float(np.mean((pred - truth) ** 2))


def backward(net: Network, X: np.ndarray, Y: np.ndarray
             ) -> tuple[float, list[np.ndarray]]:
    """Loss and exact gradients of batch-mean MSE for a batch of windows.

    X is (B, n, r), Y is (B, m).  The gradient list mirrors
    ``net.parameters()`` order.
    """
    if X.ndim != 3 or Y.ndim != 2 or X.shape[0] != Y.shape[0]:
        raise DomainError("expected X (B, n, r) and Y (B, m) with equal B")
    if X.shape[0] == 0:
        raise DomainError("empty batch")
    caches: list = []
    pred = forward(net, X, caches=caches)
    if not np.all(np.isfinite(pred)):
        raise NumericalError("non-finite activations in forward pass")
    B, m = pred.shape
    loss = mse_loss(pred, Y)

    lstm_caches = caches[:len(net.lstm_layers)]
    fc_acts = caches[len(net.lstm_layers):]
    h_last = lstm_caches[-1]["hs"][:, -1]

    d = 2.0 * (pred - Y) / (B * m)
    fc_grads: list[list[np.ndarray]] = []
    for k in range(len(net.fc_layers) - 1, -1, -1):
        layer = net.fc_layers[k]
        a_out = fc_acts[k]
        if layer.activation == "tanh":
            d = d * (1.0 - a_out**2)
        a_in = fc_acts[k - 1] if k > 0 else h_last
        fc_grads.append([d.T @ a_in, d.sum(axis=0)])
        d = d @ layer.weights
    fc_grads.reverse()

    # gradient reaches the last LSTM layer only at the final time step
    n = X.shape[1]
    H_top = net.lstm_layers[-1].hidden_size
    dh_seq = np.zeros((B, n, H_top))
    dh_seq[:, -1] = d
    lstm_grads: list[list[np.ndarray]] = []
    for k in range(len(net.lstm_layers) - 1, -1, -1):
        grads_k, dx = _lstm_backward(net.lstm_layers[k], lstm_caches[k], dh_seq)
        lstm_grads.append(grads_k)
        dh_seq = dx
    lstm_grads.reverse()

    flat: list[np.ndarray] = []
    for g in lstm_grads:
        flat.extend(g)
    for g in fc_grads:
        flat.extend(g)
    return loss, flat


def count_params(net: Network) -> int:
    """4(H r + H^2 + 2H) per LSTM layer, out*in + out per FC layer."""
    return int(sum(p.size for p in net.parameters()))


def architecture(net: Network) -> dict:
    return {
        "input_size": net.input_size,
        "hidden_sizes": [l.hidden_size for l in net.lstm_layers],
        "fc": [{"out": l.weights.shape[0], "in": l.weights.shape[1],
                "activation": l.activation} for l in net.fc_layers],
        "output_size": net.output_size,
    }


def save_checkpoint(net: Network, path) -> None:
    """Self-describing JSON checkpoint, round-trip exact at 64-bit."""
    doc = {
        "format_version": CHECKPOINT_VERSION,
        "architecture": architecture(net),
        "param_count": count_params(net),
        "meta": net.meta,
        "lstm_layers": [{
            "W_input": l.W_input.tolist(), "W_hidden": l.W_hidden.tolist(),
            "b_input": l.b_input.tolist(), "b_hidden": l.b_hidden.tolist(),
        } for l in net.lstm_layers],
        "fc_layers": [{
            "weights": l.weights.tolist(), "bias": l.bias.tolist(),
            "activation": l.activation,
        } for l in net.fc_layers],
    }
    Path(path).write_text(json.dumps(doc))


def load_checkpoint(path) -> Network:
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"cannot read checkpoint {path}: {exc}") from exc
    if doc.get("format_version") != CHECKPOINT_VERSION:
        raise DomainError(f"unsupported checkpoint version {doc.get('format_version')}")
    try:
        lstm_layers = [LstmLayerParams(
            W_input=np.array(l["W_input"], dtype=np.float64),
            W_hidden=np.array(l["W_hidden"], dtype=np.float64),
            b_input=np.array(l["b_input"], dtype=np.float64),
            b_hidden=np.array(l["b_hidden"], dtype=np.float64),
        ) for l in doc["lstm_layers"]]
        fc_layers = [FcLayerParams(
            weights=np.array(l["weights"], dtype=np.float64),
            bias=np.array(l["bias"], dtype=np.float64),
            activation=l["activation"],
        ) for l in doc["fc_layers"]]
    except (KeyError, ValueError) as exc:
        raise DomainError(f"malformed checkpoint {path}: {exc}") from exc
    net = Network(lstm_layers=lstm_layers, fc_layers=fc_layers,
                  meta=doc.get("meta", {}))
    if count_params(net) != doc["param_count"]:
        raise DomainError(
            f"checkpoint declares {doc['param_count']} parameters, "
            f"found {count_params(net)}")
    return net
