"""Feed-forward networks, Adam, and the Huber loss."""

from __future__ import annotations

import numpy as np

from .autodiff import Tensor, where_const


class Mlp:
    """Fully connected network with a fixed activation on hidden layers.

    ``sizes`` lists layer widths input-first. The output layer is linear
    unless final_activation is set (used for shared policy trunks). Weights
    use the fan-in uniform scheme, seeded per network.
    """

    def __init__(self, sizes, seed, activation="tanh", final_activation=False,
                 dtype=np.float64):
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        if activation not in ("tanh", "relu"):
            raise ValueError(f"unknown activation {activation!r}")
        self.sizes = list(sizes)
        self.activation = activation
        self.final_activation = final_activation
        self.dtype = dtype
        rng = np.random.default_rng(seed)
        self.weights: list[Tensor] = []
        self.biases: list[Tensor] = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            w = rng.uniform(-bound, bound, (fan_in, fan_out)).astype(dtype)
            b = rng.uniform(-bound, bound, fan_out).astype(dtype)
            self.weights.append(Tensor(w, requires_grad=True))
            self.biases.append(Tensor(b, requires_grad=True))

    def parameters(self) -> list[Tensor]:
        params = []
        for w, b in zip(self.weights, self.biases):
            params.append(w)
            params.append(b)
        return params

    def parameter_count(self) -> int:
        return sum(p.data.size for p in self.parameters())

    def _act_np(self, x):
        return np.tanh(x) if self.activation == "tanh" else np.maximum(x, 0.0)

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Plain numpy forward pass (no gradient tape)."""
        x = np.asarray(x, dtype=self.dtype)
        squeeze = x.ndim == 1
        if squeeze:
            x = x[None, :]
        if x.shape[1] != self.sizes[0]:
            raise ValueError(f"input dim {x.shape[1]} != expected {self.sizes[0]}")
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            x = x @ w.data + b.data
            if i < last or self.final_activation:
                x = self._act_np(x)
        return x[0] if squeeze else x

    def forward_t(self, x) -> Tensor:
        """Tape-recording forward pass for training."""
        if not isinstance(x, Tensor):
            x = Tensor(np.asarray(x, dtype=self.dtype))
        if x.data.ndim != 2 or x.data.shape[1] != self.sizes[0]:
            raise ValueError(f"input shape {x.data.shape} != (batch, {self.sizes[0]})")
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            x = x @ w + b
            if i < last or self.final_activation:
                x = x.tanh() if self.activation == "tanh" else x.relu()
        return x

    def get_flat(self) -> np.ndarray:
        return np.concatenate([p.data.ravel() for p in self.parameters()])

    def set_flat(self, flat: np.ndarray) -> None:
        flat = np.asarray(flat, dtype=self.dtype)
        if flat.size != self.parameter_count():
            raise ValueError("flat parameter vector has wrong length")
        offset = 0
        for p in self.parameters():
            n = p.data.size
            p.data = flat[offset:offset + n].reshape(p.data.shape).astype(self.dtype)
            offset += n


class Adam:
    """Adam with bias correction over a list of parameter tensors."""

    def __init__(self, params: list[Tensor], lr=3e-4, betas=(0.9, 0.999), eps=1e-8):
        self.params = params
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in params]
        self.v = [np.zeros_like(p.data) for p in params]

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()

    def step(self) -> None:
        self.t += 1
        b1t = 1.0 - self.beta1 ** self.t
        b2t = 1.0 - self.beta2 ** self.t
        for i, p in enumerate(self.params):
            g = p.grad
            if g is None:
                continue
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g ** 2
            m_hat = self.m[i] / b1t
            v_hat = self.v[i] / b2t
            p.data = p.data - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def adam_step(params, grads, moments, lr=3e-4, betas=(0.9, 0.999), eps=1e-8):
    """One functional Adam update.

    ``moments`` is (m, v, t) from the previous call (zeros and 0 initially);
    returns (new_params, new_moments).
    """
    m, v, t = moments
    t = t + 1
    beta1, beta2 = betas
    new_params, new_m, new_v = [], [], []
    for p, g, mi, vi in zip(params, grads, m, v):
        mi = beta1 * mi + (1.0 - beta1) * g
        vi = beta2 * vi + (1.0 - beta2) * g ** 2
        m_hat = mi / (1.0 - beta1 ** t)
        v_hat = vi / (1.0 - beta2 ** t)
        new_params.append(p - lr * m_hat / (np.sqrt(v_hat) + eps))
        new_m.append(mi)
        new_v.append(vi)
    return new_params, (new_m, new_v, t)


def huber_loss(predicted, observed, delta: float = 1.0) -> Tensor:
    """Mean Huber loss: quadratic below delta, linear above.

    Accepts Tensors or arrays; returns a scalar Tensor so callers can
    backpropagate through the prediction.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    if not isinstance(predicted, Tensor):
        predicted = Tensor(np.asarray(predicted, dtype=float))
    if not isinstance(observed, Tensor):
        observed = Tensor(np.asarray(observed, dtype=float))
    if predicted.data.shape != observed.data.shape:
        raise ValueError("predicted and observed must have equal shapes")
    residual = predicted - observed
    absr = residual.abs()
    quadratic = residual.square() * 0.5
    linear = (absr - 0.5 * delta) * delta
    per_component = where_const(absr.data < delta, quadratic, linear)
    return per_component.mean()
