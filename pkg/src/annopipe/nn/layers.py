"""Network building blocks shared by all processors."""

from __future__ import annotations

import numpy as np

from . import autodiff as ad
from .autodiff import Parameter, Tensor


class ParamSet:
    """Ordered registry of named parameters; the unit of optimization and IO."""

    def __init__(self):
        self._params: dict[str, Parameter] = {}

    def new(self, name: str, data) -> Parameter:
        if name in self._params:
            raise ValueError(f"duplicate parameter name {name!r}")
        param = Parameter(np.asarray(data, dtype=np.float64), name)
        self._params[name] = param
        return param

    def all(self) -> list[Parameter]:
        return list(self._params.values())

    def __getitem__(self, name: str) -> Parameter:
        return self._params[name]

    def __contains__(self, name: str) -> bool:
        return name in self._params

    def zero_grad(self):
        for param in self._params.values():
            param.zero_grad()

    def state_arrays(self) -> dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self._params.items()}

    def load_arrays(self, arrays: dict[str, np.ndarray]):
        for name, param in self._params.items():
            if name not in arrays:
                raise KeyError(f"missing parameter {name!r} in model file")
            if arrays[name].shape != param.data.shape:
                raise ValueError(
                    f"parameter {name!r} shape {arrays[name].shape} != {param.data.shape}")
            param.data = arrays[name].astype(np.float64)


def uniform_init(rng: np.random.Generator, shape, scale=0.1) -> np.ndarray:
    return rng.uniform(-scale, scale, size=shape)


def recurrent_init(rng: np.random.Generator, shape) -> np.ndarray:
    # scaled Gaussian; close enough to orthogonal at these sizes
    fan = shape[0]
    return rng.normal(0.0, 1.0 / np.sqrt(fan), size=shape)


class Embedding:
    def __init__(self, params: ParamSet, rng, name: str, vocab_size: int, dim: int):
        self.table = params.new(name, uniform_init(rng, (vocab_size, dim)))
        self.dim = dim

    def __call__(self, indices) -> Tensor:
        return ad.take_rows(self.table, indices)


class Linear:
    """y = x @ W + b with x rows of size n_in."""

    def __init__(self, params: ParamSet, rng, name: str, n_in: int, n_out: int):
        self.W = params.new(f"{name}.W", recurrent_init(rng, (n_in, n_out)))
        self.b = params.new(f"{name}.b", np.zeros(n_out))

    def __call__(self, x: Tensor) -> Tensor:
        return ad.add(ad.matmul(x, self.W), self.b)


class LSTM:
    """Single-direction LSTM; gates ordered input, forget, output, candidate.

    The forget-gate bias starts at 1.0.  ``run`` consumes a (n, d) Tensor and
    returns per-step hidden states as a (n, hidden) Tensor.
    """

    def __init__(self, params: ParamSet, rng, name: str, n_in: int, hidden: int):
        self.n_in = n_in
        self.hidden = hidden
        self.W = params.new(f"{name}.W", recurrent_init(rng, (n_in + hidden, 4 * hidden)))
        bias = np.zeros(4 * hidden)
        bias[hidden:2 * hidden] = 1.0
        self.b = params.new(f"{name}.b", bias)

    def initial_state(self):
        h = Tensor(np.zeros((1, self.hidden)))
        c = Tensor(np.zeros((1, self.hidden)))
        return h, c

    def step(self, x: Tensor, state):
        """One update; x is (1, n_in), state a pair of (1, hidden)."""
        h_prev, c_prev = state
        zipped = ad.concat([x, h_prev], axis=1)
        gates = ad.add(ad.matmul(zipped, self.W), self.b)
        H = self.hidden
        i = ad.sigmoid(ad.narrow(gates, 1, 0, H))
        f = ad.sigmoid(ad.narrow(gates, 1, H, H))
        o = ad.sigmoid(ad.narrow(gates, 1, 2 * H, H))
        g = ad.tanh(ad.narrow(gates, 1, 3 * H, H))
        c = ad.add(ad.mul(f, c_prev), ad.mul(i, g))
        h = ad.mul(o, ad.tanh(c))
        return h, c

    def run(self, xs: Tensor, reverse=False):
        """All hidden states over the sequence; returns ((n, hidden), final state)."""
        n = xs.data.shape[0]
        state = self.initial_state()
        outputs = [None] * n
        positions = range(n - 1, -1, -1) if reverse else range(n)
        for t in positions:
            x = ad.narrow(xs, 0, t, 1)
            state = self.step(x, state)
            outputs[t] = state[0]
        return ad.concat(outputs, axis=0), state


class BiLSTM:
    """Stacked bidirectional LSTM; output dim is 2*hidden per position."""

    def __init__(self, params: ParamSet, rng, name: str, n_in: int, hidden: int, layers: int = 1):
        self.layers = []
        for i in range(layers):
            dim = n_in if i == 0 else 2 * hidden
            self.layers.append((
                LSTM(params, rng, f"{name}.l{i}.fwd", dim, hidden),
                LSTM(params, rng, f"{name}.l{i}.bwd", dim, hidden),
            ))

    def __call__(self, xs: Tensor) -> Tensor:
        if xs.data.shape[0] == 0:
            raise ValueError("BiLSTM requires a non-empty sequence")
        out = xs
        for fwd, bwd in self.layers:
            hs_f, _ = fwd.run(out)
            hs_b, _ = bwd.run(out, reverse=True)
            out = ad.concat([hs_f, hs_b], axis=1)
        return out


class Biaffine:
    """score_k = x^T U_k y + W_k . [x; y] + b_k for k in range(n_out)."""

    def __init__(self, params: ParamSet, rng, name: str, d_x: int, d_y: int, n_out: int):
        self.n_out = n_out
        self.d_x = d_x
        self.d_y = d_y
        self.U = params.new(f"{name}.U", recurrent_init(rng, (n_out, d_x, d_y)))
        self.W = params.new(f"{name}.W", recurrent_init(rng, (d_x + d_y, n_out)))
        self.b = params.new(f"{name}.b", np.zeros(n_out))

    def __call__(self, x: Tensor, y: Tensor) -> Tensor:
        """Scores (n_out,) for vectors x (d_x,) and y (d_y,)."""
        if x.data.shape != (self.d_x,) or y.data.shape != (self.d_y,):
            raise ValueError(
                f"biaffine expects ({self.d_x},) and ({self.d_y},), "
                f"got {x.data.shape} and {y.data.shape}")
        terms = []
        for k in range(self.n_out):
            u_k = ad.reshape(ad.narrow(self.U, 0, k, 1), (self.d_x, self.d_y))
            bilinear = ad.matmul(ad.matmul(x, u_k), y)
            terms.append(ad.reshape(bilinear, (1,)))
        pair = ad.concat([x, y], axis=0)
        return ad.add(ad.add(ad.concat(terms, axis=0), ad.matmul(pair, self.W)), self.b)


class PairBilinear:
    """All-pairs single-class biaffine: rows of X against rows of Y.

    Returns (n_x, n_y) scores X U Y^T + X w_x 1^T + 1 (Y w_y)^T + b, the
    dense arc-scoring form.
    """

    def __init__(self, params: ParamSet, rng, name: str, d_x: int, d_y: int):
        self.U = params.new(f"{name}.U", recurrent_init(rng, (d_x, d_y)))
        self.w_x = params.new(f"{name}.w_x", uniform_init(rng, (d_x, 1)))
        self.w_y = params.new(f"{name}.w_y", uniform_init(rng, (d_y, 1)))
        self.b = params.new(f"{name}.b", np.zeros(1))

    def __call__(self, X: Tensor, Y: Tensor) -> Tensor:
        bilinear = ad.matmul(ad.matmul(X, self.U), transpose(Y))
        x_term = ad.matmul(X, self.w_x)  # (n_x, 1), broadcasts over columns
        y_term = transpose(ad.matmul(Y, self.w_y))  # (1, n_y)
        return ad.add(ad.add(ad.add(bilinear, x_term), y_term), self.b)


def transpose(a: Tensor) -> Tensor:
    def backward_fn(g):
        a.accumulate(g.T)

    return Tensor(a.data.T, (a,), backward_fn)


def attention(query: Tensor, keys: Tensor, values: Tensor, W: Parameter) -> tuple[Tensor, Tensor]:
    """Bilinear single-head attention.

    query (1, d_q), keys/values (n, d_k); scores = query W keys^T, weights a
    softmax over the n positions, context the weighted sum of values.
    Returns (context (1, d_k), weights (1, n)).
    """
    if keys.data.shape[0] < 1:
        raise ValueError("attention requires at least one key")
    scores = ad.matmul(ad.matmul(query, W), transpose(keys))
    weights = ad.softmax(scores, axis=-1)
    return ad.matmul(weights, values), weights
