"""ReLU networks stored as explicit tuples of affine layers.

A network is evaluated as T_L(relu(T_{L-1}(... relu(T_1 x)))) with
T_l x = A_l x + b_l.  Networks are immutable: the weight arrays are copied
on construction and marked read-only, so the size statistics computed from
them cannot drift after a certificate has been issued.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class InputShapeError(ValueError):
    """Raised when an input point does not match the network's input width."""


def _frozen(a, ndim: int) -> np.ndarray:
    arr = np.array(a, dtype=np.float64, copy=True, ndmin=ndim)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Layer:
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        A = _frozen(self.A, 2)
        b = _frozen(self.b, 1)
        if A.shape[0] != b.shape[0]:
            raise ValueError(f"A has {A.shape[0]} rows but b has {b.shape[0]} entries")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape

    def apply(self, h: np.ndarray) -> np.ndarray:
        return h @ self.A.T + self.b


@dataclass(frozen=True, eq=False)
class Network:
    layers: tuple[Layer, ...]

    def __post_init__(self):
        layers = tuple(self.layers)
        if not layers:
            raise ValueError("a network needs at least one layer")
        for prev, nxt in zip(layers, layers[1:]):
            if nxt.A.shape[1] != prev.A.shape[0]:
                raise ValueError(
                    f"layer chaining broken: {prev.A.shape} followed by {nxt.A.shape}"
                )
        object.__setattr__(self, "layers", layers)

    @classmethod
    def from_pairs(cls, pairs) -> "Network":
        return cls(tuple(Layer(A, b) for A, b in pairs))

    @property
    def depth(self) -> int:
        return len(self.layers)

    @property
    def d_in(self) -> int:
        return self.layers[0].A.shape[1]

    @property
    def d_out(self) -> int:
        return self.layers[-1].A.shape[0]

    @property
    def architecture(self) -> tuple[int, ...]:
        return (self.d_in,) + tuple(layer.A.shape[0] for layer in self.layers)

    @property
    def n_weights(self) -> int:
        # exact nonzero count, no tolerance
        return int(sum(np.count_nonzero(l.A) + np.count_nonzero(l.b) for l in self.layers))

    @property
    def weight_sup(self) -> float:
        return float(max(max(np.max(np.abs(l.A), initial=0.0), np.max(np.abs(l.b), initial=0.0))
                         for l in self.layers))

    def __call__(self, x):
        return realize(self, x)

    def scaled_output(self, factor: float) -> "Network":
        """Same network with the last affine map multiplied by `factor`."""
        last = self.layers[-1]
        return Network(self.layers[:-1] + (Layer(factor * last.A, factor * last.b),))


class NetworkStats(NamedTuple):
    L: int
    W: int
    weight_sup: float
    d_in: int
    d_out: int


def realize(net: Network, x) -> np.ndarray:
    """Evaluate the realization at one point (shape (d_in,)) or a batch (k, d_in)."""
    h = np.asarray(x, dtype=np.float64)
    single = h.ndim <= 1
    if h.ndim == 0:
        h = h.reshape(1)
    if single:
        h = h[None, :]
    if h.ndim != 2 or h.shape[1] != net.d_in:
        raise InputShapeError(f"network expects inputs of width {net.d_in}, got shape {np.shape(x)}")
    for layer in net.layers[:-1]:
        h = np.maximum(layer.apply(h), 0.0)
    out = net.layers[-1].apply(h)
    return out[0] if single else out


def stats(net: Network) -> NetworkStats:
    return NetworkStats(net.depth, net.n_weights, net.weight_sup, net.d_in, net.d_out)


def check_membership(net: Network, n: int, growths, d: int | None = None) -> bool:
    """True iff the network lies in the budget set with n weights.

    `growths` must expose `ell(n)` and `c(n)` (see approx_space.GrowthPair).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if net.d_out != 1:
        return False
    if d is not None and net.d_in != d:
        return False
    return (net.n_weights <= n
            and net.depth <= growths.ell(n)
            and net.weight_sup <= growths.c(n))


def zero_network(d: int) -> Network:
    return Network((Layer(np.zeros((1, d)), np.zeros(1)),))


def to_json(net: Network) -> str:
    # json renders floats with repr(), which round-trips binary64 exactly
    doc = {"layers": [{"A": l.A.tolist(), "b": l.b.tolist()} for l in net.layers]}
    return json.dumps(doc, separators=(",", ":"))


def from_json(text: str) -> Network:
    doc = json.loads(text)
    return Network(tuple(Layer(np.array(l["A"], dtype=np.float64).reshape(len(l["b"]), -1), l["b"])
                         for l in doc["layers"]))
