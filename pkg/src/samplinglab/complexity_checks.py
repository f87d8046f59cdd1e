"""Brute-force and Monte Carlo oracles for the auxiliary quantitative lemmas.

Everything here is small enough to enumerate exhaustively, so most functions
come in pairs: a fast route used by the library and a slow independent route
used by the tests to cross-check it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, NamedTuple

import numpy as np

from .algorithms import make_rng
from .approx_space import GrowthPair
from .relu_net import Layer, Network, check_membership

WEIGHT_GRID = (-1.0, -0.5, 0.0, 0.5, 1.0)


class CheckRow(NamedTuple):
    """One CSV row of a verification suite."""

    check: str
    params: str
    value: float
    bound: float
    passed: bool


# ---------------------------------------------------------------------------
# Lipschitz constants


class LipschitzEstimate(NamedTuple):
    l1: float
    linf: float


def empirical_lipschitz(net: Network, probes: int = 1000, seed: int = 0) -> LipschitzEstimate:
    """Largest observed difference quotient over random probe pairs in [0,1]^d.

    Half the pairs are far apart, half are tiny perturbations, which is what
    finds the steepest linear piece of a ReLU network.
    """
    if probes < 1:
        raise ValueError("probes must be >= 1")
    rng = make_rng(seed, 0)
    d = net.d_in
    X = rng.random((probes, d))
    far = rng.random((probes, d))
    near = np.clip(X + rng.normal(scale=1e-4, size=(probes, d)), 0.0, 1.0)
    Y = np.where((np.arange(probes) % 2 == 0)[:, None], far, near)
    diff = np.abs(net(X)[:, 0] - net(Y)[:, 0])
    dx = X - Y
    l1 = np.abs(dx).sum(axis=1)
    linf = np.abs(dx).max(axis=1)
    ok = l1 > 0
    if not ok.any():
        return LipschitzEstimate(0.0, 0.0)
    return LipschitzEstimate(float(np.max(diff[ok] / l1[ok])), float(np.max(diff[ok] / linf[ok])))


def random_budget_network(n: int, growths: GrowthPair, d: int, rng: np.random.Generator,
                          max_width: int = 4) -> Network:
    """A random network with at most n nonzero weights, depth <= ell(n), entries in [-c(n), c(n)]."""
    L_max = int(min(growths.ell(n), 8))
    C = float(growths.c(n))
    L = int(rng.integers(1, L_max + 1))
    widths = [d] + [int(rng.integers(1, max_width + 1)) for _ in range(L - 1)] + [1]
    shapes = [(widths[i + 1], widths[i]) for i in range(L)]
    total = sum(r * c + r for r, c in shapes)
    keep = np.zeros(total, dtype=bool)
    keep[rng.choice(total, size=min(n, total), replace=False)] = True
    vals = np.where(keep, rng.uniform(-C, C, size=total), 0.0)
    layers, pos = [], 0
    for r, c in shapes:
        A = vals[pos:pos + r * c].reshape(r, c)
        pos += r * c
        b = vals[pos:pos + r]
        pos += r
        layers.append(Layer(A, b))
    net = Network(tuple(layers))
    assert check_membership(net, n, growths, d)
    return net


# ---------------------------------------------------------------------------
# covering numbers


@dataclass
class FunctionClassSample:
    """A finite list of functions evaluated once on a fixed grid of [0,1]^d."""

    functions: list
    descriptor: dict
    grid: np.ndarray
    values: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=np.float64)
        if self.grid.ndim == 1:
            self.grid = self.grid[:, None]
        rows = [np.asarray(f(self.grid), dtype=np.float64).reshape(-1) for f in self.functions]
        self.values = np.array(rows).reshape(len(rows), len(self.grid))

    def __len__(self):
        return len(self.functions)

    @classmethod
    def from_functions(cls, functions, grid_size: int = 257, **descriptor):
        grid = np.linspace(0.0, 1.0, grid_size)[:, None]
        return cls(list(functions), dict(descriptor, kind="explicit"), grid)

    @classmethod
    def enumerate_networks(cls, n: int, growths: GrowthPair, hidden: int | None = None,
                           weights=WEIGHT_GRID, grid_size: int = 257) -> "FunctionClassSample":
        """All depth-2 networks 1 -> k -> 1 with entries in c(n)*weights and at most n nonzeros.

        Networks with identical grid values are merged, since the covering
        number only sees the functions.
        """
        if growths.ell(n) < 2:
            raise ValueError("enumeration uses depth 2, so ell(n) must be >= 2")
        k = hidden if hidden is not None else n
        C = float(growths.c(n))
        grid = np.linspace(0.0, 1.0, grid_size)[:, None]
        nonzero = [C * w for w in weights if w != 0]
        n_params = 3 * k + 1
        seen, nets = set(), []
        for v in _sparse_vectors(n_params, n, nonzero):
            net = Network((Layer(v[:k, None], v[k:2 * k]), Layer(v[None, 2 * k:3 * k], v[3 * k:])))
            key = np.round(net(grid)[:, 0], 12).tobytes()
            if key in seen:
                continue
            seen.add(key)
            nets.append(net)
        desc = {"kind": "network-grid", "n": n, "hidden": k, "c": C, "weights": list(weights)}
        return cls(nets, desc, grid)


def _sparse_vectors(size: int, max_nonzero: int, values):
    """All vectors of length `size` with at most `max_nonzero` entries drawn from `values`."""
    for s in range(min(size, max_nonzero) + 1):
        for pos in itertools.combinations(range(size), s):
            for vals in itertools.product(values, repeat=s):
                v = np.zeros(size)
                v[list(pos)] = vals
                yield v


def empirical_covering(sample: FunctionClassSample, eps: float) -> int:
    """Size of a greedy eps-net in the sup norm over the sample grid."""
    if not 0 < eps <= 1:
        raise ValueError("eps must lie in (0, 1]")
    V = sample.values
    uncovered = np.ones(len(V), dtype=bool)
    count = 0
    while uncovered.any():
        i = int(np.argmax(uncovered))
        dist = np.max(np.abs(V - V[i]), axis=1)
        uncovered &= dist > eps
        count += 1
    return count


def covering_bound(eps: float, n: int, growths: GrowthPair, d: int) -> float:
    """(44/eps * ell^4 * (c max(d, n))^(1 + ell))^n, returned as a float (may be inf)."""
    L, C = growths.ell(n), growths.c(n)
    log_val = n * (math.log(44 / eps) + 4 * math.log(L) + (1 + L) * math.log(C * max(d, n)))
    return math.exp(log_val) if log_val < 700 else math.inf


# ---------------------------------------------------------------------------
# VC dimension


@dataclass
class ShatterInstance:
    """Indicator class {1[g > lam]} restricted to a finite point pool."""

    pool: np.ndarray
    functions: list
    lam: float = 0.0
    labels: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.pool = np.asarray(self.pool, dtype=np.float64)
        if self.pool.ndim == 1:
            self.pool = self.pool[:, None]
        rows = [np.asarray(g(self.pool), dtype=np.float64).reshape(-1) > self.lam
                for g in self.functions]
        self.labels = np.array(rows, dtype=bool).reshape(len(rows), len(self.pool))

    @property
    def patterns(self) -> set[int]:
        """Distinct label vectors over the pool, packed into integers."""
        weights = 1 << np.arange(len(self.pool), dtype=np.int64)
        return set(int(v) for v in (self.labels.astype(np.int64) @ weights))

    def dichotomy_count(self) -> int:
        return len(self.patterns)


def vc_bruteforce(inst: ShatterInstance, max_points: int = 20) -> int:
    """Largest m such that some m-subset of the pool is shattered."""
    P = len(inst.pool)
    if P > max_points:
        raise ValueError(f"pool of {P} points exceeds max_points={max_points}")
    patterns = inst.patterns
    best = 0
    for m in range(1, P + 1):
        found = False
        for S in itertools.combinations(range(P), m):
            mask = sum(1 << i for i in S)
            if len({p & mask for p in patterns}) == 1 << m:
                found = True
                break
        if not found:
            break  # subsets of shattered sets are shattered
        best = m
    return best


def vc_by_dichotomies(inst: ShatterInstance) -> int:
    """Independent oracle: test every subset and every target labeling explicitly."""
    P = len(inst.pool)
    best = 0
    for m in range(1, P + 1):
        for S in itertools.combinations(range(P), m):
            sub = inst.labels[:, list(S)]
            if all(np.any(np.all(sub == np.array(t, dtype=bool), axis=1))
                   for t in itertools.product((False, True), repeat=m)):
                best = m
                break
    return best


def threshold_class(ts) -> list[Callable]:
    return [lambda X, t=t: X[:, 0] - t for t in ts]


def constant_class(values) -> list[Callable]:
    return [lambda X, c=c: np.full(len(X), c) for c in values]


def single_relu_class(weights=WEIGHT_GRID) -> list[Network]:
    """x -> a relu(w x + b) + c over the weight grid: depth 2, one hidden neuron."""
    nets = []
    for w, b, a, c in itertools.product(weights, repeat=4):
        nets.append(Network((Layer([[w]], [b]), Layer([[a]], [c]))))
    return nets


def vc_bound(n: int, C_prime: float = 100.0, sigma: float = 0.0) -> float:
    """C' n (ln(e n))^(sigma + 2)."""
    return C_prime * n * math.log(math.e * n) ** (sigma + 2)


# ---------------------------------------------------------------------------
# Khintchine, random subsets, cube intersections


def khintchine_average_exact(n: int) -> Fraction:
    """2^-n sum over sign vectors of |sum nu_i|, via binomial weights."""
    if not 1 <= n <= 24:
        raise ValueError("n must lie in 1..24")
    return Fraction(sum(math.comb(n, j) * abs(n - 2 * j) for j in range(n + 1)), 2 ** n)


def khintchine_average(n: int) -> float:
    return float(khintchine_average_exact(n))


def khintchine_enumerated(n: int) -> float:
    """Oracle: literal loop over all sign vectors."""
    return math.fsum(abs(sum(s)) for s in itertools.product((1, -1), repeat=n)) / 2 ** n


def khintchine_lower_holds(n: int) -> bool:
    """avg >= sqrt(n/2), checked exactly as avg^2 >= n/2."""
    a = khintchine_average_exact(n)
    return a * a >= Fraction(n, 2)


def subset_bound(k: int) -> float:
    return 0.25 * math.sqrt(k)


def subset_average(m: int, k: int, I) -> float:
    """Average over k-subsets J of {1..2m} of |J cap I|^(1/2), by hypergeometric summation."""
    I = set(int(i) for i in I)
    N = 2 * m
    if not 1 <= k <= N:
        raise ValueError("need 1 <= k <= 2m")
    if not I <= set(range(1, N + 1)):
        raise ValueError("I must be a subset of 1..2m")
    a = len(I)
    total = sum(math.comb(a, j) * math.comb(N - a, k - j) * math.sqrt(j)
                for j in range(max(0, k - (N - a)), min(a, k) + 1))
    return total / math.comb(N, k)


def subset_average_enumerated(m: int, k: int, I) -> float:
    """Oracle: literal loop over all k-subsets."""
    I = set(int(i) for i in I)
    vals = [math.sqrt(len(I.intersection(J))) for J in itertools.combinations(range(1, 2 * m + 1), k)]
    return math.fsum(vals) / len(vals)


class CubeVolume(NamedTuple):
    estimate: float
    sigma: float
    exact: float
    bound: float


def cube_intersection_volume(d: int, T: float, x, mc_samples: int = 10_000, seed: int = 0) -> CubeVolume:
    """Volume of [0,1]^d cap (x + [-T,T]^d): Monte Carlo, closed form and the 2^-d T^d bound."""
    if not 0 < T <= 1:
        raise ValueError("T must lie in (0, 1]")
    x = np.asarray(x, dtype=np.float64).reshape(d)
    exact = float(np.prod(np.minimum(1.0, x + T) - np.maximum(0.0, x - T)))
    U = make_rng(seed, d).random((mc_samples, d))
    inside = np.all(np.abs(U - x) <= T, axis=1).astype(np.float64)
    est = float(inside.mean())
    sigma = float(inside.std(ddof=1) / math.sqrt(mc_samples)) if mc_samples > 1 else 0.0
    return CubeVolume(est, sigma, exact, 2.0 ** (-d) * T ** d)
