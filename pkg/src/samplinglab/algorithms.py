"""Sampling algorithms, finite hypothesis dictionaries and error evaluation.

An algorithm sees a target only through point evaluations.  Targets are
wrapped in `CountingFunction`, which refuses to answer more than the budget
allows, so a sample-budget violation is an exception rather than a silent
bias in the results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .hat_constructions import (PiecewiseLinear, as_points, build_unit_ball_family,
                                UnitBallConstants)

SOLUTION_MAPS = ("uniform", "l2", "integral")


class BudgetExceededError(RuntimeError):
    pass


class ConfigurationError(ValueError):
    pass


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """Philox (counter-based, 64-bit) stream for `seed`, split by `keys`."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.Philox(ss))


class CountingFunction:
    """Function handle that counts point evaluations and enforces a budget."""

    def __init__(self, f, d: int, budget: int | None = None):
        self.f = f
        self.d = d
        self.budget = budget
        self.count = 0

    def __call__(self, X):
        X = as_points(X, self.d)
        self.count += len(X)
        if self.budget is not None and self.count > self.budget:
            raise BudgetExceededError(f"{self.count} evaluations requested, budget is {self.budget}")
        return np.asarray(self.f(X), dtype=np.float64).reshape(len(X))


def exact_integral(f, d: int) -> float:
    """Integral over [0,1]^d: closed form for profiles, Gauss-Legendre otherwise."""
    f = getattr(f, "function", f)
    if isinstance(f, PiecewiseLinear):
        return f.integral()
    if callable(getattr(f, "integral", None)):
        return float(f.integral())
    return _quadrature(f, d)


def _gauss_grid(d: int, cells: int, order: int = 4):
    """Composite Gauss-Legendre nodes/weights on [0,1]^d."""
    xg, wg = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 1.0, cells + 1)
    h = np.diff(edges)
    nodes = (edges[:-1, None] + 0.5 * h[:, None] * (xg[None, :] + 1)).ravel()
    weights = (0.5 * h[:, None] * wg[None, :]).ravel()
    mesh = np.meshgrid(*([nodes] * d), indexing="ij")
    wmesh = np.meshgrid(*([weights] * d), indexing="ij")
    X = np.column_stack([g.ravel() for g in mesh])
    W = np.prod(np.column_stack([w.ravel() for w in wmesh]), axis=1)
    return X, W


def _quadrature(f, d: int) -> float:
    X, W = _gauss_grid(d, 256 if d == 1 else 48)
    return float(np.sum(f(X) * W))


# ---------------------------------------------------------------------------
# dictionaries


@dataclass
class HypothesisDictionary:
    """Finite list of candidate functions, each with sup norm <= 1."""

    elements: list
    name: str = "dictionary"
    d: int = 1
    certificates: list = field(default_factory=list)

    def __post_init__(self):
        if not self.elements:
            raise ConfigurationError("a hypothesis dictionary cannot be empty")
        for i, g in enumerate(self.elements):
            if hasattr(g, "sup_norm") and g.sup_norm() > 1 + 1e-12:
                raise ConfigurationError(f"dictionary element {i} has sup norm above 1")
        self._cache: dict = {}

    def __len__(self):
        return len(self.elements)

    def values(self, X) -> np.ndarray:
        """Matrix of element values, shape (len(dict), len(X)); cached per point set."""
        X = as_points(X, self.d)
        key = (X.shape, X.tobytes())
        if key not in self._cache:
            self._cache = {key: np.vstack([np.asarray(g(X), dtype=np.float64) for g in self.elements])}
        return self._cache[key]

    def integral(self, i: int) -> float:
        return exact_integral(self.elements[i], self.d)

    @property
    def integrals(self) -> np.ndarray:
        if "_integrals" not in self.__dict__:
            self._integrals = np.array([self.integral(i) for i in range(len(self))])
        return self._integrals


def hat_dictionary(consts: UnitBallConstants, m_dict: int, growths, d: int = 1) -> HypothesisDictionary:
    """Zero plus every signed single-hat member of the unit-ball family at resolution m_dict."""
    members = [build_unit_ball_family(consts, m_dict, [s], [j], growths, d)
               for j in range(1, 2 * m_dict + 1) for s in (1.0, -1.0)]
    elements = [PiecewiseLinear.zero(d)] + [mem.function for mem in members]
    certs = [None] + [mem.certificate() for mem in members]
    return HypothesisDictionary(elements, f"hats_{m_dict}", d, certs)


def interpolant_dictionary(candidates, n_knots: int, d: int = 1) -> HypothesisDictionary:
    """Zero plus the piecewise-linear interpolant of each candidate x_1-profile on n_knots nodes."""
    t = np.linspace(0.0, 1.0, n_knots)
    elements = [PiecewiseLinear.zero(d)]
    for g in candidates:
        elements.append(PiecewiseLinear(t, g(t), d))
    return HypothesisDictionary(elements, f"interp_{n_knots}", d)


# ---------------------------------------------------------------------------
# point sets and reconstructions


def grid_points(m: int, d: int, offset: float = 0.0) -> np.ndarray:
    """Tensor grid {(i + offset)/N}^d with N = floor(m^(1/d)), so at most m points."""
    N = int(math.floor(m ** (1.0 / d) + 1e-9))
    N = max(N, 1)
    axis = (np.arange(N) + offset) / N
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return np.column_stack([g.ravel() for g in mesh])


class GridInterpolant:
    """Multilinear interpolant of samples on a tensor grid, extended linearly."""

    def __init__(self, axis: np.ndarray, values: np.ndarray, d: int):
        self.d = d
        shape = (len(axis),) * d
        self._interp = RegularGridInterpolator((axis,) * d, values.reshape(shape),
                                               bounds_error=False, fill_value=None)
        self.axis = axis

    def __call__(self, X):
        return self._interp(as_points(X, self.d))

    def kink_coordinates(self) -> list[np.ndarray]:
        return [self.axis] * self.d


def interpolate_samples(X: np.ndarray, y: np.ndarray, d: int):
    """Piecewise-linear interpolant of tensor-grid samples (constant/linear extension)."""
    if d == 1:
        order = np.argsort(X[:, 0])
        return PiecewiseLinear(X[order, 0], y[order], 1)
    axis = np.unique(X[:, 0])
    if len(axis) < 2:
        return PiecewiseLinear.constant(float(y[0]), d)
    return GridInterpolant(axis, y, d)


def erm_fit(X, y, dictionary: HypothesisDictionary) -> tuple[int, object]:
    """Dictionary element minimizing the empirical squared loss; ties go to the lowest index."""
    if len(dictionary) == 0:
        raise ConfigurationError("empty dictionary")
    V = dictionary.values(X)
    loss = np.sum((V - np.asarray(y)[None, :]) ** 2, axis=1)
    i = int(np.argmin(loss))
    return i, dictionary.elements[i]


def grid_uniform_approximate(f, m: int, d: int, dictionary: HypothesisDictionary):
    """Sample f on {0, 1/N, .., (N-1)/N}^d and return the element with least max deviation."""
    if dictionary is None or len(dictionary) == 0:
        raise ConfigurationError("grid approximation needs a nonempty dictionary")
    X = grid_points(m, d)
    y = np.asarray(f(X))
    dev = np.max(np.abs(dictionary.values(X) - y[None, :]), axis=1)
    i = int(np.argmin(dev))
    return dictionary.elements[i]


def standard_mc_integrate(f, m: int, seed: int, d: int = 1) -> float:
    if m < 1:
        raise ValueError("m must be >= 1")
    X = make_rng(seed).random((m, d))
    return float(np.mean(f(X)))


def control_variate_mc_integrate(f, m: int, dictionary: HypothesisDictionary, seed: int,
                                 d: int = 1) -> float:
    """ERM fit g on floor(m/2) fixed points, then plain MC on f - g with fresh points, plus T(g)."""
    if m < 2:
        raise BudgetExceededError("control-variate MC needs m >= 2")
    half = m // 2
    X_fit = grid_points(half, d, offset=0.5)
    i, g = erm_fit(X_fit, f(X_fit), dictionary)
    Z = make_rng(seed).random((half, d))
    return float(np.mean(f(Z) - g(Z)) + dictionary.integrals[i])


def discrepancy(X, dictionary: HypothesisDictionary) -> float:
    """max over the dictionary of |empirical mean - exact integral|."""
    V = dictionary.values(X)
    return float(np.max(np.abs(V.mean(axis=1) - dictionary.integrals)))


def select_quadrature_points(m: int, d: int, dictionary: HypothesisDictionary, seed: int,
                             candidates: int = 64) -> tuple[np.ndarray, list[float]]:
    """Among `candidates` seeded uniform point sets keep the one of least dictionary discrepancy."""
    best, best_disc, discs = None, math.inf, []
    for c in range(candidates):
        X = make_rng(seed, c).random((m, d))
        disc = discrepancy(X, dictionary)
        discs.append(disc)
        if disc < best_disc:
            best, best_disc = X, disc
    return best, discs


def deterministic_vc_quadrature(f, m: int, seed: int, dictionary: HypothesisDictionary,
                                d: int = 1, candidates: int = 64) -> float:
    X, _ = select_quadrature_points(m, d, dictionary, seed, candidates)
    return float(np.mean(f(X)))


# ---------------------------------------------------------------------------
# algorithm objects used by the harness


class SamplingAlgorithm:
    """Base class: `run(f, seed)` returns a function handle or a real number."""

    name = "base"
    kind = "deterministic"

    def __init__(self, m: int, d: int, solution: str):
        if solution not in SOLUTION_MAPS:
            raise ConfigurationError(f"unknown solution map {solution!r}")
        if m < 1:
            raise ConfigurationError("budget m must be >= 1")
        self.m, self.d, self.solution = m, d, solution

    def points(self) -> np.ndarray | None:
        """Fixed sample points of a deterministic algorithm (None if it samples nothing)."""
        return None

    def run(self, f, seed: int = 0):
        raise NotImplementedError

    def __call__(self, f, seed: int = 0):
        counted = CountingFunction(f, self.d, self.m)
        out = self.run(counted, seed)
        return out

    def _zero_output(self):
        return 0.0 if self.solution == "integral" else PiecewiseLinear.zero(self.d)

    def describe(self) -> dict:
        return {"kind": self.name, "m": self.m, "d": self.d, "solution": self.solution}


class ZeroAlgorithm(SamplingAlgorithm):
    name = "zero"

    def run(self, f, seed=0):
        return self._zero_output()


class MidpointRule(SamplingAlgorithm):
    """Samples at cell midpoints; mean for integrals, interpolant otherwise."""

    name = "midpoint"

    def points(self):
        return grid_points(self.m, self.d, offset=0.5)

    def run(self, f, seed=0):
        X = self.points()
        y = f(X)
        if self.solution == "integral":
            return float(np.mean(y))
        return interpolate_samples(X, y, self.d)


class GridReconstruction(SamplingAlgorithm):
    """Dictionary element closest in max deviation on the grid {0..(N-1)/N}^d."""

    name = "grid"

    def __init__(self, m, d, solution, dictionary: HypothesisDictionary):
        super().__init__(m, d, solution)
        if dictionary is None or len(dictionary) == 0:
            raise ConfigurationError("grid reconstruction needs a dictionary")
        self.dictionary = dictionary

    def points(self):
        return grid_points(self.m, self.d)

    def run(self, f, seed=0):
        g = grid_uniform_approximate(f, self.m, self.d, self.dictionary)
        if self.solution == "integral":
            return exact_integral(g, self.d)
        return g


class ERMAlgorithm(SamplingAlgorithm):
    """Least-squares fit over the dictionary from midpoint-grid samples."""

    name = "erm"

    def __init__(self, m, d, solution, dictionary: HypothesisDictionary):
        super().__init__(m, d, solution)
        self.dictionary = dictionary

    def points(self):
        return grid_points(self.m, self.d, offset=0.5)

    def run(self, f, seed=0):
        X = self.points()
        i, g = erm_fit(X, f(X), self.dictionary)
        if self.solution == "integral":
            return float(self.dictionary.integrals[i])
        return g


class StandardMC(SamplingAlgorithm):
    name = "standard_mc"
    kind = "monte_carlo"

    def __init__(self, m, d, solution="integral"):
        super().__init__(m, d, solution)
        if solution != "integral":
            raise ConfigurationError("standard MC is an integration method")

    def run(self, f, seed=0):
        return standard_mc_integrate(f, self.m, seed, self.d)


class ControlVariateMC(SamplingAlgorithm):
    name = "control_variate_mc"
    kind = "monte_carlo"

    def __init__(self, m, d, solution, dictionary: HypothesisDictionary):
        super().__init__(m, d, solution)
        if solution != "integral":
            raise ConfigurationError("control-variate MC is an integration method")
        self.dictionary = dictionary

    def run(self, f, seed=0):
        return control_variate_mc_integrate(f, self.m, self.dictionary, seed, self.d)


class VCQuadrature(SamplingAlgorithm):
    """Empirical mean over the least-discrepancy point set among seeded candidates."""

    name = "vc_quadrature"

    def __init__(self, m, d, solution, dictionary: HypothesisDictionary, search_seed: int = 0,
                 candidates: int = 64):
        super().__init__(m, d, solution)
        if solution != "integral":
            raise ConfigurationError("VC quadrature is an integration method")
        self.dictionary = dictionary
        self.search_seed = search_seed
        self._X, _ = select_quadrature_points(m, d, dictionary, search_seed, candidates)

    def points(self):
        return self._X

    def run(self, f, seed=0):
        return float(np.mean(f(self._X)))


ALGORITHMS = {
    "zero": ZeroAlgorithm,
    "midpoint": MidpointRule,
    "grid": GridReconstruction,
    "erm": ERMAlgorithm,
    "standard_mc": StandardMC,
    "control_variate_mc": ControlVariateMC,
    "vc_quadrature": VCQuadrature,
}

NEEDS_DICTIONARY = {"grid", "erm", "control_variate_mc", "vc_quadrature"}


def make_algorithm(name: str, m: int, d: int, solution: str,
                   dictionary: HypothesisDictionary | None = None, **kwargs) -> SamplingAlgorithm:
    if name not in ALGORITHMS:
        raise ConfigurationError(f"unregistered algorithm {name!r}")
    cls = ALGORITHMS[name]
    if name in NEEDS_DICTIONARY:
        if dictionary is None:
            raise ConfigurationError(f"algorithm {name!r} needs a dictionary")
        return cls(m, d, solution, dictionary, **kwargs)
    return cls(m, d, solution, **kwargs)


# ---------------------------------------------------------------------------
# error evaluation


def _axis_grid(M: float, extra: list[np.ndarray], cap: int) -> np.ndarray:
    step = 1.0 / (8 * M)
    n_steps = int(round(1.0 / step))
    if n_steps + 1 > cap:
        n_steps = cap - 1
    pts = [np.linspace(0.0, 1.0, n_steps + 1)]
    pts += [e[(e >= 0) & (e <= 1)] for e in extra]
    grid = np.unique(np.concatenate(pts))
    mids = 0.5 * (grid[1:] + grid[:-1])
    return np.union1d(grid, mids)


def sup_error_on_grid(f, g, d: int, M: float, max_points: int = 2_000_000) -> float:
    """max |f - g| on a tensor grid of step 1/(8M) joined with all exposed kink coordinates."""
    kinks = [[] for _ in range(d)]
    for h in (f, g):
        h = getattr(h, "function", h)
        if hasattr(h, "kink_coordinates"):
            for j, k in enumerate(h.kink_coordinates()):
                kinks[j].append(np.asarray(k))
        elif isinstance(h, PiecewiseLinear):
            kinks[0].append(h.knots)
    cap = max(int(max_points ** (1.0 / d)), 3)
    axes = [_axis_grid(M, kinks[j], cap) for j in range(d)]
    best = 0.0
    # chunk along the first axis to bound memory
    rest = np.meshgrid(*axes[1:], indexing="ij") if d > 1 else []
    rest = np.column_stack([r.ravel() for r in rest]) if d > 1 else np.zeros((1, 0))
    for x0 in np.array_split(axes[0], max(1, len(axes[0]) * len(rest) // 200_000)):
        X = np.column_stack((np.repeat(x0, len(rest)), np.tile(rest, (len(x0), 1))))
        best = max(best, float(np.max(np.abs(f(X) - g(X)))))
    return best


def _as_function(h):
    return getattr(h, "function", h)


def error_norm(output, f, solution: str, d: int, M: float | None = None) -> float:
    """||S(f) - output|| in the norm of the solution space."""
    f = _as_function(f)
    if solution == "integral":
        return abs(exact_integral(f, d) - float(output))
    g = _as_function(output)
    both_pl = isinstance(f, PiecewiseLinear) and isinstance(g, PiecewiseLinear)
    if solution == "uniform":
        if both_pl:
            return f.sup_distance(g)
        return sup_error_on_grid(f, g, d, M if M is not None else 64.0)
    if solution == "l2":
        if both_pl:
            return f.l2_distance(g)
        X, W = _gauss_grid(d, 512 if d == 1 else 64)
        return float(math.sqrt(np.sum((f(X) - g(X)) ** 2 * W)))
    raise ConfigurationError(f"unknown solution map {solution!r}")


def evaluate_error(alg: SamplingAlgorithm, f, solution: str | None = None, seed: int = 0,
                   M: float | None = None) -> float:
    """Run `alg` on f under its budget and measure the error of the output."""
    solution = solution or alg.solution
    out = alg(_as_function(f), seed)
    return error_norm(out, f, solution, alg.d, M)
