"""Hat and bump functions, their exact ReLU implementations, and unit-ball scalings.

The analytic functions come in two flavours: `PiecewiseLinear` profiles that
depend on the first coordinate only (hat sums), and `Bump` callables for the
d-dimensional plateau bump.  Both are cheap to evaluate; the networks built
here exist to certify that the same functions lie in the budget sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .approx_space import GrowthPair, Witness, derive_witness, ell_star
from .relu_net import InputShapeError, Network, check_membership


class InvalidDepthError(ValueError):
    pass


class FamilySizeError(ValueError):
    pass


def relu(x):
    return np.maximum(x, 0.0)


def lambda_eval(M: float, y: float, x) -> np.ndarray:
    """Hat of height 1 at y with half-width 1/M, written as the four-case formula."""
    if M <= 0:
        raise ValueError("M must be positive")
    x = np.asarray(x, dtype=np.float64)
    up = M * (x - y + 1.0 / M)
    down = -M * (x - y - 1.0 / M)
    out = np.where(x <= y - 1.0 / M, 0.0,
                   np.where(x <= y, up, np.where(x <= y + 1.0 / M, down, 0.0)))
    return out


def theta_clip(x):
    """relu(x) - relu(x - 1): identity on [0,1], clamped outside."""
    return relu(x) - relu(np.asarray(x, dtype=np.float64) - 1.0)


def as_points(X, d: int) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1 and d == 1:
        X = X[:, None]
    elif X.ndim == 1:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != d:
        raise InputShapeError(f"expected points of dimension {d}, got shape {np.shape(X)}")
    return X


def delta_eval(M: float, y, X) -> np.ndarray:
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    X = as_points(X, len(y))
    s = sum(lambda_eval(M, y[j], X[:, j]) for j in range(len(y)))
    return s - (len(y) - 1)


def vartheta_eval(M: float, y, X) -> np.ndarray:
    return theta_clip(delta_eval(M, y, X))


@dataclass(frozen=True)
class Hat1D:
    M: float
    y: float

    def __call__(self, x):
        return lambda_eval(self.M, self.y, x)

    @property
    def integral(self) -> float:
        return 1.0 / self.M

    @property
    def support(self) -> tuple[float, float]:
        return self.y - 1.0 / self.M, self.y + 1.0 / self.M


# ---------------------------------------------------------------------------
# function handles


class PiecewiseLinear:
    """Continuous piecewise-linear function of x_1, constant outside its knots."""

    def __init__(self, knots, values, d: int = 1):
        knots = np.asarray(knots, dtype=np.float64)
        values = np.asarray(values, dtype=np.float64)
        if knots.ndim != 1 or knots.shape != values.shape or len(knots) == 0:
            raise ValueError("knots and values must be matching nonempty 1-d arrays")
        if np.any(np.diff(knots) <= 0):
            raise ValueError("knots must be strictly increasing")
        self.knots = knots
        self.values = values
        self.d = d

    @classmethod
    def zero(cls, d: int = 1) -> "PiecewiseLinear":
        return cls([0.0], [0.0], d)

    @classmethod
    def constant(cls, c: float, d: int = 1) -> "PiecewiseLinear":
        return cls([0.0], [c], d)

    def at(self, t) -> np.ndarray:
        return np.interp(t, self.knots, self.values)

    def __call__(self, X):
        X = np.asarray(X, dtype=np.float64)
        t = X if X.ndim <= 1 and self.d == 1 else as_points(X, self.d)[:, 0]
        return self.at(t)

    def breakpoints(self, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
        inside = self.knots[(self.knots > lo) & (self.knots < hi)]
        return np.concatenate(([lo], inside, [hi]))

    def merged_breakpoints(self, other: "PiecewiseLinear | None") -> np.ndarray:
        pts = self.breakpoints()
        if other is not None:
            pts = np.union1d(pts, other.breakpoints())
        return pts

    def integral(self) -> float:
        """Exact integral over [0,1]^d."""
        t = self.breakpoints()
        v = self.at(t)
        return float(np.sum(0.5 * (v[1:] + v[:-1]) * np.diff(t)))

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.at(self.breakpoints()))))

    def l2_norm(self) -> float:
        return self.l2_distance(PiecewiseLinear.zero(self.d))

    def sup_distance(self, other: "PiecewiseLinear") -> float:
        t = self.merged_breakpoints(other)
        return float(np.max(np.abs(self.at(t) - other.at(t))))

    def l2_distance(self, other: "PiecewiseLinear") -> float:
        # the difference is linear between merged breakpoints, so the
        # three-term formula integrates its square exactly
        t = self.merged_breakpoints(other)
        u = self.at(t) - other.at(t)
        sq = np.diff(t) / 3.0 * (u[:-1] ** 2 + u[:-1] * u[1:] + u[1:] ** 2)
        return float(math.sqrt(max(np.sum(sq), 0.0)))

    def _combine(self, other: "PiecewiseLinear", a: float, b: float) -> "PiecewiseLinear":
        t = np.union1d(self.knots, other.knots)
        return PiecewiseLinear(t, a * self.at(t) + b * other.at(t), self.d)

    def __add__(self, other):
        return self._combine(other, 1.0, 1.0)

    def __sub__(self, other):
        return self._combine(other, 1.0, -1.0)

    def scale(self, a: float) -> "PiecewiseLinear":
        return PiecewiseLinear(self.knots, a * self.values, self.d)

    def __neg__(self):
        return self.scale(-1.0)

    def __repr__(self):
        return f"PiecewiseLinear({len(self.knots)} knots, d={self.d})"


def hat_sum_profile(M: float, centers, amplitudes, d: int = 1) -> PiecewiseLinear:
    """sum_i a_i Lambda_{M, c_i}(x_1) as an exact piecewise-linear profile."""
    centers = np.atleast_1d(np.asarray(centers, dtype=np.float64))
    amplitudes = np.atleast_1d(np.asarray(amplitudes, dtype=np.float64))
    if len(centers) == 0:
        return PiecewiseLinear.zero(d)
    knots = np.unique(np.concatenate((centers - 1.0 / M, centers, centers + 1.0 / M)))
    vals = np.zeros_like(knots)
    for c, a in zip(centers, amplitudes):
        vals += a * lambda_eval(M, c, knots)
    return PiecewiseLinear(knots, vals, d)


class Bump:
    """amplitude * vartheta_{M,y} as a function on R^d."""

    def __init__(self, M: float, y, amplitude: float = 1.0):
        self.M = float(M)
        self.y = np.atleast_1d(np.asarray(y, dtype=np.float64))
        self.amplitude = float(amplitude)
        self.d = len(self.y)

    def __call__(self, X):
        return self.amplitude * vartheta_eval(self.M, self.y, X)

    def support_box(self) -> tuple[np.ndarray, np.ndarray]:
        return self.y - 1.0 / self.M, self.y + 1.0 / self.M

    def sup_norm(self) -> float:
        return abs(self.amplitude)

    def kink_coordinates(self) -> list[np.ndarray]:
        return [np.array([c - 1.0 / self.M, c, c + 1.0 / self.M]) for c in self.y]

    def __repr__(self):
        return f"Bump(M={self.M}, y={self.y.tolist()}, amplitude={self.amplitude})"


# ---------------------------------------------------------------------------
# network constructions


@dataclass(frozen=True)
class HatSumSpec:
    M: float
    C: float
    L: int
    signs: tuple
    centers: tuple
    d: int = 1

    def __post_init__(self):
        object.__setattr__(self, "signs", tuple(float(s) for s in self.signs))
        object.__setattr__(self, "centers", tuple(float(c) for c in self.centers))
        if len(self.signs) != len(self.centers) or not self.signs:
            raise ValueError("need n >= 1 matching signs and centers")

    @property
    def n(self) -> int:
        return len(self.signs)

    @property
    def scale(self) -> float:
        return self.C ** self.L * self.n ** (self.L // 2) / (4 * self.M * self.n)

    def analytic(self, X) -> np.ndarray:
        X = as_points(X, self.d)
        return self.scale * sum(e * lambda_eval(self.M, y, X[:, 0])
                                for e, y in zip(self.signs, self.centers))

    def profile(self) -> PiecewiseLinear:
        return hat_sum_profile(self.M, self.centers, self.scale * np.array(self.signs), self.d)


def build_hat_sum_network(spec: HatSumSpec) -> Network:
    """Network of depth L realizing spec.scale * sum_i eps_i Lambda_{M,y_i}(x_1)."""
    L, C, M, n, d = spec.L, spec.C, spec.M, spec.n, spec.d
    if L < 2:
        raise InvalidDepthError("the hat-sum network needs L >= 2")
    if not (M >= 1 and C > 0):
        raise ValueError("need M >= 1 and C > 0")
    eps = np.array(spec.signs)
    y = np.array(spec.centers)
    if np.any(np.abs(eps) > 1) or np.any((y < 0) | (y > 1)):
        raise ValueError("signs must lie in [-1,1] and centers in [0,1]")

    A1 = np.zeros((3 * n, d))
    A1[:, 0] = C / 2
    b1 = (C / 2) * np.column_stack((-y + 1 / M, -y, -y - 1 / M)).ravel()
    A2_0 = (C / 2) * np.column_stack((eps, -2 * eps, eps)).ravel()[None, :]
    if L == 2:
        return Network.from_pairs([(A1, b1), (A2_0, [0.0])])
    A2 = np.vstack((A2_0, -A2_0))
    ones, zeros = np.ones(n), np.zeros(n)
    A = C * np.vstack((np.tile([1.0, 0.0], (n, 1)), np.tile([0.0, 1.0], (n, 1))))
    B = C * np.vstack((np.concatenate((ones, zeros)), np.concatenate((zeros, ones))))
    D = C * np.concatenate((ones, -ones))[None, :]
    E = np.array([[C, -C]])
    z2, z2n = np.zeros(2), np.zeros(2 * n)
    pairs = [(A1, b1), (A2, z2)]
    if L % 2 == 0:
        pairs += [(A, z2n), (B, z2)] * ((L - 4) // 2)
        pairs += [(A, z2n), (D, [0.0])]
    else:
        pairs += [(A, z2n), (B, z2)] * ((L - 3) // 2)
        pairs += [(E, [0.0])]
    return Network.from_pairs(pairs)


def multihat_scale(M: float, n: int, L: int, C: float) -> float:
    return C ** L * n ** (L // 2) / (4 * M)


def build_multihat_network(M: float, y, n: int, L: int, C: float) -> Network:
    """Network of depth L realizing multihat_scale(M,n,L,C) * vartheta_{M,y}."""
    if L <= 2:
        raise InvalidDepthError("the bump network needs at least two hidden layers (L >= 3)")
    y = np.atleast_1d(np.asarray(y, dtype=np.float64))
    d = len(y)
    if not (M >= 1 and C > 0 and n >= 1):
        raise ValueError("need M >= 1, C > 0, n >= 1")
    if np.any((y < 0) | (y > 1)):
        raise ValueError("center must lie in [0,1]^d")

    A1 = np.zeros((4 * n * d, d))
    b1 = np.zeros(4 * n * d)
    row1 = np.zeros(4 * n * d)
    row2 = np.zeros(4 * n * d)
    zeta = -(1 / M) * (d - 1) / d
    xi = -1 / M
    for j in range(d):
        o = 4 * n * j
        A1[o:o + 3 * n, j] = C / 2
        b1[o:o + 4 * n] = -(C / 2) * np.repeat([y[j] - 1 / M, y[j], y[j] + 1 / M, -1.0], n)
        row1[o:o + 4 * n] = (C / 2) * np.repeat([1.0, -2.0, 1.0, zeta], n)
        row2[o:o + 4 * n] = (C / 2) * np.repeat([1.0, -2.0, 1.0, xi], n)
    A2 = np.vstack((row1, row2))
    z2 = np.zeros(2)
    if L == 3:
        D = np.array([[C, -C]])
        return Network.from_pairs([(A1, b1), (A2, z2), (D, [0.0])])
    A3 = C * np.tile([1.0, -1.0], (n, 1))
    Arow = C * np.ones((1, n))
    Bcol = C * np.ones((n, 1))
    zn = np.zeros(n)
    pairs = [(A1, b1), (A2, z2), (A3, zn), (Arow, [0.0])]
    if L % 2 == 0:
        pairs += [(Bcol, zn), (Arow, [0.0])] * ((L - 4) // 2)
    else:
        pairs += [(Bcol, zn), (Arow, [0.0])] * ((L - 5) // 2)
        pairs += [(np.array([[C]]), [0.0])]
    return Network.from_pairs(pairs)


# ---------------------------------------------------------------------------
# unit-ball families


@dataclass(frozen=True)
class UnitBallConstants:
    alpha: float
    gamma: float
    theta: float
    lam: float
    sigma: float
    omega: float
    kappa: float
    witness: Witness
    C2: float
    C3: float

    def amplitude(self, m: int) -> float:
        return self.kappa * m ** self.omega


def derive_unit_ball_constants(alpha: float, gamma: float, theta: float, lam: float,
                               sigma: float, growths: GrowthPair | None = None,
                               depth: int | None = None,
                               witness: Witness | None = None) -> UnitBallConstants:
    """omega = min(-theta alpha, theta(gamma - lam) - 1) and kappa = 1/C3."""
    if not (alpha > 0 and theta > 0 and 0 <= lam <= 1 and theta * lam <= 1 + 1e-15):
        raise ValueError("need alpha > 0, theta > 0, lambda in [0,1], theta*lambda <= 1")
    if sigma < 2:
        raise ValueError("sigma must be >= 2")
    if witness is None:
        if growths is None:
            raise ValueError("need either growths or an explicit witness")
        witness = derive_witness(growths, gamma, min_depth=2, depth=depth)
    omega = min(-theta * alpha, theta * (gamma - lam) - 1)
    L, C1, n0 = witness.L, witness.C1, witness.n0
    C2 = 16 * sigma * C1
    C3 = max(1.0, C2, (2 * L + 8) ** alpha * (2 * n0 * sigma) ** alpha)
    return UnitBallConstants(alpha, gamma, theta, lam, sigma, omega, 1.0 / C3, witness, C2, C3)


def unit_ball_centers(m: int) -> np.ndarray:
    """z_j = 1/(4m) + (j-1)/(2m), j = 1..2m."""
    j = np.arange(1, 2 * m + 1)
    return 1.0 / (4 * m) + (j - 1) / (2.0 * m)


@dataclass(frozen=True)
class Certificate:
    """Budget bookkeeping showing that a scaled hat function has quasi-norm <= 1.

    `budget` is the weight count of the witnessing network; `threshold` is
    budget^alpha * sup-norm, which bounds t^alpha * distance for every t below
    the budget.
    """

    n: int
    depth: int
    C: float
    budget: int
    rescale: float
    threshold: float
    sup_norm: float
    coeff_limit: float
    depth_limit: float

    @property
    def valid(self) -> bool:
        return (self.rescale <= 1 + 1e-12
                and self.threshold <= 1 + 1e-12
                and self.sup_norm <= 1
                and self.C <= self.coeff_limit * (1 + 1e-12)
                and self.depth <= self.depth_limit)


def _minimal_coefficient(n: int, gamma: float, witness: Witness) -> float:
    L = witness.L
    return (n ** gamma / (witness.C1 * n ** (L // 2))) ** (1.0 / L)


@dataclass(eq=False)
class HatSumMember:
    """f = kappa m^omega sum_{j in J} nu_j Lambda_{4m, z_j}(x_1)."""

    consts: UnitBallConstants
    m: int
    J: tuple
    nu: tuple
    growths: GrowthPair
    d: int = 1

    @cached_property
    def function(self) -> PiecewiseLinear:
        z = unit_ball_centers(self.m)
        idx = np.array(self.J, dtype=int) - 1
        return hat_sum_profile(4 * self.m, z[idx], self.consts.amplitude(self.m) * np.array(self.nu), self.d)

    def __call__(self, X):
        return self.function(X)

    @property
    def M(self) -> int:
        return 4 * self.m

    def descriptor(self) -> dict:
        return {"m": self.m, "M": self.M, "kappa": self.consts.kappa, "omega": self.consts.omega,
                "J": list(self.J), "nu": list(self.nu)}

    def _padded(self) -> tuple[list, list]:
        k0 = math.ceil(self.m ** (self.consts.theta * self.consts.lam))
        J, nu = list(self.J), list(self.nu)
        extra = (j for j in range(1, 2 * self.m + 1) if j not in set(J))
        while len(J) < k0:
            J.append(next(extra))
            nu.append(0.0)
        return J, nu

    def _construction(self):
        c = self.consts
        J, nu = self._padded()
        N = c.witness.n0 * math.ceil(self.m ** ((1 - c.lam) * c.theta))
        n = N * len(J)
        C = _minimal_coefficient(n, c.gamma, c.witness)
        scale = C ** c.witness.L * n ** (c.witness.L // 2) * N / (4 * self.M * n)
        return J, nu, N, n, C, scale

    def certificate(self) -> Certificate:
        c = self.consts
        J, nu, N, n, C, scale = self._construction()
        L = c.witness.L
        budget = (2 * L + 8) * n
        amp = c.amplitude(self.m)
        sup0 = max((abs(v) for v in nu), default=0.0)
        return Certificate(
            n=n, depth=L, C=C, budget=budget,
            rescale=amp / scale,
            threshold=budget ** c.alpha * amp * sup0,
            sup_norm=amp * sup0,
            coeff_limit=self.growths.c(budget),
            depth_limit=self.growths.ell(budget),
        )

    def network(self) -> Network:
        c = self.consts
        J, nu, N, n, C, scale = self._construction()
        z = unit_ball_centers(self.m)
        eps = np.repeat(nu, N)
        ys = np.repeat(z[np.array(J) - 1], N)
        spec = HatSumSpec(self.M, C, c.witness.L, eps, ys, self.d)
        return build_hat_sum_network(spec).scaled_output(c.amplitude(self.m) / scale)

    def check_network(self) -> bool:
        cert = self.certificate()
        return check_membership(self.network(), cert.budget, self.growths, self.d)


def build_unit_ball_family(consts: UnitBallConstants, m: int, nu, J, growths: GrowthPair,
                           d: int = 1) -> HatSumMember:
    """Member f_{nu,J}; nu is indexed by hat (length 2m) or aligned with J."""
    J = tuple(sorted(int(j) for j in J))
    if any(j < 1 or j > 2 * m for j in J) or len(set(J)) != len(J):
        raise ValueError("J must be a set of indices in 1..2m")
    if len(J) > consts.sigma * m ** (consts.theta * consts.lam) + 1e-12:
        raise FamilySizeError(f"|J|={len(J)} exceeds sigma*m^(theta*lambda)")
    nu = list(nu)
    if len(nu) == 2 * m and len(J) != 2 * m:
        nu = [nu[j - 1] for j in J]
    if len(nu) != len(J):
        raise ValueError("nu must have length 2m or |J|")
    if any(abs(v) > 1 for v in nu):
        raise ValueError("signs must lie in [-1,1]")
    return HatSumMember(consts, m, J, tuple(float(v) for v in nu), growths, d)


@dataclass(frozen=True)
class BumpConstants:
    alpha: float
    gamma: float
    d: int
    kappa: float
    witness: Witness


def derive_bump_constants(d: int, alpha: float, gamma: float, growths: GrowthPair | None = None,
                          depth: int | None = None, witness: Witness | None = None) -> BumpConstants:
    """kappa = min((15(d+L))^-alpha (2 n0)^-alpha, 1/(4 C1)) for depth L >= 3."""
    if witness is None:
        if ell_star(growths.depth) < 3:
            raise InvalidDepthError("bump construction needs ell* >= 3")
        witness = derive_witness(growths, gamma, min_depth=3, depth=depth)
    if witness.L < 3:
        raise InvalidDepthError("bump construction needs depth >= 3")
    L, C1, n0 = witness.L, witness.C1, witness.n0
    kappa = min((15 * (d + L)) ** (-alpha) * (2 * n0) ** (-alpha), 1 / (4 * C1))
    return BumpConstants(alpha, gamma, d, kappa, witness)


@dataclass(eq=False)
class BumpMember:
    """g = kappa M^(-alpha/(alpha+gamma)) vartheta_{M,y}, optionally with a sign."""

    consts: BumpConstants
    M: float
    y: tuple
    growths: GrowthPair
    sign: float = 1.0

    @property
    def amplitude(self) -> float:
        c = self.consts
        return self.sign * c.kappa * self.M ** (-c.alpha / (c.alpha + c.gamma))

    @cached_property
    def function(self):
        if len(self.y) == 1:
            # in one dimension the bump is the hat itself
            return hat_sum_profile(self.M, self.y, [self.amplitude])
        return Bump(self.M, self.y, self.amplitude)

    def __call__(self, X):
        return self.function(X)

    def _construction(self):
        c = self.consts
        n = c.witness.n0 * math.ceil(self.M ** (1 / (c.alpha + c.gamma)))
        C = _minimal_coefficient(n, c.gamma, c.witness)
        return n, C, multihat_scale(self.M, n, c.witness.L, C)

    def certificate(self) -> Certificate:
        c = self.consts
        n, C, scale = self._construction()
        L = c.witness.L
        budget = 15 * (c.d + L) * n
        amp = abs(self.amplitude)
        return Certificate(n=n, depth=L, C=C, budget=budget, rescale=amp / scale,
                           threshold=budget ** c.alpha * amp, sup_norm=amp,
                           coeff_limit=self.growths.c(budget),
                           depth_limit=self.growths.ell(budget))

    def network(self) -> Network:
        n, C, scale = self._construction()
        net = build_multihat_network(self.M, self.y, n, self.consts.witness.L, C)
        return net.scaled_output(self.amplitude / scale)

    def check_network(self) -> bool:
        return check_membership(self.network(), self.certificate().budget, self.growths, self.consts.d)


def build_gMy(M: float, y, alpha: float, gamma: float, growths: GrowthPair,
              consts: BumpConstants | None = None, sign: float = 1.0) -> BumpMember:
    y = tuple(float(v) for v in np.atleast_1d(y))
    if M < 1:
        raise ValueError("M must be >= 1")
    if consts is None:
        consts = derive_bump_constants(len(y), alpha, gamma, growths)
    return BumpMember(consts, float(M), y, growths, sign)
