"""Depth/coefficient growth calculus and the closed-form rate exponents.

Extended reals are plain floats with ``math.inf``; every formula below spells
out its x/(x + inf) = 0 limit instead of relying on nan propagation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

INF = math.inf


class UnsupportedGrowthError(ValueError):
    pass


class InfeasibleWitnessError(ValueError):
    pass


@dataclass(frozen=True)
class DepthGrowth:
    """ell(n): constant, log-power  max(2, floor(scale * ln(2n)^power)), or unbounded."""

    kind: str = "constant"
    L: int = 3
    scale: float = 1.0
    power: float = 0.0
    cap: int | None = None

    def __post_init__(self):
        if self.kind not in ("constant", "log_power", "unbounded"):
            raise UnsupportedGrowthError(f"unknown depth growth kind {self.kind!r}")
        if self.kind == "constant" and self.L < 2:
            raise ValueError("constant depth growth needs L >= 2")

    @classmethod
    def constant(cls, L: int) -> "DepthGrowth":
        return cls("constant", L=L)

    @classmethod
    def log_power(cls, scale: float, power: float, cap: int | None = None) -> "DepthGrowth":
        return cls("log_power", scale=scale, power=power, cap=cap)

    @classmethod
    def unbounded(cls) -> "DepthGrowth":
        return cls("unbounded")

    def __call__(self, n: int) -> float:
        if self.kind == "constant":
            return self.L
        if self.kind == "unbounded":
            return INF
        val = max(2, math.floor(self.scale * math.log(2 * n) ** self.power))
        return min(val, self.cap) if self.cap is not None else val

    def first_reaching(self, L: int, n_max: int = 10**12) -> int:
        """Smallest n with ell(n) >= L."""
        if self(1) >= L:
            return 1
        if self.kind != "log_power" or ell_star(self) < L:
            raise InfeasibleWitnessError(f"depth {L} is never reached")
        lo, hi = 1, 2
        while self(hi) < L:
            lo, hi = hi, hi * 2
            if hi > n_max:
                raise InfeasibleWitnessError(f"depth {L} not reached below {n_max}")
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self(mid) >= L:
                hi = mid
            else:
                lo = mid
        return hi

    def to_dict(self) -> dict:
        return {"kind": self.kind, "L": self.L, "scale": self.scale,
                "power": self.power, "cap": self.cap}


@dataclass(frozen=True)
class CoeffGrowth:
    """c(n) = ceil(s * n^theta * ln(2n)^kappa), or unbounded."""

    kind: str = "poly_log"
    s: float = 1.0
    theta: float = 0.0
    kappa: float = 0.0

    def __post_init__(self):
        if self.kind not in ("poly_log", "unbounded"):
            raise UnsupportedGrowthError(f"unknown coefficient growth kind {self.kind!r}")
        if self.kind == "poly_log" and (self.s <= 0 or self.theta < 0):
            raise ValueError("poly_log growth needs s > 0 and theta >= 0")

    @classmethod
    def poly_log(cls, s: float = 1.0, theta: float = 0.0, kappa: float = 0.0) -> "CoeffGrowth":
        return cls("poly_log", s=s, theta=theta, kappa=kappa)

    @classmethod
    def unbounded(cls) -> "CoeffGrowth":
        return cls("unbounded")

    def __call__(self, n: int) -> float:
        if self.kind == "unbounded":
            return INF
        return float(math.ceil(self.s * n ** self.theta * math.log(2 * n) ** self.kappa))

    def values(self, n: np.ndarray) -> np.ndarray:
        n = np.asarray(n, dtype=np.float64)
        if self.kind == "unbounded":
            return np.full(n.shape, INF)
        return np.ceil(self.s * n ** self.theta * np.log(2 * n) ** self.kappa)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "s": self.s, "theta": self.theta, "kappa": self.kappa}


@dataclass(frozen=True)
class GrowthPair:
    depth: DepthGrowth = field(default_factory=DepthGrowth)
    coeff: CoeffGrowth = field(default_factory=CoeffGrowth)

    def ell(self, n: int) -> float:
        return self.depth(n)

    def c(self, n: int) -> float:
        return self.coeff(n)

    def to_dict(self) -> dict:
        return {"depth": self.depth.to_dict(), "coeff": self.coeff.to_dict()}

    @classmethod
    def from_dict(cls, doc: dict) -> "GrowthPair":
        return cls(DepthGrowth(**doc["depth"]), CoeffGrowth(**doc["coeff"]))


@dataclass(frozen=True)
class SpaceParams:
    d: int
    alpha: float
    growths: GrowthPair

    def __post_init__(self):
        if self.d < 1 or self.alpha <= 0:
            raise ValueError("need d >= 1 and alpha > 0")

    @property
    def ell_star(self) -> float:
        return ell_star(self.growths.depth)

    @property
    def gammas(self) -> tuple[float, float]:
        return gamma_closed_form(self.growths)


@dataclass(frozen=True)
class RateInterval:
    lower: float
    upper: float
    problem: str
    regime: str
    certified: bool = True

    def __post_init__(self):
        if not self.lower <= self.upper:
            raise ValueError(f"empty rate interval [{self.lower}, {self.upper}]")


def ell_star(depth: DepthGrowth) -> float:
    if depth.kind == "constant":
        return depth.L
    if depth.kind == "unbounded":
        return INF
    if depth.cap is not None:
        return depth.cap
    if depth.power > 0:
        return INF
    return max(2, math.floor(depth.scale))


def gamma_closed_form(growths: GrowthPair) -> tuple[float, float]:
    """(gamma_flat, gamma_sharp) for parametric growths."""
    ls = ell_star(growths.depth)
    if growths.coeff.kind == "unbounded" or ls == INF:
        return INF, INF
    if growths.coeff.kind != "poly_log":
        raise UnsupportedGrowthError(growths.coeff.kind)
    g = growths.coeff.theta * ls + ls // 2
    return g, g


def _ratio_is_bounded(log_ratio: np.ndarray) -> bool:
    # Bounded on 1..n_max means the running max has stopped growing: nothing
    # beyond sqrt(n_max) beats what was seen on [n_max^(1/4), sqrt(n_max)].
    # The split is geometric because ceil() in c(n) makes the ratio a sawtooth
    # with teeth in log scale, and the lowest n are skipped because the first
    # ceil steps of c(n) dominate there.
    split = max(2, int(math.isqrt(len(log_ratio))))
    start = min(int(math.isqrt(split)), split - 1)
    return bool(np.max(log_ratio[split:]) <= np.max(log_ratio[start:split]) + 1e-12)


def gamma_defining_check(growths: GrowthPair, gamma: float, side: str = "flat",
                         n_max: int = 10**6) -> bool:
    """Numerically test the defining inequality of gamma_flat / gamma_sharp on n <= n_max.

    flat:  some depth L <= ell* admits n^gamma <= C c(n)^L n^floor(L/2).
    sharp: every depth L <= ell* admits c(n)^L n^floor(L/2) <= C n^gamma.
    A constant C exists on a finite range trivially, so "admits" means the
    ratio sequence has stopped growing by the end of the range.
    """
    if side not in ("flat", "sharp"):
        raise ValueError(side)
    if gamma <= 0 and side == "flat":
        return True
    ls = ell_star(growths.depth)
    if growths.coeff.kind == "unbounded":
        return side == "flat"
    n = np.arange(1, n_max + 1, dtype=np.float64)
    log_n = np.log(n)
    log_c = np.log(growths.coeff.values(n))
    if side == "flat":
        top = int(min(ls, math.ceil(2 * gamma) + 2))
        return any(_ratio_is_bounded(gamma * log_n - L * log_c - (L // 2) * log_n)
                   for L in range(1, top + 1))
    if ls == INF:
        return False
    return all(_ratio_is_bounded(L * log_c + (L // 2) * log_n - gamma * log_n)
               for L in range(1, int(ls) + 1))


@dataclass(frozen=True)
class Witness:
    """Depth L, constant C1 and threshold n0 with n^gamma <= C1 c(n)^L n^floor(L/2), L <= ell(n0)."""

    L: int
    C1: float
    n0: int


def derive_witness(growths: GrowthPair, gamma: float, min_depth: int = 2,
                   depth: int | None = None, n_scan: int = 10**6) -> Witness:
    """Numbers for the existence statement behind gamma < gamma_flat.

    C1 is the max of the ratio over n <= n_scan joined with an analytic bound
    on the tail, where the ratio is dominated by s^-L n^-e ln(2n)^(-kappa L).
    """
    g_flat, _ = gamma_closed_form(growths)
    if not gamma < g_flat:
        raise InfeasibleWitnessError(f"gamma={gamma} is not below gamma_flat={g_flat}")
    ls = ell_star(growths.depth)
    if ls < min_depth:
        raise InfeasibleWitnessError(f"ell*={ls} is below the required depth {min_depth}")
    coeff = growths.coeff
    if depth is None:
        theta = coeff.theta if coeff.kind == "poly_log" else INF
        depth = min_depth
        while not (theta * depth + depth // 2 > gamma):
            depth += 1
        if depth > ls:
            depth = int(ls)
    if not min_depth <= depth <= ls:
        raise InfeasibleWitnessError(f"depth {depth} outside [{min_depth}, {ls}]")
    L = depth
    n0 = growths.depth.first_reaching(L)
    if coeff.kind == "unbounded":
        return Witness(L, 1.0, n0)
    e = coeff.theta * L + L // 2 - gamma
    if e <= 0:
        raise InfeasibleWitnessError(f"depth {L} cannot dominate n^{gamma}")
    n = np.arange(1, n_scan + 1, dtype=np.float64)
    log_ratio = gamma * np.log(n) - L * np.log(coeff.values(n)) - (L // 2) * np.log(n)
    head = float(np.exp(np.max(log_ratio)))
    # tail envelope g(n) = s^-L n^-e ln(2n)^(-kappa L) peaks at ln(2n) = -kappa L / e
    n_star = float(n_scan)
    if coeff.kappa < 0:
        n_star = max(n_star, 0.5 * math.exp(-coeff.kappa * L / e))
    tail = coeff.s ** (-L) * n_star ** (-e) * math.log(2 * n_star) ** (-coeff.kappa * L)
    return Witness(L, max(head, tail), n0)


def lipschitz_bound(n: int, growths: GrowthPair, d: int) -> tuple[float, float]:
    """(l1-domain bound, l_inf-domain bound) = (C^L n^floor(L/2), d C^L n^floor(L/2))."""
    L, C = growths.ell(n), growths.c(n)
    if math.isinf(L) or math.isinf(C):
        raise ValueError("lipschitz bound needs finite ell(n) and c(n)")
    b = C ** L * n ** (int(L) // 2)
    return float(b), float(d * b)


def _frac(a: float, g: float) -> float:
    """a / (a + g) with the g = inf limit 0."""
    return 0.0 if math.isinf(g) else a / (a + g)


def beta_star_uniform(p: SpaceParams) -> RateInterval:
    g_flat, g_sharp = p.gammas
    ls = p.ell_star
    lower = _frac(p.alpha, g_sharp) / p.d
    upper = _frac(p.alpha, g_flat) / p.d
    # the hardness side is only proven for ell* >= 3
    return RateInterval(lower, upper, "uniform", "det", certified=ls >= 3)


def l2_upper(alpha: float, g: float) -> float:
    if math.isinf(g):
        return min(0.5, alpha)
    if alpha + g < 2:
        return 2 * alpha / (alpha + g)
    if alpha <= 0.5:
        return alpha
    if alpha <= g:
        return 0.5 + (alpha - 0.5) / (alpha + g - 1)
    return 0.5 + alpha / (alpha + g)


def l2_upper_min_form(alpha: float, g: float) -> float:
    """The same bound written as 1/2 + closed form of the first optimization lemma."""
    if math.isinf(g):
        return 0.5 + min(0.0, alpha - 0.5)
    if alpha + g < 2:
        return 0.5 + min(alpha / (alpha + g), 2 * alpha / (alpha + g) - 0.5)
    return 0.5 + min(alpha / (alpha + g), alpha - 0.5, (alpha - 0.5) / (alpha + g - 1))


def integral_det_upper(alpha: float, g: float) -> float:
    if math.isinf(g):
        return min(1.0, alpha)
    if alpha + g <= 2:
        return 2 * alpha / (alpha + g)
    if alpha <= 1:
        return alpha
    return 1 + (alpha - 1) / (alpha + g - 1)


def integral_det_upper_min_form(alpha: float, g: float) -> float:
    """1 + closed form of the second optimization lemma."""
    if math.isinf(g):
        return 1 + min(alpha - 1, 0.0)
    if alpha + g <= 2:
        return 2 * alpha / (alpha + g)
    return 1 + min(alpha - 1, (alpha - 1) / (alpha + g - 1))


def integral_mc_upper(alpha: float, g: float) -> float:
    if math.isinf(g):
        return min(1.0, 0.5 + alpha)
    if alpha + g < 2:
        return 0.5 + 2 * alpha / (alpha + g)
    if alpha <= 0.5:
        return 0.5 + alpha
    if alpha <= g:
        return 1 + (alpha - 0.5) / (alpha + g - 1)
    return 1 + alpha / (alpha + g)


def beta_star_l2(p: SpaceParams) -> RateInterval:
    g_flat, _ = p.gammas
    lower = max(1 / (2 + 2 / p.alpha), (p.alpha / 2) / (1 + p.alpha))
    return RateInterval(lower, l2_upper(p.alpha, g_flat), "l2", "det")


def beta_star_integration(p: SpaceParams, regime: str) -> RateInterval:
    g_flat, _ = p.gammas
    a = p.alpha
    if regime == "det":
        return RateInterval(a / (1 + 2 * a), integral_det_upper(a, g_flat), "integral_det", "det")
    if regime == "mc":
        return RateInterval(0.5 + (a / 2) / (1 + a), integral_mc_upper(a, g_flat), "integral_mc", "mc")
    raise ValueError(f"unknown regime {regime!r}")


def optimization_lemma_closed_form(gamma_flat: float, alpha: float, objective: str) -> float:
    g, a = gamma_flat, alpha
    if objective == "lemma1":
        if math.isinf(g):
            return min(0.0, a - 0.5)
        if a + g < 2:
            return min(a / (a + g), 2 * a / (a + g) - 0.5)
        return min(a / (a + g), a - 0.5, (a - 0.5) / (a + g - 1))
    if objective == "lemma2":
        if math.isinf(g):
            return min(a - 1, 0.0)
        if a + g <= 2:
            return 2 * a / (a + g) - 1
        return min(a - 1, (a - 1) / (a + g - 1))
    raise ValueError(objective)


def _objective(objective: str, alpha: float, gamma, theta, lam):
    if objective == "lemma1":
        return np.maximum(theta * (alpha - lam / 2), 1 + theta * (lam / 2 - gamma))
    return np.maximum(theta * (alpha - lam), 1 - theta * gamma)


def _inner_theta_min(objective: str, alpha: float, gamma, lam, theta_max: float):
    """Exact minimum over theta in (0, theta_hi] of the max of two affine pieces."""
    if objective == "lemma1":
        A, B = alpha - lam / 2, lam / 2 - gamma
    else:
        A, B = alpha - lam, -gamma
    with np.errstate(divide="ignore", invalid="ignore"):
        hi = np.minimum(theta_max, np.where(lam > 0, 1.0 / lam, np.inf))
        cross = np.where(A - B > 0, 1.0 / (A - B), np.inf)
    cands = [np.full(np.broadcast(A, B).shape, 1.0), np.maximum(hi * A, 1 + hi * B)]
    inside = (cross > 0) & (cross <= hi)
    cands.append(np.where(inside, cross * A, np.inf))
    return np.minimum.reduce(cands)


def optimization_lemma_oracle(gamma_flat: float, alpha: float, objective: str,
                              grid: int = 200, theta_max: float = 4.0) -> float:
    """Numeric infimum of the raw objective over gamma < gamma_flat, theta > 0,
    lambda in [0,1], theta*lambda <= 1.

    For fixed (gamma, lambda) the objective is a max of two affine functions of
    theta, so theta is minimized exactly.  The outer (gamma, lambda) box is
    scanned on a grid and polished with Nelder-Mead.  gamma ranges over
    [gamma_flat/2, gamma_flat] (closure of the open side) or, for
    gamma_flat = inf, over a log-spaced range up to 1e9.
    """
    if objective not in ("lemma1", "lemma2"):
        raise ValueError(objective)
    if math.isinf(gamma_flat):
        g_lo, g_hi = 1.0, 1e9
        gammas = np.geomspace(g_lo, g_hi, grid)
        theta_max = max(theta_max, 1.0)
    else:
        g_lo, g_hi = gamma_flat / 2, gamma_flat
        gammas = np.linspace(g_lo, g_hi, grid)
    lams = np.linspace(0.0, 1.0, grid)
    G, Lm = np.meshgrid(gammas, lams, indexing="ij")
    vals = _inner_theta_min(objective, alpha, G, Lm, theta_max)
    order = np.argsort(vals, axis=None)[:5]
    result = float(vals.flat[order[0]])

    def f(v):
        g = float(np.clip(v[0], g_lo, g_hi))
        lam = float(np.clip(v[1], 0.0, 1.0))
        return float(_inner_theta_min(objective, alpha, np.float64(g), np.float64(lam), theta_max))

    for flat in order:
        start = np.array([G.flat[flat], Lm.flat[flat]])
        res = minimize(f, start, method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 2000})
        result = min(result, float(res.fun))
    return result


def rates_table_rows(d: int, alpha: float, growths: GrowthPair) -> list[dict]:
    """All rate intervals for one parameter point, as flat dict rows."""
    p = SpaceParams(d, alpha, growths)
    g_flat, _ = p.gammas
    coeff = growths.coeff
    base = {
        "d": d, "alpha": alpha,
        "theta": coeff.theta if coeff.kind == "poly_log" else INF,
        "kappa": coeff.kappa if coeff.kind == "poly_log" else 0.0,
        "ell_star": p.ell_star, "gamma": g_flat,
    }
    intervals = [beta_star_uniform(p), beta_star_l2(p),
                 beta_star_integration(p, "det"), beta_star_integration(p, "mc")]
    problems = {"uniform": "uniform", "l2": "l2", "integral_det": "integral", "integral_mc": "integral"}
    return [dict(base, problem=problems[iv.problem], regime=iv.regime,
                 lower=iv.lower, upper=iv.upper) for iv in intervals]
