"""Command-line entry point: `samplinglab {verify, hardness, rates-table}`.

Every command reads an optional JSON config, writes CSV/JSON artifacts into
--out and exits with 0 (success), 1 (a check failed) or 2 (usage or config
error).  CSV files start with a single `# generated: <timestamp>` line; the
rest of every artifact depends only on the config and seed.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import complexity_checks as cc
from .adversary import (DeterministicIntegrationFamily, HatSumFamily, UniformFamily,
                        annihilation_set, average_case_error)
from .algorithms import (ALGORITHMS, NEEDS_DICTIONARY, ConfigurationError, hat_dictionary,
                         make_algorithm, make_rng)
from .approx_space import (CoeffGrowth, DepthGrowth, GrowthPair, SpaceParams,
                           optimization_lemma_closed_form,
                           optimization_lemma_oracle, rates_table_rows)
from .hat_constructions import (HatSumSpec, build_hat_sum_network, build_multihat_network,
                                derive_unit_ball_constants, multihat_scale, vartheta_eval)
from .rates import geometric_grid

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

CHECKS = ("hat_sum", "multihat", "khintchine", "subset", "cube", "annihilation",
          "lipschitz", "optimization", "vc", "covering")


class UsageError(Exception):
    pass


@dataclass
class LabConfig:
    d: int = 1
    alpha: float = 1.0
    depth: dict = field(default_factory=lambda: DepthGrowth.constant(3).to_dict())
    coeff: dict = field(default_factory=lambda: CoeffGrowth.poly_log(1.0, 0.0, 0.0).to_dict())
    gamma: float = 0.5
    family_theta: float = 1.0
    family_lambda: float = 0.5
    dictionary: str = "hats"
    dictionary_m: int = 4
    seed: int = 0
    m_grid: list = field(default_factory=lambda: [1, 2, 4])
    out: str = "out"
    problem: str = "integral"
    regime: str = "mc"
    algorithm: str = "zero"
    exact_limit: int = 100_000
    subsample: int = 1000
    checks: list = field(default_factory=lambda: list(CHECKS))
    tolerance: float = 1e-9
    rates_d: list = field(default_factory=lambda: [1, 2])
    rates_alpha: list = field(default_factory=lambda: [0.25, 0.5, 1.0, 2.0, 4.0, 1e6])
    rates_theta: list = field(default_factory=lambda: [0.0, 1.0])
    rates_kappa: list = field(default_factory=lambda: [0.0])
    rates_ell_star: list = field(default_factory=lambda: [2, 3, 5, "inf"])

    def __post_init__(self):
        self.validate()

    def validate(self):
        try:
            self.growths
        except (TypeError, ValueError) as exc:
            raise ConfigurationError(f"bad growth parameters: {exc}") from exc
        unknown = set(self.checks) - set(CHECKS)
        if unknown:
            raise ConfigurationError(f"unknown checks {sorted(unknown)}")
        if self.problem not in ("uniform", "l2", "integral"):
            raise ConfigurationError(f"unknown problem {self.problem!r}")
        if self.regime not in ("det", "mc"):
            raise ConfigurationError(f"unknown regime {self.regime!r}")
        if self.dictionary not in ("hats", "none"):
            raise ConfigurationError(f"unknown dictionary id {self.dictionary!r}")
        if self.algorithm not in ALGORITHMS:
            raise ConfigurationError(f"unregistered algorithm {self.algorithm!r}")
        if not self.m_grid or any(int(m) < 1 for m in self.m_grid):
            raise ConfigurationError("m_grid must be a nonempty list of positive integers")
        if self.tolerance < 0:
            raise ConfigurationError("tolerance must be >= 0")

    @property
    def growths(self) -> GrowthPair:
        return GrowthPair.from_dict({"depth": self.depth, "coeff": self.coeff})

    @property
    def space(self) -> SpaceParams:
        return SpaceParams(self.d, self.alpha, self.growths)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, doc: dict) -> "LabConfig":
        names = {f.name for f in fields(cls)}
        extra = set(doc) - names
        if extra:
            raise ConfigurationError(f"unknown config keys {sorted(extra)}")
        return cls(**doc)

    @classmethod
    def from_json(cls, text: str) -> "LabConfig":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# output helpers


def _timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "inf" if math.isinf(v) else repr(v)
    return str(v)


def write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    buf.write(f"# generated: {_timestamp()}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(buf.getvalue(), encoding="utf-8")


# ---------------------------------------------------------------------------
# verification suites


def _hat_sum_rows(rng, tol):
    rows = []
    for i in range(20):
        L = int(rng.choice([2, 3, 4, 5, 7, 8]))
        n = int(rng.integers(1, 9))
        M = float(rng.integers(1, 17))
        spec = HatSumSpec(M, float(rng.uniform(0.5, 1.5)), L, rng.uniform(-1, 1, n),
                          rng.uniform(0, 1, n))
        net = build_hat_sum_network(spec)
        X = np.concatenate((np.linspace(0, 1, int(16 * M) + 1), rng.random(500)))[:, None]
        dev = float(np.max(np.abs(net(X)[:, 0] - spec.analytic(X))))
        p = f"L={L};n={n};M={M:g}"
        rows.append(cc.CheckRow("hat_sum_deviation", p, dev, tol, dev <= tol))
        rows.append(cc.CheckRow("hat_sum_weights", p, net.n_weights, (2 * L + 8) * n,
                                net.n_weights <= (2 * L + 8) * n))
    return rows


def _multihat_rows(rng, tol):
    rows = []
    for i in range(10):
        d = int(rng.integers(1, 4))
        L = int(rng.integers(3, 7))
        n = int(rng.integers(1, 4))
        M = float(rng.integers(1, 9))
        C = float(rng.uniform(0.5, 1.5))
        y = rng.random(d)
        net = build_multihat_network(M, y, n, L, C)
        X = np.clip(y + rng.uniform(-1.5 / M, 1.5 / M, (2000, d)), 0, 1)
        dev = float(np.max(np.abs(net(X)[:, 0] - multihat_scale(M, n, L, C) * vartheta_eval(M, y, X))))
        p = f"d={d};L={L};n={n};M={M:g}"
        rows.append(cc.CheckRow("multihat_deviation", p, dev, tol, dev <= tol))
        rows.append(cc.CheckRow("multihat_weights", p, net.n_weights, 15 * (d + L) * n,
                                net.n_weights <= 15 * (d + L) * n))
    return rows


def _khintchine_rows(rng, tol):
    rows = []
    for n in range(1, 25):
        v = cc.khintchine_average(n)
        b = math.sqrt(n / 2)
        ok = cc.khintchine_lower_holds(n) or v >= b - tol
        rows.append(cc.CheckRow("khintchine", f"n={n}", v, b, ok and v <= math.sqrt(n) + tol))
    return rows


def _subset_rows(rng, tol):
    rows = []
    for m in range(1, 9):
        I = range(1, m + 1)
        for k in range(1, 2 * m + 1):
            v = cc.subset_average(m, k, I)
            b = cc.subset_bound(k)
            rows.append(cc.CheckRow("subset", f"m={m};k={k}", v, b, v >= b - tol))
    return rows


def _cube_rows(rng, tol):
    rows = []
    for i in range(50):
        d = int(rng.integers(1, 5))
        T = float(rng.uniform(0.01, 1.0))
        x = rng.random(d)
        cv = cc.cube_intersection_volume(d, T, x, 2000, seed=int(rng.integers(2**31)))
        p = f"d={d};T={T:.6f}"
        rows.append(cc.CheckRow("cube_exact", p, cv.exact, cv.bound, cv.exact >= cv.bound - tol))
        # binomial sd at the exact volume: a zero-hit sample has sample sd 0
        lim = 4 * math.sqrt(cv.exact * (1 - cv.exact) / 2000) + 1e-3
        rows.append(cc.CheckRow("cube_mc_4sigma", p, abs(cv.estimate - cv.exact), lim,
                                abs(cv.estimate - cv.exact) <= lim))
    return rows


def _annihilation_rows(rng, tol):
    rows = []
    for m in range(1, 33):
        worst = min(len(annihilation_set(rng.random((m, 1)), m)) for _ in range(30))
        rows.append(cc.CheckRow("annihilation", f"m={m}", worst, m, worst >= m))
    return rows


def _lipschitz_rows(rng, tol):
    rows = []
    g = GrowthPair(DepthGrowth.constant(4), CoeffGrowth.poly_log(2.0, 0.0, 0.0))
    for i in range(30):
        d = int(rng.integers(1, 4))
        n = int(rng.integers(1, 13))
        net = cc.random_budget_network(n, g, d, rng)
        est = cc.empirical_lipschitz(net, 400, seed=int(rng.integers(2**31)))
        C = g.c(n)
        bound = d * C ** net.depth * n ** (net.depth // 2)
        rows.append(cc.CheckRow("lipschitz", f"d={d};n={n};L={net.depth}", est.linf, bound,
                                est.linf <= bound * (1 + 1e-12)))
    return rows


def _optimization_rows(rng, tol):
    rows = []
    for i in range(3):
        a = float(rng.uniform(0.1, 4.0))
        g = float(rng.uniform(0.2, 6.0))
        for obj in ("lemma1", "lemma2"):
            cf = optimization_lemma_closed_form(g, a, obj)
            v = optimization_lemma_oracle(g, a, obj, grid=80)
            rows.append(cc.CheckRow(f"optimization_{obj}", f"alpha={a:.6f};gamma={g:.6f}", v, cf,
                                    cf - 1e-3 <= v <= cf + 1e-6))
    return rows


def _vc_rows(rng, tol):
    pool = np.linspace(0.05, 0.95, 10)
    thr = cc.vc_bruteforce(cc.ShatterInstance(pool, cc.threshold_class(np.linspace(0, 1, 21))))
    const = cc.vc_bruteforce(cc.ShatterInstance(pool, cc.constant_class([0.5])))
    inst = cc.ShatterInstance(np.linspace(0.1, 0.9, 8), cc.single_relu_class(), lam=0.25)
    relu, oracle = cc.vc_bruteforce(inst), cc.vc_by_dichotomies(inst)
    b = cc.vc_bound(4)
    return [cc.CheckRow("vc_thresholds", "pool=10", thr, 1, thr == 1),
            cc.CheckRow("vc_constants", "pool=10", const, 0, const == 0),
            cc.CheckRow("vc_relu_dual", "pool=8", relu, oracle, relu == oracle),
            cc.CheckRow("vc_relu_bound", "pool=8;n=4", relu, b, relu <= b)]


def _covering_rows(rng, tol):
    g = GrowthPair(DepthGrowth.constant(2), CoeffGrowth.poly_log(1.0, 0.0, 0.0))
    sample = cc.FunctionClassSample.enumerate_networks(2, g)
    v = cc.empirical_covering(sample, 0.25)
    b = cc.covering_bound(0.25, 2, g, 1)
    return [cc.CheckRow("covering", "n=2;eps=0.25", v, b, v <= b)]


SUITES = {
    "hat_sum": _hat_sum_rows, "multihat": _multihat_rows, "khintchine": _khintchine_rows,
    "subset": _subset_rows, "cube": _cube_rows, "annihilation": _annihilation_rows,
    "lipschitz": _lipschitz_rows, "optimization": _optimization_rows, "vc": _vc_rows,
    "covering": _covering_rows,
}


def run_checks(cfg: LabConfig) -> list[cc.CheckRow]:
    rows = []
    for i, name in enumerate(CHECKS):
        if name in cfg.checks:
            rows += SUITES[name](make_rng(cfg.seed, 100 + i), cfg.tolerance)
    return rows


def cmd_verify(cfg: LabConfig) -> int:
    rows = run_checks(cfg)
    write_csv(Path(cfg.out) / "verify.csv", cc.CheckRow._fields, rows)
    return EXIT_OK if all(r.passed for r in rows) else EXIT_FAIL


# ---------------------------------------------------------------------------
# hardness sweeps


def build_family(cfg: LabConfig, m: int, points=None):
    p = cfg.space
    if cfg.problem == "uniform":
        return UniformFamily(m, p, cfg.gamma)
    if cfg.problem == "integral" and cfg.regime == "det":
        return DeterministicIntegrationFamily(m, p, cfg.gamma, cfg.family_theta,
                                              cfg.family_lambda, points)
    regime = "det" if cfg.problem == "l2" else cfg.regime
    return HatSumFamily(m, p, cfg.gamma, cfg.family_theta, cfg.family_lambda, cfg.problem, regime)


def build_dictionary(cfg: LabConfig):
    if cfg.dictionary == "none":
        return None
    consts = derive_unit_ball_constants(cfg.alpha, cfg.gamma, cfg.family_theta,
                                        cfg.family_lambda, 2.0, cfg.growths)
    return hat_dictionary(consts, cfg.dictionary_m, cfg.growths, cfg.d)


def cmd_hardness(cfg: LabConfig) -> int:
    solution = {"uniform": "uniform", "l2": "l2", "integral": "integral"}[cfg.problem]
    dictionary = build_dictionary(cfg) if cfg.algorithm in NEEDS_DICTIONARY else None
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    tag = f"{cfg.problem}_{cfg.regime}_{cfg.algorithm}"
    rows = []
    for m in [int(v) for v in cfg.m_grid]:
        alg = make_algorithm(cfg.algorithm, m, cfg.d, solution, dictionary)
        fam = build_family(cfg, m, alg.points())
        rep = average_case_error(alg, fam, solution, cfg.exact_limit, cfg.subsample, cfg.seed)
        (out / f"hardness_{tag}_m{m}.json").write_text(
            json.dumps(rep.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
        rows.append((m, rep.measured, rep.bound, rep.stderr, fam.exponent, rep.exact,
                     rep.members_evaluated, rep.passed))
    write_csv(out / f"hardness_{tag}.csv",
              ("m", "measured", "bound", "stderr", "exponent", "exact", "members", "pass"), rows)
    return EXIT_OK if all(r[-1] for r in rows) else EXIT_FAIL


# ---------------------------------------------------------------------------
# rates table

RATES_HEADER = ("d", "alpha", "theta", "kappa", "ell_star", "gamma", "problem", "regime",
                "lower", "upper")


def _depth_for(ell_star) -> DepthGrowth:
    if ell_star in ("inf", None) or (isinstance(ell_star, float) and math.isinf(ell_star)):
        return DepthGrowth.unbounded()
    return DepthGrowth.constant(int(ell_star))


def rates_table(cfg: LabConfig) -> list[tuple]:
    rows = []
    for d in cfg.rates_d:
        for alpha in cfg.rates_alpha:
            for theta in cfg.rates_theta:
                for kappa in cfg.rates_kappa:
                    for ls in cfg.rates_ell_star:
                        g = GrowthPair(_depth_for(ls), CoeffGrowth.poly_log(1.0, float(theta), float(kappa)))
                        for r in rates_table_rows(int(d), float(alpha), g):
                            rows.append(tuple(r[k] for k in RATES_HEADER))
    return rows


def cmd_rates_table(cfg: LabConfig) -> int:
    write_csv(Path(cfg.out) / "rates_table.csv", RATES_HEADER, rates_table(cfg))
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def parse_m_grid(text: str) -> list[int]:
    parts = text.split(":")
    if len(parts) != 3 or parts[2] != "geometric":
        raise UsageError(f"--m-grid must look like a:b:geometric, got {text!r}")
    try:
        return geometric_grid(int(parts[0]), int(parts[1]))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="samplinglab",
                                 description="Sampling-complexity experiments for ReLU approximation spaces.")
    ap.add_argument("command", choices=("verify", "hardness", "rates-table"))
    ap.add_argument("--config", help="JSON config file")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--problem", choices=("uniform", "l2", "integral"))
    ap.add_argument("--regime", choices=("det", "mc"))
    ap.add_argument("--algorithm")
    ap.add_argument("--m-grid", dest="m_grid")
    return ap


def load_config(args) -> LabConfig:
    doc = {}
    if args.config:
        try:
            doc = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        if not isinstance(doc, dict):
            raise UsageError("config must be a JSON object")
    for key in ("out", "seed", "problem", "regime", "algorithm"):
        val = getattr(args, key)
        if val is not None:
            doc[key] = val
    if args.m_grid is not None:
        doc["m_grid"] = parse_m_grid(args.m_grid)
    return LabConfig.from_dict(doc)


COMMANDS = {"verify": cmd_verify, "hardness": cmd_hardness, "rates-table": cmd_rates_table}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args)
    except (UsageError, ConfigurationError, TypeError) as exc:
        print(f"samplinglab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](cfg)
    except ConfigurationError as exc:
        print(f"samplinglab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
