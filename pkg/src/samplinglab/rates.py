"""Error-versus-m sweeps and empirical convergence exponents.

A sweep produces an `ErrorCurve`; `fit_rate` turns it into a slope on the
log-log scale and compares that slope against a theory interval.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .adversary import HardnessFamily, average_case_error
from .algorithms import SamplingAlgorithm, evaluate_error, make_rng

ERROR_FLOOR = 1e-13
DEFAULT_SLACK = 0.15


class InsufficientDataError(ValueError):
    pass


@dataclass
class ErrorCurve:
    m: list[int]
    error: list[float]
    stderr: list[float]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (len(self.m) == len(self.error) == len(self.stderr)):
            raise ValueError("m, error and stderr must have equal length")
        if any(b <= a for a, b in zip(self.m, self.m[1:])):
            raise ValueError("m must be strictly increasing")
        if any(e < 0 for e in self.error):
            raise ValueError("errors must be nonnegative")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["m", "error", "stderr"])
        for row in zip(self.m, self.error, self.stderr):
            w.writerow([row[0], repr(float(row[1])), repr(float(row[2]))])
        return buf.getvalue()


@dataclass
class RateReport:
    beta_hat: float
    residual: float
    lower: float | None
    upper: float | None
    slack: float
    floored: int
    n_points: int
    metadata: dict = field(default_factory=dict)

    @property
    def upper_respected(self) -> bool | None:
        return None if self.upper is None else self.beta_hat <= self.upper + self.slack

    @property
    def lower_witnessed(self) -> bool | None:
        return None if self.lower is None else self.beta_hat >= self.lower - self.slack

    def to_json(self) -> str:
        doc = dict(asdict(self), upper_respected=self.upper_respected,
                   lower_witnessed=self.lower_witnessed)
        return json.dumps(doc, indent=2, sort_keys=True)


def geometric_grid(a: int, b: int, ratio: int = 2) -> list[int]:
    """a, a*ratio, a*ratio^2, ... up to b inclusive."""
    if a < 1 or b < a or ratio < 2:
        raise ValueError("need 1 <= a <= b and ratio >= 2")
    out, m = [], a
    while m <= b:
        out.append(m)
        m *= ratio
    return out


def fit_rate(curve: ErrorCurve, interval=None, slack: float = DEFAULT_SLACK,
             floor: float = ERROR_FLOOR) -> RateReport:
    """Least-squares slope of log(error) against log(m); beta_hat is its negative.

    `interval` is anything with `lower` and `upper` attributes (a RateInterval)
    or a (lower, upper) pair.
    """
    m = np.asarray(curve.m, dtype=np.float64)
    e = np.asarray(curve.error, dtype=np.float64)
    floored = int(np.sum(e < floor))
    e = np.maximum(e, floor)
    if len(m) < 3:
        raise InsufficientDataError(f"need at least 3 points, got {len(m)}")
    x, y = np.log(m), np.log(e)
    slope, icept = np.polyfit(x, y, 1)
    residual = float(np.sqrt(np.mean((y - (slope * x + icept)) ** 2)))
    if interval is None:
        lo = up = None
    elif hasattr(interval, "lower"):
        lo, up = interval.lower, interval.upper
    else:
        lo, up = interval
    return RateReport(float(-slope), residual, lo, up, slack, floored, len(m), dict(curve.metadata))


def run_rate_experiment(alg_factory: Callable[[int], SamplingAlgorithm], m_grid, solution: str,
                        target=None, family: Callable[[int], HardnessFamily] | None = None,
                        trials: int = 1, seed: int = 0, exact_limit: int = 10**5,
                        subsample: int = 1000, metadata: dict | None = None) -> ErrorCurve:
    """Error of alg_factory(m) at each m, against one fixed target or a per-m family.

    For a family the error is the average-case error from the adversary
    module.  For a single target it is the mean over `trials` seeded runs
    (one run suffices for deterministic algorithms).
    """
    if (target is None) == (family is None):
        raise ValueError("give exactly one of target and family")
    m_grid = [int(m) for m in m_grid]
    errs, ses = [], []
    for m in m_grid:
        alg = alg_factory(m)
        if family is not None:
            rep = average_case_error(alg, family(m), solution, exact_limit, subsample,
                                     seed=int(make_rng(seed, m, 7).integers(2**63)))
            errs.append(rep.measured)
            ses.append(rep.stderr)
            continue
        n_runs = trials if alg.kind == "monte_carlo" else 1
        vals = [evaluate_error(alg, target, solution, int(make_rng(seed, m, t).integers(2**63)))
                for t in range(n_runs)]
        errs.append(math.fsum(vals) / n_runs)
        ses.append(float(np.std(vals, ddof=1) / math.sqrt(n_runs)) if n_runs > 1 else 0.0)
    meta = {"solution": solution, "seed": seed, "trials": trials}
    meta.update(metadata or {})
    return ErrorCurve(m_grid, errs, ses, meta)
