"""Compare control-variate Monte Carlo against plain Monte Carlo on a smooth target."""

import argparse
import math

import numpy as np

from samplinglab.algorithms import ControlVariateMC, StandardMC, interpolant_dictionary
from samplinglab.rates import fit_rate, geometric_grid, run_rate_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--m-max", type=int, default=2 ** 14)
    ap.add_argument("--seed", type=int, default=5)
    args = ap.parse_args()

    cands = [lambda x, a=a: 0.5 * np.sin(a * np.pi * np.asarray(x).reshape(-1)) for a in (1, 2, 3, 4)]
    target = lambda X: cands[2](X[:, 0])
    ms = geometric_grid(16, args.m_max)
    runs = {
        "control_variate": lambda m: ControlVariateMC(m, 1, "integral",
                                                      interpolant_dictionary(cands, math.ceil(math.sqrt(m)))),
        "standard_mc": lambda m: StandardMC(m, 1),
    }
    for name, factory in runs.items():
        curve = run_rate_experiment(factory, ms, "integral", target=target, trials=args.trials, seed=args.seed)
        print(f"{name:16s} fitted rate {fit_rate(curve).beta_hat:.4f}")
        print(curve.to_csv())


if __name__ == "__main__":
    main()
