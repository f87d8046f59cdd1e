"""Fit error decay rates for deterministic algorithms on the uniform hardness family."""

import argparse

from samplinglab.adversary import UniformFamily
from samplinglab.algorithms import hat_dictionary, make_algorithm
from samplinglab.approx_space import CoeffGrowth, DepthGrowth, GrowthPair, SpaceParams
from samplinglab.hat_constructions import derive_unit_ball_constants
from samplinglab.rates import fit_rate, geometric_grid, run_rate_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alpha", type=float, default=2.0)
    ap.add_argument("--gamma", type=float, default=0.95)
    ap.add_argument("--m-max", type=int, default=8192)
    ap.add_argument("--seed", type=int, default=8)
    args = ap.parse_args()

    growths = GrowthPair(DepthGrowth.constant(3), CoeffGrowth.poly_log(1.0, 0.0, 0.0))
    space = SpaceParams(1, args.alpha, growths)
    consts = derive_unit_ball_constants(args.alpha, args.gamma, 1.0, 0.5, 2.0, growths)
    dic = hat_dictionary(consts, 4, growths)
    ms = geometric_grid(16, args.m_max)
    print(f"hardness exponent alpha/(gamma+alpha) = {args.alpha / (args.gamma + args.alpha):.4f}")
    for name in ("zero", "midpoint", "grid", "erm"):
        curve = run_rate_experiment(lambda m: make_algorithm(name, m, 1, "uniform", dic), ms, "uniform",
                                    family=lambda m: UniformFamily(m, space, args.gamma),
                                    exact_limit=2000, subsample=300, seed=args.seed)
        print(f"{name:10s} fitted rate {fit_rate(curve).beta_hat:.4f}")


if __name__ == "__main__":
    main()
