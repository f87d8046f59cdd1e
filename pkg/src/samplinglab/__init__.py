"""Sampling complexity of ReLU approximation spaces: constructions, adversaries and rates."""

from .relu_net import Network, Layer, realize, check_membership
from .approx_space import (CoeffGrowth, DepthGrowth, GrowthPair, RateInterval, SpaceParams,
                           beta_star_integration, beta_star_l2, beta_star_uniform)
from .hat_constructions import (HatSumSpec, build_hat_sum_network, build_multihat_network,
                                build_unit_ball_family, build_gMy)
from .algorithms import make_algorithm, ALGORITHMS
from .adversary import average_case_error, hardness_bound
from .rates import ErrorCurve, RateReport, fit_rate, run_rate_experiment

__version__ = "0.1.0"
