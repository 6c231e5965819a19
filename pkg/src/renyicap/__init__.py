"""Petz-Renyi capacity of classical-quantum channels via entropic mirror descent."""
from .channel import (
    ChannelError,
    CqChannel,
    PreparedChannel,
    gen_commuting_channel,
    gen_noiseless_channel,
    gen_random_channel,
    load_channel,
    prepare,
    save_channel,
)
from .diagnostics import GapReport, duality_gap, kl_divergence
from .objective import (
    CurvatureConstants,
    c_beta,
    capacity_from_S,
    curvature_constants,
    divided_difference_g,
    gradient,
    gram_gamma,
    hessian_quadratic_form,
    mix,
    objective_S,
    smoothness_L,
    strong_convexity_mu,
)
from .solver import SolveResult, SolverConfig, md_step, safeguard, solve

__version__ = "0.1.0"
