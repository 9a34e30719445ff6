"""Monte Carlo estimation of renormalised block events."""

from ._backend import BACKEND, get_kernels
from .experiment import ExperimentConfig, ExperimentReport, TrialError, run_experiment, run_trial
from .prng import Arc4, KeyedSiteOracle, chacha20_block, trial_key
from .stats import binomial_tail

__all__ = [
    "BACKEND",
    "Arc4",
    "ExperimentConfig",
    "ExperimentReport",
    "KeyedSiteOracle",
    "TrialError",
    "binomial_tail",
    "chacha20_block",
    "get_kernels",
    "run_experiment",
    "run_trial",
    "trial_key",
]
