"""Empirical processes of random walks modulo one.

Simulation of ``{S_j x}``, the wrapped Fourier spectrum of its steps, the
limiting covariance ``Gamma`` of ``sqrt(n)(F_n(s) - s)``, block sums,
Gaussian paths with covariance ``Gamma``, the exponent program behind the
coupling rate, and Monte Carlo experiments tying them together.
"""
__version__ = "0.1.0"

from .errors import (ConfigurationError, DomainError, NonMixingConfiguration,
                     PSDRepairError, SchatteError)
from .walk import (FracSample, IncrementDistribution, WalkConfig, empirical_cdf,
                   empirical_process, kernel, simulate_walk, sup_statistic)
from .spectrum import WrappedSpectrum, decay_rate, wrapped_density
from .covariance import CovarianceModel, a_functional, c_rho, gamma, gamma_matrix, lemma3_check
from .blocks import BlockingPlan, build_plan, block_sums, variance_profile
from .gp import GaussianSampler, Grid, build_grid, psd_repair, sample_paths
from .exponents import ExponentTuple, check_feasible, optimize_gamma
from .harness import (ExperimentConfig, ExperimentReport, ks_two_sample,
                      run_covariance_experiment, run_distribution_experiment,
                      run_rate_experiment)
