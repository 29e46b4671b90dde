"""Autocovariance, autocorrelation and spectral functionals of amplitude-modulated series."""
from .asymptotics import (AcvModel, BernoulliCensor, CensorModel, ConstantCensor, DecayKind, DependenceDecay,
                          MarkovCensor, PeriodicCensor, ar1_acv, clt_condition, compose_independent,
                          heredity_transform, sigma2, sigma_matrix, slln_condition)
from .estimators import AcvEstimate, MeanMode, acv_profile, nu_hat, parzen_acf, parzen_acv
from .ratio import moment_config, ratio_condition, ratio_estimate, rate_experiment
from .series import LatentPair, ModulatedSeries, modulate, read_csv, write_csv
from .simulators import analytic_gamma, simulate, simulate_censor, theta_bound
from .spectral import (SpectralFunctional, dual_error, integrated_functional, modified_periodogram,
                       sobolev_norm, spectral_convergence_experiment)

__version__ = "0.1.0"
