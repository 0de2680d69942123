"""Negative binomial-reciprocal inverse Gaussian (NBRIG) count models."""

__version__ = "0.1.0"

from .baselines import NbParams, PoissonParams, fit_nb, fit_poisson, nb_pmf, poisson_pmf
from .compound import AggregateDist, SeverityPmf, aggregate_bruteforce, aggregate_pmf, convolve
from .dist import (
    NbrigParams,
    PmfTable,
    cdf,
    dispersion_report,
    factorial_moment,
    log_pmf,
    mean,
    pmf,
    pmf_direct,
    pmf_recursive,
    pmf_table,
    sample,
    second_moment,
    survival,
    variance,
)
from .errors import DomainError, PrecisionLossError
from .fit import FitOptions, compare_models, fit_nbrig_mle, log_likelihood
from .gof import CountData, FitReport, chi_square_gof
from .multivariate import MvNbrigParams, joint_pmf, joint_pmf_many, joint_pmf_via_univariate, mv_moments
from .rig import RigParams, rig_log_mgf, rig_mgf, rig_pdf, rig_sample
