"""Successive-sampling estimation for respondent-driven sampling data."""

from rds_ss.classic import activity_ratio, mu_mean, mu_vh, nhat_bounds
from rds_ss.domain import (
    DegreeDistribution,
    InclusionMap,
    RdsRecord,
    RdsSample,
    SimConfig,
    degree_counts,
    validate_sample,
)
from rds_ss.errors import RdsError
from rds_ss.ss import Estimate, SsFit, fit_ss, mu_ss, sensitivity_sweep

__version__ = "0.1.0"

__all__ = [
    "DegreeDistribution",
    "Estimate",
    "InclusionMap",
    "RdsError",
    "RdsRecord",
    "RdsSample",
    "SimConfig",
    "SsFit",
    "activity_ratio",
    "degree_counts",
    "fit_ss",
    "mu_mean",
    "mu_ss",
    "mu_vh",
    "nhat_bounds",
    "sensitivity_sweep",
    "validate_sample",
]
