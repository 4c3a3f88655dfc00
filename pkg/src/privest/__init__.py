"""Differentially private mean and covariance estimation by iterative refinement."""

from .covariance import CovConfig, mvc_path, mvc_rec
from .mean import ConfidenceBall, MeanConfig, mvm_path, mvm_rec, radius_recurrence
from .pca import private_pca
from .privacy import PrivacyBudget, ZCDPAccountant, gaussian_mechanism, split_budget
from .univariate import Interval, UnivariateConfig, uvm_rec, uvv_rec

__version__ = "0.1.0"

__all__ = [
    "ConfidenceBall", "CovConfig", "Interval", "MeanConfig", "PrivacyBudget", "UnivariateConfig",
    "ZCDPAccountant", "gaussian_mechanism", "mvc_path", "mvc_rec", "mvm_path", "mvm_rec",
    "private_pca", "radius_recurrence", "split_budget", "uvm_rec", "uvv_rec",
]
