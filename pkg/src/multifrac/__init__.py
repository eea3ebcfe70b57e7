"""Variable-order fractional calculus, Riemann-Liouville mBm and Girsanov SDE simulation."""
from multifrac.errors import (ArgumentError, ConfigError, ConvergenceError, DomainError, MultifracError,
                              NumericError, PreconditionError)
from multifrac.regularity import RegularityFunction, SampledPath, holder_norm_variable
from multifrac.mfcalc import DerivativeConfig, kernel_F, mf_derivative, mf_derivative_series, mf_integral
from multifrac.mbm import GaussianDriver, covariance_matrix, covariance_oracle, sample_rlmbm
from multifrac.girsanov import DriftSpec, GirsanovRun
from multifrac._kernels import BACKEND

__version__ = "0.1.0"

__all__ = [
    "ArgumentError", "ConfigError", "ConvergenceError", "DomainError", "MultifracError", "NumericError",
    "PreconditionError", "RegularityFunction", "SampledPath", "holder_norm_variable", "DerivativeConfig",
    "kernel_F", "mf_derivative", "mf_derivative_series", "mf_integral", "GaussianDriver", "covariance_matrix",
    "covariance_oracle", "sample_rlmbm", "DriftSpec", "GirsanovRun", "BACKEND",
]
