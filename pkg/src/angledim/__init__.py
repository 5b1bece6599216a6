"""Intrinsic dimension estimation from the variance of nearest-neighbour angles."""

from .angle_kernel import AngleStat, NeighborSet, PointCloud, angle_h, knn, u_statistic
from .baseline_lb import LBConfig, lb_global, lb_local
from .calibration import CalibrationCache, build_cache, kde_eval, qq_data, sample_en, sample_uniform_sphere
from .errors import (
    AngleDimError,
    CalibrationMismatchError,
    ConfigurationError,
    DegenerateDataError,
    DomainError,
    EmptyInputError,
    InsufficientSampleError,
    ParseError,
    ValidationError,
)
from .global_estimator import GlobalConfig, GlobalEstimate, estimate_global
from .local_estimator import LocalConfig, LocalEstimate, default_k, estimate_local
from .manifolds import MANIFOLDS, generate
from .moments import MomentTable, beta, moment_table, sigma_sq, theta_cdf, theta_mgf

__version__ = "0.1.0"
