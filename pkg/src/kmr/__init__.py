"""Kernel-matched registration of two irregularly sampled series."""

from .alignment import CriterionValue, compute_criterion, compute_limit_criterion
from .dataset import FunctionalDataset
from .errors import ConvergenceError, DataError, DomainError, KMRError, ZeroDenominatorError
from .kernels import Bandwidths, KernelSpec, default_bandwidths, eval_kernel
from .optimizer import FitConfig, FitResult, fit_direction, fit_warp, resolve_segments
from .warp import WarpFunction, eval_warp, identity_warp, perturb_coefficient, sup_distance

__all__ = [
    "Bandwidths", "ConvergenceError", "CriterionValue", "DataError", "DomainError",
    "FitConfig", "FitResult", "FunctionalDataset", "KMRError", "KernelSpec", "WarpFunction",
    "ZeroDenominatorError", "compute_criterion", "compute_limit_criterion",
    "default_bandwidths", "eval_kernel", "eval_warp", "fit_direction", "fit_warp",
    "identity_warp", "perturb_coefficient", "resolve_segments", "sup_distance",
]
