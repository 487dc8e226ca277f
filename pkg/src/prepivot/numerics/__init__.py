"""Random streams, error laws, stable laws, linear algebra and kernels."""

from prepivot.numerics.distributions import DistributionSpec, sample, stable_variates
from prepivot.numerics.kernels import KERNELS, KernelConstants, KernelSpec, kernel_constants, kernel_constants_gauss
from prepivot.numerics.linalg import COND_CAP, CrossProducts, OlsFit, checked_solve, ols, partial_cross
from prepivot.numerics.rng import RngStream
from prepivot.numerics.stable import StableLaw, stable_cdf, stable_quantile
from prepivot.numerics.uniformity import KsResult, ks_two_sample, ks_uniform

__all__ = [
    "KERNELS",
    "COND_CAP",
    "CrossProducts",
    "DistributionSpec",
    "KernelConstants",
    "KernelSpec",
    "KsResult",
    "OlsFit",
    "RngStream",
    "StableLaw",
    "checked_solve",
    "kernel_constants",
    "kernel_constants_gauss",
    "ks_two_sample",
    "ks_uniform",
    "ols",
    "partial_cross",
    "sample",
    "stable_cdf",
    "stable_quantile",
    "stable_variates",
]
