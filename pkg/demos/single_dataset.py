"""Inference on one simulated data set for each model."""
import numpy as np

from prepivot import BootstrapConfig, RngStream, bootstrap_p_values
from prepivot.models import (
    HeavyConfig,
    HeavyTailLocation,
    KernelRegression,
    MaConfig,
    ModelAveraging,
    NpConfig,
    RidgeConfig,
    RidgeRegression,
)
from prepivot.numerics.distributions import stable_variates

rng = np.random.default_rng(42)
n = 200

x = rng.standard_normal(n)
z = 0.7 * x + np.sqrt(0.51) * rng.standard_normal(n)
y = x + z + rng.standard_normal(n)
X = np.column_stack((x, z))
grid = np.arange(1, n + 1) / n

problems = {
    "model averaging, H0: beta = 1": ModelAveraging(y, x, z, MaConfig(null_value=1.0)),
    "ridge, H0: theta_1 = 1": RidgeRegression(y, X, RidgeConfig(c_n=0.15 * n, g=(1.0, 0.0), r=1.0)),
    "kernel regression, H0: beta(0.5) = 0.25": KernelRegression(grid**2 + rng.standard_normal(n),
                                                                NpConfig(null_value=0.25)),
    "stable location, H0: theta = 0": HeavyTailLocation(stable_variates(1.5, n, rng), HeavyConfig(omega=0.7)),
}

config = BootstrapConfig(B1=999, B2=199, methods=("standard", "plugin", "double", "bias-removed"))
for name, problem in problems.items():
    rep = bootstrap_p_values(problem, config, RngStream(0))
    m = f"{rep.m_hat:.3f}" if rep.m_hat is not None else "  -  "
    print(f"{name:<42} p_hat {rep.p_hat:.3f}  plug-in {rep.p_plugin:.3f}  double {rep.p_double:.3f}  "
          f"bias-removed {rep.p_bias_removed:.3f}  m_hat {m}")
