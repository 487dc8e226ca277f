"""Worked inference problems implementing the bootstrap contract."""

from prepivot.models.averaging import (
    MaAuxiliaries,
    MaConfig,
    ModelAveraging,
    ma_moment_auxiliaries,
    ma_pairs_plugin,
    ma_plugin_m,
    ma_statistic,
)
from prepivot.models.data import load_matrix
from prepivot.models.heavy import (
    HeavyConfig,
    HeavyTailLocation,
    heavy_m_out_of_n_demo,
    heavy_statistic,
    log_moment_alpha,
    m_out_of_n_p_value,
    mcculloch_alpha,
)
from prepivot.models.nonparametric import KernelRegression, NpConfig, np_statistic
from prepivot.models.ridge import RidgeConfig, RidgeRegression, ridge_plugin_m, ridge_statistic

__all__ = [
    "HeavyConfig",
    "HeavyTailLocation",
    "KernelRegression",
    "MaAuxiliaries",
    "MaConfig",
    "ModelAveraging",
    "NpConfig",
    "RidgeConfig",
    "RidgeRegression",
    "heavy_m_out_of_n_demo",
    "heavy_statistic",
    "load_matrix",
    "log_moment_alpha",
    "m_out_of_n_p_value",
    "ma_moment_auxiliaries",
    "ma_pairs_plugin",
    "ma_plugin_m",
    "ma_statistic",
    "mcculloch_alpha",
    "np_statistic",
    "ridge_plugin_m",
    "ridge_statistic",
]
