"""Shrunk location estimate under symmetric stable errors.

Data ``y_t = theta + eps_t`` with ``eps_t`` symmetric stable of index
``alpha`` in (1, 2].  The estimator ``omega * mean(y)`` is scaled by
``n^{1 - 1/alpha}``; the bootstrap is parametric, drawing stable errors with
the estimated index around the sample mean.  A mean of ``n`` i.i.d.
``S(a)`` variates equals ``n^{1/a - 1} S(a)`` in law, so with
``reduce_draws`` each bootstrap mean costs a single stable draw.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from prepivot.engine import BootstrapProblem, PrepivotMap, standard_p_value
from prepivot.errors import DegeneracyError, ParameterError
from prepivot.numerics.distributions import stable_variates
from prepivot.numerics.rng import RngStream
from prepivot.numerics.stable import StableLaw

ALPHA_RANGE = (1.05, 2.0)
ESTIMATORS = ("mcculloch-quantile", "log-moment", "known")


@dataclass(frozen=True)
class HeavyConfig:
    """Shrink weight, tail-index estimator and null value.

    ``scaling_alpha`` overrides the index used in the common scaling
    ``n^{1 - 1/alpha}``; it changes no p-value.
    """

    omega: float = 0.7
    alpha_estimator: str = "mcculloch-quantile"
    alpha: float | None = None
    null_value: float = 0.0
    scaling_alpha: float | None = None
    reduce_draws: bool = True

    def __post_init__(self) -> None:
        if not 0.0 < self.omega <= 1.0:
            raise ParameterError("omega must lie in (0, 1]")
        if self.alpha_estimator not in ESTIMATORS:
            raise ParameterError(f"alpha estimator must be one of {ESTIMATORS}")
        if self.alpha_estimator == "known" and (self.alpha is None or not 1.0 < self.alpha <= 2.0):
            raise ParameterError("a known alpha in (1, 2] is required")
        if self.scaling_alpha is not None and not 1.0 < self.scaling_alpha <= 2.0:
            raise ParameterError("scaling alpha must lie in (1, 2]")


@lru_cache(maxsize=1)
def _quantile_ratio_table() -> tuple[np.ndarray, np.ndarray]:
    """``(q95 - q05) / (q75 - q25)`` of the unit symmetric stable law on an alpha grid."""
    alphas = np.round(np.arange(1.02, 2.0001, 0.02), 10)
    ratio = np.array([StableLaw(a).quantile(0.95) / StableLaw(a).quantile(0.75) for a in alphas])
    return alphas, ratio


def mcculloch_alpha(y) -> float:
    """Tail index from the sample quantile ratio, clipped to ``ALPHA_RANGE``."""
    q05, q25, q75, q95 = np.quantile(np.asarray(y, float), [0.05, 0.25, 0.75, 0.95])
    if not q75 > q25:
        raise DegeneracyError("sample has no spread")
    nu = (q95 - q05) / (q75 - q25)
    alphas, ratio = _quantile_ratio_table()
    # ratio decreases in alpha; interpolate on the reversed arrays
    a = float(np.interp(nu, ratio[::-1], alphas[::-1]))
    return float(np.clip(a, *ALPHA_RANGE))


def log_moment_alpha(y) -> float:
    """Tail index from the variance of ``log|y - median|``, clipped."""
    y = np.asarray(y, float)
    dev = np.abs(y - np.median(y))
    dev = dev[dev > 0]
    if dev.size < 2:
        raise DegeneracyError("sample has no spread")
    excess = 6.0 / np.pi**2 * np.var(np.log(dev)) - 0.5
    if excess <= 1.0 / ALPHA_RANGE[1] ** 2:
        return ALPHA_RANGE[1]
    return float(np.clip(excess**-0.5, *ALPHA_RANGE))


@dataclass(frozen=True)
class HeavyStatistic:
    T_n: float
    alpha_hat: float
    B_hat: float


@dataclass
class HeavyDraws:
    ybar: np.ndarray
    retries: int = 0

    def __len__(self) -> int:
        return self.ybar.shape[0]


class HeavyTailLocation(BootstrapProblem):
    """Test of ``theta = null_value`` with the shrunk mean ``omega * mean(y)``."""

    def __init__(self, y, cfg: HeavyConfig | None = None) -> None:
        self.cfg = cfg or HeavyConfig()
        y = np.asarray(y, dtype=float).ravel()
        if y.size < 20:
            raise ParameterError("at least 20 observations are needed to estimate alpha")
        self.n, self.y = y.size, y
        self.ybar = float(y.mean())
        if self.cfg.alpha_estimator == "known":
            self.alpha_hat = float(self.cfg.alpha)
        elif self.cfg.alpha_estimator == "log-moment":
            self.alpha_hat = log_moment_alpha(y)
        else:
            self.alpha_hat = mcculloch_alpha(y)
        a_scale = self.cfg.scaling_alpha or self.alpha_hat
        self.scale = self.n ** (1.0 - 1.0 / a_scale)
        self.omega = self.cfg.omega
        self.theta_hat = self.omega * self.ybar
        self.gn = self.scale
        self.B_hat = (self.omega - 1.0) * self.scale * self.ybar

    def statistic(self) -> float:
        return float(self.scale * (self.omega * self.ybar - self.cfg.null_value))

    def summary(self) -> HeavyStatistic:
        return HeavyStatistic(self.statistic(), self.alpha_hat, float(self.B_hat))

    def plugin_map(self) -> PrepivotMap:
        return PrepivotMap.stable(self.alpha_hat, self.omega)

    def _error_means(self, rng: np.random.Generator, shape) -> np.ndarray:
        a = self.alpha_hat
        if self.cfg.reduce_draws:
            return self.n ** (1.0 / a - 1.0) * stable_variates(a, shape, rng)
        return stable_variates(a, tuple(np.atleast_1d(shape)) + (self.n,), rng).mean(axis=-1)

    def resample(self, stream: RngStream, size: int) -> HeavyDraws:
        return HeavyDraws(self.ybar + self._error_means(stream.generator(), size))

    def statistic_star(self, draws: HeavyDraws) -> np.ndarray:
        return self.scale * (self.omega * draws.ybar - self.ybar)

    def bias_terms(self, draws: HeavyDraws) -> tuple[float, np.ndarray]:
        return float(self.B_hat), (self.omega - 1.0) * self.scale * draws.ybar

    def statistic_star2(self, draws: HeavyDraws, stream: RngStream, size: int) -> np.ndarray:
        rng = stream.generator()
        ybar2 = draws.ybar[:, None] + self._error_means(rng, (len(draws), size))
        return self.scale * (self.omega * ybar2 - draws.ybar[:, None])


def heavy_statistic(y, cfg: HeavyConfig) -> HeavyStatistic:
    return HeavyTailLocation(y, cfg).summary()


def m_out_of_n_p_value(y, cfg: HeavyConfig, m: int, stream: RngStream, B: int = 199, tie_rule: str = "plain") -> float:
    """Standard p-value from the m-out-of-n residual bootstrap.

    ``T*_m = m^{1 - 1/a} (omega * mean(y*_m) - mean(y))`` with ``y*_m`` drawn
    from the centred residuals; the comparator statistic is the full-sample
    one.  This bootstrap drops the bias term, so its p-value is not uniform.
    """
    model = HeavyTailLocation(y, cfg)
    n = model.n
    if not 1 <= m < n:
        raise ParameterError("m must satisfy 1 <= m < n")
    a = model.cfg.scaling_alpha or model.alpha_hat
    resid = model.y - model.ybar
    idx = stream.generator().integers(0, n, size=(B, m))
    ybar_m = model.ybar + resid[idx].mean(axis=1)
    Tm = m ** (1.0 - 1.0 / a) * (model.omega * ybar_m - model.ybar)
    return standard_p_value(model.statistic(), Tm, tie_rule)


def heavy_m_out_of_n_demo(
    n: int,
    cfg: HeavyConfig,
    m: int | None,
    stream: RngStream,
    reps: int = 1000,
    c: float = 0.0,
    alpha: float = 1.5,
    B: int = 199,
) -> np.ndarray:
    """m-out-of-n p-values over ``reps`` simulated samples.

    Samples follow ``y_t = c n^{1/alpha - 1} + eps_t``; the null value is the
    true location.  ``m`` defaults to ``floor(n^{2/3})``.
    """
    m = int(n ** (2.0 / 3.0)) if m is None else int(m)
    theta = c * n ** (1.0 / alpha - 1.0)
    run_cfg = HeavyConfig(
        omega=cfg.omega,
        alpha_estimator=cfg.alpha_estimator,
        alpha=cfg.alpha,
        null_value=theta,
        scaling_alpha=cfg.scaling_alpha,
    )
    out = np.empty(reps)
    for r in range(reps):
        rep = stream.split(0, r)
        y = theta + stable_variates(alpha, n, rep.split(0).generator())
        out[r] = m_out_of_n_p_value(y, run_cfg, m, rep.split(1), B)
    return out
