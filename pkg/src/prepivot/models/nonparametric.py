"""Fixed-design Nadaraya-Watson regression at an interior point.

Design points are ``x_t = t / n`` and the estimate at ``x`` is
``(nh)^{-1} sum_t K((x_t - x) / h) y_t`` with ``h = c n^{-1/5}``.  Every
quantity used below is linear in the response.  The smoother
``L[s, t] = K((x_t - x_s) / h) / (nh)`` is a symmetric Toeplitz matrix; it is
held densely for moderate n and applied by FFT beyond that.  ``l`` is the
row of weights for the evaluation point.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.linalg import matmul_toeplitz

from prepivot.engine import BootstrapProblem, PrepivotMap
from prepivot.errors import BandwidthError, ParameterError
from prepivot.numerics.kernels import KernelConstants, KernelSpec, kernel_constants
from prepivot.numerics.rng import RngStream


@lru_cache(maxsize=8)
def cached_kernel_constants(kind: str) -> KernelConstants:
    return kernel_constants(KernelSpec(kind))


@dataclass(frozen=True)
class NpConfig:
    """Bandwidth constant, kernel, evaluation point and null value.

    The error variance is estimated from residuals at design points whose
    kernel window lies inside (0, 1), where the plain estimator is not
    distorted by the boundary.
    """

    c: float = 0.5
    kernel: KernelSpec = field(default_factory=KernelSpec)
    x: float = 0.5
    null_value: float = 0.0
    reduce_draws: bool = True

    def __post_init__(self) -> None:
        if not self.c > 0:
            raise ParameterError("bandwidth constant must be positive")
        if not 0.0 < self.x < 1.0:
            raise ParameterError("evaluation point must lie in (0, 1)")
        if isinstance(self.kernel, str):
            object.__setattr__(self, "kernel", KernelSpec(self.kernel))


DENSE_LIMIT = 2000


class Smoother:
    """Symmetric Toeplitz operator with first column ``col``."""

    def __init__(self, col: np.ndarray, dense: bool | None = None) -> None:
        self.col = col
        self.n = col.size
        self.dense = self.n <= DENSE_LIMIT if dense is None else dense
        self._matrix = self.matrix() if self.dense else None

    def matrix(self) -> np.ndarray:
        i = np.arange(self.n)
        return self.col[np.abs(i[:, None] - i[None, :])]

    def __call__(self, v: np.ndarray) -> np.ndarray:
        """``L v`` for a vector, or ``v L`` row by row for a ``(B, n)`` batch."""
        v = np.asarray(v, dtype=float)
        if self._matrix is not None:
            return v @ self._matrix
        if v.ndim == 1:
            return matmul_toeplitz((self.col, self.col), v)
        return matmul_toeplitz((self.col, self.col), v.T).T


@dataclass(frozen=True)
class NpStatistic:
    T_n: float
    B_hat: float
    beta_grid: np.ndarray
    B2_hat: float


@dataclass
class NpDraws:
    ystar: np.ndarray
    retries: int = 0

    def __len__(self) -> int:
        return self.ystar.shape[0]


class KernelRegression(BootstrapProblem):
    """Test of ``beta(x) = null_value`` from responses on the grid ``t / n``."""

    def __init__(self, y, cfg: NpConfig | None = None) -> None:
        self.cfg = cfg or NpConfig()
        y = np.asarray(y, dtype=float).ravel()
        n = y.size
        self.n, self.y = n, y
        self.h = self.cfg.c * n ** (-0.2)
        if self.h >= min(self.cfg.x, 1.0 - self.cfg.x):
            warnings.warn("bandwidth reaches the boundary of the design", RuntimeWarning, stacklevel=2)
        nh = n * self.h
        self.design = np.arange(1, n + 1) / n
        K = self.cfg.kernel
        self.ell = K((self.design - self.cfg.x) / self.h) / nh
        if not np.any(self.ell):
            raise BandwidthError("no design point inside the kernel window")
        self.smoother = Smoother(K(np.arange(n) / nh) / nh)
        self.root_nh = np.sqrt(nh)
        self.ell_L = self.smoother(self.ell)
        self.ell_LL = self.smoother(self.ell_L)
        interior = (self.design >= self.h) & (self.design <= 1.0 - self.h)
        if interior.sum() < 2:
            interior = np.ones(n, dtype=bool)
        self.interior = interior

        self.beta_grid = self.smoother(y)
        self.beta_x = float(self.ell @ y)
        self.theta_hat = self.beta_x
        self.gn = self.root_nh
        self.B_hat = float(self.root_nh * (self.ell_L @ y - self.beta_x))
        self.B2_hat = float(self.root_nh * (self.ell_LL @ y - self.ell_L @ y))
        self.correction = self.B2_hat - self.B_hat
        self.sigma2 = float(np.mean(self.residuals(y) ** 2))

    @property
    def L(self) -> np.ndarray:
        """Dense smoother matrix (built on demand for large n)."""
        return self.smoother._matrix if self.smoother.dense else self.smoother.matrix()

    def residuals(self, y: np.ndarray) -> np.ndarray:
        """Interior residuals ``(y - L y)`` of a response or a batch of them."""
        return (y - self.smoother(y))[..., self.interior]

    def statistic(self) -> float:
        return float(self.root_nh * (self.beta_x - self.cfg.null_value))

    def summary(self) -> NpStatistic:
        return NpStatistic(self.statistic(), self.B_hat, self.beta_grid, self.B2_hat)

    def bias_at_design(self, y=None) -> np.ndarray:
        """Estimated bias ``B_n(x_t)`` at every design point."""
        y = self.y if y is None else y
        fit = self.smoother(y)
        return self.root_nh * (self.smoother(fit) - fit)

    def plugin_map(self) -> PrepivotMap:
        return PrepivotMap.gaussian_scale(cached_kernel_constants(self.cfg.kernel.kind).m_np)

    def resample(self, stream: RngStream, size: int) -> NpDraws:
        eps = stream.generator().standard_normal((size, self.n))
        return NpDraws(self.beta_grid + np.sqrt(self.sigma2) * eps)

    def statistic_star(self, draws: NpDraws) -> np.ndarray:
        return self.root_nh * (draws.ystar @ self.ell - self.beta_x)

    def _bias_star(self, draws: NpDraws) -> np.ndarray:
        return self.root_nh * (draws.ystar @ self.ell_L - draws.ystar @ self.ell)

    def bias_terms(self, draws: NpDraws) -> tuple[float, np.ndarray]:
        """``B_n_hat`` and the corrected second-level bias for each draw."""
        return self.B_hat, self._bias_star(draws) - self.correction

    def statistic_star2(self, draws: NpDraws, stream: RngStream, size: int) -> np.ndarray:
        """Corrected second-level statistics ``T** - (B2_hat - B_hat)``."""
        rng = stream.generator()
        B1 = len(draws)
        sd = np.sqrt(np.mean(self.residuals(draws.ystar) ** 2, axis=1))
        base = self._bias_star(draws) - self.correction
        if self.cfg.reduce_draws:
            z = rng.standard_normal((B1, size))
            return base[:, None] + (self.root_nh * np.linalg.norm(self.ell) * sd)[:, None] * z
        out = np.empty((B1, size))
        for b in range(B1):
            eps = sd[b] * rng.standard_normal((size, self.n))
            out[b] = base[b] + self.root_nh * (eps @ self.ell)
        return out


def np_statistic(y, cfg: NpConfig) -> NpStatistic:
    return KernelRegression(y, cfg).summary()
