"""Ridge regression test of a linear contrast ``g' theta = r``.

With ``S~ = S_xx + (c_n / n) I`` the ridge estimate is ``S~^{-1} S_xy`` and
the statistic ``sqrt(n) (g' theta~ - r)`` carries the bias
``-c_n n^{-1/2} g' S~^{-1} theta``.  Inference uses the pairs bootstrap,
centred at the OLS estimate of the level below.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from prepivot.engine import BootstrapProblem, PrepivotMap
from prepivot.errors import ParameterError, RankError
from prepivot.models import _pairs
from prepivot.numerics.linalg import COND_CAP
from prepivot.numerics.rng import RngStream


@dataclass(frozen=True)
class RidgeConfig:
    c_n: float = 0.0
    g: tuple[float, ...] = (1.0,)
    r: float = 0.0

    def __post_init__(self) -> None:
        if not self.c_n >= 0:
            raise ParameterError("c_n must be non-negative")
        g = np.asarray(self.g, dtype=float).ravel()
        if g.size == 0 or not np.any(g):
            raise ParameterError("g must be a non-zero vector")
        object.__setattr__(self, "g", tuple(float(v) for v in g))


@dataclass(frozen=True)
class RidgeStatistic:
    T_n: float
    B_hat: float
    theta_tilde: np.ndarray
    theta_ols: np.ndarray


def _solve(S: np.ndarray, rhs: np.ndarray, shift: float) -> np.ndarray:
    """``(S + shift I)^{-1} rhs`` for a batch ``S`` of shape ``(B, p, p)``."""
    p = S.shape[-1]
    if p == 2:
        # Cramer's rule; blocks reaching here passed the condition-number cap
        a, b, d = S[:, 0, 0] + shift, S[:, 0, 1], S[:, 1, 1] + shift
        det = a * d - b * b
        return np.stack(((d * rhs[:, 0] - b * rhs[:, 1]) / det, (a * rhs[:, 1] - b * rhs[:, 0]) / det), axis=-1)
    return np.linalg.solve(S + shift * np.eye(p), rhs[..., None])[..., 0]


@dataclass
class RidgeDraws(_pairs.PairsDraws):
    theta_tilde: np.ndarray = field(default_factory=lambda: np.zeros(0))
    theta_ols: np.ndarray = field(default_factory=lambda: np.zeros(0))
    S: np.ndarray = field(default_factory=lambda: np.zeros(0))


class RidgeRegression(BootstrapProblem):
    """Ridge contrast test on one data set (rows ``(y_t, x_t)``)."""

    def __init__(self, y, X, cfg: RidgeConfig) -> None:
        y = np.asarray(y, dtype=float).ravel()
        X = np.asarray(X, dtype=float).reshape(y.size, -1)
        self.n, self.p = X.shape
        self.cfg = cfg
        self.g = np.asarray(cfg.g)
        if self.g.size != self.p:
            raise ParameterError("g must have one entry per regressor")
        self.y, self.X = y, X
        V = np.column_stack((y, X))
        self._prod = _pairs.row_products(V)
        S = (V.T @ V / self.n)[None]
        if not _pairs.well_conditioned(S[:, 1:, 1:])[0]:
            raise RankError("S_xx is singular or ill-conditioned", block="S_xx")
        self.Sxx, self.Sxy = S[0, 1:, 1:], S[0, 1:, 0]
        self.shift = cfg.c_n / self.n
        self.theta_tilde = _solve(S[:, 1:, 1:], S[:, 1:, 0], self.shift)[0]
        self.theta_ols = _solve(S[:, 1:, 1:], S[:, 1:, 0], 0.0)[0]
        self.theta_hat = float(self.g @ self.theta_tilde)
        self.gn = np.sqrt(self.n)
        self.B_hat = self._bias(S[:, 1:, 1:], self.theta_ols[None])[0]

    def _bias(self, Sxx: np.ndarray, theta_ols: np.ndarray) -> np.ndarray:
        return -self.cfg.c_n / np.sqrt(self.n) * (_solve(Sxx, theta_ols, self.shift) @ self.g)

    def statistic(self) -> float:
        return float(np.sqrt(self.n) * (self.g @ self.theta_tilde - self.cfg.r))

    def summary(self) -> RidgeStatistic:
        return RidgeStatistic(self.statistic(), float(self.B_hat), self.theta_tilde, self.theta_ols)

    def plugin_m(self) -> float:
        St = self.Sxx + self.shift * np.eye(self.p)
        a = np.linalg.solve(St, self.g)
        num = self.g @ np.linalg.solve(self.Sxx, self.g)
        return float(np.sqrt(num / (a @ self.Sxx @ a)))

    def plugin_map(self) -> PrepivotMap:
        return PrepivotMap.gaussian_scale(self.plugin_m())

    # pairs bootstrap -----------------------------------------------------
    def _cross(self, counts: np.ndarray) -> np.ndarray:
        return _pairs.batched_cross(counts, self._prod, self.n, self.p + 1)

    def _ok(self, idx: np.ndarray) -> np.ndarray:
        S = self._cross(_pairs.counts_from_indices(idx, self.n))
        return _pairs.well_conditioned(S[:, 1:, 1:], COND_CAP)

    def resample(self, stream: RngStream, size: int) -> RidgeDraws:
        idx, retries = _pairs.draw_indices(stream.generator(), size, self.n, self._ok, "pairs resample")
        S = self._cross(_pairs.counts_from_indices(idx, self.n))
        tt = _solve(S[:, 1:, 1:], S[:, 1:, 0], self.shift)
        to = _solve(S[:, 1:, 1:], S[:, 1:, 0], 0.0)
        return RidgeDraws(idx, retries, tt, to, S)

    def statistic_star(self, draws: RidgeDraws) -> np.ndarray:
        return np.sqrt(self.n) * ((draws.theta_tilde - self.theta_ols) @ self.g)

    def bias_terms(self, draws: RidgeDraws) -> tuple[float, np.ndarray]:
        return float(self.B_hat), self._bias(draws.S[:, 1:, 1:], draws.theta_ols)

    def statistic_star2(self, draws: RidgeDraws, stream: RngStream, size: int) -> np.ndarray:
        rng = stream.generator()
        n, k = self.n, self.p + 1
        B1 = len(draws)
        out = np.empty((B1, size))
        chunk = max(1, 1_000_000 // (size * n))
        offsets = (np.arange(chunk * size) * n)[:, None]
        for s in range(0, B1, chunk):
            rows = np.arange(s, min(B1, s + chunk))
            pos = rng.integers(0, n, size=(rows.size, size, n))
            # counts over first-level positions, then S** = counts @ products of those rows
            cpos = np.bincount((pos.reshape(-1, n) + offsets[: rows.size * size]).ravel(), minlength=rows.size * size * n)
            cpos = cpos.reshape(rows.size, size, n).astype(float)
            prod_b = self._prod[draws.idx[rows]]
            S = (cpos @ prod_b / n).reshape(rows.size * size, k, k)
            ok = _pairs.well_conditioned(S[:, 1:, 1:])
            if not ok.all():
                S = self._redraw(S, ok, draws, rows, size, rng)
            tt = _solve(S[:, 1:, 1:], S[:, 1:, 0], self.shift).reshape(rows.size, size, self.p)
            out[rows] = np.sqrt(n) * ((tt - draws.theta_ols[rows, None, :]) @ self.g)
        return out

    def _redraw(self, S, ok, draws, rows, size, rng) -> np.ndarray:
        n = self.n
        for flat in np.flatnonzero(~ok):
            base = draws.idx[rows[flat // size]]

            def check(inner: np.ndarray, base=base) -> np.ndarray:
                return self._ok(base[inner])

            inner, retries = _pairs.draw_indices(rng, 1, n, check, "pairs second level")
            draws.retries += retries + 1
            S[flat] = self._cross(_pairs.counts_from_indices(base[inner], n))[0]
        return S


def ridge_statistic(y, X, cfg: RidgeConfig) -> RidgeStatistic:
    return RidgeRegression(y, X, cfg).summary()


def ridge_plugin_m(y, X, cfg: RidgeConfig) -> float:
    return RidgeRegression(y, X, cfg).plugin_m()
