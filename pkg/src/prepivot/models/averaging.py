"""Least-squares model averaging with a local-to-zero nuisance coefficient.

The target is the coefficient on ``x``.  Submodel ``m`` regresses ``y`` on
``x`` and the columns ``Z_m`` of ``Z`` picked by its selector; the averaged
estimator is ``sum_m w_m S_xy.Zm / S_xx.Zm``.  It is linear in ``y``:
``beta_tilde = A y`` with ``A = sum_m w_m r_m' / (r_m' r_m)`` and ``r_m`` the
residual of ``x`` on ``Z_m``.  Omitted columns bias it by
``B_n = Q_n sqrt(n) delta``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from prepivot.engine import BootstrapProblem, PrepivotMap
from prepivot.errors import CapabilityError, DegeneracyError, ParameterError, RankError
from prepivot.models import _pairs
from prepivot.numerics.linalg import CrossProducts, OlsFit, checked_solve, coefficient_rows, ols, partial_cross
from prepivot.numerics.rng import RngStream

SCHEMES = ("frb-parametric", "frb-residual", "pairs")


@dataclass(frozen=True)
class MaConfig:
    """Averaging weights, submodel selectors and bootstrap scheme.

    ``selectors[m]`` lists the columns of ``Z`` in submodel ``m``.  With
    ``include_intercept`` a constant joins every submodel and the full
    model.  ``unit_variance`` makes the parametric scheme draw N(0, 1) errors
    instead of N(0, sigma2_hat).  ``reduce_draws`` lets the parametric
    second level draw the Gaussian linear form ``sqrt(n) A eps**`` directly.
    """

    weights: tuple[float, ...] = (0.5, 0.5)
    selectors: tuple[tuple[int, ...], ...] = ((), (0,))
    scheme: str = "frb-parametric"
    include_intercept: bool = True
    null_value: float = 0.0
    unit_variance: bool = False
    reduce_draws: bool = True

    def __post_init__(self) -> None:
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size == 0 or len(self.selectors) != w.size:
            raise ParameterError("one weight per submodel is required")
        if np.any(w < 0) or np.any(w > 1) or abs(w.sum() - 1.0) > 1e-12:
            raise ParameterError("weights must lie in [0, 1] and sum to 1")
        for sel in self.selectors:
            if len(set(sel)) != len(sel) or any(int(i) < 0 for i in sel):
                raise ParameterError("selectors must list distinct non-negative column indices")
        if self.scheme not in SCHEMES:
            raise ParameterError(f"scheme must be one of {SCHEMES}")
        object.__setattr__(self, "weights", tuple(float(v) for v in w))
        object.__setattr__(self, "selectors", tuple(tuple(sorted(int(i) for i in s)) for s in self.selectors))

    def selector_matrix(self, m: int, q: int) -> np.ndarray:
        """0/1 matrix ``R_m`` with ``Z_m = Z R_m``."""
        sel = self.selectors[m]
        R = np.zeros((q, len(sel)))
        R[list(sel), np.arange(len(sel))] = 1.0
        return R


@dataclass(frozen=True)
class MaAuxiliaries:
    Q: np.ndarray
    A: np.ndarray
    d_bar: np.ndarray
    b_bar: np.ndarray
    V: np.ndarray
    m_hat: float

    @property
    def vd2(self) -> float:
        return float(self.V[0, 0] + self.V[1, 1] - 2.0 * self.V[0, 1])


@dataclass(frozen=True)
class MaStatistic:
    T_n: float
    B_hat: float
    beta_tilde: float
    full_fit: OlsFit


@dataclass(frozen=True)
class PairsPlugin:
    kappa2: float
    vs2: float


def ma_moment_auxiliaries(Sww: np.ndarray, weights, selectors, sigma2: float = 1.0):
    """``(Q, d_bar, b_bar, V)`` from a moment matrix in the layout ``(x, Z)``.

    Works equally with sample cross-products or population moments.
    """
    Sww = np.asarray(Sww, dtype=float)
    k = Sww.shape[0]
    Sxx, SxZ, SZZ = Sww[0, 0], Sww[0, 1:], Sww[1:, 1:]
    d = np.zeros(k)
    Q = np.zeros(k - 1)
    for m, (w, sel) in enumerate(zip(weights, selectors)):
        sel = np.asarray(sel, dtype=int)
        dm = np.zeros(k)
        dm[0] = 1.0
        if sel.size:
            coef = checked_solve(SZZ[np.ix_(sel, sel)], SxZ[sel], block=f"Z_{m}")
            sxx_m = Sxx - SxZ[sel] @ coef
            sxZ_m = SxZ - coef @ SZZ[sel, :]
            dm[1 + sel] = -coef
        else:
            sxx_m, sxZ_m = Sxx, SxZ
        if not sxx_m > 0:
            raise RankError(f"x is collinear with the columns of submodel {m}", block=f"S_xx.Z_{m}")
        d += w / sxx_m * dm
        if sel.size < k - 1:
            Q += w * sxZ_m / sxx_m
    SZZx = SZZ - np.outer(SxZ, SxZ) / Sxx
    QS = checked_solve(SZZx, Q, block="S_ZZ.x") if Q.size else Q
    b = np.concatenate(([-(QS @ SxZ) / Sxx], QS))
    G = np.vstack((d, b))
    V = sigma2 * G @ Sww @ G.T
    return Q, d, b, 0.5 * (V + V.T)


def _batched_averaging(S: np.ndarray, selectors, weights):
    """Averaged estimate, full-model OLS and ``Q`` for a batch of cross matrices.

    ``S`` has shape ``(B, K, K)`` in the layout ``(y, x, Z)``.
    """
    B, K, _ = S.shape
    cols = np.r_[1, 0, 2:K]
    beta_tilde = np.zeros(B)
    Q = np.zeros((B, K - 2))
    for w, sel in zip(weights, selectors):
        idx = 2 + np.asarray(sel, dtype=int)
        row = S[:, 1, cols]
        if idx.size:
            X = np.linalg.solve(S[:, idx[:, None], idx[None, :]], S[:, idx[:, None], cols[None, :]])
            row = row - np.einsum("bi,bij->bj", S[:, 1, idx], X)
        beta_tilde += w * row[:, 1] / row[:, 0]
        Q += w * row[:, 2:] / row[:, :1]
    wi = np.r_[1, 2:K]
    theta = np.linalg.solve(S[:, wi[:, None], wi[None, :]], S[:, wi, 0][..., None])[..., 0]
    return beta_tilde, theta[:, 0], theta[:, 1:], Q


@dataclass
class FrbDraws:
    eps: np.ndarray
    retries: int = 0

    def __len__(self) -> int:
        return self.eps.shape[0]


@dataclass
class MaPairsDraws(_pairs.PairsDraws):
    beta_full: np.ndarray = field(default_factory=lambda: np.zeros(0))
    delta_full: np.ndarray = field(default_factory=lambda: np.zeros(0))
    Q: np.ndarray = field(default_factory=lambda: np.zeros(0))
    beta_tilde: np.ndarray = field(default_factory=lambda: np.zeros(0))


class ModelAveraging(BootstrapProblem):
    """Model-averaging test of ``beta = null_value`` on one data set."""

    def __init__(self, y, x, Z=None, cfg: MaConfig | None = None) -> None:
        self.cfg = cfg or MaConfig()
        y = np.asarray(y, dtype=float).ravel()
        x = np.asarray(x, dtype=float).ravel()
        n = y.size
        if x.size != n:
            raise ParameterError("y and x must have the same length")
        Zu = np.zeros((n, 0)) if Z is None else np.asarray(Z, dtype=float).reshape(n, -1)
        self.q = Zu.shape[1]
        for sel in self.cfg.selectors:
            if any(i >= self.q for i in sel):
                raise ParameterError("selector refers to a missing column of Z")
        shift = 1 if self.cfg.include_intercept else 0
        Zf = np.column_stack((np.ones(n), Zu)) if shift else Zu
        self.selectors = [np.r_[np.arange(shift), shift + np.asarray(s, dtype=int)].astype(int) for s in self.cfg.selectors]
        self.weights = np.asarray(self.cfg.weights)
        self.n, self.y, self.x, self.Z, self.Zf = n, y, x, Zu, Zf
        self.W = np.column_stack((x, Zf))
        if self.W.shape[1] >= n:
            raise RankError("too few observations for the full model", block="W")

        names = [f"z{j}" for j in range(Zf.shape[1])]
        blocks = {"y": y, "x": x, **{nm: Zf[:, j] for j, nm in enumerate(names)}}
        self.cross = CrossProducts(blocks)
        A = np.zeros(n)
        Q = np.zeros(Zf.shape[1])
        for m, (w, sel) in enumerate(zip(self.weights, self.selectors)):
            Zm = [names[j] for j in sel]
            try:
                sxx = partial_cross(self.cross, "x", "x", Zm)[0, 0]
                sxz = partial_cross(self.cross, "x", names, Zm)[0]
                r = ols(x, Zf[:, sel]).residuals if sel.size else x
            except RankError as exc:
                raise RankError(f"submodel {m}: {exc}", block=f"Z_{m}") from exc
            if not sxx > 0:
                raise RankError(f"submodel {m}: x is collinear with Z_{m}", block=f"Z_{m}")
            A += w * r / (r @ r)
            if sel.size < Zf.shape[1]:
                # a submodel holding every column of Z has S_xZ.Z = 0 exactly
                Q += w * sxz / sxx
        self.A, self.Q = A, Q

        self.fit = ols(y, self.W)
        self.beta_hat = float(self.fit.coefficients[0])
        self.delta_hat = self.fit.coefficients[1:]
        self.sigma2 = self.fit.sigma2
        self.P = coefficient_rows(self.W)
        self.beta_tilde = float(A @ y)
        self.theta_hat = self.beta_tilde
        self.gn = np.sqrt(n)
        self.B_hat = float(np.sqrt(n) * Q @ self.delta_hat)
        self._names = names
        self._aux: MaAuxiliaries | None = None
        self._products = None

    # point estimates -----------------------------------------------------
    def beta_tilde_partial(self) -> float:
        """Averaged estimate through the partial-cross formula."""
        total = 0.0
        for w, sel in zip(self.weights, self.selectors):
            Zm = [self._names[j] for j in sel]
            total += w * partial_cross(self.cross, "x", "y", Zm)[0, 0] / partial_cross(self.cross, "x", "x", Zm)[0, 0]
        return float(total)

    def statistic(self) -> float:
        return float(np.sqrt(self.n) * (self.beta_tilde - self.cfg.null_value))

    def summary(self) -> MaStatistic:
        return MaStatistic(self.statistic(), self.B_hat, self.beta_tilde, self.fit)

    # plug-in quantities ----------------------------------------------------
    def auxiliaries(self) -> MaAuxiliaries:
        if self._aux is None:
            Sww = self.W.T @ self.W / self.n
            sels = [s for s in self.selectors]
            Q, d, b, V = ma_moment_auxiliaries(Sww, self.weights, sels, self.sigma2)
            if not V[0, 0] > 0:
                raise DegeneracyError("v11 is not positive")
            vd2 = V[0, 0] + V[1, 1] - 2.0 * V[0, 1]
            if not vd2 > 0:
                raise DegeneracyError("v_d^2 is not positive")
            self._aux = MaAuxiliaries(Q, self.A, d, b, V, float(np.sqrt(vd2 / V[0, 0])))
        return self._aux

    def pairs_plugin(self) -> PairsPlugin:
        """Extra variance ``kappa2`` the pairs bootstrap adds to ``T* - B_n``.

        Only for a scalar ``z``; each submodel either contains it or omits
        it.  Full models add nothing to ``Q_n``, so ``kappa2`` scales with the
        total weight of the short models.
        """
        sels = [tuple(s) for s in self.cfg.selectors]
        if self.q != 1 or any(s not in ((), (0,)) for s in sels):
            raise CapabilityError("pairs plug-in needs a scalar z")
        w_short = float(sum(w for w, s in zip(self.weights, sels) if s == ()))
        x, z = self.x, self.Z[:, 0]
        if self.cfg.include_intercept:
            x, z = x - x.mean(), z - z.mean()
        Sxx, Sxz = x @ x / self.n, x @ z / self.n
        delta = float(self.delta_hat[-1])
        h = (x * z) / Sxx - (x * x) * Sxz / Sxx**2
        kappa2 = (w_short * delta) ** 2 * float(np.mean(h * h))
        return PairsPlugin(kappa2, float(self.auxiliaries().V[0, 0] + kappa2))

    def plugin_m(self) -> float:
        aux = self.auxiliaries()
        if self.cfg.scheme == "pairs":
            return float(np.sqrt(aux.vd2 / self.pairs_plugin().vs2))
        return aux.m_hat

    def plugin_map(self) -> PrepivotMap:
        return PrepivotMap.gaussian_scale(self.plugin_m())

    # resampling ------------------------------------------------------------
    def _error_scale(self) -> float:
        return 1.0 if self.cfg.unit_variance else float(np.sqrt(self.sigma2))

    def _pair_products(self):
        if self._products is None:
            V = np.column_stack((self.y, self.W))
            self._products = (_pairs.row_products(V), V.shape[1])
        return self._products

    def _cross_batch(self, idx: np.ndarray) -> np.ndarray:
        prod, k = self._pair_products()
        return _pairs.batched_cross(_pairs.counts_from_indices(idx, self.n), prod, self.n, k)

    def _pairs_ok(self, idx: np.ndarray) -> np.ndarray:
        return _pairs.well_conditioned(self._cross_batch(idx)[:, 1:, 1:])

    def resample(self, stream: RngStream, size: int):
        rng = stream.generator()
        n = self.n
        if self.cfg.scheme == "frb-parametric":
            return FrbDraws(self._error_scale() * rng.standard_normal((size, n)))
        if self.cfg.scheme == "frb-residual":
            pool = self.fit.residuals - self.fit.residuals.mean()
            return FrbDraws(pool[rng.integers(0, n, size=(size, n))])
        idx, retries = _pairs.draw_indices(rng, size, n, self._pairs_ok, "pairs resample")
        bt, bf, df, Q = _batched_averaging(self._cross_batch(idx), self.selectors, self.weights)
        return MaPairsDraws(idx, retries, bf, df, Q, bt)

    def bootstrap_data(self, draws, b: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(y*, x*, Z*)`` of first-level sample ``b`` (for inspection)."""
        if isinstance(draws, FrbDraws):
            return self.fit.fitted + draws.eps[b], self.x, self.Z
        i = draws.idx[b]
        return self.y[i], self.x[i], self.Z[i]

    def statistic_star(self, draws) -> np.ndarray:
        if isinstance(draws, FrbDraws):
            return self.B_hat + np.sqrt(self.n) * (draws.eps @ self.A)
        return np.sqrt(self.n) * (draws.beta_tilde - self.beta_hat)

    def bias_terms(self, draws) -> tuple[float, np.ndarray]:
        if isinstance(draws, FrbDraws):
            delta_star = self.delta_hat + draws.eps @ self.P[1:].T
            return self.B_hat, np.sqrt(self.n) * delta_star @ self.Q
        return self.B_hat, np.sqrt(self.n) * np.einsum("bj,bj->b", draws.Q, draws.delta_full)

    def statistic_star2(self, draws, stream: RngStream, size: int) -> np.ndarray:
        rng = stream.generator()
        n, rn = self.n, np.sqrt(self.n)
        if isinstance(draws, FrbDraws):
            _, Bstar = self.bias_terms(draws)
            resid = draws.eps - (draws.eps @ self.W) @ self.P
            B1 = len(draws)
            if self.cfg.scheme == "frb-parametric":
                sd = np.ones(B1) if self.cfg.unit_variance else np.sqrt(np.mean(resid**2, axis=1))
                if self.cfg.reduce_draws:
                    z = rng.standard_normal((B1, size))
                    return Bstar[:, None] + (sd * rn * np.linalg.norm(self.A))[:, None] * z
                out = np.empty((B1, size))
                for b in range(B1):
                    out[b] = Bstar[b] + rn * (sd[b] * rng.standard_normal((size, n))) @ self.A
                return out
            pool = resid - resid.mean(axis=1, keepdims=True)
            out = np.empty((B1, size))
            chunk = max(1, 2_000_000 // (size * n))
            for s in range(0, B1, chunk):
                rows = slice(s, min(B1, s + chunk))
                idx = rng.integers(0, n, size=(rows.stop - rows.start, size, n))
                vals = np.take_along_axis(pool[rows][:, None, :], idx, axis=2)
                out[rows] = Bstar[rows, None] + rn * (vals @ self.A)
            return out
        return self._pairs_second_level(draws, rng, size)

    def _pairs_second_level(self, draws: MaPairsDraws, rng: np.random.Generator, size: int) -> np.ndarray:
        n = self.n
        B1 = len(draws)
        out = np.empty((B1, size))
        for b in range(B1):
            base = draws.idx[b]

            def ok(inner: np.ndarray, base=base) -> np.ndarray:
                return self._pairs_ok(base[inner])

            inner, retries = _pairs.draw_indices(rng, size, n, ok, "pairs second level")
            draws.retries += retries
            bt, _, _, _ = _batched_averaging(self._cross_batch(base[inner]), self.selectors, self.weights)
            out[b] = np.sqrt(n) * (bt - draws.beta_full[b])
        return out


def ma_statistic(y, x, Z, cfg: MaConfig) -> MaStatistic:
    """Statistic, estimated bias and full-model fit."""
    return ModelAveraging(y, x, Z, cfg).summary()


def ma_plugin_m(y, x, Z, cfg: MaConfig) -> MaAuxiliaries:
    """Plug-in auxiliaries, including the scale ratio ``m_hat``."""
    return ModelAveraging(y, x, Z, cfg).auxiliaries()


def ma_pairs_plugin(y, x, Z, cfg: MaConfig) -> PairsPlugin:
    return ModelAveraging(y, x, Z, cfg).pairs_plugin()
