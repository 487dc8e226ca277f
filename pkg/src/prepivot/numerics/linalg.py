"""Scaled cross-products, partial regression and least squares.

``S_ab = a'b / n`` over named column blocks, and the partialled product
``S_ab.c = S_ab - S_ac S_cc^{-1} S_cb``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from prepivot.errors import ParameterError, RankError

COND_CAP = 1e12


def _as_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        return a[:, None]
    if a.ndim != 2:
        raise ParameterError("blocks must be vectors or matrices")
    return a


def checked_solve(A: np.ndarray, B: np.ndarray, block: str = "S_cc", cap: float = COND_CAP) -> np.ndarray:
    """Solve ``A X = B`` after checking the condition number of ``A``."""
    A = np.atleast_2d(A)
    if A.shape[0] == 0:
        return np.zeros((0,) + np.shape(B)[1:])
    cond = np.linalg.cond(A)
    if not np.isfinite(cond) or cond > cap:
        raise RankError(f"block {block} is singular or ill-conditioned (cond={cond:.3g})", block=block, cond=cond)
    return np.linalg.solve(A, B)


class CrossProducts:
    """All scaled inner products among a set of named column blocks."""

    def __init__(self, blocks: Mapping[str, np.ndarray], cap: float = COND_CAP) -> None:
        if not blocks:
            raise ParameterError("at least one block is required")
        mats = {name: _as_matrix(v) for name, v in blocks.items()}
        sizes = {m.shape[0] for m in mats.values()}
        if len(sizes) != 1:
            raise ParameterError("blocks must share the number of rows")
        self.n = sizes.pop()
        self.cap = cap
        self._slices: dict[str, slice] = {}
        start = 0
        for name, m in mats.items():
            self._slices[name] = slice(start, start + m.shape[1])
            start += m.shape[1]
        X = np.hstack(list(mats.values()))
        S = X.T @ X / self.n
        self.S = 0.5 * (S + S.T)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(self._slices)

    def _index(self, spec: str | Sequence[str]) -> np.ndarray:
        names = (spec,) if isinstance(spec, str) else tuple(spec)
        parts = []
        for name in names:
            if name not in self._slices:
                raise ParameterError(f"unknown block {name!r}")
            s = self._slices[name]
            parts.append(np.arange(s.start, s.stop))
        return np.concatenate(parts) if parts else np.zeros(0, dtype=int)

    def block(self, a: str | Sequence[str], b: str | Sequence[str]) -> np.ndarray:
        """``S_ab``."""
        return self.S[np.ix_(self._index(a), self._index(b))]

    def partial(self, a, b, c=()) -> np.ndarray:
        """``S_ab.c``; returns ``S_ab`` when ``c`` is empty."""
        return partial_cross(self, a, b, c)


def partial_cross(S: CrossProducts, a, b, c=()) -> np.ndarray:
    """``S_ab - S_ac S_cc^{-1} S_cb`` with a conditioning check on ``S_cc``."""
    Sab = S.block(a, b)
    ic = S._index(c)
    if ic.size == 0:
        return Sab
    label = c if isinstance(c, str) else ",".join(c)
    Scc = S.S[np.ix_(ic, ic)]
    Sac = S.S[np.ix_(S._index(a), ic)]
    Scb = S.S[np.ix_(ic, S._index(b))]
    return Sab - Sac @ checked_solve(Scc, Scb, block=label, cap=S.cap)


@dataclass(frozen=True)
class OlsFit:
    """Least-squares fit of ``y`` on ``W``."""

    coefficients: np.ndarray
    residuals: np.ndarray
    fitted: np.ndarray
    sigma2: float

    @property
    def n(self) -> int:
        return self.residuals.shape[0]


def ols(y, W, cap: float = COND_CAP) -> OlsFit:
    """Least squares through a QR factorisation of ``W``; sigma2 divides by n."""
    y = np.asarray(y, dtype=float)
    W = _as_matrix(W)
    if W.shape[0] != y.shape[0]:
        raise ParameterError("y and W must have the same number of rows")
    if W.shape[1] > W.shape[0]:
        raise RankError("more regressors than observations", block="W")
    Q, R = np.linalg.qr(W)
    d = np.abs(np.diag(R))
    if d.size and (d.min() == 0.0 or d.max() / d.min() > np.sqrt(cap)):
        raise RankError("regressor matrix is rank deficient", block="W", cond=float(d.max() / max(d.min(), 1e-300)))
    coef = np.linalg.solve(R, Q.T @ y) if d.size else np.zeros(0)
    fitted = W @ coef
    resid = y - fitted
    return OlsFit(coef, resid, fitted, float(resid @ resid / y.shape[0]))


def _checked_qr(W, cap: float) -> tuple[np.ndarray, np.ndarray]:
    Q, R = np.linalg.qr(W)
    d = np.abs(np.diag(R))
    if d.size and (d.min() == 0.0 or d.max() / d.min() > np.sqrt(cap)):
        raise RankError("regressor matrix is rank deficient", block="W")
    return Q, R


def coefficient_rows(W, cap: float = COND_CAP) -> np.ndarray:
    """``P = (W'W)^{-1}W'``, so that ``P @ y`` is the OLS coefficient vector."""
    Q, R = _checked_qr(_as_matrix(W), cap)
    return np.linalg.solve(R, Q.T)


def projection_rows(W, cap: float = COND_CAP) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(P, M)`` with ``P = (W'W)^{-1}W'`` and ``M = I - W P``."""
    W = _as_matrix(W)
    Q, R = _checked_qr(W, cap)
    return np.linalg.solve(R, Q.T), np.eye(W.shape[0]) - Q @ Q.T
