"""Compact-support kernels and the constants derived from them.

For a kernel ``K`` on (-1, 1) this module computes ``R_K = int K^2``,
``kappa2 = int u^2 K`` and the scale ratio of the kernel-smoothing
problem,

    m^2 = 4 + (int (K*K)^2 - 4 int K (K*K)) / R_K,

where ``K*K`` is the self-convolution, supported on (-2, 2).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from prepivot.errors import NumericError, ParameterError

_PROFILES: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "epanechnikov": lambda u: 0.75 * (1.0 - u * u),
    "triangular": lambda u: 1.0 - np.abs(u),
    "quartic": lambda u: (15.0 / 16.0) * (1.0 - u * u) ** 2,
}
KERNELS = tuple(_PROFILES)


@dataclass(frozen=True)
class KernelSpec:
    """Symmetric kernel supported on (-1, 1)."""

    kind: str = "epanechnikov"

    def __post_init__(self) -> None:
        if self.kind not in _PROFILES:
            raise ParameterError(f"unknown kernel {self.kind!r}; choose from {sorted(_PROFILES)}")

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        return np.where(np.abs(u) < 1.0, _PROFILES[self.kind](np.clip(u, -1.0, 1.0)), 0.0)


@dataclass(frozen=True)
class KernelConstants:
    R_K: float
    kappa2: float
    m2: float

    @property
    def m_np(self) -> float:
        return float(np.sqrt(self.m2))


def _quad(f, a, b, points=None) -> float:
    value, err = integrate.quad(f, a, b, points=points, epsabs=1e-13, epsrel=1e-13, limit=200)
    if err > 1e-10:
        raise NumericError("kernel quadrature did not converge", {"error": err})
    return value


def self_convolution(k: KernelSpec, u: float) -> float:
    """``(K*K)(u) = int K(s - u) K(s) ds`` by adaptive quadrature."""
    lo, hi = max(-1.0, u - 1.0), min(1.0, u + 1.0)
    if lo >= hi:
        return 0.0
    pts = [p for p in (0.0, u) if lo < p < hi]
    return _quad(lambda s: float(k(s - u) * k(s)), lo, hi, points=pts or None)


def kernel_constants(k: KernelSpec) -> KernelConstants:
    """Kernel constants by nested adaptive quadrature."""
    R_K = _quad(lambda u: float(k(u)) ** 2, -1.0, 1.0, points=[0.0])
    kappa2 = _quad(lambda u: u * u * float(k(u)), -1.0, 1.0, points=[0.0])
    w22 = 2.0 * _quad(lambda u: self_convolution(k, u) ** 2, 0.0, 2.0, points=[1.0])
    w12 = 2.0 * _quad(lambda u: float(k(u)) * self_convolution(k, u), 0.0, 1.0)
    m2 = 4.0 + (w22 - 4.0 * w12) / R_K
    if not m2 > 0:
        raise NumericError("kernel scale ratio is not positive", {"m2": m2})
    return KernelConstants(R_K, kappa2, m2)


def kernel_constants_gauss(k: KernelSpec, order: int = 40) -> KernelConstants:
    """Kernel constants by composite Gauss-Legendre on unit panels.

    The kernels are polynomial between the breakpoints used here, so the rule
    is exact up to rounding; it serves as an independent check of the
    adaptive route.
    """
    x, w = np.polynomial.legendre.leggauss(order)

    def integrate_on(f, edges) -> float:
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            if hi <= lo:
                continue
            half = 0.5 * (hi - lo)
            total += half * float(w @ f(0.5 * (lo + hi) + half * x))
        return total

    def conv(u: np.ndarray) -> np.ndarray:
        out = np.empty_like(u)
        for i, ui in enumerate(u):
            lo, hi = max(-1.0, ui - 1.0), min(1.0, ui + 1.0)
            edges = sorted({lo, hi} | {p for p in (0.0, ui) if lo < p < hi})
            out[i] = integrate_on(lambda s: k(s - ui) * k(s), edges) if lo < hi else 0.0
        return out

    R_K = integrate_on(lambda u: k(u) ** 2, [-1.0, 0.0, 1.0])
    kappa2 = integrate_on(lambda u: u * u * k(u), [-1.0, 0.0, 1.0])
    w22 = integrate_on(lambda u: conv(u) ** 2, [-2.0, -1.0, 0.0, 1.0, 2.0])
    w12 = integrate_on(lambda u: k(u) * conv(u), [-1.0, 0.0, 1.0])
    return KernelConstants(R_K, kappa2, 4.0 + (w22 - 4.0 * w12) / R_K)
