"""Error distributions used by the simulation designs.

Every law is centred at zero and scaled to unit variance when the variance
exists.  Symmetric stable laws are in the parametrisation with
characteristic function ``exp(-|scale * t| ** alpha)``, so ``alpha = 2`` is
N(0, 2 * scale**2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from prepivot.errors import ParameterError
from prepivot.numerics.rng import RngStream

KINDS = ("standard-normal", "student-t", "standardized-chi-square", "symmetric-stable")

_ALIASES = {
    "normal": ("standard-normal", {}),
    "n": ("standard-normal", {}),
    "t3": ("student-t", {"df": 3.0}),
    "chi1": ("standardized-chi-square", {"df": 1.0}),
}


@dataclass(frozen=True)
class DistributionSpec:
    """Law of an error term: ``kind`` plus its shape parameters."""

    kind: str = "standard-normal"
    df: float | None = None
    alpha: float | None = None
    scale: float = 1.0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ParameterError(f"unknown distribution kind {self.kind!r}")
        if self.kind == "student-t" and (self.df is None or not self.df > 2):
            raise ParameterError("student-t needs df > 2 to be standardised")
        if self.kind == "standardized-chi-square" and (self.df is None or not self.df > 0):
            raise ParameterError("chi-square needs df > 0")
        if self.kind == "symmetric-stable":
            if self.alpha is None or not 1.0 < self.alpha <= 2.0:
                raise ParameterError("symmetric stable needs alpha in (1, 2]")
        if not self.scale > 0:
            raise ParameterError("scale must be positive")

    @classmethod
    def parse(cls, name: str) -> DistributionSpec:
        """Build a spec from a short name such as ``normal``, ``t3`` or ``chi1``."""
        key = name.strip().lower()
        if key in _ALIASES:
            kind, kw = _ALIASES[key]
            return cls(kind, **kw)
        if key.startswith("t") and key[1:].replace(".", "", 1).isdigit():
            return cls("student-t", df=float(key[1:]))
        if key.startswith("chi") and key[3:].replace(".", "", 1).isdigit():
            return cls("standardized-chi-square", df=float(key[3:]))
        if key.startswith("stable"):
            return cls("symmetric-stable", alpha=float(key[6:] or 2.0))
        raise ParameterError(f"unknown distribution name {name!r}")

    @property
    def label(self) -> str:
        if self.kind == "standard-normal":
            return "normal"
        if self.kind == "student-t":
            return f"t{self.df:g}"
        if self.kind == "standardized-chi-square":
            return f"chi{self.df:g}"
        return f"stable{self.alpha:g}"


def _as_generator(stream: RngStream | np.random.Generator) -> np.random.Generator:
    if isinstance(stream, RngStream):
        return stream.generator()
    return stream


def stable_variates(alpha: float, size, rng: np.random.Generator) -> np.ndarray:
    """Symmetric stable draws by the Chambers-Mallows-Stuck construction."""
    if not 1.0 < alpha <= 2.0:
        raise ParameterError("symmetric stable needs alpha in (1, 2]")
    v = rng.uniform(-np.pi / 2, np.pi / 2, size)
    w = rng.standard_exponential(size)
    if alpha == 2.0:
        return 2.0 * np.sin(v) * np.sqrt(w)
    return (
        np.sin(alpha * v)
        / np.cos(v) ** (1.0 / alpha)
        * (np.cos((1.0 - alpha) * v) / w) ** ((1.0 - alpha) / alpha)
    )


def sample(spec: DistributionSpec, n, stream: RngStream | np.random.Generator) -> np.ndarray:
    """Draw ``n`` i.i.d. variates (``n`` may be a shape tuple)."""
    if np.ndim(n) == 0 and int(n) < 1:
        raise ParameterError("n must be at least 1")
    rng = _as_generator(stream)
    if spec.kind == "standard-normal":
        return rng.standard_normal(n)
    if spec.kind == "student-t":
        return rng.standard_t(spec.df, n) / np.sqrt(spec.df / (spec.df - 2.0))
    if spec.kind == "standardized-chi-square":
        return (rng.chisquare(spec.df, n) - spec.df) / np.sqrt(2.0 * spec.df)
    return spec.scale * stable_variates(spec.alpha, n, rng)
