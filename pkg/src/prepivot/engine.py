"""Bootstrap p-values and their prepivoted versions.

The engine is model agnostic.  A model implements :class:`BootstrapProblem`
(bound to one data set) and the functions here turn its draws into the
standard p-value, the plug-in and double-bootstrap modified p-values, the
bias-removed p-value and a prepivoted confidence bound.

Randomness: first-level draws come from ``stream.split(1)`` and all
second-level draws from ``stream.split(2)``.  Row ``b`` of the first-level
block and row ``b`` of the second-level block therefore depend only on the
stream, ``b`` and the block sizes, never on scheduling.
"""

from __future__ import annotations

import math
import warnings
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np
from scipy.special import ndtr, ndtri

from prepivot.errors import CapabilityError, DomainError, ParameterError
from prepivot.numerics.rng import RngStream
from prepivot.numerics.stable import StableLaw

TIE_RULES = ("plain", "add-one")
METHODS = ("standard", "plugin", "double", "bias-removed")


@dataclass(frozen=True)
class BootstrapConfig:
    """Replication counts, tie rule and which p-values to compute."""

    B1: int = 199
    B2: int = 199
    tie_rule: str = "plain"
    methods: tuple[str, ...] = ("standard", "plugin", "double")

    def __post_init__(self) -> None:
        if int(self.B1) < 1:
            raise ParameterError("B1 must be at least 1")
        if "double" in self.methods and int(self.B2) < 1:
            raise ParameterError("B2 must be at least 1 for the double bootstrap")
        if self.tie_rule not in TIE_RULES:
            raise ParameterError(f"tie rule must be one of {TIE_RULES}")
        bad = set(self.methods) - set(METHODS)
        if bad:
            raise ParameterError(f"unknown methods {sorted(bad)}")
        object.__setattr__(self, "methods", tuple(self.methods))

    def with_methods(self, *methods: str) -> BootstrapConfig:
        return replace(self, methods=tuple(methods))


def _rank(count, total: int, tie_rule: str):
    if tie_rule == "plain":
        return count / total
    return (count + 1) / (total + 1)


def standard_p_value(Tn: float, draws, tie_rule: str = "plain") -> float:
    """Share of bootstrap draws at or below ``Tn``."""
    draws = np.asarray(draws, dtype=float).ravel()
    if draws.size == 0:
        raise ParameterError("no bootstrap draws")
    if tie_rule not in TIE_RULES:
        raise ParameterError(f"tie rule must be one of {TIE_RULES}")
    return float(_rank(np.count_nonzero(draws <= Tn), draws.size, tie_rule))


def inner_p_values(Tstar, Tstar2, tie_rule: str = "plain") -> np.ndarray:
    """Row-wise p-values: share of row ``b`` of ``Tstar2`` at or below ``Tstar[b]``."""
    Tstar = np.asarray(Tstar, dtype=float)
    Tstar2 = np.asarray(Tstar2, dtype=float)
    counts = np.count_nonzero(Tstar2 <= Tstar[:, None], axis=1)
    return _rank(counts, Tstar2.shape[1], tie_rule)


def bias_removed_p_value(Tn: float, Bn: float, centred_draws, tie_rule: str = "plain") -> float:
    """Share of draws of ``T* - B*`` at or below ``Tn - Bn``."""
    return standard_p_value(Tn - Bn, centred_draws, tie_rule)


def tail_variants(p_left: float) -> tuple[float, float]:
    """Right-tail and equal-tailed versions of a left-tail p-value."""
    if not 0.0 <= p_left <= 1.0:
        raise DomainError("p-value outside [0, 1]")
    return 1.0 - p_left, min(1.0, 2.0 * min(p_left, 1.0 - p_left))


# --------------------------------------------------------------------------
# prepivot maps


@dataclass(frozen=True)
class PrepivotMap:
    """Estimated distribution function ``H`` of the standard p-value.

    ``gaussian-scale``: ``Phi(Phi^{-1}(u) / m)``;
    ``gaussian-shift``: ``Phi(Phi^{-1}(u) - b_over_v)``;
    ``stable``: ``Psi_alpha(omega * Psi_alpha^{-1}(u))``;
    ``empirical``: share of stored inner p-values at or below ``u``.
    """

    kind: str
    params: tuple = ()
    draws: np.ndarray | None = field(default=None, compare=False, repr=False)
    tie_rule: str = "plain"

    @classmethod
    def gaussian_scale(cls, m: float) -> PrepivotMap:
        if not m > 0:
            raise ParameterError("scale ratio must be positive")
        return cls("gaussian-scale", (float(m),))

    @classmethod
    def gaussian_shift(cls, b_over_v: float) -> PrepivotMap:
        return cls("gaussian-shift", (float(b_over_v),))

    @classmethod
    def stable(cls, alpha: float, omega: float) -> PrepivotMap:
        if not omega > 0:
            raise ParameterError("omega must be positive")
        return cls("stable", (float(alpha), float(omega)))

    @classmethod
    def empirical(cls, draws, tie_rule: str = "plain") -> PrepivotMap:
        d = np.sort(np.asarray(draws, dtype=float).ravel())
        if d.size == 0:
            raise ParameterError("empirical map needs draws")
        return cls("empirical", (), d, tie_rule)

    @classmethod
    def identity(cls) -> PrepivotMap:
        return cls.gaussian_scale(1.0)

    def __call__(self, p: float) -> float:
        return apply_prepivot(self, p)

    def inverse(self, v: float) -> float:
        """Smallest ``u`` with ``H(u) >= v`` (closed form where available)."""
        if not 0.0 <= v <= 1.0:
            raise DomainError("probability outside [0, 1]")
        if v in (0.0, 1.0) and self.kind != "empirical":
            return v
        if self.kind == "gaussian-scale":
            return float(ndtr(self.params[0] * ndtri(v)))
        if self.kind == "gaussian-shift":
            return float(ndtr(ndtri(v) + self.params[0]))
        if self.kind == "stable":
            alpha, omega = self.params
            law = StableLaw(alpha)
            return float(law.cdf(law.quantile(v) / omega))
        d = self.draws
        B = d.size
        k = math.ceil(v * B - 1e-12) if self.tie_rule == "plain" else math.ceil(v * (B + 1) - 1e-12) - 1
        if k <= 0:
            return 0.0
        return float(d[min(k, B) - 1])


def apply_prepivot(H: PrepivotMap, p: float) -> float:
    """Evaluate the prepivot map at ``p``; 0 and 1 are fixed points."""
    if not 0.0 <= p <= 1.0:
        raise DomainError("p-value outside [0, 1]")
    if H.kind == "empirical":
        count = np.searchsorted(H.draws, p, side="right")
        return float(_rank(count, H.draws.size, H.tie_rule))
    if p in (0.0, 1.0):
        return float(p)
    if H.kind == "gaussian-scale":
        return float(ndtr(ndtri(p) / H.params[0]))
    if H.kind == "gaussian-shift":
        return float(ndtr(ndtri(p) - H.params[0]))
    if H.kind == "stable":
        alpha, omega = H.params
        if omega == 1.0:
            return float(p)
        law = StableLaw(alpha)
        return float(law.cdf(omega * law.quantile(p)))
    raise ParameterError(f"unknown map kind {H.kind!r}")


# --------------------------------------------------------------------------
# problem contract


class BootstrapProblem(ABC):
    """A test statistic bound to one data set, with its bootstrap scheme.

    ``resample`` returns an opaque batch of first-level draws; the model
    decides how to store it.  ``statistic_star`` maps the batch to the vector
    of ``T*`` values.  Models that support the double bootstrap override
    ``statistic_star2``, which for every first-level draw produces ``size``
    second-level statistics, already corrected as the model requires.
    """

    #: scale g(n) and point estimate used by confidence bounds
    gn: float = 1.0
    theta_hat: float = float("nan")

    @abstractmethod
    def statistic(self) -> float:
        """Observed ``T_n``."""

    @abstractmethod
    def resample(self, stream: RngStream, size: int) -> Any:
        """Draw ``size`` first-level bootstrap samples."""

    @abstractmethod
    def statistic_star(self, draws: Any) -> np.ndarray:
        """``T*`` for each first-level sample."""

    def statistic_star2(self, draws: Any, stream: RngStream, size: int) -> np.ndarray:
        """``(len(draws), size)`` matrix of second-level statistics."""
        raise CapabilityError(f"{type(self).__name__} has no second-level bootstrap")

    def plugin_map(self) -> PrepivotMap:
        raise CapabilityError(f"{type(self).__name__} has no plug-in prepivot map")

    def bias_terms(self, draws: Any) -> tuple[float, np.ndarray]:
        """``(B_n_hat, B*_hat per draw)``."""
        raise CapabilityError(f"{type(self).__name__} exposes no bias terms")

    def retries(self, draws: Any) -> int:
        return int(getattr(draws, "retries", 0))


# --------------------------------------------------------------------------
# reports


@dataclass
class PValueReport:
    p_hat: float
    p_plugin: float | None = None
    p_double: float | None = None
    p_bias_removed: float | None = None
    m_hat: float | None = None
    statistic: float = float("nan")
    diagnostics: dict = field(default_factory=dict)

    @property
    def p_modified(self) -> float:
        for p in (self.p_double, self.p_plugin):
            if p is not None:
                return p
        return self.p_hat

    @property
    def p_right(self) -> float:
        return tail_variants(self.p_modified)[0]

    @property
    def p_equal_tailed(self) -> float:
        return tail_variants(self.p_modified)[1]

    def p_value(self, method: str) -> float | None:
        return {
            "standard": self.p_hat,
            "plugin": self.p_plugin,
            "double": self.p_double,
            "bias-removed": self.p_bias_removed,
        }[method]

    def as_row(self) -> dict:
        row = {
            "statistic": self.statistic,
            "p_hat": self.p_hat,
            "p_tilde_plugin": self.p_plugin,
            "p_tilde_double": self.p_double,
            "p_bias_removed": self.p_bias_removed,
            "p_right": self.p_right,
            "p_equal_tailed": self.p_equal_tailed,
            "m_hat": self.m_hat,
        }
        row.update({k: v for k, v in self.diagnostics.items() if np.isscalar(v)})
        return row


def bootstrap_p_values(
    problem: BootstrapProblem, config: BootstrapConfig, stream: RngStream
) -> PValueReport:
    """Compute every p-value listed in ``config.methods`` for one data set."""
    methods = set(config.methods) | {"standard"}
    Tn = float(problem.statistic())
    draws = problem.resample(stream.split(1), config.B1)
    Tstar = np.asarray(problem.statistic_star(draws), dtype=float)
    p_hat = standard_p_value(Tn, Tstar, config.tie_rule)
    report = PValueReport(p_hat=p_hat, statistic=Tn)
    diag = {
        "B1": config.B1,
        "B2": config.B2 if "double" in methods else 0,
        "ties": int(np.count_nonzero(Tstar == Tn)),
        "outer_draws": int(Tstar.size),
        "inner_draws": 0,
        "retries": problem.retries(draws),
    }
    if "plugin" in methods:
        H = problem.plugin_map()
        report.p_plugin = apply_prepivot(H, p_hat)
        if H.kind == "gaussian-scale":
            report.m_hat = H.params[0]
    if "double" in methods:
        Tss = np.asarray(problem.statistic_star2(draws, stream.split(2), config.B2), dtype=float)
        if Tss.shape != (Tstar.size, config.B2):
            raise ParameterError("second-level block has the wrong shape")
        p_inner = inner_p_values(Tstar, Tss, config.tie_rule)
        report.p_double = apply_prepivot(PrepivotMap.empirical(p_inner, config.tie_rule), p_hat)
        diag["inner_draws"] = int(Tss.size)
        diag["retries"] = problem.retries(draws)
    if "bias-removed" in methods:
        Bn, Bstar = problem.bias_terms(draws)
        report.p_bias_removed = bias_removed_p_value(Tn, Bn, Tstar - Bstar, config.tie_rule)
    report.diagnostics = diag
    return report


def double_bootstrap_p(problem: BootstrapProblem, config: BootstrapConfig, stream: RngStream) -> PValueReport:
    """Standard and double-bootstrap p-values for one data set."""
    if type(problem).statistic_star2 is BootstrapProblem.statistic_star2:
        raise CapabilityError(f"{type(problem).__name__} has no second-level bootstrap")
    methods = tuple(dict.fromkeys(("standard",) + tuple(config.methods) + ("double",)))
    return bootstrap_p_values(problem, replace(config, methods=methods), stream)


def empirical_quantile(draws, level: float) -> float:
    """Smallest draw whose empirical cdf reaches ``level`` (clamped with a warning)."""
    d = np.sort(np.asarray(draws, dtype=float).ravel())
    k = math.ceil(level * d.size - 1e-12)
    if k < 1 or k > d.size:
        warnings.warn("target quantile outside the range of the draws; clamped", RuntimeWarning, stacklevel=2)
        k = min(max(k, 1), d.size)
    return float(d[k - 1])


def prepivot_ci(theta_hat: float, gn: float, Tstar, H: PrepivotMap, alpha: float) -> tuple[float, float]:
    """Lower confidence bound ``theta_hat - q(H^{-1}(1 - alpha)) / gn``."""
    if not 0.0 < alpha < 1.0:
        raise ParameterError("alpha must lie in (0, 1)")
    if not gn > 0:
        raise ParameterError("gn must be positive")
    target = H.inverse(1.0 - alpha)
    return theta_hat - empirical_quantile(Tstar, target) / gn, math.inf
