"""Monte Carlo designs and the data generating processes behind them."""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from prepivot.engine import METHODS, TIE_RULES, BootstrapConfig, BootstrapProblem, PrepivotMap
from prepivot.errors import ParameterError
from prepivot.models.averaging import MaConfig, ModelAveraging, ma_moment_auxiliaries
from prepivot.models.heavy import ESTIMATORS, HeavyConfig, HeavyTailLocation
from prepivot.models.nonparametric import KernelRegression, NpConfig, cached_kernel_constants
from prepivot.models.ridge import RidgeConfig, RidgeRegression
from prepivot.numerics.distributions import DistributionSpec, sample, stable_variates
from prepivot.numerics.kernels import KernelSpec
from prepivot.numerics.rng import RngStream

MODELS = ("ma", "ridge", "np", "heavy")
MA_SCHEMES = {
    "par": "frb-parametric",
    "frb-parametric": "frb-parametric",
    "non-par": "frb-residual",
    "frb-residual": "frb-residual",
    "pairs": "pairs",
}


@dataclass(frozen=True)
class McDesign:
    """One cell of a Monte Carlo experiment.

    The true parameter is the null value plus ``a * n^{-rate}``.  ``rate``
    defaults to 1/2 for the regression models, 2/5 for kernel regression and
    ``1 - 1/alpha`` for the stable location model.  ``scheme`` ``par`` is
    the parametric fixed-regressor bootstrap with N(0, 1) errors;
    ``frb-parametric`` uses N(0, sigma2_hat).
    """

    model: str = "ma"
    dist: str = "normal"
    n: int = 40
    a: float = 0.0
    rate: float | None = None
    corr: float = 0.7
    scheme: str = "par"
    reps: int = 2000
    B1: int = 199
    B2: int = 199
    tie_rule: str = "plain"
    levels: tuple[float, ...] = (0.05, 0.10)
    methods: tuple[str, ...] = ("standard", "plugin", "double")
    seed: int = 0
    plugin: str = "estimated"
    reduce_draws: bool = True
    ridge_c0: float = 0.15
    np_c: float = 0.5
    np_x: float = 0.5
    kernel: str = "epanechnikov"
    heavy_alpha: float = 1.5
    omega: float = 0.7
    alpha_estimator: str = "mcculloch-quantile"

    def __post_init__(self) -> None:
        if self.model not in MODELS:
            raise ParameterError(f"model must be one of {MODELS}")
        if int(self.reps) < 1:
            raise ParameterError("reps must be at least 1")
        if int(self.n) < 2:
            raise ParameterError("n must be at least 2")
        if not self.levels or any(not 0.0 < lv < 1.0 for lv in self.levels):
            raise ParameterError("levels must lie in (0, 1)")
        if set(self.methods) - set(METHODS):
            raise ParameterError(f"methods must be a subset of {METHODS}")
        if self.tie_rule not in TIE_RULES:
            raise ParameterError(f"tie rule must be one of {TIE_RULES}")
        if self.plugin not in ("estimated", "oracle"):
            raise ParameterError("plugin must be 'estimated' or 'oracle'")
        if self.model == "ma" and self.scheme not in MA_SCHEMES:
            raise ParameterError(f"scheme must be one of {sorted(MA_SCHEMES)}")
        if self.alpha_estimator not in ESTIMATORS:
            raise ParameterError(f"alpha estimator must be one of {ESTIMATORS}")
        if not -1.0 < self.corr < 1.0:
            raise ParameterError("corr must lie in (-1, 1)")
        object.__setattr__(self, "levels", tuple(float(v) for v in self.levels))
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "reps", int(self.reps))

    # ---------------------------------------------------------------------
    @property
    def drift_rate(self) -> float:
        if self.rate is not None:
            return float(self.rate)
        if self.model == "np":
            return 0.4
        if self.model == "heavy":
            return 1.0 - 1.0 / self.heavy_alpha
        return 0.5

    @property
    def scheme_label(self) -> str:
        if self.model == "ma":
            return self.scheme
        return {"ridge": "pairs", "np": "parametric", "heavy": "parametric"}[self.model]

    @property
    def dist_label(self) -> str:
        if self.model == "heavy":
            return f"stable{self.heavy_alpha:g}"
        return DistributionSpec.parse(self.dist).label

    def bootstrap_config(self) -> BootstrapConfig:
        return BootstrapConfig(self.B1, self.B2, self.tie_rule, self.methods)

    def resolved(self) -> dict:
        """Every field, with derived defaults filled in."""
        out = asdict(self)
        out["rate"] = self.drift_rate
        return out

    def with_(self, **changes) -> McDesign:
        return replace(self, **changes)


# ---------------------------------------------------------------------------
# design files

_LIST_KEYS = {"levels", "methods"}
_GRID_KEYS = ("dist", "a", "n", "scheme")


def _convert(name: str, text: str):
    kinds = {f.name: f.type for f in fields(McDesign)}
    if name not in kinds:
        raise ParameterError(f"unknown design key {name!r}")
    kind = str(kinds[name])
    text = text.strip()
    if name in _LIST_KEYS:
        items = [t.strip() for t in text.split(",") if t.strip()]
        return tuple(float(t) for t in items) if name == "levels" else tuple(items)
    if kind.startswith("bool"):
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ParameterError(f"{name}: expected a boolean, got {text!r}")
    try:
        if kind.startswith("int"):
            return int(text)
        if kind.startswith("float"):
            return None if text.lower() == "none" else float(text)
    except ValueError as exc:
        raise ParameterError(f"{name}: cannot parse {text!r}") from exc
    return text


def parse_design_text(text: str, overrides: dict | None = None) -> list[McDesign]:
    """Designs described by ``key=value`` lines.

    ``dist``, ``a``, ``n`` and ``scheme`` accept comma-separated lists and
    expand to their Cartesian product.  ``overrides`` (already typed or raw
    strings) take precedence over the file.
    """
    raw: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ParameterError(f"line {lineno}: expected key=value")
        key, value = (s.strip() for s in body.split("=", 1))
        raw[key.replace("-", "_")] = value
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key.replace("-", "_")] = value
    grids = {}
    single = {}
    for key, value in raw.items():
        if isinstance(value, str) and key in _GRID_KEYS and "," in value:
            grids[key] = [_convert(key, v) for v in value.split(",") if v.strip()]
        elif isinstance(value, str):
            single[key] = _convert(key, value)
        else:
            if key not in {f.name for f in fields(McDesign)}:
                raise ParameterError(f"unknown design key {key!r}")
            single[key] = value
    keys = [k for k in _GRID_KEYS if k in grids]
    designs = []
    for combo in itertools.product(*(grids[k] for k in keys)):
        designs.append(McDesign(**single, **dict(zip(keys, combo))))
    return designs


def load_design(path: str | Path, overrides: dict | None = None) -> list[McDesign]:
    return parse_design_text(Path(path).read_text(), overrides)


# ---------------------------------------------------------------------------
# data generating processes


@dataclass
class Replicate:
    """A simulated data set wrapped as a bootstrap problem."""

    problem: BootstrapProblem
    oracle_map: PrepivotMap | None = None
    shift: float = 0.0
    vd: float | None = None
    extras: dict = field(default_factory=dict)


def _correlated_pair(n: int, rho: float, rng: np.random.Generator) -> np.ndarray:
    L = np.linalg.cholesky(np.array([[1.0, rho], [rho, 1.0]]))
    return rng.standard_normal((n, 2)) @ L.T


def ma_population_m(corr: float, weights=(0.5, 0.5), selectors=((), (0,))) -> float:
    """Scale ratio from the population moments of the two-regressor design."""
    Sww = np.array([[1.0, 0.0, corr], [0.0, 1.0, 0.0], [corr, 0.0, 1.0]])
    sels = [np.r_[0, 1 + np.asarray(s, dtype=int)].astype(int) for s in selectors]
    _, _, _, V = ma_moment_auxiliaries(Sww, weights, sels)
    return float(np.sqrt((V[0, 0] + V[1, 1] - 2 * V[0, 1]) / V[0, 0]))


def ridge_population_m(corr: float, c0: float) -> float:
    S = np.array([[1.0, corr], [corr, 1.0]])
    g = np.array([1.0, 0.0])
    a = np.linalg.solve(S + c0 * np.eye(2), g)
    return float(np.sqrt(g @ np.linalg.solve(S, g) / (a @ S @ a)))


def simulate(design: McDesign, stream: RngStream) -> Replicate:
    """Draw one data set for ``design`` and build its bootstrap problem."""
    rng = stream.generator()
    n = design.n
    drift = design.a * n ** (-design.drift_rate)
    if design.model == "ma":
        X = _correlated_pair(n, design.corr, rng)
        eps = sample(DistributionSpec.parse(design.dist), n, rng)
        beta_bar, delta = 1.0, 1.0
        y = (beta_bar + drift) * X[:, 0] + delta * X[:, 1] + eps
        cfg = MaConfig(
            scheme=MA_SCHEMES[design.scheme],
            null_value=beta_bar,
            unit_variance=design.scheme == "par",
            reduce_draws=design.reduce_draws,
        )
        model = ModelAveraging(y, X[:, 0], X[:, 1], cfg)
        oracle = PrepivotMap.gaussian_scale(ma_population_m(design.corr)) if design.scheme != "pairs" else None
        vd = float(np.sqrt(model.auxiliaries().vd2))
        return Replicate(model, oracle, np.sqrt(n) * drift, vd)
    if design.model == "ridge":
        X = _correlated_pair(n, design.corr, rng)
        eps = sample(DistributionSpec.parse(design.dist), n, rng)
        delta = np.array([1.0, 1.0])
        theta = (delta + np.array([design.a * n ** (0.5 - design.drift_rate), 0.0])) / np.sqrt(n)
        y = X @ theta + eps
        cfg = RidgeConfig(c_n=design.ridge_c0 * n, g=(1.0, 0.0), r=float(delta[0] / np.sqrt(n)))
        model = RidgeRegression(y, X, cfg)
        oracle = PrepivotMap.gaussian_scale(ridge_population_m(design.corr, design.ridge_c0))
        resid = y - X @ model.theta_ols
        vd = float(np.sqrt(np.mean(resid**2) * np.linalg.solve(model.Sxx, model.g) @ model.g))
        return Replicate(model, oracle, np.sqrt(n) * drift, vd)
    if design.model == "np":
        xs = np.arange(1, n + 1) / n
        eps = sample(DistributionSpec.parse(design.dist), n, rng)
        y = xs**2 + drift + eps
        cfg = NpConfig(c=design.np_c, kernel=KernelSpec(design.kernel), x=design.np_x, null_value=design.np_x**2,
                       reduce_draws=design.reduce_draws)
        model = KernelRegression(y, cfg)
        consts = cached_kernel_constants(design.kernel)
        vd = float(np.sqrt(consts.m2 * model.sigma2 * consts.R_K))
        return Replicate(model, model.plugin_map(), model.root_nh * drift, vd)
    alpha = design.heavy_alpha
    y = drift + stable_variates(alpha, n, rng)
    cfg = HeavyConfig(omega=design.omega, alpha_estimator=design.alpha_estimator,
                      alpha=alpha if design.alpha_estimator == "known" else None,
                      null_value=0.0, reduce_draws=design.reduce_draws)
    model = HeavyTailLocation(y, cfg)
    return Replicate(model, PrepivotMap.stable(alpha, design.omega), model.scale * drift, None)
