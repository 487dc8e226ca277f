import math
import warnings
from statistics import NormalDist

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from prepivot import (
    BootstrapConfig,
    BootstrapProblem,
    CapabilityError,
    DomainError,
    ParameterError,
    PrepivotMap,
    RngStream,
    apply_prepivot,
    bootstrap_p_values,
    double_bootstrap_p,
    prepivot_ci,
    standard_p_value,
    tail_variants,
)
from prepivot.engine import bias_removed_p_value, empirical_quantile, inner_p_values
from prepivot.numerics import ks_uniform

N01 = NormalDist()
probs = st.floats(0.0, 1.0)
open_probs = st.floats(1e-9, 1 - 1e-9)


class IidProblem(BootstrapProblem):
    """T, T* and T** are i.i.d. N(0, 1): every p-value should be uniform."""

    def __init__(self, stream: RngStream) -> None:
        self.T = float(stream.split(0).generator().standard_normal())

    def statistic(self):
        return self.T

    def resample(self, stream, size):
        return stream.generator().standard_normal(size)

    def statistic_star(self, draws):
        return draws

    def statistic_star2(self, draws, stream, size):
        return stream.generator().standard_normal((draws.size, size))

    def plugin_map(self):
        return PrepivotMap.identity()

    def bias_terms(self, draws):
        return 0.0, np.zeros(draws.size)


class ConstantInner(IidProblem):
    def __init__(self, stream, value):
        super().__init__(stream)
        self.value = value

    def statistic_star2(self, draws, stream, size):
        return np.full((draws.size, size), self.value)


class NoSecondLevel(BootstrapProblem):
    def statistic(self):
        return 0.0

    def resample(self, stream, size):
        return np.zeros(size)

    def statistic_star(self, draws):
        return draws


# standard p-value ---------------------------------------------------------


def test_all_draws_above_gives_zero():
    assert standard_p_value(0.0, np.linspace(1, 2, 199)) == 0.0


def test_all_draws_below_add_one_gives_one():
    assert standard_p_value(5.0, np.linspace(1, 2, 199), "add-one") == 200 / 200


def test_ties_count_as_at_or_below():
    assert standard_p_value(1.0, [0.0, 1.0, 2.0, 3.0]) == 0.5
    assert standard_p_value(1.0, [0.0, 1.0, 2.0, 3.0], "add-one") == 3 / 5


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50), st.floats(-1e6, 1e6), st.floats(-1e6, 1e6))
def test_monotone_in_statistic(draws, t1, t2):
    lo, hi = sorted((t1, t2))
    for rule in ("plain", "add-one"):
        assert standard_p_value(lo, draws, rule) <= standard_p_value(hi, draws, rule)


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=50), st.floats(-1e3, 1e3), st.floats(1e-3, 1e3))
def test_scale_invariance(draws, t, c):
    d = np.asarray(draws)
    assert standard_p_value(t, d) == standard_p_value(c * t, c * d)


def test_empty_draws_and_bad_rule():
    with pytest.raises(ParameterError):
        standard_p_value(0.0, [])
    with pytest.raises(ParameterError):
        standard_p_value(0.0, [1.0], "midrank")


def test_inner_p_values_rowwise():
    Tstar = np.array([0.0, 10.0])
    Tss = np.array([[-1.0, 0.0, 1.0, 2.0], [0.0, 0.0, 0.0, 20.0]])
    assert np.allclose(inner_p_values(Tstar, Tss), [0.5, 0.75])
    assert np.allclose(inner_p_values(Tstar, Tss, "add-one"), [3 / 5, 4 / 5])


def test_bias_removed_all_equal_is_one():
    assert bias_removed_p_value(3.0, 1.0, np.full(50, 2.0)) == 1.0


# maps ---------------------------------------------------------------------


@given(open_probs)
def test_unit_scale_is_identity(p):
    assert apply_prepivot(PrepivotMap.gaussian_scale(1.0), p) == pytest.approx(p, abs=1e-12)


def test_identity_example():
    assert apply_prepivot(PrepivotMap.gaussian_scale(1.0), 0.37) == pytest.approx(0.37, abs=1e-12)


def test_scale_two_against_stdlib_normal():
    want = N01.cdf(N01.inv_cdf(0.05) / 2.0)
    assert apply_prepivot(PrepivotMap.gaussian_scale(2.0), 0.05) == pytest.approx(want, abs=1e-12)
    assert want == pytest.approx(0.205, abs=5e-4)


def test_shift_against_stdlib_normal():
    want = N01.cdf(N01.inv_cdf(0.3) - 0.8)
    assert apply_prepivot(PrepivotMap.gaussian_shift(0.8), 0.3) == pytest.approx(want, abs=1e-12)


@given(open_probs, st.floats(0.2, 5.0))
def test_scale_maps_compose_to_identity(p, m):
    q = apply_prepivot(PrepivotMap.gaussian_scale(m), p)
    back = apply_prepivot(PrepivotMap.gaussian_scale(1.0 / m), q)
    # near 1 a double cannot hold q to the digits needed to invert it
    if 1e-8 < q < 1.0 - 1e-8:
        assert back == pytest.approx(p, abs=1e-10)


MAPS = [
    PrepivotMap.gaussian_scale(0.6),
    PrepivotMap.gaussian_scale(1.8),
    PrepivotMap.gaussian_shift(-1.2),
    PrepivotMap.stable(1.5, 0.7),
    PrepivotMap.stable(1.9, 0.4),
    PrepivotMap.empirical(np.random.default_rng(0).random(101)),
    PrepivotMap.empirical(np.random.default_rng(1).random(101), "add-one"),
]


@pytest.mark.parametrize("H", MAPS, ids=lambda H: H.kind)
def test_maps_are_nondecreasing_with_fixed_endpoints(H):
    grid = np.linspace(0, 1, 401)
    vals = np.array([apply_prepivot(H, p) for p in grid])
    assert np.all(np.diff(vals) >= 0)
    assert 0.0 <= vals.min() and vals.max() <= 1.0
    if H.kind != "empirical":
        assert vals[0] == 0.0 and vals[-1] == 1.0
    else:
        n = H.draws.size
        assert vals[0] <= 1.0 / n + 1e-12 and vals[-1] >= 1.0 - 1.0 / (n + 1) - 1e-12


@given(probs, probs)
def test_stable_map_monotone(p1, p2):
    H = PrepivotMap.stable(1.4, 0.6)
    lo, hi = sorted((p1, p2))
    assert apply_prepivot(H, lo) <= apply_prepivot(H, hi) + 1e-15


def test_stable_with_unit_weight_is_identity():
    H = PrepivotMap.stable(1.3, 1.0)
    for p in (0.01, 0.3, 0.77):
        assert apply_prepivot(H, p) == p


def test_empirical_map_on_uniform_grid():
    B1 = 1000
    H = PrepivotMap.empirical((np.arange(1, B1 + 1) - 0.5) / B1)
    assert apply_prepivot(H, 0.3) == pytest.approx(0.3)


def test_apply_prepivot_domain():
    with pytest.raises(DomainError):
        apply_prepivot(PrepivotMap.identity(), 1.2)


def test_map_constructors_validate():
    with pytest.raises(ParameterError):
        PrepivotMap.gaussian_scale(0.0)
    with pytest.raises(ParameterError):
        PrepivotMap.empirical([])
    with pytest.raises(ParameterError):
        PrepivotMap.stable(1.5, 0.0)


def test_inverse_closed_forms():
    assert PrepivotMap.gaussian_scale(2.0).inverse(0.95) == pytest.approx(N01.cdf(2 * N01.inv_cdf(0.95)), abs=1e-12)
    assert PrepivotMap.gaussian_scale(2.0).inverse(0.95) == pytest.approx(0.99947, abs=5e-5)
    H = PrepivotMap.gaussian_shift(0.4)
    assert H(H.inverse(0.2)) == pytest.approx(0.2, abs=1e-12)
    S = PrepivotMap.stable(1.5, 0.7)
    assert S(S.inverse(0.9)) == pytest.approx(0.9, abs=1e-7)


@given(st.lists(st.floats(0, 1), min_size=1, max_size=40), probs)
def test_empirical_inverse_is_generalised_inverse(draws, v):
    H = PrepivotMap.empirical(draws)
    u = H.inverse(v)
    assert H(u) >= v - 1e-12
    # nothing strictly below u reaches v
    below = [d for d in H.draws if d < u]
    if below:
        assert H(max(below)) < v + 1e-12


# tail variants ------------------------------------------------------------


@pytest.mark.parametrize("p,right,et", [(0.5, 0.5, 1.0), (0.02, 0.98, 0.04), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0)])
def test_tail_variants(p, right, et):
    r, e = tail_variants(p)
    assert r == pytest.approx(right) and e == pytest.approx(et)


@given(probs)
def test_tail_variants_in_unit_interval(p):
    r, e = tail_variants(p)
    assert 0.0 <= r <= 1.0 and 0.0 <= e <= 1.0


# double bootstrap -----------------------------------------------------------


def test_iid_null_gives_uniform_double_and_plugin():
    cfg = BootstrapConfig(B1=99, B2=49)
    root = RngStream(2024)
    reports = [bootstrap_p_values(IidProblem(root.split(r)), cfg, root.split(r)) for r in range(2000)]
    assert ks_uniform([r.p_double for r in reports]).pvalue > 0.01
    assert ks_uniform([r.p_plugin for r in reports]).pvalue > 0.01


def test_inner_plus_infinity_with_one_inner_draw_gives_one():
    # every inner p-value is 0, which is at or below any outer p-value
    rep = double_bootstrap_p(ConstantInner(RngStream(1), np.inf), BootstrapConfig(B1=50, B2=1), RngStream(1))
    assert rep.p_double == 1.0


def test_inner_minus_infinity_with_one_inner_draw():
    # every inner p-value is 1, so the modified p-value is 0 unless p_hat is 1
    rep = double_bootstrap_p(ConstantInner(RngStream(1), -np.inf), BootstrapConfig(B1=50, B2=1), RngStream(1))
    assert rep.p_double == (1.0 if rep.p_hat == 1.0 else 0.0)
    assert rep.p_double == 0.0


def test_missing_second_level_is_capability_error():
    with pytest.raises(CapabilityError):
        double_bootstrap_p(NoSecondLevel(), BootstrapConfig(), RngStream(0))
    with pytest.raises(CapabilityError):
        bootstrap_p_values(NoSecondLevel(), BootstrapConfig(methods=("standard", "plugin")), RngStream(0))


def test_standard_only_never_draws_second_level():
    rep = bootstrap_p_values(IidProblem(RngStream(5)), BootstrapConfig(methods=("standard",)), RngStream(5))
    assert rep.p_plugin is None and rep.p_double is None
    assert rep.diagnostics["inner_draws"] == 0 and rep.diagnostics["B2"] == 0
    full = bootstrap_p_values(IidProblem(RngStream(5)), BootstrapConfig(B1=30, B2=7), RngStream(5))
    assert full.diagnostics["inner_draws"] == 30 * 7
    assert full.p_hat == bootstrap_p_values(IidProblem(RngStream(5)), BootstrapConfig(B1=30, methods=("standard",)), RngStream(5)).p_hat


def test_report_is_deterministic():
    cfg = BootstrapConfig(B1=40, B2=20, methods=("standard", "plugin", "double", "bias-removed"))
    a = bootstrap_p_values(IidProblem(RngStream(8)), cfg, RngStream(8))
    b = bootstrap_p_values(IidProblem(RngStream(8)), cfg, RngStream(8))
    assert a.as_row() == b.as_row()


def test_report_variants_and_lookup():
    rep = bootstrap_p_values(IidProblem(RngStream(3)), BootstrapConfig(B1=40, B2=20), RngStream(3))
    assert rep.p_modified == rep.p_double
    assert rep.p_right == pytest.approx(1 - rep.p_double)
    assert rep.p_value("standard") == rep.p_hat
    assert all(0 <= v <= 1 for v in (rep.p_hat, rep.p_plugin, rep.p_double, rep.p_right, rep.p_equal_tailed))


@pytest.mark.parametrize(
    "kwargs", [{"B1": 0}, {"B2": 0}, {"tie_rule": "x"}, {"methods": ("standard", "triple")}]
)
def test_config_validation(kwargs):
    with pytest.raises(ParameterError):
        BootstrapConfig(**kwargs)


def test_b2_zero_allowed_without_double():
    assert BootstrapConfig(B2=0, methods=("standard", "plugin")).B2 == 0


# confidence bounds ----------------------------------------------------------


def test_empirical_quantile_inverse_cdf_convention():
    d = np.array([3.0, 1.0, 2.0, 4.0])
    assert empirical_quantile(d, 0.25) == 1.0
    assert empirical_quantile(d, 0.26) == 2.0
    assert empirical_quantile(d, 1.0) == 4.0


def test_identity_map_gives_percentile_interval():
    d = np.random.default_rng(4).standard_normal(999)
    lower, upper = prepivot_ci(2.0, 10.0, d, PrepivotMap.identity(), 0.1)
    assert upper == math.inf
    assert lower == pytest.approx(2.0 - empirical_quantile(d, 0.9) / 10.0)


def test_scaled_map_uses_inflated_target():
    d = np.arange(1, 100_001) / 100_000
    lower, _ = prepivot_ci(0.0, 1.0, d, PrepivotMap.gaussian_scale(2.0), 0.05)
    target = N01.cdf(2 * N01.inv_cdf(0.95))
    assert -lower == pytest.approx(empirical_quantile(d, target))


def test_ci_clamps_with_warning():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        lower, _ = prepivot_ci(0.0, 1.0, [1.0, 2.0], PrepivotMap.empirical([0.0]), 0.5)
    assert any(issubclass(w.category, RuntimeWarning) for w in caught)
    assert lower == -1.0


@pytest.mark.parametrize("alpha,gn", [(0.0, 1.0), (1.0, 1.0), (0.1, 0.0)])
def test_ci_validation(alpha, gn):
    with pytest.raises(ParameterError):
        prepivot_ci(0.0, gn, [1.0], PrepivotMap.identity(), alpha)
