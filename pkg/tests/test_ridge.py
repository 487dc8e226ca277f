import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from prepivot import BootstrapConfig, ParameterError, RankError, RngStream, bootstrap_p_values
from prepivot.models import RidgeConfig, RidgeRegression, ridge_plugin_m, ridge_statistic


def ridge_data(rng, n, theta=(0.5, -0.25), corr=0.5):
    x1 = rng.standard_normal(n)
    x2 = corr * x1 + np.sqrt(1 - corr**2) * rng.standard_normal(n)
    X = np.column_stack((x1, x2))
    return X @ np.asarray(theta) + rng.standard_normal(n), X


def scalar_data(rng, n=50):
    x = rng.standard_normal(n)
    x /= np.sqrt(np.mean(x**2))
    return 0.4 * x + rng.standard_normal(n), x


def test_scalar_case(rng):
    y, x = scalar_data(rng)
    p = RidgeRegression(y, x, RidgeConfig(c_n=50.0, g=(1.0,)))
    assert p.Sxx[0, 0] == pytest.approx(1.0, abs=1e-14)
    assert p.theta_tilde[0] == pytest.approx(p.theta_ols[0] / 2, rel=1e-12)
    assert p.plugin_m() == pytest.approx(2.0, abs=1e-12)
    assert ridge_plugin_m(y, x, RidgeConfig(c_n=50.0)) == pytest.approx(2.0, abs=1e-12)
    # B = -c_n n^{-1/2} theta_ols / 2
    assert p.B_hat == pytest.approx(-50.0 / np.sqrt(50) * p.theta_ols[0] / 2, rel=1e-12)


def test_zero_shrinkage_is_ols(rng):
    y, X = ridge_data(rng, 40)
    p = RidgeRegression(y, X, RidgeConfig(c_n=0.0, g=(1.0, 0.0)))
    np.testing.assert_array_equal(p.theta_tilde, p.theta_ols)
    np.testing.assert_allclose(p.theta_ols, np.linalg.lstsq(X, y, rcond=None)[0], rtol=1e-10)
    assert p.B_hat == 0.0
    assert p.plugin_m() == 1.0
    s = ridge_statistic(y, X, RidgeConfig(c_n=0.0, g=(1.0, 0.0)))
    assert s.T_n == np.sqrt(40) * p.theta_ols[0]


def test_zero_shrinkage_bootstrap_is_pairs_ols(rng):
    y, X = ridge_data(rng, 40)
    p = RidgeRegression(y, X, RidgeConfig(c_n=0.0, g=(1.0, -1.0)))
    draws = p.resample(RngStream(1), 30)
    np.testing.assert_array_equal(draws.theta_tilde, draws.theta_ols)
    Tstar = p.statistic_star(draws)
    for b in range(30):
        i = draws.idx[b]
        ols = np.linalg.lstsq(X[i], y[i], rcond=None)[0]
        assert Tstar[b] == pytest.approx(np.sqrt(40) * (ols - p.theta_ols) @ p.g, abs=1e-9)


def test_zero_shrinkage_bias_removed_equals_standard(rng):
    y, X = ridge_data(rng, 40)
    p = RidgeRegression(y, X, RidgeConfig(c_n=0.0, g=(1.0, 0.0)))
    rep = bootstrap_p_values(p, BootstrapConfig(B1=199, methods=("standard", "bias-removed")), RngStream(2))
    assert rep.p_bias_removed == rep.p_hat


def test_infinite_shrinkage(rng):
    y, X = ridge_data(rng, 40)
    norms = [np.abs(RidgeRegression(y, X, RidgeConfig(c_n=c, g=(1.0, 0.0))).theta_tilde).max() for c in (1e2, 1e4, 1e8)]
    assert norms[0] > norms[1] > norms[2]
    assert norms[2] < 1e-6


@given(st.integers(0, 10_000), st.floats(0.0, 200.0), st.floats(-0.95, 0.95))
def test_plugin_m_at_least_one(seed, c_n, corr):
    rng = np.random.default_rng(seed)
    y, X = ridge_data(rng, 30, corr=corr)
    g = rng.standard_normal(2)
    m = RidgeRegression(y, X, RidgeConfig(c_n=c_n, g=tuple(g))).plugin_m()
    assert m >= 1.0 - 1e-12


@given(st.integers(0, 10_000), st.floats(0.1, 100.0))
def test_plugin_m_invariant_to_g_scale(seed, c_n):
    rng = np.random.default_rng(seed)
    y, X = ridge_data(rng, 30)
    g = rng.standard_normal(2)
    m1 = RidgeRegression(y, X, RidgeConfig(c_n=c_n, g=tuple(g))).plugin_m()
    m2 = RidgeRegression(y, X, RidgeConfig(c_n=c_n, g=tuple(2 * g))).plugin_m()
    assert m1 == pytest.approx(m2, rel=1e-12)


def test_duplicated_rows_change_nothing(rng):
    y, X = ridge_data(rng, 40)
    cfg = RidgeConfig(c_n=6.0, g=(1.0, 1.0), r=0.1)
    one = RidgeRegression(y, X, cfg)
    two = RidgeRegression(np.r_[y, y], np.vstack((X, X)), RidgeConfig(c_n=12.0, g=(1.0, 1.0), r=0.1))
    np.testing.assert_allclose(one.theta_tilde, two.theta_tilde, rtol=1e-12)
    np.testing.assert_allclose(one.theta_ols, two.theta_ols, rtol=1e-12)
    assert one.plugin_m() == pytest.approx(two.plugin_m(), rel=1e-12)


def test_bootstrap_centred_at_bias():
    n = 500
    rng = np.random.default_rng(17)
    y, X = ridge_data(rng, n, theta=(1 / np.sqrt(n), 1 / np.sqrt(n)))
    p = RidgeRegression(y, X, RidgeConfig(c_n=0.15 * n, g=(1.0, 0.0)))
    d = p.statistic_star(p.resample(RngStream(4), 10_000)) - p.B_hat
    assert abs(d.mean()) < 3 * d.std() / np.sqrt(d.size)


def test_second_level_shape_and_centre(rng):
    n = 60
    y, X = ridge_data(rng, n)
    p = RidgeRegression(y, X, RidgeConfig(c_n=0.2 * n, g=(1.0, 0.0)))
    draws = p.resample(RngStream(5), 20)
    Tss = p.statistic_star2(draws, RngStream(6), 400)
    assert Tss.shape == (20, 400)
    _, Bstar = p.bias_terms(draws)
    se = Tss.std(axis=1) / np.sqrt(400)
    assert np.mean(np.abs(Tss.mean(axis=1) - Bstar) / se) < 2.5


def test_errors(rng):
    y, X = ridge_data(rng, 20)
    with pytest.raises(ParameterError):
        RidgeConfig(c_n=-1.0)
    with pytest.raises(ParameterError):
        RidgeConfig(g=(0.0, 0.0))
    with pytest.raises(ParameterError):
        RidgeRegression(y, X, RidgeConfig(g=(1.0,)))
    X[:, 1] = 3 * X[:, 0]
    with pytest.raises(RankError):
        RidgeRegression(y, X, RidgeConfig(c_n=0.0, g=(1.0, 0.0)))
