import math

import numpy as np
import pytest

from dwadlab import edgeworth as ew
from dwadlab.errors import ConfigurationError

from oracles import fourier_cdf


def _inputs(**kw):
    base = dict(n=1000, h=0.1259, d=1, P=2, sigma_v=0.41444, delta_v2=0.0795775,
                beta_v=-0.2115711, kappa1_v=-0.0258477, kappa2_v=0.4036507)
    base.update(kw)
    return ew.DwadExpansionInputs(**base)


def test_hermite_low_orders():
    x = np.linspace(-3, 3, 7)
    np.testing.assert_allclose(ew.hermite(0, x), 1.0)
    np.testing.assert_allclose(ew.hermite(1, x), x)
    np.testing.assert_allclose(ew.hermite(2, x), x ** 2 - 1)
    np.testing.assert_allclose(ew.hermite(3, x), x ** 3 - 3 * x, atol=1e-12)
    np.testing.assert_allclose(ew.hermite(8, x), x ** 8 - 28 * x ** 6 + 210 * x ** 4 - 420 * x ** 2 + 105,
                               rtol=1e-12, atol=1e-9)
    with pytest.raises(ConfigurationError):
        ew.hermite(-1, x)


def test_hermite_orthogonality():
    z, w = np.polynomial.hermite_e.hermegauss(30)
    w = w / w.sum()
    for j in range(9):
        for k in range(9):
            val = np.sum(w * ew.hermite(j, z) * ew.hermite(k, z))
            expected = math.factorial(j) if j == k else 0.0
            assert val == pytest.approx(expected, abs=1e-8)


def test_critical_values():
    assert ew.critical_value(0.05) == pytest.approx(1.959963985, abs=1e-9)
    assert ew.critical_value(0.3173105078629141) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ConfigurationError):
        ew.critical_value(1.0)


def test_rn_value_and_monotonicity():
    # sqrt(1e4) * 0.01 + 1/(1e4 * 1e-3) + 0.01
    assert ew.rn(10000, 0.1, 2, 1) == pytest.approx(1.11, rel=1e-12)
    hs = np.linspace(0.05, 0.5, 20)
    vals = [ew.rn(10000, h, 4, 1) for h in hs]
    assert int(np.argmin(vals)) not in (0, len(vals) - 1)
    with pytest.raises(ConfigurationError):
        ew.rn(1, 0.1, 2, 1)


def test_expansions_reduce_to_phi():
    x = np.linspace(-4, 4, 41)
    zero = _inputs(delta_v2=0.0, beta_v=0.0, kappa1_v=0.0, kappa2_v=0.0)
    for fn in (ew.std_expansion, ew.studentized_al, ew.studentized_sb):
        np.testing.assert_allclose(fn(zero, x), ew.norm_cdf(x), atol=1e-15)


def test_al_minus_sb_identity():
    inp = _inputs()
    x = np.linspace(-5, 5, 101)
    diff = ew.studentized_al(inp, x) - ew.studentized_sb(inp, x)
    expected = ew.norm_pdf(x) * inp.variance_term * x
    np.testing.assert_allclose(diff, expected, atol=1e-14)


def test_sb_free_of_delta():
    x = np.linspace(-5, 5, 51)
    a = ew.studentized_sb(_inputs(delta_v2=0.01), x)
    b = ew.studentized_sb(_inputs(delta_v2=3.0), x)
    assert np.array_equal(a, b)


def test_std_expansion_at_zero_and_symmetry_of_variance_term():
    inp = _inputs(beta_v=0.0, kappa1_v=0.0, kappa2_v=0.0, vartheta_ratio=1.3)
    x = np.linspace(0.1, 4, 10)
    g = ew.std_expansion(inp, x)
    # the variance term is odd in x so G(x) + G(-x) = 1
    np.testing.assert_allclose(g + ew.std_expansion(inp, -x), 1.0, atol=1e-14)
    assert float(ew.std_expansion(inp, 0.0)) == 0.5


def test_tail_limits():
    for fn in (ew.std_expansion, ew.studentized_al, ew.studentized_sb):
        assert float(fn(_inputs(), 10.0)) == pytest.approx(1.0, abs=1e-15)
        assert float(fn(_inputs(), -10.0)) == pytest.approx(0.0, abs=1e-15)


def test_coverage_predictions():
    inp = _inputs()
    c = ew.critical_value(0.05)
    al = ew.coverage_prediction(inp, 0.05, ew.STUDENTIZED_AL)
    expected = 0.95 + 2 * inp.delta_v2 / (inp.n * inp.h ** 3 * inp.sigma_v ** 2) * ew.norm_pdf(c) * c
    assert al == pytest.approx(float(expected), rel=1e-14)
    assert al > 0.95
    assert ew.coverage_prediction(inp, 0.05, ew.STUDENTIZED_SB) == 0.95
    assert ew.coverage_prediction(inp, 0.05, ew.STANDARDIZED) == pytest.approx(0.95)
    wide = ew.coverage_prediction(inp.with_ratio(1.4), 0.05, ew.STANDARDIZED)
    assert wide < 0.95
    with pytest.raises(ConfigurationError):
        ew.coverage_prediction(inp, 0.05, "nope")


def test_coverage_prediction_matches_expansion_difference():
    # two-sided coverage from G_AL: G(c) - G(-c); the even-in-x parts cancel
    inp = _inputs()
    c = ew.critical_value(0.1)
    direct = float(ew.studentized_al(inp, c) - ew.studentized_al(inp, -c))
    assert ew.coverage_prediction(inp, 0.1, ew.STUDENTIZED_AL) == pytest.approx(direct, abs=1e-14)


def test_input_validation():
    with pytest.raises(ConfigurationError):
        _inputs(sigma_v=0.0)
    with pytest.raises(ConfigurationError):
        _inputs(delta_v2=-1.0)
    with pytest.raises(ConfigurationError):
        ew.GenericUstatInputs(3, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0)


def test_gamma_special_cases():
    inp = ew.GenericUstatInputs(n=50, bias=0.0, scale=math.sqrt(1.0 / 50), sigma_ell2=1.0,
                                sigma_q2=0.0, kappa_a=0.0, kappa_b=0.0)
    g = ew.generic_gammas(inp).as_array()
    np.testing.assert_allclose(g, 0.0, atol=1e-15)
    rng = np.random.default_rng(0)
    for _ in range(20):
        inp = ew.GenericUstatInputs(n=int(rng.integers(4, 500)), bias=rng.normal(),
                                    scale=rng.uniform(0.1, 2), sigma_ell2=rng.uniform(0.1, 2),
                                    sigma_q2=rng.uniform(0, 2), kappa_a=rng.normal(),
                                    kappa_b=rng.normal())
        gam = ew.generic_gammas(inp)
        assert gam[7] == 0.0
        assert gam[1] == pytest.approx(inp.bias / inp.scale)


def test_gamma_indexing_and_length():
    with pytest.raises(ConfigurationError):
        ew.GammaCoefficients((0.0,) * 8)
    g = ew.GammaCoefficients(tuple(range(9)))
    assert g[1] == 0.0 and g[9] == 8.0


@pytest.mark.parametrize("convention", [ew.BRACKET, ew.SHIFT])
def test_generic_cdf_matches_fourier_inversion(convention):
    rng = np.random.default_rng(42)
    x = np.linspace(-5, 5, 201)
    for _ in range(5):
        g = rng.uniform(-0.05, 0.05, size=9)
        g[6] = 0.0
        closed = ew.generic_cdf(g, x, convention)
        inverted = fourier_cdf(lambda t: ew.characteristic_function(g, t, convention), x)
        assert np.max(np.abs(closed - inverted)) < 1e-6


def test_dwad_generic_cross_check():
    # with the sigma standardization the generic expansion's first three
    # gammas reproduce the DWAD standardized expansion
    inp = _inputs()
    gen = ew.dwad_generic_inputs(inp)
    gam = ew.generic_gammas(gen)
    ratio = inp.omega_v2 * inp.n / inp.sigma_v ** 2
    x = np.linspace(-4, 4, 81)
    g3 = np.zeros(9)
    g3[:3] = gam.as_array()[:3]
    direct = ew.std_expansion(inp.with_ratio(ratio), x)
    # leading gammas: bias, (ratio - 1)/2, skewness
    assert gam[1] == pytest.approx(inp.bias_term, rel=1e-12)
    assert gam[2] == pytest.approx(0.5 * (gen.omega2 * inp.n / inp.sigma_v ** 2 - 1), rel=1e-12)
    assert gam[3] == pytest.approx((inp.kappa1_v + inp.kappa2_v) / inp._skew_unit, rel=1e-12)
    # generic omega2 uses the exact pair count, which matches the DWAD leading term
    assert gen.omega2 == pytest.approx(inp.omega_v2, rel=1e-12)
    np.testing.assert_allclose(ew.generic_cdf(g3, x), direct, atol=1e-12)
