import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from alpha_lab import lct


@pytest.mark.parametrize("name,expected", [
    ("cusp23", Fraction(5, 6)), ("cusp25", Fraction(7, 10)), ("monomial:2,2", Fraction(1)),
    ("monomial:3,5", Fraction(1)),
])
def test_predicted_thresholds(name, expected):
    assert lct.predicted_threshold(lct.preset(name)) == expected


@pytest.mark.parametrize("name", ["cusp23", "cusp25", "monomial:2,3"])
def test_quasi_homogeneity(name):
    assert lct.quasi_homogeneity_error(lct.preset(name), beta=0.7) < 1e-12


@pytest.mark.parametrize("bad", ["cusp99", "monomial:3,2", "monomial:x", "monomial:0,1"])
def test_bad_presets(bad):
    with pytest.raises(ValueError):
        lct.preset(bad)


def test_brieskorn_matches_cusp():
    a = lct.brieskorn_spec((3, 2), 6)
    b = lct.cusp_spec(2, 3)
    z = np.random.default_rng(0).normal(size=(50, 2)) + 0j
    assert np.allclose(a(z), b(z))
    with pytest.raises(ValueError):
        lct.brieskorn_spec((4, 2), 6)


def test_first_roots_are_roots():
    rng = np.random.default_rng(1)
    for spec in (lct.cusp_spec(2, 3), lct.cusp_spec(2, 5), lct.brieskorn_spec((2, 3, 3), 6)):
        rest = rng.normal(size=(20, spec.n - 1)) + 1j * rng.normal(size=(20, spec.n - 1))
        roots = spec.first_roots(rest)
        for k in range(roots.shape[1]):
            z = np.column_stack([roots[:, k], rest])
            assert np.max(np.abs(spec(z))) < 1e-10


# --- regions --------------------------------------------------------------------


@given(st.lists(st.floats(min_value=1e-6, max_value=1.0), min_size=2, max_size=2),
       st.sampled_from([(3, 2), (5, 2), (1, 1)]))
def test_shells_partition_the_polydisc(moduli, weights):
    z = np.array([moduli], dtype=complex)
    idx = int(lct.annulus_index(z, weights)[0])
    hits = [r for r in range(max(0, idx - 2), idx + 3) if lct.AnnulusSpec(r, weights, "shell").contains(z)[0]]
    assert hits == [idx]


def test_product_annuli_do_not_cover():
    z = np.array([[0.5, 0.01]], dtype=complex)
    assert not any(lct.AnnulusSpec(r, (3, 2), "product").contains(z)[0] for r in range(20))
    assert lct.AnnulusSpec(int(lct.annulus_index(z, (3, 2))[0]), (3, 2), "shell").contains(z)[0]


@pytest.mark.parametrize("weights", [(3, 2), (1, 1), (5, 2)])
def test_shell_volumes_sum_to_polydisc(weights):
    total = sum(lct.AnnulusSpec(r, weights, "shell").volume() for r in range(60))
    assert total == pytest.approx(math.pi ** len(weights), rel=1e-12)


@pytest.mark.parametrize("kind", ["product", "shell"])
def test_beta_zero_integral_is_volume(kind):
    spec = lct.preset("cusp23")
    for r in range(3):
        est = lct.annulus_integral(spec, 0.0, r, 50_000, seed=4, kind=kind)
        vol = lct.AnnulusSpec(r, spec.weights, kind).volume()
        assert abs(est.mean - vol) <= 4 * est.stderr + 1e-12 * vol


# --- Monte Carlo ------------------------------------------------------------------


def test_determinism_and_seed_dependence():
    spec = lct.preset("cusp23")
    a = lct.annulus_integral(spec, 0.6, 1, 20_000, seed=5)
    b = lct.annulus_integral(spec, 0.6, 1, 20_000, seed=5)
    c = lct.annulus_integral(spec, 0.6, 1, 20_000, seed=6)
    assert a == b
    assert a.mean != c.mean


@pytest.mark.parametrize("beta", [0.2, 0.5, 0.75])
def test_ratio_matches_scaling_law(beta):
    spec = lct.preset("cusp23")
    expected = 2.0 ** lct.scaling_exponent(spec, beta)
    i0 = lct.annulus_integral(spec, beta, 0, 200_000, seed=11)
    i1 = lct.annulus_integral(spec, beta, 1, 200_000, seed=11)
    assert lct.ratio_zscore(i0, i1, expected) < 4


def test_mixture_keeps_variance_finite_near_threshold():
    # without the zero-set component the sample variance would be dominated by rare spikes
    spec = lct.preset("cusp23")
    est = lct.annulus_integral(spec, 0.8, 0, 200_000, seed=2)
    assert est.stderr / est.mean < 0.02


def test_monomial_total_matches_closed_form():
    spec = lct.preset("monomial:2,2")
    sums = lct.partial_sums(spec, 0.5, R=5, samples=100_000, seed=3, kind="shell")
    exact = lct.monomial_integral(2, 2, 0.5)
    assert sums.converged
    assert sums.total == pytest.approx(exact, rel=0.02)


@pytest.mark.parametrize("beta", [0.0, 0.3, 0.9])
def test_disc_integral_against_quadrature(beta):
    radial, _ = quad(lambda r: r ** (1 - 2 * beta), 0, 1)
    assert lct.monomial_integral(1, 1, beta) == pytest.approx(2 * math.pi * radial, rel=1e-8)
    assert lct.monomial_integral(1, 3, beta) == pytest.approx(2 * math.pi * radial * math.pi**2, rel=1e-8)


def test_monomial_divergent_at_one():
    assert math.isinf(lct.monomial_integral(2, 2, 1.0))
    assert math.isfinite(lct.monomial_integral(2, 2, 0.999))


def test_partial_sums_flags():
    spec = lct.preset("cusp23")
    conv = lct.partial_sums(spec, 0.5, R=4, samples=50_000, seed=0)
    assert conv.converged and conv.tail_bound > 0 and not conv.divergence_evidence
    assert conv.total == pytest.approx(conv.partial[-1] + conv.tail_bound)
    div = lct.partial_sums(spec, 0.9, R=6, samples=50_000, seed=0)
    assert not div.converged and div.divergence_evidence and div.ratio > 1


def test_measured_ratio_infinite_past_one():
    assert math.isinf(lct.measured_ratio(lct.preset("cusp23"), 1.2, 10_000))


def test_threshold_search_validation():
    spec = lct.preset("cusp23")
    with pytest.raises(ValueError):
        lct.estimate_threshold(spec, tol=0.001)
    with pytest.raises(lct.BudgetExhausted):
        lct.estimate_threshold(spec, budget=100_000, samples=20_000)


def test_threshold_search_cusp25():
    est = lct.estimate_threshold(lct.preset("cusp25"), samples=100_000, seed=0)
    assert abs(est.beta_hat - 0.7) < 0.02
    assert est.bracket[0] <= est.beta_hat <= est.bracket[1]


@pytest.mark.parametrize("kwargs", [dict(beta=-0.1, r=0, samples=5000), dict(beta=0.5, r=0, samples=10),
                                    dict(beta=0.5, r=-1, samples=5000)])
def test_integral_preconditions(kwargs):
    with pytest.raises(ValueError):
        lct.annulus_integral(lct.preset("cusp23"), **kwargs)


def test_report_shape():
    spec = lct.preset("cusp23")
    sums = lct.partial_sums(spec, 0.5, R=3, samples=5000, seed=0)
    rep = lct.lct_report(spec, 0.5, sums=sums)
    assert rep["threshold_predicted_exact"] == "5/6"
    assert [a["r"] for a in rep["annuli"]] == [0, 1, 2]
    assert rep["exponent_expected"] == pytest.approx(-4.0)
