import math

import numpy as np
import pytest

from alpha_lab import green


def _trig(m):
    x, y = green.grid(m)
    return np.sin(x) * np.cos(2 * y) + 0.3 * np.cos(3 * x + y), x, y


def test_spectral_laplacian_exact_on_trig():
    f, x, y = _trig(64)
    exact = -5 * np.sin(x) * np.cos(2 * y) - 0.3 * 10 * np.cos(3 * x + y)
    assert np.max(np.abs(green.laplacian(f) - exact)) < 1e-10


def test_finite_difference_converges_second_order():
    errs = []
    for m in (32, 64):
        f, x, y = _trig(m)
        errs.append(np.max(np.abs(green.laplacian_fd(f) - green.laplacian(f))))
    assert math.log2(errs[0] / errs[1]) == pytest.approx(2, abs=0.1)


def test_green_inverts_laplacian():
    rng = np.random.default_rng(0)
    f = green.band_limited_field(rng, 64)
    u = green.green_apply(green.laplacian(f))
    assert np.max(np.abs(u - (f - f.mean()))) < 1e-10


def test_green_apply_rejects_nonzero_mean():
    with pytest.raises(green.PreconditionError):
        green.green_apply(np.ones((16, 16)))


def test_kernel_properties():
    k = green.GreenKernel.build(64)
    assert k.profile.min() == pytest.approx(0.0, abs=1e-14)
    assert k.symmetry_error() < 1e-12
    row = k.row(5, 9)
    assert row[5, 9] == pytest.approx(k.profile.max())


def test_reproducing_identity():
    rng = np.random.default_rng(1)
    k = green.GreenKernel.build(64)
    f = green.band_limited_field(rng, 64)
    rebuilt = -k.apply(green.laplacian(f)) + green.mean(f)
    assert np.max(np.abs(rebuilt - f)) < 1e-9


def test_constant_is_resolution_stable():
    a = green.lemma1_constant(6.0, 128)
    b = green.lemma1_constant(6.0, 256)
    assert a == pytest.approx(b, rel=1e-6)
    assert green.lemma1_constant(0.0) == 0.0
    with pytest.raises(ValueError):
        green.lemma1_constant(-1.0)


def test_admissible_fields_satisfy_bound():
    rng = np.random.default_rng(2)
    for _ in range(10):
        phi = green.random_admissible(rng, 64, 6.0)
        assert phi.max() == 0.0
        assert green.laplacian(phi).min() >= -6.0 - 1e-8
        rep = green.check_lower_bound(phi, 6.0)
        assert rep["pass"] and rep["chain_holds"] and rep["margin"] >= 0


def test_bound_is_nearly_sharp_for_extremal_shape():
    # phi = c * G(x - x0) shifted: Laplacian is -c + point mass, the extremal profile on the grid
    m = 64
    c = 6.0
    k = green.GreenKernel.build(m)
    src = np.full((m, m), -1.0)
    src[0, 0] += m * m
    phi = c * green.green_apply(src)
    phi -= phi.max()
    rep = green.check_lower_bound(phi, c)
    assert rep["pass"]
    assert rep["chain_identity_error"] < 1e-8 * rep["M"]
    assert k.row_integral() > 0


def test_preconditions():
    rng = np.random.default_rng(3)
    phi = green.random_admissible(rng, 32, 2.0)
    with pytest.raises(green.PreconditionError):
        green.check_lower_bound(phi + 1.0, 2.0)
    with pytest.raises(green.PreconditionError):
        green.check_lower_bound(phi, 0.5)
