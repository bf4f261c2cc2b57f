import cmath
import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from alpha_lab import forms
from alpha_lab.forms import BinaryForm, GroupElement, ProjPoint

small_int = st.integers(min_value=-4, max_value=4)
finite_points = st.builds(lambda a, b: ProjPoint(Fraction(a), Fraction(b)), small_int,
                          st.integers(min_value=1, max_value=3))


def _sympy_coeffs(roots, degree):
    """Coefficients of prod (a2 z1 - a1 z2) in the ``z1^(d-k) z2^k`` basis, via sympy."""
    z1, z2 = sp.symbols("z1 z2")
    expr = sp.Integer(1)
    for a1, a2 in roots:
        expr *= sp.Rational(a2) * z1 - sp.Rational(a1) * z2
    poly = sp.Poly(sp.expand(expr), z1, z2)
    return [Fraction(str(poly.coeff_monomial(z1 ** (degree - k) * z2**k))) for k in range(degree + 1)]


@given(finite_points, finite_points)
def test_expand_mu_matches_sympy(alpha, beta):
    got = forms.expand_mu(alpha, beta).coefficients
    want = _sympy_coeffs([(alpha.z1, alpha.z2)] * 11 + [(beta.z1, beta.z2)], 12)
    assert list(got) == want


@given(finite_points)
def test_expand_rnc_is_twelfth_power(alpha):
    want = _sympy_coeffs([(alpha.z1, alpha.z2)] * 12, 12)
    assert list(forms.expand_rnc(alpha).coefficients) == want


def test_infinity_factor():
    f = forms.expand_mu(ProjPoint.infinity(), ProjPoint(0))
    # roots at infinity (11 times) and 0: z2^11 * z1 up to sign
    nz = [k for k, c in enumerate(f.coefficients) if c != 0]
    assert nz == [11]


@given(st.lists(st.tuples(small_int, st.integers(1, 3)), min_size=1, max_size=6))
def test_exact_roots_recover_multiset(pairs):
    pts = [ProjPoint(Fraction(a), Fraction(b)) for a, b in pairs]
    f = BinaryForm.from_roots(pts)
    want = [complex(Fraction(a, b)) for a, b in pairs]
    # repeated roots must come out to full precision, not eps^(1/m)
    assert forms.match_root_multisets(f.roots(), want) < 1e-12


def test_float_roots_with_multiplicity():
    pts = [ProjPoint(0.3 + 0.2j)] * 3 + [ProjPoint(-1.1)] * 2 + [ProjPoint.infinity()]
    f = BinaryForm.from_roots(pts).scale(0.7 - 0.1j)
    got = f.roots()
    want = [0.3 + 0.2j] * 3 + [-1.1] * 2 + [math.inf]
    assert forms.match_root_multisets(got, want) < 1e-8


def _moebius(g: GroupElement, z):
    if z == math.inf:
        return g.a / g.c if g.c != 0 else math.inf
    den = g.c * z + g.d
    return (g.a * z + g.b) / den if abs(den) > 1e-300 else math.inf


def test_act_moves_roots_by_moebius():
    rng = np.random.default_rng(1)
    for _ in range(20):
        g = forms.random_sl2(rng)
        roots = [complex(*rng.normal(size=2)) for _ in range(5)]
        f = BinaryForm.from_roots([ProjPoint(r) for r in roots])
        moved = forms.act(g, f).normalized()
        norm = np.sum(np.abs(moved.as_array()))
        for r in roots:
            w = _moebius(g, r)
            val = moved.coefficients[0] if w == math.inf else moved.evaluate(w, 1) / max(1, abs(w)) ** 5
            assert abs(val) < 1e-9 * norm


def test_act_is_a_left_action():
    rng = np.random.default_rng(2)
    f = BinaryForm(tuple(complex(*rng.normal(size=2)) for _ in range(7)))
    for _ in range(10):
        g, h = forms.random_sl2(rng), forms.random_sl2(rng)
        lhs = forms.act(g @ h, f)
        rhs = forms.act(g, forms.act(h, f))
        assert forms.projective_distance(lhs, rhs) < 1e-9


def test_equivariance_of_orbit_map():
    rng = np.random.default_rng(3)
    for _ in range(50):
        g = forms.random_sl2(rng)
        a, b = forms.random_projpoint(rng), forms.random_projpoint(rng)
        lhs = forms.act(g, forms.expand_mu(a, b))
        rhs = forms.expand_mu(g.apply(a), g.apply(b))
        assert forms.projective_distance(lhs, rhs) < 1e-9


@given(st.complex_numbers(min_magnitude=0.1, max_magnitude=10, allow_nan=False, allow_infinity=False))
def test_projective_distance_is_scale_free(s):
    f = BinaryForm((1, 2 - 1j, 0.5, -3))
    assert forms.projective_distance(f, f.scale(s)) < 1e-12
    assert forms.projectively_equal(f, f.scale(s))


def test_projective_distance_detects_difference():
    f = BinaryForm((1, 2, 3))
    assert forms.projective_distance(f, BinaryForm((1, 2, 3.1))) > 0.01
    assert forms.projective_distance(f, BinaryForm((1, 2, 3, 4))) == math.inf


def test_group_element_validation():
    with pytest.raises(ValueError):
        GroupElement(1, 1, 1, 1)
    g = GroupElement.from_matrix([[2, 1], [1, 1]])
    assert np.allclose((g @ g.inverse()).matrix, np.eye(2))
    gn = GroupElement.from_matrix([[2, 0], [0, 2]], normalize=True)
    assert abs(complex(gn.det()) - 1) < 1e-12


def test_zero_form_rejected():
    with pytest.raises(ValueError):
        BinaryForm((0, 0, 0))


# --- icosahedral group --------------------------------------------------------


def _so3(g: GroupElement) -> np.ndarray:
    """Rotation induced on traceless Hermitian matrices (an independent model of PSL -> SO(3))."""
    pauli = [np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.array([[1, 0], [0, -1]])]
    m = g.matrix
    return np.array([[0.5 * np.trace(pi @ m @ pj @ m.conj().T).real for pj in pauli] for pi in pauli])


def _sphere(z):
    if z == math.inf:
        return np.array([0.0, 0.0, 1.0])
    x, y = z.real, z.imag
    d = 1 + x * x + y * y
    return np.array([2 * x / d, 2 * y / d, (x * x + y * y - 1) / d])


def test_group_has_order_60_and_element_orders():
    group = forms.icosahedral_group()
    assert len(group) == 60
    counts = {}
    for g in group:
        o = forms.psl_order(g)
        counts[o] = counts.get(o, 0) + 1
    assert counts == {1: 1, 2: 15, 3: 20, 5: 24}


def test_group_is_perfect():
    assert len(forms.commutator_closure(forms.icosahedral_group())) == 60


def test_roots_form_an_icosahedron():
    roots = forms.icosahedral_form().roots()
    assert len(roots) == 12
    pts = np.array([_sphere(complex(z) if z != math.inf else z) for z in roots])
    dots = np.round(pts @ pts.T, 6)
    off = sorted(set(dots[~np.eye(12, dtype=bool)].tolist()))
    s = round(1 / math.sqrt(5), 6)
    assert off == [-1.0, -s, s]


def test_so3_images_permute_vertices():
    roots = forms.icosahedral_form().roots()
    pts = np.array([_sphere(complex(z) if z != math.inf else z) for z in roots])
    rots = [_so3(g) for g in forms.icosahedral_group()]
    for r in rots:
        assert np.allclose(r @ r.T, np.eye(3), atol=1e-10)
        assert abs(np.linalg.det(r) - 1) < 1e-10
        img = pts @ r.T
        d = np.linalg.norm(img[:, None, :] - pts[None, :, :], axis=2)
        assert np.all(d.min(axis=1) < 1e-8)
    # 60 distinct rotations: the full rotation group of the icosahedron
    keys = {tuple(np.round(r, 6).ravel()) for r in rots}
    assert len(keys) == 60


def test_icosahedral_form_coefficients():
    f = forms.icosahedral_form()
    assert f.degree == 12
    nz = {k: c for k, c in enumerate(f.coefficients) if c != 0}
    assert set(nz) == {1, 6, 11}
    assert max(abs(c) for c in nz.values()) == 1
    # z1 z2 (z1^10 + 11 z1^5 z2^5 - z2^10) up to scale
    assert nz[6] / nz[1] == 11 and nz[11] / nz[1] == -1


def test_invariance_is_exact_not_projective():
    f = forms.icosahedral_form()
    base = f.as_array()
    for g in forms.icosahedral_group():
        assert np.max(np.abs(forms.act(g, f).as_array() - base)) < 1e-10


def test_stabilizer_probe():
    rep = forms.stabilizer_probe(forms.icosahedral_form(), trials=30, seed=0)
    assert rep["pass"] and rep["fixed"] == 60 and rep["moved"] == 30


def test_probe_rejects_a_less_symmetric_form():
    f = BinaryForm.from_roots([ProjPoint(0)] * 6 + [ProjPoint.infinity()] * 6)
    rep = forms.stabilizer_probe(f, trials=5, seed=0)
    assert not rep["pass"] and rep["fixed"] < 60


def test_psl_closure_of_cyclic_generator():
    eps = cmath.exp(2j * math.pi / 5)
    s = GroupElement(eps**3, 0, 0, eps**2)
    assert len(forms.psl_closure([s])) == 5


def test_random_generation_is_deterministic():
    a = forms.random_sl2(np.random.default_rng(7))
    b = forms.random_sl2(np.random.default_rng(7))
    assert np.array_equal(a.matrix, b.matrix)


@pytest.mark.parametrize("k", list(itertools.islice(range(12), 0, 12, 3)))
def test_form_evaluate_matches_coefficients(k):
    coeffs = [0] * 13
    coeffs[k] = 1
    f = BinaryForm(tuple(coeffs))
    assert f.evaluate(2, 3) == 2 ** (12 - k) * 3**k
