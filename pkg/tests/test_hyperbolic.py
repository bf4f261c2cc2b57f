import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from alpha_lab import hyperbolic as hy
from alpha_lab.forms import GroupElement

coord = st.floats(min_value=-2, max_value=2, allow_nan=False)
vec = st.tuples(coord, coord, coord).map(np.array)


@given(vec)
def test_chart_is_radial_isometry(x):
    assert hy.distance(hy.P0, hy.point_from_coords(x)) == pytest.approx(np.linalg.norm(x), abs=1e-9)


@given(vec, vec, vec)
def test_metric_axioms(x, y, z):
    p, q, r = (hy.point_from_coords(v) for v in (x, y, z))
    assert hy.distance(p, p) < 1e-7
    assert hy.distance(p, q) == pytest.approx(hy.distance(q, p), abs=1e-9)
    assert hy.distance(p, r) <= hy.distance(p, q) + hy.distance(q, r) + 1e-9


def test_diagonal_distance_normalization():
    t = 0.7
    p = hy.HPoint(np.diag([math.exp(t), math.exp(-t)]).astype(complex))
    assert hy.distance(hy.P0, p) == pytest.approx(t * math.sqrt(2))


def test_group_acts_by_isometries():
    rng = np.random.default_rng(0)
    for _ in range(30):
        g = hy.random_sl2c(rng)
        p, q = hy.random_point(rng, 2), hy.random_point(rng, 2)
        assert hy.distance(p.transform(g), q.transform(g)) == pytest.approx(hy.distance(p, q), abs=1e-8)


def test_coset_projection_ignores_unitary_factor():
    rng = np.random.default_rng(1)
    g = hy.random_sl2c(rng)
    a, b = rng.normal(size=2) + 1j * rng.normal(size=2)
    n = math.sqrt(abs(a) ** 2 + abs(b) ** 2)
    u = np.array([[a, -b.conjugate()], [b, a.conjugate()]]) / n
    p1 = hy.from_group(GroupElement.from_matrix(g, normalize=True))
    p2 = hy.from_group(GroupElement.from_matrix(g @ u, normalize=True))
    assert hy.distance(p1, p2) < 1e-9


def test_geodesic_is_constant_speed():
    rng = np.random.default_rng(2)
    a, b = hy.random_point(rng, 2), hy.random_point(rng, 2)
    d = hy.distance(a, b)
    for t in (0.0, 0.25, 0.5, 1.0):
        m = hy.geodesic(a, b, t)
        assert hy.distance(a, m) == pytest.approx(t * d, abs=1e-9)
        assert hy.distance(m, b) == pytest.approx((1 - t) * d, abs=1e-9)


def test_gamma_fixes_origin():
    for p in hy.gamma_orbit(hy.P0):
        assert hy.distance(p, hy.P0) < 1e-12


def test_hpoint_validation():
    with pytest.raises(ValueError):
        hy.HPoint(np.array([[1, 2], [0, 1]], dtype=complex))
    with pytest.raises(hy.NotPositiveDefinite):
        hy.HPoint(np.diag([-1.0, -1.0]).astype(complex))


def test_closed_form_family_matches_brute_force_average():
    rng = np.random.default_rng(3)
    q = hy.random_point(rng, 1.5)
    fast = hy.symmetrized_distance_squared(q, 0.7)
    slow = hy.symmetrize(lambda p: 0.7 * hy.distance(p, q) ** 2)
    g = hy.random_sl2c(rng, 0.6)
    fast_lt = hy.symmetrized_log_trace(g, 1.3)
    slow_lt = hy.symmetrize(lambda p: 1.3 * math.log(np.trace(g @ p.matrix @ g.conj().T).real))
    for _ in range(5):
        p = hy.random_point(rng, 2)
        assert fast(p) == pytest.approx(slow(p), rel=1e-9)
        assert fast_lt(p) == pytest.approx(slow_lt(p), rel=1e-9)


def test_symmetrized_functions_are_invariant():
    rng = np.random.default_rng(4)
    f = hy.random_convex_invariant(rng)
    pts = [hy.random_point(rng, 2) for _ in range(3)]
    assert hy.invariance_error(f, pts) < 1e-10


def test_convexity_check_separates():
    rng = np.random.default_rng(5)
    f = hy.random_convex_invariant(rng)
    assert hy.convexity_check(f, trials=5)["pass"]
    q = hy.random_point(rng, 1)
    concave = lambda p: -hy.distance(p, q) ** 2
    assert not hy.convexity_check(concave, trials=5)["pass"]


def test_invariant_minimum_at_origin():
    rep = hy.invariant_min_check(hy.random_convex_invariant(np.random.default_rng(6)), trials=50)
    assert rep["pass"] and rep["precondition"] and rep["argmin_distance"] < 1e-4


def test_non_invariant_function_fails_precondition():
    q = hy.point_from_coords(np.array([0.8, 0.1, 0.0]))
    f = hy.InvariantFunction(lambda p: hy.distance(p, q) ** 2)
    rep = hy.invariant_min_check(f, trials=20)
    assert rep["precondition"] is False and not rep["pass"]


def test_chord_bound():
    rep = hy.chord_bound_check(hy.random_convex_invariant(np.random.default_rng(7)), trials=200)
    assert rep["pass"] and rep["worst_margin"] >= 0


def test_chord_bound_catches_non_convex_invariant():
    # a bump that is large near P0 and small on the sphere violates the chord
    f = hy.InvariantFunction(lambda p: math.exp(-4 * hy.distance(p, hy.P0) ** 2), True)
    assert not hy.chord_bound_check(f, trials=100)["pass"]


def test_fixed_point_unique():
    rep = hy.fixed_point_uniqueness(trials=100)
    assert rep["pass"] and rep["worst_margin"] > 1e-3


@pytest.mark.parametrize("h,convex", [(lambda t: t**2, True), (np.exp, True), (lambda t: np.sin(3 * t), False),
                                      (lambda t: -(t**2), False)])
def test_cstar_toy(h, convex):
    rep = hy.cstar_psh_check(h, grid=96)
    assert rep["agreement"] == 1.0
    assert rep["h_convex"] == rep["F_subharmonic"] == convex
    assert rep["convergence_order"] >= 1.5


def test_cstar_grid_floor():
    with pytest.raises(ValueError):
        hy.cstar_psh_check(np.exp, grid=16)
