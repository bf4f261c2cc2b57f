"""The twelve end-to-end verification criteria, each returning a :class:`CheckResult`.

Both ``alpha-lab reproduce`` and ``tests/test_acceptance.py`` run these
functions, so the CLI summary and the test gate cannot drift apart.
Tolerances are module constants; ``overrides`` may replace them by name.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy.integrate import quad

from . import cusp, forms, green, hyperbolic, lct, toric

TOLERANCES = {
    "threshold": 0.02,
    "threshold_seconds": 60.0,
    "ratio_sigmas": 3.0,
    "quasi_homogeneity": 1e-12,
    "disc_integral_rel": 0.01,
    "equivariance": 1e-9,
    "invariance": 1e-10,
    "argmin": 1e-4,
    "green_identity": 1e-8,
    "vertex_approach": 1e-3,
}


@dataclass
class CheckResult:
    number: int
    name: str
    topic: str
    passed: bool
    seconds: float = 0.0
    details: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number:2d}. {self.name} ({self.topic})"

    def to_json(self) -> dict:
        return {"number": self.number, "name": self.name, "topic": self.topic, "pass": self.passed,
                "seconds": round(self.seconds, 3), "details": _jsonable(self.details)}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def tolerances(overrides: dict | None = None) -> dict:
    tol = dict(TOLERANCES)
    for k, v in (overrides or {}).items():
        if k not in tol:
            raise KeyError(f"unknown tolerance {k!r}")
        if not v > 0:
            raise ValueError(f"tolerance {k} must be positive, got {v}")
        tol[k] = float(v)
    return tol


def check_threshold(seed: int = 0, tol: dict | None = None, samples: int = 1_000_000) -> CheckResult:
    tol = tol or TOLERANCES
    spec = lct.preset("cusp23")
    predicted = lct.predicted_threshold(spec)
    t0 = time.perf_counter()
    est = lct.estimate_threshold(spec, tol=0.005, samples=samples, seed=seed)
    elapsed = time.perf_counter() - t0
    ok = (predicted == Fraction(5, 6) and abs(est.beta_hat - 5 / 6) <= tol["threshold"]
          and elapsed < tol["threshold_seconds"])
    return CheckResult(1, "threshold 5/6", "cusp integrability threshold", ok, details={
        "predicted": str(predicted), "estimated": est.beta_hat, "bracket": est.bracket,
        "samples_per_annulus": samples, "search_seconds": elapsed})


def check_scaling(seed: int = 0, tol: dict | None = None, samples: int = 200_000) -> CheckResult:
    tol = tol or TOLERANCES
    spec = lct.preset("cusp23")
    rows = []
    ok = True
    for beta in (0.0, 0.4, 0.8):
        expected = 2.0 ** lct.scaling_exponent(spec, beta)
        est = [lct.annulus_integral(spec, beta, r, samples, seed) for r in range(4)]
        for r in range(3):
            z = lct.ratio_zscore(est[r], est[r + 1], expected)
            rows.append({"beta": beta, "r": r, "ratio": est[r + 1].mean / est[r].mean, "expected": expected,
                         "z": z})
            ok &= z <= tol["ratio_sigmas"]
    qh = lct.quasi_homogeneity_error(spec, beta=0.8, samples=10_000, seed=seed)
    ok &= qh <= tol["quasi_homogeneity"]
    return CheckResult(2, "dyadic scaling recursion", "weighted scaling of the integral", bool(ok), details={
        "ratios": rows, "quasi_homogeneity_error": qh})


def check_convergence(seed: int = 0, tol: dict | None = None, samples: int = 100_000) -> CheckResult:
    spec = lct.preset("cusp23")
    conv = lct.partial_sums(spec, 0.5, R=4, samples=samples, seed=seed)
    div = lct.partial_sums(spec, 0.9, R=6, samples=samples, seed=seed)
    ok = conv.converged and conv.tail_bound is not None and math.isfinite(conv.total) \
        and div.divergence_evidence and div.ratio > 1
    return CheckResult(3, "convergence below 5/6, divergence above", "dyadic partial sums", bool(ok), details={
        "beta_0.5": {"ratio": conv.ratio, "total": conv.total, "tail_bound": conv.tail_bound},
        "beta_0.9": {"ratio": div.ratio, "ratios": div.ratios, "divergence_evidence": div.divergence_evidence}})


def check_monomial(seed: int = 0, tol: dict | None = None) -> CheckResult:
    tol = tol or TOLERANCES
    finite = lct.monomial_integral(2, 2, 0.9)
    divergent = lct.monomial_integral(2, 2, 1.0)
    disc = lct.monomial_integral(1, 1, 0.5)
    radial, _ = quad(lambda r: r ** (1 - 2 * 0.5), 0, 1)
    quadrature = 2 * math.pi * radial
    threshold = lct.predicted_threshold(lct.preset("monomial:2,2"))
    ok = (math.isfinite(finite) and math.isinf(divergent) and threshold == 1
          and abs(disc - 2 * math.pi) <= tol["disc_integral_rel"] * 2 * math.pi
          and abs(quadrature - 2 * math.pi) <= tol["disc_integral_rel"] * 2 * math.pi)
    return CheckResult(4, "monomial threshold 1", "normal-crossing model", bool(ok), details={
        "beta_0.9": finite, "beta_1": divergent, "disc_closed_form": disc, "disc_quadrature": quadrature,
        "threshold": str(threshold)})


def check_cusp(seed: int = 0, tol: dict | None = None) -> CheckResult:
    cert = cusp.cusp_certificate(6)
    n = 6
    names = ("u", "alpha")
    u = cusp.BivariateSeries.var(0, n, names)
    a = cusp.BivariateSeries.var(1, n, names)
    smooth = cusp.cusp_normal_form_check(cusp.slice_orders([u, a, a**2]))
    tacnode = cusp.cusp_normal_form_check(cusp.slice_orders([u, a**2, a**4]))
    ok = (cert["pass"] and cert["orders"] == [2, 3] and cert["lead2"] == "-66" and cert["lead3"] == "-440"
          and not smooth["pass"] and smooth["orders"] == [1, 2]
          and not tacnode["pass"] and tacnode["orders"] == [2, 4])
    return CheckResult(5, "cusp certificate", "tangent-surface slice", bool(ok), details={
        "certificate": cert, "smooth_control": smooth, "tacnode_control": tacnode})


def check_equivariance(seed: int = 0, tol: dict | None = None, trials: int = 100) -> CheckResult:
    tol = tol or TOLERANCES
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        g = forms.random_sl2(rng)
        al, be = forms.random_projpoint(rng), forms.random_projpoint(rng)
        lhs = forms.act(g, forms.expand_mu(al, be))
        rhs = forms.expand_mu(g.apply(al), g.apply(be))
        worst = max(worst, forms.projective_distance(lhs, rhs))
    return CheckResult(6, "equivariance of the orbit map", "binary-form orbit map", worst < tol["equivariance"],
                       details={"trials": trials, "max_projective_error": worst})


def check_icosahedral(seed: int = 0, tol: dict | None = None) -> CheckResult:
    tol = tol or TOLERANCES
    group = forms.icosahedral_group()
    f = forms.icosahedral_form()
    base = f.as_array()
    worst = max(float(np.max(np.abs(forms.act(g, f).as_array() - base))) for g in group)
    comm = forms.commutator_closure(group)
    orders = sorted({forms.psl_order(g) for g in group})
    ok = len(group) == 60 and len(comm) == 60 and worst < tol["invariance"] and orders == [1, 2, 3, 5]
    return CheckResult(7, "icosahedral invariance and perfectness", "icosahedral invariant", bool(ok), details={
        "group_order": len(group), "commutator_closure_order": len(comm), "max_invariance_error": worst,
        "element_orders": orders})


def _convex_family(seed: int, count: int) -> list:
    rng = np.random.default_rng(seed)
    return [hyperbolic.random_convex_invariant(rng) for _ in range(count)]


def check_fixed_point(seed: int = 0, tol: dict | None = None, functions: int = 50,
                      uniqueness_trials: int = 1000) -> CheckResult:
    tol = tol or TOLERANCES
    fams = _convex_family(seed, functions)
    passed = 0
    worst = 0.0
    for i, f in enumerate(fams):
        conv = hyperbolic.convexity_check(f, trials=10, seed=seed + i)
        rep = hyperbolic.invariant_min_check(f, trials=100, seed=seed + i, argmin_tol=tol["argmin"])
        worst = max(worst, rep["argmin_distance"])
        passed += conv["pass"] and rep["pass"]
    uniq = hyperbolic.fixed_point_uniqueness(uniqueness_trials, seed=seed)
    ok = passed == functions and uniq["pass"]
    return CheckResult(8, "invariant convex minimum at P0", "fixed-point minimization", bool(ok), details={
        "functions": functions, "passed": passed, "worst_argmin_distance": worst,
        "uniqueness": {"trials": uniq["trials"], "failures": uniq["failures"],
                       "min_displacement": uniq["worst_margin"]}})


def check_chord(seed: int = 0, tol: dict | None = None, functions: int = 50, points: int = 1000) -> CheckResult:
    fams = _convex_family(seed, functions)
    passed = 0
    worst = math.inf
    for i, f in enumerate(fams):
        rep = hyperbolic.chord_bound_check(f, trials=points, seed=seed + i)
        worst = min(worst, rep["worst_margin"])
        passed += rep["pass"]
    return CheckResult(9, "chord inequality", "radial chord bound", passed == functions, details={
        "functions": functions, "points_per_function": points, "passed": passed, "worst_margin": worst})


def cstar_test_functions() -> list[tuple[str, Callable[[np.ndarray], np.ndarray]]]:
    """Twenty profiles ``h(t)``, the last few deliberately non-convex."""
    out = [
        ("t^2", lambda t: t**2),
        ("log(1+e^2t)", lambda t: np.log1p(np.exp(2 * t))),
        ("e^t", np.exp),
        ("e^-2t", lambda t: np.exp(-2 * t)),
        ("cosh t", np.cosh),
        ("t^4 + t^2", lambda t: t**4 + t**2),
        ("sqrt(1+t^2)", lambda t: np.sqrt(1 + t**2)),
        ("log cosh 3t", lambda t: np.log(np.cosh(3 * t))),
        ("t^2 + 0.5 t", lambda t: t**2 + 0.5 * t),
        ("e^3t + e^-t", lambda t: np.exp(3 * t) + np.exp(-t)),
        ("(t+2)^3", lambda t: (t + 2) ** 3),
        ("softplus 5t", lambda t: np.log1p(np.exp(5 * t)) / 5),
        ("2 t^2 + cos t", lambda t: 2 * t**2 + np.cos(t)),
        ("t^6 + 3 t^2", lambda t: t**6 + 3 * t**2),
        ("log(1+e^t+e^2t)", lambda t: np.log(1 + np.exp(t) + np.exp(2 * t))),
        ("-t^2", lambda t: -(t**2)),
        ("sin 3t", lambda t: np.sin(3 * t)),
        ("-log(1+e^2t)", lambda t: -np.log1p(np.exp(2 * t))),
        ("t^3", lambda t: t**3),
        ("cos 4t", lambda t: np.cos(4 * t)),
    ]
    return out


def check_cstar(seed: int = 0, tol: dict | None = None, grid: int = 128) -> CheckResult:
    rows = []
    ok = True
    for name, h in cstar_test_functions():
        rep = hyperbolic.cstar_psh_check(h, grid=grid)
        rows.append({"h": name, "agreement": rep["agreement"], "h_convex": rep["h_convex"],
                     "F_subharmonic": rep["F_subharmonic"], "order": rep["convergence_order"]})
        ok &= rep["pass"] and rep["h_convex"] == rep["F_subharmonic"]
    has_control = any(not r["h_convex"] for r in rows)
    return CheckResult(10, "C* toy: psh <-> convex", "plurisubharmonic toy model", bool(ok and has_control and len(rows) == 20),
                       details={"functions": rows})


def check_lemma1(seed: int = 0, tol: dict | None = None, m: int = 128, c: float = 6.0,
                 trials: int = 100) -> CheckResult:
    tol = tol or TOLERANCES
    rng = np.random.default_rng(seed)
    held = chain = 0
    worst_margin = math.inf
    for _ in range(trials):
        phi = green.random_admissible(rng, m, c)
        rep = green.check_lower_bound(phi, c)
        held += rep["pass"]
        chain += rep["chain_holds"]
        worst_margin = min(worst_margin, rep["margin"])
    kernel = green.GreenKernel.build(m)
    recon = 0.0
    for _ in range(5):
        f = green.band_limited_field(rng, m)
        rebuilt = -kernel.apply(green.laplacian(f)) + green.mean(f)
        recon = max(recon, float(np.max(np.abs(rebuilt - f))))
    ok = held == trials and chain == trials and recon < tol["green_identity"]
    return CheckResult(11, "Green's-function lower bound", "torus Green's function", bool(ok), details={
        "M": green.lemma1_constant(c, m), "held": held, "chain_held": chain, "trials": trials,
        "worst_margin": worst_margin, "green_identity_error": recon})


def check_toric(seed: int = 0, tol: dict | None = None) -> CheckResult:
    tol = tol or TOLERANCES
    hexagon = toric.HEXAGON
    group = toric.symmetry_group(hexagon)
    fs = toric.fixed_points(group)
    grad = toric.gradient_image_check(hexagon, samples=10_000, radius=10.0, approach_radius=50.0,
                                      approach_tol=tol["vertex_approach"], seed=seed)
    square_group = toric.symmetry_group(toric.DIAMOND)
    reflection = square_group.subgroup([np.array([[0, 1], [1, 0]])])
    control = toric.fixed_points(reflection)
    ok = (group.order == 12 and fs.unique and grad["inside_fraction"] == 1.0
          and max(grad["vertex_approach_errors"]) < tol["vertex_approach"] and not control.unique)
    return CheckResult(12, "toric symmetric polytope", "toric analogue", bool(ok), details={
        "order": group.order, "fixed_point_unique": fs.unique, "inside_fraction": grad["inside_fraction"],
        "vertex_approach_errors": grad["vertex_approach_errors"],
        "reflection_control_fixed_dimension": control.dimension})


CHECKS: list[Callable[..., CheckResult]] = [
    check_threshold, check_scaling, check_convergence, check_monomial, check_cusp, check_equivariance,
    check_icosahedral, check_fixed_point, check_chord, check_cstar, check_lemma1, check_toric,
]


def run_all(seed: int = 0, overrides: dict | None = None, stop_on_failure: bool = False,
            progress: Callable[[CheckResult], None] | None = None) -> list[CheckResult]:
    tol = tolerances(overrides)
    results = []
    for check in CHECKS:
        t0 = time.perf_counter()
        res = check(seed=seed, tol=tol)
        res.seconds = time.perf_counter() - t0
        results.append(res)
        if progress:
            progress(res)
        if stop_on_failure and not res.passed:
            break
    return results
