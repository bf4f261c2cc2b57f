"""Hyperbolic 3-space as PSL(2, C)/SU(2): points, geodesics and convexity checks.

Points are 2x2 positive-definite Hermitian matrices of determinant 1; ``g``
acts by congruence ``P -> g P g*`` and ``P0 = I`` is the basepoint.  The
distance is the root-sum-square of the log-eigenvalues of ``A^-1 B``, so
``dist(I, diag(e^t, e^-t)) = t sqrt(2)``.  Only convexity and ratios of
distances enter the checks, so the scale is immaterial.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .forms import GroupElement, icosahedral_group

HERM_TOL = 1e-12


class NotPositiveDefinite(ValueError):
    pass


def _hermitize(m: np.ndarray) -> np.ndarray:
    m = 0.5 * (m + m.conj().T)
    det = np.linalg.det(m).real
    if det <= 0:
        raise NotPositiveDefinite("matrix is not positive definite")
    return m / math.sqrt(det)


def _eigh_power(m: np.ndarray, t: float) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    if np.any(w <= 0):
        raise NotPositiveDefinite("matrix is not positive definite")
    return (v * w**t) @ v.conj().T


@dataclass(frozen=True, eq=False)
class HPoint:
    """Positive-definite Hermitian matrix with unit determinant."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2, 2):
            raise ValueError("HPoint needs a 2x2 matrix")
        if np.abs(m - m.conj().T).max() > 1e-10 * max(1.0, np.abs(m).max()):
            raise ValueError("matrix is not Hermitian")
        w = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
        if np.any(w <= 0):
            raise NotPositiveDefinite("matrix is not positive definite")
        object.__setattr__(self, "matrix", _hermitize(m))

    @classmethod
    def origin(cls) -> "HPoint":
        return cls(np.eye(2, dtype=complex))

    @classmethod
    def exp(cls, d: np.ndarray) -> "HPoint":
        """``exp(D)`` for a traceless Hermitian ``D``."""
        d = 0.5 * (d + d.conj().T)
        w, v = np.linalg.eigh(d)
        w = w - w.mean()
        return cls((v * np.exp(w)) @ v.conj().T)

    def log(self) -> np.ndarray:
        w, v = np.linalg.eigh(self.matrix)
        return (v * np.log(w)) @ v.conj().T

    def transform(self, g: GroupElement | np.ndarray) -> "HPoint":
        m = g.matrix if isinstance(g, GroupElement) else np.asarray(g, dtype=complex)
        return HPoint(m @ self.matrix @ m.conj().T)

    def __repr__(self):
        return f"HPoint({np.round(self.matrix, 6).tolist()})"


P0 = HPoint.origin()


def from_group(g: GroupElement) -> HPoint:
    """Coset projection ``g -> g g*``; right SU(2) translates give the same point."""
    m = g.matrix
    if abs(np.linalg.det(m)) < 1e-300:
        raise ValueError("singular group element")
    return HPoint(m @ m.conj().T)


def distance(a: HPoint, b: HPoint) -> float:
    ia = _eigh_power(a.matrix, -0.5)
    w = np.linalg.eigvalsh(ia @ b.matrix @ ia)
    if np.any(w <= 0):
        raise NotPositiveDefinite("matrix is not positive definite")
    return float(math.sqrt(np.sum(np.log(w) ** 2)))


def geodesic(a: HPoint, b: HPoint, t: float) -> HPoint:
    """``A^1/2 (A^-1/2 B A^-1/2)^t A^1/2``."""
    sa = _eigh_power(a.matrix, 0.5)
    ia = _eigh_power(a.matrix, -0.5)
    inner = ia @ b.matrix @ ia
    inner = 0.5 * (inner + inner.conj().T)
    return HPoint(sa @ _eigh_power(inner, t) @ sa)


def random_point(rng: np.random.Generator, radius: float = 1.0, exact_radius: bool = False) -> HPoint:
    """``exp(t D)`` with ``D`` a random unit-norm traceless Hermitian direction."""
    x = rng.normal(size=3)
    x /= np.linalg.norm(x)
    t = radius if exact_radius else rng.uniform(0, radius)
    return point_from_coords(t * x)


def _tangent(x: np.ndarray) -> np.ndarray:
    """Traceless Hermitian matrix with coordinates ``x``; Frobenius norm ``sqrt(2)|x|``."""
    return np.array([[x[0], x[1] + 1j * x[2]], [x[1] - 1j * x[2], -x[0]]], dtype=complex)


def point_from_coords(x: np.ndarray) -> HPoint:
    """Exponential chart ``R^3 -> H`` at ``P0``; ``dist(P0, point) = |x|``."""
    return HPoint.exp(_tangent(np.asarray(x, dtype=float)) / math.sqrt(2))


def random_sl2c(rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    m = rng.normal(scale=scale, size=(2, 2)) + 1j * rng.normal(scale=scale, size=(2, 2))
    return m / np.sqrt(np.linalg.det(m))


_GAMMA: list[GroupElement] | None = None


def gamma() -> list[GroupElement]:
    global _GAMMA
    if _GAMMA is None:
        _GAMMA = icosahedral_group()
    return _GAMMA


def gamma_orbit(p: HPoint) -> list[HPoint]:
    return [p.transform(u) for u in gamma()]


@dataclass(frozen=True)
class InvariantFunction:
    evaluator: Callable[[HPoint], float]
    symmetrized: bool = False
    name: str = "f"

    def __call__(self, p: HPoint) -> float:
        return self.evaluator(p)


def symmetrize(f: Callable[[HPoint], float] | InvariantFunction, name: str | None = None) -> InvariantFunction:
    """Average over the icosahedral group.  Convexity survives since each term is ``f`` after an isometry."""
    g = gamma()
    base = f.evaluator if isinstance(f, InvariantFunction) else f
    label = name or getattr(f, "name", "f")

    def avg(p: HPoint) -> float:
        return float(sum(base(p.transform(u)) for u in g) / len(g))

    return InvariantFunction(avg, True, f"sym({label})")


def _orbit_matrices(m: np.ndarray) -> np.ndarray:
    return np.stack([u.matrix @ m @ u.matrix.conj().T for u in gamma()])


def symmetrized_distance_squared(q: HPoint, weight: float = 1.0) -> InvariantFunction:
    """Group average of ``weight * dist(P, Q)^2``, evaluated through ``tr(P^-1 Q) = 2 cosh(d / sqrt 2)``."""
    orbit = _orbit_matrices(q.matrix)

    def f(p: HPoint) -> float:
        m = p.matrix
        adj = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])  # inverse, det = 1
        tr = np.einsum("ij,kji->k", adj, orbit).real
        d = math.sqrt(2) * np.arccosh(np.maximum(tr / 2, 1.0))
        return float(weight * np.mean(d**2))

    return InvariantFunction(f, True, "sym(dist^2)")


def symmetrized_log_trace(g: np.ndarray, weight: float = 1.0) -> InvariantFunction:
    """Group average of ``weight * log tr(g P g*)``; convex along geodesics."""
    g = np.asarray(g, dtype=complex)
    mats = np.stack([(g @ u.matrix).conj().T @ (g @ u.matrix) for u in gamma()])

    def f(p: HPoint) -> float:
        tr = np.einsum("ij,kji->k", p.matrix, mats).real
        return float(weight * np.mean(np.log(tr)))

    return InvariantFunction(f, True, "sym(log tr)")


def random_convex_invariant(rng: np.random.Generator) -> InvariantFunction:
    """A random positive combination of the two symmetrized families."""
    q = random_point(rng, 1.5)
    a = rng.uniform(0.2, 2.0)
    c = rng.uniform(0.0, 2.0)
    g = random_sl2c(rng, 0.7)
    f1 = symmetrized_distance_squared(q, a)
    f2 = symmetrized_log_trace(g, c)
    return InvariantFunction(lambda p: f1(p) + f2(p), True, "sym(dist^2 + log tr)")


def invariance_error(f: Callable[[HPoint], float], points: Sequence[HPoint]) -> float:
    worst = 0.0
    for p in points:
        v = f(p)
        for q in gamma_orbit(p):
            worst = max(worst, abs(f(q) - v))
    return worst


def _report(check: str, trials: int, failures: int, worst_margin: float, tolerance: float, **extra) -> dict:
    out = {"check": check, "trials": trials, "failures": failures, "worst_margin": worst_margin,
           "tolerance": tolerance}
    out.update(extra)
    out["pass"] = failures == 0 and extra.get("precondition", True) is not False
    return out


def convexity_check(f: Callable[[HPoint], float], trials: int = 100, steps: int = 9, tol: float = 1e-6,
                    seed: int = 0, radius: float = 2.0, rel_step: float = 1e-3) -> dict:
    """Centered second differences of ``f`` along random geodesic segments.

    The step is ``rel_step`` of the segment length in the affine parameter and
    a difference fails when it is below ``-tol * (1 + |f|)``.
    """
    rng = np.random.default_rng(seed)
    failures = 0
    worst = math.inf
    for _ in range(trials):
        a = random_point(rng, radius)
        b = random_point(rng, radius)
        h = rel_step
        for s in np.linspace(0, 1, steps + 2)[1:-1]:
            f0 = f(geodesic(a, b, s))
            fp = f(geodesic(a, b, s + h))
            fm = f(geodesic(a, b, s - h))
            second = (fp - 2 * f0 + fm) / h**2
            worst = min(worst, second)
            failures += second < -tol * (1 + abs(f0))
    return _report("convexity", trials, failures, worst, tol, steps=steps, min_second_difference=worst)


def _argmin(f: Callable[[HPoint], float], start: np.ndarray) -> np.ndarray:
    res = minimize(lambda x: f(point_from_coords(x)), start, method="BFGS",
                   options={"gtol": 1e-10, "maxiter": 500})
    return res.x


def invariant_min_check(f: InvariantFunction, trials: int = 200, seed: int = 0, radius: float = 5.0,
                        tol: float = 1e-9, argmin_tol: float = 1e-4) -> dict:
    """``f(Q) >= f(P0)`` on samples up to ``radius`` and the local argmin sits at ``P0``.

    The invariance precondition is measured on sampled points; a function
    failing it is reported with ``precondition: False``.
    """
    rng = np.random.default_rng(seed)
    probe = [random_point(rng, 2.0) for _ in range(5)]
    inv_err = invariance_error(f, probe)
    invariant = inv_err < 1e-10 * max(1.0, abs(f(P0)))
    f0 = f(P0)
    failures = 0
    worst = math.inf
    values = []
    for _ in range(trials):
        q = random_point(rng, radius)
        v = f(q)
        values.append(v)
        worst = min(worst, v - f0)
        failures += v < f0 - tol * (1 + abs(f0))
    spread = max(values + [f0]) - min(values + [f0])
    degenerate = spread <= 1e-12 * (1 + abs(f0))
    if degenerate:
        argmin_dist = 0.0
    else:
        x = _argmin(f, rng.normal(scale=0.3, size=3))
        argmin_dist = distance(point_from_coords(x), P0)
    at_p0 = argmin_dist <= argmin_tol
    if not at_p0:
        failures += 1
    return _report("invariant_min", trials, failures, worst, tol, precondition=bool(invariant),
                   invariance_error=inv_err, argmin_distance=argmin_dist, degenerate=bool(degenerate))


def chord_bound_check(f: InvariantFunction, trials: int = 1000, seed: int = 0, sphere_samples: int = 200,
                      tol: float = 1e-9) -> dict:
    """Radial chord bound on the unit ball around ``P0``.

    With ``f(P0) = -2 pi b`` and ``2 pi abar`` the sampled maximum of ``f``
    on the unit sphere, every ``Q`` with ``dist(Q, P0) <= 1`` must satisfy
    ``f(Q) / (2 pi) <= -b + (abar + b) dist(Q, P0)``; on the radius-1/2 ball
    this gives ``f <= pi (abar - b)``.  The sphere sample includes the radial
    endpoint of every test point, so the chord uses a maximum at least as
    large as the endpoint value it needs.
    """
    rng = np.random.default_rng(seed)
    two_pi = 2 * math.pi
    b = -f(P0) / two_pi
    dirs = rng.normal(size=(trials, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    rads = rng.uniform(0, 1, size=trials)
    sphere = rng.normal(size=(sphere_samples, 3))
    sphere /= np.linalg.norm(sphere, axis=1, keepdims=True)
    on_sphere = [f(point_from_coords(d)) for d in np.vstack([sphere, dirs])]
    abar = max(on_sphere) / two_pi
    failures = 0
    half_failures = 0
    worst = math.inf
    for d, t in zip(dirs, rads):
        q = point_from_coords(t * d)
        dist_q = distance(q, P0)
        v = f(q) / two_pi
        bound = -b + (abar + b) * dist_q
        margin = bound - v
        worst = min(worst, margin)
        if margin < -tol * (1 + abs(v)):
            failures += 1
        if dist_q <= 0.5 and f(q) > math.pi * (abar - b) + tol * (1 + abs(f(q))):
            half_failures += 1
    return _report("chord_bound", trials, failures + half_failures, worst, tol, abar=abar, b=b,
                   half_ball_failures=half_failures)


def fixed_point_uniqueness(trials: int = 1000, seed: int = 0, radius: float = 3.0) -> dict:
    """Every sampled ``P != P0`` is moved by some group element."""
    rng = np.random.default_rng(seed)
    failures = 0
    worst = math.inf
    tested = 0
    while tested < trials:
        p = random_point(rng, radius)
        if distance(p, P0) <= 1e-3:
            continue
        tested += 1
        move = max(distance(p, q) for q in gamma_orbit(p))
        worst = min(worst, move)
        failures += move <= 1e-6
    return _report("fixed_point_uniqueness", trials, failures, worst, 1e-6)


# --- C* toy model -----------------------------------------------------------


def cstar_psh_check(h: Callable[[np.ndarray], np.ndarray], grid: int = 128, t_range=(-0.7, 0.7),
                    indeterminate: float = 0.05) -> dict:
    """Compare the sign of the Laplacian of ``F(z) = h(log|z|)`` with the sign of ``h''``.

    ``F`` is sampled on a Cartesian ``grid x grid`` square and its Laplacian
    taken by the 5-point stencil on the annulus ``exp(t_range)``; ``h''`` is a
    centered difference in ``t``.  Points where ``|h''|`` is below
    ``indeterminate`` times its maximum have no reliable sign and are skipped.
    The exact relation ``Delta F = h''(log r) / r^2`` is checked for
    second-order convergence by repeating on a grid of half the resolution.
    """
    if grid < 32:
        raise ValueError("grid resolution must be at least 32")

    def run(m):
        r_in, r_out = math.exp(t_range[0]), math.exp(t_range[1])
        half = 1.1 * r_out
        xs = np.linspace(-half, half, m)
        dx = xs[1] - xs[0]
        x, y = np.meshgrid(xs, xs, indexing="ij")
        r = np.hypot(x, y)
        with np.errstate(divide="ignore"):
            F = h(np.log(np.where(r > 0, r, 1e-300)))
        lap = np.full_like(F, np.nan)
        lap[1:-1, 1:-1] = (F[2:, 1:-1] + F[:-2, 1:-1] + F[1:-1, 2:] + F[1:-1, :-2] - 4 * F[1:-1, 1:-1]) / dx**2
        mask = np.zeros_like(F, dtype=bool)
        mask[1:-1, 1:-1] = True
        mask &= (r >= r_in) & (r <= r_out)
        t = np.log(r[mask])
        dt = 1e-3
        hpp = (h(t + dt) - 2 * h(t) + h(t - dt)) / dt**2
        exact = hpp / r[mask] ** 2
        return lap[mask], hpp, exact, dx

    lap, hpp, exact, dx = run(grid)
    scale = np.max(np.abs(hpp)) if hpp.size else 0.0
    decided = np.abs(hpp) > indeterminate * scale if scale > 0 else np.zeros_like(hpp, dtype=bool)
    agree = np.sign(lap[decided]) == np.sign(hpp[decided])
    agreement = float(agree.mean()) if agree.size else 1.0
    err_fine = float(np.max(np.abs(lap - exact))) if lap.size else 0.0
    lap_c, _, exact_c, _ = run(grid // 2)
    err_coarse = float(np.max(np.abs(lap_c - exact_c))) if lap_c.size else 0.0
    if err_fine < 1e-9 * max(1.0, scale):
        order = math.inf
    else:
        order = math.log2(err_coarse / err_fine) if err_fine > 0 else math.inf
    return {
        "check": "cstar_psh",
        "grid": grid,
        "points": int(lap.size),
        "decided": int(decided.sum()),
        "agreement": agreement,
        "h_convex": bool(np.all(hpp[decided] >= 0)),
        "F_subharmonic": bool(np.all(lap[decided] >= 0)),
        "max_error": err_fine,
        "convergence_order": order,
        "pass": agreement == 1.0 and order >= 1.5,
    }
