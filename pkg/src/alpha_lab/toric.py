"""Lattice polytopes, their unimodular symmetry groups and the log-sum-exp potential.

For a lattice polytope ``P`` the potential ``f(x) = log sum_v exp(<v, x>)``
over the lattice points of ``P`` is convex on the dual space and its
gradient maps onto the interior of ``P``.  A symmetry ``g`` of ``P`` acts on
the dual by ``x -> g^T x`` and preserves ``f``.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.spatial import ConvexHull
from scipy.special import logsumexp, softmax

MAX_VERTICES = 12


class PolytopeError(ValueError):
    pass


@dataclass(frozen=True)
class LatticePolytope:
    vertices: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        verts = tuple(tuple(int(c) for c in v) for v in self.vertices)
        if not verts:
            raise PolytopeError("no vertices")
        n = len(verts[0])
        if any(len(v) != n for v in verts):
            raise PolytopeError("vertices have mixed dimensions")
        if len(set(verts)) != len(verts):
            raise PolytopeError("repeated vertex")
        arr = np.array(verts, dtype=float)
        if np.linalg.matrix_rank(arr - arr.mean(axis=0)) < n:
            raise PolytopeError("vertex set is not full-dimensional")
        hull = ConvexHull(arr)
        if len(hull.vertices) != len(verts):
            raise PolytopeError("some vertex is not an extreme point of the hull")
        object.__setattr__(self, "vertices", verts)

    @property
    def dimension(self) -> int:
        return len(self.vertices[0])

    @property
    def array(self) -> np.ndarray:
        return np.array(self.vertices, dtype=float)

    def halfspaces(self) -> np.ndarray:
        """Rows ``[a, b]`` with ``a.y + b <= 0`` inside and ``|a| = 1``."""
        return ConvexHull(self.array).equations

    def lattice_points(self) -> np.ndarray:
        arr = np.array(self.vertices)
        lo, hi = arr.min(axis=0), arr.max(axis=0)
        eq = self.halfspaces()
        pts = [p for p in itertools.product(*(range(a, b + 1) for a, b in zip(lo, hi)))
               if np.all(eq[:, :-1] @ np.array(p) + eq[:, -1] <= 1e-9)]
        return np.array(sorted(pts), dtype=float)

    @classmethod
    def from_json(cls, data: dict | str | Path) -> "LatticePolytope":
        if isinstance(data, (str, Path)):
            data = json.loads(Path(data).read_text())
        poly = cls(tuple(tuple(v) for v in data["vertices"]))
        if "dimension" in data and int(data["dimension"]) != poly.dimension:
            raise PolytopeError("declared dimension does not match the vertices")
        return poly

    def to_json(self) -> dict:
        return {"dimension": self.dimension, "vertices": [list(v) for v in self.vertices]}


HEXAGON = LatticePolytope(((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1)))
DIAMOND = LatticePolytope(((1, 0), (0, 1), (-1, 0), (0, -1)))


@dataclass(frozen=True)
class PolytopeSymmetry:
    """Integer matrices ``g`` (``det = +-1``) with ``g V = V`` as sets."""

    elements: tuple[np.ndarray, ...]

    @property
    def order(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def subgroup(self, generators: Sequence[np.ndarray]) -> "PolytopeSymmetry":
        return PolytopeSymmetry(tuple(_closure([np.asarray(g, dtype=int) for g in generators],
                                               self.elements[0].shape[0])))

    def generators(self) -> list[np.ndarray]:
        """A small generating set, chosen greedily in element order."""
        n = self.elements[0].shape[0]
        gens: list[np.ndarray] = []
        span = _closure([], n)
        for g in self.elements:
            if not any(np.array_equal(g, h) for h in span):
                gens.append(g)
                span = _closure(gens, n)
            if len(span) == self.order:
                break
        return gens

    def closure_table_ok(self) -> bool:
        keys = {_mkey(g) for g in self.elements}
        ident = np.eye(self.elements[0].shape[0], dtype=int)
        if _mkey(ident) not in keys:
            return False
        for g in self.elements:
            if _mkey(np.rint(np.linalg.inv(g)).astype(int)) not in keys:
                return False
            for h in self.elements:
                if _mkey(g @ h) not in keys:
                    return False
        return True


def _mkey(m: np.ndarray) -> tuple:
    return tuple(int(x) for x in np.asarray(m).ravel())


def _closure(gens: Sequence[np.ndarray], n: int) -> list[np.ndarray]:
    ident = np.eye(n, dtype=int)
    seen = {_mkey(ident): ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for h in frontier:
            for g in gens:
                p = g @ h
                k = _mkey(p)
                if k not in seen:
                    seen[k] = p
                    nxt.append(p)
        frontier = nxt
    return [seen[k] for k in sorted(seen)]


def symmetry_group(poly: LatticePolytope) -> PolytopeSymmetry:
    """All unimodular integer maps permuting the vertices.

    A maximal linearly independent set of vertices is sent to every ordered
    tuple of distinct vertices; each candidate matrix is kept when it is
    integral with determinant ``+-1`` and maps the vertex set onto itself.
    """
    verts = poly.array
    n = poly.dimension
    if len(verts) > MAX_VERTICES:
        raise PolytopeError(f"brute force limited to {MAX_VERTICES} vertices")
    basis_idx: list[int] = []
    for i in range(len(verts)):
        if np.linalg.matrix_rank(verts[basis_idx + [i]]) == len(basis_idx) + 1:
            basis_idx.append(i)
        if len(basis_idx) == n:
            break
    if len(basis_idx) < n:
        raise PolytopeError("vertex set does not span")
    b_inv = np.linalg.inv(verts[basis_idx].T)
    vset = {tuple(v) for v in poly.vertices}
    found = {}
    for images in itertools.permutations(range(len(verts)), n):
        m = verts[list(images)].T @ b_inv
        mi = np.rint(m)
        if np.abs(m - mi).max() > 1e-9:
            continue
        mi = mi.astype(int)
        if round(abs(np.linalg.det(mi))) != 1:
            continue
        if {tuple(int(x) for x in mi @ np.array(v)) for v in poly.vertices} != vset:
            continue
        found[_mkey(mi)] = mi
    return PolytopeSymmetry(tuple(found[k] for k in sorted(found)))


@dataclass(frozen=True)
class FixedSet:
    dimension: int
    basis: np.ndarray

    @property
    def unique(self) -> bool:
        return self.dimension == 0

    @property
    def point(self) -> list[float] | None:
        return [0.0] * self.basis.shape[0] if self.unique else None


def fixed_points(group: PolytopeSymmetry) -> FixedSet:
    """Common kernel of ``g - I``; for a linear action the origin is always in it."""
    if group.order == 0:
        raise PolytopeError("empty group")
    n = group.elements[0].shape[0]
    stack = np.vstack([g - np.eye(n) for g in group.elements])
    _, s, vt = np.linalg.svd(stack)
    rank = int(np.sum(s > 1e-9))
    return FixedSet(n - rank, vt[rank:].T)


def symmetry_report(poly: LatticePolytope, group: PolytopeSymmetry | None = None) -> dict:
    group = group or symmetry_group(poly)
    fs = fixed_points(group)
    return {
        "order": group.order,
        "generators": [g.tolist() for g in group.generators()],
        "fixed_point_unique": fs.unique,
        "fixed_point": fs.point,
        "fixed_dimension": fs.dimension,
    }


def lse_potential(poly: LatticePolytope) -> Callable[[np.ndarray], np.ndarray]:
    """``x -> log sum_v exp(<v, x>)`` over all lattice points of ``P``; accepts ``(..., n)`` arrays."""
    pts = poly.lattice_points()

    def f(x):
        return logsumexp(np.asarray(x, dtype=float) @ pts.T, axis=-1)

    f.points = pts
    return f


def lse_gradient(poly: LatticePolytope, x: np.ndarray) -> np.ndarray:
    pts = poly.lattice_points()
    return softmax(np.asarray(x, dtype=float) @ pts.T, axis=-1) @ pts


def exposing_direction(poly: LatticePolytope, vertex_index: int) -> np.ndarray:
    """Unit vector in the interior of the normal cone at a vertex (sum of facet normals)."""
    hull = ConvexHull(poly.array)
    normals = [eq[:-1] for simplex, eq in zip(hull.simplices, hull.equations) if vertex_index in simplex]
    d = np.sum(normals, axis=0)
    return d / np.linalg.norm(d)


def gradient_image_check(poly: LatticePolytope, samples: int = 10_000, radius: float = 10.0,
                         approach_radius: float = 50.0, approach_tol: float = 1e-3, seed: int = 0) -> dict:
    """Gradients of the potential land strictly inside ``P`` and approach every vertex."""
    rng = np.random.default_rng(seed)
    n = poly.dimension
    dirs = rng.normal(size=(samples, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    x = dirs * (radius * rng.random(samples) ** (1.0 / n))[:, None]
    grads = lse_gradient(poly, x)
    eq = poly.halfspaces()
    margins = -(grads @ eq[:, :-1].T + eq[:, -1])
    min_margin = margins.min(axis=1)
    inside = float(np.mean(min_margin > 0))
    approach = []
    for i, v in enumerate(poly.array):
        g = lse_gradient(poly, approach_radius * exposing_direction(poly, i))
        approach.append(float(np.linalg.norm(g - v)))
    centre = lse_gradient(poly, np.zeros(n))
    return {
        "check": "gradient_image",
        "samples": samples,
        "radius": radius,
        "inside_fraction": inside,
        "min_margin": float(min_margin.min()),
        "vertex_approach_errors": approach,
        "gradient_at_origin": centre.tolist(),
        "pass": inside == 1.0 and max(approach) < approach_tol,
    }


def _dual_average(q: Callable[[np.ndarray], float], group: PolytopeSymmetry) -> Callable[[np.ndarray], float]:
    mats = [g.T.astype(float) for g in group.elements]

    def f(x):
        x = np.asarray(x, dtype=float)
        return float(np.mean([q(m @ x) for m in mats]))

    return f


def random_symmetrized_quadratic(rng: np.random.Generator, group: PolytopeSymmetry):
    n = group.elements[0].shape[0]
    a = rng.normal(size=(n, n))
    hess = a @ a.T + 0.1 * np.eye(n)
    centre = rng.normal(size=n)

    def q(x):
        d = x - centre
        return float(d @ hess @ d)

    return _dual_average(q, group)


def chord_check_euclidean(f: Callable[[np.ndarray], float], n: int, trials: int = 1000, seed: int = 0,
                          sphere_samples: int = 200, tol: float = 1e-9) -> dict:
    """Euclidean version of the radial chord bound on the unit ball around 0."""
    rng = np.random.default_rng(seed)
    two_pi = 2 * math.pi
    b = -f(np.zeros(n)) / two_pi
    dirs = rng.normal(size=(trials, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    rads = rng.uniform(0, 1, size=trials)
    sphere = rng.normal(size=(sphere_samples, n))
    sphere /= np.linalg.norm(sphere, axis=1, keepdims=True)
    abar = max(f(d) for d in np.vstack([sphere, dirs])) / two_pi
    failures = 0
    worst = math.inf
    for d, t in zip(dirs, rads):
        v = f(t * d) / two_pi
        margin = (-b + (abar + b) * t) - v
        worst = min(worst, margin)
        failures += margin < -tol * (1 + abs(v))
        if t <= 0.5 and f(t * d) > math.pi * (abar - b) + tol * (1 + abs(f(t * d))):
            failures += 1
    return {"check": "chord_bound_dual", "trials": trials, "failures": failures, "worst_margin": worst,
            "tolerance": tol, "pass": failures == 0}


def invariant_min_on_dual(poly: LatticePolytope, trials: int = 50, seed: int = 0,
                          group: PolytopeSymmetry | None = None, argmin_tol: float = 1e-4,
                          chord_trials: int = 200) -> dict:
    """Group-averaged convex quadratics on the dual minimize at the fixed point 0."""
    group = group or symmetry_group(poly)
    fs = fixed_points(group)
    if not fs.unique:
        return {"check": "invariant_min_dual", "precondition": False, "fixed_dimension": fs.dimension,
                "trials": 0, "failures": 0, "pass": False}
    rng = np.random.default_rng(seed)
    n = poly.dimension
    failures = 0
    chord_failures = 0
    worst = 0.0
    for t in range(trials):
        f = random_symmetrized_quadratic(rng, group)
        res = minimize(f, rng.normal(size=n), method="BFGS", options={"gtol": 1e-10})
        err = float(np.linalg.norm(res.x))
        worst = max(worst, err)
        failures += err > argmin_tol
        chord = chord_check_euclidean(f, n, trials=chord_trials, seed=seed + t)
        chord_failures += not chord["pass"]
    lse = lse_potential(poly)
    res = minimize(lambda x: float(lse(x)), rng.normal(size=n), method="BFGS", options={"gtol": 1e-10})
    lse_err = float(np.linalg.norm(res.x))
    return {
        "check": "invariant_min_dual",
        "precondition": True,
        "trials": trials,
        "failures": failures,
        "chord_failures": chord_failures,
        "worst_argmin_distance": worst,
        "lse_argmin_distance": lse_err,
        "pass": failures == 0 and chord_failures == 0 and lse_err <= argmin_tol,
    }
