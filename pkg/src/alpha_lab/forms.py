"""Binary forms, the SL(2) substitution action and the icosahedral invariant.

A binary form of degree ``d`` is stored by its coefficient sequence
``(c_0, ..., c_d)`` where ``c_k`` multiplies ``z1**(d-k) * z2**k``.  A point
``(a1 : a2)`` of the projective line corresponds to the linear factor
``a2*z1 - a1*z2``; in the affine chart ``z = z1/z2`` this is ``z - a1/a2`` and
the point ``(1 : 0)`` is the root at infinity.

Coefficients stay exact (``int``/``Fraction``) whenever the inputs are exact;
anything touching a floating-point group element is promoted to ``complex``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Number
from typing import Sequence

import numpy as np

PROJECTIVE_TOL = 1e-9
DET_TOL = 1e-12


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction))


def _poly_mul(p: Sequence, q: Sequence) -> list:
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def _poly_pow(p: Sequence, n: int) -> list:
    out = [1]
    for _ in range(n):
        out = _poly_mul(out, p)
    return out


@dataclass(frozen=True)
class ProjPoint:
    """Homogeneous pair ``(z1, z2)``, not both zero, up to a nonzero scalar."""

    z1: Number
    z2: Number = 1

    def __post_init__(self):
        if self.z1 == 0 and self.z2 == 0:
            raise ValueError("projective point with both coordinates zero")

    @classmethod
    def infinity(cls) -> "ProjPoint":
        return cls(1, 0)

    @property
    def is_infinite(self) -> bool:
        return self.z2 == 0

    def affine(self) -> complex:
        """Affine coordinate ``z1/z2``; ``inf`` for the point at infinity."""
        if self.z2 == 0:
            return complex(math.inf)
        if _is_exact(self.z1) and _is_exact(self.z2):
            return Fraction(self.z1) / Fraction(self.z2)
        return complex(self.z1) / complex(self.z2)

    def linear_factor(self) -> list:
        """Coefficients of ``z2_coord*z1 - z1_coord*z2`` vanishing at this point."""
        return [self.z2, -self.z1]

    def __eq__(self, other):
        if not isinstance(other, ProjPoint):
            return NotImplemented
        cross = self.z1 * other.z2 - self.z2 * other.z1
        if all(_is_exact(x) for x in (self.z1, self.z2, other.z1, other.z2)):
            return cross == 0
        scale = max(abs(self.z1), abs(self.z2)) * max(abs(other.z1), abs(other.z2))
        return abs(cross) <= PROJECTIVE_TOL * scale

    def __hash__(self):
        return hash(("ProjPoint",))


@dataclass(frozen=True)
class GroupElement:
    """A 2x2 matrix ``[[a, b], [c, d]]`` with unit determinant.

    Acts on the projective line by ``z -> (a z + b) / (c z + d)``.
    """

    a: Number
    b: Number
    c: Number
    d: Number

    def __post_init__(self):
        det = self.det()
        if self.is_exact:
            if det != 1:
                raise ValueError(f"determinant {det} != 1")
        elif abs(det - 1) > DET_TOL * max(1.0, float(np.abs(self.matrix).max()) ** 2):
            raise ValueError(f"determinant {det} differs from 1 beyond tolerance")

    @classmethod
    def from_matrix(cls, m, normalize: bool = False) -> "GroupElement":
        m = np.asarray(m, dtype=complex)
        if normalize:
            det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
            if abs(det) < 1e-300:
                raise ValueError("singular matrix")
            m = m / cmath.sqrt(det)
        return cls(complex(m[0, 0]), complex(m[0, 1]), complex(m[1, 0]), complex(m[1, 1]))

    @classmethod
    def identity(cls) -> "GroupElement":
        return cls(1, 0, 0, 1)

    @property
    def is_exact(self) -> bool:
        return all(_is_exact(x) for x in (self.a, self.b, self.c, self.d))

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    def det(self):
        return self.a * self.d - self.b * self.c

    def inverse(self) -> "GroupElement":
        return GroupElement(self.d, -self.b, -self.c, self.a)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __neg__(self) -> "GroupElement":
        return GroupElement(-self.a, -self.b, -self.c, -self.d)

    def apply(self, p: ProjPoint) -> ProjPoint:
        return ProjPoint(self.a * p.z1 + self.b * p.z2, self.c * p.z1 + self.d * p.z2)

    def psl_distance(self, other: "GroupElement") -> float:
        """Frobenius distance in PSL(2), minimized over the sign of the lift."""
        m, n = self.matrix, other.matrix
        return float(min(np.linalg.norm(m - n), np.linalg.norm(m + n)))


@dataclass(frozen=True)
class BinaryForm:
    """Homogeneous polynomial ``sum_k c_k z1**(d-k) z2**k``."""

    coefficients: tuple

    def __post_init__(self):
        coeffs = tuple(self.coefficients)
        object.__setattr__(self, "coefficients", coeffs)
        if len(coeffs) == 0:
            raise ValueError("a binary form needs at least one coefficient")
        if all(c == 0 for c in coeffs):
            raise ValueError("the zero form is not allowed")

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def is_exact(self) -> bool:
        return all(_is_exact(c) for c in self.coefficients)

    @classmethod
    def from_roots(cls, roots: Sequence[ProjPoint]) -> "BinaryForm":
        coeffs = [1]
        for p in roots:
            coeffs = _poly_mul(coeffs, p.linear_factor())
        return cls(tuple(coeffs))

    def as_array(self) -> np.ndarray:
        return np.array([complex(c) for c in self.coefficients])

    def __mul__(self, other: "BinaryForm") -> "BinaryForm":
        return BinaryForm(tuple(_poly_mul(self.coefficients, other.coefficients)))

    def scale(self, s) -> "BinaryForm":
        return BinaryForm(tuple(s * c for c in self.coefficients))

    def evaluate(self, z1, z2):
        d = self.degree
        return sum(c * z1 ** (d - k) * z2**k for k, c in enumerate(self.coefficients))

    def dehomogenized(self) -> list:
        """Coefficients of ``f(z, 1)`` in descending powers of ``z``."""
        return list(self.coefficients)

    def normalized(self) -> "BinaryForm":
        """Divide by the coefficient of maximum modulus (first one on ties)."""
        k = max(range(len(self.coefficients)), key=lambda i: (abs(self.coefficients[i]), -i))
        lead = self.coefficients[k]
        if self.is_exact:
            return BinaryForm(tuple(Fraction(c) / Fraction(lead) for c in self.coefficients))
        return BinaryForm(tuple(complex(c) / complex(lead) for c in self.coefficients))

    def max_modulus_normalized(self) -> "BinaryForm":
        """Scale by a positive real so the largest coefficient has modulus 1."""
        m = max(abs(c) for c in self.coefficients)
        if self.is_exact:
            return BinaryForm(tuple(Fraction(c) / Fraction(m) for c in self.coefficients))
        return BinaryForm(tuple(complex(c) / m for c in self.coefficients))

    def roots(self) -> list:
        """Roots as affine values, ``inf`` for the point at infinity, with multiplicity."""
        return form_roots(self)


def projective_distance(f: BinaryForm, g: BinaryForm) -> float:
    """Scale-free distance between the lines spanned by two forms.

    Both forms are divided by their coefficient at the index where ``f`` has
    maximum modulus, then the max-norm of the difference is returned.
    """
    if f.degree != g.degree:
        return math.inf
    a, b = f.as_array(), g.as_array()
    k = int(np.argmax(np.abs(a)))
    if abs(b[k]) <= 1e-300:
        return math.inf
    return float(np.max(np.abs(a / a[k] - b / b[k])))


def projectively_equal(f: BinaryForm, g: BinaryForm, tol: float = PROJECTIVE_TOL) -> bool:
    if f.is_exact and g.is_exact and f.degree == g.degree:
        fa, ga = f.coefficients, g.coefficients
        return all(fa[i] * ga[j] == fa[j] * ga[i] for i in range(len(fa)) for j in range(i + 1, len(fa)))
    return projective_distance(f, g) < tol


def expand_rnc(alpha: ProjPoint) -> BinaryForm:
    """Degree-12 form with the single root ``alpha`` of multiplicity 12."""
    return BinaryForm(tuple(_poly_pow(alpha.linear_factor(), 12)))


def expand_mu(alpha: ProjPoint, beta: ProjPoint) -> BinaryForm:
    """Degree-12 form with roots ``alpha`` (11 times) and ``beta`` (once)."""
    coeffs = _poly_mul(_poly_pow(alpha.linear_factor(), 11), beta.linear_factor())
    return BinaryForm(tuple(coeffs))


def act(g: GroupElement, f: BinaryForm) -> BinaryForm:
    """Return ``f`` composed with the inverse substitution, ``(g.f)(v) = f(g^-1 v)``.

    Roots move by the Moebius map of ``g``.
    """
    g.det()  # validated at construction
    inv = g.inverse()
    # z1 -> inv.a z1 + inv.b z2, z2 -> inv.c z1 + inv.d z2
    l1 = [inv.a, inv.b]
    l2 = [inv.c, inv.d]
    d = f.degree
    exact = g.is_exact and f.is_exact
    if not exact:
        l1 = [complex(x) for x in l1]
        l2 = [complex(x) for x in l2]
    out = [0] * (d + 1)
    pow1 = [_poly_pow(l1, j) for j in range(d + 1)]
    pow2 = [_poly_pow(l2, j) for j in range(d + 1)]
    for k, c in enumerate(f.coefficients):
        if c == 0:
            continue
        term = _poly_mul(pow1[d - k], pow2[k])
        for i, t in enumerate(term):
            out[i] += c * t
    if not exact:
        out = [complex(x) for x in out]
    return BinaryForm(tuple(out))


# --- roots -----------------------------------------------------------------


def _trim(p: list) -> list:
    i = 0
    while i < len(p) - 1 and p[i] == 0:
        i += 1
    return p[i:]


def _poly_divmod_exact(num: list, den: list) -> tuple[list, list]:
    num = [Fraction(x) for x in num]
    den = _trim([Fraction(x) for x in den])
    if len(num) < len(den):
        return [Fraction(0)], num
    q = [Fraction(0)] * (len(num) - len(den) + 1)
    r = list(num)
    for i in range(len(q)):
        coef = r[i] / den[0]
        q[i] = coef
        for j, dj in enumerate(den):
            r[i + j] -= coef * dj
    rem = _trim(r[len(q):]) if len(den) > 1 else [Fraction(0)]
    return q, rem


def _poly_gcd_exact(p: list, q: list) -> list:
    p, q = _trim([Fraction(x) for x in p]), _trim([Fraction(x) for x in q])
    while not (len(q) == 1 and q[0] == 0):
        _, r = _poly_divmod_exact(p, q)
        p, q = q, _trim(r)
    return [x / p[0] for x in p]


def _derivative(p: list) -> list:
    n = len(p) - 1
    if n == 0:
        return [0]
    return [c * (n - i) for i, c in enumerate(p[:-1])]


def _poly_sub(p: list, q: list) -> list:
    n = max(len(p), len(q))
    p = [Fraction(0)] * (n - len(p)) + list(p)
    q = [Fraction(0)] * (n - len(q)) + list(q)
    return _trim([x - y for x, y in zip(p, q)])


def _squarefree_decomposition(p: list) -> list[tuple[list, int]]:
    """Yun's algorithm over the rationals; returns ``[(factor, multiplicity)]``."""
    p = _trim([Fraction(x) for x in p])
    if len(p) == 1:
        return []
    dp = _derivative(p)
    a = _poly_gcd_exact(p, dp)
    b, _ = _poly_divmod_exact(p, a)
    c, _ = _poly_divmod_exact(dp, a)
    d = _poly_sub(c, _derivative(b))
    out = []
    i = 1
    while len(_trim(b)) > 1:
        a = _poly_gcd_exact(b, d)
        b, _ = _poly_divmod_exact(b, a)
        c, _ = _poly_divmod_exact(d, a)
        d = _poly_sub(c, _derivative(b))
        if len(_trim(a)) > 1:
            out.append((a, i))
        i += 1
    return out


def _polish(coeffs: np.ndarray, z: complex, order: int = 0, steps: int = 8) -> complex:
    p = np.poly1d(coeffs)
    for _ in range(order):
        p = p.deriv()
    dp = p.deriv()
    for _ in range(steps):
        d = dp(z)
        if d == 0:
            break
        step = p(z) / d
        z = z - step
        if abs(step) <= 1e-16 * max(1.0, abs(z)):
            break
    return complex(z)


def form_roots(f: BinaryForm, cluster_tol: float = 0.15) -> list:
    """Roots of ``f`` in the affine chart, with multiplicity.

    Exact forms go through a rational square-free decomposition so repeated
    roots come out to full precision.  Floating forms use companion-matrix
    roots; roots closer than ``cluster_tol`` (relative) are merged and the
    cluster centre is refined by Newton on the matching derivative, where it
    is a simple root.  That assumes distinct roots are separated by more than
    ``cluster_tol``.
    """
    coeffs = list(f.coefficients)
    n_inf = 0
    while coeffs and coeffs[0] == 0:
        coeffs.pop(0)
        n_inf += 1
    if not f.is_exact and coeffs:
        scale = max(abs(c) for c in coeffs)
        while abs(coeffs[0]) <= 1e-14 * scale:
            coeffs.pop(0)
            n_inf += 1
    out: list = [complex(math.inf)] * n_inf
    if len(coeffs) <= 1:
        return out
    if f.is_exact:
        for factor, mult in _squarefree_decomposition(coeffs):
            arr = np.array([float(x) for x in factor], dtype=complex)
            for z in np.roots(arr):
                z = _polish(arr, complex(z))
                out.extend([z] * mult)
        return out
    arr = np.array([complex(c) for c in coeffs])
    raw = list(np.roots(arr))
    clusters: list[list[complex]] = []
    for z in raw:
        for cl in clusters:
            centre = sum(cl) / len(cl)
            if abs(z - centre) <= cluster_tol * max(1.0, abs(centre)):
                cl.append(z)
                break
        else:
            clusters.append([z])
    for cl in clusters:
        m = len(cl)
        centre = sum(cl) / m
        out.extend([_polish(arr, centre, order=m - 1)] * m)
    return out


def match_root_multisets(found: Sequence[complex], expected: Sequence[complex]) -> float:
    """Max error of the best matching between two root multisets (greedy)."""
    if len(found) != len(expected):
        return math.inf
    remaining = list(expected)
    worst = 0.0
    for z in found:
        def err(w):
            if cmath.isinf(z) or cmath.isinf(w):
                return 0.0 if (cmath.isinf(z) and cmath.isinf(w)) else math.inf
            return abs(z - w)
        j = min(range(len(remaining)), key=lambda i: err(remaining[i]))
        worst = max(worst, err(remaining[j]))
        remaining.pop(j)
    return worst


# --- icosahedral group and invariant ----------------------------------------

_EPS = cmath.exp(2j * math.pi / 5)


def _klein_generators() -> tuple[GroupElement, GroupElement]:
    """Order-5 rotation ``z -> eps z`` and order-2 rotation preserving the vertex set."""
    s = GroupElement(_EPS**3, 0, 0, _EPS**2)
    r5 = math.sqrt(5)
    t = GroupElement(
        -(_EPS - _EPS**4) / r5,
        (_EPS**2 - _EPS**3) / r5,
        (_EPS**2 - _EPS**3) / r5,
        (_EPS - _EPS**4) / r5,
    )
    return s, t


def _canonical_sign(g: GroupElement) -> GroupElement:
    for x in (g.a, g.b, g.c, g.d):
        x = complex(x)
        if abs(x) > 1e-9:
            if x.real < -1e-9 or (abs(x.real) <= 1e-9 and x.imag < 0):
                return -g
            return g
    return g


def _key(g: GroupElement) -> tuple:
    return tuple(round(v, 7) + 0.0 for x in (g.a, g.b, g.c, g.d) for v in (complex(x).real, complex(x).imag))


def psl_closure(generators: Sequence[GroupElement], limit: int = 10_000) -> list[GroupElement]:
    """All products of the generators, one canonical SL(2) lift per PSL(2) element."""
    ident = _canonical_sign(GroupElement.identity())
    seen = {_key(ident): ident}
    frontier = [ident]
    gens = [_canonical_sign(g) for g in generators]
    while frontier:
        nxt = []
        for h in frontier:
            for g in gens:
                p = _canonical_sign(GroupElement.from_matrix((g @ h).matrix, normalize=True))
                k = _key(p)
                if k not in seen:
                    seen[k] = p
                    nxt.append(p)
                    if len(seen) > limit:
                        raise RuntimeError("closure exceeded limit; generators do not span a finite group")
        frontier = nxt
    return sorted(seen.values(), key=lambda g: (psl_order(g), _key(g)))


def psl_order(g: GroupElement, max_order: int = 120) -> int:
    """Smallest ``n`` with ``g**n = +-1``."""
    ident = np.eye(2)
    m = g.matrix
    p = np.eye(2, dtype=complex)
    for n in range(1, max_order + 1):
        p = p @ m
        if min(np.abs(p - ident).max(), np.abs(p + ident).max()) < 1e-8:
            return n
    raise ValueError("element has no finite order below the search bound")


def icosahedral_group() -> list[GroupElement]:
    """The 60 SU(2) lifts of the rotation group of the icosahedron, identity first."""
    return psl_closure(_klein_generators())


def commutator_closure(group: Sequence[GroupElement]) -> list[GroupElement]:
    """Subgroup generated by all commutators ``g h g^-1 h^-1``."""
    comms = {}
    for g in group:
        for h in group:
            c = _canonical_sign(g @ h @ g.inverse() @ h.inverse())
            comms.setdefault(_key(c), c)
    return psl_closure(list(comms.values()))


def icosahedral_form() -> BinaryForm:
    """``z1 z2 (z1^10 + 11 z1^5 z2^5 - z2^10)`` scaled so the largest coefficient is 1."""
    coeffs = [0] * 13
    coeffs[1] = 1
    coeffs[6] = 11
    coeffs[11] = -1
    return BinaryForm(tuple(coeffs)).max_modulus_normalized()


def random_sl2(rng: np.random.Generator, scale: float = 1.0) -> GroupElement:
    m = rng.normal(scale=scale, size=(2, 2)) + 1j * rng.normal(scale=scale, size=(2, 2))
    return GroupElement.from_matrix(m, normalize=True)


def random_projpoint(rng: np.random.Generator) -> ProjPoint:
    return ProjPoint(complex(rng.normal(), rng.normal()), 1)


def stabilizer_probe(f: BinaryForm, trials: int, seed: int = 0, min_separation: float = 0.1) -> dict:
    """Evidence that the stabilizer of ``f`` is the icosahedral group.

    Every group element must fix ``f`` exactly (not merely projectively);
    ``trials`` random SL(2, C) elements at PSL distance above
    ``min_separation`` from the group must move ``f`` projectively.
    """
    gamma = icosahedral_group()
    fixed = 0
    worst_fix = 0.0
    base = f.as_array()
    for g in gamma:
        err = float(np.max(np.abs(act(g, f).as_array() - base)))
        worst_fix = max(worst_fix, err)
        fixed += err < 1e-10
    rng = np.random.default_rng(seed)
    moved = 0
    tested = 0
    min_move = math.inf
    while tested < trials:
        g = random_sl2(rng)
        if min(g.psl_distance(h) for h in gamma) <= min_separation:
            continue
        tested += 1
        dist = projective_distance(f, act(g, f))
        min_move = min(min_move, dist)
        moved += dist > 1e-6
    minus_one = act(GroupElement(-1, 0, 0, -1), f)
    return {
        "group_order": len(gamma),
        "fixed": fixed,
        "worst_fix_error": worst_fix,
        "trials": trials,
        "moved": moved,
        "min_move": min_move if trials else None,
        "minus_identity_fixes": minus_one == f,
        "pass": fixed == len(gamma) and moved == trials and minus_one == f,
    }
