"""Dyadic integrability of ``|f|^(-2 beta)`` for quasi-homogeneous ``f``.

For ``f(lam^w1 z1, ..., lam^wn zn) = lam^d f(z)`` the substitution
``z_i -> 2^(-w_i) z_i`` maps the dyadic region of index ``r`` onto index
``r + 1`` and multiplies ``|f|^(-2 beta) dV`` by ``2^(2 d beta - 2 sum w)``.
The integrals over successive regions are therefore geometric and the sum is
finite exactly when ``beta < sum(w) / d``.

Two region families are provided:

``product``
    ``2^(-w_i (r+1)) <= |z_i| <= 2^(-w_i r)`` for every ``i`` at once.  These
    regions scale correctly but do *not* cover the punctured polydisc (a
    point with ``|z|`` large and ``|w|`` tiny lies in none of them).
``shell``
    ``2^(-(r+1)) < max_i |z_i|^(1/w_i) <= 2^(-r)``.  Same scaling, and the
    shells partition the punctured unit polydisc.

Monte Carlo uses log-uniform radii and uniform angles.  When the zero set of
``f`` meets the region, ``|f|^(-2 beta)`` has infinite variance for
``beta >= 1/2`` under that measure alone, so a defensive mixture component
draws the first variable from a ``|z1 - root|^(-2 gamma)`` kernel around the
roots of ``f`` in ``z1``.  The estimator stays unbiased; its variance is
finite for every ``beta < 1``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

LN2 = math.log(2.0)
CHUNK = 1 << 17
MIXTURE_WEIGHT = 0.5
MAX_KERNEL_EXPONENT = 0.98
ZERO_FLOOR = 1e-300
DIVERGENCE_EPS = 0.02


class BudgetExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class QuasiHomogSpec:
    """A quasi-homogeneous polynomial with its weights and weighted degree.

    ``evaluator`` maps an ``(N, n)`` complex array to ``N`` values.
    ``first_roots``, when given, maps the remaining ``(N, n-1)`` variables to
    the ``(N, k)`` roots of ``f`` in the first variable; it enables the
    zero-set importance component.
    """

    name: str
    weights: tuple[int, ...]
    degree: int
    evaluator: Callable[[np.ndarray], np.ndarray] = field(compare=False)
    first_roots: Callable[[np.ndarray], np.ndarray] | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.weights or any(w <= 0 for w in self.weights):
            raise ValueError("weights must be positive integers")
        if self.degree <= 0:
            raise ValueError("degree must be positive")

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def zero_set_meets_regions(self) -> bool:
        return self.first_roots is not None

    def __call__(self, z: np.ndarray) -> np.ndarray:
        return self.evaluator(np.atleast_2d(z))

    def to_json(self) -> dict:
        return {"name": self.name, "weights": list(self.weights), "degree": self.degree}


def cusp_spec(a: int = 2, b: int = 3) -> QuasiHomogSpec:
    """``z^a - w^b`` with weights ``(L/a, L/b)``, ``L = lcm(a, b)``."""
    d = math.lcm(a, b)

    def f(z):
        return z[:, 0] ** a - z[:, 1] ** b

    def roots(rest):
        c = rest[:, 0] ** b
        mag = np.abs(c) ** (1.0 / a)
        ang = np.angle(c) / a
        ks = np.arange(a)
        return mag[:, None] * np.exp(1j * (ang[:, None] + 2 * math.pi * ks[None, :] / a))

    return QuasiHomogSpec(f"z^{a}-w^{b}", (d // a, d // b), d, f, roots)


def brieskorn_spec(weights: Sequence[int], degree: int) -> QuasiHomogSpec:
    """``z1^a1 - z2^a2 - ... - zn^an`` with ``ai = degree / wi``; each weight must divide the degree."""
    weights = tuple(int(w) for w in weights)
    if len(weights) < 2:
        raise ValueError("need at least two weights")
    if any(w <= 0 or degree % w for w in weights):
        raise ValueError(f"every weight must be a positive divisor of the degree {degree}")
    exps = [degree // w for w in weights]

    def f(z):
        return z[:, 0] ** exps[0] - sum(z[:, i] ** e for i, e in enumerate(exps) if i)

    def roots(rest):
        c = sum(rest[:, i - 1] ** e for i, e in enumerate(exps) if i)
        a = exps[0]
        ks = np.arange(a)
        return (np.abs(c) ** (1.0 / a))[:, None] * np.exp(1j * (np.angle(c)[:, None] + 2 * math.pi * ks) / a)

    name = "z1^%d" % exps[0] + "".join(f"-z{i + 1}^{e}" for i, e in enumerate(exps) if i)
    return QuasiHomogSpec(name, weights, degree, f, roots)


def monomial_spec(p: int) -> QuasiHomogSpec:
    """``z1 z2 ... zp``; extra ambient variables factor out of the local integral."""

    def f(z):
        return np.prod(z[:, :p], axis=1)

    return QuasiHomogSpec(f"z1...z{p}", (1,) * p, p, f)


def preset(name: str) -> QuasiHomogSpec:
    """``cusp23``, ``cusp25`` or ``monomial:p,n``."""
    if name == "cusp23":
        return cusp_spec(2, 3)
    if name == "cusp25":
        return cusp_spec(2, 5)
    if name.startswith("monomial:"):
        try:
            p, n = (int(x) for x in name.split(":", 1)[1].split(","))
        except ValueError:
            raise ValueError(f"bad monomial preset {name!r}; expected monomial:p,n") from None
        if not 1 <= p <= n:
            raise ValueError("monomial preset needs 1 <= p <= n")
        return monomial_spec(p)
    raise ValueError(f"unknown preset {name!r}")


def quasi_homogeneity_error(spec: QuasiHomogSpec, beta: float = 0.5, samples: int = 10_000,
                            seed: int = 0, lam: float = 0.5) -> float:
    """Max relative error of ``|f(lam^w z)|^(-2b) = lam^(-2 d b) |f(z)|^(-2b)``."""
    rng = np.random.default_rng(seed)
    z = rng.normal(size=(samples, spec.n)) + 1j * rng.normal(size=(samples, spec.n))
    scale = lam ** np.asarray(spec.weights, dtype=float)
    lhs = np.abs(spec(z * scale)) ** (-2 * beta)
    rhs = lam ** (-2 * spec.degree * beta) * np.abs(spec(z)) ** (-2 * beta)
    return float(np.max(np.abs(lhs - rhs) / np.abs(rhs)))


def scaling_exponent(spec: QuasiHomogSpec, beta):
    """``e`` with ``I_{r+1} = 2^e I_r``: ``2 d beta - 2 sum(w)``."""
    return 2 * spec.degree * beta - 2 * sum(spec.weights)


def predicted_threshold(spec: QuasiHomogSpec) -> Fraction:
    return Fraction(sum(spec.weights), spec.degree)


# --- regions ----------------------------------------------------------------


@dataclass(frozen=True)
class AnnulusSpec:
    """Dyadic region of index ``r`` for the given weights."""

    r: int
    weights: tuple[int, ...]
    kind: str = "product"

    def __post_init__(self):
        if self.r < 0:
            raise ValueError("annulus index must be nonnegative")
        if self.kind not in ("product", "shell"):
            raise ValueError(f"unknown region kind {self.kind!r}")

    @property
    def bounds(self) -> list[tuple[float, float]]:
        return [(2.0 ** (-w * (self.r + 1)), 2.0 ** (-w * self.r)) for w in self.weights]

    def contains(self, z: np.ndarray) -> np.ndarray:
        a = np.abs(np.atleast_2d(z))
        if self.kind == "product":
            ok = np.ones(a.shape[0], dtype=bool)
            for i, (lo, hi) in enumerate(self.bounds):
                ok &= (a[:, i] >= lo) & (a[:, i] <= hi)
            return ok
        rho = quasi_norm(a, self.weights)
        return (rho > 2.0 ** (-(self.r + 1))) & (rho <= 2.0 ** (-self.r))

    def volume(self) -> float:
        """Lebesgue volume; the ``beta = 0`` integral."""
        if self.kind == "product":
            return float(np.prod([math.pi * (hi**2 - lo**2) for lo, hi in self.bounds]))
        full = math.pi ** len(self.weights) * 2.0 ** (-2 * sum(self.weights) * self.r)
        return full * (1 - 2.0 ** (-2 * sum(self.weights)))


def quasi_norm(absz: np.ndarray, weights: Sequence[int]) -> np.ndarray:
    w = np.asarray(weights, dtype=float)
    return np.max(absz ** (1.0 / w), axis=-1)


def annulus_index(z: np.ndarray, weights: Sequence[int]) -> np.ndarray:
    """Shell index of each point of the punctured unit polydisc."""
    rho = quasi_norm(np.abs(np.atleast_2d(z)), weights)
    idx = np.floor(-np.log2(rho)).astype(int)
    # boundary rho = 2^-r belongs to shell r
    idx = np.where(2.0 ** (-idx.astype(float)) < rho, idx - 1, idx)
    idx = np.where(2.0 ** (-(idx + 1).astype(float)) >= rho, idx + 1, idx)
    return idx


class _Sampler:
    """Mixture proposal over one region; all densities w.r.t. Lebesgue measure."""

    def __init__(self, spec: QuasiHomogSpec, region: AnnulusSpec, beta: float):
        self.spec = spec
        self.region = region
        self.lo = np.array([b[0] for b in region.bounds])
        self.hi = np.array([b[1] for b in region.bounds])
        self.w = np.asarray(spec.weights, dtype=float)
        self.gamma = min(max(beta, 0.0), MAX_KERNEL_EXPONENT)
        self.lam = MIXTURE_WEIGHT if spec.first_roots is not None else 0.0

    # log-uniform annulus in one variable
    def _ann_draw(self, rng, i, n):
        t = rng.random(n)
        rad = self.hi[i] * 2.0 ** (-self.w[i] * t)
        return rad * np.exp(2j * math.pi * rng.random(n))

    def _ann_logpdf(self, i, z):
        a = np.abs(z)
        inside = (a >= self.lo[i]) & (a <= self.hi[i])
        with np.errstate(divide="ignore"):
            lp = -np.log(2 * math.pi * self.w[i] * LN2) - 2 * np.log(a)
        return np.where(inside, lp, -np.inf)

    def _disc_draw(self, rng, i, n):
        rad = self.hi[i] * np.sqrt(rng.random(n))
        return rad * np.exp(2j * math.pi * rng.random(n))

    def _disc_logpdf(self, i, z):
        inside = np.abs(z) <= self.hi[i]
        return np.where(inside, -math.log(math.pi * self.hi[i] ** 2), -np.inf)

    def base_draw(self, rng, n):
        k = self.spec.n
        z = np.empty((n, k), dtype=complex)
        if self.region.kind == "product":
            for i in range(k):
                z[:, i] = self._ann_draw(rng, i, n)
            return z
        dom = rng.integers(0, k, size=n)
        for i in range(k):
            z[:, i] = np.where(dom == i, self._ann_draw(rng, i, n), self._disc_draw(rng, i, n))
        return z

    def base_logpdf(self, z, skip_first=False):
        k = self.spec.n
        start = 1 if skip_first else 0
        if self.region.kind == "product":
            return sum(self._ann_logpdf(i, z[:, i]) for i in range(start, k))
        comps = []
        for j in range(k):
            if skip_first and j == 0:
                # marginal of the j = 0 component over z1 is the product of discs
                comps.append(sum(self._disc_logpdf(i, z[:, i]) for i in range(1, k)))
                continue
            comps.append(sum((self._ann_logpdf(i, z[:, i]) if i == j else self._disc_logpdf(i, z[:, i]))
                             for i in range(start, k)))
        return np.logaddexp.reduce(np.stack(comps), axis=0) - math.log(k)

    def _kernel_radius(self, roots):
        k = roots.shape[1]
        if k >= 2:
            diff = np.abs(roots[:, :, None] - roots[:, None, :])
            diff[:, np.arange(k), np.arange(k)] = np.inf
            return 0.4 * diff.min(axis=(1, 2))
        return 0.5 * self.hi[0] * np.ones(roots.shape[0])

    def kernel_logpdf(self, z):
        roots = self.spec.first_roots(z[:, 1:])
        rho = self._kernel_radius(roots)
        g = self.gamma
        x = np.abs(z[:, :1] - roots)
        with np.errstate(divide="ignore"):
            lp = (math.log(1 - g) - math.log(math.pi) - (2 - 2 * g) * np.log(rho)[:, None]
                  - 2 * g * np.log(x))
        lp = np.where(x < rho[:, None], lp, -np.inf)
        return np.logaddexp.reduce(lp, axis=1) - math.log(roots.shape[1])

    def kernel_draw(self, rng, n):
        z = self.base_draw(rng, n)
        roots = self.spec.first_roots(z[:, 1:])
        rho = self._kernel_radius(roots)
        pick = rng.integers(0, roots.shape[1], size=n)
        centre = roots[np.arange(n), pick]
        rad = rho * rng.random(n) ** (1.0 / (2 - 2 * self.gamma))
        z[:, 0] = centre + rad * np.exp(2j * math.pi * rng.random(n))
        return z

    def draw(self, rng, n):
        if self.lam == 0.0:
            return self.base_draw(rng, n)
        use_kernel = rng.random(n) < self.lam
        z = self.base_draw(rng, n)
        zk = self.kernel_draw(rng, n)
        z[use_kernel] = zk[use_kernel]
        return z

    def logpdf(self, z):
        lb = self.base_logpdf(z)
        if self.lam == 0.0:
            return lb
        lk = self.base_logpdf(z, skip_first=True) + self.kernel_logpdf(z)
        return np.logaddexp(math.log(1 - self.lam) + lb, math.log(self.lam) + lk)


@dataclass(frozen=True)
class IntegralEstimate:
    mean: float
    stderr: float
    samples: int
    beta: float
    r: int
    kind: str = "product"
    resampled: int = 0

    @property
    def finite(self) -> bool:
        return math.isfinite(self.mean) and math.isfinite(self.stderr)

    def to_json(self) -> dict:
        return {k: v for k, v in asdict(self).items()}


def _stream(seed: int, r: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed & (2**64 - 1), r])))


def annulus_integral(spec: QuasiHomogSpec, beta: float, r: int, samples: int = 100_000,
                     seed: int = 0, kind: str = "product") -> IntegralEstimate:
    """Unbiased Monte Carlo estimate of the integral of ``|f|^(-2 beta)`` over region ``r``."""
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    region = AnnulusSpec(r, spec.weights, kind)
    sampler = _Sampler(spec, region, beta)
    rng = _stream(seed, r)
    total = 0.0
    total_sq = 0.0
    resampled = 0
    overflow = False
    done = 0
    while done < samples:
        n = min(CHUNK, samples - done)
        z = sampler.draw(rng, n)
        fz = np.abs(spec(z))
        bad = fz < ZERO_FLOOR
        while bad.any():
            resampled += int(bad.sum())
            z[bad] = sampler.draw(rng, int(bad.sum()))
            fz = np.abs(spec(z))
            bad = fz < ZERO_FLOOR
        inside = region.contains(z)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            logv = -2 * beta * np.log(fz) - sampler.logpdf(z)
            vals = np.where(inside, np.exp(logv), 0.0)
        if not np.all(np.isfinite(vals)):
            overflow = True
            break
        total += float(vals.sum())
        total_sq += float(np.dot(vals, vals))
        done += n
    if overflow:
        return IntegralEstimate(math.inf, math.inf, done, beta, r, kind, resampled)
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    return IntegralEstimate(mean, math.sqrt(var / (samples - 1)), samples, beta, r, kind, resampled)


def ratio_zscore(i0: IntegralEstimate, i1: IntegralEstimate, expected_ratio: float) -> float:
    """``|I1 - rho I0|`` in units of its combined standard error."""
    se = math.hypot(i1.stderr, expected_ratio * i0.stderr)
    diff = abs(i1.mean - expected_ratio * i0.mean)
    if se == 0:
        return 0.0 if diff <= 1e-12 * abs(i1.mean) else math.inf
    return diff / se


@dataclass
class PartialSums:
    beta: float
    annuli: list[IntegralEstimate]
    partial: list[float]
    ratios: list[float]
    ratio: float
    converged: bool
    tail_bound: float | None
    total: float | None
    divergence_evidence: bool

    def to_json(self) -> dict:
        return {
            "beta": self.beta,
            "annuli": [a.to_json() for a in self.annuli],
            "partial_sums": self.partial,
            "ratios": self.ratios,
            "ratio_observed": self.ratio,
            "converged": self.converged,
            "tail_bound": self.tail_bound,
            "total": self.total,
            "divergence_evidence": self.divergence_evidence,
        }


def partial_sums(spec: QuasiHomogSpec, beta: float, R: int = 4, samples: int = 100_000, seed: int = 0,
                 kind: str = "product", eps: float = DIVERGENCE_EPS) -> PartialSums:
    """Partial sums over regions ``0 .. R-1`` with a geometric tail bound.

    The observed ratio is the geometric mean of successive ratios.  Below
    ``1 - eps`` the tail ``I_{R-1} rho / (1 - rho)`` is added.  Otherwise
    divergence evidence is reported when at least three consecutive ratios
    sit at or above ``1 - eps``; Monte Carlo cannot prove divergence.
    """
    if R < 2:
        raise ValueError("need at least two regions")
    annuli = [annulus_integral(spec, beta, r, samples, seed, kind) for r in range(R)]
    means = [a.mean for a in annuli]
    partial = list(np.cumsum(means).tolist())
    ratios = [b / a if a > 0 else math.inf for a, b in zip(means, means[1:])]
    if all(math.isfinite(x) and x > 0 for x in ratios):
        rho = float(np.exp(np.mean(np.log(ratios))))
    else:
        rho = math.inf
    converged = rho < 1 - eps
    tail = means[-1] * rho / (1 - rho) if converged else None
    run = best = 0
    for x in ratios:
        run = run + 1 if x >= 1 - eps else 0
        best = max(best, run)
    return PartialSums(beta, annuli, partial, ratios, rho, converged, tail,
                       partial[-1] + tail if converged else None, (not converged) and best >= 3)


def monomial_integral(p: int, n: int, beta: float) -> float:
    """Integral of ``|z1...zp|^(-2 beta)`` over the unit polydisc in ``C^n``; ``inf`` if divergent."""
    if not 1 <= p <= n:
        raise ValueError("need 1 <= p <= n")
    if beta >= 1:
        return math.inf
    return (2 * math.pi / (2 - 2 * beta)) ** p * math.pi ** (n - p)


@dataclass
class ThresholdEstimate:
    beta_hat: float
    bracket: tuple[float, float]
    evaluations: list[tuple[float, float]]
    samples_used: int

    def to_json(self) -> dict:
        return {"threshold_estimated": self.beta_hat, "bracket": list(self.bracket),
                "evaluations": [{"beta": b, "ratio": r} for b, r in self.evaluations],
                "samples_used": self.samples_used}


def measured_ratio(spec: QuasiHomogSpec, beta: float, samples: int, seed: int = 0,
                   kind: str = "product") -> float:
    """``I_1 / I_0``; ``inf`` where the region integrals themselves diverge."""
    if spec.zero_set_meets_regions and beta >= 1:
        # |f|^(-2 beta) is not locally integrable at smooth points of {f = 0}
        return math.inf
    i0 = annulus_integral(spec, beta, 0, samples, seed, kind)
    i1 = annulus_integral(spec, beta, 1, samples, seed, kind)
    if not (i0.finite and i1.finite) or i0.mean <= 0:
        return math.inf
    return i1.mean / i0.mean


def estimate_threshold(spec: QuasiHomogSpec, tol: float = 0.005, budget: int = 50_000_000,
                       samples: int = 1_000_000, seed: int = 0, bracket=(0.0, 1.5),
                       kind: str = "product") -> ThresholdEstimate:
    """Bisect ``beta`` until the measured ratio ``I_1 / I_0`` brackets 1 within ``tol``."""
    if tol < 0.005:
        raise ValueError("tol below 0.005 is not resolvable by the ratio estimator")
    lo, hi = bracket
    used = 0
    evals: list[tuple[float, float]] = []

    def ratio(b):
        nonlocal used
        if used + 2 * samples > budget:
            raise BudgetExhausted(f"sample budget {budget} exhausted after {used} samples")
        rho = measured_ratio(spec, b, samples, seed, kind)
        if math.isfinite(rho) or not (spec.zero_set_meets_regions and b >= 1):
            used += 2 * samples
        evals.append((b, rho))
        return rho

    if ratio(lo) >= 1:
        raise BudgetExhausted("lower end of the bracket is already divergent")
    if ratio(hi) < 1:
        raise BudgetExhausted("upper end of the bracket still converges; widen the bracket")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ratio(mid) < 1:
            lo = mid
        else:
            hi = mid
    return ThresholdEstimate(0.5 * (lo + hi), (lo, hi), evals, used)


def lct_report(spec: QuasiHomogSpec, beta: float | None, sums: PartialSums | None = None,
               threshold: ThresholdEstimate | None = None) -> dict:
    out = {
        "spec": spec.to_json(),
        "beta": beta,
        "exponent_expected": None if beta is None else float(scaling_exponent(spec, beta)),
        "threshold_predicted": float(predicted_threshold(spec)),
        "threshold_predicted_exact": str(predicted_threshold(spec)),
        "annuli": [],
        "ratio_observed": None,
        "threshold_estimated": None,
    }
    if sums is not None:
        out["annuli"] = [{"r": a.r, "mean": a.mean, "stderr": a.stderr, "samples": a.samples}
                         for a in sums.annuli]
        out["ratio_observed"] = sums.ratio
        out["partial_sums"] = sums.to_json()
    if threshold is not None:
        out["threshold_estimated"] = threshold.beta_hat
        out["threshold_search"] = threshold.to_json()
    return out
