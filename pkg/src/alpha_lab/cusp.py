"""Truncated bivariate power series over Q and the cusp of the tangent surface.

Near a point of the rational normal curve, the map ``(alpha, beta) ->
(z - alpha)^11 (z - beta)`` is written in affine coordinates and expanded as
exact series.  Eliminating ``beta`` through the first coordinate and slicing
transversally exposes the plane cusp ``X^3 = Y^2``.

Chart convention: coordinate ``k`` (``k = 1..12``) is ``(-1)**k`` times the
coefficient of ``z**(12-k)``, i.e. the elementary symmetric polynomial
``e_k`` of the root multiset.  With it the first coordinate is
``11*alpha + beta`` and every sign matches the positive binomials ``c_k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

DEFAULT_ORDER = 6
MIN_ORDER = 3


class SeriesError(ValueError):
    pass


@dataclass(frozen=True)
class BivariateSeries:
    """``sum c[i, j] x^i y^j`` with ``i + j <= order``; exact rational coefficients."""

    order: int
    coeffs: Mapping[tuple[int, int], Fraction] = field(default_factory=dict)
    names: tuple[str, str] = ("alpha", "beta")

    def __post_init__(self):
        if self.order < 0:
            raise SeriesError("truncation order must be nonnegative")
        clean = {}
        for (i, j), c in self.coeffs.items():
            if i < 0 or j < 0:
                raise SeriesError(f"negative exponent {(i, j)}")
            c = Fraction(c)
            if c != 0 and i + j <= self.order:
                clean[(i, j)] = c
        object.__setattr__(self, "coeffs", clean)

    @classmethod
    def constant(cls, c, order: int, names=("alpha", "beta")) -> "BivariateSeries":
        return cls(order, {(0, 0): Fraction(c)}, names)

    @classmethod
    def var(cls, index: int, order: int, names=("alpha", "beta")) -> "BivariateSeries":
        return cls(order, {(1, 0) if index == 0 else (0, 1): Fraction(1)}, names)

    def _check(self, other: "BivariateSeries") -> int:
        if self.names != other.names:
            raise SeriesError(f"variable mismatch {self.names} vs {other.names}")
        return min(self.order, other.order)

    def _lift(self, other) -> "BivariateSeries":
        if isinstance(other, BivariateSeries):
            return other
        return BivariateSeries.constant(other, self.order, self.names)

    def __add__(self, other):
        other = self._lift(other)
        n = self._check(other)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out.get(k, 0) + c
        return BivariateSeries(n, out, self.names)

    __radd__ = __add__

    def __neg__(self):
        return BivariateSeries(self.order, {k: -c for k, c in self.coeffs.items()}, self.names)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, BivariateSeries):
            other = Fraction(other)
            return BivariateSeries(self.order, {k: c * other for k, c in self.coeffs.items()}, self.names)
        n = self._check(other)
        out: dict[tuple[int, int], Fraction] = {}
        for (i1, j1), a in self.coeffs.items():
            for (i2, j2), b in other.coeffs.items():
                if i1 + i2 + j1 + j2 <= n:
                    key = (i1 + i2, j1 + j2)
                    out[key] = out.get(key, 0) + a * b
        return BivariateSeries(n, out, self.names)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = BivariateSeries.constant(1, self.order, self.names)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, BivariateSeries):
            return NotImplemented
        return self.order == other.order and self.names == other.names and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.order, self.names, tuple(sorted(self.coeffs.items()))))

    def __getitem__(self, key: tuple[int, int]) -> Fraction:
        return self.coeffs.get(key, Fraction(0))

    def truncate(self, order: int) -> "BivariateSeries":
        return BivariateSeries(min(order, self.order), self.coeffs, self.names)

    def rename(self, names: tuple[str, str]) -> "BivariateSeries":
        return BivariateSeries(self.order, self.coeffs, names)

    def substitute(self, x: "BivariateSeries", y: "BivariateSeries") -> "BivariateSeries":
        """Compose: replace the first variable by ``x`` and the second by ``y``.

        ``x`` and ``y`` must have no constant term, so truncation commutes
        with composition.
        """
        if x[(0, 0)] != 0 or y[(0, 0)] != 0:
            raise SeriesError("substituted series must vanish at the origin")
        n = min(self.order, x.order, y.order)
        xp = [BivariateSeries.constant(1, n, x.names)]
        yp = [BivariateSeries.constant(1, n, x.names)]
        for _ in range(n):
            xp.append(xp[-1] * x.truncate(n))
            yp.append(yp[-1] * y.truncate(n).rename(x.names))
        out = BivariateSeries(n, {}, x.names)
        for (i, j), c in self.coeffs.items():
            if i + j <= n:
                out = out + xp[i] * yp[j] * c
        return out

    def is_zero(self) -> bool:
        return not self.coeffs

    def univariate(self, var: int = 0) -> dict[int, Fraction]:
        """Terms that involve only the chosen variable, keyed by exponent."""
        if var == 0:
            return {i: c for (i, j), c in self.coeffs.items() if j == 0}
        return {j: c for (i, j), c in self.coeffs.items() if i == 0}

    def evaluate(self, x, y):
        return sum(c * x**i * y**j for (i, j), c in self.coeffs.items())

    def __repr__(self):
        if not self.coeffs:
            return f"O({self.order + 1})"
        a, b = self.names
        terms = []
        for (i, j), c in sorted(self.coeffs.items(), key=lambda kv: (sum(kv[0]), -kv[0][0])):
            mono = "*".join(p for p in (f"{a}^{i}" if i else "", f"{b}^{j}" if j else "") if p)
            terms.append(f"{c}*{mono}" if mono else f"{c}")
        return " + ".join(terms) + f" + O({self.order + 1})"


def mu_local_chart(order: int = DEFAULT_ORDER) -> list[BivariateSeries]:
    """The 12 affine coordinates of ``(z - alpha)^11 (z - beta)`` near ``(0, 0)``.

    Computed by multiplying out the polynomial in ``z`` with series
    coefficients, then applying the ``e_k`` sign convention.
    """
    if order < MIN_ORDER:
        raise SeriesError(f"truncation order {order} < {MIN_ORDER} cannot resolve the cusp")
    alpha = BivariateSeries.var(0, order)
    beta = BivariateSeries.var(1, order)
    one = BivariateSeries.constant(1, order)
    poly = [one]  # descending powers of z
    for root in [alpha] * 11 + [beta]:
        nxt = poly + [BivariateSeries(order)]
        for k in range(1, len(nxt)):
            nxt[k] = nxt[k] - poly[k - 1] * root
        poly = nxt
    return [poly[k] * (-1) ** k for k in range(1, 13)]


def _invert_first(first: BivariateSeries) -> BivariateSeries:
    """Solve ``first(alpha, beta) = u`` for ``beta`` as a series in ``(u, alpha)``."""
    b = first[(0, 1)]
    if b == 0:
        raise SeriesError("first coordinate has no linear beta term; substitution not invertible")
    n = first.order
    names = ("u", "alpha")
    u = BivariateSeries.var(0, n, names)
    a = BivariateSeries.var(1, n, names)
    rest = first - BivariateSeries(n, {(0, 1): b})
    beta = u * (1 / b)
    for _ in range(n + 1):
        beta = (u - rest.substitute(a, beta)) * (1 / b)
    if first.substitute(a, beta) != u.truncate(beta.order):
        raise SeriesError("substitution not invertible at this truncation order")
    return beta


def substitute_u(chart: Sequence[BivariateSeries]) -> list[BivariateSeries]:
    """Rewrite the chart in ``(u, alpha)`` where ``u`` is the first coordinate.

    ``beta`` is eliminated by inverting the first coordinate.  The first
    output series is exactly ``u``.
    """
    if not chart:
        raise SeriesError("empty chart")
    beta = _invert_first(chart[0])
    a = BivariateSeries.var(1, beta.order, ("u", "alpha"))
    return [s.substitute(a, beta) for s in chart]


@dataclass(frozen=True)
class SliceOrders:
    """Orders and leading coefficients of the transverse slice ``u = 0``.

    Unpacks as ``(order2, order3, lead2, lead3)``.  ``x_series`` and
    ``y_series`` are the slice coordinates realising those orders, as
    ``{exponent: coefficient}`` maps valid below ``valid_below``.
    """

    order2: int
    order3: int
    lead2: Fraction
    lead3: Fraction
    x_series: Mapping[int, Fraction]
    y_series: Mapping[int, Fraction]
    valid_below: int

    def __iter__(self) -> Iterator:
        return iter((self.order2, self.order3, self.lead2, self.lead3))


def _order(series: Mapping[int, Fraction]) -> int | None:
    nz = [k for k, c in series.items() if c != 0]
    return min(nz) if nz else None


def slice_orders(chart_u: Sequence[BivariateSeries]) -> SliceOrders:
    """Set ``u = 0`` and read off the first two orders of the slice curve.

    The smallest order over all coordinates is ``order2``; the coordinate
    realising it is the first such one.  Every other coordinate is reduced
    against it to cancel that term, and the smallest remaining order gives
    ``order3``.  The pair is therefore unchanged by linear coordinate changes.
    """
    if not chart_u:
        raise SeriesError("empty chart")
    n = min(s.order for s in chart_u)
    slices = [{k: c for k, c in s.univariate(var=1).items() if k <= n} for s in chart_u]
    orders = [_order(s) for s in slices]
    present = [(o, i) for i, o in enumerate(orders) if o is not None]
    if not present:
        raise SeriesError("all coordinates vanish to truncation order")
    o2, i2 = min(present)
    x = slices[i2]
    lead2 = x[o2]
    best = None
    for i, s in enumerate(slices):
        if i == i2 or orders[i] is None:
            continue
        t = s.get(o2, Fraction(0)) / lead2
        red = {k: s.get(k, 0) - t * x.get(k, 0) for k in set(s) | set(x)}
        red = {k: c for k, c in red.items() if c != 0}
        o = _order(red)
        if o is not None and (best is None or o < best[0]):
            best = (o, red)
    if best is None:
        raise SeriesError("slice curve spans a single direction to truncation order")
    o3, y = best
    return SliceOrders(o2, o3, lead2, y[o3], x, y, n + 1)


def _mul_trunc(p: Mapping[int, Fraction], q: Mapping[int, Fraction], below: int) -> dict[int, Fraction]:
    out: dict[int, Fraction] = {}
    for i, a in p.items():
        for j, b in q.items():
            if i + j < below:
                out[i + j] = out.get(i + j, 0) + a * b
    return {k: c for k, c in out.items() if c != 0}


def cusp_normal_form_check(orders: SliceOrders) -> dict:
    """Certify that the slice curve is a standard cusp ``X^3 = Y^2``.

    With ``X`` and ``Y`` the slice coordinates scaled by their leading
    coefficients, ``X^3 - Y^2`` is computed through the highest degree the
    truncation determines.  PASS needs orders exactly ``(2, 3)`` and the
    residual to vanish through degree 6.
    """
    o2, o3, l2, l3 = orders
    if l2 == 0 or l3 == 0:
        raise SeriesError("vanishing leading coefficient; not a cusp")
    x = {k: c / l2 for k, c in orders.x_series.items()}
    y = {k: c / l3 for k, c in orders.y_series.items()}
    v = orders.valid_below
    # X = a^o2 (1 + O(a)) known below v, so X^3 is known below v + 2*o2; likewise Y^2.
    known = min(v + 2 * o2, v + o3)
    x3 = _mul_trunc(_mul_trunc(x, x, known), x, known)
    y2 = _mul_trunc(y, y, known)
    residual = {k: x3.get(k, 0) - y2.get(k, 0) for k in set(x3) | set(y2)}
    residual = {k: c for k, c in residual.items() if c != 0}
    res_order = _order(residual)
    residual_order = res_order if res_order is not None else known
    is_cusp = (o2, o3) == (2, 3)
    return {
        "orders": [o2, o3],
        "lead2": str(l2),
        "lead3": str(l3),
        "residual_order": residual_order,
        "residual_exact_through": known - 1,
        "pass": bool(is_cusp and residual_order >= 7),
    }


def cusp_certificate(order: int = DEFAULT_ORDER) -> dict:
    """Run the full chain at truncation ``order`` and return the JSON certificate."""
    chart_u = substitute_u(mu_local_chart(order))
    cert = cusp_normal_form_check(slice_orders(chart_u))
    cert["truncation"] = order
    return cert

