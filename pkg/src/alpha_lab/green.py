"""Green's function of the Laplacian on the flat torus ``[0, 2 pi)^2``.

Everything is spectral on an ``m x m`` grid: the Laplacian multiplies mode
``k`` by ``-|k|^2`` and the Green's function inverts it on the mean-zero
modes, so that

    f(x) = -int K(x, y) Lap f(y) dy + (1/V) int f

holds to round-off for grid functions.  ``K(x, y) = G(x - y)`` with
``G = (1/V) sum_{k != 0} e^{ik.x} / |k|^2``, shifted by ``-min G`` so it is
nonnegative; the shift does not change the identity because ``Lap f``
integrates to zero.  On the grid ``K`` is finite on the diagonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

VOLUME = (2 * math.pi) ** 2
MEAN_TOL = 1e-10
MAX_TOL = 1e-12


class PreconditionError(ValueError):
    """Input violates a hypothesis of the bound (distinct from the bound failing)."""


def grid(m: int) -> tuple[np.ndarray, np.ndarray]:
    x = 2 * math.pi * np.arange(m) / m
    return np.meshgrid(x, x, indexing="ij")


def _k2(m: int) -> np.ndarray:
    k = np.fft.fftfreq(m, d=1.0 / m)
    kx, ky = np.meshgrid(k, k, indexing="ij")
    return kx**2 + ky**2


def mean(field: np.ndarray) -> float:
    return float(np.mean(field))


def integral(field: np.ndarray) -> float:
    return VOLUME * mean(field)


def laplacian(field: np.ndarray) -> np.ndarray:
    m = field.shape[0]
    return np.real(np.fft.ifft2(-_k2(m) * np.fft.fft2(field)))


def laplacian_fd(field: np.ndarray) -> np.ndarray:
    """Periodic 5-point stencil."""
    m = field.shape[0]
    h = 2 * math.pi / m
    return (np.roll(field, 1, 0) + np.roll(field, -1, 0) + np.roll(field, 1, 1) + np.roll(field, -1, 1)
            - 4 * field) / h**2


def green_apply(source: np.ndarray) -> np.ndarray:
    """The mean-zero ``u`` with ``Lap u = source``; ``source`` must have zero mean."""
    source = np.asarray(source, dtype=float)
    scale = max(1.0, float(np.max(np.abs(source)))) if source.size else 1.0
    if abs(mean(source)) > MEAN_TOL * scale:
        raise PreconditionError(f"source has nonzero mean {mean(source):.3e}; not a Laplacian image")
    k2 = _k2(source.shape[0])
    s_hat = np.fft.fft2(source)
    with np.errstate(divide="ignore", invalid="ignore"):
        u_hat = np.where(k2 > 0, -s_hat / k2, 0.0)
    return np.real(np.fft.ifft2(u_hat))


@dataclass(frozen=True)
class GreenKernel:
    """``K(x, y) = profile[x - y]`` on an ``m x m`` grid, shifted to be nonnegative."""

    m: int
    profile: np.ndarray
    shift: float

    @classmethod
    def build(cls, m: int) -> "GreenKernel":
        k2 = _k2(m)
        with np.errstate(divide="ignore"):
            g_hat = np.where(k2 > 0, 1.0 / np.where(k2 > 0, k2, 1.0), 0.0)
        # ifft2 carries a 1/m^2 factor; the sum over modes is m^2 * ifft2
        g = np.real(np.fft.ifft2(g_hat)) * m * m / VOLUME
        shift = -float(g.min())
        return cls(m, g + shift, shift)

    def row(self, i: int, j: int) -> np.ndarray:
        """``K((x_i, x_j), y)`` as a field in ``y``."""
        return np.roll(np.roll(self.profile[::-1, ::-1], i + 1, 0), j + 1, 1)

    def row_integral(self) -> float:
        """``int K(x, y) dy``; the same for every ``x``."""
        return integral(self.profile)

    def symmetry_error(self) -> float:
        """``max |K(x, y) - K(y, x)| = max |G(d) - G(-d)|``."""
        flipped = np.roll(self.profile[::-1, ::-1], 1, (0, 1))
        return float(np.max(np.abs(self.profile - flipped)))

    def apply(self, field: np.ndarray) -> np.ndarray:
        """``int K(x, y) field(y) dy`` for every grid point ``x`` (periodic convolution)."""
        conv = np.real(np.fft.ifft2(np.fft.fft2(self.profile) * np.fft.fft2(field)))
        return conv * VOLUME / (self.m**2)


def lemma1_constant(c: float, m: int = 128) -> float:
    """``M = c V max_x int K(x, y) dy`` with the nonnegative kernel."""
    if c < 0:
        raise ValueError("bound constant must be nonnegative")
    return c * VOLUME * GreenKernel.build(m).row_integral()


def check_lower_bound(phi: np.ndarray, c: float, lap_tol: float = 1e-8) -> dict:
    """Verify ``int phi >= -M`` for ``phi`` with ``max phi = 0`` and ``Lap phi >= -c``.

    Also reproduces the chain ``int phi = V int K(x*, y) Lap phi(y) dy >=
    -c V int K(x*, y) dy`` at the maximum point ``x*`` and reports both
    sides.  Hypothesis violations raise :class:`PreconditionError`.
    """
    phi = np.asarray(phi, dtype=float)
    m = phi.shape[0]
    if abs(float(phi.max())) > MAX_TOL * max(1.0, float(np.abs(phi).max())):
        raise PreconditionError(f"max phi = {phi.max():.3e}, expected 0")
    lap = laplacian(phi)
    if lap.min() < -c - lap_tol * max(1.0, c):
        raise PreconditionError(f"Lap phi reaches {lap.min():.6g} < -{c}")
    kernel = GreenKernel.build(m)
    M = c * VOLUME * kernel.row_integral()
    total = integral(phi)
    i, j = np.unravel_index(int(np.argmax(phi)), phi.shape)
    k_row = kernel.row(i, j)
    chain_mid = VOLUME * integral(k_row * lap)
    chain_low = -c * VOLUME * integral(k_row)
    grid_tol = 1e-9 * max(1.0, abs(total), M)
    return {
        "check": "lemma1_lower_bound",
        "resolution": m,
        "c": c,
        "M": M,
        "integral": total,
        "margin": total + M,
        "chain_identity_error": abs(total - chain_mid),
        "chain_lower": chain_low,
        "chain_holds": bool(abs(total - chain_mid) <= grid_tol and chain_mid >= chain_low - grid_tol),
        "pass": bool(total >= -M - grid_tol),
    }


def band_limited_field(rng: np.random.Generator, m: int, kmax: int = 6) -> np.ndarray:
    """Random real trigonometric polynomial with frequencies ``|k_i| <= kmax``."""
    coeffs = np.zeros((m, m), dtype=complex)
    ks = np.arange(-kmax, kmax + 1)
    for kx in ks:
        for ky in ks:
            coeffs[kx % m, ky % m] = (rng.normal() + 1j * rng.normal()) / (1 + kx * kx + ky * ky)
    field = np.real(np.fft.ifft2(coeffs)) * m * m
    return field


def random_admissible(rng: np.random.Generator, m: int, c: float, kmax: int = 4) -> np.ndarray:
    """``phi`` with ``Lap phi >= -c`` and ``max phi = 0``, by construction.

    A nonnegative band-limited density ``n`` with mean 1 gives a source
    ``s = n - 1 >= -1``; then ``phi = c * green_apply(s)`` shifted to max 0.
    """
    g = band_limited_field(rng, m, kmax)
    n = g**2
    n /= n.mean()
    phi = c * green_apply(n - n.mean())
    return phi - phi.max()
