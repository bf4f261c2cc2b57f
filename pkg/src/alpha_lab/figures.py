"""Matplotlib renderings written next to the JSON/CSV reports.

Only imported when a ``--figures`` directory is given, so the numerical core
never needs a plotting backend.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams.update({
        "figure.figsize": (5.0, 3.6),
        "font.size": 9,
        "axes.spines.top": False,
        "axes.spines.right": False,
        "savefig.dpi": 150,
        "savefig.bbox": "tight",
    })
    return plt


def _save(fig, out_dir: Path, name: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"{name}.png"
    fig.savefig(path)
    import matplotlib.pyplot as plt

    plt.close(fig)
    return path


def lct_annuli(report: dict, out_dir: Path) -> Path:
    """``log2 I_r`` against ``r`` with the predicted slope."""
    plt = _plt()
    fig, ax = plt.subplots()
    annuli = report.get("annuli", [])
    if annuli:
        r = np.array([a["r"] for a in annuli])
        mean = np.array([a["mean"] for a in annuli])
        se = np.array([a["stderr"] for a in annuli])
        ax.errorbar(r, np.log2(mean), yerr=se / (mean * math.log(2)), fmt="o", label="Monte Carlo")
        slope = report["exponent_expected"]
        ax.plot(r, np.log2(mean[0]) + slope * r, "--", label=f"slope {slope:.3g}")
        ax.legend(frameon=False)
    ax.set_xlabel("annulus index r")
    ax.set_ylabel("log2 I_r")
    ax.set_title(f"{report['spec']['name']}, beta = {report['beta']}")
    return _save(fig, out_dir, "lct_annuli")


def lct_threshold(report: dict, out_dir: Path) -> Path:
    plt = _plt()
    fig, ax = plt.subplots()
    evals = [e for e in report["threshold_search"]["evaluations"] if e["ratio"] not in (None, "inf")
             and math.isfinite(float(e["ratio"]))]
    b = np.array([e["beta"] for e in evals])
    rho = np.array([float(e["ratio"]) for e in evals])
    order = np.argsort(b)
    ax.plot(b[order], np.log2(rho[order]), "o-", label="measured log2(I_1/I_0)")
    ax.axhline(0, color="0.6", lw=0.8)
    ax.axvline(report["threshold_predicted"], color="C1", ls="--", label="sum(w)/d")
    ax.set_xlabel("beta")
    ax.set_ylabel("log2 ratio")
    ax.legend(frameon=False)
    return _save(fig, out_dir, "lct_threshold")


def cusp_slice(out_dir: Path) -> Path:
    """Real points of the transverse slice ``(X, Y) = (alpha^2, alpha^3)``."""
    plt = _plt()
    from . import cusp

    so = cusp.slice_orders(cusp.substitute_u(cusp.mu_local_chart(6)))
    a = np.linspace(-1, 1, 401)
    x = sum(float(c) * a**k for k, c in so.x_series.items()) / float(so.lead2)
    y = sum(float(c) * a**k for k, c in so.y_series.items()) / float(so.lead3)
    fig, ax = plt.subplots()
    ax.plot(x, y)
    ax.set_xlabel("X = coordinate 2 / lead2")
    ax.set_ylabel("Y = coordinate 3 / lead3")
    ax.set_title(f"slice u = 0: orders ({so.order2}, {so.order3})")
    return _save(fig, out_dir, "cusp_slice")


def icosahedral_roots(out_dir: Path) -> Path:
    plt = _plt()
    from . import forms

    roots = [z for z in forms.icosahedral_form().roots() if np.isfinite(z)]
    fig, ax = plt.subplots(figsize=(4, 4))
    ax.scatter([z.real for z in roots], [z.imag for z in roots], s=18)
    t = np.linspace(0, 2 * math.pi, 200)
    ax.plot(np.cos(t), np.sin(t), color="0.7", lw=0.8)
    ax.set_aspect("equal")
    ax.set_title("finite roots of the icosahedral form (one more at infinity)")
    return _save(fig, out_dir, "icosahedral_roots")


def hyperbolic_chord(out_dir: Path, seed: int = 0) -> Path:
    """A symmetrized convex function along radial geodesics against its chord bound."""
    plt = _plt()
    from . import hyperbolic

    rng = np.random.default_rng(seed)
    f = hyperbolic.random_convex_invariant(rng)
    two_pi = 2 * math.pi
    b = -f(hyperbolic.P0) / two_pi
    dirs = rng.normal(size=(6, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    t = np.linspace(0, 1, 41)
    fig, ax = plt.subplots()
    for d in dirs:
        ax.plot(t, [f(hyperbolic.point_from_coords(s * d)) / two_pi for s in t], color="C0", lw=0.8)
    sphere = rng.normal(size=(400, 3))
    sphere /= np.linalg.norm(sphere, axis=1, keepdims=True)
    abar = max(f(hyperbolic.point_from_coords(d)) for d in np.vstack([sphere, dirs])) / two_pi
    ax.plot(t, -b + (abar + b) * t, "k--", label="-b + (abar + b) dist")
    ax.set_xlabel("dist(Q, P0)")
    ax.set_ylabel("f(Q) / 2 pi")
    ax.legend(frameon=False)
    return _save(fig, out_dir, "hyperbolic_chord")


def green_kernel(out_dir: Path, m: int = 128) -> Path:
    plt = _plt()
    from . import green

    k = green.GreenKernel.build(m)
    fig, ax = plt.subplots(figsize=(4.2, 3.6))
    im = ax.imshow(np.fft.fftshift(k.profile).T, origin="lower", extent=(-math.pi, math.pi, -math.pi, math.pi))
    fig.colorbar(im, ax=ax)
    ax.set_title("normalized Green kernel K(0, y) >= 0")
    return _save(fig, out_dir, "green_kernel")


def toric_gradient(out_dir: Path, samples: int = 3000, seed: int = 0) -> Path:
    plt = _plt()
    from . import toric

    poly = toric.HEXAGON
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(samples, 2)) * 4
    g = toric.lse_gradient(poly, x)
    order = np.argsort(np.arctan2(poly.array[:, 1], poly.array[:, 0]))
    v = poly.array[np.append(order, order[0])]
    fig, ax = plt.subplots(figsize=(4, 4))
    ax.scatter(g[:, 0], g[:, 1], s=2, alpha=0.4)
    ax.plot(v[:, 0], v[:, 1], "k-", lw=1)
    ax.set_aspect("equal")
    ax.set_title("gradient image of the log-sum-exp potential")
    return _save(fig, out_dir, "toric_gradient")


def reproduce_summary(results: list[dict], out_dir: Path) -> Path:
    plt = _plt()
    fig, ax = plt.subplots(figsize=(6, 3.2))
    names = [f"{r['number']}. {r['name']}" for r in results]
    colors = ["C2" if r["pass"] else "C3" for r in results]
    secs = [max(float(r.get("seconds", 0.0)), 1e-3) for r in results]
    ax.barh(names[::-1], secs[::-1], color=colors[::-1])
    ax.set_xscale("log")
    ax.set_xlabel("seconds (green: pass, red: fail)")
    return _save(fig, out_dir, "reproduce_summary")
