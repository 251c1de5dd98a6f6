"""Deterministic figure rendering for granuflow traces.

SVG by default; matplotlib is pinned to a fixed hash salt and dateless
metadata so identical inputs produce identical bytes.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .bundle import SchemaError, TraceBundle

FAMILY_COLORS = {1: "#1f77b4", 2: "#d62728"}   # fixed palette keyed by family
KIND_STYLES = {"shock": "-", "contact": "--", "rarefaction": ":"}

matplotlib.rcParams["svg.hashsalt"] = "granuplot"
matplotlib.rcParams["figure.dpi"] = 100


def _save(fig, path, fmt):
    path = Path(path).with_suffix(f".{fmt}")
    fig.savefig(path, format=fmt, metadata={"Date": None} if fmt == "svg" else None)
    plt.close(fig)
    return path


def _step_xy(xs, hs, far, span=0.1):
    if len(xs) == 0:
        return np.array([-1.0, 1.0]), np.array([far, far])
    pad = max(span * (xs[-1] - xs[0]), 0.1)
    gx = np.concatenate([[xs[0] - pad], xs, [xs[-1] + pad]])
    gy = np.concatenate([[far], hs, [hs[-1]]])
    return gx, gy


def plot_profiles(bundle: TraceBundle, times, outdir, fmt="svg"):
    """One two-panel figure (h and p vs x) per requested snapshot time."""
    out = []
    for t in times:
        xs, hs, ps, far = bundle.snapshot(t)
        if far is None:
            raise SchemaError(f"snapshot t={t}: missing far-field metadata")
        fig, (ax_h, ax_p) = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
        gx, gy = _step_xy(xs, hs, far[0])
        ax_h.step(gx, gy, where="post", color=FAMILY_COLORS[1])
        ax_h.set_ylabel("h")
        gx, gy = _step_xy(xs, ps, far[1])
        ax_p.step(gx, gy, where="post", color=FAMILY_COLORS[2])
        ax_p.axhline(1.0, color="gray", lw=0.6)
        ax_p.set_ylabel("p")
        ax_p.set_xlabel("x")
        ax_h.set_title(f"profile at t = {t:g}")
        out.append(_save(fig, Path(outdir) / f"profile_t={t:g}", fmt))
    return out


def plot_xt(bundle: TraceBundle, outdir, fmt="svg"):
    """Front trajectories in the (x, t) plane, colored by family."""
    fronts = bundle.fronts()
    fig, ax = plt.subplots(figsize=(7, 5))
    for f in fronts:
        ax.plot([f["x0"], f["x1"]], [f["t0"], f["t1"]],
                KIND_STYLES.get(f["kind"], "-"),
                color=FAMILY_COLORS.get(f["family"], "k"), lw=0.7)
    try:
        inter = bundle.interactions()
        ax.plot(inter["x"], inter["t"], "k.", ms=2.5)
    except SchemaError:
        pass
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    ax.set_title("wave fronts (blue: family 1, red: family 2; dots: interactions)")
    return _save(fig, Path(outdir) / "fronts_xt", fmt)


def plot_functionals(bundle: TraceBundle, outdir, fmt="svg"):
    """G (and Phi when present) vs t; asserts the homogeneous monotonicity."""
    fig, ax = plt.subplots(figsize=(7, 4))
    drew = False
    try:
        inter = bundle.interactions()
        if len(inter["t"]):
            g = inter["G"]
            if bundle.config.get("command") == "simulate" and \
                    np.any(np.diff(g) > 1e-12):
                raise SchemaError("Glimm series is not non-increasing; "
                                  "refusing to plot a broken homogeneous trace")
            ax.plot(inter["t"], g, color="#2ca02c", lw=1.0, label="G at interactions")
            drew = True
    except SchemaError as exc:
        if "refusing" in str(exc):
            raise
    series = None
    for name in ("phi_series.csv", "functionals.csv"):
        if (bundle.root / name).exists():
            series = bundle.phi_series() if name.startswith("phi") else bundle.functionals()
            break
    if series is not None:
        if "Phi" in series:
            ax2 = ax.twinx()
            ax2.plot(series["t"], series["Phi"], "o-", color="#9467bd", label="Phi")
            ax2.set_yscale("log")
            ax2.set_ylabel("Phi")
        for key in ("G", "G_u", "G_v"):
            if key in series:
                ax.plot(series["t"], series[key], "s--", lw=0.8, label=key)
        drew = True
    if not drew:
        raise SchemaError("no functional series found in the bundle")
    ax.set_xlabel("t")
    ax.set_ylabel("G")
    ax.legend(loc="upper right", fontsize=8)
    ax.set_title("functional time series")
    return _save(fig, Path(outdir) / "functionals", fmt)
