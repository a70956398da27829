"""Opt-in figure rendering for CLI results.

Nothing here runs unless the user passes --figures DIR; commands stay
plot-free by default and emit plot-ready data only.  Files are written
into the requested directory with fixed names and the Agg backend, so
rendering works headless.
"""

from __future__ import annotations

import os

import numpy as np


def _pyplot():
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    return plt


def _values_grid(payload: dict) -> tuple:
    radii = np.asarray(payload["grid"]["radii"], dtype=float)
    count = int(payload["grid"]["angular_count"])
    vals = np.asarray(payload["values"], dtype=float)
    grid = (vals[:, 0] + 1j * vals[:, 1]).reshape(len(radii), count)
    return radii, grid


def save_extension_figure(payload: dict, out_dir: str) -> str:
    """Image of the extension: grid circles mapped through F, colored by
    source radius; the unit-circle image drawn from the seam trace."""
    plt = _pyplot()
    radii, grid = _values_grid(payload)
    fig, ax = plt.subplots(figsize=(6.0, 6.0))
    cmap = plt.get_cmap("viridis")
    lo, hi = np.log(radii[0]), np.log(radii[-1])
    span = (hi - lo) or 1.0
    for rho, row in zip(radii, grid):
        ring = np.append(row, row[0])
        ax.plot(ring.real, ring.imag, lw=0.8,
                color=cmap((np.log(rho) - lo) / span))
    seam = payload.get("seam")
    if seam:
        tr = np.asarray(seam["interior"], dtype=float)
        ring = tr[:, 0] + 1j * tr[:, 1]
        ring = np.append(ring, ring[0])
        ax.plot(ring.real, ring.imag, "k-", lw=1.4, label="|z| = 1 image")
        ax.legend(loc="upper right", fontsize=8)
    ax.set_aspect("equal")
    ax.set_title("quasiconformal extension: images of grid circles")
    path = os.path.join(out_dir, "extension.png")
    fig.savefig(path, dpi=160, bbox_inches="tight")
    plt.close(fig)
    return path


def save_field_figure(payload: dict, out_dir: str) -> str:
    """Per-circle dilatation traces: |mu| and arg mu against angle."""
    plt = _pyplot()
    radii = np.asarray(payload["radii"], dtype=float)
    tr = np.asarray(payload["traces"], dtype=float)
    traces = tr[..., 0] + 1j * tr[..., 1]
    theta = 2.0 * np.pi * np.arange(traces.shape[1]) / traces.shape[1]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(7.0, 5.5), sharex=True)
    for rho, row in zip(radii, traces):
        ax1.plot(theta, np.abs(row), lw=0.9, label=f"rho = {rho:g}")
        ax2.plot(theta, np.angle(row), lw=0.9)
    ax1.set_ylabel("|mu|")
    ax2.set_ylabel("arg mu")
    ax2.set_xlabel("theta")
    ax1.legend(fontsize=8, ncol=3)
    ax1.set_title("Beltrami traces by circle")
    path = os.path.join(out_dir, "beltrami_field.png")
    fig.savefig(path, dpi=160, bbox_inches="tight")
    plt.close(fig)
    return path


def save_coefficients_figure(payload: dict, out_dir: str) -> str:
    """Classifier spectrum: log10 |a_n| per circle with the n <= 1
    region (which must vanish for a Becker field) shaded."""
    plt = _pyplot()
    orders = np.asarray(payload["orders"], dtype=int)
    radii = payload["radii"]
    co = np.asarray(payload["coefficients"], dtype=float)
    mags = np.hypot(co[..., 0], co[..., 1])
    floor = 1e-18
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    for rho, row in zip(radii, mags):
        ax.plot(orders, np.log10(np.maximum(row, floor)), lw=0.8,
                label=f"rho = {rho:g}")
    ax.axvspan(orders[0] - 0.5, 1.5, color="tab:red", alpha=0.12)
    ax.axhline(np.log10(payload["tolerance"]), color="k", ls="--", lw=0.8)
    ax.set_xlabel("Fourier order n")
    ax.set_ylabel("log10 |a_n|")
    ax.set_title("circle Fourier coefficients (shaded: must vanish)")
    ax.legend(fontsize=8, ncol=3)
    path = os.path.join(out_dir, "becker_coefficients.png")
    fig.savefig(path, dpi=160, bbox_inches="tight")
    plt.close(fig)
    return path


def save_range_figure(payload: dict, out_dir: str) -> str:
    """Range diagnostics: center trajectory in the disk and the
    derivative-decay curve that separates plane from disk-like."""
    plt = _pyplot()
    times = np.asarray(payload["times"], dtype=float)
    ce = np.asarray(payload["center"], dtype=float)
    center = ce[:, 0] + 1j * ce[:, 1]
    decay = np.asarray(payload["derivative_decay"], dtype=float)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.5, 4.2))
    ring = np.exp(1j * np.linspace(0.0, 2.0 * np.pi, 256))
    ax1.plot(ring.real, ring.imag, "k-", lw=0.6)
    ax1.plot(center.real, center.imag, lw=1.0)
    ax1.plot(center.real[-1:], center.imag[-1:], "ro", ms=4)
    ax1.set_aspect("equal")
    ax1.set_title("center trajectory a(t)")
    ax2.semilogy(times, np.maximum(decay, 1e-300), lw=1.0)
    ax2.set_xlabel("t")
    ax2.set_title(f"derivative decay (verdict: {payload['verdict']})")
    path = os.path.join(out_dir, "range_diagnostic.png")
    fig.savefig(path, dpi=160, bbox_inches="tight")
    plt.close(fig)
    return path


__all__ = [
    "save_extension_figure", "save_field_figure",
    "save_coefficients_figure", "save_range_figure",
]
