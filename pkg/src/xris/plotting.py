"""Figure rendering for the report path.

Renders the standard set of design figures next to the delimited output:
pattern cuts, the full hemisphere map, the desired/quantized phase maps,
and the codebook constellation.  Uses the Agg backend so it works headless.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .codebook import Codebook
from .farfield import FieldGrid
from .synthesis import PhaseMap, StateMap

_FIG_DPI = 120


def save_pattern_cut(
    path: str | Path, grid: FieldGrid, cut_axis: str, cut_value_rad: float
):
    "Line plot of one principal cut, dB normalized to the grid peak."
    peak = float(np.max(grid.magnitude()))
    fig, ax = plt.subplots(figsize=(6, 4))
    if cut_axis == "phi":
        dphi = np.abs(np.mod(grid.phi - cut_value_rad, 2 * np.pi))
        ip = int(np.argmin(np.minimum(dphi, 2 * np.pi - dphi)))
        mags = grid.magnitude()[:, ip] / peak
        x = np.degrees(grid.theta)
        ax.set_xlabel("theta (deg)")
        title = f"phi = {np.degrees(grid.phi[ip]):.1f} deg cut"
    else:
        it = int(np.argmin(np.abs(grid.theta - cut_value_rad)))
        mags = grid.magnitude()[it, :] / peak
        x = np.degrees(grid.phi)
        ax.set_xlabel("phi (deg)")
        title = f"theta = {np.degrees(grid.theta[it]):.1f} deg cut"
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(mags)
    ax.plot(x, np.maximum(db, -60.0))
    ax.set_ylabel("normalized magnitude (dB)")
    ax.set_ylim(-60, 2)
    ax.grid(True, alpha=0.4)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=_FIG_DPI)
    plt.close(fig)


def save_pattern_map(path: str | Path, grid: FieldGrid):
    "Hemisphere magnitude map in dB over (phi, theta)."
    peak = float(np.max(grid.magnitude()))
    with np.errstate(divide="ignore"):
        db = 20.0 * np.log10(grid.magnitude() / peak)
    db = np.maximum(db, -60.0)
    fig, ax = plt.subplots(figsize=(6, 4))
    mesh = ax.pcolormesh(
        np.degrees(grid.phi), np.degrees(grid.theta), db, shading="nearest",
        cmap="inferno", vmin=-60.0, vmax=0.0,
    )
    fig.colorbar(mesh, ax=ax, label="normalized magnitude (dB)")
    ax.set_xlabel("phi (deg)")
    ax.set_ylabel("theta (deg)")
    ax.set_title("far-field magnitude")
    fig.tight_layout()
    fig.savefig(path, dpi=_FIG_DPI)
    plt.close(fig)


def save_phase_map(path: str | Path, pmap: PhaseMap, title: str = "desired phase"):
    "Cyclic-colormap image of a phase map in degrees."
    fig, ax = plt.subplots(figsize=(5, 4))
    img = ax.imshow(
        np.degrees(pmap.phases), origin="lower", cmap="twilight",
        vmin=0.0, vmax=360.0, interpolation="nearest",
    )
    fig.colorbar(img, ax=ax, label="phase (deg)")
    ax.set_xlabel("column")
    ax.set_ylabel("row")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=_FIG_DPI)
    plt.close(fig)


def save_state_map(path: str | Path, smap: StateMap):
    "Discrete image of the per-element state assignment."
    n_states = len(smap.book.states)
    fig, ax = plt.subplots(figsize=(5, 4))
    img = ax.imshow(
        smap.indices, origin="lower", cmap="viridis",
        vmin=-0.5, vmax=n_states - 0.5, interpolation="nearest",
    )
    cbar = fig.colorbar(img, ax=ax, ticks=range(n_states))
    cbar.ax.set_yticklabels([s.label for s in smap.book.states])
    ax.set_xlabel("column")
    ax.set_ylabel("row")
    ax.set_title(f"{smap.book.scheme.value} state map")
    fig.tight_layout()
    fig.savefig(path, dpi=_FIG_DPI)
    plt.close(fig)


def save_codebook_constellation(path: str | Path, book: Codebook):
    "Complex-plane scatter of the state coefficients at the design frequency."
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    circle = plt.Circle((0, 0), 1.0, fill=False, color="gray", ls="--", lw=0.8)
    ax.add_patch(circle)
    for s in book.states:
        ax.plot([0, s.coeff.real], [0, s.coeff.imag], color="C0", lw=1.0)
        ax.plot(s.coeff.real, s.coeff.imag, "o", color="C0")
        ax.annotate(
            s.label, (s.coeff.real, s.coeff.imag),
            textcoords="offset points", xytext=(6, 6), fontsize=9,
        )
    ax.set_xlim(-1.15, 1.15)
    ax.set_ylim(-1.15, 1.15)
    ax.set_aspect("equal")
    ax.axhline(0, color="gray", lw=0.5)
    ax.axvline(0, color="gray", lw=0.5)
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_title(f"{book.scheme.value} @ {book.freq / 1e9:.3f} GHz")
    fig.tight_layout()
    fig.savefig(path, dpi=_FIG_DPI)
    plt.close(fig)
