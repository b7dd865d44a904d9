"""Figure rendering for profiles; used by the CLI report path."""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .profile_analysis import Profile

__all__ = ["render_profile_1d", "render_profile_2d"]


def render_profile_1d(profile: Profile, path, target: float | None = None) -> None:
    fig, ax = plt.subplots(figsize=(5.0, 3.2))
    ax.plot(profile.grid.eps_axis, profile.values, lw=1.4)
    if target is not None:
        ax.axhline(target, color="gray", lw=0.6, ls="--")
    ax.set_xlabel(r"Rabi error $\varepsilon$")
    ax.set_ylabel("transition probability")
    ax.set_ylim(-0.02, 1.02)
    if profile.train_id:
        ax.set_title(profile.train_id)
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)


def render_profile_2d(profile: Profile, path) -> None:
    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    eps = profile.grid.eps_axis
    delta = profile.grid.delta_axis / math.pi
    mesh = ax.pcolormesh(
        eps, delta, profile.values, cmap="viridis", vmin=0.0, vmax=1.0, shading="auto"
    )
    cs = ax.contour(
        eps, delta, profile.values, levels=[0.9], colors="white", linewidths=0.8
    )
    ax.clabel(cs, fmt="%.1f", fontsize=7)
    ax.set_xlabel(r"Rabi error $\varepsilon$")
    ax.set_ylabel(r"detuning error $\delta$ ($\pi/T$)")
    if profile.train_id:
        ax.set_title(profile.train_id)
    fig.colorbar(mesh, ax=ax, label="transition probability")
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)
