"""Figures for CLI runs, rendered to files with the Agg backend."""

from __future__ import annotations

from pathlib import Path

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams.update({"figure.dpi": 110, "axes.grid": True, "grid.alpha": 0.3, "font.size": 10})
    return plt


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path)
    import matplotlib.pyplot as plt

    plt.close(fig)
    return path


def spectra(tables: dict, path) -> Path:
    """``tables`` maps temperature to ``(nu, rho_E, rho_N)`` rows."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4))
    for T, rows in sorted(tables.items()):
        ax.loglog(rows[:, 0], rows[:, 1], label=f"T = {T:g} K")
    ax.set_xlabel("frequency [Hz]")
    ax.set_ylabel(r"$\rho_E$ [J s m$^{-3}$]")
    ax.legend()
    return _save(fig, path)


def field_slice(F, path, component: str = "energy") -> Path:
    """Energy density ``|F|^2`` in the mid ``z`` plane."""
    plt = _pyplot()
    grid = F.grid
    mid = grid.shape[2] // 2
    dens = np.sum(np.abs(F.F[:, :, mid, :]) ** 2, axis=-1)
    x, y = grid.axes()[:2]
    fig, ax = plt.subplots(figsize=(5, 4.2))
    im = ax.imshow(dens.T, origin="lower", extent=(x[0], x[-1], y[0], y[-1]), cmap="magma", aspect="equal")
    fig.colorbar(im, ax=ax, label=r"$|F|^2$")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(f"t = {F.t:g}")
    ax.grid(False)
    return _save(fig, path)


def time_series(t, columns: dict, path, ylabel: str = "relative drift") -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 3.6))
    for name, vals in columns.items():
        ax.semilogy(t, np.maximum(np.abs(vals), 1e-18), label=name)
    ax.set_xlabel("t")
    ax.set_ylabel(ylabel)
    ax.legend()
    return _save(fig, path)


def histogram(n, p, ref, path) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 3.6))
    ax.bar(n, p, width=0.7, label="state", alpha=0.7)
    ax.plot(n, ref, "k.", label="Poisson")
    ax.set_xlabel("photon number n")
    ax.set_ylabel("probability")
    ax.legend()
    return _save(fig, path)


def products(prod, bound, path) -> Path:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    ax.plot(np.arange(len(prod)), prod, "o", ms=3, label=r"$\Delta R\,\Delta P/\hbar$")
    ax.axhline(bound, color="k", lw=1, label="bound")
    ax.set_xlabel("state")
    ax.legend()
    return _save(fig, path)


def ellipse(major: float, minor: float, orientation: float, path) -> Path:
    plt = _pyplot()
    t = np.linspace(0, 2 * np.pi, 200)
    c, s = np.cos(orientation), np.sin(orientation)
    x = major * np.cos(t) * c - minor * np.sin(t) * s
    y = major * np.cos(t) * s + minor * np.sin(t) * c
    fig, ax = plt.subplots(figsize=(4, 4))
    ax.plot(x, y)
    ax.set_aspect("equal")
    ax.set_xlabel(r"$E_1$")
    ax.set_ylabel(r"$E_2$")
    return _save(fig, path)
