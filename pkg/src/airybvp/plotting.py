"""Figure rendering for scenario outputs.

Everything here draws to files through the Agg backend, so it works in
headless environments.  The functions take plain arrays plus the dataclasses
from :mod:`airybvp.core` and return the path they wrote, which keeps the CLI
logic free of matplotlib details.
"""

from __future__ import annotations

import numpy as np

from .core import SpaceTimeField
from .analysis import DecayReport

__all__ = ["save_field_figure", "save_profile_figure", "save_coefficient_figure"]


def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    return plt


def save_field_figure(path, fields: "dict[str, SpaceTimeField]"):
    """Render |field|(x, t) heat maps side by side."""
    plt = _pyplot()
    names = list(fields)
    fig, axes = plt.subplots(
        1, len(names), figsize=(4.2 * len(names), 3.4), squeeze=False
    )
    for ax, name in zip(axes[0], names):
        fld = fields[name]
        mesh = ax.pcolormesh(
            fld.x, fld.t, np.abs(fld.values), shading="nearest", cmap="viridis"
        )
        ax.set_xlabel("x")
        ax.set_ylabel("t")
        ax.set_title("|%s|" % name)
        fig.colorbar(mesh, ax=ax)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def save_profile_figure(path, x, profiles: "dict[str, np.ndarray]", time: float):
    """Overlay the real parts of final-time profiles."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    for name, values in profiles.items():
        ax.plot(x, np.real(values), label=name, linewidth=1.1)
    ax.set_xlabel("x")
    ax.set_ylabel("Re value at t = %.6g" % time)
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def save_coefficient_figure(path, ns, magnitudes, fit: "DecayReport | None" = None):
    """Log-log magnitude-versus-order plot with the fitted power law."""
    plt = _pyplot()
    ns = np.asarray(ns)
    magnitudes = np.asarray(magnitudes)
    keep = (ns > 0) & (magnitudes > 0)
    fig, ax = plt.subplots(figsize=(5.4, 3.8))
    ax.loglog(ns[keep], magnitudes[keep], ".", markersize=4, label="|c_n|")
    if fit is not None and np.isfinite(fit.exponent):
        span = np.array([fit.n_lo, fit.n_hi], dtype=float)
        line = np.exp(fit.intercept) * span ** (-fit.exponent)
        ax.loglog(span, line, "-", linewidth=1.2,
                  label="n^-%.2f fit" % fit.exponent)
    ax.set_xlabel("n")
    ax.set_ylabel("magnitude")
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
