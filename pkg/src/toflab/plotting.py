"""Static SVG figures with reproducible bytes."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

SVG_SALT = "toflab"


def _style():
    plt.rcParams["svg.hashsalt"] = SVG_SALT
    plt.rcParams["svg.fonttype"] = "none"


def overlay_svg(path, curves, title="", xlabel="tau", ylabel="density"):
    """Draw ``curves`` (DistributionCurve or (tau, values, label)) on one axis."""
    _style()
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for c in curves:
        if isinstance(c, tuple):
            tau, val, label = c
        else:
            tau, val, label = c.tau_grid, c.density, c.label
        ax.plot(tau, val, label=label, lw=1.2)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)


def histogram_svg(path, hist, exact=None, title=""):
    """Bar outline of a Bohmian histogram, optionally over the exact density."""
    _style()
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    ax.stairs(hist.density, list(hist.tau_lo) + [hist.tau_hi[-1]], label="trajectories")
    if exact is not None:
        tau, val = exact
        ax.plot(tau, val, lw=1.2, label="flux")
    ax.set_xlabel("tau")
    ax.set_ylabel("density")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)
