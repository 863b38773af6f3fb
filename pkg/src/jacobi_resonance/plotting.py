"""Static SVG figures: the band picture and the z-plane state map."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .background import quasimomentum, slits  # noqa: E402

MARKERS = {
    "bound": ("o", "tab:blue"),
    "antibound": ("s", "tab:orange"),
    "resonance": ("x", "tab:red"),
    "virtual": ("D", "tab:green"),
}


def _save(fig, path):
    with matplotlib.rc_context({"svg.hashsalt": "jacobi-resonance", "svg.fonttype": "none"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _z_plane(ax, bg):
    t = np.linspace(0, 2 * np.pi, 400)
    ax.plot(np.cos(t), np.sin(t), color="0.5", lw=0.8)
    for ang, r_in, r_out in slits(bg):
        r = np.array([r_in, r_out])
        ax.plot(r * np.cos(ang), r * np.sin(ang), color="k", lw=1.5)
    ax.axhline(0, color="0.85", lw=0.5, zorder=0)
    ax.axvline(0, color="0.85", lw=0.5, zorder=0)
    ax.set_aspect("equal")
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")


def plot_bands(bg, path):
    """Discriminant with the bands shaded, next to the slit z-plane."""
    bs = bg.bands
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4.2))
    lo, hi = bs.edges[0], bs.edges[-1]
    pad = 0.25 * (hi - lo)
    x = np.linspace(lo - pad, hi + pad, 1200)
    ax1.plot(x, bg.delta(x).real, color="k", lw=1.2)
    for s in (-1, 1):
        ax1.axhline(s, color="0.5", lw=0.6, ls="--")
    for j in range(1, bg.q + 1):
        a, b = bs.band(j)
        ax1.axvspan(a, b, color="tab:blue", alpha=0.15, lw=0)
    for mu in bs.mu:
        ax1.plot([mu], [bg.delta(mu).real], "v", color="tab:red", ms=5)
    ax1.set_ylim(-3, 3)
    ax1.set_xlabel("lambda")
    ax1.set_ylabel("Delta(lambda)")
    ax1.set_title(f"bands, q = {bg.q}")
    _z_plane(ax2, bg)
    ax2.set_title("z-plane with slits")
    fig.tight_layout()
    _save(fig, path)


def plot_states(bg, catalog, path):
    """States at their quasi-momentum images; sheet 1 inside the unit disk."""
    fig, ax = plt.subplots(figsize=(5.5, 5.5))
    _z_plane(ax, bg)
    seen = set()
    for st in catalog.states:
        _, z = quasimomentum(bg, st.location)
        marker, color = MARKERS[st.kind]
        label = st.kind if st.kind not in seen else None
        seen.add(st.kind)
        ax.plot([z.real], [z.imag], marker, color=color, ms=6, label=label, mfc="none" if marker != "x" else color)
    if seen:
        ax.legend(loc="upper right", fontsize=8, frameon=False)
    ax.set_title(f"states ({catalog.total_multiplicity()} of {catalog.kappa})")
    fig.tight_layout()
    _save(fig, path)
