"""Figures for tower runs: the quasi-regular norm sequence against the reduced-norm bounds."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "figure.figsize": (6.0, 3.8),
    "font.size": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
    # fixed metadata keeps repeated renders byte-identical
    "svg.hashsalt": "isonorm",
}


def tower_figure(path, values, dims=None, r_upper=None, r_lower=None, title: str = ""):
    """Plot ‖λ_n(a)‖ against n, with horizontal lines for the reduced-norm bounds."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        n = list(range(1, len(values) + 1))
        ax.plot(n, values, "o-", color="C0", label=r"$\|\lambda_n(a)\|$")
        if dims:
            for k, d in zip(n, dims):
                ax.annotate(str(d), (k, values[k - 1]), textcoords="offset points",
                            xytext=(0, 6), ha="center", fontsize=7, color="0.4")
        if r_upper is not None:
            ax.axhline(r_upper, color="C3", ls="--", lw=1, label=f"r upper {r_upper:.6f}")
        if r_lower is not None:
            ax.axhline(r_lower, color="C2", ls=":", lw=1, label=f"r lower {r_lower:.6f}")
        ax.set_xlabel("level n")
        ax.set_ylabel("norm")
        ax.set_xticks(n)
        if title:
            ax.set_title(title)
        ax.legend(frameon=False, fontsize=8, loc="best")
        fig.tight_layout()
        meta = {"Software": None} if str(path).endswith(".png") else {"Date": None}
        if str(path).endswith(".pdf"):
            meta = {"CreationDate": None, "Producer": None}
        fig.savefig(path, metadata=meta)
        plt.close(fig)
    return path
