#!/usr/bin/env python3
"""Quick-look PNGs from the CSVs written by reproduce_figures.py (needs matplotlib).

    python3 scripts/plot_figures.py [--results results]
"""

import argparse
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np


def load(path):
    # two metadata lines, then the header row
    return np.genfromtxt(path, delimiter=",", names=True, skip_header=2, dtype=float)


def fig3(res, ax):
    d = load(res / "fig3" / "fig3_curve.csv")
    ax.semilogx(d["eps"], d["a_numeric"], "o", color="tab:red", label="numeric")
    ax.semilogx(d["eps"], d["a_analytic"], "s", mfc="none", color="tab:blue", label="analytic")
    ax.semilogx(d["eps"], d["a_fit"], "k-", lw=0.8, label="log fit")
    ax.set(xlabel="eps", ylabel="abar^2 / M^2", title="a(eps)")
    ax.legend()


def fig4(res, ax):
    d = load(res / "fig4" / "fig4_vs_alpha2.csv")
    for M in np.unique(d["M"]):
        sel = d["M"] == M
        (line,) = ax.plot(d["alpha2"][sel], d["exact"][sel], label=f"M={int(M)}")
        ax.plot(d["alpha2"][sel], d["dense_approx"][sel], "--", color=line.get_color())
        ax.plot(d["alpha2"][sel], d["sparse_approx"][sel], ":", color=line.get_color())
    ax.set(xlabel="abar^2", ylabel="P", ylim=(0, 1.05), title="USD success")
    ax.legend()


def fig6(res, ax, tag="g3_N9"):
    d = load(res / "fig6" / tag / "fig6.csv")
    for col, style in [("F0_ext", "-"), ("p0_ext", "--"), ("F_restricted", "-"), ("p_restricted", "--"),
                       ("pfp", "-"), ("do_nothing", ":")]:
        ax.plot(d["alpha"], d[col], style, label=col)
    ax.set(xlabel="abar", title=f"k = 0 amplifier ({tag})")
    ax.legend(fontsize=7)


def fig8(res, ax, tag="g3_N9"):
    d = load(res / "fig8" / tag / "fig8.csv")
    for col in ("snr_in", "snr_target", "snr1", "snr2", "root_p_snr1", "root_p_snr2"):
        ax.plot(d["alpha"], d[col], label=col)
    ax.set(xlabel="abar", title=f"quadrature SNR ({tag})")
    ax.legend(fontsize=7)


def fig7(res, axes):
    for ax, f in zip(axes, sorted((res / "fig7").glob("fig7_alpha*.csv"))):
        d = load(f)
        n = int(round(np.sqrt(d.size)))
        Q = d["Q"].reshape(n, n)
        ax.imshow(Q, origin="lower", extent=[d["re"].min(), d["re"].max(), d["im"].min(), d["im"].max()])
        ax.add_patch(plt.Circle((0, 0), 3.0, fill=False, color="k", lw=0.6))
        ax.set_title(f.stem.replace("fig7_", ""))


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--results", type=Path, default=Path("results"))
    args = p.parse_args()
    res = args.results

    fig, axes = plt.subplots(2, 2, figsize=(11, 8))
    fig3(res, axes[0, 0])
    fig4(res, axes[0, 1])
    fig6(res, axes[1, 0])
    fig8(res, axes[1, 1])
    fig.tight_layout()
    fig.savefig(res / "overview.png", dpi=120)

    fig, axes = plt.subplots(1, 4, figsize=(14, 3.6))
    fig7(res, axes)
    fig.tight_layout()
    fig.savefig(res / "fig7_q.png", dpi=120)
    print(res / "overview.png", res / "fig7_q.png")


if __name__ == "__main__":
    main()
