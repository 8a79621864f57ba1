"""Static figure rendering for the CLI reports.

Each helper takes the already-computed report rows and writes one PNG next
to the delimited output.  Rows carry None for quantities that were not
computed (MC disabled or a failed point); those are simply left off the
figure.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def _split_series(rows, key_value, key_err=None):
    xs, ys, es = [], [], []
    for row in rows:
        if row.get(key_value) is None:
            continue
        xs.append(row["lambda"])
        ys.append(row[key_value])
        es.append(row.get(key_err) if key_err else None)
    return xs, ys, es


def save_sweep_figure(path, rows, model: str, epsilon: float):
    """Drift against lam: asymptotic curve plus MC points with error bars."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    xs, ys, _ = _split_series(rows, "v_asymptotic")
    if xs:
        ax.plot(xs, ys, "-", color="tab:blue", label="leading-order quadrature")
    xs, ys, es = _split_series(rows, "v_mc", "mc_stderr")
    if xs:
        ax.errorbar(xs, ys, yerr=es, fmt="o", ms=4, color="tab:red",
                    capsize=2, label="Monte Carlo")
    ax.set_xscale("log")
    ax.set_xlabel(r"$\lambda$")
    ax.set_ylabel("drift velocity")
    ax.set_title(f"{model} model, epsilon = {epsilon:g}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_variance_figure(path, rows, epsilon: float):
    """Variance growth rate against lam, with optional MC points."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    xs, ys, _ = _split_series(rows, "variance_rate_asymptotic")
    if xs:
        ax.plot(xs, ys, "-", color="tab:blue", label="leading-order quadrature")
    xs, ys, es = _split_series(rows, "variance_rate_mc", "mc_stderr")
    if xs:
        ax.errorbar(xs, ys, yerr=es, fmt="o", ms=4, color="tab:red",
                    capsize=2, label="Monte Carlo")
    ax.set_xscale("log")
    ax.set_xlabel(r"$\lambda$")
    ax.set_ylabel("variance rate  lim Var[X]/t")
    ax.set_title(f"eddy model, epsilon = {epsilon:g}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_sort_figure(path, entries):
    """Drift vectors per species: predicted arrows vs MC points with errors.

    ``entries`` is a list of dicts with keys label, predicted (2,), mc (2,),
    stderr (2,).
    """
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for i, entry in enumerate(entries):
        color = colors[i % len(colors)]
        pred = np.asarray(entry["predicted"], dtype=float)
        ax.annotate("", xy=pred, xytext=(0.0, 0.0),
                    arrowprops=dict(arrowstyle="->", color=color, lw=1.5))
        mc = entry.get("mc")
        if mc is not None:
            err = np.asarray(entry["stderr"], dtype=float)
            ax.errorbar([mc[0]], [mc[1]], xerr=[err[0]], yerr=[err[1]],
                        fmt="o", ms=4, color=color, capsize=2)
        ax.plot([], [], "-o", color=color, label=entry["label"])
    ax.axhline(0.0, color="0.8", lw=0.5)
    ax.axvline(0.0, color="0.8", lw=0.5)
    ax.set_xlabel("drift x")
    ax.set_ylabel("drift y")
    ax.set_title("species drift vectors: predicted (arrows) vs MC (points)")
    ax.set_aspect("equal", adjustable="datalim")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
