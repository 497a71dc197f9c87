"""Figure rendering for experiment reports.

Only the CLI report path imports this module, so the core library never
needs matplotlib at runtime. Each experiment gets a small diagnostic figure
built from the same rows that land in its CSV.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def render(report, path: str) -> str:
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    fn = _RENDERERS.get(report.name, _generic)
    fn(report, ax)
    ax.set_title(report.name)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def _columns(report) -> dict[str, np.ndarray]:
    cols = {name: [] for name in report.csv_columns}
    for row in report.csv_rows:
        for name, value in zip(report.csv_columns, row):
            cols[name].append(value)
    return {k: np.asarray(v) for k, v in cols.items()}


def _generic(report, ax):
    c = _columns(report)
    names = report.csv_columns
    if len(names) >= 2:
        x, y = names[0], names[-1]
        ax.plot(c[x].astype(float), c[y].astype(float), ".", alpha=0.6)
        ax.set_xlabel(x)
        ax.set_ylabel(y)


def _rel_to_tvd(report, ax):
    c = _columns(report)
    eps = c["epsilon"].astype(float)
    ax.plot(eps + np.linspace(-0.004, 0.004, eps.size), c["tvd"].astype(float), ".", alpha=0.4, label="measured tvd")
    grid = np.linspace(0, eps.max() * 1.1, 50)
    ax.plot(grid, grid / 2, "k--", label="eps / 2")
    ax.set_xlabel("epsilon")
    ax.set_ylabel("tvd")
    ax.legend()


def _scaled_family(report, ax):
    c = _columns(report)
    ax.loglog(c["delta"].astype(float), c["kl_closed_form"].astype(float), "o-", label="closed form")
    ax.loglog(c["delta"].astype(float), c["kl_direct"].astype(float), "x", label="direct sum")
    ax.set_xlabel("delta")
    ax.set_ylabel("KL divergence")
    ax.legend()


def _sat_gadget(report, ax):
    c = _columns(report)
    sat = c["satisfiable"].astype(int) == 1
    y = c["q_y1"].astype(float)
    x = np.arange(y.size)
    ax.plot(x[sat], y[sat], "g^", label="satisfiable", alpha=0.7)
    ax.plot(x[~sat], y[~sat], "rv", label="unsatisfiable", alpha=0.7)
    ax.axhline(0.25, color="k", linestyle="--", label="decision line 1/4")
    ax.set_xlabel("evaluation")
    ax.set_ylabel("Q(Y=1)")
    ax.legend()


def _gap_vs_tvd(report, ax):
    c = _columns(report)
    t = c["tvd"].astype(float)
    gap = c[report.csv_columns[-1]].astype(float)
    ax.plot(t, gap, ".", alpha=0.5)
    grid = np.linspace(0, max(1.0, t.max()), 50)
    ax.plot(grid, grid, "k--", label="gap = tvd")
    ax.set_xlabel("tvd")
    ax.set_ylabel(report.csv_columns[-1])
    ax.legend()


def _sauerhoff_size(report, ax):
    c = _columns(report)
    n = c["n"].astype(float)
    nodes = c["nodes"].astype(float)
    cmax = report.summary["fitted_c_max_ratio"]
    ax.plot(n, nodes, "o-", label="nodes")
    ax.plot(n, c["edges"].astype(float), "s-", label="edges", alpha=0.6)
    grid = np.linspace(n.min(), n.max(), 50)
    ax.plot(grid, cmax * grid**2, "k--", label=f"{cmax:.1f} n^2")
    ax.set_xlabel("n")
    ax.set_ylabel("count")
    ax.legend()


def _weak_approx(report, ax):
    c = _columns(report)
    eps = c["epsilon"].astype(float)
    n = c["vars"].astype(float)
    scaled_err = c["error_count"].astype(float) / 2.0**n
    ax.plot(eps, scaled_err, ".", alpha=0.6, label="error / 2^n")
    grid = np.linspace(0, max(0.13, eps.max()), 50)
    ax.plot(grid, 4 * grid, "k--", label="4 eps")
    ax.set_xlabel("measured epsilon")
    ax.set_ylabel("weak approximation error / 2^n")
    ax.legend()


def _kconvex(report, ax):
    c = _columns(report)
    measures = sorted(set(c["measure"].tolist()))
    for m in measures:
        mask = c["measure"] == m
        ax.loglog(
            c["df_over_k"][mask].astype(float),
            c["tvd"][mask].astype(float) ** 2,
            ".",
            alpha=0.4,
            label=m,
        )
    lo, hi = 1e-6, 10.0
    grid = np.geomspace(lo, hi, 50)
    ax.loglog(grid, grid, "k--", label="tvd^2 = D_f/k")
    ax.set_xlabel("D_f / k")
    ax.set_ylabel("tvd^2")
    ax.legend(fontsize=7)


def _prune_exact(report, ax):
    c = _columns(report)
    ax.plot(c["vars"].astype(float), c["edges_removed"].astype(float), ".", alpha=0.5)
    ax.set_xlabel("variables")
    ax.set_ylabel("edges removed")


def _conditional_gap(report, ax):
    c = _columns(report)
    x = np.arange(len(report.csv_rows))
    ax.bar(x - 0.18, c["tvd"].astype(float), width=0.34, label="tvd")
    ax.bar(x + 0.18, c["conditional_gap"].astype(float), width=0.34, label="conditional gap")
    ax.set_xticks(x, [f"k={k}, P(e)={p}" for k, p in zip(c["k"], c["p_e"])], fontsize=7)
    ax.legend()


def _sauerhoff_support(report, ax):
    c = _columns(report)
    n = c["n"].astype(float)
    ax.plot(n, c["density"].astype(float), "o-", label="model density")
    ax.axhline(1 - 1 / np.sqrt(2), color="k", linestyle="--", label="1 - 1/sqrt(2)")
    ax.plot(n, c["tvd_uniform_vs_pn"].astype(float), "s-", label="tvd(uniform, lifted PC)")
    ax.set_xlabel("n")
    ax.legend()


_RENDERERS = {
    "rel-to-tvd": _rel_to_tvd,
    "scaled-family": _scaled_family,
    "sat-gadget": _sat_gadget,
    "marginal-abs": _gap_vs_tvd,
    "map-abs": _gap_vs_tvd,
    "conditional-gap": _conditional_gap,
    "sauerhoff-support": _sauerhoff_support,
    "sauerhoff-size": _sauerhoff_size,
    "prune-exact": _prune_exact,
    "weak-approx-pipeline": _weak_approx,
    "kconvex-bounds": _kconvex,
}
