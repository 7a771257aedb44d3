"""Matplotlib renderings written next to the delimited report files."""

from __future__ import annotations

from typing import Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluate import EvalReport

_STYLE = {"mlp": ("tab:blue", "o"), "q": ("tab:green", "^"), "ilp": ("tab:red", "s")}


def save_eval_figure(report: EvalReport, path) -> None:
    """Per-length FSA/SLA bars for one evaluation run."""
    keys = list(report.per_length)
    fsa_vals = [report.per_length[k][1] for k in keys]
    sla_vals = [report.per_length[k][2] for k in keys]
    fig, ax = plt.subplots(figsize=(7, 3.5))
    xs = range(len(keys))
    width = 0.38
    ax.bar([x - width / 2 for x in xs], fsa_vals, width, label="FSA", color="tab:blue")
    ax.bar([x + width / 2 for x in xs], sla_vals, width, label="SLA", color="tab:orange")
    ax.set_xticks(list(xs), keys)
    ax.set_xlabel("sequence length")
    ax.set_ylabel("accuracy (%)")
    ax.set_ylim(0, 105)
    ax.set_title(f"{report.method} on {report.dataset_id} (n={report.n}, "
                 f"FSA {report.fsa:.1f}, SLA {report.sla:.1f})")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_induction_figure(
    rows_by_method: Mapping[str, Sequence[tuple[int, float, float]]], path
) -> None:
    """FSA against the training length cap, one line per method."""
    fig, ax = plt.subplots(figsize=(6.5, 4))
    for method, rows in rows_by_method.items():
        color, marker = _STYLE.get(method, ("tab:gray", "x"))
        ells = [r[0] for r in rows]
        ax.plot(ells, [r[1] for r in rows], color=color, marker=marker, label=method)
    ax.set_xlabel("maximum training sequence length")
    ax.set_ylabel("full-sequence accuracy (%)")
    ax.set_ylim(-2, 105)
    ax.grid(alpha=0.3)
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
