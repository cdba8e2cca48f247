"""Figure rendering for the report and projection paths.

Everything renders to files through the Agg backend; no interactive windows.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .experiment import ArchiveRow, StatRow, _PROJECTION_PAIRS

_MARKERS = ("o", "s", "^", "D", "v", "P", "X", "*")

_AXIS_LABELS = {
    "feature_reduction": "feature reduction",
    "accuracy": "accuracy",
    "detection_rate": "detection rate",
}


def _style():
    plt.rcParams.update({
        "figure.dpi": 110,
        "font.size": 9,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "legend.frameon": False,
    })


def save_projection_figure(archives: dict[str, list[ArchiveRow]], path: str) -> str:
    """Scatter the three pairwise metric projections, one panel each."""
    _style()
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.6))
    for ax, (x_name, y_name) in zip(axes, _PROJECTION_PAIRS):
        for idx, (label, rows) in enumerate(archives.items()):
            points = [
                (getattr(row.test, x_name), getattr(row.test, y_name))
                for row in rows
            ]
            if not points:
                continue
            xs, ys = zip(*points)
            ax.scatter(xs, ys, s=22, alpha=0.75, label=label,
                       marker=_MARKERS[idx % len(_MARKERS)])
        ax.set_xlabel(_AXIS_LABELS[x_name])
        ax.set_ylabel(_AXIS_LABELS[y_name])
    axes[0].legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def save_report_figure(rows: list[StatRow], path: str) -> str:
    """Errorbar panels of mean +/- std per (method, classifier) row."""
    _style()
    panels = (
        ("size", lambda r: (r.size_mean, r.size_std), "subset size"),
        ("accuracy", lambda r: (r.accuracy_mean * 100, r.accuracy_std * 100), "accuracy (%)"),
        ("detection_rate", lambda r: (r.dr_mean * 100, r.dr_std * 100), "detection rate (%)"),
    )
    labels = [f"{r.label}\n({r.classifier})" for r in rows]
    positions = range(len(rows))
    fig, axes = plt.subplots(1, 3, figsize=(max(9.0, 2.4 * len(rows)), 3.8))
    for ax, (_, extract, title) in zip(axes, panels):
        means, stds = zip(*(extract(r) for r in rows))
        ax.errorbar(positions, means, yerr=stds, fmt="o", capsize=4)
        ax.set_xticks(list(positions))
        ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=7)
        ax.set_title(title, fontsize=9)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path
