"""Report emission: the mean +/- SD grid and raw per-example value files.

The grid is a CSV keyed by (causality, strategy, norm) rows and condition
columns; empty cells render as an em dash.  Raw SI-SDRi lists are written
one value per line for external distribution plotting; an optional violin
plot rendering is available when matplotlib is installed.
"""

from __future__ import annotations

from pathlib import Path

from .conditions import CONDITION_KINDS

EMPTY_CELL = "—"  # em dash


def _tag_key(model_tag):
    causal = "causal" if model_tag.get("causal") else "non-causal"
    return (causal, model_tag.get("strategy", "?"), model_tag.get("norm_kind", "?"))


def write_report_grid(path, reports, conditions=CONDITION_KINDS):
    """Write the aggregated grid; rows ordered by (causality, strategy, norm)."""
    cells = {}
    for rep in reports:
        key = _tag_key(rep.model_tag)
        cells.setdefault(key, {})[rep.condition] = rep
    lines = ["causality,strategy,norm," + ",".join(conditions)]
    for key in sorted(cells):
        row = [key[0], key[1], key[2]]
        for cond in conditions:
            rep = cells[key].get(cond)
            if rep is None or not rep.values:
                row.append(EMPTY_CELL)
            else:
                row.append(f"{rep.mean:.1f} ± {rep.sd:.1f}")
        lines.append(",".join(row))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n")
    return path


def raw_values_filename(model_tag, condition) -> str:
    causal, strategy, norm = _tag_key(model_tag)
    return f"raw_{causal}_{strategy}_{norm}_{condition}.txt"


def write_raw_values(directory, report) -> Path:
    """One SI-SDRi value per line for a (config, condition) cell."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / raw_values_filename(report.model_tag, report.condition)
    path.write_text("\n".join(f"{v:.6f}" for v in report.values) + "\n")
    return path


def render_violin(path, labelled_values, title=""):
    """Optional violin plot of raw distributions (requires matplotlib)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    labels = list(labelled_values)
    data = [labelled_values[k] for k in labels]
    fig, ax = plt.subplots(figsize=(1.5 + 1.2 * len(labels), 4))
    ax.violinplot(data, showmeans=True)
    ax.set_xticks(range(1, len(labels) + 1))
    ax.set_xticklabels(labels, rotation=30, ha="right")
    ax.set_ylabel("SI-SDRi [dB]")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return Path(path)
