"""
This module renders the convergence curves and the embedding scatter.
"""
import logging

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from data_manager import DataManager  # noqa: E402

logger = logging.getLogger(__name__)

LOSS_COLUMNS = ["l_total", "l_contra", "l_intra", "l_inter"]


def plot_trace(trace_csv, out_png):
    """
    Draws one panel per loss term with one line per seed.

    :param trace_csv: A ``trace.csv`` written by ``run``.
    :type trace_csv: str
    :param out_png: The figure path.
    :type out_png: str
    """
    trace = DataManager.load_frame(trace_csv)
    if "seed" not in trace.columns:
        trace["seed"] = 0
    fig, axes = plt.subplots(1, len(LOSS_COLUMNS), figsize=(4 * len(LOSS_COLUMNS), 3.2))
    for ax, column in zip(axes, LOSS_COLUMNS):
        for seed, rows in trace.groupby("seed"):
            ax.plot(rows["epoch"], rows[column], label=f"seed {seed}")
        ax.set_title(column)
        ax.set_xlabel("epoch")
    axes[0].set_ylabel("loss")
    axes[0].legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(out_png, dpi=150)
    plt.close(fig)
    logger.info("figure written", extra={"path": out_png})


def plot_embedding(embedding_csv, out_png):
    """
    Draws the exported 2-D embedding colored by cluster.

    :param embedding_csv: An ``embedding.csv`` written by ``export-embedding``.
    :type embedding_csv: str
    :param out_png: The figure path.
    :type out_png: str
    """
    table = DataManager.load_frame(embedding_csv)
    fig, ax = plt.subplots(figsize=(5, 5))
    scatter = ax.scatter(table["x"], table["y"], c=table["cluster"], cmap="tab10", s=14)
    ax.legend(*scatter.legend_elements(), title="cluster", fontsize="small")
    ax.set_xticks([])
    ax.set_yticks([])
    fig.tight_layout()
    fig.savefig(out_png, dpi=150)
    plt.close(fig)
    logger.info("figure written", extra={"path": out_png})
