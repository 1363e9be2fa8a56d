"""
This module runs the IVM/MEV ablation grid, with optional per-loss rows.
"""
import logging

import pandas as pd

from data_manager import DataManager
from experiments.manifest import evaluate_seeds_parallel, metrics_row, require_labels
from trainer import run_ablation

logger = logging.getLogger(__name__)

TABLE_FILE = "ablation.csv"
JSON_FILE = "ablation.json"


def flag(enabled):
    """
    Renders a component switch as a table mark.

    :param enabled: Whether the component is on.
    :type enabled: bool
    :return: "✓" when enabled, "✗" otherwise.
    :rtype: str
    """
    return "✓" if enabled else "✗"


def cmd_ablation(manifest, include_loss_terms=False):
    """
    Trains each ablation variant on every requested dataset.

    :param manifest: The run manifest.
    :type manifest: RunManifest
    :param include_loss_terms: Also drop each loss term in turn, defaults to False.
    :type include_loss_terms: bool, optional
    :return: The ablation table.
    :rtype: pandas.DataFrame
    """
    rows = []
    for name in manifest.dataset_names():
        dataset = manifest.load_dataset(name)
        require_labels(dataset, "ablation")
        cells = run_ablation(dataset, manifest.config, include_loss_terms, run=evaluate_seeds_parallel)
        for cell in cells:
            row = metrics_row(cell["reports"], dataset=dataset.name, variant=cell["variant"],
                              ivm=flag(cell["ivm"]), mev=flag(cell["mev"]))
            logger.info("variant finished", extra={"dataset": dataset.name, "variant": cell["variant"],
                                                   "acc": row["acc"]})
            rows.append(row)

    table = pd.DataFrame(rows)
    DataManager.save_frame(manifest.path(TABLE_FILE), table)
    DataManager.save_json(manifest.path(JSON_FILE), {"config": manifest.config.to_dict(), "rows": rows})
    return table
