"""
This module compares the evolving mask against the static masking policies.

Every policy runs with the same keep ratio, seeds and remaining settings.
The table holds one row per (dataset, policy) and, when several datasets are
given, one averaged row per policy.
"""
import logging

import numpy as np
import pandas as pd

from config import MASK_POLICIES
from data_manager import DataManager
from experiments.manifest import format_mean_std, metrics_row, require_labels, run_seeds
from metrics import METRIC_NAMES

logger = logging.getLogger(__name__)

TABLE_FILE = "mask_comparison.csv"
JSON_FILE = "mask_comparison.json"
AVERAGE = "average"


def average_rows(rows):
    """
    Averages the per-dataset means of each policy.

    :param rows: Per-(dataset, policy) rows from ``metrics_row``.
    :type rows: list[dict]
    :return: One row per policy with dataset set to "average".
    :rtype: list[dict]
    """
    averaged = []
    for policy in MASK_POLICIES:
        mine = [r for r in rows if r["policy"] == policy]
        if not mine:
            continue
        row = {"dataset": AVERAGE, "policy": policy, "keep_ratio": mine[0]["keep_ratio"]}
        for name in METRIC_NAMES:
            means = np.array([r[f"{name}_mean"] for r in mine])
            row[f"{name}_mean"] = float(means.mean())
            row[f"{name}_std"] = float(means.std())
            row[name] = format_mean_std(row[f"{name}_mean"], row[f"{name}_std"])
        averaged.append(row)
    return averaged


def cmd_compare_masks(manifest, policies=MASK_POLICIES):
    """
    Runs every masking policy on every requested dataset.

    :param manifest: The run manifest.
    :type manifest: RunManifest
    :param policies: Policies to compare, defaults to all of them.
    :type policies: list[str], optional
    :return: The comparison table.
    :rtype: pandas.DataFrame
    """
    config = manifest.config
    logger.info("comparing masks", extra={"keep_ratio": config.keep_ratio, "policies": list(policies)})
    rows = []
    for name in manifest.dataset_names():
        dataset = manifest.load_dataset(name)
        require_labels(dataset, "compare-masks")
        for policy in policies:
            outcomes = run_seeds(dataset, config.with_overrides(mask_policy=policy))
            row = metrics_row([o["report"] for o in outcomes], dataset=dataset.name, policy=policy,
                              keep_ratio=config.keep_ratio)
            logger.info("policy finished", extra={k: row[k] for k in ("dataset", "policy", *METRIC_NAMES)})
            rows.append(row)
    if len(manifest.dataset_names()) > 1:
        rows.extend(average_rows(rows))

    table = pd.DataFrame(rows)
    DataManager.save_frame(manifest.path(TABLE_FILE), table)
    DataManager.save_json(manifest.path(JSON_FILE), {"config": config.to_dict(), "rows": rows})
    return table
