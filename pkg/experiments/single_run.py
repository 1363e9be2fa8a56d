"""
This module runs EMTC on one dataset for every configured seed.

Artifacts: ``results.json``, ``trace.csv``, ``assignments.csv``, and optionally
``masks.csv`` and one ``checkpoint_seed{s}.pt`` per seed. Unlabeled datasets
are clustered too; their results carry null metrics.
"""
import logging

import pandas as pd

from data_manager import DataManager
from errors import ArgumentError
from experiments.manifest import ExperimentKind, concat_traces, results_document, run_seeds

logger = logging.getLogger(__name__)

RESULTS_FILE = "results.json"
TRACE_FILE = "trace.csv"
MASKS_FILE = "masks.csv"
ASSIGNMENTS_FILE = "assignments.csv"


def checkpoint_name(seed):
    """
    :rtype: str
    """
    return f"checkpoint_seed{seed}.pt"


def assignments_frame(outcomes):
    """
    :return: The final cluster of every sample, one row per seed and sample.
    :rtype: pandas.DataFrame
    """
    return pd.DataFrame([{"seed": o["seed"], "sample": i, "cluster": int(c)}
                         for o in outcomes for i, c in enumerate(o["labels"])],
                        columns=["seed", "sample", "cluster"])


def cmd_run(manifest):
    """
    Trains and evaluates one dataset.

    :param manifest: The run manifest.
    :type manifest: RunManifest
    :return: The results document that was written.
    :rtype: dict
    """
    if len(manifest.dataset_names()) > 1:
        raise ArgumentError("run takes a single dataset; use compare-masks or ablation for several")
    dataset = manifest.load_dataset()
    config = manifest.config
    outcomes = run_seeds(dataset, config, record_masks=manifest.export_masks,
                         keep_model=manifest.save_checkpoint)

    results = results_document(ExperimentKind.SINGLE, manifest.describe_dataset(dataset), config, outcomes)
    DataManager.save_results(manifest.path(RESULTS_FILE), results)
    DataManager.save_frame(manifest.path(TRACE_FILE), concat_traces(outcomes))
    DataManager.save_frame(manifest.path(ASSIGNMENTS_FILE), assignments_frame(outcomes))
    if manifest.export_masks:
        rows = [row for outcome in outcomes for row in outcome["mask_rows"]]
        DataManager.save_frame(manifest.path(MASKS_FILE),
                               pd.DataFrame(rows, columns=["seed", "epoch", "view", "sample", "mask"]))
    if manifest.save_checkpoint:
        for outcome in outcomes:
            DataManager.save_checkpoint(manifest.path(checkpoint_name(outcome["seed"])), outcome["model"],
                                        config, outcome["epochs_run"], dataset.n_dims, outcome["optimizer"])

    logger.info("run finished", extra={"dataset": dataset.name, **results["summary"]})
    return results
