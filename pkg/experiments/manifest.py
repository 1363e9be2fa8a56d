"""
This module describes an experiment invocation and runs its seeds.

A RunManifest names the dataset, the configuration, the output directory and
the experiment kind. Seeds run as independent processes through joblib and
are gathered back in seed order.
"""
import logging
import os
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from config import ExperimentConfig
from data_manager import RESULTS_SCHEMA_VERSION, DataManager
from errors import ArgumentError
from metrics import METRIC_NAMES, evaluate
from synthetic import SyntheticSpec
from time_series import znormalize
from trainer import train
from ts_format import load_uea_dataset

logger = logging.getLogger(__name__)

SYNTHETIC = "synthetic"


class ExperimentKind(str, Enum):
    """The experiment a manifest runs; one kind per invocation."""
    SINGLE = "single"
    COMPARE_MASKS = "compare_masks"
    ABLATION = "ablation"
    SCALING = "scaling"
    EXPORT_EMBEDDING = "export_embedding"


@dataclass
class RunManifest:
    """
    Everything one command needs to run.

    :param kind: The experiment kind.
    :type kind: ExperimentKind
    :param config: The experiment configuration.
    :type config: ExperimentConfig
    :param output_dir: Where artifacts are written.
    :type output_dir: str
    :param dataset: Dataset name(s), comma-separated, or "synthetic", defaults to None.
    :type dataset: str, optional
    :param dataset_path: An explicit ``.ts`` file, defaults to None.
    :type dataset_path: str, optional
    :param data_dir: The local UEA archive directory, defaults to "data".
    :type data_dir: str, optional
    :param split: Which split to load, defaults to "published".
    :type split: str, optional
    :param synthetic: Parameters of a synthetic dataset, defaults to None.
    :type synthetic: SyntheticSpec, optional
    :param export_masks: Write the per-epoch mask dump, defaults to False.
    :type export_masks: bool, optional
    :param save_checkpoint: Write one checkpoint per seed, defaults to False.
    :type save_checkpoint: bool, optional
    """
    kind: ExperimentKind
    config: ExperimentConfig
    output_dir: str
    dataset: str = None
    dataset_path: str = None
    data_dir: str = "data"
    split: str = "published"
    synthetic: SyntheticSpec = None
    export_masks: bool = False
    save_checkpoint: bool = False

    def __post_init__(self):
        self.kind = ExperimentKind(self.kind)
        if self.dataset is None and self.dataset_path is None and self.synthetic is None:
            raise ArgumentError("a dataset name, a dataset path or a synthetic spec is required")

    def dataset_names(self):
        """
        :return: The requested dataset names; "synthetic" stands for the synthetic spec.
        :rtype: list[str]
        """
        if self.dataset is None:
            if self.dataset_path is not None:
                return [os.path.splitext(os.path.basename(self.dataset_path))[0]]
            return [SYNTHETIC]
        return [name.strip() for name in self.dataset.split(",") if name.strip()]

    def load_dataset(self, name=None):
        """
        Resolves, loads and z-normalizes one dataset.

        :param name: One of ``dataset_names()``, defaults to the first.
        :type name: str, optional
        :rtype: TimeSeriesDataset
        """
        name = name if name is not None else self.dataset_names()[0]
        if name == SYNTHETIC:
            dataset = (self.synthetic or SyntheticSpec()).build()
        else:
            dataset = load_uea_dataset(name, self.data_dir, self.split, self.dataset_path)
        logger.info("dataset loaded", extra={"dataset": name, "N": dataset.n_samples, "T": dataset.length,
                                             "D": dataset.n_dims})
        return znormalize(dataset)

    def path(self, filename):
        """
        :return: The path of an artifact inside the output directory.
        :rtype: str
        """
        DataManager.ensure_dir(self.output_dir)
        return f"{self.output_dir.rstrip('/')}/{filename}"

    def describe_dataset(self, dataset):
        """
        Builds the dataset block of the results document.

        :rtype: dict
        """
        info = dataset.summary()
        if dataset.name.startswith(SYNTHETIC):
            info["synthetic"] = (self.synthetic or SyntheticSpec()).to_dict()
        else:
            info["split"] = self.split
        return info


def run_seed(dataset, config, seed, record_masks=False, keep_model=False):
    """
    Trains one seed and scores it.

    :return: The seed, its EvalReport, trace table, mask rows, final labels and optionally the model
        and its optimizer state.
    :rtype: dict
    """
    started = time.perf_counter()
    result = train(dataset, config, seed, record_masks=record_masks)
    report = evaluate(dataset.labels, result.clusters.labels) if dataset.labels is not None else None
    trace = result.trace.to_frame()
    trace.insert(0, "seed", seed)
    return {
        "seed": seed,
        "report": report,
        "trace": trace,
        "mask_rows": [{"seed": seed, **row} for row in result.trace.mask_rows],
        "labels": result.clusters.labels,
        "epochs_run": len(result.trace),
        "seconds": time.perf_counter() - started,
        "model": result.model if keep_model else None,
        "optimizer": result.optimizer if keep_model else None,
    }


def run_seeds(dataset, config: ExperimentConfig, record_masks=False, keep_model=False):
    """
    Trains every configured seed, in parallel when ``config.n_jobs`` allows.

    :return: One outcome per seed, in seed order.
    :rtype: list[dict]
    """
    jobs = (delayed(run_seed)(dataset, config, seed, record_masks, keep_model) for seed in config.seeds)
    return Parallel(n_jobs=config.n_jobs)(jobs)


def evaluate_seeds_parallel(dataset, config):
    """
    Runs all seeds and returns their reports; the ablation runner hook.

    :rtype: list[EvalReport]
    """
    return [outcome["report"] for outcome in run_seeds(dataset, config)]


def aggregate(reports):
    """
    Mean and standard deviation of each metric over seeds.

    :param reports: Per-seed reports.
    :type reports: list[EvalReport]
    :return: Means, standard deviations and "mean ± std" strings keyed by metric.
    :rtype: tuple[dict, dict, dict]
    """
    if any(r is None for r in reports):
        raise ArgumentError("scoring needs ground-truth labels; the dataset has none")
    mean, std, summary = {}, {}, {}
    for name in METRIC_NAMES:
        values = np.array([getattr(r, name) for r in reports], dtype=np.float64)
        mean[name] = float(values.mean())
        std[name] = float(values.std())
        summary[name] = format_mean_std(mean[name], std[name])
    return mean, std, summary


def format_mean_std(mean, std):
    """
    Formats a metric the way result tables print it, e.g. "0.9083 ± 0.0656".

    :rtype: str
    """
    return f"{mean:.4f} ± {std:.4f}"


def results_document(kind, dataset_info, config, outcomes):
    """
    Assembles a ``results.json`` document.

    Without ground-truth labels every metric is None; the document still
    records the runs.

    :rtype: dict
    """
    reports = [o["report"] for o in outcomes]
    if any(r is None for r in reports):
        mean, std, summary = unscored(), unscored(), unscored()
    else:
        mean, std, summary = aggregate(reports)
    return {
        "schema_version": RESULTS_SCHEMA_VERSION,
        "kind": ExperimentKind(kind).value,
        "dataset": dataset_info,
        "config": config.to_dict(),
        "runs": [{"seed": int(o["seed"]), "metrics": o["report"].scores() if o["report"] is not None else unscored(),
                  "epochs_run": o["epochs_run"], "seconds": o["seconds"]} for o in outcomes],
        "mean": mean,
        "std": std,
        "summary": summary,
        "created_at": datetime.now(timezone.utc).isoformat(),
    }


def unscored():
    """
    :return: A metric block with every metric set to None.
    :rtype: dict
    """
    return {name: None for name in METRIC_NAMES}


def require_labels(dataset, command):
    """
    Checks that a dataset can be scored before any training starts.

    :raises ArgumentError: If the dataset has no ground-truth labels.
    """
    if dataset.labels is None:
        raise ArgumentError(f"{command} scores every cell; dataset {dataset.name} has no labels")


def metrics_row(reports, **columns):
    """
    Flattens per-seed reports into one table row of means and standard deviations.

    :rtype: dict
    """
    mean, std, summary = aggregate(reports)
    row = dict(columns)
    for name in METRIC_NAMES:
        row[f"{name}_mean"] = mean[name]
        row[f"{name}_std"] = std[name]
        row[name] = summary[name]
    return row


def concat_traces(outcomes):
    """
    :return: The traces of all seeds stacked, with a leading seed column.
    :rtype: pandas.DataFrame
    """
    return pd.concat([o["trace"] for o in outcomes], ignore_index=True)
