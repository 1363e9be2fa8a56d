"""
This module measures training time on synthetic data while one of D, T or N
varies and the other two stay at the base point.
"""
import logging
import math
from dataclasses import replace

import numpy as np
import pandas as pd
from tqdm import tqdm

from data_manager import DataManager
from errors import ArgumentError
from synthetic import SyntheticSpec
from time_series import znormalize
from trainer import train

logger = logging.getLogger(__name__)

TIMING_FILE = "timing.csv"
TIMING_COLUMNS = ["axis", "N", "T", "D", "epochs", "seconds_per_epoch", "total_seconds", "ratio"]
AXES = ("D", "T", "N")


def grid_points(base: SyntheticSpec, grids):
    """
    Expands the per-axis grids into synthetic specs, one axis varied at a time.

    N is rounded up to a multiple of the cluster count.

    :param base: The spec the unvaried axes are taken from.
    :type base: SyntheticSpec
    :param grids: Axis name -> list of values; missing or None axes are skipped.
    :type grids: dict
    :return: (axis, spec) pairs in axis order D, T, N.
    :rtype: list[tuple[str, SyntheticSpec]]
    """
    points = []
    for axis in AXES:
        for value in grids.get(axis) or []:
            if value <= 0:
                raise ArgumentError(f"grid values must be positive, got {axis}={value}")
            if axis == "N":
                spec = replace(base, n_per_cluster=max(1, math.ceil(value / base.g)))
            else:
                spec = replace(base, **{axis: value})
            points.append((axis, spec))
    return points


def time_point(spec: SyntheticSpec, config, seed):
    """
    Trains once on a synthetic spec and reports the timings.

    :return: N, T, D, epochs run, mean seconds per epoch and total seconds.
    :rtype: dict
    """
    dataset = znormalize(spec.build())
    result = train(dataset, config, seed)
    seconds = np.array([r.seconds for r in result.trace.records])
    return {"N": dataset.n_samples, "T": dataset.length, "D": dataset.n_dims, "epochs": len(seconds),
            "seconds_per_epoch": float(seconds.mean()) if len(seconds) else 0.0,
            "total_seconds": float(seconds.sum())}


def cmd_scaling(manifest, grid_N=None, grid_T=None, grid_D=None):
    """
    Runs the scaling grid and writes ``timing.csv``.

    ``ratio`` is the per-epoch time relative to the previous point on the
    same axis, empty for the first point.

    :param manifest: The run manifest; its synthetic spec is the base point.
    :type manifest: RunManifest
    :return: The timing table.
    :rtype: pandas.DataFrame
    """
    base = manifest.synthetic or SyntheticSpec()
    points = grid_points(base, {"N": grid_N, "T": grid_T, "D": grid_D})
    if not points:
        raise ArgumentError("the scaling grid is empty; give at least one of --grid-N, --grid-T, --grid-D")
    config = manifest.config
    seed = config.seeds[0]

    rows = []
    previous = {}
    for axis, spec in tqdm(points, desc="scaling", unit="point"):
        row = {"axis": axis, **time_point(spec, config, seed)}
        before = previous.get(axis)
        row["ratio"] = row["seconds_per_epoch"] / before if before else float("nan")
        previous[axis] = row["seconds_per_epoch"]
        logger.info("scaling point", extra=row)
        rows.append(row)

    table = pd.DataFrame(rows, columns=TIMING_COLUMNS)
    DataManager.save_frame(manifest.path(TIMING_FILE), table)
    return table
