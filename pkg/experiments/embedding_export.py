"""
This module exports the fused embedding as a plot-ready 2-D table.

The default projection is PCA, which is deterministic; t-SNE is available
for qualitative figures.
"""
import logging

import numpy as np
import pandas as pd
from sklearn.decomposition import PCA
from sklearn.manifold import TSNE

from clustering import kmeans
from config import ExperimentConfig
from data_manager import DataManager
from errors import ArgumentError
from experiments.manifest import run_seed
from model import EMTCModel
from trainer import embed

logger = logging.getLogger(__name__)

EMBEDDING_FILE = "embedding.csv"
PROJECTIONS = ("pca", "tsne")


def project(F, method="pca", seed=0):
    """
    Projects an embedding to two dimensions.

    :param F: The embedding of shape (N, d).
    :type F: numpy.ndarray
    :param method: "pca" or "tsne", defaults to "pca".
    :type method: str, optional
    :param seed: The t-SNE random state, defaults to 0.
    :type seed: int, optional
    :return: Coordinates of shape (N, 2).
    :rtype: numpy.ndarray
    """
    if method not in PROJECTIONS:
        raise ArgumentError(f"projection must be one of {', '.join(PROJECTIONS)}, got {method!r}")
    F = np.asarray(F, dtype=np.float64)
    if F.shape[1] < 2:
        F = np.hstack([F, np.zeros((F.shape[0], 2 - F.shape[1]))])
    if method == "pca":
        return PCA(n_components=2, svd_solver="full").fit_transform(F)
    perplexity = min(30.0, max(1.0, F.shape[0] - 1.0))
    return TSNE(n_components=2, perplexity=perplexity, init="pca", random_state=seed).fit_transform(F)


def load_trained(checkpoint):
    """
    Rebuilds a model and its configuration from a checkpoint file.

    :rtype: tuple[EMTCModel, ExperimentConfig]
    """
    state = DataManager.load_checkpoint(checkpoint)
    config = ExperimentConfig.from_dict(state["config"])
    model = EMTCModel(state["input_dim"], config)
    model.load_state_dict(state["state_dict"])
    return model, config


def embedding_frame(coords, clusters, labels=None):
    """
    :return: The table with columns x, y, cluster and label (empty when unlabeled).
    :rtype: pandas.DataFrame
    """
    return pd.DataFrame({
        "x": coords[:, 0],
        "y": coords[:, 1],
        "cluster": np.asarray(clusters, dtype=np.int64),
        "label": pd.array(labels if labels is not None else [None] * len(clusters), dtype="Int64"),
    })


def cmd_export_embedding(manifest, projection="pca", checkpoint=None):
    """
    Writes ``embedding.csv`` for the first configured seed.

    With a checkpoint the stored model is reused and the embedding is
    clustered once; otherwise a fresh run is trained.

    :param manifest: The run manifest.
    :type manifest: RunManifest
    :param projection: "pca" or "tsne", defaults to "pca".
    :type projection: str, optional
    :param checkpoint: A checkpoint written by ``run --save-checkpoint``, defaults to None.
    :type checkpoint: str, optional
    :return: The exported table.
    :rtype: pandas.DataFrame
    """
    dataset = manifest.load_dataset()
    seed = manifest.config.seeds[0]
    if checkpoint is not None:
        model, config = load_trained(checkpoint)
        if model.input_dim != dataset.n_dims:
            raise ArgumentError(f"checkpoint expects D={model.input_dim}, dataset has D={dataset.n_dims}")
        F = embed(model, dataset, config, seed)
        g = config.n_clusters or dataset.g_hint
        if g is None:
            raise ArgumentError("the number of clusters is unknown: the dataset has no labels and n_clusters is unset")
        clusters = kmeans(F, g, seed=seed, n_init=config.kmeans_restarts, max_iter=config.kmeans_max_iter).labels
    else:
        outcome = run_seed(dataset, manifest.config, seed, keep_model=True)
        F = embed(outcome["model"], dataset, manifest.config, seed)
        clusters = outcome["labels"]

    table = embedding_frame(project(F, projection, seed), clusters, dataset.labels)
    DataManager.save_frame(manifest.path(EMBEDDING_FILE), table)
    logger.info("embedding exported", extra={"dataset": dataset.name, "projection": projection,
                                             "rows": len(table)})
    return table
