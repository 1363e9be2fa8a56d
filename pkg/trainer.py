"""
This module runs the joint optimization loop.

Each epoch encodes the raw input, masks it, re-encodes the masked input,
computes the reconstruction and consistency losses, re-clusters the fused
embedding, computes the contrastive loss and takes one Adam step on the
weighted total. Training is full batch and deterministic for a given seed.
"""
import logging
import math
import time
from dataclasses import asdict, dataclass, field
from typing import NamedTuple

import numpy as np
import pandas as pd
import torch

from clustering import ClusterState, contrastive_loss, kmeans
from config import ExperimentConfig
from encoder import ViewBundle, encode_views
from errors import ArgumentError, NonFiniteError
from masking import (MaskSet, apply_mask, mask_change_rate, soft_mask_for_backward, straight_through,
                     threshold_mask)
from metrics import evaluate
from model import EMTCModel
from optimizer import AdamState, adam_step, cosine_lr
from reconstruction import inter_loss, intra_loss
from static_masks import StaticMaskPolicy, static_mask

logger = logging.getLogger(__name__)

TRACE_COLUMNS = ["epoch", "l_total", "l_contra", "l_intra", "l_inter", "acc", "nmi", "ari",
                 "mask_change", "seconds"]


@dataclass
class LossTerms:
    """
    The loss terms of one forward pass.
    """
    total: torch.Tensor
    contra: torch.Tensor
    intra: torch.Tensor
    inter: torch.Tensor

    def values(self):
        """
        :return: The terms as Python floats keyed l_total, l_contra, l_intra, l_inter.
        :rtype: dict
        """
        return {f"l_{name}": float(getattr(self, name).detach()) for name in ("total", "contra", "intra", "inter")}


@dataclass
class EpochRecord:
    """One row of the training trace."""
    epoch: int
    l_total: float
    l_contra: float
    l_intra: float
    l_inter: float
    acc: float = None
    nmi: float = None
    ari: float = None
    mask_change: float = 0.0
    seconds: float = 0.0


@dataclass
class TrainTrace:
    """
    Per-epoch records of a run, plus the mask dump when requested.
    """
    records: list = field(default_factory=list)
    mask_rows: list = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def losses(self):
        """
        :return: The total loss of every epoch.
        :rtype: list[float]
        """
        return [r.l_total for r in self.records]

    def to_frame(self):
        """
        :return: The trace as a DataFrame with the trace CSV columns.
        :rtype: pandas.DataFrame
        """
        return pd.DataFrame([asdict(r) for r in self.records], columns=TRACE_COLUMNS)


class TrainResult(NamedTuple):
    """The trained model, the final clustering, the trace and the optimizer state of a run."""
    model: EMTCModel
    clusters: ClusterState
    trace: TrainTrace
    optimizer: AdamState = None


def total_loss(l_contra, l_intra, l_inter, alpha, beta):
    """
    Weighted sum of the three loss terms.

    :return: l_contra + alpha * l_intra + beta * l_inter.
    """
    return l_contra + alpha * l_intra + beta * l_inter


def learning_rate_at(config: ExperimentConfig, epoch):
    """
    Learning rate of a zero-based epoch under the configured schedule.

    :rtype: float
    """
    if config.lr_schedule == "cosine":
        return cosine_lr(epoch, config.epochs, config.learning_rate)
    return config.learning_rate


def set_seed(seed):
    """
    Seeds torch for parameter initialization.
    """
    torch.manual_seed(seed)


def build_static_mask(dataset, config, seed):
    """
    Computes the fixed mask of a static policy, or None for the evolving policy.

    :rtype: torch.Tensor or None
    """
    if config.mask_policy == "evolving":
        return None
    policy = StaticMaskPolicy(config.mask_policy, config.keep_ratio, seed)
    return torch.as_tensor(static_mask(dataset.samples, policy), dtype=torch.float64)


def forward_views(model: EMTCModel, X, config: ExperimentConfig, static=None, soft_forward=False):
    """
    Runs the two-pass encoding: raw input, masks, then the masked input.

    With a static mask, or with IVM disabled, the first pass is skipped.

    :param model: The model.
    :type model: EMTCModel
    :param X: Input of shape (N, T, D).
    :type X: torch.Tensor
    :param config: The experiment configuration.
    :type config: ExperimentConfig
    :param static: A fixed (N, T) mask shared by all views, defaults to None.
    :type static: torch.Tensor, optional
    :param soft_forward: Use the sigmoid surrogate as the forward mask, defaults to False.
    :type soft_forward: bool, optional
    :return: The views of the masked input and the masks used.
    :rtype: tuple[ViewBundle, MaskSet]
    """
    n, T, _ = X.shape
    V = model.n_views
    if static is not None:
        masks = [static] * V
        masks_set = MaskSet([static] * V, masks, config.keep_ratio)
    elif not config.use_ivm:
        ones = X.new_ones(n, T)
        masks = [ones] * V
        masks_set = MaskSet([ones / T] * V, masks, 1.0)
    else:
        raw = encode_views(X, model.encoders)
        masks, importances, hards, thresholds = [], [], [], []
        for v in range(V):
            importance = model.attention.importance(v, raw[v], config.attention_chunk)
            hard, threshold = threshold_mask(importance, config.keep_ratio)
            # importance sits near 1/T; the surrogate works in multiples of the uniform share
            soft = soft_mask_for_backward(importance * T, threshold * T, config.sharpness)
            masks.append(soft if soft_forward else straight_through(hard, soft))
            importances.append(importance.detach())
            hards.append(hard)
            thresholds.append(threshold.detach())
        masks_set = MaskSet(importances, hards, config.keep_ratio, thresholds)

    views = [model.encoders.encode_view(v, apply_mask(X, masks[v])) for v in range(V)]
    return ViewBundle.from_views(views), masks_set


def loss_terms(model: EMTCModel, X, bundle: ViewBundle, labels, config: ExperimentConfig, seed: int) -> LossTerms:
    """
    Computes the loss terms, honoring the per-term switches.

    :param labels: Cluster ids of the fused embedding.
    :type labels: numpy.ndarray
    :param seed: Positive-sampling seed of the contrastive term.
    :type seed: int
    :rtype: LossTerms
    """
    zero = X.new_zeros(())
    intra = intra_loss(X, bundle.views, model.decoders) if config.use_intra else zero
    inter = inter_loss(bundle.views, model.transforms) if config.use_inter else zero
    contra = contrastive_loss(bundle.fused, labels, config.contrast(seed)) if config.use_contra else zero
    return LossTerms(total_loss(contra, intra, inter, config.alpha, config.beta), contra, intra, inter)


def check_finite(terms: LossTerms, epoch):
    """
    :raises NonFiniteError: If any term is NaN or infinite.
    """
    for name, value in terms.values().items():
        if not math.isfinite(value):
            raise NonFiniteError(f"epoch {epoch}: {name} is {value} ({terms.values()})")


def cluster_embedding(fused, g, config, seed, epoch):
    """
    Runs k-means on a detached copy of the fused embedding.

    :rtype: ClusterState
    """
    F = fused.detach().cpu().numpy()
    if not np.all(np.isfinite(F)):
        raise NonFiniteError(f"epoch {epoch}: fused embedding is not finite")
    state = kmeans(F, g, seed=seed, n_init=config.kmeans_restarts, max_iter=config.kmeans_max_iter)
    return state.with_epoch(epoch)


def train(dataset, config: ExperimentConfig, seed: int = None, record_masks=False) -> TrainResult:
    """
    Trains EMTC on a normalized dataset.

    Stops after ``config.epochs`` epochs or once the total loss changed by
    less than ``config.convergence_tol`` for ``config.patience`` consecutive
    epochs. The k-means seed of epoch e is ``seed + e``.

    :param dataset: The normalized dataset.
    :type dataset: TimeSeriesDataset
    :param config: The experiment configuration.
    :type config: ExperimentConfig
    :param seed: The run seed, defaults to the first configured seed.
    :type seed: int, optional
    :param record_masks: Keep every epoch's masks in the trace, defaults to False.
    :type record_masks: bool, optional
    :raises ArgumentError: If the cluster count is unknown or exceeds N.
    :raises NonFiniteError: If a loss term stops being finite.
    :rtype: TrainResult
    """
    seed = config.seeds[0] if seed is None else seed
    g = config.n_clusters or dataset.g_hint
    if g is None:
        raise ArgumentError("the number of clusters is unknown: the dataset has no labels and n_clusters is unset")
    if dataset.n_samples < g:
        raise ArgumentError(f"cannot form {g} clusters from {dataset.n_samples} samples")

    set_seed(seed)
    X = torch.as_tensor(np.array(dataset.samples), dtype=torch.float64)
    model = EMTCModel(dataset.n_dims, config)
    params = list(model.parameters())
    adam = AdamState.for_params(params)
    static = build_static_mask(dataset, config, seed)

    trace = TrainTrace()
    previous_masks = None
    previous_loss = None
    stable_epochs = 0
    for epoch in range(config.epochs):
        started = time.perf_counter()
        bundle, masks = forward_views(model, X, config, static)
        state = cluster_embedding(bundle.fused, g, config, seed + epoch, epoch)
        terms = loss_terms(model, X, bundle, state.labels, config, seed + epoch)
        check_finite(terms, epoch)

        for param in params:
            param.grad = None
        if terms.total.requires_grad:
            terms.total.backward()
            _, adam = adam_step(params, [p.grad for p in params], adam, learning_rate_at(config, epoch))

        record = EpochRecord(epoch=epoch + 1, **terms.values(),
                             mask_change=mask_change_rate(previous_masks, masks.masks))
        if dataset.labels is not None:
            report = evaluate(dataset.labels, state.labels)
            record.acc, record.nmi, record.ari = report.acc, report.nmi, report.ari
        record.seconds = time.perf_counter() - started
        trace.records.append(record)
        if record_masks:
            trace.mask_rows.extend(masks.rows(epoch + 1))
        previous_masks = masks.masks
        logger.debug("epoch finished", extra={"seed": seed, **asdict(record)})

        if previous_loss is not None and abs(record.l_total - previous_loss) < config.convergence_tol:
            stable_epochs += 1
            if stable_epochs >= config.patience:
                logger.info("loss plateaued", extra={"seed": seed, "epoch": epoch + 1})
                break
        else:
            stable_epochs = 0
        previous_loss = record.l_total

    with torch.no_grad():
        bundle, _ = forward_views(model, X, config, static)
    clusters = cluster_embedding(bundle.fused, g, config, seed + len(trace), len(trace))
    return TrainResult(model, clusters, trace, adam)


def embed(model: EMTCModel, dataset, config: ExperimentConfig, seed: int):
    """
    Computes the fused embedding of a dataset with a trained model.

    :return: The embedding of shape (N, d).
    :rtype: numpy.ndarray
    """
    X = torch.as_tensor(np.array(dataset.samples), dtype=torch.float64)
    with torch.no_grad():
        bundle, _ = forward_views(model, X, config, build_static_mask(dataset, config, seed))
    return bundle.fused.numpy()


ABLATION_CELLS = [
    ("EMTC", {}),
    ("w/o IVM", {"use_ivm": False}),
    ("w/o MEV", {"use_mev": False}),
    ("w/o IVM & MEV", {"use_ivm": False, "use_mev": False}),
]
LOSS_ABLATION_CELLS = [
    ("w/o L_intra", {"use_intra": False}),
    ("w/o L_inter", {"use_inter": False}),
    ("w/o L_contra", {"use_contra": False}),
]


def ablation_configs(base_config: ExperimentConfig, include_loss_terms=False):
    """
    Lists the ablation variants of a configuration in table order.

    :return: (variant name, configuration) pairs.
    :rtype: list[tuple[str, ExperimentConfig]]
    """
    cells = ABLATION_CELLS + (LOSS_ABLATION_CELLS if include_loss_terms else [])
    return [(name, base_config.with_overrides(**changes)) for name, changes in cells]


def run_ablation(dataset, base_config: ExperimentConfig, include_loss_terms=False, run=None):
    """
    Trains every ablation variant with the shared seed list.

    :param dataset: The normalized, labeled dataset.
    :type dataset: TimeSeriesDataset
    :param base_config: The full-model configuration.
    :type base_config: ExperimentConfig
    :param include_loss_terms: Add the per-loss-term rows, defaults to False.
    :type include_loss_terms: bool, optional
    :param run: Callable (dataset, config) -> list of per-seed EvalReports, defaults to sequential training.
    :type run: callable, optional
    :return: One row per variant with IVM/MEV flags and the per-seed reports.
    :rtype: list[dict]
    """
    run = run or evaluate_seeds
    table = []
    for name, config in ablation_configs(base_config, include_loss_terms):
        table.append({"variant": name, "ivm": config.use_ivm, "mev": config.use_mev,
                      "reports": run(dataset, config)})
    return table


def evaluate_seeds(dataset, config: ExperimentConfig):
    """
    Trains once per configured seed and scores the final clustering.

    :return: One EvalReport per seed, in seed order.
    :rtype: list[EvalReport]
    """
    return [evaluate(dataset.labels, train(dataset, config, seed).clusters.labels) for seed in config.seeds]
