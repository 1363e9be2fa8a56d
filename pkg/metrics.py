"""
This module scores a clustering against ground-truth labels.

ACC and F1 use the cluster-to-class mapping that maximizes the number of
matched samples, solved exactly on the contingency matrix.
"""
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment
from sklearn.metrics import adjusted_rand_score, f1_score, normalized_mutual_info_score

from errors import ArgumentError

METRIC_NAMES = ("acc", "f1", "nmi", "ari")


@dataclass
class EvalReport:
    """
    The four external metrics of one clustering.

    :param acc: Clustering accuracy under the best mapping.
    :type acc: float
    :param f1: Macro F1 under the same mapping.
    :type f1: float
    :param nmi: Normalized mutual information (arithmetic normalization).
    :type nmi: float
    :param ari: Adjusted Rand index.
    :type ari: float
    :param mapping: Predicted cluster id -> class id.
    :type mapping: dict
    :param n: Number of samples scored.
    :type n: int
    """
    acc: float
    f1: float
    nmi: float
    ari: float
    mapping: dict
    n: int

    def scores(self):
        """
        :return: The four metrics keyed by name.
        :rtype: dict
        """
        return {name: getattr(self, name) for name in METRIC_NAMES}

    def to_dict(self):
        """
        :rtype: dict
        """
        data = asdict(self)
        data["mapping"] = {str(k): int(v) for k, v in self.mapping.items()}
        return data


def check_labels(truth, pred):
    """
    Validates a (truth, pred) pair and converts both to integer arrays.

    :raises ArgumentError: If the lengths differ or the pair is empty.
    :rtype: tuple[numpy.ndarray, numpy.ndarray]
    """
    truth = np.asarray(truth).ravel()
    pred = np.asarray(pred).ravel()
    if truth.shape != pred.shape:
        raise ArgumentError(f"truth and pred differ in length: {truth.size} vs {pred.size}")
    if truth.size == 0:
        raise ArgumentError("cannot score an empty clustering")
    return truth, pred


def best_mapping(truth, pred):
    """
    Finds the cluster-to-class mapping that maximizes matched samples.

    The contingency matrix is padded to a square with zero rows or columns
    when the cluster and class counts differ; clusters left without a class
    map to fresh ids that never match.

    :return: The mapping (original pred id -> original truth id or fresh id) and the matched count.
    :rtype: tuple[dict, int]
    """
    classes, truth_ids = np.unique(truth, return_inverse=True)
    clusters, pred_ids = np.unique(pred, return_inverse=True)
    size = max(len(classes), len(clusters))
    counts = np.zeros((size, size), dtype=np.int64)
    np.add.at(counts, (pred_ids, truth_ids), 1)
    rows, cols = linear_sum_assignment(counts, maximize=True)

    unused = iter(range(int(classes.max()) + 1 if np.issubdtype(classes.dtype, np.integer) else 0, 2 ** 62))
    mapping = {}
    for row, col in zip(rows, cols):
        if row >= len(clusters):
            continue
        mapping[clusters[row].item()] = classes[col].item() if col < len(classes) else next(unused)
    return mapping, int(counts[rows, cols].sum())


def clustering_accuracy(truth, pred):
    """
    Accuracy of the clustering under the best cluster-to-class mapping.

    :param truth: Ground-truth labels.
    :type truth: array-like
    :param pred: Predicted cluster ids.
    :type pred: array-like
    :return: The accuracy and the mapping used.
    :rtype: tuple[float, dict]
    """
    truth, pred = check_labels(truth, pred)
    mapping, matched = best_mapping(truth, pred)
    return matched / truth.size, mapping


def matched_f1(truth, pred):
    """
    Macro F1 over the true classes after applying the ACC mapping to pred.

    :rtype: float
    """
    truth, pred = check_labels(truth, pred)
    mapping, _ = best_mapping(truth, pred)
    mapped = np.array([mapping[p.item()] for p in pred])
    return float(f1_score(truth, mapped, labels=np.unique(truth), average="macro", zero_division=0))


def nmi(truth, pred):
    """
    Normalized mutual information with arithmetic-mean normalization.

    :rtype: float
    """
    truth, pred = check_labels(truth, pred)
    return float(normalized_mutual_info_score(truth, pred, average_method="arithmetic"))


def ari(truth, pred):
    """
    Adjusted Rand index.

    :rtype: float
    """
    truth, pred = check_labels(truth, pred)
    return float(adjusted_rand_score(truth, pred))


def evaluate(truth, pred) -> EvalReport:
    """
    Computes all four metrics on the same pair of labelings.

    :rtype: EvalReport
    """
    truth, pred = check_labels(truth, pred)
    acc, mapping = clustering_accuracy(truth, pred)
    return EvalReport(acc=acc, f1=matched_f1(truth, pred), nmi=nmi(truth, pred), ari=ari(truth, pred),
                      mapping=mapping, n=int(truth.size))
