"""Clustering accuracy under optimal label assignment, and normalized
mutual information with arithmetic-mean normalization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment


@dataclass
class MetricReport:
    """Scores plus the contingency evidence behind them.

    ``confusion`` is the k_pred x k_gt count matrix over the distinct
    labels actually present; ``mapping`` sends each predicted label to the
    ground-truth label chosen by the optimal assignment.
    """

    acc: float
    nmi: float
    confusion: np.ndarray
    mapping: dict[int, int]


def _check_pair(pred, gt) -> tuple[np.ndarray, np.ndarray]:
    pred = np.asarray(pred, dtype=np.int64).ravel()
    gt = np.asarray(gt, dtype=np.int64).ravel()
    if pred.shape != gt.shape:
        raise ValueError(f"label length mismatch: {pred.size} vs {gt.size}")
    if pred.size == 0:
        raise ValueError("need at least one label")
    return pred, gt


def _contingency(pred: np.ndarray, gt: np.ndarray):
    pl, pi = np.unique(pred, return_inverse=True)
    gl, gi = np.unique(gt, return_inverse=True)
    C = np.zeros((pl.size, gl.size), dtype=np.int64)
    np.add.at(C, (pi, gi), 1)
    return C, pl, gl


def accuracy(pred, gt) -> float:
    """Fraction of frames whose predicted cluster maps onto the true class
    under the best one-to-one label assignment (optimal bipartite matching
    on the contingency matrix, zero-padded to square)."""
    pred, gt = _check_pair(pred, gt)
    C, _, _ = _contingency(pred, gt)
    k = max(C.shape)
    padded = np.zeros((k, k), dtype=np.int64)
    padded[: C.shape[0], : C.shape[1]] = C
    rows, cols = linear_sum_assignment(padded, maximize=True)
    return float(padded[rows, cols].sum()) / pred.size


def nmi(pred, gt) -> float:
    """Mutual information over the mean of the two partition entropies.

    Entropies are plug-in estimates in nats with the 0 log 0 = 0
    convention.  If both partitions are a single cluster the score is 1;
    if exactly one is, the score is 0.
    """
    pred, gt = _check_pair(pred, gt)
    C, _, _ = _contingency(pred, gt)
    N = pred.size
    P = C / N
    pr = P.sum(axis=1)
    pc = P.sum(axis=0)
    h_pred = float(-(pr[pr > 0] * np.log(pr[pr > 0])).sum())
    h_gt = float(-(pc[pc > 0] * np.log(pc[pc > 0])).sum())
    if h_pred == 0.0 and h_gt == 0.0:
        return 1.0
    if h_pred == 0.0 or h_gt == 0.0:
        return 0.0
    nz = P > 0
    outer = pr[:, None] * pc[None, :]
    mi = float((P[nz] * np.log(P[nz] / outer[nz])).sum())
    return min(1.0, max(0.0, mi / (0.5 * (h_pred + h_gt))))


def evaluate(pred, gt) -> MetricReport:
    """Score a predicted labeling against ground truth."""
    pred, gt = _check_pair(pred, gt)
    C, pl, gl = _contingency(pred, gt)
    k = max(C.shape)
    padded = np.zeros((k, k), dtype=np.int64)
    padded[: C.shape[0], : C.shape[1]] = C
    rows, cols = linear_sum_assignment(padded, maximize=True)
    mapping = {
        int(pl[i]): int(gl[j])
        for i, j in zip(rows, cols)
        if i < C.shape[0] and j < C.shape[1]
    }
    acc = float(padded[rows, cols].sum()) / pred.size
    return MetricReport(acc=acc, nmi=nmi(pred, gt), confusion=C, mapping=mapping)
