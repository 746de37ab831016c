"""Pairwise-similarity graphs and the cross-entropy alignment loss.

The graph over a feature matrix X (columns = frames) has edge weights
``w_kj = exp(-(1 - cos(x_k, x_j)) / h)`` for k != j, normalized to unit
total weight so the matrix is a joint distribution over vertex pairs.
The loss between the input graph and the graph of a candidate matrix is
the cross entropy of the two distributions; its gradient with respect to
the candidate matrix is available in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Columns that collapse to all zeros during optimization are re-floored
#: to this value so their direction stays defined.
ZERO_COLUMN_EPS = 1e-8


@dataclass
class AffinityGraph:
    """Normalized pairwise-similarity matrix: symmetric, zero diagonal,
    nonnegative entries summing to one."""

    P: np.ndarray
    h: float

    @property
    def N(self) -> int:
        return self.P.shape[0]


def cosine_sim(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity a.b / (|a||b|); raises on zero vectors."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        raise ValueError("cosine similarity undefined for a zero vector")
    return float(np.clip(a @ b / (na * nb), -1.0, 1.0))


def _unit_columns(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Column-normalize X, erroring on zero-norm columns."""
    norms = np.linalg.norm(X, axis=0)
    bad = np.flatnonzero(norms == 0.0)
    if bad.size:
        raise ValueError(f"column {bad[0]} has zero norm; direction undefined")
    return X / norms, norms


def _cosine_matrix(X: np.ndarray) -> np.ndarray:
    """All pairwise column cosines; symmetrized exactly, clipped to [-1, 1]."""
    U, _ = _unit_columns(X)
    C = U.T @ U
    C = 0.5 * (C + C.T)
    np.clip(C, -1.0, 1.0, out=C)
    return C


def _log_weights(C: np.ndarray, h: float) -> tuple[np.ndarray, float]:
    """Log edge weights (diagonal = -inf) and their off-diagonal logsumexp."""
    E = (C - 1.0) / h
    np.fill_diagonal(E, -np.inf)
    m = E.max()
    lse = m + np.log(np.exp(E - m).sum())
    return E, lse


def build_affinity(X: np.ndarray, h: float) -> AffinityGraph:
    """Build the normalized similarity graph of a feature matrix.

    The maximum exponent is subtracted before exponentiation (the
    normalization is invariant to that shift), so the construction is
    safe for small bandwidths.

    Parameters
    ----------
    X : (n, N) array with nonzero columns.
    h : positive bandwidth of the exponential kernel.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] < 2:
        raise ValueError("need a 2-D matrix with at least two columns")
    if h <= 0:
        raise ValueError("bandwidth h must be positive")
    C = _cosine_matrix(X)
    E, lse = _log_weights(C, h)
    P = np.exp(E - lse)
    np.fill_diagonal(P, 0.0)
    P /= P.sum()
    return AffinityGraph(P=P, h=float(h))


def graph_entropy(g: AffinityGraph) -> float:
    """Shannon entropy of the edge distribution, in nats."""
    P = g.P
    mask = P > 0
    return float(-(P[mask] * np.log(P[mask])).sum())


def graph_loss(g0: AffinityGraph, Xtilde: np.ndarray, h: float | None = None) -> float:
    """Cross entropy between ``g0`` and the graph of ``Xtilde``, in nats.

    Evaluated in the numerically stable closed form
    ``sum(P0 * (1 - C)) / h + logsumexp(-(1 - C) / h)`` where C holds the
    pairwise cosines of ``Xtilde``; see :func:`graph_loss_direct` for the
    literal definition-level evaluation.
    """
    if h is None:
        h = g0.h
    C = _cosine_matrix(np.asarray(Xtilde, dtype=np.float64))
    if C.shape != g0.P.shape:
        raise ValueError("Xtilde frame count does not match the graph")
    _, lse = _log_weights(C, h)
    return float((g0.P * (1.0 - C)).sum() / h + lse)


def graph_loss_direct(
    g0: AffinityGraph,
    Xtilde: np.ndarray,
    h: float | None = None,
    epsilon_log: float = 1e-300,
) -> float:
    """Cross entropy evaluated directly as ``-sum(P0 * log(P))``.

    ``epsilon_log`` floors the probabilities inside the logarithm to keep
    the sum finite when entries underflow.  Used as the secondary
    evaluation route; :func:`graph_loss` is the primary one.
    """
    if h is None:
        h = g0.h
    P = build_affinity(np.asarray(Xtilde, dtype=np.float64), h).P
    off = ~np.eye(P.shape[0], dtype=bool)
    return float(-(g0.P[off] * np.log(np.maximum(P[off], epsilon_log))).sum())


def graph_loss_grad(
    g0: AffinityGraph, Xtilde: np.ndarray, h: float | None = None
) -> np.ndarray:
    """Analytic gradient of :func:`graph_loss` with respect to ``Xtilde``.

    With cosines c_kj and graph P of ``Xtilde``, the loss derivative per
    pair is ``(P - P0)_kj / h``; the chain rule through the cosine of
    column k against column j contributes
    ``(u_j - c_kj u_k) / |x_k|`` with u the unit columns.  Both
    orientations of every pair are accumulated.
    """
    if h is None:
        h = g0.h
    X = np.asarray(Xtilde, dtype=np.float64)
    U, norms = _unit_columns(X)
    C = U.T @ U
    C = 0.5 * (C + C.T)
    np.clip(C, -1.0, 1.0, out=C)
    E, lse = _log_weights(C, h)
    P = np.exp(E - lse)
    np.fill_diagonal(P, 0.0)
    P /= P.sum()

    S = 2.0 * (P - g0.P) / h          # symmetric, zero diagonal
    A = U @ S
    b = (S * C).sum(axis=1)
    return (A - U * b[None, :]) / norms[None, :]
