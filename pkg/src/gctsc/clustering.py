"""Code affinity and normalized-cut spectral clustering of the frames."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import Segmentation, seeded_rng
from .graph import ZERO_COLUMN_EPS


@dataclass
class CodeAffinity:
    """Symmetric frame-by-frame affinity with entries in [0, 1] and unit
    diagonal, built from pairwise cosines of code vectors."""

    A: np.ndarray

    @property
    def N(self) -> int:
        return self.A.shape[0]


def code_affinity(Z: np.ndarray) -> CodeAffinity:
    """Pairwise cosine similarities of the code columns.

    All-zero columns (possible after optimization) are re-floored to a
    tiny uniform value with a warning so their direction stays defined.
    """
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim != 2 or Z.shape[1] < 2:
        raise ValueError("need a 2-D code matrix with at least two columns")
    dead = np.flatnonzero(~Z.any(axis=0))
    if dead.size:
        warnings.warn(
            f"{dead.size} all-zero code column(s) floored to {ZERO_COLUMN_EPS}",
            RuntimeWarning,
            stacklevel=2,
        )
        Z = Z.copy()
        Z[:, dead] = ZERO_COLUMN_EPS
    U = Z / np.linalg.norm(Z, axis=0)
    A = U.T @ U
    A = 0.5 * (A + A.T)
    np.clip(A, 0.0, 1.0, out=A)
    np.fill_diagonal(A, 1.0)
    return CodeAffinity(A=A)


def _farthest_point_centers(X: np.ndarray, k: int, first: int) -> np.ndarray:
    """Greedy farthest-point center indices, seeded at ``first``."""
    N = X.shape[0]
    centers = np.empty(k, dtype=np.int64)
    centers[0] = first
    d2 = ((X - X[first]) ** 2).sum(axis=1)
    for i in range(1, k):
        nxt = int(np.argmax(d2))  # ties resolve to the lowest index
        centers[i] = nxt
        d2 = np.minimum(d2, ((X - X[nxt]) ** 2).sum(axis=1))
    return centers


def _lloyd(X: np.ndarray, centers: np.ndarray, max_iter: int = 100) -> tuple[np.ndarray, float]:
    """Lloyd iterations from given centers; returns labels and WCSS."""
    k = centers.shape[0]
    C = X[centers].copy()
    labels = None
    for _ in range(max_iter):
        d2 = ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)
        new_labels = np.argmin(d2, axis=1)
        if labels is not None and np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(k):
            members = labels == j
            if members.any():
                C[j] = X[members].mean(axis=0)
            else:
                # revive an empty cluster at the point farthest from its center
                far = int(np.argmax(d2[np.arange(X.shape[0]), labels]))
                C[j] = X[far]
                labels[far] = j
    d2 = ((X - C[labels]) ** 2).sum(axis=1)
    return labels, float(d2.sum())


def _kmeans(X: np.ndarray, k: int, seed: int, restarts: int = 50) -> np.ndarray:
    """k-means with greedy farthest-point seeding and multiple restarts.

    The best within-cluster sum of squares wins; ties are broken by the
    lowest restart index (strict improvement required to replace).
    """
    rng = seeded_rng(seed)
    best_labels, best_wcss = None, np.inf
    for _ in range(restarts):
        first = int(rng.integers(X.shape[0]))
        labels, wcss = _lloyd(X, _farthest_point_centers(X, k, first))
        if wcss < best_wcss:
            best_labels, best_wcss = labels, wcss
    return best_labels


def _relabel_first_appearance(labels: np.ndarray) -> np.ndarray:
    """Rename cluster ids in order of first appearance (stable output)."""
    mapping: dict[int, int] = {}
    out = np.empty_like(labels)
    for i, lab in enumerate(labels):
        if lab not in mapping:
            mapping[lab] = len(mapping)
        out[i] = mapping[lab]
    return out


def normalized_cut(affinity: CodeAffinity | np.ndarray, k: int, seed: int = 0) -> Segmentation:
    """Spectral relaxation of the normalized cut, discretized by k-means.

    Forms the symmetric normalized Laplacian L = I - Dg^{-1/2} A Dg^{-1/2},
    takes the eigenvectors of its k smallest eigenvalues, row-normalizes
    the embedding, and clusters the rows with seeded k-means (50 restarts).
    Labels are renamed in order of first appearance.
    """
    A = affinity.A if isinstance(affinity, CodeAffinity) else np.asarray(affinity, dtype=np.float64)
    N = A.shape[0]
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("affinity must be square")
    if not 2 <= k <= N:
        raise ValueError(f"need 2 <= k <= N, got k={k}, N={N}")
    deg = A.sum(axis=1)
    isolated = np.flatnonzero(deg <= 0.0)
    if isolated.size:
        raise ValueError(f"vertex {int(isolated[0])} is isolated (zero degree)")
    dinv = 1.0 / np.sqrt(deg)
    L = np.eye(N) - dinv[:, None] * A * dinv[None, :]
    L = 0.5 * (L + L.T)
    eigvals, eigvecs = np.linalg.eigh(L)
    emb = eigvecs[:, :k]
    row_norms = np.linalg.norm(emb, axis=1)
    row_norms[row_norms == 0.0] = 1.0
    emb = emb / row_norms[:, None]
    labels = _relabel_first_appearance(_kmeans(emb, k, seed))
    return Segmentation.from_labels(labels, k=k)
