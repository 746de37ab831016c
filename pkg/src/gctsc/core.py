"""Shared domain types, solver configuration and deterministic randomness."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

#: Mask used to fold arbitrary integer seeds into the generator's key space.
_SEED_MASK = (1 << 64) - 1


class SolverMode(enum.Enum):
    """Model variant selector.

    FULL runs the complete model (auxiliary data + graph loss).
    TSC_ABLATION pins the auxiliary data to the input and disconnects the
    graph path entirely, recovering the plain dictionary/code model.
    """

    FULL = "full"
    TSC_ABLATION = "tsc-ablation"


def normalize(X: np.ndarray) -> np.ndarray:
    """Affinely rescale a matrix into [0, 1] using its global min and max.

    The map is global (one min/max over all entries), so relative scales
    between features are preserved; it is idempotent on matrices that
    already span [0, 1].

    Raises
    ------
    ValueError
        If the matrix has non-finite entries or zero range (all entries
        equal).
    """
    X = np.asarray(X, dtype=np.float64)
    if not np.all(np.isfinite(X)):
        raise ValueError("normalize: matrix contains non-finite entries")
    lo = float(X.min())
    hi = float(X.max())
    if hi == lo:
        raise ValueError("normalize: constant matrix has zero range")
    return (X - lo) / (hi - lo)


def seeded_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Deterministic random source: PCG64 keyed by ``(seed, stream)``.

    The generator algorithm is pinned to PCG64 so identical seeds produce
    identical streams across runs and platforms.  ``stream`` derives
    independent substreams from one seed (e.g. data vs. noise draws).
    """
    key = np.random.SeedSequence((int(seed) & _SEED_MASK, int(stream)))
    return np.random.Generator(np.random.PCG64(key))


@dataclass
class FeatureSequence:
    """A feature matrix over time: ``features`` is n x N (feature dimension
    by time steps), ``labels`` an optional per-frame class id sequence."""

    features: np.ndarray
    labels: np.ndarray | None = None
    name: str = ""

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        n, N = self.features.shape
        if n < 1 or N < 2:
            raise ValueError(f"need n >= 1 and N >= 2, got {n} x {N}")
        if not np.all(np.isfinite(self.features)):
            raise ValueError("features contain non-finite entries")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (N,):
                raise ValueError(
                    f"labels length {self.labels.shape} does not match N={N}"
                )

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def N(self) -> int:
        return self.features.shape[1]

    def normalized(self) -> "FeatureSequence":
        """Return a copy whose features are min-max rescaled into [0, 1]."""
        return FeatureSequence(normalize(self.features), self.labels, self.name)


@dataclass
class SolverConfig:
    """Hyperparameters of the joint representation/dictionary/code solver.

    lambda0 weighs data fidelity, lambda1 the Frobenius (block-diagonal)
    code penalty, lambda2 the temporal-Laplacian smoothness; rho is the
    splitting penalty, h the similarity bandwidth, r the number of
    dictionary atoms and s the temporal half-window.
    """

    lambda0: float = 0.25
    lambda1: float = 0.004
    lambda2: float = 10.0
    rho: float = 1.0
    h: float = 0.0015
    r: int = 8
    s: int = 7
    max_outer_iters: int = 150
    inner_gd_iters: int = 20
    inner_gd_step: float = 1e-2
    tol: float = 1e-4
    mode: SolverMode = SolverMode.FULL
    seed: int = 0
    epsilon_log: float = 1e-300

    def __post_init__(self):
        if self.lambda0 < 0 or self.lambda1 < 0 or self.lambda2 < 0:
            raise ValueError("regularization weights must be nonnegative")
        if self.rho <= 0:
            raise ValueError("rho must be positive")
        if self.h <= 0:
            raise ValueError("h must be positive")
        if self.r < 1:
            raise ValueError("r must be a positive integer")
        if self.s < 1:
            raise ValueError("s must be a positive integer")
        if self.max_outer_iters < 0:
            raise ValueError("max_outer_iters must be nonnegative")
        if self.inner_gd_iters < 1:
            raise ValueError("inner_gd_iters must be a positive integer")
        if self.inner_gd_step <= 0:
            raise ValueError("inner_gd_step must be positive")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.epsilon_log <= 0:
            raise ValueError("epsilon_log must be positive")
        if not isinstance(self.mode, SolverMode):
            self.mode = SolverMode(self.mode)


@dataclass
class IterationStats:
    """Per-iteration solver diagnostics."""

    iteration: int
    objective: float
    graph_loss: float
    gap_fro: float          # ||Y - Xtilde||_F
    gap_inf: float          # ||Y - Xtilde||_inf (max norm)
    dict_gap_fro: float     # ||U - D||_F
    code_gap_fro: float     # ||V - Z||_F
    sylvester_residual: float
    step_warning: bool = False


@dataclass
class SolverState:
    """All solver variables plus the diagnostics trace.

    Owned by a single fit invocation; the inspection hook receives it
    read-only after each outer iteration.
    """

    Xtilde: np.ndarray
    Y: np.ndarray
    U: np.ndarray
    V: np.ndarray
    D: np.ndarray
    Z: np.ndarray
    LambdaXtilde: np.ndarray
    LambdaU: np.ndarray
    LambdaV: np.ndarray
    iteration: int = 0
    diagnostics: list[IterationStats] = field(default_factory=list)


@dataclass
class Segmentation:
    """Per-frame cluster ids plus the derived contiguous segments.

    ``segments`` is an ordered list of (start, end_inclusive, cluster_id)
    triples that partitions [0, N-1] with no gaps or overlaps.
    """

    labels: np.ndarray
    segments: list[tuple[int, int, int]]
    k: int

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        N = self.labels.shape[0]
        pos = 0
        for start, end, cid in self.segments:
            if start != pos or end < start:
                raise ValueError("segments do not tile the sequence contiguously")
            if not np.all(self.labels[start : end + 1] == cid):
                raise ValueError("segment cluster id disagrees with labels")
            pos = end + 1
        if pos != N:
            raise ValueError("segments do not cover the full sequence")

    @classmethod
    def from_labels(cls, labels: np.ndarray, k: int | None = None) -> "Segmentation":
        """Build a segmentation by run-length encoding a label sequence."""
        labels = np.asarray(labels, dtype=np.int64)
        if labels.ndim != 1 or labels.size == 0:
            raise ValueError("labels must be a non-empty 1-D sequence")
        boundaries = np.flatnonzero(np.diff(labels)) + 1
        starts = np.concatenate(([0], boundaries))
        ends = np.concatenate((boundaries - 1, [labels.size - 1]))
        segments = [(int(a), int(b), int(labels[a])) for a, b in zip(starts, ends)]
        if k is None:
            k = int(np.unique(labels).size)
        return cls(labels=labels, segments=segments, k=k)
