"""Ground-truthed synthetic temporal union-of-subspaces sequences and
feature-level noise protocols for desk-scale experiments."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .core import FeatureSequence, normalize, seeded_rng

#: Per-block noise multipliers of the fixed staircase geometry.
STAIRCASE = (0.5, 1.0, 1.5, 2.0)


class NoiseMode(enum.Enum):
    NONE = "none"
    IID = "iid"
    PIECEWISE_FIXED = "piecewise-fixed"
    PIECEWISE_RANDOM = "piecewise-random"


@dataclass
class SynthSpec:
    """Recipe for a synthetic sequence: M subspaces of dimensions ``dim_m``
    in ambient dimension n, visited in the order given by
    ``segment_lengths`` (subspace id, length) pairs."""

    n: int
    M: int
    dim_m: list[int]
    segment_lengths: list[tuple[int, int]]
    noise_sigma: float = 0.0
    noise_mode: NoiseMode = NoiseMode.NONE
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("ambient dimension n must be at least 2")
        if self.M < 1:
            raise ValueError("need at least one subspace")
        if len(self.dim_m) != self.M:
            raise ValueError("dim_m must list one dimension per subspace")
        for d in self.dim_m:
            if not 0 < d < self.n:
                raise ValueError(f"subspace dimension {d} must satisfy 0 < d < n")
        if not self.segment_lengths:
            raise ValueError("segment_lengths must be non-empty")
        for sid, length in self.segment_lengths:
            if not 0 <= sid < self.M:
                raise ValueError(f"segment subspace id {sid} out of range")
            if length < 1:
                raise ValueError("segment lengths must be positive")
        if self.N < 2:
            raise ValueError("total sequence length must be at least 2")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")
        if not isinstance(self.noise_mode, NoiseMode):
            self.noise_mode = NoiseMode(self.noise_mode)

    @property
    def N(self) -> int:
        return sum(length for _, length in self.segment_lengths)


def _subspace_bases(spec: SynthSpec, rng: np.random.Generator) -> list[np.ndarray]:
    """One orthonormal nonnegative basis per subspace.

    Each basis vector lives on its own coordinate block (blocks disjoint
    within a subspace, so the basis is exactly orthonormal) with positive
    entries, and at least one ambient coordinate is left unused, so the
    generated data contains exact zeros and min-max normalization reduces
    to a pure rescale that preserves per-segment rank.
    """
    bases = []
    for d in spec.dim_m:
        block = max(1, (spec.n - 1) // (2 * d))
        perm = rng.permutation(spec.n)
        B = np.zeros((spec.n, d))
        for i in range(d):
            support = perm[i * block : (i + 1) * block]
            values = rng.uniform(0.2, 1.0, size=support.size)
            B[support, i] = values / np.linalg.norm(values)
        bases.append(B)
    return bases


def generate(spec: SynthSpec) -> FeatureSequence:
    """Sample a labeled sequence from the union-of-subspaces model.

    Frames are nonnegative combinations of their subspace basis with
    coefficients drawn uniformly from [0.2, 1], then globally rescaled
    into [0, 1].  Deterministic for a fixed seed.
    """
    rng = seeded_rng(spec.seed)
    bases = _subspace_bases(spec, rng)
    columns = []
    labels = []
    for sid, length in spec.segment_lengths:
        coeffs = rng.uniform(0.2, 1.0, size=(spec.dim_m[sid], length))
        columns.append(bases[sid] @ coeffs)
        labels.extend([sid] * length)
    X = normalize(np.concatenate(columns, axis=1))
    name = f"synth-M{spec.M}-n{spec.n}-N{spec.N}-seed{spec.seed}"
    return FeatureSequence(features=X, labels=np.asarray(labels), name=name)


def sample_noise(spec: SynthSpec, n: int, N: int) -> np.ndarray:
    """Draw the (pre-clip) additive perturbation field for ``add_noise``.

    iid: N(0, sigma^2) everywhere.  piecewise-fixed: the feature axis is
    split into four contiguous blocks scaled by the staircase multipliers,
    identically for every frame.  piecewise-random: the block boundaries
    are redrawn per frame, emulating bursty feature noise.
    """
    if spec.noise_mode is NoiseMode.NONE:
        raise ValueError("noise_mode is none; nothing to sample")
    if spec.noise_sigma < 0:
        raise ValueError("noise_sigma must be nonnegative")
    rng = seeded_rng(spec.seed, stream=1)
    base = rng.standard_normal((n, N))
    if spec.noise_mode is NoiseMode.IID:
        scale = np.ones((n, N))
    elif spec.noise_mode is NoiseMode.PIECEWISE_FIXED:
        scale = np.empty((n, N))
        for mult, rows in zip(STAIRCASE, np.array_split(np.arange(n), len(STAIRCASE))):
            scale[rows, :] = mult
    else:  # PIECEWISE_RANDOM
        if n < len(STAIRCASE):
            raise ValueError(f"piecewise noise needs n >= {len(STAIRCASE)}")
        scale = np.empty((n, N))
        for t in range(N):
            cuts = np.sort(rng.choice(np.arange(1, n), size=len(STAIRCASE) - 1, replace=False))
            bounds = np.concatenate(([0], cuts, [n]))
            for mult, lo, hi in zip(STAIRCASE, bounds[:-1], bounds[1:]):
                scale[lo:hi, t] = mult
    return spec.noise_sigma * scale * base


def add_noise(fs: FeatureSequence, spec: SynthSpec) -> FeatureSequence:
    """Perturb a sequence with the spec's noise protocol and re-clip to [0, 1].

    Labels are untouched; a zero noise level returns an identical copy.
    """
    if spec.noise_mode is NoiseMode.NONE:
        raise ValueError("noise_mode is none; nothing to add")
    if spec.noise_sigma < 0:
        raise ValueError("noise_sigma must be nonnegative")
    if spec.noise_sigma == 0.0:
        return FeatureSequence(fs.features.copy(), fs.labels, fs.name)
    pert = sample_noise(spec, fs.n, fs.N)
    noisy = np.clip(fs.features + pert, 0.0, 1.0)
    return FeatureSequence(noisy, fs.labels, fs.name)
