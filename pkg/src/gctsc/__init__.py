"""Graph-constrained temporal subspace clustering.

Learns an auxiliary data representation, a nonnegative dictionary and a
coding matrix jointly by alternating minimization, keeping the
similarity graph of the learned representation aligned with the graph
of the input, then segments the sequence by normalized-cut spectral
clustering of the code affinity.
"""

from .admm import (
    FitResult,
    NumericalError,
    TemporalLaplacian,
    build_temporal_laplacian,
    fit,
)
from .clustering import CodeAffinity, code_affinity, normalized_cut
from .core import (
    FeatureSequence,
    IterationStats,
    Segmentation,
    SolverConfig,
    SolverMode,
    SolverState,
    normalize,
    seeded_rng,
)
from .estimator import GraphConstrainedTemporalClustering
from .graph import (
    AffinityGraph,
    build_affinity,
    cosine_sim,
    graph_entropy,
    graph_loss,
    graph_loss_direct,
    graph_loss_grad,
)
from .metrics import MetricReport, accuracy, evaluate, nmi
from .synth import NoiseMode, SynthSpec, add_noise, generate, sample_noise

__version__ = "0.1.0"

__all__ = [
    "AffinityGraph",
    "CodeAffinity",
    "FeatureSequence",
    "FitResult",
    "GraphConstrainedTemporalClustering",
    "IterationStats",
    "MetricReport",
    "NoiseMode",
    "NumericalError",
    "Segmentation",
    "SolverConfig",
    "SolverMode",
    "SolverState",
    "SynthSpec",
    "TemporalLaplacian",
    "accuracy",
    "add_noise",
    "build_affinity",
    "build_temporal_laplacian",
    "code_affinity",
    "cosine_sim",
    "evaluate",
    "fit",
    "generate",
    "graph_entropy",
    "graph_loss",
    "graph_loss_direct",
    "graph_loss_grad",
    "nmi",
    "normalize",
    "normalized_cut",
    "sample_noise",
    "seeded_rng",
]
