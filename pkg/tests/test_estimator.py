import numpy as np
import pytest
from sklearn.base import clone

from gctsc import (
    GraphConstrainedTemporalClustering,
    SolverConfig,
    SynthSpec,
    code_affinity,
    evaluate,
    fit,
    generate,
    normalized_cut,
)


@pytest.fixture(scope="module")
def sequence():
    spec = SynthSpec(n=20, M=2, dim_m=[2, 2], segment_lengths=[(0, 20), (1, 20)], seed=1)
    return generate(spec)


def test_fit_predict_recovers_segments(sequence):
    est = GraphConstrainedTemporalClustering(n_clusters=2, max_iter=40, random_state=0)
    labels = est.fit_predict(sequence.features.T)
    assert labels.shape == (40,)
    assert evaluate(labels, sequence.labels).nmi == pytest.approx(1.0)
    assert est.segments_[0][0] == 0
    assert est.n_iter_ > 0
    assert est.dictionary_.shape == (20, 4)
    assert est.codes_.shape == (4, 40)
    assert est.affinity_matrix_.shape == (40, 40)


def test_estimator_matches_functional_pipeline(sequence):
    est = GraphConstrainedTemporalClustering(n_clusters=2, max_iter=25, random_state=3)
    est.fit(sequence.features.T)
    cfg = SolverConfig(r=4, s=7, max_outer_iters=25, seed=3)
    result = fit(sequence, cfg)
    seg = normalized_cut(code_affinity(result.Z), 2, seed=3)
    assert np.array_equal(est.labels_, seg.labels)
    assert np.array_equal(est.codes_, result.Z)


def test_estimator_ablation_flag(sequence):
    est = GraphConstrainedTemporalClustering(
        n_clusters=2, max_iter=20, random_state=0, ablation=True
    )
    est.fit(sequence.features.T)
    # ablation pins the auxiliary data to the (normalized) input
    assert np.array_equal(est.auxiliary_, sequence.features)


def test_estimator_sklearn_contract(sequence):
    est = GraphConstrainedTemporalClustering(n_clusters=2, lambda2=5.0)
    cloned = clone(est)
    assert cloned.get_params()["lambda2"] == 5.0
    cloned.set_params(n_atoms=6, max_iter=15)
    labels = cloned.fit_predict(sequence.features.T)
    assert cloned.dictionary_.shape[1] == 6
    assert labels.shape == (40,)


def test_estimator_rejects_bad_input():
    est = GraphConstrainedTemporalClustering(n_clusters=2)
    with pytest.raises(ValueError):
        est.fit(np.array([[np.nan, 1.0], [0.0, 1.0]]))


def test_estimator_normalize_input_flag(sequence):
    X = sequence.features.T * 0.5  # already in [0, 1] but not spanning it
    est = GraphConstrainedTemporalClustering(
        n_clusters=2, max_iter=10, random_state=0, normalize_input=False
    )
    est.fit(X)
    assert est.labels_.shape == (40,)
