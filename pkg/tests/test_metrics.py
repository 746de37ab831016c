import itertools
import math
from collections import Counter

import numpy as np
import pytest

from gctsc import accuracy, evaluate, nmi, seeded_rng


def brute_accuracy(pred, gt):
    """Exhaustive max over label-to-label permutation mappings."""
    _, pi = np.unique(pred, return_inverse=True)
    _, gi = np.unique(gt, return_inverse=True)
    k = max(pi.max(), gi.max()) + 1
    best = 0
    for perm in itertools.permutations(range(k)):
        best = max(best, sum(1 for p, g in zip(pi, gi) if perm[p] == g))
    return best / len(pred)


def brute_nmi(pred, gt):
    """Plain-python plug-in mutual information over mean entropy."""
    N = len(pred)
    joint = Counter(zip(pred, gt))
    cp, cg = Counter(pred), Counter(gt)
    hp = -sum((c / N) * math.log(c / N) for c in cp.values())
    hg = -sum((c / N) * math.log(c / N) for c in cg.values())
    if hp == 0.0 and hg == 0.0:
        return 1.0
    if hp == 0.0 or hg == 0.0:
        return 0.0
    mi = sum(
        (c / N) * math.log((c / N) / ((cp[a] / N) * (cg[b] / N)))
        for (a, b), c in joint.items()
    )
    return mi / (0.5 * (hp + hg))


def test_accuracy_perfect():
    assert accuracy([0, 1, 2, 1], [0, 1, 2, 1]) == 1.0


def test_accuracy_absorbs_relabeling():
    gt = [0, 0, 1, 1, 2, 2]
    assert accuracy([2, 2, 0, 0, 1, 1], gt) == 1.0


def test_accuracy_independent_pair():
    assert accuracy([0, 0, 1, 1], [0, 1, 0, 1]) == 0.5
    assert brute_accuracy([0, 0, 1, 1], [0, 1, 0, 1]) == 0.5


def test_accuracy_rectangular_contingency():
    # more predicted clusters than classes: padding handles the extras
    assert accuracy([0, 1, 2], [0, 0, 1]) == pytest.approx(2 / 3)


def test_accuracy_length_mismatch():
    with pytest.raises(ValueError, match="mismatch"):
        accuracy([0, 1], [0, 1, 1])


def test_nmi_perfect_and_conventions():
    assert nmi([0, 1, 0, 1], [1, 0, 1, 0]) == pytest.approx(1.0, abs=1e-12)
    assert nmi([0, 0, 0], [0, 0, 0]) == 1.0          # both single-cluster
    assert nmi([0, 0, 0], [0, 1, 2]) == 0.0          # exactly one single-cluster
    assert nmi([0, 1, 2], [1, 1, 1]) == 0.0


def test_nmi_product_table_exactly_zero():
    assert nmi([0, 0, 1, 1], [0, 1, 0, 1]) == 0.0


def test_nmi_symmetric():
    rng = seeded_rng(0)
    for _ in range(20):
        p = rng.integers(0, 3, 12)
        g = rng.integers(0, 3, 12)
        assert nmi(p, g) == pytest.approx(nmi(g, p), abs=1e-12)


def test_metrics_invariant_to_relabeling():
    rng = seeded_rng(1)
    for _ in range(20):
        p = rng.integers(0, 3, 15)
        g = rng.integers(0, 3, 15)
        pmap = rng.permutation(3)
        gmap = rng.permutation(3)
        assert accuracy(pmap[p], gmap[g]) == accuracy(p, g)
        assert nmi(pmap[p], gmap[g]) == pytest.approx(nmi(p, g), abs=1e-12)


def test_accuracy_symmetric_for_equal_cluster_counts():
    rng = seeded_rng(2)
    for _ in range(20):
        p = rng.integers(0, 2, 10)
        g = rng.integers(0, 2, 10)
        if len(set(p.tolist())) == len(set(g.tolist())):
            assert accuracy(p, g) == accuracy(g, p)


def test_metrics_match_brute_force_random():
    rng = seeded_rng(3)
    for _ in range(200):
        N = int(rng.integers(2, 9))
        p = rng.integers(0, 3, N)
        g = rng.integers(0, 3, N)
        assert accuracy(p, g) == brute_accuracy(p, g)
        assert nmi(p, g) == pytest.approx(brute_nmi(p, g), abs=1e-12)


def test_evaluate_report():
    rep = evaluate([0, 0, 1, 1, 1], [5, 5, 9, 9, 5])
    assert rep.confusion.shape == (2, 2)
    assert rep.confusion.sum() == 5
    assert rep.mapping == {0: 5, 1: 9}
    assert rep.acc == pytest.approx(4 / 5)
    # accuracy equals the mapped-trace of the confusion matrix over N
    mapped = sum(
        rep.confusion[i, j]
        for i, pl in enumerate([0, 1])
        for j, gl in enumerate([5, 9])
        if rep.mapping[pl] == gl
    )
    assert rep.acc == mapped / 5
