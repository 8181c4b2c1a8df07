import numpy as np
import pytest

from tsdiv.classify import (GAMMA_GRID, BudgetExceeded, Deadline, accuracy, centroid_predict,
                            fit_centroids, knn_predict, pairwise, select_gamma, self_terms,
                            stratified_split, vote)
from tsdiv.dataio import LabeledDataset
from tsdiv.divergences import DivergenceKind, divergence
from tsdiv.errors import InputError, ParameterError

KINDS = ["euclidean", "dtw", "sdtw", "sdtw_div", "sharp", "sharp_div", "mean_cost", "mean_cost_div"]


def _k(tag, gamma=None):
    return DivergenceKind.parse(tag, gamma)


def _toy():
    return LabeledDataset([np.array([[0.0], [0.0]]), np.array([[5.0], [5.0]])], [0, 1])


def _synthetic(rng, per_class=6, n=16):
    t = np.linspace(0, 2 * np.pi, n)
    series, labels = [], []
    for label, f in enumerate([np.sin, np.cos, lambda x: np.sign(np.sin(x))]):
        for _ in range(per_class):
            series.append((f(t + 0.2 * rng.normal()) + 0.1 * rng.normal(size=n))[:, None])
            labels.append(label)
    return LabeledDataset(series, labels, "synthetic")


@pytest.mark.parametrize("tag", KINDS)
def test_toy_nearest_neighbor(tag):
    assert knn_predict(_toy(), [np.array([[0.1], [0.2]])], _k(tag)) == [0]


def test_vote_tie_breaks():
    labels = [3, 1, 3, 1]
    # two votes each, label 1 has the smaller summed distance
    assert vote(np.array([0.1, 0.2, 0.5, 0.3]), labels, 4) == 1
    # equal counts and sums: smaller label wins
    assert vote(np.array([0.1, 0.1, 0.2, 0.2]), labels, 4) == 1
    assert vote(np.array([0.1, 0.2, 0.5, 0.3]), labels, 1) == 3


def test_knn_errors():
    with pytest.raises(InputError):
        knn_predict(LabeledDataset([], []), [np.zeros((2, 1))], _k("sdtw"))
    with pytest.raises(ParameterError):
        knn_predict(_toy(), [np.zeros((2, 1))], _k("sdtw"), k=0)


def test_pairwise_matches_direct_evaluation(rng):
    A = [rng.normal(size=(int(rng.integers(3, 8)), 1)) for _ in range(4)]
    B = [rng.normal(size=(int(rng.integers(3, 8)), 1)) for _ in range(3)]
    kind = _k("sdtw_div", 1.0)
    D = pairwise(kind, A, B)
    for i, X in enumerate(A):
        for j, Y in enumerate(B):
            assert D[i, j] == divergence(kind, X, Y)
    cached = pairwise(kind, A, B, a_self=self_terms(kind, A, "squared_euclidean"),
                      b_self=self_terms(kind, B, "squared_euclidean"))
    np.testing.assert_array_equal(D, cached)


def test_parallel_rows_are_deterministic(rng):
    A = [rng.normal(size=(6, 1)) for _ in range(7)]
    kind = _k("sharp_div", 1.0)
    np.testing.assert_array_equal(pairwise(kind, A, A, threads=1), pairwise(kind, A, A, threads=4))


def test_euclidean_argmin_invariance(rng):
    data = _synthetic(rng)
    test = [rng.normal(size=(16, 1)) for _ in range(10)]
    raw = [data.labels[int(np.argmin([np.linalg.norm(X - Y) for Y in data.series]))] for X in test]
    assert knn_predict(data, test, _k("euclidean")) == raw


def test_deadline():
    deadline = Deadline(-1.0)
    with pytest.raises(BudgetExceeded):
        pairwise(_k("sdtw"), [np.zeros((2, 1))], [np.zeros((2, 1))], deadline=deadline)
    Deadline(None).check()


def test_centroids_of_singletons(rng):
    a, b = rng.normal(size=(8, 1)), rng.normal(size=(8, 1)) + 3
    train = LabeledDataset([a, b], [2, 5])
    model = fit_centroids(train, _k("sdtw_div"), "log_augmented", init="euclidean_mean")
    assert model.labels == [2, 5]
    assert np.max(np.abs(model.centroids[2] - a)) <= 1e-4
    assert np.max(np.abs(model.centroids[5] - b)) <= 1e-4
    assert centroid_predict(model, [a, b]) == [2, 5]


def test_centroid_of_identical_pair(rng):
    a = rng.normal(size=(8, 1))
    model = fit_centroids(LabeledDataset([a, a.copy()], [0, 0]), _k("sharp_div"))
    assert np.max(np.abs(model.centroids[0] - a)) <= 1e-4


def test_centroid_tie_goes_to_smaller_label():
    a = np.zeros((4, 1))
    model = fit_centroids(LabeledDataset([a, a.copy()], [7, 3]), _k("euclidean"))
    assert centroid_predict(model, [a]) == [3]


def test_centroid_gamma_override():
    model = fit_centroids(_toy(), _k("sdtw"), gamma=0.5, max_iters=3)
    assert model.kind.gamma == 0.5


def test_stratified_split_keeps_every_class(rng):
    labels = [0] * 5 + [1] * 4 + [2] * 3
    for _ in range(20):
        fit, held = stratified_split(labels, rng)
        assert set(np.asarray(labels)[fit]) == {0, 1, 2}
        assert len(held) > 0
        assert sorted(np.concatenate([fit, held]).tolist()) == list(range(12))


def test_stratified_split_falls_back():
    # two singleton classes: every stratified draw leaves the held-out part empty
    fit, held = stratified_split([0, 1], np.random.default_rng(0))
    assert len(fit) == 1 and len(held) == 1


def test_select_gamma_trivial_cases(rng):
    data = _synthetic(rng)
    assert select_gamma(data, _k("sdtw"), grid=[0.3]).gamma == 0.3
    assert select_gamma(data, _k("mean_cost")).gamma is None
    with pytest.raises(ParameterError):
        select_gamma(data, _k("sdtw"), grid=[])


def test_select_gamma_tie_goes_to_smallest():
    t = np.linspace(0, 1, 10)
    series = [(t * 0 + c + 0.01 * i)[:, None] for c in (0.0, 10.0) for i in range(6)]
    data = LabeledDataset(series, [0] * 6 + [1] * 6)
    sel = select_gamma(data, _k("sdtw_div"), grid=[1.0, 0.1, 10.0], splits=3)
    assert set(sel.scores.values()) == {1.0}
    assert sel.gamma == 0.1
    assert sel.aggregation == "mean"


def test_select_gamma_is_deterministic(rng):
    data = _synthetic(rng, per_class=4)
    grid = [1e-2, 1.0, 1e2]
    a = select_gamma(data, _k("sdtw_div"), grid=grid, seed=11)
    b = select_gamma(data, _k("sdtw_div"), grid=grid, seed=11)
    assert a.gamma == b.gamma and a.scores == b.scores


def test_select_gamma_centroid_method(rng):
    data = _synthetic(rng, per_class=3)
    sel = select_gamma(data, _k("sdtw"), grid=[0.1, 1.0], splits=2, method="centroid", max_iters=10)
    assert sel.gamma in (0.1, 1.0)
    assert set(sel.scores) == {0.1, 1.0}


def test_default_grid():
    assert GAMMA_GRID == (1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1e3, 1e4)


def test_synthetic_end_to_end(rng):
    train, test = _synthetic(rng), _synthetic(rng, per_class=4)
    sel = select_gamma(train, _k("sdtw_div"), grid=[0.1, 1.0, 10.0], splits=3)
    kind = _k("sdtw_div", sel.gamma)
    assert accuracy(knn_predict(train, test.series, kind), test.labels) >= 0.9
    model = fit_centroids(train, kind, max_iters=50)
    assert accuracy(centroid_predict(model, test.series), test.labels) >= 0.9
