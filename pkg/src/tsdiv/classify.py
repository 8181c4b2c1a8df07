"""Nearest-neighbor and nearest-centroid classification with gamma selection."""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .barycenter import AveragingProblem, frechet_mean
from .costs import CostKind, as_series, build_cost
from .dataio import LabeledDataset
from .divergences import DivergenceKind, Tag, cost_value
from .errors import InputError, ParameterError
from .parallel import parallel_map

GAMMA_GRID = tuple(10.0 ** e for e in range(-4, 5))


class BudgetExceeded(Exception):
    """Raised when a configured wall-clock budget runs out."""


class Deadline:
    def __init__(self, seconds: float | None):
        self.end = None if seconds is None else time.monotonic() + seconds

    def check(self):
        if self.end is not None and time.monotonic() > self.end:
            raise BudgetExceeded


def self_terms(kind: DivergenceKind, series, cost) -> list[float] | None:
    """``base(Y, Y)`` for every series, or ``None`` for non-divergence kinds."""
    if not kind.is_divergence:
        return None
    base = kind.biased().tag
    return [cost_value(base, build_cost(cost, Y, Y), kind.gamma) for Y in series]


def pairwise(kind: DivergenceKind, A, B, cost=CostKind.SQUARED_EUCLIDEAN,
             a_self=None, b_self=None, threads: int | None = None,
             deadline: Deadline | None = None) -> np.ndarray:
    """Matrix ``D[i, j] = kind(A[i], B[j])``.

    Self-terms of divergence kinds are computed once per series unless given.
    Rows are evaluated in parallel and assembled in index order.
    """
    cost = CostKind.parse(cost)
    A = [as_series(X) for X in A]
    B = [as_series(Y) for Y in B]
    tag, gamma = kind.tag, kind.gamma
    if kind.is_divergence:
        if a_self is None:
            a_self = self_terms(kind, A, cost)
        if b_self is None:
            b_self = self_terms(kind, B, cost)
        tag = kind.biased().tag

    def row(i):
        if deadline is not None:
            deadline.check()
        X = A[i]
        out = np.empty(len(B))
        for j, Y in enumerate(B):
            if tag is Tag.EUCLIDEAN:
                if X.shape != Y.shape:
                    raise InputError("euclidean kind needs equal-length series")
                out[j] = 0.5 * float(np.sum((X - Y) ** 2))
            else:
                out[j] = cost_value(tag, build_cost(cost, X, Y), gamma)
            if a_self is not None:
                out[j] = out[j] - 0.5 * a_self[i] - 0.5 * b_self[j]
        return out

    if not A or not B:
        return np.zeros((len(A), len(B)))
    return np.stack(parallel_map(row, range(len(A)), threads))


def vote(distances: np.ndarray, labels, k: int) -> int:
    """Majority vote of the ``k`` nearest; ties go to the smaller summed distance, then label."""
    order = np.argsort(distances, kind="stable")[:k]
    counts = Counter(labels[i] for i in order)
    sums = Counter()
    for i in order:
        sums[labels[i]] += distances[i]
    return min(counts, key=lambda c: (-counts[c], sums[c], c))


def _check_train(train: LabeledDataset):
    if len(train) == 0:
        raise InputError("training set is empty")


def knn_predict(train: LabeledDataset, test, kind: DivergenceKind, cost=CostKind.SQUARED_EUCLIDEAN,
                k: int = 1, threads: int | None = None, deadline: Deadline | None = None,
                train_self=None) -> list[int]:
    _check_train(train)
    if k < 1:
        raise ParameterError(f"k must be at least 1, got {k}")
    D = pairwise(kind, test, train.series, cost, b_self=train_self, threads=threads, deadline=deadline)
    return [vote(D[i], train.labels, k) for i in range(len(D))]


@dataclass(frozen=True)
class CentroidModel:
    centroids: dict
    kind: DivergenceKind
    cost: CostKind
    centroid_self: tuple = field(default=())

    @property
    def labels(self) -> list[int]:
        return sorted(self.centroids)


def fit_centroids(train: LabeledDataset, kind: DivergenceKind, cost=CostKind.SQUARED_EUCLIDEAN,
                  gamma: float | None = None, max_iters: int = 200, threads: int | None = None,
                  deadline: Deadline | None = None, init=None) -> CentroidModel:
    """Average every class with :func:`frechet_mean` under ``kind``.

    ``init`` is passed to :class:`AveragingProblem` for every class.
    """
    _check_train(train)
    cost = CostKind.parse(cost)
    if gamma is not None and kind.uses_gamma:
        kind = kind.with_gamma(gamma)
    labels = train.classes

    def fit(label):
        if deadline is not None:
            deadline.check()
        members = [Y for Y, y in zip(train.series, train.labels) if y == label]
        if not members:
            raise InputError(f"class {label} has no members")
        return frechet_mean(AveragingProblem(members, kind, cost, init=init), max_iters).x

    centroids = dict(zip(labels, parallel_map(fit, labels, threads)))
    cself = self_terms(kind, [centroids[c] for c in labels], cost)
    return CentroidModel(centroids, kind, cost, tuple(cself) if cself else ())


def centroid_predict(model: CentroidModel, test, threads: int | None = None,
                     deadline: Deadline | None = None) -> list[int]:
    labels = model.labels
    cents = [model.centroids[c] for c in labels]
    D = pairwise(model.kind, test, cents, model.cost, b_self=list(model.centroid_self) or None,
                 threads=threads, deadline=deadline)
    # argmin returns the first minimum, i.e. the smaller label on ties
    return [labels[int(np.argmin(row))] for row in D]


def accuracy(pred, truth) -> float:
    pred, truth = np.asarray(pred), np.asarray(truth)
    return float(np.mean(pred == truth)) if len(truth) else float("nan")


def stratified_split(labels, rng: np.random.Generator, frac: float = 2.0 / 3.0,
                     max_attempts: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Random split keeping about ``frac`` of each class in the first part.

    A split is redrawn when a class is missing from the first part or the
    second part is empty; after ``max_attempts`` an unstratified split is used.
    """
    labels = np.asarray(labels)
    classes = np.unique(labels)
    for _ in range(max_attempts):
        fit, held = [], []
        for c in classes:
            idx = rng.permutation(np.flatnonzero(labels == c))
            cut = int(round(frac * len(idx)))
            fit.extend(idx[:cut])
            held.extend(idx[cut:])
        if held and set(labels[fit]) == set(classes):
            return np.sort(fit), np.sort(held)
    idx = rng.permutation(len(labels))
    cut = max(1, min(len(labels) - 1, int(round(frac * len(labels)))))
    return np.sort(idx[:cut]), np.sort(idx[cut:])


@dataclass
class GammaSelection:
    gamma: float | None
    scores: dict
    seed: int
    splits: int
    aggregation: str = "mean"


def select_gamma(train: LabeledDataset, kind: DivergenceKind, cost=CostKind.SQUARED_EUCLIDEAN,
                 grid=GAMMA_GRID, splits: int = 5, seed: int = 0, method: str = "1nn",
                 k: int = 1, max_iters: int = 200, threads: int | None = None,
                 deadline: Deadline | None = None) -> GammaSelection:
    """Pick gamma by repeated 2/3 - 1/3 hold-out accuracy; ties go to the smaller gamma.

    Returns ``gamma=None`` without any work for kinds that have no gamma.
    """
    _check_train(train)
    grid = sorted(float(g) for g in grid)
    if not grid:
        raise ParameterError("gamma grid is empty")
    if not kind.uses_gamma:
        return GammaSelection(None, {}, seed, 0)
    if len(grid) == 1:
        return GammaSelection(grid[0], {}, seed, 0)
    rng = np.random.default_rng(seed)
    folds = [stratified_split(train.labels, rng) for _ in range(splits)]
    scores = {}
    for gamma in grid:
        g_kind = kind.with_gamma(gamma)
        if method != "centroid":
            # every fold is a sub-block of the full train x train matrix
            full = pairwise(g_kind, train.series, train.series, cost, threads=threads, deadline=deadline)
        accs = []
        for fit_idx, held_idx in folds:
            held_labels = [train.labels[i] for i in held_idx]
            if method == "centroid":
                model = fit_centroids(train.subset(fit_idx), g_kind, cost, max_iters=max_iters,
                                      threads=threads, deadline=deadline)
                pred = centroid_predict(model, [train.series[i] for i in held_idx], threads, deadline)
            else:
                fit_labels = [train.labels[i] for i in fit_idx]
                block = full[np.ix_(held_idx, fit_idx)]
                pred = [vote(row, fit_labels, k) for row in block]
            accs.append(accuracy(pred, held_labels))
        scores[gamma] = float(np.mean(accs))
    best = max(scores.values())
    return GammaSelection(min(g for g, s in scores.items() if s == best), scores, seed, splits)
