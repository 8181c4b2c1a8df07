import numpy as np
import pytest

from tsdiv.barycenter import (AveragingProblem, euclidean_mean, frechet_mean, interpolate, minimize,
                              objective, resample)
from tsdiv.divergences import DivergenceKind, discrepancy
from tsdiv.errors import DimensionError, InputError, NotDifferentiableError, ParameterError


def _k(tag, gamma=None):
    return DivergenceKind.parse(tag, gamma)


def _wave(rng, n=20, shift=0.0, noise=0.1):
    t = np.linspace(0, 2 * np.pi, n)
    return (np.sin(t + shift) + noise * rng.normal(size=n))[:, None]


def _assert_descent(trace):
    assert all(b <= a + 1e-9 for a, b in zip(trace, trace[1:]))


def test_minimize_quadratic(rng):
    A = rng.normal(size=(5, 2))
    res = minimize(lambda X: (0.5 * np.sum((X - A) ** 2), X - A), np.zeros((5, 2)))
    assert np.max(np.abs(res.x - A)) <= 1e-6
    assert res.iterations <= 50
    _assert_descent(res.trace)


def test_minimize_rejects_non_finite_start():
    with pytest.raises(InputError):
        minimize(lambda X: (np.nan, X), np.zeros((2, 1)))
    with pytest.raises(InputError):
        minimize(lambda X: (0.0, X), np.array([[np.inf]]))


def test_minimize_never_increases(rng):
    # a nonsmooth objective makes the line search struggle; the result must not be worse than x0
    def f(X):
        return float(np.sum(np.abs(X))), np.sign(X)

    x0 = rng.normal(size=(4, 1))
    res = minimize(f, x0, max_iters=50)
    assert res.value <= f(x0)[0]


def test_divergence_minimum_stays_put(rng):
    Y = rng.normal(size=(8, 1))
    kind = _k("sdtw_div", 1.0)
    obj = objective(AveragingProblem([Y], kind, "log_augmented"))
    res = minimize(obj, Y)
    assert np.max(np.abs(res.x - Y)) <= 1e-8


def test_biased_sdtw_moves_away_from_target():
    Y = _wave(np.random.default_rng(3))
    kind = _k("sdtw", 1.0)
    res = minimize(objective(AveragingProblem([Y], kind)), Y)
    assert np.max(np.abs(res.x - Y)) > 1e-3
    assert res.value < discrepancy(kind, Y, Y)


def test_single_series_divergence_recovers_it(rng):
    for _ in range(5):
        Y = rng.normal(size=(10, 1))
        x0 = Y + 0.05 * rng.normal(size=Y.shape)
        res = frechet_mean(AveragingProblem([Y], _k("sdtw_div"), "log_augmented", init=x0))
        assert np.max(np.abs(res.x - Y)) <= 1e-4


def test_warm_start_can_stall_at_a_spurious_stationary_point():
    # the biased solution at gamma=10 smooths Y so much that refinement stops at D > 0
    rng = np.random.default_rng(0)
    rng.normal(size=(8, 1))
    Y = rng.normal(size=(8, 1)) + 3
    problem = AveragingProblem([Y], _k("sdtw_div"), "log_augmented")
    res = frechet_mean(problem)
    assert res.warm_start is not None
    assert res.objective_trace[-1] > 0.1
    assert np.max(np.abs(objective(problem)(res.x)[1])) <= 1e-7


@pytest.mark.parametrize("tag", ["sdtw_div", "sharp_div", "mean_cost_div"])
def test_identical_series(rng, tag):
    Y = rng.normal(size=(8, 1))
    res = frechet_mean(AveragingProblem([Y, Y.copy()], _k(tag)))
    assert np.max(np.abs(res.x - Y)) <= 1e-4


def test_descent_and_warm_start_dominance(rng):
    series = [_wave(rng, shift=s) for s in np.linspace(-0.5, 0.5, 6)]
    for tag in ["sdtw_div", "sharp_div"]:
        problem = AveragingProblem(series, _k(tag))
        res = frechet_mean(problem, max_iters=60)
        _assert_descent(res.objective_trace)
        _assert_descent(res.warm_start_trace)
        warm_value = objective(problem)(res.warm_start)[0]
        assert res.objective_trace[-1] <= warm_value + 1e-9


def test_biased_mean_improves_on_euclidean_init(rng):
    series = [_wave(rng, shift=s) for s in np.linspace(-1, 1, 10)]
    problem = AveragingProblem(series, _k("sdtw", 1.0))
    res = frechet_mean(problem, max_iters=100)
    start = objective(problem)(euclidean_mean(problem))[0]
    assert res.objective_trace[0] == pytest.approx(start)
    assert res.objective_trace[-1] < start


def test_default_weights(rng):
    equal = AveragingProblem([rng.normal(size=(5, 1))] * 3, _k("sdtw"))
    assert equal.weights == [1.0, 1.0, 1.0]
    ragged = AveragingProblem([rng.normal(size=(n, 1)) for n in (4, 5, 10)], _k("sdtw"))
    assert ragged.weights == [1 / 4, 1 / 5, 1 / 10]
    assert ragged.barycenter_length == 5


def test_ragged_euclidean_mean_resamples():
    problem = AveragingProblem([np.arange(3.0), np.arange(5.0)], _k("sdtw"), weights=[1, 1])
    assert problem.barycenter_length == 4
    # both series resampled to 4 steps: [0, 2/3, 4/3, 2] and [0, 4/3, 8/3, 4]
    np.testing.assert_allclose(euclidean_mean(problem)[:, 0], [0, 1, 2, 3])
    np.testing.assert_allclose(resample(np.arange(5.0), 3)[:, 0], [0, 2, 4])


def test_problem_validation(rng):
    with pytest.raises(InputError):
        AveragingProblem([], _k("sdtw"))
    with pytest.raises(DimensionError):
        AveragingProblem([np.zeros((3, 1)), np.zeros((3, 2))], _k("sdtw"))
    with pytest.raises(ParameterError):
        AveragingProblem([np.zeros((3, 1))], _k("sdtw"), weights=[-1.0])
    with pytest.raises(NotDifferentiableError):
        frechet_mean(AveragingProblem([np.zeros((3, 1))], _k("dtw")))
    with pytest.raises(DimensionError):
        frechet_mean(AveragingProblem([np.zeros((3, 1))], _k("sdtw"), init=np.zeros((4, 1))))


def test_explicit_init_is_used(rng):
    Y = rng.normal(size=(6, 1))
    res = frechet_mean(AveragingProblem([Y], _k("sdtw_div", 1.0), init=Y), max_iters=5)
    assert res.warm_start is None
    np.testing.assert_array_equal(res.x, Y)


def test_interpolation_endpoints(rng):
    Y1, Y2 = _wave(rng, n=12), _wave(rng, n=12, shift=1.0)
    kind = _k("sdtw_div")
    assert np.max(np.abs(interpolate(Y1, Y2, 1.0, kind, "log_augmented").x - Y1)) <= 1e-4
    assert np.max(np.abs(interpolate(Y1, Y2, 0.0, kind, "log_augmented").x - Y2)) <= 1e-4
    assert np.max(np.abs(interpolate(Y1, Y1.copy(), 0.5, kind).x - Y1)) <= 1e-4
    with pytest.raises(ParameterError):
        interpolate(Y1, Y2, 1.5, kind)
