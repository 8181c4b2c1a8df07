import math

import numpy as np
import pytest

from conftest import finite_diff
from tsdiv.costs import CostKind, build_cost, cost_jvp, cost_vjp
from tsdiv.errors import DimensionError, ParameterError

X2 = np.array([[0.0], [1.0]])
Y2 = np.array([[0.0], [2.0]])
KINDS = list(CostKind)


def _dim(kind):
    return 1 if kind is CostKind.ABSOLUTE else 3


def test_squared_euclidean_example():
    np.testing.assert_array_equal(build_cost("squared_euclidean", X2, Y2), [[0, 2], [0.5, 0.5]])


def test_log_augmented_examples():
    assert build_cost("log_augmented", [[1.5, -2.0]], [[1.5, -2.0]])[0, 0] == 0.0
    # delta = 1/2 * 1^2 = 0.5
    value = build_cost("log_augmented", [[0.0]], [[1.0]])[0, 0]
    assert value == pytest.approx(0.5 + math.log(2 - math.exp(-0.5)), abs=1e-15)
    assert value == pytest.approx(0.8317966, abs=1e-6)


def test_absolute_example():
    np.testing.assert_array_equal(build_cost("absolute", X2, Y2), [[0, 2], [1, 1]])


def test_parse_aliases():
    assert CostKind.parse("sqeuclid") is CostKind.SQUARED_EUCLIDEAN
    assert CostKind.parse("abs") is CostKind.ABSOLUTE
    with pytest.raises(ParameterError):
        CostKind.parse("cosine")


def test_errors():
    with pytest.raises(DimensionError):
        build_cost("squared_euclidean", np.zeros((3, 2)), np.zeros((3, 1)))
    with pytest.raises(DimensionError):
        build_cost("absolute", np.zeros((3, 2)), np.zeros((3, 2)))
    with pytest.raises(DimensionError):
        cost_vjp("squared_euclidean", X2, Y2, np.zeros((3, 2)))
    with pytest.raises(NotImplementedError):
        cost_jvp("log_augmented", X2, Y2, X2)


@pytest.mark.parametrize("kind", KINDS)
def test_assumptions_hold(rng, kind):
    d = _dim(kind)
    for _ in range(20):
        X = rng.normal(size=(rng.integers(1, 9), d))
        Y = rng.normal(size=(rng.integers(1, 9), d))
        CXX = build_cost(kind, X, X)
        assert np.all(np.abs(np.diag(CXX)) <= 1e-12)
        C = build_cost(kind, X, Y)
        assert np.max(np.abs(C - build_cost(kind, Y, X).T)) <= 1e-12
        assert np.all(C >= -1e-12)


def test_vjp_example():
    np.testing.assert_allclose(cost_vjp("squared_euclidean", X2, Y2, np.eye(2)), [[0], [-1]])
    fd = finite_diff(lambda Z: np.sum(np.eye(2) * build_cost("squared_euclidean", Z, Y2)), X2)
    np.testing.assert_allclose(fd, [[0], [-1]], atol=1e-8)


@pytest.mark.parametrize("kind", KINDS)
def test_vjp_zero_direction(kind):
    np.testing.assert_array_equal(cost_vjp(kind, X2, Y2, np.zeros((2, 2))), np.zeros((2, 1)))


@pytest.mark.parametrize("kind", KINDS)
def test_self_vjp_is_twice_cross_for_symmetric_e(rng, kind):
    X = rng.normal(size=(5, _dim(kind)))
    E = rng.uniform(size=(5, 5))
    E = E + E.T
    np.testing.assert_allclose(cost_vjp(kind, X, None, E, self_mode=True),
                               2 * cost_vjp(kind, X, X, E), atol=1e-12)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("self_mode", [False, True])
def test_vjp_matches_finite_differences(rng, kind, self_mode):
    d = _dim(kind)
    for _ in range(5):
        X = rng.normal(size=(4, d))
        Y = rng.normal(size=(6, d))
        n = 4 if self_mode else 6
        E = rng.uniform(size=(4, n))
        target = (lambda Z: np.sum(E * build_cost(kind, Z, Z))) if self_mode else \
                 (lambda Z: np.sum(E * build_cost(kind, Z, Y)))
        got = cost_vjp(kind, X, Y, E, self_mode=self_mode)
        np.testing.assert_allclose(got, finite_diff(target, X), atol=1e-5)


def test_jvp_example():
    Z = np.array([[1.0], [1.0]])
    np.testing.assert_allclose(cost_jvp("squared_euclidean", X2, Y2, Z), [[0, -2], [1, -1]])
    eps = 1e-6
    fd = (build_cost("squared_euclidean", X2 + eps * Z, Y2)
          - build_cost("squared_euclidean", X2 - eps * Z, Y2)) / (2 * eps)
    np.testing.assert_allclose(fd, [[0, -2], [1, -1]], atol=1e-8)
    np.testing.assert_array_equal(cost_jvp("squared_euclidean", X2, Y2, np.zeros((2, 1))), 0)


def test_self_jvp_is_cross_plus_transpose(rng):
    X = rng.normal(size=(5, 2))
    Z = rng.normal(size=(5, 2))
    cross = cost_jvp("squared_euclidean", X, X, Z)
    np.testing.assert_allclose(cost_jvp("squared_euclidean", X, None, Z, self_mode=True),
                               cross + cross.T, atol=1e-12)


@pytest.mark.parametrize("self_mode", [False, True])
def test_jvp_vjp_adjoint(rng, self_mode):
    for _ in range(20):
        X = rng.normal(size=(5, 3))
        Y = rng.normal(size=(7, 3))
        n = 5 if self_mode else 7
        E = rng.normal(size=(5, n))
        Z = rng.normal(size=(5, 3))
        lhs = np.sum(E * cost_jvp("squared_euclidean", X, Y, Z, self_mode=self_mode))
        rhs = np.sum(cost_vjp("squared_euclidean", X, Y, E, self_mode=self_mode) * Z)
        assert lhs == pytest.approx(rhs, abs=1e-9)
