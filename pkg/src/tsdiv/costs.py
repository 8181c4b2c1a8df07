"""Ground costs between time steps and their Jacobian products in X."""

from __future__ import annotations

from enum import Enum

import numpy as np
from scipy.spatial.distance import cdist

from .errors import DimensionError, InputError, ParameterError


class CostKind(str, Enum):
    SQUARED_EUCLIDEAN = "squared_euclidean"
    LOG_AUGMENTED = "log_augmented"
    ABSOLUTE = "absolute"

    @classmethod
    def parse(cls, name: "str | CostKind") -> "CostKind":
        if isinstance(name, CostKind):
            return name
        key = str(name).strip().lower().replace("-", "_")
        key = _ALIASES.get(key, key)
        try:
            return cls(key)
        except ValueError:
            choices = ", ".join(c.value for c in cls)
            raise ParameterError(f"unknown cost {name!r}; expected one of {choices}") from None


_ALIASES = {
    "sqeuclid": "squared_euclidean",
    "sqeuclidean": "squared_euclidean",
    "sq_euclidean": "squared_euclidean",
    "logaug": "log_augmented",
    "log": "log_augmented",
    "abs": "absolute",
    "l1": "absolute",
}


def as_series(X, name: str = "series") -> np.ndarray:
    """Return ``X`` as a finite float64 (m, d) matrix; 1-D input becomes d = 1."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise DimensionError(f"{name} must be a non-empty (m, d) matrix, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InputError(f"{name} contains non-finite values")
    return np.ascontiguousarray(X)


def _pair(kind: CostKind, X, Y) -> tuple[np.ndarray, np.ndarray]:
    X = as_series(X, "X")
    Y = as_series(Y, "Y")
    if X.shape[1] != Y.shape[1]:
        raise DimensionError(f"dimension mismatch: X has d={X.shape[1]}, Y has d={Y.shape[1]}")
    if kind is CostKind.ABSOLUTE and X.shape[1] != 1:
        raise DimensionError("the absolute cost is only defined for d = 1")
    return X, Y


def _log_term(delta: np.ndarray) -> np.ndarray:
    # log(2 - exp(-delta)) = log1p(1 - exp(-delta))
    return np.log1p(-np.expm1(-delta))


def build_cost(kind, X, Y) -> np.ndarray:
    """Cost matrix ``C[i, j] = c(x_i, y_j)`` for the chosen ground cost."""
    kind = CostKind.parse(kind)
    X, Y = _pair(kind, X, Y)
    if kind is CostKind.ABSOLUTE:
        return cdist(X, Y, "cityblock")
    delta = 0.5 * cdist(X, Y, "sqeuclidean")
    if kind is CostKind.SQUARED_EUCLIDEAN:
        return delta
    return delta + _log_term(delta)


def _sqeuclid_vjp(X, Y, E):
    return X * E.sum(axis=1)[:, None] - E @ Y


def cost_vjp(kind, X, Y, E, self_mode: bool = False) -> np.ndarray:
    """Transposed Jacobian of ``X -> C(X, Y)`` applied to ``E``.

    In self mode ``Y`` is ignored and the Jacobian of ``X -> C(X, X)`` is used
    instead (both arguments move).

    squared_euclidean
        closed form ``X * (E 1) - E Y``.
    log_augmented
        the squared-Euclidean product with ``E`` reweighted per cell by
        ``1 + exp(-delta) / (2 - exp(-delta))``, the derivative of the cost
        with respect to ``delta``.
    absolute
        ``sum_j e_ij sign(x_i - y_j)``; the kink at ``x_i = y_j`` gets 0.
    """
    kind = CostKind.parse(kind)
    if self_mode:
        Y = X
    X, Y = _pair(kind, X, Y)
    E = np.asarray(E, dtype=np.float64)
    if E.shape != (X.shape[0], Y.shape[0]):
        raise DimensionError(f"E has shape {E.shape}, expected {(X.shape[0], Y.shape[0])}")
    if self_mode:
        E = E + E.T
    if kind is CostKind.SQUARED_EUCLIDEAN:
        return _sqeuclid_vjp(X, Y, E)
    if kind is CostKind.LOG_AUGMENTED:
        delta = 0.5 * cdist(X, Y, "sqeuclidean")
        q = np.exp(-delta)
        return _sqeuclid_vjp(X, Y, E * (1.0 + q / (2.0 - q)))
    sign = np.sign(X - Y.T)
    return (E * sign).sum(axis=1)[:, None]


def cost_jvp(kind, X, Y, Z, self_mode: bool = False) -> np.ndarray:
    """Jacobian of ``X -> C(X, Y)`` (or ``C(X, X)`` in self mode) applied to ``Z``.

    Only the squared Euclidean cost is supported.
    """
    kind = CostKind.parse(kind)
    if kind is not CostKind.SQUARED_EUCLIDEAN:
        raise NotImplementedError(f"cost_jvp is only implemented for squared_euclidean, not {kind.value}")
    if self_mode:
        Y = X
    X, Y = _pair(kind, X, Y)
    Z = np.asarray(Z, dtype=np.float64)
    if Z.shape != X.shape:
        raise DimensionError(f"Z has shape {Z.shape}, expected {X.shape}")
    xz = np.einsum("ik,ik->i", X, Z)
    if not self_mode:
        return xz[:, None] - Z @ Y.T
    zx = Z @ X.T
    return xz[:, None] + xz[None, :] - zx - zx.T
