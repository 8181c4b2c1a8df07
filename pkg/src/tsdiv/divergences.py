"""Discrepancies between time series and their debiased divergences.

Every measure here is a function of a cost matrix ``C = C(X, Y)``:

* ``sdtw``       soft-DTW value
* ``sharp``      ``<E_gamma(C), C>``, soft-DTW without its entropy term
* ``mean_cost``  average cost under the uniform distribution over alignments
* ``dtw``        hard DTW (value only)

and the ``*_div`` kinds debias a base measure with
``base(X, Y) - base(X, X) / 2 - base(Y, Y) / 2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import alignment as dp
from .costs import CostKind, as_series, build_cost, cost_vjp
from .errors import DimensionError, NotDifferentiableError, ParameterError


class Tag(str, Enum):
    EUCLIDEAN = "euclidean"
    DTW = "dtw"
    SDTW = "sdtw"
    SDTW_DIV = "sdtw_div"
    SHARP = "sharp"
    SHARP_DIV = "sharp_div"
    MEAN_COST = "mean_cost"
    MEAN_COST_DIV = "mean_cost_div"


BIASED = {Tag.SDTW_DIV: Tag.SDTW, Tag.SHARP_DIV: Tag.SHARP, Tag.MEAN_COST_DIV: Tag.MEAN_COST}
DIVERGENCE_TAGS = frozenset(BIASED)
GAMMA_TAGS = frozenset({Tag.SDTW, Tag.SDTW_DIV, Tag.SHARP, Tag.SHARP_DIV})


@dataclass(frozen=True)
class DivergenceKind:
    """A discrepancy measure together with its temperature.

    When ``gamma`` is omitted it defaults to 1 for biased measures and 10 for
    debiased divergences.  It is forced to ``None`` for gamma-free kinds.
    """

    tag: Tag
    gamma: float | None = field(default=None)

    def __post_init__(self):
        tag = Tag(self.tag)
        object.__setattr__(self, "tag", tag)
        if tag not in GAMMA_TAGS:
            object.__setattr__(self, "gamma", None)
            return
        gamma = self.gamma
        if gamma is None:
            gamma = 10.0 if tag in DIVERGENCE_TAGS else 1.0
        gamma = float(gamma)
        if not gamma > 0.0 or not np.isfinite(gamma):
            raise ParameterError(f"gamma must be positive and finite for {tag.value}, got {gamma}")
        object.__setattr__(self, "gamma", gamma)

    @classmethod
    def parse(cls, name: str, gamma: float | None = None) -> "DivergenceKind":
        try:
            tag = Tag(str(name).strip().lower())
        except ValueError:
            choices = ", ".join(t.value for t in Tag)
            raise ParameterError(f"unknown kind {name!r}; expected one of {choices}") from None
        return cls(tag, gamma)

    @property
    def is_divergence(self) -> bool:
        return self.tag in DIVERGENCE_TAGS

    @property
    def uses_gamma(self) -> bool:
        return self.tag in GAMMA_TAGS

    @property
    def differentiable(self) -> bool:
        return self.tag is not Tag.DTW

    def biased(self) -> "DivergenceKind":
        """The raw counterpart of a divergence kind (identity otherwise)."""
        return DivergenceKind(BIASED.get(self.tag, self.tag), self.gamma)

    def with_gamma(self, gamma: float | None) -> "DivergenceKind":
        return DivergenceKind(self.tag, gamma)

    def __str__(self):
        return self.tag.value if self.gamma is None else f"{self.tag.value}(gamma={self.gamma:g})"


def _kind(kind) -> DivergenceKind:
    if isinstance(kind, DivergenceKind):
        return kind
    return DivergenceKind.parse(kind)


# --- measures on a cost matrix -------------------------------------------------

def cost_value(tag: Tag, C: np.ndarray, gamma: float | None) -> float:
    """Value of a base measure on an already validated cost matrix."""
    if tag is Tag.SDTW:
        return dp._sdtw(C, gamma)[0]
    if tag is Tag.SHARP:
        P = dp._sdtw(C, gamma)[1]
        return float(dp._directional(P, C)[-1, -1])
    if tag is Tag.MEAN_COST:
        return dp.mean_cost(C)[0]
    if tag is Tag.DTW:
        return dp._sdtw(C, 0.0)[0]
    raise ParameterError(f"{tag.value} is not a cost-matrix measure")


def cost_value_and_grad(tag: Tag, C: np.ndarray, gamma: float | None) -> tuple[float, np.ndarray]:
    """Value and gradient with respect to ``C`` of a base measure."""
    if tag is Tag.SDTW:
        value, P = dp._sdtw(C, gamma)
        return value, dp._backward(P)
    if tag is Tag.SHARP:
        P = dp._sdtw(C, gamma)[1]
        E = dp._backward(P)
        Vd = dp._directional(P, C)
        # grad = E + Hessian(C) @ C; the raw kernel returns gamma * Hessian product
        return float(Vd[-1, -1]), E + dp._hessian(P, Vd, E) / gamma
    if tag is Tag.MEAN_COST:
        return dp.mean_cost(C)
    if tag is Tag.DTW:
        raise NotDifferentiableError("dtw is not differentiable; use discrepancy() for its value")
    raise ParameterError(f"{tag.value} is not a cost-matrix measure")


# --- measures on time series -----------------------------------------------------

def _euclidean(X, Y):
    if X.shape != Y.shape:
        raise DimensionError(f"euclidean needs equal shapes, got {X.shape} and {Y.shape}")
    diff = X - Y
    return 0.5 * float(np.sum(diff * diff)), diff


def discrepancy(kind, X, Y, cost=CostKind.SQUARED_EUCLIDEAN) -> float:
    """Raw (biased) discrepancy between ``X`` and ``Y``."""
    kind = _kind(kind)
    if kind.is_divergence:
        raise ParameterError(f"{kind.tag.value} is a divergence; use divergence()")
    X, Y = as_series(X, "X"), as_series(Y, "Y")
    if kind.tag is Tag.EUCLIDEAN:
        return _euclidean(X, Y)[0]
    return cost_value(kind.tag, build_cost(cost, X, Y), kind.gamma)


def self_term(kind, X, cost=CostKind.SQUARED_EUCLIDEAN) -> float:
    """``base(X, X)`` for a divergence kind, the correction that depends on one series."""
    kind = _kind(kind)
    X = as_series(X)
    return cost_value(kind.biased().tag, build_cost(cost, X, X), kind.gamma)


def divergence(kind, X, Y, cost=CostKind.SQUARED_EUCLIDEAN, x_self=None, y_self=None) -> float:
    """Debiased divergence ``base(X, Y) - base(X, X)/2 - base(Y, Y)/2``.

    ``x_self`` / ``y_self`` accept precomputed :func:`self_term` values.
    """
    kind = _kind(kind)
    if not kind.is_divergence:
        raise ParameterError(f"{kind.tag.value} is not a divergence; use discrepancy()")
    X, Y = as_series(X, "X"), as_series(Y, "Y")
    base = kind.biased().tag
    xy = cost_value(base, build_cost(cost, X, Y), kind.gamma)
    if x_self is None:
        x_self = cost_value(base, build_cost(cost, X, X), kind.gamma)
    if y_self is None:
        y_self = cost_value(base, build_cost(cost, Y, Y), kind.gamma)
    return xy - 0.5 * x_self - 0.5 * y_self


def evaluate(kind, X, Y, cost=CostKind.SQUARED_EUCLIDEAN) -> float:
    """Value of any kind, dispatching to :func:`divergence` or :func:`discrepancy`."""
    kind = _kind(kind)
    if kind.is_divergence:
        return divergence(kind, X, Y, cost)
    return discrepancy(kind, X, Y, cost)


def divergence_grad_x(kind, X, Y, cost=CostKind.SQUARED_EUCLIDEAN) -> tuple[float, np.ndarray]:
    """Value of ``kind(X, Y)`` and its gradient with respect to ``X``."""
    kind = _kind(kind)
    if not kind.differentiable:
        raise NotDifferentiableError("dtw is not differentiable; use discrepancy() for its value")
    X, Y = as_series(X, "X"), as_series(Y, "Y")
    if kind.tag is Tag.EUCLIDEAN:
        return _euclidean(X, Y)
    base = kind.biased().tag
    value, G = cost_value_and_grad(base, build_cost(cost, X, Y), kind.gamma)
    grad = cost_vjp(cost, X, Y, G)
    if not kind.is_divergence:
        return value, grad
    xx, Gxx = cost_value_and_grad(base, build_cost(cost, X, X), kind.gamma)
    yy = cost_value(base, build_cost(cost, Y, Y), kind.gamma)
    value = value - 0.5 * xx - 0.5 * yy
    grad = grad - 0.5 * cost_vjp(cost, X, None, Gxx, self_mode=True)
    return value, grad
