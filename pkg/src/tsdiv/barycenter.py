"""Weighted averaging (Frechet means) and interpolation of time series."""

from __future__ import annotations

import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

from .costs import CostKind, as_series
from .divergences import DivergenceKind, divergence_grad_x
from .errors import DimensionError, InputError, NotDifferentiableError, ParameterError

logger = logging.getLogger(__name__)

EUCLIDEAN_MEAN = "euclidean_mean"
WARM_START_BIASED = "warm_start_biased"


@dataclass
class MinimizeResult:
    x: np.ndarray
    value: float
    iterations: int
    trace: list[float]
    converged: bool
    line_search_failed: bool = False
    message: str = ""


def minimize(objective: Callable[[np.ndarray], tuple[float, np.ndarray]], x0,
             max_iters: int = 200, grad_tol: float = 1e-8, history: int = 10) -> MinimizeResult:
    """Minimize a smooth function of a matrix with L-BFGS.

    ``objective`` maps an array shaped like ``x0`` to ``(value, gradient)``.
    The returned value never exceeds ``objective(x0)``; a failed line search
    returns the best iterate with ``line_search_failed`` set instead of raising.
    """
    x0 = np.array(x0, dtype=np.float64)
    shape = x0.shape
    if not np.all(np.isfinite(x0)):
        raise InputError("initial point contains non-finite values")
    f0, g0 = objective(x0)
    if not np.isfinite(f0) or not np.all(np.isfinite(g0)):
        raise InputError("objective is not finite at the initial point")

    best = {"x": x0.copy(), "f": float(f0)}
    trace = [float(f0)]

    def fun(z):
        x = z.reshape(shape)
        f, g = objective(x)
        f = float(f)
        if np.isfinite(f) and f < best["f"]:
            best["x"], best["f"] = x.copy(), f
        return f, np.asarray(g, dtype=np.float64).ravel()

    def callback(intermediate_result):
        trace.append(float(intermediate_result.fun))

    if np.max(np.abs(g0)) <= grad_tol or max_iters <= 0:
        return MinimizeResult(x0, float(f0), 0, trace, True, message="initial point is stationary")

    res = _scipy_minimize(
        fun, x0.ravel(), jac=True, method="L-BFGS-B", callback=callback,
        options={"maxiter": max_iters, "maxcor": history, "gtol": grad_tol,
                 "ftol": 1e-15, "maxls": 40},
    )
    message = str(res.message)
    failed = "ABNORMAL" in message.upper()
    if failed:
        logger.warning("line search failed after %d iterations: %s", res.nit, message)
    x, f = best["x"], best["f"]
    return MinimizeResult(x, f, int(res.nit), trace, bool(res.success), failed, message)


@dataclass
class AveragingProblem:
    """Inputs of a weighted averaging problem.

    ``weights`` defaults to 1 when all series share a length and to
    ``1 / n_i`` otherwise; ``barycenter_length`` defaults to the median length.
    ``init`` is ``"euclidean_mean"``, ``"warm_start_biased"`` or an explicit
    starting matrix; ``None`` picks the warm start for divergence kinds and
    the Euclidean mean otherwise.
    """

    series: Sequence[np.ndarray]
    kind: DivergenceKind
    cost: CostKind = CostKind.SQUARED_EUCLIDEAN
    weights: Sequence[float] | None = None
    barycenter_length: int | None = None
    init: object = None

    def __post_init__(self):
        if len(self.series) < 1:
            raise InputError("averaging needs at least one series")
        self.series = [as_series(Y, f"series[{i}]") for i, Y in enumerate(self.series)]
        dims = {Y.shape[1] for Y in self.series}
        if len(dims) != 1:
            raise DimensionError(f"all series must share the same dimension, got {sorted(dims)}")
        self.cost = CostKind.parse(self.cost)
        lengths = [len(Y) for Y in self.series]
        if self.weights is None:
            if len(set(lengths)) == 1:
                self.weights = [1.0] * len(lengths)
            else:
                self.weights = [1.0 / n for n in lengths]
        self.weights = [float(w) for w in self.weights]
        if len(self.weights) != len(self.series):
            raise ParameterError("weights and series must have the same length")
        if min(self.weights) < 0 or sum(self.weights) <= 0:
            raise ParameterError("weights must be non-negative with a positive sum")
        if self.barycenter_length is None:
            self.barycenter_length = int(np.median(lengths))
        if self.barycenter_length < 1:
            raise ParameterError("barycenter_length must be positive")
        if self.kind.tag.value == "euclidean" and any(n != self.barycenter_length for n in lengths):
            raise DimensionError("the euclidean kind needs every series to have the barycenter length")

    @property
    def dim(self) -> int:
        return self.series[0].shape[1]


def resample(Y: np.ndarray, length: int) -> np.ndarray:
    """Linear resampling of a series to ``length`` time steps."""
    Y = as_series(Y)
    if len(Y) == length:
        return Y.copy()
    src = np.linspace(0.0, 1.0, len(Y))
    dst = np.linspace(0.0, 1.0, length)
    return np.column_stack([np.interp(dst, src, Y[:, k]) for k in range(Y.shape[1])])


def euclidean_mean(problem: AveragingProblem) -> np.ndarray:
    w = np.asarray(problem.weights)
    stacked = np.stack([resample(Y, problem.barycenter_length) for Y in problem.series])
    return np.tensordot(w / w.sum(), stacked, axes=1)


def objective(problem: AveragingProblem, kind: DivergenceKind | None = None):
    """Weighted sum of ``kind(X, Y_i)`` as a ``(value, gradient)`` callable."""
    kind = problem.kind if kind is None else kind
    pairs = [(w, Y) for w, Y in zip(problem.weights, problem.series) if w != 0.0]

    def fun(X):
        total = 0.0
        grad = np.zeros_like(X)
        for w, Y in pairs:
            v, g = divergence_grad_x(kind, X, Y, problem.cost)
            total += w * v
            grad += w * g
        return total, grad

    return fun


@dataclass
class BarycenterResult:
    x: np.ndarray
    objective_trace: list[float]
    iterations: int
    converged: bool
    warm_start: np.ndarray | None = None
    warm_start_trace: list[float] = field(default_factory=list)


def frechet_mean(problem: AveragingProblem, max_iters: int = 200,
                 grad_tol: float = 1e-8) -> BarycenterResult:
    kind = problem.kind
    if not kind.differentiable:
        raise NotDifferentiableError(f"{kind.tag.value} cannot be averaged by gradient descent")
    init = problem.init
    if init is None:
        init = WARM_START_BIASED if kind.is_divergence else EUCLIDEAN_MEAN

    warm, warm_trace = None, []
    if isinstance(init, str):
        if init not in (EUCLIDEAN_MEAN, WARM_START_BIASED):
            raise ParameterError(f"unknown init scheme {init!r}")
        x0 = euclidean_mean(problem)
        if init == WARM_START_BIASED and kind.is_divergence:
            res = minimize(objective(problem, kind.biased()), x0, max_iters, grad_tol)
            warm, warm_trace, x0 = res.x, res.trace, res.x
    else:
        x0 = as_series(init, "init")
        if x0.shape != (problem.barycenter_length, problem.dim):
            raise DimensionError(f"init has shape {x0.shape}, expected "
                                 f"{(problem.barycenter_length, problem.dim)}")

    res = minimize(objective(problem), x0, max_iters, grad_tol)
    return BarycenterResult(res.x, res.trace, res.iterations, res.converged, warm, warm_trace)


def interpolate(Y1, Y2, pi: float, kind: DivergenceKind, cost=CostKind.SQUARED_EUCLIDEAN,
                length: int | None = None, max_iters: int = 200, init=None) -> BarycenterResult:
    """Weighted average of two series with weights ``(pi, 1 - pi)``."""
    pi = float(pi)
    if not 0.0 <= pi <= 1.0:
        raise ParameterError(f"pi must lie in [0, 1], got {pi}")
    problem = AveragingProblem([Y1, Y2], kind, cost, weights=[pi, 1.0 - pi],
                               barycenter_length=length, init=init)
    return frechet_mean(problem, max_iters)
