"""Numerical evidence about the global alignment kernel."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from . import alignment as dp
from .costs import CostKind, as_series, build_cost
from .errors import InputError, NumericalError, ParameterError, SizeError
from .parallel import parallel_map

MAX_GRAM = 2000


def gram_matrix(series, cost=CostKind.SQUARED_EUCLIDEAN, gamma: float = 1.0,
                threads: int | None = None) -> np.ndarray:
    """Kernel matrix ``K_ij = exp(-sdtw_1(C(X_i, X_j) / gamma))``, not symmetrized."""
    gamma = float(gamma)
    if not gamma > 0.0:
        raise ParameterError(f"gamma must be positive, got {gamma}")
    series = [as_series(X, f"series[{i}]") for i, X in enumerate(series)]
    M = len(series)
    if M < 1:
        raise InputError("need at least one series")
    if M > MAX_GRAM:
        raise SizeError(f"{M} series exceeds the limit of {MAX_GRAM}")
    cost = CostKind.parse(cost)

    def row(i):
        out = np.empty(M)
        for j in range(M):
            C = build_cost(cost, series[i], series[j]) / gamma
            out[j] = -dp._sdtw(C, 1.0)[0]
        return out

    log_k = np.stack(parallel_map(row, range(M), threads))
    with np.errstate(over="ignore"):
        K = np.exp(log_k)
    if not np.all(np.isfinite(K)):
        # -sdtw_1(C / gamma) <= log(number of alignments), so overflow needs long series and small costs
        raise NumericalError(f"kernel overflow at gamma={gamma}; use shorter series or a smaller gamma")
    return K


def gram_min_eig(series, cost=CostKind.SQUARED_EUCLIDEAN, gamma: float = 1.0,
                 threads: int | None = None) -> float:
    """Smallest eigenvalue of the (symmetrized) global-alignment Gram matrix."""
    K = gram_matrix(series, cost, gamma, threads)
    return float(np.linalg.eigvalsh(0.5 * (K + K.T))[0])


class FourierResult(NamedTuple):
    value: float
    residual_bound: float | None


# prefactor of the alternating series under each Fourier convention
FOURIER_SCALE = {
    "unitary": 1.0,                      # (2 pi)^(-1/2) * int f(t) exp(-i w t) dt
    "series": math.sqrt(math.pi),        # the series with a sqrt(pi) prefactor
    "angular": math.sqrt(2.0 * math.pi),  # int f(t) exp(-i w t) dt
}


def fourier_gauss_series(omega: float, N: int, normalization: str = "unitary") -> FourierResult:
    """Fourier transform at ``omega`` of ``t -> k / (1 + k)`` for ``k(t) = exp(-t^2 / 2)``.

    The transform is ``scale * sum_{n>=1} (-1)^(n+1) n^(-1/2) exp(-omega^2 / (2 n))``
    with ``scale`` fixed by ``normalization`` (see :data:`FOURIER_SCALE`).
    The series is truncated after ``2N`` terms and summed in consecutive pairs
    with exact accumulation.  ``residual_bound`` bounds the truncation error;
    it is ``None`` when ``N < 2``.
    """
    N = int(N)
    if N < 1:
        raise ParameterError(f"N must be at least 1, got {N}")
    try:
        scale = FOURIER_SCALE[normalization]
    except KeyError:
        raise ParameterError(f"unknown normalization {normalization!r}; "
                             f"expected one of {', '.join(FOURIER_SCALE)}") from None
    n = np.arange(1, 2 * N + 1, dtype=np.float64)
    terms = np.exp(-(omega * omega) / (2.0 * n)) / np.sqrt(n)
    pairs = terms[0::2] - terms[1::2]
    value = scale * math.fsum(pairs)
    bound = scale / math.sqrt(2.0 * (N - 1)) if N >= 2 else None
    return FourierResult(value, bound)
