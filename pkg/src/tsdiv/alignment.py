"""O(mn) dynamic programs over a cost matrix.

Transition tensors use the component order (left, diagonal, up), i.e. the
predecessors (i, j-1), (i-1, j-1), (i-1, j) of cell (i, j).  Out-of-grid
predecessors are never materialized as infinities: border cells simply have a
zero probability for them.  Cell (0, 0) points "diagonally" to the virtual
origin, so every cell's triple sums to one.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numba
import numpy as np

from .errors import DimensionError, InputError, InvariantError, ParameterError

LEFT, DIAG, UP = 0, 1, 2


@dataclass(frozen=True)
class TransitionTensor:
    """Per-cell move probabilities of the random walk over alignments.

    ``gamma`` is the temperature of the Gibbs distribution that produced
    ``p``; it is ``None`` for the uniform distribution (``alignment_count``)
    and ``0.0`` for the hard-DTW indicator.
    """

    p: np.ndarray
    gamma: float | None

    @property
    def shape(self) -> tuple[int, int]:
        return self.p.shape[0], self.p.shape[1]


def as_cost_matrix(C) -> np.ndarray:
    """Validate and convert to a C-contiguous float64 matrix."""
    C = np.ascontiguousarray(C, dtype=np.float64)
    if C.ndim != 2:
        raise DimensionError(f"cost matrix must be 2-D, got shape {C.shape}")
    if C.shape[0] < 1 or C.shape[1] < 1:
        raise DimensionError(f"cost matrix must be non-empty, got shape {C.shape}")
    if not np.all(np.isfinite(C)):
        raise InputError("cost matrix contains non-finite entries")
    return C


def _check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not gamma >= 0.0 or math.isinf(gamma):
        raise ParameterError(f"gamma must be a finite non-negative number, got {gamma}")
    return gamma


@numba.njit(cache=True, nogil=True)
def _forward(C, gamma, P):
    m, n = C.shape
    V = np.empty((m, n))
    for i in range(m):
        for j in range(n):
            c = C[i, j]
            if i == 0 and j == 0:
                V[0, 0] = c
                P[0, 0, 0] = 0.0
                P[0, 0, 1] = 1.0
                P[0, 0, 2] = 0.0
            elif i == 0:
                V[i, j] = c + V[i, j - 1]
                P[i, j, 0] = 1.0
                P[i, j, 1] = 0.0
                P[i, j, 2] = 0.0
            elif j == 0:
                V[i, j] = c + V[i - 1, j]
                P[i, j, 0] = 0.0
                P[i, j, 1] = 0.0
                P[i, j, 2] = 1.0
            else:
                a = V[i, j - 1]
                b = V[i - 1, j - 1]
                d = V[i - 1, j]
                if gamma == 0.0:
                    P[i, j, 0] = 0.0
                    P[i, j, 1] = 0.0
                    P[i, j, 2] = 0.0
                    if a <= b and a <= d:
                        V[i, j] = c + a
                        P[i, j, 0] = 1.0
                    elif b <= d:
                        V[i, j] = c + b
                        P[i, j, 1] = 1.0
                    else:
                        V[i, j] = c + d
                        P[i, j, 2] = 1.0
                else:
                    lo = min(a, min(b, d))
                    ea = math.exp((lo - a) / gamma)
                    eb = math.exp((lo - b) / gamma)
                    ed = math.exp((lo - d) / gamma)
                    s = ea + eb + ed
                    V[i, j] = c + lo - gamma * math.log(s)
                    P[i, j, 0] = ea / s
                    P[i, j, 1] = eb / s
                    P[i, j, 2] = ed / s
    return V[m - 1, n - 1]


@numba.njit(cache=True, nogil=True)
def _backward(P):
    m, n = P.shape[0], P.shape[1]
    E = np.zeros((m, n))
    E[m - 1, n - 1] = 1.0
    for j in range(n - 1, -1, -1):
        for i in range(m - 1, -1, -1):
            if i == m - 1 and j == n - 1:
                continue
            s = 0.0
            if j + 1 < n:
                s += P[i, j + 1, 0] * E[i, j + 1]
                if i + 1 < m:
                    s += P[i + 1, j + 1, 1] * E[i + 1, j + 1]
            if i + 1 < m:
                s += P[i + 1, j, 2] * E[i + 1, j]
            E[i, j] = s
    return E


@numba.njit(cache=True, nogil=True)
def _directional(P, Z):
    m, n = Z.shape
    Vd = np.empty((m, n))
    for i in range(m):
        for j in range(n):
            s = Z[i, j]
            if j > 0:
                s += P[i, j, 0] * Vd[i, j - 1]
                if i > 0:
                    s += P[i, j, 1] * Vd[i - 1, j - 1]
            if i > 0:
                s += P[i, j, 2] * Vd[i - 1, j]
            Vd[i, j] = s
    return Vd


@numba.njit(cache=True, nogil=True)
def _hessian(P, Vd, E):
    # Returns gamma * (Hessian product); the caller rescales.
    m, n = E.shape
    Pd = np.zeros((m, n, 3))
    for i in range(m):
        for j in range(n):
            va = Vd[i, j - 1] if j > 0 else 0.0
            vb = Vd[i - 1, j - 1] if (i > 0 and j > 0) else 0.0
            vc = Vd[i - 1, j] if i > 0 else 0.0
            inner = P[i, j, 0] * va + P[i, j, 1] * vb + P[i, j, 2] * vc
            Pd[i, j, 0] = P[i, j, 0] * (inner - va)
            Pd[i, j, 1] = P[i, j, 1] * (inner - vb)
            Pd[i, j, 2] = P[i, j, 2] * (inner - vc)
    Ed = np.zeros((m, n))
    for j in range(n - 1, -1, -1):
        for i in range(m - 1, -1, -1):
            if i == m - 1 and j == n - 1:
                continue
            s = 0.0
            if j + 1 < n:
                s += Pd[i, j + 1, 0] * E[i, j + 1] + P[i, j + 1, 0] * Ed[i, j + 1]
                if i + 1 < m:
                    s += (Pd[i + 1, j + 1, 1] * E[i + 1, j + 1]
                          + P[i + 1, j + 1, 1] * Ed[i + 1, j + 1])
            if i + 1 < m:
                s += Pd[i + 1, j, 2] * E[i + 1, j] + P[i + 1, j, 2] * Ed[i + 1, j]
            Ed[i, j] = s
    return Ed


@numba.njit(cache=True, nogil=True)
def _uniform(m, n):
    # Path counting in the log domain so that huge Delannoy numbers do not
    # overflow; P[i, j, k] = count(predecessor k) / count(i, j).
    L = np.empty((m, n))
    P = np.zeros((m, n, 3))
    for i in range(m):
        for j in range(n):
            if i == 0 and j == 0:
                L[0, 0] = 0.0
                P[0, 0, 1] = 1.0
            elif i == 0:
                L[i, j] = L[i, j - 1]
                P[i, j, 0] = 1.0
            elif j == 0:
                L[i, j] = L[i - 1, j]
                P[i, j, 2] = 1.0
            else:
                a = L[i, j - 1]
                b = L[i - 1, j - 1]
                d = L[i - 1, j]
                hi = max(a, max(b, d))
                ea = math.exp(a - hi)
                eb = math.exp(b - hi)
                ed = math.exp(d - hi)
                s = ea + eb + ed
                L[i, j] = hi + math.log(s)
                P[i, j, 0] = ea / s
                P[i, j, 1] = eb / s
                P[i, j, 2] = ed / s
    return P


def _sdtw(C: np.ndarray, gamma: float) -> tuple[float, np.ndarray]:
    """Unchecked forward pass; C must already be validated."""
    P = np.empty((C.shape[0], C.shape[1], 3))
    value = _forward(C, gamma, P)
    return float(value), P


def hard_dtw(C) -> tuple[float, np.ndarray]:
    """DTW value and an optimal alignment matrix.

    Ties are broken in the order left, diagonal, up when backtracking.
    """
    C = as_cost_matrix(C)
    value, P = _sdtw(C, 0.0)
    m, n = C.shape
    path = np.zeros((m, n), dtype=np.int8)
    i, j = m - 1, n - 1
    path[i, j] = 1
    while i > 0 or j > 0:
        k = int(np.argmax(P[i, j]))
        if k == LEFT:
            j -= 1
        elif k == DIAG:
            i -= 1
            j -= 1
        else:
            i -= 1
        path[i, j] = 1
    return value, path


def soft_dtw_forward(C, gamma: float) -> tuple[float, TransitionTensor]:
    """Soft-DTW value and the transition tensor of its Gibbs random walk.

    ``gamma == 0`` gives the hard DTW value together with the 0/1 indicator of
    the tie-broken optimal predecessors.
    """
    gamma = _check_gamma(gamma)
    C = as_cost_matrix(C)
    value, P = _sdtw(C, gamma)
    return value, TransitionTensor(P, gamma)


def _check_transitions(transitions: TransitionTensor) -> np.ndarray:
    P = transitions.p
    if P.ndim != 3 or P.shape[2] != 3 or P.shape[0] < 1 or P.shape[1] < 1:
        raise InvariantError(f"transition tensor must have shape (m, n, 3), got {P.shape}")
    if np.any(P < 0.0) or np.any(P > 1.0) or not np.all(np.isfinite(P)):
        raise InvariantError("transition probabilities must lie in [0, 1]")
    if np.max(np.abs(P.sum(axis=2) - 1.0)) > 1e-12:
        raise InvariantError("transition probabilities do not sum to one")
    if np.any(P[0, 1:, 1:] != 0.0):
        raise InvariantError("first row points outside the grid")
    if np.any(P[1:, 0, :2] != 0.0):
        raise InvariantError("first column points outside the grid")
    return P


def expected_alignment(transitions: TransitionTensor) -> np.ndarray:
    """Cell-visit marginals of the random walk encoded by ``transitions``.

    For transitions from :func:`soft_dtw_forward` this is the gradient of
    soft-DTW with respect to the cost matrix.
    """
    P = _check_transitions(transitions)
    return _backward(P)


def directional_derivative(transitions: TransitionTensor, Z) -> tuple[float, np.ndarray]:
    """Return ``<E, Z>`` and the forward table needed by :func:`hessian_product`."""
    P = _check_transitions(transitions)
    Z = np.ascontiguousarray(Z, dtype=np.float64)
    if Z.shape != P.shape[:2]:
        raise InputError(f"direction has shape {Z.shape}, expected {P.shape[:2]}")
    if not np.all(np.isfinite(Z)):
        raise InputError("direction contains non-finite entries")
    Vd = _directional(P, Z)
    return float(Vd[-1, -1]), Vd


def hessian_product(transitions: TransitionTensor, vdot, E, Z) -> np.ndarray:
    """Product of the soft-DTW Hessian (w.r.t. the cost matrix) with ``Z``.

    ``vdot`` must come from :func:`directional_derivative` with the same
    ``Z`` and ``E`` from :func:`expected_alignment`.
    """
    P = _check_transitions(transitions)
    gamma = transitions.gamma
    if gamma is None or gamma <= 0.0:
        raise ParameterError("Hessian products need transitions from soft_dtw_forward with gamma > 0")
    shape = P.shape[:2]
    vdot = np.ascontiguousarray(vdot, dtype=np.float64)
    E = np.ascontiguousarray(E, dtype=np.float64)
    for name, arr in (("vdot", vdot), ("E", E), ("Z", np.shape(Z))):
        got = arr if isinstance(arr, tuple) else arr.shape
        if got != shape:
            raise InputError(f"{name} has shape {got}, expected {shape}")
    return _hessian(P, vdot, E) / gamma


def delannoy(a: int, b: int) -> int:
    """Delannoy number D(a, b) as an exact integer."""
    return sum(math.comb(a, k) * math.comb(b, k) << k for k in range(min(a, b) + 1))


@functools.lru_cache(maxsize=64)
def _uniform_cached(m: int, n: int) -> np.ndarray:
    P = _uniform(m, n)
    P.flags.writeable = False
    return P


def uniform_transitions(m: int, n: int) -> TransitionTensor:
    """Transitions of the uniform distribution over all m x n alignments."""
    if m < 1 or n < 1:
        raise DimensionError(f"dimensions must be positive, got ({m}, {n})")
    return TransitionTensor(_uniform_cached(int(m), int(n)), None)


def alignment_count(m: int, n: int) -> tuple[int, TransitionTensor]:
    """Number of monotonic alignments of an m x n grid, with uniform transitions."""
    if m < 1 or n < 1:
        raise DimensionError(f"dimensions must be positive, got ({m}, {n})")
    return delannoy(m - 1, n - 1), uniform_transitions(m, n)


def mean_cost(C) -> tuple[float, np.ndarray]:
    """Average alignment cost over all alignments and the mean alignment matrix."""
    C = as_cost_matrix(C)
    P = _uniform_cached(*C.shape)
    value = _directional(P, C)[-1, -1]
    return float(value), _backward(P)


def sdtw_value_and_grad(C, gamma: float) -> tuple[float, np.ndarray]:
    """Soft-DTW value and its gradient (the expected alignment)."""
    value, T = soft_dtw_forward(C, gamma)
    return value, _backward(T.p)
