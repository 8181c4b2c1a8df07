"""Brute-force statistics by explicit enumeration of every alignment.

Exponential in the grid size; meant for checking the dynamic programs on small
inputs.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from scipy.special import entr, logsumexp

from .alignment import as_cost_matrix, delannoy
from .errors import DimensionError, ParameterError, SizeError

MAX_ALIGNMENTS = 10**6

# right, diagonal, down
_MOVES = ((0, 1), (1, 1), (1, 0))


@dataclass(frozen=True)
class GibbsStats:
    sdtw_value: float
    expected_alignment: np.ndarray
    entropy: float
    mean_cost_value: float
    dtw_value: float
    path_count: int


def _guard(m: int, n: int) -> int:
    if m < 1 or n < 1:
        raise DimensionError(f"dimensions must be positive, got ({m}, {n})")
    count = delannoy(m - 1, n - 1)
    if count > MAX_ALIGNMENTS:
        raise SizeError(f"{m}x{n} grid has {count} alignments, above the limit of {MAX_ALIGNMENTS}")
    return count


@functools.lru_cache(maxsize=128)
def _stack(m: int, n: int) -> np.ndarray:
    paths = []
    cells = [(0, 0)]

    def walk(i, j):
        if i == m - 1 and j == n - 1:
            A = np.zeros((m, n), dtype=np.int8)
            A[tuple(np.array(cells).T)] = 1
            paths.append(A)
            return
        for di, dj in _MOVES:
            ni, nj = i + di, j + dj
            if ni < m and nj < n:
                cells.append((ni, nj))
                walk(ni, nj)
                cells.pop()

    walk(0, 0)
    out = np.stack(paths)
    out.flags.writeable = False
    return out


def enumerate_alignments(m: int, n: int) -> list[np.ndarray]:
    """All monotonic m x n alignment matrices, depth-first over (right, diagonal, down)."""
    _guard(m, n)
    return list(_stack(m, n))


def oracle_stats(C, gamma: float) -> GibbsStats:
    C = as_cost_matrix(C)
    gamma = float(gamma)
    if not gamma > 0.0:
        raise ParameterError(f"gamma must be positive, got {gamma}")
    count = _guard(*C.shape)
    A = _stack(*C.shape)
    scores = A.reshape(len(A), -1) @ C.ravel()
    logits = -scores / gamma
    log_z = logsumexp(logits)
    p = np.exp(logits - log_z)
    E = np.tensordot(p, A, axes=1)
    return GibbsStats(
        sdtw_value=float(-gamma * log_z),
        expected_alignment=E,
        entropy=float(np.sum(entr(p))),
        mean_cost_value=float(np.mean(scores)),
        dtw_value=float(np.min(scores)),
        path_count=count,
    )
