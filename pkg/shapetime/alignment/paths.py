from __future__ import annotations

from collections.abc import Iterator

import numpy as np
from scipy.special import logsumexp

from shapetime.alignment.soft_dtw import _as_batch, _check_gamma, soft_dtw_batch
from shapetime.core.errors import DimensionError
from shapetime.domain.entities import CostMatrix

# DP over (n+2)(m+2) cells per perturbation; chunking keeps the naive baseline's memory flat
_FD_CHUNK = 256


def delannoy(n: int, m: int) -> int:
    """Number of warping paths from (1, 1) to (n, m); exact for any size."""
    if n < 1 or m < 1:
        raise DimensionError(f"delannoy needs n, m >= 1, got {n}, {m}")
    row = [1] * m
    for _ in range(1, n):
        nxt = [1] * m
        for j in range(1, m):
            nxt[j] = nxt[j - 1] + row[j] + row[j - 1]
        row = nxt
    return row[-1]


def enumerate_paths(n: int, m: int) -> Iterator[np.ndarray]:
    """Every valid warping path as a binary (n, m) matrix."""
    if n < 1 or m < 1:
        raise DimensionError(f"paths need n, m >= 1, got {n}, {m}")

    def walk(i: int, j: int, cells: list[tuple[int, int]]) -> Iterator[list[tuple[int, int]]]:
        if (i, j) == (n - 1, m - 1):
            yield cells
            return
        for di, dj in ((0, 1), (1, 0), (1, 1)):
            ni, nj = i + di, j + dj
            if ni < n and nj < m:
                yield from walk(ni, nj, [*cells, (ni, nj)])

    for cells in walk(0, 0, [(0, 0)]):
        a = np.zeros((n, m))
        rows, cols = zip(*cells, strict=True)
        a[list(rows), list(cols)] = 1.0
        yield a


def enumeration_oracle(delta: CostMatrix | np.ndarray, gamma: float) -> tuple[float, np.ndarray]:
    """Soft-DTW value and Gibbs-expected alignment by summing over every path."""
    gamma = _check_gamma(gamma)
    d = _as_batch(delta)[0]
    paths = np.stack(list(enumerate_paths(*d.shape)))
    costs = np.einsum("knm,nm->k", paths, d)
    log_z = logsumexp(-costs / gamma)
    probs = np.exp(-costs / gamma - log_z)
    return float(-gamma * log_z), np.einsum("k,knm->nm", probs, paths)


def naive_alignment_fd(delta: CostMatrix | np.ndarray, gamma: float, *, h: float = 1e-6) -> np.ndarray:
    """Soft alignment by central differences over every cost entry: 2nm forward DPs."""
    d = _as_batch(delta)[0]
    n, m = d.shape
    size = n * m
    values = np.empty(2 * size)
    for start in range(0, 2 * size, _FD_CHUNK):
        idx = np.arange(start, min(start + _FD_CHUNK, 2 * size))
        batch = np.repeat(d.reshape(1, size), idx.size, axis=0)
        batch[np.arange(idx.size), idx % size] += np.where(idx < size, h, -h)
        values[idx] = soft_dtw_batch(batch.reshape(-1, n, m), gamma)
    return ((values[:size] - values[size:]) / (2.0 * h)).reshape(n, m)
