from __future__ import annotations

import numpy as np

from shapetime.alignment.soft_dtw import _as_batch, _check_omega
from shapetime.domain.entities import CostMatrix, OmegaMatrix, PathMatrix

# backtracking preference order on ties: diagonal, then (i-1, j), then (i, j-1)
_MOVES = np.array([(-1, -1), (-1, 0), (0, -1)])


def hard_dtw_batch(delta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Exact DTW values (B,) and binary optimal paths (B, n, m)."""
    delta = _as_batch(delta)
    b, n, m = delta.shape
    c = np.full((b, n + 1, m + 1), np.inf)
    c[:, 0, 0] = 0.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            c[:, i, j] = delta[:, i - 1, j - 1] + np.minimum(
                np.minimum(c[:, i - 1, j - 1], c[:, i - 1, j]), c[:, i, j - 1]
            )

    paths = np.zeros((b, n, m))
    rows = np.arange(b)
    i = np.full(b, n)
    j = np.full(b, m)
    paths[rows, i - 1, j - 1] = 1.0
    active = (i > 1) | (j > 1)
    while np.any(active):
        cand = np.stack((c[rows, i - 1, j - 1], c[rows, i - 1, j], c[rows, i, j - 1]), axis=1)
        move = _MOVES[np.argmin(cand, axis=1)]
        i = np.where(active, i + move[:, 0], i)
        j = np.where(active, j + move[:, 1], j)
        paths[rows[active], i[active] - 1, j[active] - 1] = 1.0
        active = (i > 1) | (j > 1)
    return c[:, n, m].copy(), paths


def hard_dtw(delta: CostMatrix | np.ndarray) -> tuple[float, PathMatrix]:
    values, paths = hard_dtw_batch(_as_batch(delta))
    return float(values[0]), PathMatrix(a=paths[0], kind="hard")


def tdi_hard(delta: CostMatrix | np.ndarray, omega: OmegaMatrix | np.ndarray) -> float:
    d = _as_batch(delta)[0]
    om = _check_omega(d, omega)
    _, path = hard_dtw(d)
    return float(np.sum(path.a * om))
