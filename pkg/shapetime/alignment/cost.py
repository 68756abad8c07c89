from __future__ import annotations

import numpy as np

from shapetime.core.errors import DimensionError, ParameterError
from shapetime.domain.entities import CostKind, CostMatrix, SeriesLike, as_values

COST_KINDS: tuple[CostKind, ...] = ("euclidean", "l1", "half_gaussian")


def _check_kind(kind: str, gamma: float) -> None:
    if kind not in COST_KINDS:
        raise ParameterError(f"unknown cost kind {kind!r}")
    if kind == "half_gaussian" and not gamma > 0:
        raise ParameterError(f"half_gaussian cost needs gamma > 0, got {gamma}")


def _pairwise(y: np.ndarray, z: np.ndarray) -> np.ndarray:
    if y.ndim != 3 or z.ndim != 3 or y.shape[0] != z.shape[0]:
        raise DimensionError(f"expected batched series (B, n, d) and (B, m, d), got {y.shape} and {z.shape}")
    if y.shape[2] != z.shape[2]:
        raise DimensionError(f"series dimensions differ: {y.shape[2]} != {z.shape[2]}")
    return y[:, :, None, :] - z[:, None, :, :]


def cost_matrix_batch(y: np.ndarray, z: np.ndarray, kind: CostKind = "euclidean", gamma: float = 1.0) -> np.ndarray:
    """(B, n, d) x (B, m, d) -> (B, n, m) pairwise costs."""
    _check_kind(kind, gamma)
    diff = _pairwise(np.asarray(y, dtype=np.float64), np.asarray(z, dtype=np.float64))
    if kind == "l1":
        return np.abs(diff).sum(axis=-1)
    sq = np.square(diff).sum(axis=-1)
    if kind == "euclidean":
        return sq
    return gamma * (sq + np.log(2.0 - np.exp(-sq)))


def cost_grad(y: np.ndarray, z: np.ndarray, kind: CostKind = "euclidean", gamma: float = 1.0) -> np.ndarray:
    """dDelta[b, i, j] / dy[b, i, :] as a (B, n, m, d) array; the derivative w.r.t. z[b, j, :] is its negation."""
    _check_kind(kind, gamma)
    diff = _pairwise(np.asarray(y, dtype=np.float64), np.asarray(z, dtype=np.float64))
    if kind == "l1":
        return np.sign(diff)
    if kind == "euclidean":
        return 2.0 * diff
    e = np.exp(-np.square(diff).sum(axis=-1))
    dd = gamma * (1.0 + e / (2.0 - e))
    return dd[..., None] * 2.0 * diff


def chain_to_series(weights: np.ndarray, dcost: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pull a gradient on the cost matrix (B, n, m) back to both series: ((B, n, d), (B, m, d))."""
    weighted = weights[..., None] * dcost
    return weighted.sum(axis=2), -weighted.sum(axis=1)


def cost_matrix(y: SeriesLike, z: SeriesLike, kind: CostKind = "euclidean", gamma: float = 1.0) -> CostMatrix:
    yv = as_values(y)
    zv = as_values(z)
    if yv.shape[1] != zv.shape[1]:
        raise DimensionError(f"series dimensions differ: {yv.shape[1]} != {zv.shape[1]}")
    delta = cost_matrix_batch(yv[None], zv[None], kind, gamma)[0]
    return CostMatrix(delta=delta, kind=kind, gamma=float(gamma))
