from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from shapetime.alignment import (
    chain_to_series,
    cost_grad,
    cost_matrix_batch,
    dtw_hvp_from_tables,
    omega_sim,
    soft_dtw_tables,
)
from shapetime.core.errors import DimensionError, ParameterError
from shapetime.domain.entities import CostKind, KernelMatrix, SeriesLike, as_values

BaseKernel = Literal["shape", "time"]


@dataclass(frozen=True)
class GramResult:
    """Symmetrized Gram matrices (M, N, N) and, when requested, per-entry gradients w.r.t. both arguments.

    row_grad[s, p, q] = dk(p, q)/dy_p and col_grad[s, p, q] = dk(p, q)/dy_q, each of shape (n, d).
    """

    k: np.ndarray
    row_grad: np.ndarray | None = None
    col_grad: np.ndarray | None = None

    def pullback(self, upstream: np.ndarray) -> np.ndarray:
        """Gradient w.r.t. the items (M, N, n, d) given dL/dK (M, N, N)."""
        if self.row_grad is None or self.col_grad is None:
            raise ParameterError("gram was computed without gradients")
        g = 0.5 * (upstream + np.swapaxes(upstream, 1, 2))
        return np.einsum("spq,spqnd->spnd", g, self.row_grad) + np.einsum("spq,spqnd->sqnd", g, self.col_grad)


def gram_batch(
    sets: np.ndarray,
    kind: BaseKernel = "shape",
    *,
    gamma: float,
    cost_kind: CostKind = "half_gaussian",
    need_grad: bool = False,
) -> GramResult:
    """Kernel matrices for M independent sets of N equal-length series, sets shaped (M, N, n, d)."""
    sets = np.asarray(sets, dtype=np.float64)
    if sets.ndim != 4:
        raise DimensionError(f"expected (M, N, n, d) item sets, got shape {sets.shape}")
    if kind not in ("shape", "time"):
        raise ParameterError(f"unknown kernel kind {kind!r}")
    s, big_n, n, d = sets.shape

    rows = np.broadcast_to(sets[:, :, None], (s, big_n, big_n, n, d)).reshape(-1, n, d)
    cols = np.broadcast_to(sets[:, None, :], (s, big_n, big_n, n, d)).reshape(-1, n, d)
    delta = cost_matrix_batch(rows, cols, cost_kind, gamma)
    tables = soft_dtw_tables(delta, gamma)
    e = tables.alignment
    k_shape = np.exp(-tables.values / gamma)

    if kind == "shape":
        k = k_shape
        weights = (-k_shape / gamma)[:, None, None] * e if need_grad else None
    else:
        om = omega_sim(n, n).omega
        temporal = np.einsum("bnm,nm->b", e, om)
        k = k_shape * temporal
        weights = None
        if need_grad:
            weights = (-k / gamma)[:, None, None] * e + k_shape[:, None, None] * dtw_hvp_from_tables(tables, om)

    k = k.reshape(s, big_n, big_n)
    k = 0.5 * (k + np.swapaxes(k, 1, 2))
    if weights is None:
        return GramResult(k=k)
    row_grad, col_grad = chain_to_series(weights, cost_grad(rows, cols, cost_kind, gamma))
    return GramResult(
        k=k,
        row_grad=row_grad.reshape(s, big_n, big_n, n, d),
        col_grad=col_grad.reshape(s, big_n, big_n, n, d),
    )


def _pair(y: SeriesLike, z: SeriesLike) -> tuple[np.ndarray, np.ndarray]:
    yv, zv = as_values(y), as_values(z)
    if yv.shape[1] != zv.shape[1]:
        raise DimensionError(f"series dimensions differ: {yv.shape[1]} != {zv.shape[1]}")
    return yv[None], zv[None]


def k_shape(y: SeriesLike, z: SeriesLike, gamma: float, cost_kind: CostKind = "half_gaussian") -> float:
    yv, zv = _pair(y, z)
    tables = soft_dtw_tables(cost_matrix_batch(yv, zv, cost_kind, gamma), gamma)
    return float(np.exp(-tables.values[0] / gamma))


def k_time(y: SeriesLike, z: SeriesLike, gamma: float, cost_kind: CostKind = "half_gaussian") -> float:
    yv, zv = _pair(y, z)
    if yv.shape[1] != zv.shape[1]:
        raise DimensionError("time kernel needs equal-length series")
    n = yv.shape[1]
    tables = soft_dtw_tables(cost_matrix_batch(yv, zv, cost_kind, gamma), gamma)
    temporal = float(np.sum(tables.alignment[0] * omega_sim(n, n).omega))
    return float(np.exp(-tables.values[0] / gamma)) * temporal


def gram(
    items: list[SeriesLike],
    kind: BaseKernel = "shape",
    *,
    gamma: float,
    cost_kind: CostKind = "half_gaussian",
) -> KernelMatrix:
    if not items:
        raise DimensionError("gram needs at least one item")
    stacked = np.stack([as_values(it) for it in items])
    return KernelMatrix(k=gram_batch(stacked[None], kind, gamma=gamma, cost_kind=cost_kind).k[0], kind=kind)
