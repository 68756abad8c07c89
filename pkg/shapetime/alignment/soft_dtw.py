from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from shapetime.alignment.cost import chain_to_series, cost_grad, cost_matrix_batch
from shapetime.alignment.omega import omega_array
from shapetime.core.errors import DimensionError, ParameterError
from shapetime.domain.entities import CostKind, CostMatrix, OmegaMatrix, PathMatrix, SeriesLike, as_values

# stands in for +inf on the sentinel border so log-sum-exp stays finite
BIG_COST = 1e30


def _check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not gamma > 0:
        raise ParameterError(f"gamma must be > 0, got {gamma}")
    return gamma


def _as_batch(delta: CostMatrix | np.ndarray) -> np.ndarray:
    arr = delta.delta if isinstance(delta, CostMatrix) else np.asarray(delta, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[None]
    if arr.ndim != 3 or arr.shape[1] < 1 or arr.shape[2] < 1:
        raise DimensionError(f"cost matrix must be (n, m) or (B, n, m) with n, m >= 1, got {arr.shape}")
    return arr


def _softmin3(a: np.ndarray, b: np.ndarray, c: np.ndarray, gamma: float) -> np.ndarray:
    return -gamma * logsumexp(np.stack((a, b, c)) / -gamma, axis=0)


def soft_dtw_forward_batch(delta: np.ndarray, gamma: float) -> np.ndarray:
    """Accumulated soft costs R, shape (B, n+2, m+2); R[:, n, m] is the soft-DTW value."""
    gamma = _check_gamma(gamma)
    delta = _as_batch(delta)
    b, n, m = delta.shape
    r = np.full((b, n + 2, m + 2), BIG_COST)
    r[:, 0, 0] = 0.0
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            r[:, i, j] = delta[:, i - 1, j - 1] + _softmin3(r[:, i - 1, j - 1], r[:, i - 1, j], r[:, i, j - 1], gamma)
    return r


@dataclass(frozen=True)
class SoftDtwTables:
    """Forward and reverse tables of one batched soft-DTW evaluation, kept for gradient and HVP reuse."""

    gamma: float
    delta: np.ndarray
    r: np.ndarray
    r_rev: np.ndarray
    delta_pad: np.ndarray
    e: np.ndarray

    @property
    def values(self) -> np.ndarray:
        n, m = self.delta.shape[1:]
        return self.r[:, n, m].copy()

    @property
    def alignment(self) -> np.ndarray:
        n, m = self.delta.shape[1:]
        return self.e[:, 1 : n + 1, 1 : m + 1].copy()


def soft_dtw_tables(delta: np.ndarray, gamma: float) -> SoftDtwTables:
    gamma = _check_gamma(gamma)
    delta = _as_batch(delta)
    b, n, m = delta.shape
    r = soft_dtw_forward_batch(delta, gamma)

    r_rev = r.copy()
    r_rev[:, :, m + 1] = -BIG_COST
    r_rev[:, n + 1, :] = -BIG_COST
    r_rev[:, n + 1, m + 1] = r[:, n, m]
    d_pad = np.zeros((b, n + 2, m + 2))
    d_pad[:, 1 : n + 1, 1 : m + 1] = delta

    e = np.zeros((b, n + 2, m + 2))
    e[:, n + 1, m + 1] = 1.0
    for j in range(m, 0, -1):
        for i in range(n, 0, -1):
            here = r_rev[:, i, j]
            a = np.exp((r_rev[:, i + 1, j] - here - d_pad[:, i + 1, j]) / gamma)
            c = np.exp((r_rev[:, i, j + 1] - here - d_pad[:, i, j + 1]) / gamma)
            g = np.exp((r_rev[:, i + 1, j + 1] - here - d_pad[:, i + 1, j + 1]) / gamma)
            e[:, i, j] = e[:, i + 1, j] * a + e[:, i, j + 1] * c + e[:, i + 1, j + 1] * g
    return SoftDtwTables(gamma=gamma, delta=delta, r=r, r_rev=r_rev, delta_pad=d_pad, e=e)


def soft_dtw_batch(delta: np.ndarray, gamma: float) -> np.ndarray:
    delta = _as_batch(delta)
    n, m = delta.shape[1:]
    return soft_dtw_forward_batch(delta, gamma)[:, n, m].copy()


def soft_alignment_batch(delta: np.ndarray, gamma: float) -> np.ndarray:
    return soft_dtw_tables(delta, gamma).alignment


def dtw_hvp_from_tables(tables: SoftDtwTables, omega: np.ndarray) -> np.ndarray:
    """Hessian of soft-DTW w.r.t. the cost matrix applied to omega, (B, n, m).

    Directional derivative of the forward table along omega, then of the reverse table.
    """
    gamma = tables.gamma
    b, n, m = tables.delta.shape
    w = np.zeros((b, n + 2, m + 2))
    w[:, 1 : n + 1, 1 : m + 1] = np.broadcast_to(np.asarray(omega, dtype=np.float64), (b, n, m))
    r, r_rev, d_pad, e = tables.r, tables.r_rev, tables.delta_pad, tables.e

    rd = np.zeros((b, n + 2, m + 2))
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            base = r[:, i, j] - d_pad[:, i, j]
            rd[:, i, j] = (
                w[:, i, j]
                + np.exp((base - r[:, i - 1, j - 1]) / gamma) * rd[:, i - 1, j - 1]
                + np.exp((base - r[:, i - 1, j]) / gamma) * rd[:, i - 1, j]
                + np.exp((base - r[:, i, j - 1]) / gamma) * rd[:, i, j - 1]
            )
    rd[:, n + 1, m + 1] = rd[:, n, m]

    ed = np.zeros((b, n + 2, m + 2))
    for j in range(m, 0, -1):
        for i in range(n, 0, -1):
            acc = np.zeros(b)
            for si, sj in ((i + 1, j), (i, j + 1), (i + 1, j + 1)):
                weight = np.exp((r_rev[:, si, sj] - r_rev[:, i, j] - d_pad[:, si, sj]) / gamma)
                acc += weight * (ed[:, si, sj] + e[:, si, sj] * (rd[:, si, sj] - w[:, si, sj] - rd[:, i, j]) / gamma)
            ed[:, i, j] = acc
    return ed[:, 1 : n + 1, 1 : m + 1].copy()


def dtw_hvp_batch(delta: np.ndarray, omega: np.ndarray, gamma: float) -> np.ndarray:
    return dtw_hvp_from_tables(soft_dtw_tables(delta, gamma), omega)


def _check_omega(delta: np.ndarray, omega: OmegaMatrix | np.ndarray) -> np.ndarray:
    arr = omega_array(omega)
    if arr.shape != delta.shape:
        raise DimensionError(f"omega shape {arr.shape} does not match cost matrix shape {delta.shape}")
    return arr


def soft_dtw(delta: CostMatrix | np.ndarray, gamma: float) -> float:
    return float(soft_dtw_batch(_as_batch(delta), gamma)[0])


def soft_alignment(delta: CostMatrix | np.ndarray, gamma: float) -> PathMatrix:
    return PathMatrix(a=soft_alignment_batch(_as_batch(delta), gamma)[0], kind="soft")


def tdi_soft(delta: CostMatrix | np.ndarray, omega: OmegaMatrix | np.ndarray, gamma: float) -> float:
    d = _as_batch(delta)[0]
    om = _check_omega(d, omega)
    return float(np.sum(soft_alignment_batch(d, gamma)[0] * om))


def dtw_hvp(delta: CostMatrix | np.ndarray, omega: OmegaMatrix | np.ndarray, gamma: float) -> np.ndarray:
    d = _as_batch(delta)[0]
    om = _check_omega(d, omega)
    return dtw_hvp_batch(d, om, gamma)[0]


def soft_dtw_grad_wrt_series(
    y_pred: SeriesLike,
    y_true: SeriesLike,
    kind: CostKind = "euclidean",
    gamma: float = 1.0,
) -> np.ndarray:
    """Gradient of soft-DTW(cost(y_pred, y_true)) w.r.t. y_pred, same (n, d) layout as y_pred."""
    yp = as_values(y_pred)[None]
    yt = as_values(y_true)[None]
    delta = cost_matrix_batch(yp, yt, kind, gamma)
    e = soft_alignment_batch(delta, gamma)
    grad, _ = chain_to_series(e, cost_grad(yp, yt, kind, gamma))
    return grad[0]
