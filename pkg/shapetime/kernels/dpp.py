from __future__ import annotations

import logging

import numpy as np

from shapetime.core.errors import ContractError, DimensionError
from shapetime.domain.entities import KernelMatrix, QualityVector

logger = logging.getLogger(__name__)

QUALITY_FLOOR = 1e-6
_SYMMETRY_TOL = 1e-12


def _kernel_array(k: KernelMatrix | np.ndarray) -> np.ndarray:
    return k.k if isinstance(k, KernelMatrix) else np.asarray(k, dtype=np.float64)


def quality_vector(dilate_values: np.ndarray, mu: float, *, floor: float = QUALITY_FLOOR) -> QualityVector:
    q = mu * (1.0 - np.asarray(dilate_values, dtype=np.float64))
    clamped = int(np.sum(q < floor))
    if clamped:
        logger.warning("quality_clamped", extra={"clamped": clamped, "size": int(q.size), "floor": floor})
    return QualityVector(q=np.maximum(q, floor), mu=float(mu), clamped=clamped)


def quality_regularize(
    k: KernelMatrix | np.ndarray,
    q: QualityVector | np.ndarray,
    *,
    floor: float = QUALITY_FLOOR,
) -> KernelMatrix:
    """Congruence Diag(q) K Diag(q)."""
    arr = _kernel_array(k)
    qv = q.q if isinstance(q, QualityVector) else np.asarray(q, dtype=np.float64)
    if qv.shape != (arr.shape[0],):
        raise DimensionError(f"quality vector of length {qv.size} does not match kernel of size {arr.shape[0]}")
    if np.any(qv <= 0):
        logger.warning("quality_clamped", extra={"clamped": int(np.sum(qv <= 0)), "size": int(qv.size), "floor": floor})
        qv = np.maximum(qv, floor)
    base = k.kind if isinstance(k, KernelMatrix) else "shape"
    kind = base if base.endswith("_quality") else f"{base}_quality"
    return KernelMatrix(k=qv[:, None] * arr * qv[None, :], kind=kind)  # type: ignore[arg-type]


def normalize_kernel(k: np.ndarray) -> np.ndarray:
    """Cosine normalization K_ij / sqrt(K_ii K_jj) over the last two axes."""
    k = np.asarray(k, dtype=np.float64)
    diag = np.sqrt(np.diagonal(k, axis1=-2, axis2=-1))
    return k / (diag[..., :, None] * diag[..., None, :])


def dpp_loss_batch(k: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Negative expected DPP cardinality per kernel (M,) and its gradient (M, N, N)."""
    k = np.asarray(k, dtype=np.float64)
    if k.ndim == 2:
        k = k[None]
    if k.ndim != 3 or k.shape[1] != k.shape[2]:
        raise DimensionError(f"kernel must be square, got shape {k.shape}")
    scale = max(1.0, float(np.max(np.abs(k)))) if k.size else 1.0
    if not np.allclose(k, np.swapaxes(k, 1, 2), rtol=0.0, atol=_SYMMETRY_TOL * scale):
        raise ContractError("kernel matrix is not symmetric")
    lam, vec = np.linalg.eigh(0.5 * (k + np.swapaxes(k, 1, 2)))
    values = -np.sum(lam / (1.0 + lam), axis=1)
    grad = np.einsum("mij,mj,mkj->mik", vec, -1.0 / np.square(1.0 + lam), vec)
    return values, grad


def dpp_diversity_loss(k: KernelMatrix | np.ndarray) -> tuple[float, np.ndarray]:
    values, grads = dpp_loss_batch(_kernel_array(k))
    return float(values[0]), grads[0]
