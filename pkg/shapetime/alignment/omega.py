from __future__ import annotations

from collections.abc import Callable

import numpy as np

from shapetime.core.errors import DimensionError, ParameterError
from shapetime.domain.entities import OmegaMatrix
from shapetime.domain.schemas import OmegaSpec

SAKOE_CHIBA_PENALTY = 1e6


def _offsets(n: int, m: int) -> np.ndarray:
    if n < 1 or m < 1:
        raise DimensionError(f"omega needs n, m >= 1, got {n}x{m}")
    i = np.arange(1, n + 1, dtype=np.float64)[:, None]
    j = np.arange(1, m + 1, dtype=np.float64)[None, :]
    return i - j


def omega_dissim(n: int, m: int, *, normalized: bool = True) -> OmegaMatrix:
    omega = np.square(_offsets(n, m))
    if normalized:
        omega = omega / float(n * n)
    return OmegaMatrix(omega=omega, kind="dissim_quadratic")


def omega_sim(n: int, m: int) -> OmegaMatrix:
    return OmegaMatrix(omega=1.0 / (np.square(_offsets(n, m)) + 1.0), kind="sim_inverse_quadratic")


def omega_sakoe_chiba(n: int, m: int, band: int, *, penalty: float = SAKOE_CHIBA_PENALTY) -> OmegaMatrix:
    if band < 0:
        raise ParameterError(f"band must be >= 0, got {band}")
    outside = np.abs(_offsets(n, m)) > band
    return OmegaMatrix(omega=np.where(outside, float(penalty), 0.0), kind="sakoe_chiba", band=int(band))


def omega_weighted(n: int, m: int, f: Callable[[np.ndarray], np.ndarray]) -> OmegaMatrix:
    lags = np.arange(max(n, m), dtype=np.float64)
    profile = np.asarray(f(lags), dtype=np.float64)
    if profile.shape != lags.shape or np.any(np.diff(profile) <= 0):
        raise ParameterError("weighting function must be strictly increasing in |i - j|")
    return OmegaMatrix(omega=np.asarray(f(np.abs(_offsets(n, m))), dtype=np.float64), kind="weighted")


def build_omega(spec: OmegaSpec, n: int, m: int) -> OmegaMatrix:
    if spec.kind == "dissim_quadratic":
        return omega_dissim(n, m, normalized=spec.normalized)
    if spec.kind == "sakoe_chiba":
        return omega_sakoe_chiba(n, m, int(spec.band or 0))
    power = spec.power
    return omega_weighted(n, m, lambda k: (k / float(n)) ** power)


def omega_array(omega: OmegaMatrix | np.ndarray) -> np.ndarray:
    if isinstance(omega, OmegaMatrix):
        return omega.omega
    return np.asarray(omega, dtype=np.float64)
