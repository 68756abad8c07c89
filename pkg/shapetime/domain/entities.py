from __future__ import annotations

from collections.abc import Iterator
from dataclasses import dataclass, field
from typing import Literal, Union

import numpy as np

from shapetime.core.errors import DimensionError, NonFiniteError

CostKind = Literal["euclidean", "l1", "half_gaussian"]
PathKind = Literal["hard", "soft"]
OmegaKind = Literal["dissim_quadratic", "sim_inverse_quadratic", "sakoe_chiba", "weighted"]
KernelKind = Literal["shape", "time", "shape_quality", "time_quality"]
SplitName = Literal["train", "valid", "test"]


@dataclass(frozen=True)
class TimeSeries:
    """A length-n, dimension-d trajectory stored time-major as an (n, d) float64 array."""

    values: np.ndarray

    @classmethod
    def from_array(cls, values: "SeriesLike") -> "TimeSeries":
        if isinstance(values, TimeSeries):
            return values
        arr = np.asarray(values, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[:, None]
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionError(f"time series must be (n, d) with n, d >= 1, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteError("time series contains non-finite values", term="series")
        arr.setflags(write=False)
        return cls(values=arr)

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def d(self) -> int:
        return int(self.values.shape[1])


SeriesLike = Union[TimeSeries, np.ndarray, list[float], list[list[float]]]


def as_values(series: SeriesLike) -> np.ndarray:
    return TimeSeries.from_array(series).values


@dataclass(frozen=True)
class CostMatrix:
    delta: np.ndarray
    kind: CostKind
    gamma: float = 1.0

    @property
    def shape(self) -> tuple[int, int]:
        return int(self.delta.shape[0]), int(self.delta.shape[1])


@dataclass(frozen=True)
class PathMatrix:
    a: np.ndarray
    kind: PathKind

    def cells(self) -> list[tuple[int, int]]:
        """1-based (i, j) cells with a nonzero entry, in row-major order."""
        rows, cols = np.nonzero(self.a)
        return [(int(i) + 1, int(j) + 1) for i, j in zip(rows, cols, strict=True)]


@dataclass(frozen=True)
class OmegaMatrix:
    omega: np.ndarray
    kind: OmegaKind
    band: int | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return int(self.omega.shape[0]), int(self.omega.shape[1])

    def scaled(self, factor: float) -> "OmegaMatrix":
        return OmegaMatrix(omega=self.omega * float(factor), kind=self.kind, band=self.band)


@dataclass(frozen=True)
class KernelMatrix:
    k: np.ndarray
    kind: KernelKind

    @property
    def size(self) -> int:
        return int(self.k.shape[0])


@dataclass(frozen=True)
class QualityVector:
    q: np.ndarray
    mu: float
    clamped: int = 0


@dataclass(frozen=True)
class ChangePointSet:
    indices: tuple[int, ...]
    horizon: int
    degenerate: bool = False

    def __post_init__(self) -> None:
        idx = tuple(int(i) for i in self.indices)
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise DimensionError("change points must be strictly increasing")
        if idx and (idx[0] < 1 or idx[-1] > self.horizon):
            raise DimensionError(f"change points must lie within [1, {self.horizon}]")
        object.__setattr__(self, "indices", idx)

    def __len__(self) -> int:
        return len(self.indices)


@dataclass(frozen=True)
class SegmentedSeries:
    """Piecewise-linear approximation: 1-based breakpoints (first and last included) and one slope per segment."""

    breakpoints: tuple[int, ...]
    slopes: tuple[float, ...]

    @property
    def horizon(self) -> int:
        return self.breakpoints[-1]

    def step_slopes(self) -> np.ndarray:
        """Slope over each unit interval [t, t+1], t = 1..horizon-1."""
        out = np.zeros(max(self.horizon - 1, 0), dtype=np.float64)
        for (start, stop), slope in zip(zip(self.breakpoints, self.breakpoints[1:]), self.slopes, strict=True):
            out[start - 1 : stop - 1] = slope
        return out


@dataclass(frozen=True)
class SyntheticMeta:
    i1: int
    i2: int
    j1: float
    j2: float
    step_index: int
    step_amplitude: float

    def target_step_index(self, context_length: int) -> int:
        return self.step_index - context_length


@dataclass(frozen=True)
class SyntheticInstance:
    input: np.ndarray
    target: np.ndarray
    meta: SyntheticMeta
    input_noise: np.ndarray
    target_noise: np.ndarray

    def noiseless_target(self) -> np.ndarray:
        return self.target - self.target_noise


@dataclass(frozen=True)
class DatasetSplit:
    """inputs (N, T, d); targets (N, tau, d), or (N, K, tau, d) when every input has K admissible futures."""

    split: SplitName
    inputs: np.ndarray
    targets: np.ndarray
    seed: int
    meta: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def multi_future(self) -> bool:
        return self.targets.ndim == 4

    @property
    def context_length(self) -> int:
        return int(self.inputs.shape[1])

    @property
    def horizon(self) -> int:
        return int(self.targets.shape[-2])

    def __len__(self) -> int:
        return int(self.inputs.shape[0])

    def pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """Every (input, future) tuple as a separate example."""
        if not self.multi_future:
            return self.inputs, self.targets
        k = int(self.targets.shape[1])
        inputs = np.repeat(self.inputs, k, axis=0)
        targets = self.targets.reshape(-1, *self.targets.shape[2:])
        return inputs, targets

    def instances(self) -> Iterator[SyntheticInstance]:
        required = ("i1", "i2", "j1", "j2", "step_index", "step_amplitude", "input_noise", "target_noise")
        if any(key not in self.meta for key in required):
            raise DimensionError("split carries no synthetic generator metadata")
        for idx in range(len(self)):
            yield SyntheticInstance(
                input=self.inputs[idx],
                target=self.targets[idx],
                meta=SyntheticMeta(
                    i1=int(self.meta["i1"][idx]),
                    i2=int(self.meta["i2"][idx]),
                    j1=float(self.meta["j1"][idx]),
                    j2=float(self.meta["j2"][idx]),
                    step_index=int(self.meta["step_index"][idx]),
                    step_amplitude=float(self.meta["step_amplitude"][idx]),
                ),
                input_noise=self.meta["input_noise"][idx],
                target_noise=self.meta["target_noise"][idx],
            )


@dataclass(frozen=True)
class SplitTriple:
    train: DatasetSplit
    valid: DatasetSplit
    test: DatasetSplit

    def __iter__(self) -> Iterator[DatasetSplit]:
        return iter((self.train, self.valid, self.test))


@dataclass(frozen=True)
class NormalizationStats:
    method: Literal["none", "zscore", "minmax"]
    shift: float
    scale: float

    def apply(self, values: np.ndarray) -> np.ndarray:
        return (values - self.shift) / self.scale

    def invert(self, values: np.ndarray) -> np.ndarray:
        return values * self.scale + self.shift


@dataclass(frozen=True)
class WindowedDataset:
    splits: SplitTriple
    normalization: NormalizationStats
    n_windows_total: int
