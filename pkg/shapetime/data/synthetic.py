from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from shapetime.domain.entities import DatasetSplit, SplitName, SplitTriple

logger = logging.getLogger(__name__)

GENERATOR_VERSION = "2"
SPLITS: tuple[SplitName, ...] = ("train", "valid", "test")


@dataclass(frozen=True)
class SyntheticConfig:
    context: int = 20
    horizon: int = 20
    noise_std: float = 0.1
    i1_range: tuple[int, int] = (1, 12)
    i2_max: int = 15
    min_gap: int = 2
    step_jitter: int = 3
    det_size: int = 500
    prob_inputs: int = 100
    prob_futures: int = 10
    amplitude_jitter: float = 0.05
    position_jitter: int = 2

    @property
    def step_bounds(self) -> tuple[int, int]:
        return self.context + 1, self.context + self.horizon


DEFAULT_SYNTHETIC = SyntheticConfig()


def _rng(seed: int, split: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), split])


def _draw_base(rng: np.random.Generator, cfg: SyntheticConfig) -> tuple[int, int, float, float, int]:
    lo, hi = cfg.step_bounds
    while True:
        i1 = int(rng.integers(cfg.i1_range[0], cfg.i1_range[1] + 1))
        i2 = int(rng.integers(i1 + cfg.min_gap, cfg.i2_max + 1))
        step = 2 * i2 - i1 + int(rng.integers(-cfg.step_jitter, cfg.step_jitter + 1))
        if lo <= step <= hi:
            break
    j1, j2 = (float(v) for v in rng.uniform(0.0, 1.0, size=2))
    return i1, i2, j1, j2, step


def _impulses(i1: int, i2: int, j1: float, j2: float, cfg: SyntheticConfig) -> np.ndarray:
    x = np.zeros(cfg.context)
    x[i1 - 1] = j1
    x[i2 - 1] = j2
    return x


def _step(step: int, amplitude: float, cfg: SyntheticConfig) -> np.ndarray:
    t = np.arange(cfg.context + 1, cfg.context + cfg.horizon + 1)
    return np.where(t >= step, amplitude, 0.0)


def _det_split(split: SplitName, seed: int, cfg: SyntheticConfig) -> DatasetSplit:
    rng = _rng(seed, SPLITS.index(split))
    size = cfg.det_size
    inputs = np.zeros((size, cfg.context))
    targets = np.zeros((size, cfg.horizon))
    meta = {k: np.zeros(size) for k in ("i1", "i2", "j1", "j2", "step_index", "step_amplitude")}
    for idx in range(size):
        i1, i2, j1, j2, step = _draw_base(rng, cfg)
        inputs[idx] = _impulses(i1, i2, j1, j2, cfg)
        targets[idx] = _step(step, j2 - j1, cfg)
        for key, value in zip(meta, (i1, i2, j1, j2, step, j2 - j1), strict=True):
            meta[key][idx] = value
    input_noise = rng.normal(0.0, cfg.noise_std, size=inputs.shape)
    target_noise = rng.normal(0.0, cfg.noise_std, size=targets.shape)
    meta["input_noise"] = input_noise[..., None]
    meta["target_noise"] = target_noise[..., None]
    return DatasetSplit(
        split=split,
        inputs=(inputs + input_noise)[..., None],
        targets=(targets + target_noise)[..., None],
        seed=int(seed),
        meta=meta,
    )


def _prob_split(split: SplitName, seed: int, cfg: SyntheticConfig) -> DatasetSplit:
    rng = _rng(seed, SPLITS.index(split))
    size, k = cfg.prob_inputs, cfg.prob_futures
    lo, hi = cfg.step_bounds
    inputs = np.zeros((size, cfg.context))
    targets = np.zeros((size, k, cfg.horizon))
    meta = {key: np.zeros(size) for key in ("i1", "i2", "j1", "j2", "step_index", "step_amplitude")}
    future_steps = np.zeros((size, k))
    future_amps = np.zeros((size, k))
    for idx in range(size):
        i1, i2, j1, j2, step = _draw_base(rng, cfg)
        inputs[idx] = _impulses(i1, i2, j1, j2, cfg)
        amps = (j2 - j1) + rng.normal(0.0, cfg.amplitude_jitter, size=k)
        steps = np.clip(step + rng.integers(-cfg.position_jitter, cfg.position_jitter + 1, size=k), lo, hi)
        for f in range(k):
            targets[idx, f] = _step(int(steps[f]), float(amps[f]), cfg)
        future_steps[idx] = steps
        future_amps[idx] = amps
        for key, value in zip(meta, (i1, i2, j1, j2, step, j2 - j1), strict=True):
            meta[key][idx] = value
    input_noise = rng.normal(0.0, cfg.noise_std, size=inputs.shape)
    target_noise = rng.normal(0.0, cfg.noise_std, size=targets.shape)
    meta.update(
        input_noise=input_noise[..., None],
        target_noise=target_noise[..., None],
        future_step_index=future_steps,
        future_amplitude=future_amps,
    )
    return DatasetSplit(
        split=split,
        inputs=(inputs + input_noise)[..., None],
        targets=(targets + target_noise)[..., None],
        seed=int(seed),
        meta=meta,
    )


def gen_synthetic_det(seed: int, cfg: SyntheticConfig = DEFAULT_SYNTHETIC) -> SplitTriple:
    triple = SplitTriple(*(_det_split(s, seed, cfg) for s in SPLITS))
    logger.info("synthetic_generated", extra={"dataset": "synthetic-det", "seed": seed, "per_split": cfg.det_size})
    return triple


def gen_synthetic_prob(seed: int, cfg: SyntheticConfig = DEFAULT_SYNTHETIC) -> SplitTriple:
    triple = SplitTriple(*(_prob_split(s, seed, cfg) for s in SPLITS))
    logger.info(
        "synthetic_generated",
        extra={"dataset": "synthetic-prob", "seed": seed, "per_split": cfg.prob_inputs * cfg.prob_futures},
    )
    return triple
