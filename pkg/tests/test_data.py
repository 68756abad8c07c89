from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

from shapetime.core.errors import DatasetError, ParameterError, ParseError
from shapetime.data import (
    SyntheticConfig,
    gen_synthetic_det,
    gen_synthetic_prob,
    load_csv_windows,
    read_series,
    window_count,
)
from shapetime.domain.entities import SplitTriple
from shapetime.metrics import detect_step_changepoint


@pytest.fixture(scope="module")
def det() -> SplitTriple:
    return gen_synthetic_det(7)


def test_det_generator_shapes(det: SplitTriple) -> None:
    for split in det:
        assert split.inputs.shape == (500, 20, 1)
        assert split.targets.shape == (500, 20, 1)
        assert split.seed == 7
    assert [s.split for s in det] == ["train", "valid", "test"]


def test_det_generator_is_a_pure_function_of_the_seed(tiny_synthetic: SyntheticConfig) -> None:
    a = gen_synthetic_det(3, tiny_synthetic)
    b = gen_synthetic_det(3, tiny_synthetic)
    c = gen_synthetic_det(4, tiny_synthetic)
    for sa, sb in zip(a, b, strict=True):
        np.testing.assert_array_equal(sa.inputs, sb.inputs)
        np.testing.assert_array_equal(sa.targets, sb.targets)
    assert not np.array_equal(a.train.inputs, c.train.inputs)
    assert not np.array_equal(a.train.inputs, a.valid.inputs)


def test_det_instances_follow_the_construction(det: SplitTriple) -> None:
    for inst in det.train.instances():
        m = inst.meta
        assert 1 <= m.i1 < m.i2 <= 20
        assert 0.0 <= m.j1 <= 1.0 and 0.0 <= m.j2 <= 1.0
        assert 21 <= m.step_index <= 40
        assert m.step_amplitude == pytest.approx(m.j2 - m.j1)

        clean_input = inst.input[:, 0] - inst.input_noise[:, 0]
        expected = np.zeros(20)
        expected[m.i1 - 1] = m.j1
        expected[m.i2 - 1] = m.j2
        np.testing.assert_allclose(clean_input, expected, atol=1e-12)

        clean = inst.noiseless_target()[:, 0]
        step = m.target_step_index(20)
        np.testing.assert_allclose(clean[: step - 1], 0.0, atol=1e-12)
        np.testing.assert_allclose(clean[step - 1 :], m.step_amplitude, atol=1e-12)


def test_det_sampling_covers_the_whole_peak_and_step_range(det: SplitTriple) -> None:
    meta = {key: np.concatenate([s.meta[key] for s in det]) for key in ("i1", "step_index")}
    assert meta["i1"].min() == 1
    assert meta["i1"].max() == 12
    assert meta["step_index"].min() == 21
    assert meta["step_index"].max() <= 40


def test_det_noise_has_the_documented_variance(det: SplitTriple) -> None:
    noise = det.train.meta["target_noise"]
    assert noise.std() == pytest.approx(0.1, abs=0.01)
    assert abs(noise.mean()) < 0.01


def test_step_detection_recovers_the_planted_index(det: SplitTriple) -> None:
    for inst in det.test.instances():
        if inst.meta.target_step_index(20) == 1:
            continue
        found = detect_step_changepoint(inst.noiseless_target())
        assert found.indices == (inst.meta.target_step_index(20),)


def test_step_detection_under_noise(det: SplitTriple) -> None:
    hits = total = 0
    for inst in det.test.instances():
        if abs(inst.meta.step_amplitude) < 0.5 or inst.meta.target_step_index(20) == 1:
            continue
        total += 1
        found = detect_step_changepoint(inst.target).indices[0]
        hits += abs(found - inst.meta.target_step_index(20)) <= 1
    assert total > 50
    assert hits / total >= 0.95


def test_prob_generator_shapes_and_shared_inputs() -> None:
    data = gen_synthetic_prob(11)
    for split in data:
        assert split.inputs.shape == (100, 20, 1)
        assert split.targets.shape == (100, 10, 20, 1)
        inputs, targets = split.pairs()
        assert inputs.shape == (1000, 20, 1)
        assert targets.shape == (1000, 20, 1)
        for f in range(10):
            np.testing.assert_array_equal(inputs[f::10], split.inputs)

    spread = [len(set(row.tolist())) >= 2 for row in data.test.meta["future_step_index"]]
    assert np.mean(spread) >= 0.9


def test_prob_futures_jitter_around_the_base_step(tiny_synthetic: SyntheticConfig) -> None:
    data = gen_synthetic_prob(5, tiny_synthetic)
    meta = data.train.meta
    assert np.all(np.abs(meta["future_step_index"] - meta["step_index"][:, None]) <= 2)
    assert np.all((meta["future_step_index"] >= 21) & (meta["future_step_index"] <= 40))
    clean = data.train.targets - meta["target_noise"]
    for i in range(clean.shape[0]):
        for f in range(clean.shape[1]):
            step = int(meta["future_step_index"][i, f]) - 20
            np.testing.assert_allclose(clean[i, f, step - 1 :, 0], meta["future_amplitude"][i, f], atol=1e-12)


def _write_csv(path: Path, values: np.ndarray, header: str | None = "value") -> Path:
    lines = ([header] if header else []) + [repr(float(v)) for v in values]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def test_csv_window_counts(tmp_path: Path, rng: np.random.Generator) -> None:
    path = _write_csv(tmp_path / "series.csv", rng.standard_normal(100))
    ds = load_csv_windows(path, 8, 2, 1, "none")
    assert ds.n_windows_total == 91 == window_count(100, 10, 1)
    assert [len(s) for s in ds.splits] == [51, 11, 11]
    assert ds.splits.train.inputs.shape == (51, 8, 1)
    assert ds.splits.train.targets.shape == (51, 2, 1)


def test_csv_splits_are_chronological_and_disjoint(tmp_path: Path) -> None:
    path = _write_csv(tmp_path / "ramp.csv", np.arange(100.0), header=None)
    ds = load_csv_windows(path, 8, 2, 1, "none")
    train, valid, test = ds.splits
    assert train.meta["start"].max() + 10 <= valid.meta["start"].min()
    assert valid.meta["start"].max() + 10 <= test.meta["start"].min()
    np.testing.assert_array_equal(test.inputs[0, :, 0], np.arange(80.0, 88.0))


def test_zscore_uses_train_statistics_only(tmp_path: Path, rng: np.random.Generator) -> None:
    path = _write_csv(tmp_path / "z.csv", 5.0 + 2.0 * rng.standard_normal(100))
    tiled = load_csv_windows(path, 8, 2, 10, "zscore").splits.train
    pooled = np.concatenate([tiled.inputs.ravel(), tiled.targets.ravel()])
    assert pooled.size == 60
    assert pooled.mean() == pytest.approx(0.0, abs=1e-12)
    assert pooled.std() == pytest.approx(1.0, abs=1e-12)

    overlapping = load_csv_windows(path, 8, 2, 1, "zscore").splits.train
    pooled = np.concatenate([overlapping.inputs.ravel(), overlapping.targets.ravel()])
    assert abs(pooled.mean()) < 0.15
    assert pooled.std() == pytest.approx(1.0, abs=0.15)


def test_minmax_maps_the_train_range_to_unit_interval(tmp_path: Path) -> None:
    values = np.concatenate([np.linspace(0.0, 10.0, 60), np.full(40, 20.0)])
    ds = load_csv_windows(_write_csv(tmp_path / "m.csv", values), 4, 2, 1, "minmax")
    train = np.concatenate([ds.splits.train.inputs.ravel(), ds.splits.train.targets.ravel()])
    assert train.min() == 0.0
    assert train.max() == 1.0
    assert ds.splits.test.inputs.max() == pytest.approx(2.0)


def test_csv_errors(tmp_path: Path) -> None:
    with pytest.raises(DatasetError):
        load_csv_windows(tmp_path / "missing.csv", 8, 2)
    with pytest.raises(DatasetError):
        load_csv_windows(_write_csv(tmp_path / "short.csv", np.arange(20.0)), 8, 2)
    with pytest.raises(ParameterError):
        load_csv_windows(_write_csv(tmp_path / "ok.csv", np.arange(100.0)), 0, 2)

    bad = tmp_path / "bad.csv"
    bad.write_text("value\n1.0\n2.0\nabc\n", encoding="utf-8")
    with pytest.raises(ParseError) as info:
        read_series(bad)
    assert info.value.extra == {"line": 4}


def test_read_series_accepts_comma_separated_values(tmp_path: Path) -> None:
    path = tmp_path / "flat.csv"
    path.write_text("1.5, 2.5,3.5\n4.5\n", encoding="utf-8")
    np.testing.assert_array_equal(read_series(path), [1.5, 2.5, 3.5, 4.5])
