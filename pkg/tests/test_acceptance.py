"""End-to-end experiments at desk scale; run with `pytest -m slow`."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest
import torch

from shapetime.autodiff import finite_difference_grad, relative_error
from shapetime.data import gen_synthetic_det, gen_synthetic_prob
from shapetime.domain.entities import SplitTriple
from shapetime.domain.schemas import BenchExperiment, DilateConfig, StripeConfig, TrainConfig
from shapetime.forecast import (
    StripeModel,
    build_stripe,
    predict,
    prediction_loss,
    sample_futures,
    sample_prior_futures,
    train_deterministic,
    train_stripe_predictor,
    train_stripe_proposals,
)
from shapetime.forecast.training import to_tensor
from shapetime.kernels import dpp_diversity_loss
from shapetime.losses import dilate
from shapetime.metrics import cross_loss_matrix, dtw_metric, h_measures, metric_fn, mse_metric, tdi_metric
from shapetime.services.benchmark import run_benchmark

pytestmark = pytest.mark.slow


@pytest.mark.parametrize("gamma", [0.1, 1.0])
def test_gradient_suite(gamma: float, rng: np.random.Generator) -> None:
    cfg = DilateConfig(alpha=0.5, gamma=gamma)
    eye = np.eye(4)
    for _ in range(50):
        n = int(rng.integers(2, 13))
        y_pred, y_true = rng.uniform(-1, 1, (2, n, 1))
        _, grad = dilate(y_pred, y_true, cfg)
        assert relative_error(grad, finite_difference_grad(lambda v: dilate(v, y_true, cfg)[0], y_pred)) < 1e-4

        a = rng.standard_normal((4, 4))
        k = a @ a.T
        _, dpp_grad = dpp_diversity_loss(k)
        fd = finite_difference_grad(lambda m: -float(np.trace(eye - np.linalg.inv(m + eye))), k)
        assert relative_error(dpp_grad, fd) < 1e-4


def test_elbo_gradient_trials(rng: np.random.Generator) -> None:
    cfg = StripeConfig(dilate=DilateConfig(alpha=0.5, gamma=0.1))
    for trial in range(50):
        model = StripeModel(
            context_length=4,
            horizon=6,
            hidden=4,
            code_dim=2,
            n_shape=2,
            n_time=2,
            proposal_hidden=4,
            generator=torch.Generator().manual_seed(trial),
        )
        x = to_tensor(rng.uniform(-1, 1, (2, 4, 1)))
        y = to_tensor(rng.uniform(-1, 1, (2, 6, 1)))
        eps_s, eps_t = (to_tensor(rng.standard_normal((2, 2))) for _ in range(2))
        bias = model.decoder[-1].bias
        (grad,) = torch.autograd.grad(prediction_loss(model, x, y, eps_s, eps_t, cfg), bias)

        def value(b: np.ndarray) -> float:
            with torch.no_grad():
                bias.copy_(torch.as_tensor(b))
                return float(prediction_loss(model, x, y, eps_s, eps_t, cfg))

        start = bias.detach().numpy().copy()
        fd = finite_difference_grad(value, start)
        value(start)
        assert relative_error(grad.numpy(), fd) < 1e-4


def _train_and_score(loss: str, seed: int, data: SplitTriple) -> tuple[float, float, float]:
    cfg = TrainConfig(loss=loss, dilate=DilateConfig(gamma=1e-2), epochs=300, patience=30, seed=seed)  # type: ignore[arg-type]
    result = train_deterministic(data, cfg)
    preds = predict(result.model, data.test.inputs)
    targets = data.test.targets
    return (
        float(dtw_metric(preds, targets).mean()),
        float(tdi_metric(preds, targets).mean()),
        float(mse_metric(preds, targets).mean()),
    )


def test_dilate_training_improves_shape_and_timing() -> None:
    data = gen_synthetic_det(0)
    med = {
        loss: np.median([_train_and_score(loss, s, data) for s in range(10)], axis=0)
        for loss in ("mse", "soft_dtw", "dilate")
    }
    assert med["dilate"][0] < med["mse"][0]
    assert med["dilate"][1] < med["soft_dtw"][1]
    assert med["dilate"][2] <= 1.5 * med["mse"][2]


def test_alpha_sweep_is_u_shaped() -> None:
    data = gen_synthetic_det(0)
    reference = metric_fn("dilate", DilateConfig(alpha=0.5, gamma=1e-2))
    medians = {}
    for alpha in (0.05, 0.5, 1.0):
        losses = []
        for seed in range(5):
            cfg = TrainConfig(dilate=DilateConfig(alpha=alpha, gamma=1e-2), epochs=300, patience=30, seed=seed)
            model = train_deterministic(data, cfg).model
            losses.append(float(reference(predict(model, data.test.inputs), data.test.targets).mean()))
        medians[alpha] = float(np.median(losses))
    assert medians[0.5] < medians[0.05]
    assert medians[0.5] < medians[1.0]


def _h_scores(predictions: np.ndarray, futures: np.ndarray, cfg: DilateConfig) -> np.ndarray:
    loss = metric_fn("dilate", cfg)
    return np.mean([h_measures(cross_loss_matrix(p, f, loss)) for p, f in zip(predictions, futures, strict=True)], axis=0)


def test_proposals_diversify_without_losing_quality() -> None:
    data = gen_synthetic_prob(0)
    cfg = StripeConfig(n_shape=5, n_time=2, predictor_epochs=200, proposal_epochs=100, patience=30)
    model = build_stripe(data, cfg)
    train_stripe_predictor(model, data, cfg)

    x = to_tensor(data.test.inputs)
    prior = sample_prior_futures(model, x, 10, torch.Generator().manual_seed(0)).numpy()
    base_q, base_d, base_f1 = _h_scores(prior, data.test.targets, cfg.dilate)

    train_stripe_proposals(model, data, cfg)
    q, d, f1 = _h_scores(sample_futures(model, x).numpy(), data.test.targets, cfg.dilate)
    assert d <= 0.75 * base_d
    assert q <= 1.2 * base_q
    assert f1 < base_f1


def test_backward_scaling(tmp_path: Path) -> None:
    rows = run_benchmark(BenchExperiment(lengths=[20, 40, 80], repeats=3, out_dir=str(tmp_path)))
    for row in rows[1:]:
        assert row.growth is not None
        assert 2.0 <= row.growth <= 6.0
    speedups = [r.speedup for r in rows]
    assert speedups == sorted(speedups)
    assert len(set(speedups)) == len(speedups)
