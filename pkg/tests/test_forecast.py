from __future__ import annotations

import numpy as np
import pytest
import torch
from torch import nn

from shapetime.core.errors import DimensionError
from shapetime.data import SyntheticConfig, gen_synthetic_det, gen_synthetic_prob
from shapetime.domain.entities import SplitTriple
from shapetime.domain.schemas import AdamConfig, DilateConfig, StripeConfig, TrainConfig
from shapetime.forecast import (
    EarlyStopping,
    InstabilityMonitor,
    MlpForecaster,
    StripeModel,
    build_mlp,
    build_stripe,
    fit,
    kl_standard_normal,
    optimize_latent_codes,
    predict,
    prediction_loss,
    proposal_loss,
    sample_futures,
    sample_prior_futures,
    train_deterministic,
    train_stripe_proposals,
)
from shapetime.forecast.layers import flat_parameters
from shapetime.forecast.training import to_tensor


@pytest.fixture
def det_data(tiny_synthetic: SyntheticConfig) -> SplitTriple:
    return gen_synthetic_det(0, tiny_synthetic)


@pytest.fixture
def prob_data(tiny_synthetic: SyntheticConfig) -> SplitTriple:
    return gen_synthetic_prob(0, tiny_synthetic)


@pytest.fixture
def stripe_cfg() -> StripeConfig:
    return StripeConfig(
        dilate=DilateConfig(alpha=0.5, gamma=0.1),
        hidden=8,
        code_dim=2,
        n_shape=3,
        n_time=2,
        proposal_hidden=8,
        predictor_epochs=1,
        proposal_epochs=1,
        batch_size=12,
        optimizer=AdamConfig(lr=1e-2),
    )


def test_mlp_maps_contexts_to_forecasts() -> None:
    model = MlpForecaster(context_length=6, horizon=4, dim=2, hidden=5)
    assert model(torch.zeros(3, 6, 2)).shape == (3, 4, 2)
    with pytest.raises(DimensionError):
        model(torch.zeros(3, 5, 2))
    with pytest.raises(DimensionError):
        model(torch.zeros(6, 2))


def test_mlp_architecture_round_trip() -> None:
    model = MlpForecaster(context_length=6, horizon=4, hidden=5, activation="tanh")
    clone = MlpForecaster.from_architecture(model.architecture())
    assert clone.architecture() == model.architecture()
    np.testing.assert_array_equal(flat_parameters(clone).numpy(), flat_parameters(model).numpy())


def test_early_stopping_tracks_the_best_epoch() -> None:
    layer = nn.Linear(1, 1, dtype=torch.float64)
    stopper = EarlyStopping(patience=2)
    assert not stopper.update(0, 3.0, layer)
    assert not stopper.update(1, 1.0, layer)
    saved = flat_parameters(layer).clone()
    with torch.no_grad():
        layer.weight.add_(1.0)
    assert not stopper.update(2, 2.0, layer)
    assert stopper.update(3, 1.5, layer)
    assert stopper.best_epoch == 1
    stopper.restore(layer)
    np.testing.assert_array_equal(flat_parameters(layer).numpy(), saved.numpy())


def test_instability_monitor_flags_a_rising_moving_average() -> None:
    monitor = InstabilityMonitor(window=2)
    flags = [monitor.observe(e, v) for e, v in enumerate([4.0, 3.0, 2.0, 5.0, 1.0])]
    assert flags == [False, False, False, True, False]


def test_fit_restores_the_best_weights() -> None:
    layer = nn.Linear(1, 1, dtype=torch.float64)
    initial = flat_parameters(layer).clone()
    losses = iter([3.0, 1.0, 2.0, 5.0, 0.5])

    def train_epoch(optimizer: torch.optim.Optimizer, epoch: int) -> float:
        with torch.no_grad():
            for p in layer.parameters():
                p.add_(1.0)
        return 0.0

    result = fit(
        layer,
        parameters=list(layer.parameters()),
        train_epoch=train_epoch,
        valid_loss=lambda: next(losses),
        epochs=10,
        patience=2,
        optimizer_cfg=AdamConfig(),
    )
    assert result.best_epoch == 1
    assert [r.epoch for r in result.log] == [0, 1, 2, 3]
    np.testing.assert_allclose(flat_parameters(layer).numpy(), initial.numpy() + 2.0)


def test_zero_epochs_keeps_the_initial_weights(det_data: SplitTriple) -> None:
    cfg = TrainConfig(loss="mse", epochs=0, hidden=8, seed=3)
    result = train_deterministic(det_data, cfg)
    assert result.log == []
    assert result.best_epoch == -1
    fresh = build_mlp(det_data, cfg)
    np.testing.assert_array_equal(flat_parameters(result.model).numpy(), flat_parameters(fresh).numpy())


@pytest.mark.parametrize("loss", ["mse", "dilate"])
def test_training_is_deterministic_for_a_seed(loss: str, det_data: SplitTriple) -> None:
    cfg = TrainConfig(loss=loss, dilate=DilateConfig(gamma=0.1), epochs=2, batch_size=8, hidden=8, seed=5)  # type: ignore[arg-type]
    a = train_deterministic(det_data, cfg)
    b = train_deterministic(det_data, cfg)
    np.testing.assert_array_equal(flat_parameters(a.model).numpy(), flat_parameters(b.model).numpy())
    assert [r.valid_loss for r in a.log] == [r.valid_loss for r in b.log]
    assert all(np.isfinite(r.train_loss) for r in a.log)


def test_predict_returns_one_forecast_per_input(det_data: SplitTriple) -> None:
    model = build_mlp(det_data, TrainConfig(hidden=8))
    out = predict(model, det_data.test.inputs, batch_size=7)
    assert out.shape == det_data.test.targets.shape


def test_kl_matches_the_closed_form(rng: np.random.Generator) -> None:
    assert float(kl_standard_normal(torch.zeros(1, 4), torch.zeros(1, 4))[0]) == 0.0
    mu = torch.as_tensor(rng.standard_normal((3, 4)))
    log_sigma = torch.as_tensor(rng.uniform(-1, 1, (3, 4)))
    expected = torch.distributions.kl_divergence(
        torch.distributions.Normal(mu, log_sigma.exp()), torch.distributions.Normal(torch.zeros(3, 4), torch.ones(3, 4))
    ).sum(dim=-1)
    torch.testing.assert_close(kl_standard_normal(mu, log_sigma), expected, rtol=1e-12, atol=1e-12)


def _tiny_stripe(seed: int = 0) -> StripeModel:
    return StripeModel(
        context_length=4,
        horizon=5,
        hidden=4,
        code_dim=2,
        n_shape=3,
        n_time=2,
        proposal_hidden=4,
        generator=torch.Generator().manual_seed(seed),
    )


def test_prediction_loss_gradient_matches_finite_differences(rng: np.random.Generator, stripe_cfg: StripeConfig) -> None:
    model = _tiny_stripe()
    x = to_tensor(rng.uniform(-1, 1, (3, 4, 1)))
    y = to_tensor(rng.uniform(-1, 1, (3, 5, 1)))
    eps_s, eps_t = (to_tensor(rng.standard_normal((3, 2))) for _ in range(2))
    bias = model.decoder[-1].bias

    loss = prediction_loss(model, x, y, eps_s, eps_t, stripe_cfg)
    (grad,) = torch.autograd.grad(loss, bias)

    fd = torch.zeros_like(bias)
    h = 1e-6
    with torch.no_grad():
        for i in range(bias.numel()):
            bias[i] += h
            up = float(prediction_loss(model, x, y, eps_s, eps_t, stripe_cfg))
            bias[i] -= 2 * h
            down = float(prediction_loss(model, x, y, eps_s, eps_t, stripe_cfg))
            bias[i] += h
            fd[i] = (up - down) / (2 * h)
    assert float((grad - fd).norm() / fd.norm()) < 1e-4


def test_sample_futures_covers_every_code_combination(rng: np.random.Generator) -> None:
    model = _tiny_stripe()
    x = to_tensor(rng.uniform(-1, 1, (2, 4, 1)))
    futures = sample_futures(model, x)
    assert futures.shape == (2, 6, 5, 1)
    assert sample_futures(model, x[0]).shape == (1, 6, 5, 1)
    torch.testing.assert_close(sample_futures(model, x), futures)

    prior = sample_prior_futures(model, x, 7, torch.Generator().manual_seed(1))
    assert prior.shape == (2, 7, 5, 1)


def test_stripe_rejects_mismatched_series(rng: np.random.Generator) -> None:
    model = _tiny_stripe()
    with pytest.raises(DimensionError):
        model.encode(to_tensor(rng.uniform(-1, 1, (2, 5, 1))))
    with pytest.raises(DimensionError):
        model.posterior_params(to_tensor(np.zeros((2, 4, 1))), to_tensor(np.zeros((2, 4, 1))))


def test_stripe_architecture_round_trip() -> None:
    model = _tiny_stripe(seed=2)
    clone = StripeModel.from_architecture(model.architecture())
    assert clone.architecture() == model.architecture()


def test_proposal_loss_is_a_diversity_reward(rng: np.random.Generator, stripe_cfg: StripeConfig) -> None:
    model = _tiny_stripe()
    x = to_tensor(rng.uniform(-1, 1, (3, 4, 1)))
    y = to_tensor(rng.uniform(-1, 1, (3, 5, 1)))
    value = float(proposal_loss(model, x, y, stripe_cfg))
    assert np.isfinite(value)
    assert -(model.n_shape + model.n_time) <= value <= 0.0


def test_proposal_training_keeps_the_predictor_frozen(prob_data: SplitTriple, stripe_cfg: StripeConfig) -> None:
    model = build_stripe(prob_data, stripe_cfg)
    predictor = [flat_parameters(m).clone() for m in model.predictor_modules()]
    proposals = [flat_parameters(m).clone() for m in model.proposal_modules()]

    result = train_stripe_proposals(model, prob_data, stripe_cfg)
    assert [r.phase for r in result.log] == ["proposals"]

    for before, module in zip(predictor, model.predictor_modules(), strict=True):
        np.testing.assert_array_equal(flat_parameters(module).numpy(), before.numpy())
    assert any(
        not np.array_equal(flat_parameters(m).numpy(), before.numpy())
        for before, m in zip(proposals, model.proposal_modules(), strict=True)
    )
    assert all(p.requires_grad for p in model.parameters())


def test_latent_code_optimization_returns_one_trajectory_per_shape_code(
    prob_data: SplitTriple, stripe_cfg: StripeConfig
) -> None:
    model = build_stripe(prob_data, stripe_cfg)
    x, y = (to_tensor(a) for a in prob_data.test.pairs())
    out = optimize_latent_codes(model, x[0], y[0], stripe_cfg, steps=3)
    assert out.shape == (stripe_cfg.n_shape, 20, 1)
    assert all(p.requires_grad for p in model.parameters())
