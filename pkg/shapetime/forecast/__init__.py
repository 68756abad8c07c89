from shapetime.forecast.mlp import MlpForecaster
from shapetime.forecast.stripe import StripeModel, kl_standard_normal, sample_futures, sample_prior_futures
from shapetime.forecast.stripe_training import (
    build_stripe,
    optimize_latent_codes,
    prediction_loss,
    proposal_loss,
    train_stripe_predictor,
    train_stripe_proposals,
)
from shapetime.forecast.training import (
    EarlyStopping,
    InstabilityMonitor,
    TrainResult,
    build_mlp,
    fit,
    predict,
    train_deterministic,
)

__all__ = [
    "EarlyStopping",
    "InstabilityMonitor",
    "MlpForecaster",
    "StripeModel",
    "TrainResult",
    "build_mlp",
    "build_stripe",
    "fit",
    "kl_standard_normal",
    "optimize_latent_codes",
    "predict",
    "prediction_loss",
    "proposal_loss",
    "sample_futures",
    "sample_prior_futures",
    "train_deterministic",
    "train_stripe_predictor",
    "train_stripe_proposals",
]
