from shapetime.losses.dilate import DilateResult, dilate, dilate_batch, dilate_t, dilate_t_batch
from shapetime.losses.divergence import dilate_div, dilate_div_batch, dtw_div, dtw_div_batch
from shapetime.losses.mse import mse_batch, mse_loss
from shapetime.losses.ops import LOSS_OPS, loss_fn, pair_loss, per_sample_loss, soft_dtw_loss_batch

__all__ = [
    "LOSS_OPS",
    "DilateResult",
    "dilate",
    "dilate_batch",
    "dilate_div",
    "dilate_div_batch",
    "dilate_t",
    "dilate_t_batch",
    "dtw_div",
    "dtw_div_batch",
    "loss_fn",
    "mse_batch",
    "mse_loss",
    "pair_loss",
    "per_sample_loss",
    "soft_dtw_loss_batch",
]
