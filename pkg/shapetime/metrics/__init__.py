from shapetime.metrics.changepoints import detect_peaks, detect_step_changepoint, hausdorff
from shapetime.metrics.distortion import (
    dilate_metric,
    dtw_metric,
    metric_fn,
    mse_metric,
    soft_dtw_metric,
    tdi_metric,
)
from shapetime.metrics.probabilistic import (
    best_sample,
    crps_ensemble,
    cross_loss_matrix,
    f1,
    h_diversity,
    h_measures,
    h_quality,
    mean_sample,
)
from shapetime.metrics.ramp import align_to_reference, ramp_score, swinging_door
from shapetime.metrics.significance import Comparison, compare_samples

__all__ = [
    "Comparison",
    "align_to_reference",
    "best_sample",
    "compare_samples",
    "crps_ensemble",
    "cross_loss_matrix",
    "detect_peaks",
    "detect_step_changepoint",
    "dilate_metric",
    "dtw_metric",
    "f1",
    "h_diversity",
    "h_measures",
    "h_quality",
    "hausdorff",
    "mean_sample",
    "metric_fn",
    "mse_metric",
    "ramp_score",
    "soft_dtw_metric",
    "swinging_door",
    "tdi_metric",
]
