from shapetime.kernels.dpp import (
    QUALITY_FLOOR,
    dpp_diversity_loss,
    dpp_loss_batch,
    normalize_kernel,
    quality_regularize,
    quality_vector,
)
from shapetime.kernels.ops import (
    DPP_OP,
    GRAM_OP,
    dpp_diversity_t,
    gram_t,
    normalize_kernel_t,
    quality_regularize_t,
    quality_t,
)
from shapetime.kernels.similarity import GramResult, gram, gram_batch, k_shape, k_time

__all__ = [
    "DPP_OP",
    "GRAM_OP",
    "QUALITY_FLOOR",
    "GramResult",
    "dpp_diversity_loss",
    "dpp_diversity_t",
    "dpp_loss_batch",
    "gram",
    "gram_batch",
    "gram_t",
    "k_shape",
    "k_time",
    "normalize_kernel",
    "normalize_kernel_t",
    "quality_regularize",
    "quality_regularize_t",
    "quality_t",
    "quality_vector",
]
