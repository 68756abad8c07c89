from shapetime.alignment.cost import chain_to_series, cost_grad, cost_matrix, cost_matrix_batch
from shapetime.alignment.hard_dtw import hard_dtw, hard_dtw_batch, tdi_hard
from shapetime.alignment.omega import (
    build_omega,
    omega_dissim,
    omega_sakoe_chiba,
    omega_sim,
    omega_weighted,
)
from shapetime.alignment.paths import delannoy, enumerate_paths, enumeration_oracle, naive_alignment_fd
from shapetime.alignment.soft_dtw import (
    BIG_COST,
    SoftDtwTables,
    dtw_hvp,
    dtw_hvp_batch,
    dtw_hvp_from_tables,
    soft_alignment,
    soft_alignment_batch,
    soft_dtw,
    soft_dtw_batch,
    soft_dtw_grad_wrt_series,
    soft_dtw_tables,
    tdi_soft,
)

__all__ = [
    "BIG_COST",
    "SoftDtwTables",
    "build_omega",
    "chain_to_series",
    "cost_grad",
    "cost_matrix",
    "cost_matrix_batch",
    "delannoy",
    "dtw_hvp",
    "dtw_hvp_batch",
    "dtw_hvp_from_tables",
    "enumerate_paths",
    "enumeration_oracle",
    "hard_dtw",
    "hard_dtw_batch",
    "naive_alignment_fd",
    "omega_dissim",
    "omega_sakoe_chiba",
    "omega_sim",
    "omega_weighted",
    "soft_alignment",
    "soft_alignment_batch",
    "soft_dtw",
    "soft_dtw_batch",
    "soft_dtw_grad_wrt_series",
    "soft_dtw_tables",
    "tdi_hard",
    "tdi_soft",
]
