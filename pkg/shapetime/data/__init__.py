from shapetime.data.csv_windows import load_csv_windows, read_series, window_count
from shapetime.data.synthetic import (
    DEFAULT_SYNTHETIC,
    GENERATOR_VERSION,
    SyntheticConfig,
    gen_synthetic_det,
    gen_synthetic_prob,
)

__all__ = [
    "DEFAULT_SYNTHETIC",
    "GENERATOR_VERSION",
    "SyntheticConfig",
    "gen_synthetic_det",
    "gen_synthetic_prob",
    "load_csv_windows",
    "read_series",
    "window_count",
]
