from .correlation import (
    q_energy_correlation,
    pooled_q_energy_correlation,
    pearson_columns,
    summarize_correlation,
    curve_stability,
)
