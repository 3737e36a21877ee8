"""Python access to the eqolab simulation harness and bound evaluators."""

from ._eqolab import (
    EqolabError,
    bound_curve,
    empirical_quantile,
    hoeffding_threshold,
    optimal_values,
    peeling_threshold,
    run_cli,
    simulate,
    tau2,
    tight_ucb,
    ville_threshold,
)

__all__ = [
    "EqolabError",
    "bound_curve",
    "empirical_quantile",
    "hoeffding_threshold",
    "optimal_values",
    "peeling_threshold",
    "run_cli",
    "simulate",
    "tau2",
    "tight_ucb",
    "ville_threshold",
]
