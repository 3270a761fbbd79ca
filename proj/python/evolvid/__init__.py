from ._core import (
    Network,
    TrainConfig,
    coeff_regressors,
    eval_qmf,
    input_names,
    load_flight_csv,
    load_network,
    ols_fit_csv,
    reduce_to_type1,
    synthesize_csv,
    tic,
    train_online,
)

__all__ = [
    "Network",
    "TrainConfig",
    "coeff_regressors",
    "eval_qmf",
    "input_names",
    "load_flight_csv",
    "load_network",
    "ols_fit_csv",
    "reduce_to_type1",
    "synthesize_csv",
    "tic",
    "train_online",
]
