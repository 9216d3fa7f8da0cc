"""lrdpp - Low-rank determinantal point processes for basket completion."""

from .conditioning import (
    ConditionedModel,
    complete_basket,
    condition,
    elementary_symmetric,
    next_item_probabilities,
    projection,
)
from .config import TrainConfig, load_config, make_train_config
from .data import BasketDataset, ItemCatalog, load_model, parse_baskets, read_baskets, save_model, split
from .errors import (
    ConditioningError,
    ConfigError,
    DataError,
    KernelError,
    LowRankDPPError,
    OracleError,
    SingularBasketError,
    TrainingError,
)
from .evaluation import (
    EvalReport,
    evaluate,
    make_instances,
    mpr,
    percentile_rank,
    pop_weighted_precision_at_k,
    precision_at_k,
)
from .kernel import TraitMatrix, dpp_log_prob, log_det_basket, log_normalizer
from .likelihood import RegularizationWeights, average_log_likelihood, gradient, objective, popularity_weights
from .optimizer import TrainTrace, converged, learning_rate, nag_step, train

__version__ = "0.1.0"

__all__ = [
    "BasketDataset",
    "ConditionedModel",
    "ConditioningError",
    "ConfigError",
    "DataError",
    "EvalReport",
    "ItemCatalog",
    "KernelError",
    "LowRankDPPError",
    "OracleError",
    "RegularizationWeights",
    "SingularBasketError",
    "TrainConfig",
    "TrainTrace",
    "TraitMatrix",
    "TrainingError",
    "average_log_likelihood",
    "complete_basket",
    "condition",
    "converged",
    "dpp_log_prob",
    "elementary_symmetric",
    "evaluate",
    "gradient",
    "learning_rate",
    "load_config",
    "load_model",
    "log_det_basket",
    "log_normalizer",
    "make_instances",
    "make_train_config",
    "mpr",
    "nag_step",
    "next_item_probabilities",
    "objective",
    "parse_baskets",
    "percentile_rank",
    "pop_weighted_precision_at_k",
    "popularity_weights",
    "precision_at_k",
    "projection",
    "read_baskets",
    "save_model",
    "split",
    "train",
]
