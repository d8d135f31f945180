"""TPE sampling, successive-halving pruning and the search driver."""

from .pruner import RUNG_EPOCHS, hyperband_should_prune, rung_schedule
from .search import SearchResult, optimize_objective, prepare_search_data, run_search, trial_seed
from .tpe import ParzenEstimator, categorical_weights, sample_uniform, split_history, suggest, tpe_suggest

__all__ = [
    "RUNG_EPOCHS",
    "ParzenEstimator",
    "SearchResult",
    "categorical_weights",
    "hyperband_should_prune",
    "optimize_objective",
    "prepare_search_data",
    "run_search",
    "rung_schedule",
    "sample_uniform",
    "split_history",
    "suggest",
    "tpe_suggest",
    "trial_seed",
]
