"""Joint architecture and data-parallel hyperparameter search for tabular classifiers."""

from .controller import MODES, SearchConfig, SearchState, best, run
from .evolution import EvaluationRecord, Population, mutate, sample, select_parent
from .executor import SimulatedBackend, SimulatedWorkerPool, ThreadWorkerPool, TrainerBackend, make_pool
from .optimizer import BayesianOptimizer, ucb
from .space import (
    DEFAULT_HP,
    ArchConfig,
    ArchSpace,
    HPConfig,
    HPSpace,
    decode_hp,
    encode_hp,
    num_decision_variables,
    random_arch,
    random_hp,
    space_size,
)
from .surrogate import TreeEnsembleRegressor

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_HP",
    "MODES",
    "ArchConfig",
    "ArchSpace",
    "BayesianOptimizer",
    "EvaluationRecord",
    "HPConfig",
    "HPSpace",
    "Population",
    "SearchConfig",
    "SearchState",
    "SimulatedBackend",
    "SimulatedWorkerPool",
    "ThreadWorkerPool",
    "TrainerBackend",
    "TreeEnsembleRegressor",
    "best",
    "decode_hp",
    "encode_hp",
    "make_pool",
    "mutate",
    "num_decision_variables",
    "random_arch",
    "random_hp",
    "run",
    "sample",
    "select_parent",
    "space_size",
    "ucb",
]
