"""Asynchronous search loop combining aging evolution with Bayesian optimization.

Three modes are supported:

``AgEBO``
    architectures from aging evolution, training hyperparameters from the
    constant-liar Bayesian optimizer.
``AgE``
    aging evolution with a fixed single-process hyperparameter configuration.
``AgE-n``
    aging evolution with a fixed configuration trained on ``n`` processes; the
    trainer applies the linear scaling rule to the fixed ``lr1``/``bs1``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple

from .errors import InvalidConfigError, NoDataError, SearchError
from .evolution import EvaluationRecord, Population, mutate, sample, select_parent
from .optimizer import BayesianOptimizer
from .space import DEFAULT_HP, ArchConfig, ArchSpace, HPConfig, HPSpace, as_rng, random_arch

logger = logging.getLogger(__name__)

MODES = ("AgE", "AgE-n", "AgEBO")


@dataclass
class SearchConfig:
    mode: str = "AgEBO"
    P: int = 100
    S: int = 10
    W: int = 4
    wall_time_limit: float | None = None
    max_evaluations: int | None = None
    fixed_hp: HPConfig = DEFAULT_HP
    kappa: float = 0.001
    n_initial: int = 10
    n_candidates: int = 10_000
    n_trees: int = 100
    seed: int = 0
    poll_interval: float = 0.1

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 1 <= self.S <= self.P:
            raise InvalidConfigError("need 1 <= S <= P")
        if self.W < 1:
            raise InvalidConfigError("need at least one worker")
        if self.wall_time_limit is None and self.max_evaluations is None:
            raise InvalidConfigError("set wall_time_limit, max_evaluations, or both")
        if self.mode == "AgE" and self.fixed_hp.n != 1:
            raise InvalidConfigError("AgE trains on one process; use mode AgE-n for n > 1")

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["fixed_hp"] = self.fixed_hp.to_dict()
        return d


class Submission(NamedTuple):
    """Provenance of one submitted job.

    ``arch_origin`` is ``"random"`` or ``"mutation"``; ``hp_origin`` is
    ``"ask"`` (the optimizer, including its random warm-up) or ``"fixed"``.
    """

    job_id: int
    arch: ArchConfig
    hp: HPConfig
    time: float
    arch_origin: str
    hp_origin: str
    parent_job_id: int | None = None


@dataclass
class SearchState:
    population: Population
    bo: BayesianOptimizer | None = None
    history: list[EvaluationRecord] = field(default_factory=list)
    submissions: list[Submission] = field(default_factory=list)
    clock: float = 0.0

    def best(self) -> EvaluationRecord:
        return best(self)


class SearchAborted(SearchError):
    """The worker pool failed mid-run; ``state`` holds everything collected so far."""

    def __init__(self, message: str, state: SearchState):
        super().__init__(message)
        self.state = state


def best(state: SearchState) -> EvaluationRecord:
    """Highest-objective record; ties go to the record that finished first."""
    if not state.history:
        raise NoDataError("no evaluations in history")
    return min(state.history, key=lambda r: (-r.objective, r.finish_time))


def run(cfg: SearchConfig, pool, arch_space: ArchSpace, hp_space: HPSpace | None = None,
        log=None) -> SearchState:
    """Run the search until a stopping criterion is met, then drain ``pool``.

    ``log`` is an optional object with an ``append(record)`` method that receives
    every finished evaluation as it is collected.
    """
    hp_space = hp_space or HPSpace()
    rng = as_rng(cfg.seed)
    bo = None
    if cfg.mode == "AgEBO":
        bo = BayesianOptimizer(
            hp_space, kappa=cfg.kappa, n_initial=cfg.n_initial, n_candidates=cfg.n_candidates,
            seed=int(rng.integers(2**31)), n_trees=cfg.n_trees,
        )
    else:
        hp_space.validate(cfg.fixed_hp)
    state = SearchState(Population(cfg.P), bo)
    budget = cfg.max_evaluations if cfg.max_evaluations is not None else float("inf")

    def submit(arch: ArchConfig, hp: HPConfig, origin: str, parent: int | None) -> None:
        job_id = pool.submit(arch, hp)
        state.submissions.append(
            Submission(job_id, arch, hp, pool.now(), origin, "ask" if bo else "fixed", parent)
        )

    def next_hps(k: int) -> list[HPConfig]:
        return bo.ask(k) if bo is not None else [cfg.fixed_hp] * k

    def collect(results: list[EvaluationRecord]) -> None:
        state.history.extend(results)
        state.population.extend(results)
        if log is not None:
            for rec in results:
                log.append(rec)

    def out_of_time() -> bool:
        return cfg.wall_time_limit is not None and pool.now() >= cfg.wall_time_limit

    try:
        first = int(min(cfg.W, budget))
        for hp in next_hps(first):
            submit(random_arch(arch_space, rng), hp, "random", None)

        while True:
            results = pool.get_finished()
            state.clock = pool.now()
            if results:
                collect(results)
                if bo is not None:
                    bo.tell([r.hp for r in results], [r.objective for r in results])
                k = 0 if out_of_time() else int(min(len(results), budget - len(state.submissions)))
                if k > 0:
                    hps = next_hps(k)
                    for hp in hps:
                        if state.population.full:
                            parent = select_parent(sample(state.population, cfg.S, rng))
                            submit(mutate(parent.arch, arch_space, rng), hp, "mutation", parent.job_id)
                        else:
                            submit(random_arch(arch_space, rng), hp, "random", None)
            in_flight = len(state.submissions) - len(state.history)
            if in_flight == 0 and (out_of_time() or len(state.submissions) >= budget):
                break
            if out_of_time():
                break
            if not results:
                pool.idle(cfg.poll_interval)
    except Exception as exc:
        logger.error("search aborted: %s", exc)
        raise SearchAborted(str(exc), state) from exc

    pool.shutdown(drain=True)
    leftovers = pool.get_finished()
    if leftovers:
        collect(leftovers)
    state.clock = pool.now()
    logger.info("search finished: %d evaluations, best %.4f", len(state.history), best(state).objective)
    return state
