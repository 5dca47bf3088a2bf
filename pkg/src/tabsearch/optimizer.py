"""Asynchronous Bayesian optimization of the training hyperparameters.

Candidates are ranked with the upper confidence bound ``mu + kappa * sigma`` of a
random-forest surrogate. Batches are produced with the constant-liar scheme:
each pick is added to the training data with the mean observed objective as a
provisional target, the surrogate is refit, and the next pick is made. The
provisional entries are discarded at the next ``tell``.
"""

from __future__ import annotations

import logging
import math
from decimal import Decimal
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidInputError, NoDataError
from .space import HPConfig, HPSpace, as_rng, decode_hp, encode_hp, random_hp, sample_hp_matrix
from .surrogate import TreeEnsembleRegressor

logger = logging.getLogger(__name__)


def ucb(mu, sigma, kappa: float) -> np.ndarray:
    return np.asarray(mu) + kappa * np.asarray(sigma)


@dataclass(frozen=True)
class AcquisitionScore:
    config: HPConfig
    mu: float
    sigma: float
    score: float


@dataclass
class Acquisition:
    """Everything computed for one constant-liar pick; kept for inspection."""

    candidates: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray
    scores: np.ndarray
    index: int

    @property
    def best(self) -> AcquisitionScore:
        i = self.index
        return AcquisitionScore(
            decode_hp(self.candidates[i]), float(self.mu[i]), float(self.sigma[i]), float(self.scores[i])
        )


class BayesianOptimizer:
    """Ask/tell optimizer over an :class:`HPSpace`.

    Args:
        space: the hyperparameter space.
        kappa: exploration weight of the UCB score; 0 is pure exploitation.
        n_initial: number of observations required before the surrogate is used;
            until then ``ask`` returns random configurations.
        n_candidates: random candidates scored per pick.
        seed: seed for candidate sampling and for the surrogate.
        surrogate: any object with ``fit(X, y)`` and ``predict(X) -> (mu, sigma)``.
            Defaults to a 100-tree :class:`TreeEnsembleRegressor`.
    """

    def __init__(
        self,
        space: HPSpace | None = None,
        kappa: float = 0.001,
        n_initial: int = 10,
        n_candidates: int = 10_000,
        seed=None,
        surrogate=None,
        n_trees: int = 100,
    ):
        if kappa < 0:
            raise InvalidInputError("kappa must be non-negative")
        if n_initial < 1 or n_candidates < 1:
            raise InvalidInputError("n_initial and n_candidates must be at least 1")
        self.space = space or HPSpace()
        self.kappa = kappa
        self.n_initial = n_initial
        self.n_candidates = n_candidates
        self.rng = as_rng(seed)
        if surrogate is None:
            surrogate = TreeEnsembleRegressor(n_trees=n_trees, rng_seed=int(self.rng.integers(2**31)))
        self.surrogate = surrogate
        self.observed: list[tuple[HPConfig, float]] = []
        self.lies: list[tuple[HPConfig, float]] = []
        self.last_acquisition: Acquisition | None = None
        self._stale = True

    def tell(self, configs: Sequence[HPConfig], objectives: Sequence[float]) -> None:
        configs = list(configs)
        objectives = [float(y) for y in objectives]
        if len(configs) != len(objectives):
            raise InvalidInputError(f"{len(configs)} configs but {len(objectives)} objectives")
        if not configs:
            raise InvalidInputError("tell needs at least one observation")
        if not all(math.isfinite(y) for y in objectives):
            raise InvalidInputError("objectives must be finite")
        for cfg in configs:
            encode_hp(cfg, self.space)
        self.observed.extend(zip(configs, objectives))
        self.lies.clear()
        self._stale = True
        if self.model_based:
            self._refit()

    @property
    def model_based(self) -> bool:
        return len(self.observed) >= self.n_initial

    def lie_value(self) -> float:
        """Mean observed objective.

        The sum runs over the shortest decimal form of each objective (the
        form written to run logs), so the mean of 0.8 and 0.9 is exactly 0.85
        rather than the neighbouring double that binary summation produces.
        """
        if not self.observed:
            raise NoDataError("no observations to derive a lie from")
        total = sum(Decimal(repr(y)) for _, y in self.observed)
        return float(total / len(self.observed))

    def ask(self, q: int = 1) -> list[HPConfig]:
        if q < 1:
            raise InvalidInputError(f"q must be at least 1, got {q}")
        if not self.model_based:
            return [random_hp(self.space, self.rng) for _ in range(q)]
        picks = []
        for _ in range(q):
            candidates = sample_hp_matrix(self.space, self.n_candidates, self.rng)
            acq = self.select(candidates)
            cfg = decode_hp(candidates[acq.index], self.space)
            picks.append(cfg)
            self.lies.append((cfg, self.lie_value()))
            self._stale = True
        return picks

    def select(self, candidates: np.ndarray) -> Acquisition:
        """Score encoded candidates with the current surrogate and pick the UCB argmax.

        Ties resolve to the earliest candidate.
        """
        if self._stale:
            self._refit()
        mu, sigma = self.surrogate.predict(candidates)
        mu = np.asarray(mu, dtype=float)
        sigma = np.asarray(sigma, dtype=float)
        scores = ucb(mu, sigma, self.kappa)
        acq = Acquisition(np.asarray(candidates), mu, sigma, scores, int(np.argmax(scores)))
        self.last_acquisition = acq
        return acq

    def _refit(self) -> None:
        data = self.observed + self.lies
        X = np.array([encode_hp(c, self.space) for c, _ in data])
        y = np.array([v for _, v in data])
        self.surrogate.fit(X, y)
        self._stale = False
