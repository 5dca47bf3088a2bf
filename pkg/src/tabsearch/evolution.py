"""Aging-evolution primitives: the bounded FIFO population and its operators."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import EmptyInputError, InsufficientPopulationError, InvalidDataError
from .space import ArchConfig, ArchSpace, HPConfig, as_rng

OK = "ok"
FAILED = "failed"


@dataclass(frozen=True)
class EvaluationRecord:
    """One finished evaluation. Times are seconds since the start of the run."""

    job_id: int
    arch: ArchConfig
    hp: HPConfig
    objective: float
    status: str = OK
    submit_time: float = 0.0
    finish_time: float = 0.0
    train_time: float = 0.0
    worker_id: int = -1
    warning: str = ""

    def __post_init__(self):
        if self.status not in (OK, FAILED):
            raise InvalidDataError(f"unknown status {self.status!r}")
        if self.status == FAILED and self.objective != 0.0:
            raise InvalidDataError("failed records must carry objective 0")
        if not 0.0 <= self.objective <= 1.0:
            raise InvalidDataError(f"objective {self.objective} outside [0, 1]")
        if self.finish_time < self.submit_time:
            raise InvalidDataError("finish_time precedes submit_time")

    @property
    def ok(self) -> bool:
        return self.status == OK


class Population:
    """Fixed-capacity queue; pushing onto a full population evicts the oldest entry."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("population capacity must be positive")
        self.capacity = capacity
        self._entries: deque[EvaluationRecord] = deque(maxlen=capacity)

    def push(self, rec: EvaluationRecord) -> None:
        self._entries.append(rec)

    def extend(self, recs: Iterable[EvaluationRecord]) -> None:
        for rec in recs:
            self.push(rec)

    @property
    def full(self) -> bool:
        return len(self._entries) == self.capacity

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[EvaluationRecord]:
        return iter(self._entries)

    def entries(self) -> list[EvaluationRecord]:
        return list(self._entries)

    def sample(self, size: int, rng=None) -> list[EvaluationRecord]:
        return sample(self, size, rng)


def sample(pop: Population, size: int, rng=None) -> list[EvaluationRecord]:
    """Draw ``size`` distinct members uniformly at random (tournament sample)."""
    if size < 1:
        raise ValueError("sample size must be at least 1")
    if len(pop) < size:
        raise InsufficientPopulationError(
            f"cannot sample {size} records from a population of {len(pop)}"
        )
    rng = as_rng(rng)
    entries = pop.entries()
    return [entries[i] for i in rng.choice(len(entries), size=size, replace=False)]


def select_parent(candidates: Sequence[EvaluationRecord]) -> EvaluationRecord:
    if not candidates:
        raise EmptyInputError("cannot select a parent from an empty sample")
    best = candidates[0]
    for rec in candidates[1:]:
        if rec.objective > best.objective:
            best = rec
    return best


def mutate(arch: ArchConfig, space: ArchSpace, rng=None) -> ArchConfig:
    """Change one uniformly chosen decision to a different value of its domain.

    Every position is eligible, skip nodes included; a mutated skip node simply
    flips.
    """
    rng = as_rng(rng)
    arch = space.validate(arch)
    pos = int(rng.integers(len(arch)))
    current = arch[pos]
    value = int(rng.integers(space.slots[pos].cardinality - 1))
    if value >= current:
        value += 1
    child = list(arch.decisions)
    child[pos] = value
    return ArchConfig(tuple(child))
