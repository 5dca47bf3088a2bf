"""Manager/worker evaluation pools with a nonblocking submit/poll interface.

Two pools share the same surface (``submit``, ``get_finished``, ``shutdown``,
``idle``, ``now``):

* :class:`ThreadWorkerPool` runs any backend callable on ``W`` worker threads in
  real time. It is used with :class:`TrainerBackend`.
* :class:`SimulatedWorkerPool` runs a :class:`SimulatedBackend` against a virtual
  clock. Evaluation costs nothing in real time, and the completion order is a
  pure function of the submissions, so simulated searches are reproducible.

Results are delivered in completion order, each exactly once.
"""

from __future__ import annotations

import heapq
import itertools
import logging
import threading
import time
from collections import deque
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

from .errors import DivergedError, RejectedSubmissionError
from .evolution import FAILED, OK, EvaluationRecord
from .space import ArchConfig, ArchSpace, HPConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Job:
    id: int
    arch: ArchConfig
    hp: HPConfig
    submit_time: float


class Outcome(NamedTuple):
    objective: float
    status: str = OK
    duration: float = 0.0
    warning: str = ""


class SimulatedBackend:
    """Test double that scores a configuration with pure functions.

    ``duration_fn`` gives the simulated wall time of an evaluation in seconds.
    """

    def __init__(self, objective_fn: Callable, duration_fn: Callable | None = None):
        self.objective_fn = objective_fn
        self.duration_fn = duration_fn or (lambda arch, hp: 1.0)

    def __call__(self, arch: ArchConfig, hp: HPConfig) -> Outcome:
        obj = float(self.objective_fn(arch, hp))
        return Outcome(min(max(obj, 0.0), 1.0), OK, float(self.duration_fn(arch, hp)))


class TrainerBackend:
    """Build and train the network of each job on a fixed dataset split.

    The process count requested by a job is clamped to ``n_max``; clamped jobs
    carry a warning on their record.
    """

    def __init__(self, data, space: ArchSpace, n_max: int = 8, epochs: int = 20, seed: int = 0,
                 dtype="float32", parallel_shards: bool = False):
        self.data = data
        self.space = space
        self.n_max = n_max
        self.epochs = epochs
        self.seed = seed
        self.dtype = dtype
        self.parallel_shards = parallel_shards

    def __call__(self, arch: ArchConfig, hp: HPConfig) -> Outcome:
        from .model import TrainConfig, build, train

        warning = ""
        n = hp.n
        if n > self.n_max:
            warning = f"n={n} clamped to n_max={self.n_max}"
            n = self.n_max
        start = time.perf_counter()
        plan = build(arch, self.space, seed=self.seed, dtype=self.dtype)
        cfg = TrainConfig(
            lr1=hp.lr1,
            bs1=hp.bs1,
            n_shards=n,
            epochs=self.epochs,
            warmup_epochs=min(5, self.epochs),
            seed=self.seed,
            parallel_shards=self.parallel_shards,
        )
        result = train(plan, self.data, cfg)
        duration = time.perf_counter() - start
        if result.status != OK:
            return Outcome(0.0, FAILED, duration, (warning + "; " if warning else "") + result.message)
        return Outcome(result.valid_accuracy, OK, duration, warning)


def _failed(job: Job, now: float, worker_id: int, reason: str) -> EvaluationRecord:
    return EvaluationRecord(
        job.id, job.arch, job.hp, 0.0, FAILED, job.submit_time, max(now, job.submit_time), 0.0, worker_id, reason
    )


class ThreadWorkerPool:
    """``workers`` threads pulling jobs from a FIFO queue."""

    def __init__(self, backend: Callable[[ArchConfig, HPConfig], Outcome], workers: int):
        if workers < 1:
            raise ValueError("need at least one worker")
        self.backend = backend
        self.workers = workers
        self._ids = itertools.count()
        self._cond = threading.Condition()
        self._pending: deque[Job] = deque()
        self._completed: list[EvaluationRecord] = []
        self._running = 0
        self.max_running = 0
        self._closed = False
        self._stop = False
        self._t0 = time.monotonic()
        self._threads = [
            threading.Thread(target=self._work, args=(i,), name=f"worker-{i}", daemon=True)
            for i in range(workers)
        ]
        for t in self._threads:
            t.start()

    def now(self) -> float:
        return time.monotonic() - self._t0

    @property
    def running_count(self) -> int:
        return self._running

    @property
    def queued_count(self) -> int:
        return len(self._pending)

    def submit(self, arch: ArchConfig, hp: HPConfig) -> int:
        with self._cond:
            if self._closed:
                raise RejectedSubmissionError("pool has been shut down")
            job = Job(next(self._ids), arch, hp, self.now())
            self._pending.append(job)
            self._cond.notify_all()
        return job.id

    def get_finished(self) -> list[EvaluationRecord]:
        with self._cond:
            done, self._completed = self._completed, []
        return done

    def idle(self, timeout: float) -> None:
        """Block for at most ``timeout`` seconds or until a result is available."""
        with self._cond:
            if not self._completed:
                self._cond.wait(timeout)

    def _work(self, worker_id: int) -> None:
        while True:
            with self._cond:
                while not self._pending and not self._stop:
                    self._cond.wait()
                if not self._pending:
                    return
                job = self._pending.popleft()
                self._running += 1
                self.max_running = max(self.max_running, self._running)
            start = time.perf_counter()
            try:
                out = self.backend(job.arch, job.hp)
            except DivergedError as exc:
                out = Outcome(0.0, FAILED, time.perf_counter() - start, str(exc))
            except Exception as exc:  # a crashing evaluation must not kill the worker
                logger.exception("job %d raised", job.id)
                out = Outcome(0.0, FAILED, time.perf_counter() - start, f"{type(exc).__name__}: {exc}")
            with self._cond:
                rec = EvaluationRecord(
                    job.id, job.arch, job.hp, out.objective if out.status == OK else 0.0, out.status,
                    job.submit_time, self.now(), out.duration, worker_id, out.warning,
                )
                self._completed.append(rec)
                self._running -= 1
                self._cond.notify_all()

    def shutdown(self, drain: bool = True) -> None:
        """Stop accepting jobs; with ``drain=False`` queued jobs are cancelled as failed.

        Running jobs always run to completion and are delivered by later polls.
        Calling shutdown twice is a no-op.
        """
        with self._cond:
            if self._closed:
                return
            self._closed = True
            if not drain:
                while self._pending:
                    self._completed.append(_failed(self._pending.popleft(), self.now(), -1, "cancelled"))
            self._stop = True
            self._cond.notify_all()
        for t in self._threads:
            t.join()


class SimulatedWorkerPool:
    """Discrete-event pool driven by a virtual clock.

    ``idle`` jumps the clock to the next completion, so a search over simulated
    evaluations runs as fast as the controller can make decisions.
    """

    def __init__(self, backend: SimulatedBackend, workers: int):
        if workers < 1:
            raise ValueError("need at least one worker")
        self.backend = backend
        self.workers = workers
        self.clock = 0.0
        self._ids = itertools.count()
        self._pending: deque[Job] = deque()
        self._free = list(range(workers))
        heapq.heapify(self._free)
        # (finish_time, job_id, worker_id, job, outcome)
        self._events: list = []
        self._completed: list[EvaluationRecord] = []
        self._closed = False
        self.max_running = 0

    def now(self) -> float:
        return self.clock

    @property
    def running_count(self) -> int:
        return len(self._events)

    @property
    def queued_count(self) -> int:
        return len(self._pending)

    def submit(self, arch: ArchConfig, hp: HPConfig) -> int:
        if self._closed:
            raise RejectedSubmissionError("pool has been shut down")
        job = Job(next(self._ids), arch, hp, self.clock)
        self._pending.append(job)
        self._dispatch(self.clock)
        return job.id

    def _dispatch(self, t: float) -> None:
        while self._free and self._pending:
            job = self._pending.popleft()
            worker = heapq.heappop(self._free)
            out = self.backend(job.arch, job.hp)
            heapq.heappush(self._events, (t + out.duration, job.id, worker, job, out))
        self.max_running = max(self.max_running, len(self._events))

    def _process_until(self, t: float) -> None:
        while self._events and self._events[0][0] <= t:
            finish, _, worker, job, out = heapq.heappop(self._events)
            self._completed.append(
                EvaluationRecord(
                    job.id, job.arch, job.hp, out.objective if out.status == OK else 0.0, out.status,
                    job.submit_time, finish, out.duration, worker, out.warning,
                )
            )
            heapq.heappush(self._free, worker)
            self._dispatch(finish)

    def get_finished(self) -> list[EvaluationRecord]:
        self._process_until(self.clock)
        done, self._completed = self._completed, []
        return done

    def idle(self, timeout: float | None = None) -> None:
        """Advance the virtual clock to the next completion event, if any."""
        if self._events:
            self.clock = max(self.clock, self._events[0][0])

    def shutdown(self, drain: bool = True) -> None:
        if self._closed:
            return
        self._closed = True
        if not drain:
            while self._pending:
                self._completed.append(_failed(self._pending.popleft(), self.clock, -1, "cancelled"))
        while self._events:
            self.clock = max(self.clock, max(e[0] for e in self._events))
            self._process_until(self.clock)


WorkerPool = ThreadWorkerPool | SimulatedWorkerPool


def make_pool(backend, workers: int):
    if isinstance(backend, SimulatedBackend):
        return SimulatedWorkerPool(backend, workers)
    return ThreadWorkerPool(backend, workers)


def utilization(records: Sequence[EvaluationRecord], workers: int, wall_time: float | None = None) -> float:
    """Fraction of worker capacity spent evaluating: busy time / (workers * wall time)."""
    if not records:
        return 0.0
    if wall_time is None:
        wall_time = max(r.finish_time for r in records)
    if wall_time <= 0:
        return 0.0
    return sum(r.train_time for r in records) / (workers * wall_time)
