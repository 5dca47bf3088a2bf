"""Data-parallel training of a :class:`NetworkPlan` with Adam.

The training rows are split once into ``n_shards`` disjoint shards. At every
step each shard contributes a mini-batch of ``bs1`` rows, the per-shard
gradients are averaged, and a single Adam update is applied, so the effective
batch is ``n_shards * bs1``. The learning rate ramps linearly from ``lr1`` to
``n_shards * lr1`` over the warmup epochs and is afterwards cut by
``plateau_factor`` whenever validation accuracy stalls for ``plateau_patience``
epochs.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ..errors import DivergedError, InvalidDataError
from .network import NetworkPlan, accuracy

logger = logging.getLogger(__name__)


class DataSplit(NamedTuple):
    x_train: np.ndarray
    y_train: np.ndarray
    x_valid: np.ndarray
    y_valid: np.ndarray


@dataclass(frozen=True)
class TrainConfig:
    lr1: float = 0.01
    bs1: int = 256
    n_shards: int = 1
    epochs: int = 20
    warmup_epochs: int = 5
    plateau_patience: int = 5
    plateau_factor: float = 0.1
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    parallel_shards: bool = False

    def __post_init__(self):
        if not self.epochs >= self.warmup_epochs >= 0:
            raise ValueError("need epochs >= warmup_epochs >= 0")
        if not 0 < self.plateau_factor < 1:
            raise ValueError("plateau_factor must lie in (0, 1)")
        if self.bs1 < 1 or self.n_shards < 1:
            raise ValueError("bs1 and n_shards must be positive")
        if not self.lr1 > 0:
            raise ValueError("lr1 must be positive")


class EpochStats(NamedTuple):
    train_loss: float
    valid_accuracy: float
    lr: float


@dataclass
class TrainResult:
    valid_accuracy: float
    history: list[EpochStats]
    wall_time: float
    status: str = "ok"
    message: str = ""
    params: dict | None = field(default=None, repr=False)


def scaled_hp(cfg: TrainConfig | float, bs1: int | None = None, n: int | None = None) -> tuple[float, int]:
    """Linear scaling rule: multiply learning rate and batch size by the shard count.

    Accepts a :class:`TrainConfig` or the three numbers ``(lr1, bs1, n)``.
    """
    if isinstance(cfg, TrainConfig):
        return cfg.n_shards * cfg.lr1, cfg.n_shards * cfg.bs1
    if bs1 is None or n is None:
        raise TypeError("scaled_hp(lr1, bs1, n) needs all three values")
    return n * cfg, n * bs1


class LRSchedule:
    """Per-epoch learning rate: linear warmup, then reduce-on-plateau.

    Epochs are numbered from 1. During warmup epoch ``k`` runs at
    ``lr1 + (lr_n - lr1) * (k - 1) / (warmup - 1)``, so the first epoch uses
    ``lr1`` and the last warmup epoch uses ``lr_n``. Plateau tracking only counts
    epochs after warmup.
    """

    def __init__(self, lr1: float, lr_n: float, warmup: int, patience: int, factor: float):
        self.lr1, self.lr_n = lr1, lr_n
        self.warmup, self.patience, self.factor = warmup, patience, factor
        self.best = -np.inf
        self.wait = 0
        self.reductions = 0

    def lr(self, epoch: int) -> float:
        if epoch <= self.warmup:
            if self.warmup == 1:
                return self.lr_n
            return self.lr1 + (self.lr_n - self.lr1) * (epoch - 1) / (self.warmup - 1)
        return self.lr_n * self.factor**self.reductions

    def update(self, epoch: int, metric: float) -> bool:
        """Feed the validation metric of ``epoch``; return True if the rate was cut."""
        if metric > self.best:
            self.best = metric
            self.wait = 0
            return False
        if epoch <= self.warmup:
            return False
        self.wait += 1
        if self.wait >= self.patience:
            self.reductions += 1
            self.wait = 0
            return True
        return False


class Adam:
    def __init__(self, params: dict, beta1=0.9, beta2=0.999, eps=1e-8):
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict, grads: dict, lr: float) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1 = 1 - b1**self.t
        c2 = 1 - b2**self.t
        for k, p in params.items():
            g = grads[k]
            self.m[k] = b1 * self.m[k] + (1 - b1) * g
            self.v[k] = b2 * self.v[k] + (1 - b2) * g * g
            p -= lr * (self.m[k] / c1) / (np.sqrt(self.v[k] / c2) + self.eps)


def averaged_gradient(plan: NetworkPlan, params, batches, pool: ThreadPoolExecutor | None = None):
    """Average the per-shard mean losses and gradients.

    ``batches`` is a sequence of ``(x, y)`` pairs, one per shard. Results are
    combined in shard order whether or not a thread pool is used.
    """

    def one(batch):
        return plan.loss_and_grad(batch[0], batch[1], params)

    results = list(pool.map(one, batches)) if pool is not None else [one(b) for b in batches]
    k = len(results)
    loss = sum(r[0] for r in results) / k
    grads = {}
    for name in params:
        total = results[0][1][name].copy()
        for r in results[1:]:
            total += r[1][name]
        grads[name] = total / k
    return loss, grads


def make_shards(n_rows: int, n_shards: int, rng) -> list[np.ndarray]:
    """Split a random permutation of the row indices into disjoint shards."""
    n_shards = max(1, min(n_shards, n_rows))
    return np.array_split(rng.permutation(n_rows), n_shards)


def train(plan: NetworkPlan, data: DataSplit, cfg: TrainConfig) -> TrainResult:
    """Train ``plan`` in place and report the validation accuracy of the final epoch."""
    x_train = np.asarray(data.x_train, dtype=plan.dtype)
    y_train = np.asarray(data.y_train, dtype=np.int64)
    x_valid = np.asarray(data.x_valid, dtype=plan.dtype)
    y_valid = np.asarray(data.y_valid, dtype=np.int64)
    if len(x_train) == 0:
        raise InvalidDataError("empty training set")
    if len(x_train) != len(y_train) or len(x_valid) != len(y_valid):
        raise InvalidDataError("features and labels differ in length")

    start = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    lr_n, _ = scaled_hp(cfg)
    schedule = LRSchedule(cfg.lr1, lr_n, cfg.warmup_epochs, cfg.plateau_patience, cfg.plateau_factor)
    shards = make_shards(len(x_train), cfg.n_shards, rng)
    params = plan.params
    adam = Adam(params, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps)
    pool = ThreadPoolExecutor(len(shards)) if cfg.parallel_shards and len(shards) > 1 else None
    history: list[EpochStats] = []
    try:
        for epoch in range(1, cfg.epochs + 1):
            lr = schedule.lr(epoch)
            orders = [rng.permutation(s) for s in shards]
            steps = max(-(-len(o) // cfg.bs1) for o in orders)
            losses = []
            for step in range(steps):
                batches = []
                for order in orders:
                    idx = order[step * cfg.bs1 : (step + 1) * cfg.bs1]
                    if len(idx):
                        batches.append((x_train[idx], y_train[idx]))
                loss, grads = averaged_gradient(plan, params, batches, pool)
                adam.step(params, grads, lr)
                losses.append(loss)
            if not all(np.isfinite(p).all() for p in params.values()):
                raise DivergedError(f"non-finite parameters after epoch {epoch}")
            acc = accuracy(plan, x_valid, y_valid, params)
            history.append(EpochStats(float(np.mean(losses)), acc, lr))
            if schedule.update(epoch, acc):
                logger.debug("epoch %d: plateau, lr -> %g", epoch, schedule.lr(epoch + 1))
    except DivergedError as exc:
        return TrainResult(0.0, history, time.perf_counter() - start, "failed", str(exc))
    finally:
        if pool is not None:
            pool.shutdown()
    final = history[-1].valid_accuracy if history else 0.0
    return TrainResult(final, history, time.perf_counter() - start, "ok", params=params)
