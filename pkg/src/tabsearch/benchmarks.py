"""Deterministic synthetic objectives for the simulated evaluation backend.

``layered`` rewards wide ReLU/Swish layers, a moderate number of skip
connections, and a hyperparameter region away from the usual defaults: the
best learning rates lie in ``[0.02, 0.05]``, batch size 64 or 128 and 2 or 4
processes. Its maximum value is exactly 0.95. Durations shrink with the process
count and grow with the network size, as in real data-parallel training.
"""

from __future__ import annotations

import math

import numpy as np

from .executor import SimulatedBackend
from .space import ACTIVATIONS, NUM_LAYER_CHOICES, UNITS, ArchConfig, ArchSpace, HPConfig

ACT_SCORE = {"identity": 0.5, "swish": 1.0, "relu": 1.0, "tanh": 0.8, "sigmoid": 0.6}
UNIT_SCORE = {16: 0.6, 32: 0.75, 48: 0.9, 64: 1.0, 80: 1.0, 96: 1.0}
PASS_SCORE = 0.3
BS_SCORE = {32: 0.6, 64: 1.0, 128: 1.0, 256: 0.8, 512: 0.6, 1024: 0.5}
N_SCORE = {1: 0.7, 2: 1.0, 4: 1.0, 8: 0.6}
LR_BEST = (0.02, 0.05)
TOP = 0.95


def _layer_table() -> np.ndarray:
    table = np.empty(NUM_LAYER_CHOICES)
    table[0] = PASS_SCORE
    for i in range(1, NUM_LAYER_CHOICES):
        u, a = divmod(i - 1, len(ACTIVATIONS))
        table[i] = UNIT_SCORE[UNITS[u]] * ACT_SCORE[ACTIVATIONS[a]]
    return table


def lr_score(lr: float) -> float:
    """1 on the plateau, falling linearly in log10 distance to 0.5 one decade away."""
    lo, hi = (math.log10(v) for v in LR_BEST)
    x = math.log10(lr)
    dist = max(lo - x, x - hi, 0.0)
    return 1.0 - 0.5 * min(dist, 1.0)


def hp_factor(hp: HPConfig) -> float:
    return lr_score(hp.lr1) * BS_SCORE.get(hp.bs1, 0.5) * N_SCORE.get(hp.n, 0.5)


class LayeredObjective:
    def __init__(self, space: ArchSpace):
        self.space = space
        self.table = _layer_table()
        kinds = [s.kind for s in space.slots]
        self.var_pos = np.array([i for i, k in enumerate(kinds) if k == "variable"])
        self.skip_pos = np.array([i for i, k in enumerate(kinds) if k == "skip"], dtype=int)

    def arch_scores(self, archs) -> np.ndarray:
        """Vectorized architecture factor for a ``(k, n_decisions)`` integer matrix."""
        a = np.asarray(archs)
        layer = self.table[a[:, self.var_pos]].mean(axis=1)
        n_skips = a[:, self.skip_pos].sum(axis=1) if len(self.skip_pos) else np.zeros(len(a))
        return layer * (1.0 - 0.05 * np.abs(n_skips - 2))

    def __call__(self, arch: ArchConfig, hp: HPConfig) -> float:
        return TOP * float(self.arch_scores([arch.decisions])[0]) * hp_factor(hp)

    def duration(self, arch: ArchConfig, hp: HPConfig) -> float:
        width = sum(UNITS[(v - 1) // len(ACTIVATIONS)] for v in (arch[i] for i in self.var_pos) if v)
        per_epoch = 1.0 + width / 64.0
        return 20 * per_epoch * (256 / hp.bs1) ** 0.25 / hp.n**0.8


class ConstantObjective:
    def __init__(self, space: ArchSpace, value: float = 0.5):
        self.value = value

    def __call__(self, arch, hp) -> float:
        return self.value

    def duration(self, arch, hp) -> float:
        return 10.0


REGISTRY = {
    "layered": LayeredObjective,
    "constant": ConstantObjective,
}


def simulated_backend(name: str, space: ArchSpace) -> SimulatedBackend:
    try:
        obj = REGISTRY[name](space)
    except KeyError:
        raise KeyError(f"unknown synthetic objective {name!r}; choose from {sorted(REGISTRY)}") from None
    return SimulatedBackend(obj, obj.duration)
