"""Joint search space: dense-architecture decisions and data-parallel hyperparameters.

An architecture is a flat vector of categorical decisions. Variable nodes pick
one of 31 dense layer types (an identity pass-through plus 6 widths x 5
activations); skip-connection nodes are binary. The layout is

    N1, N2, SC(2<-0), N3, SC(3<-1), SC(3<-0), N4, SC(4<-2), SC(4<-1), SC(4<-0), ...

followed by the skip nodes of the output node. Node 0 is the input, nodes
1..m are the variable nodes and node m+1 is the output. Every node j may
receive skips from nodes j-2, j-3 and j-4 (those that exist), nearest first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple, Sequence

import numpy as np

from .errors import InvalidConfigError

UNITS: tuple[int, ...] = (16, 32, 48, 64, 80, 96)
ACTIVATIONS: tuple[str, ...] = ("identity", "swish", "relu", "tanh", "sigmoid")
NUM_LAYER_CHOICES = 1 + len(UNITS) * len(ACTIVATIONS)
MAX_SKIPS = 3


def as_rng(seed=None) -> np.random.Generator:
    """Return ``seed`` if it already is a Generator, else build one from it."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


class DenseLayer(NamedTuple):
    units: int
    activation: str


def decode_layer(index: int) -> DenseLayer | None:
    """Map a layer choice to its dense layer, or ``None`` for the identity choice.

    Indices 1..30 run units-major: 1 -> (16, identity), 2 -> (16, swish), ...,
    30 -> (96, sigmoid).
    """
    if not 0 <= index < NUM_LAYER_CHOICES:
        raise InvalidConfigError(f"layer choice {index} outside [0, {NUM_LAYER_CHOICES - 1}]")
    if index == 0:
        return None
    unit_idx, act_idx = divmod(index - 1, len(ACTIVATIONS))
    return DenseLayer(UNITS[unit_idx], ACTIVATIONS[act_idx])


def encode_layer(units: int, activation: str) -> int:
    try:
        return 1 + UNITS.index(units) * len(ACTIVATIONS) + ACTIVATIONS.index(activation)
    except ValueError:
        raise InvalidConfigError(f"no layer choice for ({units}, {activation})") from None


class Slot(NamedTuple):
    """One position of the decision vector.

    ``kind`` is ``"variable"`` or ``"skip"``. ``node`` is the node the decision
    belongs to; for skip slots ``source`` is the node the skip comes from.
    """

    kind: str
    node: int
    source: int | None = None

    @property
    def cardinality(self) -> int:
        return NUM_LAYER_CHOICES if self.kind == "variable" else 2


def skip_sources(node: int) -> list[int]:
    """Nodes that may send a skip connection to ``node``, nearest first."""
    return [s for s in (node - 2, node - 3, node - 4) if s >= 0]


@dataclass(frozen=True)
class ArchConfig:
    decisions: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "decisions", tuple(int(d) for d in self.decisions))

    def __len__(self) -> int:
        return len(self.decisions)

    def __iter__(self) -> Iterator[int]:
        return iter(self.decisions)

    def __getitem__(self, i: int) -> int:
        return self.decisions[i]

    def to_list(self) -> list[int]:
        return list(self.decisions)

    def hamming(self, other: "ArchConfig") -> int:
        if len(self) != len(other):
            raise InvalidConfigError("configs of different length")
        return sum(a != b for a, b in zip(self.decisions, other.decisions))


@dataclass(frozen=True)
class ArchSpace:
    m: int = 10
    input_dim: int | None = None
    output_dim: int | None = None
    slots: tuple[Slot, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.m < 1:
            raise InvalidConfigError(f"need at least one variable node, got m={self.m}")
        slots: list[Slot] = []
        for j in range(1, self.m + 1):
            slots.append(Slot("variable", j))
            slots.extend(Slot("skip", j, s) for s in skip_sources(j))
        out = self.m + 1
        slots.extend(Slot("skip", out, s) for s in skip_sources(out))
        object.__setattr__(self, "slots", tuple(slots))

    @property
    def cardinalities(self) -> np.ndarray:
        return np.array([s.cardinality for s in self.slots], dtype=np.int64)

    @property
    def num_skips(self) -> int:
        return sum(s.kind == "skip" for s in self.slots)

    def variable_positions(self) -> list[int]:
        return [i for i, s in enumerate(self.slots) if s.kind == "variable"]

    def validate(self, arch: ArchConfig | Sequence[int]) -> ArchConfig:
        """Return ``arch`` as an ArchConfig, raising InvalidConfigError if malformed."""
        if not isinstance(arch, ArchConfig):
            arch = ArchConfig(tuple(arch))
        if len(arch) != len(self.slots):
            raise InvalidConfigError(
                f"expected {len(self.slots)} decisions for m={self.m}, got {len(arch)}"
            )
        for pos, (value, slot) in enumerate(zip(arch, self.slots)):
            if not 0 <= value < slot.cardinality:
                raise InvalidConfigError(
                    f"decision {pos} ({slot.kind} node {slot.node}) = {value} "
                    f"outside [0, {slot.cardinality - 1}]"
                )
        return arch


def num_decision_variables(space: ArchSpace) -> int:
    m = space.m
    return m + sum(min(j - 1, MAX_SKIPS) for j in range(1, m + 1)) + min(m, MAX_SKIPS)


def space_size(space: ArchSpace) -> int:
    """Number of distinct architectures, as an exact integer."""
    return NUM_LAYER_CHOICES**space.m * 2**space.num_skips


def random_arch(space: ArchSpace, rng=None) -> ArchConfig:
    rng = as_rng(rng)
    return ArchConfig(tuple(int(v) for v in rng.integers(0, space.cardinalities)))


@dataclass(frozen=True)
class HPConfig:
    """Data-parallel training hyperparameters for a single process count ``n``.

    ``lr1`` and ``bs1`` are the single-process learning rate and batch size; the
    trainer scales both by ``n``.
    """

    lr1: float
    bs1: int
    n: int

    def to_dict(self) -> dict:
        return {"lr1": self.lr1, "bs1": self.bs1, "n": self.n}

    @classmethod
    def from_dict(cls, d: dict) -> "HPConfig":
        return cls(float(d["lr1"]), int(d["bs1"]), int(d["n"]))


DEFAULT_HP = HPConfig(0.01, 256, 1)


@dataclass(frozen=True)
class HPSpace:
    lr_range: tuple[float, float] = (0.001, 0.1)
    bs_choices: tuple[int, ...] = (32, 64, 128, 256, 512, 1024)
    n_choices: tuple[int, ...] = (1, 2, 4, 8)

    def __post_init__(self):
        lo, hi = self.lr_range
        if not 0 < lo < hi:
            raise InvalidConfigError(f"bad learning-rate range {self.lr_range}")
        if not self.bs_choices or not self.n_choices:
            raise InvalidConfigError("choice lists must be non-empty")

    @property
    def log_lr_range(self) -> tuple[float, float]:
        return math.log10(self.lr_range[0]), math.log10(self.lr_range[1])

    def contains(self, cfg: HPConfig) -> bool:
        lo, hi = self.lr_range
        return lo <= cfg.lr1 <= hi and cfg.bs1 in self.bs_choices and cfg.n in self.n_choices

    def validate(self, cfg: HPConfig) -> HPConfig:
        if not self.contains(cfg):
            raise InvalidConfigError(f"{cfg} is outside the hyperparameter space")
        return cfg


def random_hp(space: HPSpace, rng=None) -> HPConfig:
    rng = as_rng(rng)
    lo, hi = space.log_lr_range
    u = rng.uniform(lo, hi)
    bs = space.bs_choices[rng.integers(len(space.bs_choices))]
    n = space.n_choices[rng.integers(len(space.n_choices))]
    return HPConfig(float(10.0**u), int(bs), int(n))


def sample_hp_matrix(space: HPSpace, size: int, rng=None) -> np.ndarray:
    """Draw ``size`` random configs directly in encoded form, shape ``(size, 3)``."""
    rng = as_rng(rng)
    lo, hi = space.log_lr_range
    out = np.empty((size, 3))
    out[:, 0] = np.log10(10.0 ** rng.uniform(lo, hi, size))
    out[:, 1] = rng.integers(len(space.bs_choices), size=size)
    out[:, 2] = rng.integers(len(space.n_choices), size=size)
    return out


def encode_hp(cfg: HPConfig, space: HPSpace | None = None) -> np.ndarray:
    space = space or HPSpace()
    try:
        bs_idx = space.bs_choices.index(cfg.bs1)
        n_idx = space.n_choices.index(cfg.n)
    except ValueError:
        raise InvalidConfigError(f"{cfg} uses a value outside the choice lists") from None
    if not cfg.lr1 > 0:
        raise InvalidConfigError(f"learning rate must be positive, got {cfg.lr1}")
    return np.array([math.log10(cfg.lr1), bs_idx, n_idx], dtype=float)


def decode_hp(vec, space: HPSpace | None = None) -> HPConfig:
    space = space or HPSpace()
    log_lr, bs_idx, n_idx = vec
    try:
        return HPConfig(
            float(10.0 ** float(log_lr)),
            space.bs_choices[int(bs_idx)],
            space.n_choices[int(n_idx)],
        )
    except IndexError:
        raise InvalidConfigError(f"encoded vector {list(vec)} outside the choice lists") from None
