"""Materialize an architecture vector as a dense network with skip connections.

Nodes are numbered 0 (input), 1..m (variable nodes) and m+1 (output). When a
node receives skip connections, every skip source is sent through its own
linear projection to the width of the previous node's output, all tensors are
summed, and the sum goes through a ReLU before entering the node. A node with no
incoming skip takes the previous node's output unchanged. Identity layer
choices are parameter-free pass-throughs. The output node is a dense softmax
layer.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DivergedError, ShapeError
from ..space import ArchConfig, ArchSpace, decode_layer
from .activations import ACTIVATIONS, softmax


@dataclass(frozen=True)
class NodeSpec:
    """``kind`` is ``"pass"``, ``"dense"`` or ``"output"``."""

    kind: str
    in_width: int
    width: int
    activation: str = "identity"


@dataclass(frozen=True)
class SkipEdge:
    source: int
    dest: int
    projection: bool = True

    @property
    def key(self) -> str:
        return f"{self.source}->{self.dest}"


class NetworkPlan:
    """A built network and its parameters.

    ``nodes[j - 1]`` describes node ``j``; ``params`` maps parameter names to
    arrays and is updated in place by training.
    """

    def __init__(self, nodes, skip_edges, input_dim: int, output_dim: int, seed=0, dtype=np.float64):
        self.nodes: list[NodeSpec] = list(nodes)
        self.skip_edges: list[SkipEdge] = list(skip_edges)
        self.input_dim = input_dim
        self.output_dim = output_dim
        self.dtype = np.dtype(dtype)
        self._incoming: dict[int, list[SkipEdge]] = {}
        for e in self.skip_edges:
            if not (e.source < e.dest - 1 and e.dest - e.source <= 4):
                raise ValueError(f"illegal skip edge {e.key}")
            self._incoming.setdefault(e.dest, []).append(e)
        self.params: dict[str, np.ndarray] = self.init_params(seed)

    @property
    def widths(self) -> list[int]:
        """Output width of every node, input node included."""
        return [self.input_dim] + [n.width for n in self.nodes]

    def param_shapes(self) -> dict[str, tuple[int, ...]]:
        widths = self.widths
        shapes: dict[str, tuple[int, ...]] = {}
        for j, node in enumerate(self.nodes, start=1):
            for e in self._incoming.get(j, []):
                shapes[f"P{e.key}"] = (widths[e.source], widths[j - 1])
                shapes[f"c{e.key}"] = (widths[j - 1],)
            if node.kind != "pass":
                shapes[f"W{j}"] = (node.in_width, node.width)
                shapes[f"b{j}"] = (node.width,)
        return shapes

    @property
    def num_parameters(self) -> int:
        return int(sum(np.prod(s) for s in self.param_shapes().values()))

    @property
    def num_projections(self) -> int:
        return sum(e.projection for e in self.skip_edges)

    def init_params(self, seed=0) -> dict[str, np.ndarray]:
        """Glorot-uniform weights and zero biases."""
        rng = np.random.default_rng(seed)
        params = {}
        for name, shape in self.param_shapes().items():
            if len(shape) == 2:
                limit = np.sqrt(6.0 / (shape[0] + shape[1]))
                params[name] = rng.uniform(-limit, limit, size=shape).astype(self.dtype)
            else:
                params[name] = np.zeros(shape, dtype=self.dtype)
        return params

    def _check_batch(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=self.dtype)
        if x.ndim != 2 or x.shape[1] != self.input_dim:
            raise ShapeError(f"expected batch of shape (B, {self.input_dim}), got {x.shape}")
        return x

    def _forward(self, params, x):
        outs = [x]
        cache = []
        for j, node in enumerate(self.nodes, start=1):
            h = outs[j - 1]
            skips = self._incoming.get(j)
            merged = None
            if skips:
                z = h.copy()
                for e in skips:
                    z += outs[e.source] @ params[f"P{e.key}"] + params[f"c{e.key}"]
                merged = z
                h = np.maximum(z, 0)
            if node.kind == "pass":
                pre, out = None, h
            else:
                pre = h @ params[f"W{j}"] + params[f"b{j}"]
                if node.kind == "output":
                    out = softmax(pre)
                else:
                    out = ACTIVATIONS[node.activation][0](pre)
            cache.append((h, merged, pre))
            outs.append(out)
        return outs, cache

    def forward(self, x, params=None) -> np.ndarray:
        """Class probabilities for a batch, shape ``(B, output_dim)``."""
        x = self._check_batch(x)
        outs, _ = self._forward(self.params if params is None else params, x)
        return outs[-1]

    def loss_and_grad(self, x, labels, params=None) -> tuple[float, dict[str, np.ndarray]]:
        """Mean softmax cross-entropy over the batch and its gradient.

        Raises DivergedError if the forward pass produces non-finite values.
        """
        params = self.params if params is None else params
        x = self._check_batch(x)
        labels = np.asarray(labels, dtype=np.int64)
        if labels.shape != (len(x),):
            raise ShapeError(f"expected {len(x)} labels, got shape {labels.shape}")
        outs, cache = self._forward(params, x)
        probs = outs[-1]
        batch = len(x)
        logits = cache[-1][2]
        shifted = logits - logits.max(axis=1, keepdims=True)
        log_norm = np.log(np.exp(shifted).sum(axis=1))
        loss = float(np.mean(log_norm - shifted[np.arange(batch), labels]))
        if not np.isfinite(loss) or not np.all(np.isfinite(probs)):
            raise DivergedError("non-finite values in forward pass")

        grads = {name: np.zeros_like(p) for name, p in params.items()}
        # gradient w.r.t. each node's output; the output node starts from the softmax shortcut
        d_out: list = [None] * (len(self.nodes) + 1)
        n_nodes = len(self.nodes)
        for j in range(n_nodes, 0, -1):
            node = self.nodes[j - 1]
            h, merged, pre = cache[j - 1]
            if node.kind == "output":
                d_pre = probs.copy()
                d_pre[np.arange(batch), labels] -= 1.0
                d_pre /= batch
            elif node.kind == "dense":
                g = d_out[j]
                if g is None:
                    continue
                d_pre = g * ACTIVATIONS[node.activation][1](pre, outs[j])
            if node.kind == "pass":
                d_h = d_out[j]
                if d_h is None:
                    continue
            else:
                grads[f"W{j}"] += h.T @ d_pre
                grads[f"b{j}"] += d_pre.sum(axis=0)
                d_h = d_pre @ params[f"W{j}"].T
            skips = self._incoming.get(j)
            if skips:
                d_z = d_h * (merged > 0)
                for e in skips:
                    grads[f"P{e.key}"] += outs[e.source].T @ d_z
                    grads[f"c{e.key}"] += d_z.sum(axis=0)
                    _accumulate(d_out, e.source, d_z @ params[f"P{e.key}"].T)
                _accumulate(d_out, j - 1, d_z)
            else:
                _accumulate(d_out, j - 1, d_h)
        return loss, grads


def _accumulate(d_out, idx, g):
    if idx == 0:
        return
    d_out[idx] = g if d_out[idx] is None else d_out[idx] + g


def build(arch: ArchConfig, space: ArchSpace, seed=0, dtype=np.float64) -> NetworkPlan:
    """Turn an architecture vector into a :class:`NetworkPlan` with fresh parameters."""
    if space.input_dim is None or space.output_dim is None:
        raise ValueError("the architecture space needs input_dim and output_dim to build networks")
    arch = space.validate(arch)
    layer_choice: dict[int, int] = {}
    edges: list[SkipEdge] = []
    for value, slot in zip(arch, space.slots):
        if slot.kind == "variable":
            layer_choice[slot.node] = value
        elif value == 1:
            edges.append(SkipEdge(slot.source, slot.node))

    nodes: list[NodeSpec] = []
    width = space.input_dim
    for j in range(1, space.m + 1):
        layer = decode_layer(layer_choice[j])
        if layer is None:
            nodes.append(NodeSpec("pass", width, width))
        else:
            nodes.append(NodeSpec("dense", width, layer.units, layer.activation))
            width = layer.units
    nodes.append(NodeSpec("output", width, space.output_dim, "softmax"))
    return NetworkPlan(nodes, edges, space.input_dim, space.output_dim, seed=seed, dtype=dtype)


def forward(plan: NetworkPlan, batch) -> np.ndarray:
    return plan.forward(batch)


def loss_and_grad(plan: NetworkPlan, batch, labels):
    return plan.loss_and_grad(batch, labels)


def accuracy(plan: NetworkPlan, x, y, params=None, chunk: int = 8192) -> float:
    y = np.asarray(y)
    if len(y) == 0:
        return 0.0
    hits = 0
    for start in range(0, len(y), chunk):
        probs = plan.forward(x[start : start + chunk], params)
        hits += int(np.sum(probs.argmax(axis=1) == y[start : start + chunk]))
    return hits / len(y)
