"""Post-hoc analyses of run logs."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..space import HPSpace, encode_hp
from .runlog import RunLog


def _by_finish(log: RunLog):
    return sorted(log.ok_records(), key=lambda r: (r.finish_time, r.job_id))


def best_so_far(log: RunLog) -> list[tuple[float, float]]:
    """Running maximum of the objective, one step per successful evaluation."""
    out = []
    best = -math.inf
    for rec in _by_finish(log):
        best = max(best, rec.objective)
        out.append((rec.finish_time, best))
    return out


def quantile(values: Sequence[float], q: float) -> float:
    """Quantile with linear interpolation between order statistics."""
    return float(np.quantile(np.asarray(values, dtype=float), q, method="linear"))


def high_performer_threshold(logs: Sequence[RunLog], q: float = 0.99) -> float:
    """Smallest of the per-log ``q``-quantiles of successful objectives."""
    per_log = [quantile([r.objective for r in log.ok_records()], q) for log in logs if log.ok_records()]
    if not per_log:
        raise ValueError("no successful evaluations in any log")
    return min(per_log)


def high_performer_counts(
    logs: Sequence[RunLog], q: float = 0.99, threshold: float | None = None
) -> tuple[float, list[list[tuple[float, int]]]]:
    """Cumulative number of distinct architectures scoring strictly above a shared threshold.

    Returns the threshold and, for every log, one ``(finish_time, count)`` point
    per successful evaluation.
    """
    if threshold is None:
        threshold = high_performer_threshold(logs, q)
    curves = []
    for log in logs:
        seen = set()
        curve = []
        for rec in _by_finish(log):
            if rec.objective > threshold:
                seen.add(rec.arch.decisions)
            curve.append((rec.finish_time, len(seen)))
        curves.append(curve)
    return threshold, curves


@dataclass
class Projection:
    points: np.ndarray  # (k, 2)
    variance_ratio: np.ndarray  # (2,)
    components: np.ndarray  # (2, d)


def pca_2d(data) -> Projection:
    """Project rows onto their top two principal components.

    Ratios are each component's share of the total variance. Component signs
    are fixed so that the largest-magnitude loading is positive. Data without
    variance maps every point to the origin with zero ratios.
    """
    x = np.asarray(data, dtype=float)
    k, d = x.shape
    centered = x - x.mean(axis=0)
    _, s, vt = np.linalg.svd(centered, full_matrices=False)
    var = s**2
    total = var.sum()
    comps = np.zeros((2, d))
    ratios = np.zeros(2)
    n_comp = min(2, len(s))
    if total > 0 and np.sqrt(total) > 1e-12 * max(1.0, np.abs(x).max()):
        comps[:n_comp] = vt[:n_comp]
        ratios[:n_comp] = var[:n_comp] / total
        for i in range(n_comp):
            if comps[i, np.argmax(np.abs(comps[i]))] < 0:
                comps[i] = -comps[i]
    return Projection(centered @ comps.T, ratios, comps)


@dataclass
class TopConfigPCA:
    job_ids: list[int]
    arch: Projection
    hp: Projection


def top_records(log: RunLog, fraction: float):
    ok = log.ok_records()
    k = math.ceil(fraction * len(ok))
    return sorted(ok, key=lambda r: (-r.objective, r.finish_time))[:k]


def pca_top_configs(log: RunLog, fraction: float = 0.01, hp_space: HPSpace | None = None) -> TopConfigPCA:
    """Separate 2-D projections of the architecture and hyperparameter vectors of the top configs."""
    top = top_records(log, fraction)
    if len(top) < 3:
        raise ValueError(f"top {fraction:.2%} holds {len(top)} records; need at least 3")
    arch = np.array([r.arch.decisions for r in top], dtype=float)
    hp = np.array([encode_hp(r.hp, hp_space) for r in top])
    return TopConfigPCA([r.job_id for r in top], pca_2d(arch), pca_2d(hp))
