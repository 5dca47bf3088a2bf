"""Random-forest surrogate returning a mean and a spread for every query point.

Trees are grown on bootstrap resamples with exhaustive squared-error splits,
compiled with numba. The forest is refit on every tell/lie of the optimizer, on
a few hundred to a few thousand rows, so fit and predict latency matter more
here than in a general-purpose implementation.
"""

from __future__ import annotations

import numba
import numpy as np

from .errors import EmptyInputError, InvalidDataError, NotFittedError, ShapeError

_LEAF = -1


@numba.njit(cache=True)
def _grow_tree(X, y, rows, min_leaf, n_try, seed, feature, threshold, left, right, value):
    """Grow one tree on ``X[rows]``; returns the number of nodes written.

    Node arrays must hold at least ``2 * len(rows)`` entries. At each node
    ``n_try`` features, drawn without replacement, are searched for the split
    minimising the summed squared error of the children.
    """
    np.random.seed(seed)
    n_feat = X.shape[1]
    idx = rows.copy()
    # explicit stack of (node, start, end)
    stack_node = np.empty(2 * len(rows) + 2, np.int64)
    stack_lo = np.empty(2 * len(rows) + 2, np.int64)
    stack_hi = np.empty(2 * len(rows) + 2, np.int64)
    top = 0
    stack_node[0] = 0
    stack_lo[0] = 0
    stack_hi[0] = len(idx)
    top = 1
    n_nodes = 1
    feats = np.arange(n_feat)
    while top > 0:
        top -= 1
        node = stack_node[top]
        lo = stack_lo[top]
        hi = stack_hi[top]
        n = hi - lo
        # sums are taken relative to the first target so that a leaf of equal
        # targets stores that target exactly
        v0 = y[idx[lo]]
        s = 0.0
        ss = 0.0
        for k in range(lo, hi):
            v = y[idx[k]] - v0
            s += v
            ss += v * v
        value[node] = v0 + s / n
        feature[node] = _LEAF
        sse_parent = ss - s * s / n
        if n < 2 * min_leaf or sse_parent <= 1e-14 * max(1.0, ss):
            continue

        if n_try < n_feat:
            np.random.shuffle(feats)
        best_sse = sse_parent
        best_f = -1
        best_thr = 0.0
        seg = idx[lo:hi]
        for fi in range(n_try):
            f = feats[fi]
            xs = X[seg, f]
            order = np.argsort(xs, kind="mergesort")
            cs = 0.0
            css = 0.0
            for i in range(n - 1):
                v = y[seg[order[i]]] - v0
                cs += v
                css += v * v
                nl = i + 1
                if nl < min_leaf or n - nl < min_leaf:
                    continue
                a = xs[order[i]]
                b = xs[order[i + 1]]
                if b <= a:
                    continue
                nr = n - nl
                rs = s - cs
                sse = (css - cs * cs / nl) + ((ss - css) - rs * rs / nr)
                if sse < best_sse - 1e-12 * max(1.0, sse_parent):
                    best_sse = sse
                    best_f = f
                    best_thr = a + (b - a) / 2.0
                    if best_thr >= b:
                        best_thr = a
        if best_f < 0:
            continue

        # partition idx[lo:hi] so that rows going left come first
        i = lo
        j = hi - 1
        while i <= j:
            if X[idx[i], best_f] <= best_thr:
                i += 1
            else:
                tmp = idx[i]
                idx[i] = idx[j]
                idx[j] = tmp
                j -= 1
        feature[node] = best_f
        threshold[node] = best_thr
        l_node = n_nodes
        r_node = n_nodes + 1
        n_nodes += 2
        left[node] = l_node
        right[node] = r_node
        stack_node[top] = r_node
        stack_lo[top] = i
        stack_hi[top] = hi
        top += 1
        stack_node[top] = l_node
        stack_lo[top] = lo
        stack_hi[top] = i
        top += 1
    return n_nodes


@numba.njit(cache=True)
def _predict_trees(X, feature, threshold, left, right, value):
    n_trees = feature.shape[0]
    out = np.empty((n_trees, X.shape[0]))
    for t in range(n_trees):
        f_t = feature[t]
        thr_t = threshold[t]
        l_t = left[t]
        r_t = right[t]
        v_t = value[t]
        for r in range(X.shape[0]):
            node = 0
            f = f_t[0]
            while f != _LEAF:
                if X[r, f] <= thr_t[node]:
                    node = l_t[node]
                else:
                    node = r_t[node]
                f = f_t[node]
            out[t, r] = v_t[node]
    return out


class TreeEnsembleRegressor:
    """Bagged regression trees.

    The mean is the average of the per-tree predictions and the spread is their
    population standard deviation, so a single tree (or trees that all agree)
    yields zero spread. ``max_features`` is the fraction of input dimensions
    searched at every split.
    """

    def __init__(
        self,
        n_trees: int = 100,
        min_samples_leaf: int = 3,
        max_features: float = 1.0,
        bootstrap: bool = True,
        rng_seed: int = 0,
    ):
        if n_trees < 1:
            raise ValueError("n_trees must be at least 1")
        if min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be at least 1")
        if not 0 < max_features <= 1:
            raise ValueError("max_features is a fraction in (0, 1]")
        self.n_trees = n_trees
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.rng_seed = rng_seed
        self._trees = None
        self._n_features: int | None = None

    @property
    def fitted(self) -> bool:
        return self._trees is not None

    def fit(self, X, y) -> "TreeEnsembleRegressor":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        if len(X) == 0 or len(y) == 0:
            raise EmptyInputError("cannot fit a surrogate on zero points")
        if len(X) != len(y):
            raise ShapeError(f"{len(X)} inputs but {len(y)} targets")
        if not np.all(np.isfinite(y)):
            raise InvalidDataError("targets must be finite")
        if not np.all(np.isfinite(X)):
            raise InvalidDataError("inputs must be finite")
        X = np.ascontiguousarray(X)
        n, d = X.shape
        n_try = max(1, int(round(self.max_features * d)))
        rng = np.random.default_rng(self.rng_seed)
        cap = 2 * n + 1
        feature = np.full((self.n_trees, cap), _LEAF, dtype=np.int64)
        threshold = np.zeros((self.n_trees, cap))
        left = np.zeros((self.n_trees, cap), dtype=np.int64)
        right = np.zeros((self.n_trees, cap), dtype=np.int64)
        value = np.zeros((self.n_trees, cap))
        for t in range(self.n_trees):
            rows = rng.integers(0, n, n) if self.bootstrap else np.arange(n)
            _grow_tree(
                X, y, rows.astype(np.int64), self.min_samples_leaf, n_try, int(rng.integers(2**31)),
                feature[t], threshold[t], left[t], right[t], value[t],
            )
        self._trees = (feature, threshold, left, right, value)
        self._n_features = d
        return self

    def tree_predictions(self, X) -> np.ndarray:
        """Per-tree predictions, shape ``(n_trees, len(X))``."""
        if self._trees is None:
            raise NotFittedError("surrogate has not been fitted")
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self._n_features:
            raise ShapeError(f"expected {self._n_features} features, got {X.shape[1]}")
        return _predict_trees(np.ascontiguousarray(X), *self._trees)

    def predict(self, X) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(mu, sigma)`` arrays for the rows of ``X``."""
        per_tree = self.tree_predictions(X)
        # centring on the first tree makes the mean exact when all trees agree
        offset = per_tree[0]
        centred = per_tree - offset
        return offset + centred.mean(axis=0), centred.std(axis=0)
