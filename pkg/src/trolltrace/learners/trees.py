"""CART-style binary classification trees (Gini impurity) and bagged forests.

The tree builder is compiled with numba. Split selection is fully
deterministic: among candidate splits of equal impurity the lowest feature
index wins, then the lowest threshold. Per-node feature subsampling uses a
splitmix64 stream seeded per tree, so a forest is reproducible from
``(seed, tree index)`` alone and trees can be built in any order.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit

LEAF = -1
_TIE_TOL = 1e-9


@njit(cache=True)
def _splitmix(state):
    state[0] = state[0] + np.uint64(0x9E3779B97F4A7C15)
    z = state[0]
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


@njit(cache=True)
def _shuffled_features(n_features, state):
    perm = np.arange(n_features)
    for i in range(n_features - 1, 0, -1):
        j = np.int64(_splitmix(state) % np.uint64(i + 1))
        perm[i], perm[j] = perm[j], perm[i]
    return perm


@njit(cache=True)
def _node_groups(R, y, idx, start, end, f, n_levels, cnt, cpos, g_rank, g_cnt, g_pos, keys, labs):
    """Distinct value ranks of feature ``f`` present in the node, ascending,
    with their sample and troll counts. Returns the number of groups."""
    m = end - start
    n_groups = 0
    if m * m > 4 * (n_levels + m):
        for i in range(start, end):
            r = R[idx[i], f]
            cnt[r] += 1
            cpos[r] += y[idx[i]]
        for r in range(n_levels):
            if cnt[r] > 0:
                g_rank[n_groups] = r
                g_cnt[n_groups] = cnt[r]
                g_pos[n_groups] = cpos[r]
                n_groups += 1
                cnt[r] = 0
                cpos[r] = 0
        return n_groups
    for i in range(m):
        k = R[idx[start + i], f]
        lab = y[idx[start + i]]
        j = i
        while j > 0 and keys[j - 1] > k:
            keys[j] = keys[j - 1]
            labs[j] = labs[j - 1]
            j -= 1
        keys[j] = k
        labs[j] = lab
    for i in range(m):
        if n_groups == 0 or g_rank[n_groups - 1] != keys[i]:
            g_rank[n_groups] = keys[i]
            g_cnt[n_groups] = 0
            g_pos[n_groups] = 0
            n_groups += 1
        g_cnt[n_groups - 1] += 1
        g_pos[n_groups - 1] += labs[i]
    return n_groups


@njit(cache=True)
def _build(X, R, U, n_levels, y, max_features, min_samples_leaf, max_depth, seed):
    n, p = X.shape
    cap = 2 * n + 1
    feature = np.full(cap, LEAF, dtype=np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    value = np.zeros(cap)
    n_node = np.zeros(cap, dtype=np.int64)
    importance = np.zeros(p)

    state = np.zeros(1, dtype=np.uint64)
    state[0] = seed
    idx = np.arange(n)
    buf = np.empty(n, dtype=np.int64)
    kmax = U.shape[1]
    cnt = np.zeros(kmax, dtype=np.int64)
    cpos = np.zeros(kmax, dtype=np.int64)
    g_rank = np.empty(n, dtype=np.int64)
    g_cnt = np.empty(n, dtype=np.int64)
    g_pos = np.empty(n, dtype=np.int64)
    keys = np.empty(n, dtype=np.int64)
    labs = np.empty(n, dtype=np.int64)

    # stack of (node id, start, end, depth)
    stack = np.empty((cap, 4), dtype=np.int64)
    stack[0, 0] = 0
    stack[0, 1] = 0
    stack[0, 2] = n
    stack[0, 3] = 0
    top = 1
    n_nodes = 1

    while top > 0:
        top -= 1
        node = stack[top, 0]
        start = stack[top, 1]
        end = stack[top, 2]
        depth = stack[top, 3]
        m = end - start
        pos = 0
        for i in range(start, end):
            pos += y[idx[i]]
        n_node[node] = m
        value[node] = pos / m
        if pos == 0 or pos == m or m < 2 * min_samples_leaf or depth == max_depth:
            continue

        parent_cost = m - (pos * pos + (m - pos) * (m - pos)) / m
        best_cost = np.inf
        best_f = -1
        best_thr = 0.0
        perm = _shuffled_features(p, state)
        n_tried = 0
        for fi in range(p):
            if n_tried >= max_features and best_f >= 0:
                break
            f = perm[fi]
            ng = _node_groups(R, y, idx, start, end, f, n_levels[f], cnt, cpos,
                              g_rank, g_cnt, g_pos, keys, labs)
            if ng < 2:
                continue
            n_tried += 1
            nl = 0
            l_pos = 0
            f_cost = np.inf
            f_thr = 0.0
            for g in range(ng - 1):
                nl += g_cnt[g]
                l_pos += g_pos[g]
                nr = m - nl
                if nl < min_samples_leaf:
                    continue
                if nr < min_samples_leaf:
                    break
                r_pos = pos - l_pos
                cost = (nl - (l_pos * l_pos + (nl - l_pos) * (nl - l_pos)) / nl) + (
                    nr - (r_pos * r_pos + (nr - r_pos) * (nr - r_pos)) / nr
                )
                if cost < f_cost - _TIE_TOL:
                    f_cost = cost
                    v0 = U[f, g_rank[g]]
                    v1 = U[f, g_rank[g + 1]]
                    thr = 0.5 * (v0 + v1)
                    if thr >= v1:
                        thr = v0
                    f_thr = thr
            if f_cost == np.inf:
                continue
            if f_cost < best_cost - _TIE_TOL or (
                abs(f_cost - best_cost) <= _TIE_TOL
                and (f < best_f or (f == best_f and f_thr < best_thr))
            ):
                best_cost = f_cost
                best_f = f
                best_thr = f_thr
        if best_f < 0:
            continue

        # stable partition of idx[start:end]
        nl = 0
        for i in range(start, end):
            if X[idx[i], best_f] <= best_thr:
                buf[nl] = idx[i]
                nl += 1
        k = nl
        for i in range(start, end):
            if X[idx[i], best_f] > best_thr:
                buf[k] = idx[i]
                k += 1
        for i in range(m):
            idx[start + i] = buf[i]

        feature[node] = best_f
        threshold[node] = best_thr
        importance[best_f] += parent_cost - best_cost
        lc = n_nodes
        rc = n_nodes + 1
        n_nodes += 2
        left[node] = lc
        right[node] = rc
        # push right first so the left subtree is numbered first
        stack[top, 0] = rc
        stack[top, 1] = start + nl
        stack[top, 2] = end
        stack[top, 3] = depth + 1
        top += 1
        stack[top, 0] = lc
        stack[top, 1] = start
        stack[top, 2] = start + nl
        stack[top, 3] = depth + 1
        top += 1

    return (
        feature[:n_nodes].copy(),
        threshold[:n_nodes].copy(),
        left[:n_nodes].copy(),
        right[:n_nodes].copy(),
        value[:n_nodes].copy(),
        n_node[:n_nodes].copy(),
        importance,
    )


class ValueIndex:
    """Per-feature sorted distinct values and each row's rank among them.

    Computed once per training matrix and shared by every tree grown on
    row subsets (bootstrap samples) of it.
    """

    def __init__(self, X):
        X = np.asarray(X, dtype=np.float64)
        n, p = X.shape
        uniq = [np.unique(X[:, f]) for f in range(p)]
        self.n_levels = np.array([len(u) for u in uniq], dtype=np.int64)
        self.U = np.zeros((p, max(1, int(self.n_levels.max(initial=1)))))
        self.R = np.empty((n, p), dtype=np.int64)
        for f, u in enumerate(uniq):
            self.U[f, : len(u)] = u
            self.R[:, f] = np.searchsorted(u, X[:, f])


@njit(cache=True)
def _apply(feature, threshold, left, right, value, X):
    out = np.empty(X.shape[0])
    for r in range(X.shape[0]):
        node = 0
        while feature[node] != LEAF:
            if X[r, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[r] = value[node]
    return out


class Tree:
    """A fitted tree. ``value`` holds the troll fraction of each node's samples."""

    __slots__ = ("feature", "threshold", "left", "right", "value", "n_node", "importance")

    def __init__(self, feature, threshold, left, right, value, n_node, importance):
        self.feature = np.asarray(feature, dtype=np.int64)
        self.threshold = np.asarray(threshold, dtype=float)
        self.left = np.asarray(left, dtype=np.int64)
        self.right = np.asarray(right, dtype=np.int64)
        self.value = np.asarray(value, dtype=float)
        self.n_node = np.asarray(n_node, dtype=np.int64)
        self.importance = np.asarray(importance, dtype=float)

    @classmethod
    def fit(cls, X, y, max_features=None, min_samples_leaf=1, max_depth=None, seed=0):
        X = np.ascontiguousarray(X, dtype=np.float64)
        y = np.ascontiguousarray(y, dtype=np.int64)
        return cls._grow(X, ValueIndex(X), np.arange(len(y)), y, max_features, min_samples_leaf,
                         max_depth, seed)

    @classmethod
    def _grow(cls, X, vindex, rows, y, max_features, min_samples_leaf, max_depth, seed):
        p = X.shape[1]
        mf = p if max_features is None else max(1, min(int(max_features), p))
        md = -1 if max_depth is None else int(max_depth)
        Xs = np.ascontiguousarray(X[rows])
        Rs = np.ascontiguousarray(vindex.R[rows])
        ys = np.ascontiguousarray(y[rows], dtype=np.int64)
        return cls(*_build(Xs, Rs, vindex.U, vindex.n_levels, ys, mf, int(min_samples_leaf), md,
                           np.uint64(seed)))

    def predict_score(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        return _apply(self.feature, self.threshold, self.left, self.right, self.value, X)

    @property
    def node_count(self) -> int:
        return len(self.feature)

    def to_dict(self) -> dict:
        return {k: getattr(self, k).tolist() for k in self.__slots__}

    @classmethod
    def from_dict(cls, d: dict) -> "Tree":
        return cls(*(d[k] for k in cls.__slots__))

    def __eq__(self, other):
        if not isinstance(other, Tree):
            return NotImplemented
        return all(np.array_equal(getattr(self, k), getattr(other, k)) for k in self.__slots__)


def sqrt_features(n_features: int) -> int:
    return max(1, int(math.sqrt(n_features)))


def tree_stream(seed: int, tree_index: int, n_samples: int) -> tuple[np.ndarray, int]:
    """Bootstrap row indices and feature-sampling seed of one forest member."""
    rng = np.random.default_rng([seed, tree_index])
    boot = rng.integers(0, n_samples, size=n_samples)
    return boot, int(rng.integers(0, 2**63))


def fit_forest(X, y, n_trees=100, max_features=None, min_samples_leaf=1, max_depth=None, seed=0,
               bootstrap=True) -> list[Tree]:
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int64)
    n, p = X.shape
    if max_features is None:
        max_features = sqrt_features(p)
    vindex = ValueIndex(X)
    trees = []
    for i in range(n_trees):
        boot, tseed = tree_stream(seed, i, n)
        if not bootstrap:
            boot = np.arange(n)
        trees.append(Tree._grow(X, vindex, boot, y, max_features, min_samples_leaf, max_depth, tseed))
    return trees


def forest_score(trees, X) -> np.ndarray:
    """Fraction of trees voting troll (leaf majority, ties counted as troll)."""
    votes = np.zeros(len(X))
    for t in trees:
        votes += t.predict_score(X) >= 0.5
    return votes / len(trees)


def forest_importance(trees, n_features: int) -> np.ndarray:
    """Impurity decrease weighted by node size, normalized per tree, averaged, renormalized."""
    total = np.zeros(n_features)
    for t in trees:
        s = t.importance.sum()
        if s > 0:
            total += t.importance / s
    s = total.sum()
    return total / s if s > 0 else total
