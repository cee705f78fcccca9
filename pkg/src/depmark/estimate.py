"""Nearest-neighbor estimators of xi, R^2 and Lambda.

Each observation i is paired with y at its nearest neighbor N(i) in x; the
pairs (y_i, y_N(i)) play the role of a sample from the Markov product
(Y, Y'). All statistics run in O(n log n).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.spatial import cKDTree

from . import config
from ._kernels import count_inversions
from .errors import CountError, DegenerateError
from .exact import MeasureReport
from .model import Dataset

__all__ = [
    "RankVectors",
    "NeighborMap",
    "compute_ranks",
    "nearest_neighbors",
    "concordance_difference",
    "xi_hat",
    "r2_hat",
    "lambda_hat",
    "collision_hat",
    "estimate_all",
]


@dataclass
class RankVectors:
    R: np.ndarray  # #{j : y_j <= y_i}
    L: np.ndarray  # #{j : y_j >= y_i}


@dataclass
class NeighborMap:
    N: np.ndarray  # 0-based index of the nearest neighbor, never i itself


def compute_ranks(y) -> RankVectors:
    y = np.asarray(y, dtype=float).ravel()
    if y.size < 2:
        raise CountError("need at least two observations")
    ys = np.sort(y)
    R = np.searchsorted(ys, y, side="right").astype(np.int64)
    L = (y.size - np.searchsorted(ys, y, side="left")).astype(np.int64)
    return RankVectors(R, L)


def _nn_line(x: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Sorted-adjacency nearest neighbors on the line. Coincident points are
    neighbors of each other; otherwise the nearer adjacent value wins, and
    every distance tie is resolved uniformly by ``u``."""
    n = x.size
    order = np.argsort(x, kind="stable")
    xs = x[order]
    new_group = np.empty(n, dtype=bool)
    new_group[0] = True
    new_group[1:] = xs[1:] != xs[:-1]
    gid = np.cumsum(new_group) - 1
    starts = np.flatnonzero(new_group)
    sizes = np.diff(np.append(starts, n))
    vals = xs[starts]
    ng = starts.size
    pos = np.arange(n)
    g = gid
    size = sizes[g]
    uu = u[order]
    out_sorted = np.empty(n, dtype=np.int64)

    dup = size >= 2
    if np.any(dup):
        k = np.minimum((uu[dup] * (size[dup] - 1)).astype(np.int64), size[dup] - 2)
        self_off = pos[dup] - starts[g[dup]]
        k = np.where(k >= self_off, k + 1, k)
        out_sorted[dup] = starts[g[dup]] + k

    single = ~dup
    if np.any(single):
        gs = g[single]
        has_left = gs > 0
        has_right = gs < ng - 1
        dl = np.where(has_left, vals[gs] - vals[np.maximum(gs - 1, 0)], np.inf)
        dr = np.where(has_right, vals[np.minimum(gs + 1, ng - 1)] - vals[gs], np.inf)
        use_left = dl <= dr
        use_right = dr <= dl
        left_size = np.where(use_left, sizes[np.maximum(gs - 1, 0)], 0)
        right_size = np.where(use_right, sizes[np.minimum(gs + 1, ng - 1)], 0)
        total = left_size + right_size
        k = np.minimum((uu[single] * total).astype(np.int64), total - 1)
        from_left = k < left_size
        left_start = starts[np.maximum(gs - 1, 0)]
        right_start = starts[np.minimum(gs + 1, ng - 1)]
        out_sorted[single] = np.where(from_left, left_start + k, right_start + (k - left_size))

    N = np.empty(n, dtype=np.int64)
    N[order] = order[out_sorted]
    return N


def _nn_tree(x: np.ndarray, u: np.ndarray) -> np.ndarray:
    n = x.shape[0]
    tree = cKDTree(x)
    k = min(n, 8)
    dist, idx = tree.query(x, k=k, workers=config.thread_cap())
    N = np.empty(n, dtype=np.int64)
    rows = np.arange(n)
    for i in rows:
        keep = idx[i] != i
        d, j = dist[i][keep], idx[i][keep]
        dmin = d.min()
        cand = j[d == dmin]
        if cand.size == keep.sum() and k < n:
            # every retrieved neighbor is tied; collect the full tie set
            ball = np.array(tree.query_ball_point(x[i], r=dmin), dtype=np.int64)
            ball = ball[ball != i]
            bd = np.sqrt(((x[ball] - x[i]) ** 2).sum(axis=1))
            cand = np.sort(ball[bd <= dmin])
        else:
            cand = np.sort(cand)
        N[i] = cand[min(int(u[i] * cand.size), cand.size - 1)]
    return N


def nearest_neighbors(x, seed: int) -> NeighborMap:
    """Exact Euclidean nearest neighbor of every row among the other rows;
    distance ties are broken uniformly from the seeded stream."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if n < 2:
        raise CountError("need at least two observations")
    u = np.random.default_rng(seed).random(n)
    if x.shape[1] == 1:
        return NeighborMap(_nn_line(x[:, 0], u))
    return NeighborMap(_nn_tree(x, u))


def _tie_pairs(sorted_values: np.ndarray) -> int:
    if sorted_values.size == 0:
        return 0
    edge = np.flatnonzero(np.diff(sorted_values) != 0)
    sizes = np.diff(np.concatenate([[-1], edge, [sorted_values.size - 1]])).astype(np.int64)
    return int(np.sum(sizes * (sizes - 1) // 2))


def concordance_difference(a, b) -> int:
    """C - D over all index pairs, pairs tied in either coordinate counting
    toward neither (Knight's merge-sort construction)."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    n = a.size
    order = np.lexsort((b, a))
    a_s, b_s = a[order], b[order]
    n0 = n * (n - 1) // 2
    n1 = _tie_pairs(a_s)
    n2 = _tie_pairs(np.sort(b))
    # joint ties: consecutive equal (a, b) after the lexicographic sort
    same = np.concatenate([[False], (a_s[1:] == a_s[:-1]) & (b_s[1:] == b_s[:-1])])
    edge = np.flatnonzero(~same)
    sizes = np.diff(np.append(edge, n)).astype(np.int64)
    n3 = int(np.sum(sizes * (sizes - 1) // 2))
    swaps = int(count_inversions(b_s))
    return n0 - n1 - n2 + n3 - 2 * swaps


def collision_hat(x) -> float:
    """Unbiased estimate of P(X = X*)."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    n = x.shape[0]
    if n < 2:
        raise CountError("need at least two observations")
    if x.shape[1] == 1:
        xs = np.sort(x[:, 0])
        edge = np.flatnonzero(np.diff(xs) != 0)
        counts = np.diff(np.concatenate([[-1], edge, [n - 1]])).astype(np.int64)
    else:
        _, counts = np.unique(x, axis=0, return_counts=True)
        counts = counts.astype(np.int64)
    return float(np.sum(counts * (counts - 1))) / (n * (n - 1))


def _neighbors(data: Dataset, seed: int, neighbors: NeighborMap | None) -> np.ndarray:
    if data.n < 2:
        raise CountError("need at least two observations")
    return (neighbors or nearest_neighbors(data.x, seed)).N


def _xi_value(y: np.ndarray, N: np.ndarray) -> float:
    n = y.size
    rk = compute_ranks(y)
    R, L = rk.R, rk.L
    den = np.sum(L * (n - L))
    if den == 0:
        raise DegenerateError("all responses are tied")
    if n <= 2_000_000:
        num = n * np.sum(np.minimum(R, R[N])) - np.sum(L * L)
        return float(num) / float(den)
    num = n * np.sum(np.minimum(R, R[N]).astype(float)) - np.sum((L * L).astype(float))
    return num / float(den)


def xi_hat(data: Dataset, seed: int, neighbors: NeighborMap | None = None) -> MeasureReport:
    """sum(n min(R_i, R_N(i)) - L_i^2) / sum(L_i (n - L_i)), unclamped."""
    N = _neighbors(data, seed, neighbors)
    return MeasureReport(xi=_xi_value(data.y, N), path="estimator")


def _r2_value(y: np.ndarray, N: np.ndarray) -> float:
    a = y - y.mean()
    yn = y[N]
    b = yn - yn.mean()
    saa, sbb = float(a @ a), float(b @ b)
    if saa <= 0 or sbb <= 0:
        raise DegenerateError("zero variance in the paired sample")
    return float(a @ b) / float(np.sqrt(saa * sbb))


def r2_hat(data: Dataset, seed: int, neighbors: NeighborMap | None = None) -> MeasureReport:
    """Pearson correlation of the pairs (y_i, y_N(i))."""
    N = _neighbors(data, seed, neighbors)
    return MeasureReport(r2=_r2_value(data.y, N), path="estimator")


def _lambda_value(data: Dataset, N: np.ndarray) -> float:
    n = data.n
    denom = 1.0 - collision_hat(data.x)
    if denom <= 0:
        raise DegenerateError("all x rows are identical")
    cd = concordance_difference(data.y, data.y[N])
    return cd / (n * (n - 1) / 2) / denom


def lambda_hat(data: Dataset, seed: int, neighbors: NeighborMap | None = None) -> MeasureReport:
    """(C - D) / (n(n-1)/2) of the pairs (y_i, y_N(i)), divided by
    1 - collision_hat(x)."""
    N = _neighbors(data, seed, neighbors)
    return MeasureReport(lam=_lambda_value(data, N), path="estimator")


def estimate_all(data: Dataset, seed: int, measures: Iterable[str] = ("xi", "r2", "lambda"),
                 clamp: bool = False) -> dict:
    """All requested estimators from a single neighbor search."""
    measures = list(measures)
    N = _neighbors(data, seed, None)
    out: dict = {"n": data.n}
    funcs = {
        "xi": lambda: _xi_value(data.y, N),
        "r2": lambda: _r2_value(data.y, N),
        "lambda": lambda: _lambda_value(data, N),
    }
    for name in ("xi", "r2", "lambda"):
        if name in measures:
            value = funcs[name]()
            value = float(value)
            out[name] = min(max(value, 0.0), 1.0) if clamp else value
        else:
            out[name] = None
    out["collision_hat"] = collision_hat(data.x)
    out["seed"] = seed
    return out
