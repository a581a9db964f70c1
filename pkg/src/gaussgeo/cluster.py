"""Metric clustering and search over multivariate normals.

Every routine is generic in a :class:`MetricSpace`, a named distance with an
optional geodesic. Pairwise distances inside one run are memoized by point
index through :class:`DistanceCache`.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInput
from .fisherrao import (calvo_oller_lower_bound, fr_distance, fr_distance_approx, fr_geodesic_bvp,
                        fr_length_approx)
from .gaussian import GMM, MVN, embed, embed_inverse, jeffreys, mixture_geodesic
from .hilbert import hilbert_distance_mvn, hilbert_geodesic_mvn, project_to_embedded
from .matcore import _geodesic_unchecked, _trace_distance_unchecked, check_spd

_GEODESICS = {
    "fisher_rao": fr_geodesic_bvp,
    "hilbert": hilbert_geodesic_mvn,
    "mixture": mixture_geodesic,
}


def thread_count() -> int:
    """Worker threads for batched distance evaluation, from ``GAUSSGEO_THREADS``."""
    try:
        return max(1, int(os.environ.get("GAUSSGEO_THREADS", "1")))
    except ValueError:
        return 1


def _order_key(N: MVN):
    return tuple(N.mean.tolist()) + tuple(N.cov.ravel().tolist())


class MetricSpace:
    """Named dissimilarity over normals plus an optional geodesic.

    Use the constructors :meth:`fisher_rao`, :meth:`fisher_rao_approx`,
    :meth:`fisher_rao_T`, :meth:`hilbert`, :meth:`jeffreys_sqrt` and
    :meth:`calvo_oller`. Arguments are put in a canonical order before the
    underlying function is called, so ``space(a, b) == space(b, a)``
    exactly.

    Attributes
    ----------
    name : str
        Distance name, e.g. ``'hilbert'``.
    params : dict
        Parameters of the distance.
    geodesic : callable or None
        ``geodesic(N0, N1, t) -> MVN``; required by :func:`miniball`.
    geodesic_name : str or None
        One of ``'fisher_rao'``, ``'hilbert'``, ``'mixture'``.
    metric_pruning : bool
        Whether nearest-neighbour search may prune with the triangle
        inequality. Only the Hilbert distance is treated as a metric.
    """

    def __init__(self, name, func, params=None, geodesic=None, metric_pruning=False):
        self.name = name
        self._func = func
        self.params = dict(params or {})
        if geodesic is not None and geodesic not in _GEODESICS:
            raise InvalidInput(f"geodesic must be one of {sorted(_GEODESICS)} or None")
        self.geodesic_name = geodesic
        self.geodesic = _GEODESICS.get(geodesic)
        self.metric_pruning = metric_pruning

    def __call__(self, N0: MVN, N1: MVN) -> float:
        if N0 is N1:
            return 0.0
        if _order_key(N1) < _order_key(N0):
            N0, N1 = N1, N0
        return float(self._func(N0, N1))

    def __repr__(self):
        p = ", ".join(f"{k}={v!r}" for k, v in self.params.items())
        return f"MetricSpace({self.name}({p}), geodesic={self.geodesic_name})"

    def with_geodesic(self, geodesic):
        """Copy of this space with another geodesic (or ``None``)."""
        return MetricSpace(self.name, self._func, self.params, geodesic, self.metric_pruning)

    @classmethod
    def fisher_rao(cls, geodesic="fisher_rao"):
        """Fisher-Rao distance as the length of the shot geodesic."""
        return cls("fisher_rao", fr_distance, {}, geodesic)

    @classmethod
    def fisher_rao_approx(cls, epsilon=1e-3, geodesic="fisher_rao"):
        """Recursive ``1 + epsilon`` approximation, reporting the upper sum."""
        return cls("fisher_rao_approx", lambda a, b: fr_distance_approx(a, b, epsilon).value,
                   {"epsilon": epsilon}, geodesic)

    @classmethod
    def fisher_rao_T(cls, T=100, geodesic="fisher_rao", method="exact"):
        """Discretized length with ``T`` Jeffreys steps along the geodesic."""
        return cls("fisher_rao_T", lambda a, b: fr_length_approx(a, b, T, method=method),
                   {"T": T, "method": method}, geodesic)

    @classmethod
    def hilbert(cls, method="exact", geodesic="hilbert"):
        """Pullback Hilbert projective distance, a true metric."""
        return cls("hilbert", lambda a, b: hilbert_distance_mvn(a, b, method),
                   {"method": method}, geodesic, metric_pruning=True)

    @classmethod
    def jeffreys_sqrt(cls, geodesic=None):
        """Square root of the Jeffreys divergence."""
        return cls("jeffreys_sqrt", lambda a, b: np.sqrt(jeffreys(a, b)), {}, geodesic)

    @classmethod
    def calvo_oller(cls, geodesic=None):
        """Cone-embedding lower bound of the Fisher-Rao distance."""
        return cls("calvo_oller", calvo_oller_lower_bound, {}, geodesic)


class DistanceCache:
    """Memoized pairwise distances over a fixed list of points."""

    def __init__(self, points, metric: MetricSpace, threads: int | None = None):
        self.points = list(points)
        self.metric = metric
        self.threads = thread_count() if threads is None else threads
        self._memo = {}

    def __call__(self, i: int, j: int) -> float:
        if i == j:
            return 0.0
        key = (i, j) if i < j else (j, i)
        val = self._memo.get(key)
        if val is None:
            val = self._memo[key] = self.metric(self.points[key[0]], self.points[key[1]])
        return val

    def row(self, i: int, js=None) -> np.ndarray:
        """Distances from point ``i`` to points ``js`` (default: all)."""
        js = range(len(self.points)) if js is None else js
        js = list(js)
        missing = [j for j in js if j != i and (min(i, j), max(i, j)) not in self._memo]
        if self.threads > 1 and len(missing) > 1:
            with ThreadPoolExecutor(self.threads) as ex:
                vals = list(ex.map(lambda j: self.metric(*self._pair(i, j)), missing))
            for j, v in zip(missing, vals):
                self._memo[(min(i, j), max(i, j))] = v
        return np.array([self(i, j) for j in js])

    def _pair(self, i, j):
        a, b = (i, j) if i < j else (j, i)
        return self.points[a], self.points[b]


def _check_points(points):
    points = list(points)
    if not points:
        raise InvalidInput("need at least one point")
    if len({p.dim for p in points}) != 1:
        raise InvalidInput("points must share a dimension")
    return points


# ---------------------------------------------------------------------------
# vantage-point tree

@dataclass
class _VPNode:
    index: int
    radius: float
    inside: "_VPNode | None" = None
    outside: "_VPNode | None" = None


class VPTree:
    """Vantage-point tree over a list of normals.

    Each node stores a vantage point index and the median distance from it
    to the points of its subtree. Points at distance ``<= radius`` go
    inside, the others outside.
    """

    def __init__(self, points, metric: MetricSpace, seed: int = 0):
        self.points = _check_points(points)
        self.metric = metric
        self._rng = np.random.default_rng(seed)
        self.root = self._build(list(range(len(self.points))))
        del self._rng

    def _build(self, idx):
        if not idx:
            return None
        vp = idx.pop(int(self._rng.integers(len(idx))))
        if not idx:
            return _VPNode(vp, 0.0)
        d = np.array([self.metric(self.points[vp], self.points[j]) for j in idx])
        # lower median keeps the radius a realized distance
        r = float(np.sort(d)[(len(d) - 1) // 2])
        inside = [j for j, dj in zip(idx, d) if dj <= r]
        outside = [j for j, dj in zip(idx, d) if dj > r]
        return _VPNode(vp, r, self._build(inside), self._build(outside))

    def nodes(self):
        """Depth-first list of nodes."""
        out, stack = [], [self.root]
        while stack:
            n = stack.pop()
            if n is not None:
                out.append(n)
                stack.extend([n.outside, n.inside])
        return out

    def subtree_indices(self, node):
        out, stack = [], [node]
        while stack:
            n = stack.pop()
            if n is not None:
                out.append(n.index)
                stack.extend([n.outside, n.inside])
        return out

    def nearest(self, query: MVN):
        """Index and distance of a nearest stored point."""
        best = [np.inf, -1]
        prune = self.metric.metric_pruning

        def visit(node):
            if node is None:
                return
            d = self.metric(query, self.points[node.index])
            if d < best[0] or (d == best[0] and node.index < best[1]):
                best[0], best[1] = d, node.index
            first, second = (node.inside, node.outside) if d <= node.radius else (node.outside, node.inside)
            visit(first)
            if prune:
                slack = 1e-12 * max(1.0, d, node.radius)
                # lower bound on the distance to any point of the far branch
                if abs(d - node.radius) > best[0] + slack:
                    return
            visit(second)

        visit(self.root)
        return best[1], float(best[0])


def vptree_build(points, metric: MetricSpace, seed: int = 0) -> VPTree:
    """Build a :class:`VPTree` with seeded random vantage points."""
    return VPTree(points, metric, seed)


def vptree_nn(tree: VPTree, query: MVN):
    """Nearest stored point to ``query``: ``(index, distance)``.

    With the Hilbert metric branches are pruned by the triangle
    inequality. Every other distance explores both branches, which keeps
    the answer identical to a linear scan.
    """
    return tree.nearest(query)


def linear_scan_nn(points, metric: MetricSpace, query: MVN):
    """Reference nearest neighbour by exhaustive scan (lowest index on ties)."""
    d = np.array([metric(query, p) for p in points])
    i = int(np.argmin(d))
    return i, float(d[i])


# ---------------------------------------------------------------------------
# clustering

@dataclass
class Clustering:
    """Result of a clustering run.

    Attributes
    ----------
    centers : list of MVN
        Cluster representatives, taken from the input points.
    center_indices : list of int
        Input indices of the centers.
    assignment : ndarray of int
        Position in ``centers`` of the center of each point.
    radius : float
        Largest point-to-center distance.
    cost : float or None
        Weighted sum of point-to-center distances (k-medioid only).
    history : list of float
        Cost after each k-medioid iteration.
    """

    centers: list
    center_indices: list
    assignment: np.ndarray
    radius: float
    cost: float | None = None
    history: list = field(default_factory=list)


def _assign(D):
    # D has one row per center; argmin picks the earliest center on ties
    a = np.argmin(D, axis=0)
    return a, D[a, np.arange(D.shape[1])]


def _gonzalez(cache, n, k, seed):
    rng = np.random.default_rng(seed)
    centers = [int(rng.integers(n))]
    mind = cache.row(centers[0]).copy()
    while len(centers) < k:
        if mind.max() > 0:
            nxt = int(np.argmax(mind))
        else:
            nxt = min(set(range(n)) - set(centers))
        centers.append(nxt)
        mind = np.minimum(mind, cache.row(nxt))
    return centers


def kcenter_gonzalez(points, k: int, metric: MetricSpace, seed: int = 0, cache=None) -> Clustering:
    """Farthest-first traversal for k-center clustering.

    The first center is a seeded random point; each further center is the
    point farthest from the current centers (lowest index on ties). Under
    a true metric the radius is at most twice the optimal k-center radius.
    """
    points = _check_points(points)
    n = len(points)
    if not 1 <= k <= n:
        raise InvalidInput(f"k must be in [1, {n}], got {k}")
    cache = cache or DistanceCache(points, metric)
    centers = _gonzalez(cache, n, k, seed)
    D = np.array([cache.row(c) for c in centers])
    assignment, dist = _assign(D)
    return Clustering([points[c] for c in centers], centers, assignment, float(dist.max()))


def _alternate(Dfull, w, med, assignment, cost, history, max_iter):
    k = len(med)
    for _ in range(max_iter):
        new = list(med)
        for c in range(k):
            members = np.flatnonzero(assignment == c)
            if members.size == 0:
                continue
            sums = Dfull[np.ix_(members, members)] @ w[members]
            best = sums.min()
            cur = sums[members == med[c]]
            if cur.size and cur[0] <= best:
                continue
            new[c] = int(members[np.flatnonzero(sums == best)[0]])
        if new == med:
            break
        a2, c2 = _assign(Dfull[new])
        c2 = float(w @ c2)
        if not c2 < cost:
            break
        med, assignment, cost = new, a2, c2
        history.append(cost)
    return med, assignment, cost


def _best_swap(Dfull, w, med):
    # cost of replacing medioid c by point h, for every pair at once
    Dm = Dfull[med]
    best = (np.inf, -1, -1)
    for c in range(len(med)):
        others = np.delete(Dm, c, axis=0)
        rest = others.min(axis=0) if others.size else np.full(Dfull.shape[1], np.inf)
        costs = np.minimum(rest[None, :], Dfull) @ w
        costs[med] = np.inf
        h = int(np.argmin(costs))
        if costs[h] < best[0]:
            best = (float(costs[h]), c, h)
    return best


def kmedioid(points, k: int, metric: MetricSpace, weights=None, seed: int = 0, max_iter: int = 100,
             swap: bool = True, cache=None) -> Clustering:
    """Weighted k-medioid clustering.

    Starts from Gonzalez centers, then alternates two steps: assign every
    point to its nearest medioid, and move each medioid to the cluster
    member minimizing the weighted in-cluster distance sum. When the
    alternation stalls, a swap phase exchanges one medioid for one
    non-medioid if that lowers the cost, and the alternation resumes.
    The cost never increases.

    Parameters
    ----------
    points : list of MVN
    k : int
        Number of clusters.
    metric : MetricSpace
    weights : array_like, optional
        Positive point weights.
    seed : int
        Seed of the first Gonzalez center.
    max_iter : int
        Budget of alternation steps per round.
    swap : bool
        Run the swap phase. Without it the result is the plain alternation
        fixed point, which is often a worse local optimum.

    Returns
    -------
    Clustering
        ``history`` holds the cost after every accepted update.
    """
    points = _check_points(points)
    n = len(points)
    if not 1 <= k <= n:
        raise InvalidInput(f"k must be in [1, {n}], got {k}")
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (n,) or np.any(w <= 0):
        raise InvalidInput("weights must be positive, one per point")
    cache = cache or DistanceCache(points, metric)
    Dfull = np.array([cache.row(i) for i in range(n)])
    med = _gonzalez(cache, n, k, seed)
    assignment, d = _assign(Dfull[med])
    cost = float(w @ d)
    history = [cost]
    while True:
        med, assignment, cost = _alternate(Dfull, w, med, assignment, cost, history, max_iter)
        if not swap or k == n:
            break
        c_new, c, h = _best_swap(Dfull, w, med)
        # relative margin avoids cycling on rounding-level gains
        if not c_new < cost - 1e-12 * abs(cost):
            break
        med = list(med)
        med[c] = h
        assignment, d = _assign(Dfull[med])
        cost = float(w @ d)
        history.append(cost)
    radius = float(Dfull[med][assignment, np.arange(n)].max())
    return Clustering([points[m] for m in med], list(med), assignment, radius, cost, history)


# ---------------------------------------------------------------------------
# centers

def miniball(points, metric: MetricSpace, T: int, full_output: bool = False):
    """Approximate minimax center by walking toward the farthest point.

    ``c_1 = p_1`` and ``c_{t+1} = geodesic(c_t, p_f, 1 / (t + 1))`` where
    ``p_f`` is the point farthest from ``c_t`` (lowest index on ties).

    Parameters
    ----------
    points : list of MVN
    metric : MetricSpace
        Must carry a geodesic.
    T : int
        Number of updates.
    full_output : bool
        Also return the radius recorded every 100 updates.

    Returns
    -------
    center : MVN
    radius : float
        Largest distance from ``center`` to the points.
    trace : list of float
        Only with ``full_output``.
    """
    points = _check_points(points)
    if metric.geodesic is None:
        raise InvalidInput("miniball needs a metric space with a geodesic")
    if T < 1:
        raise InvalidInput("T must be positive")
    c = points[0]
    trace = []
    for t in range(1, T + 1):
        d = np.array([metric(c, p) for p in points])
        f = int(np.argmax(d))
        if t % 100 == 0:
            trace.append(float(d[f]))
        if d[f] == 0:
            continue
        c = metric.geodesic(c, points[f], 1.0 / (t + 1))
    radius = max(metric(c, p) for p in points)
    return (c, float(radius), trace) if full_output else (c, float(radius))


def _spd_walk(mats, T, pick):
    c = mats[0]
    for t in range(1, T + 1):
        f = pick(c, t)
        if f is None:
            continue
        c = _geodesic_unchecked(c, mats[f], 1.0 / (t + 1))
    return c


def miniball_embedded(points, T: int):
    """Miniball of the lifted points in the SPD cone, projected back.

    Runs the farthest-point walk on ``embed(N_i, 1)`` with the cone
    geodesic and the half-trace distance, projects the final center onto
    the embedded normals and inverts the embedding.

    Returns
    -------
    center : MVN
    radius : float
        Largest half-trace distance from ``embed(center, 1)`` to the lifted
        points, which lower-bounds the Fisher-Rao radius of ``center``.
    """
    points = _check_points(points)
    if T < 1:
        raise InvalidInput("T must be positive")
    mats = [embed(p) for p in points]

    def pick(c, t):
        d = np.array([_trace_distance_unchecked(c, m) for m in mats])
        f = int(np.argmax(d))
        return None if d[f] == 0 else f

    c = _spd_walk(mats, T, pick)
    proj, _ = project_to_embedded(c)
    center = embed_inverse(proj)[0]
    e = embed(center)
    radius = max(_trace_distance_unchecked(e, m, 1 / np.sqrt(2)) for m in mats)
    return center, float(radius)


def stochastic_centroid(points, T: int, seed: int = 0):
    """Stochastic geometric-mean walk ``C_i = C_{i-1} #_{1/i} S_{f_i}``.

    ``f_i`` are uniform random indices from a seeded generator. SPD inputs
    walk in their own cone. Normals are lifted with ``embed``, walked in
    the cone, projected back onto the embedded normals and inverted.

    Parameters
    ----------
    points : list of ndarray or list of MVN
    T : int
        Number of samples drawn.
    seed : int

    Returns
    -------
    ndarray or MVN
        Same kind as the inputs.
    """
    points = list(points)
    if not points:
        raise InvalidInput("need at least one point")
    if T < 1:
        raise InvalidInput("T must be positive")
    is_mvn = isinstance(points[0], MVN)
    mats = [embed(p) for p in _check_points(points)] if is_mvn else [check_spd(p) for p in points]
    if len({m.shape for m in mats}) != 1:
        raise InvalidInput("points must share a dimension")
    rng = np.random.default_rng(seed)
    idx = rng.integers(len(mats), size=T)
    c = mats[idx[0]]
    for i in range(2, T + 1):
        c = _geodesic_unchecked(c, mats[idx[i - 1]], 1.0 / i)
    if not is_mvn:
        return c
    proj, _ = project_to_embedded(c)
    return embed_inverse(proj)[0]


# ---------------------------------------------------------------------------
# mixtures

def gmm_simplify(g: GMM, k: int, metric: MetricSpace, seed: int = 0) -> GMM:
    """Reduce a mixture to ``k`` components by weighted k-medioid.

    Each output component is a medioid; its weight is the total weight of
    the components assigned to it.
    """
    if not 1 <= k <= len(g):
        raise InvalidInput(f"k must be in [1, {len(g)}], got {k}")
    cl = kmedioid(list(g.components), k, metric, weights=g.weights, seed=seed)
    w = np.bincount(cl.assignment, weights=g.weights, minlength=k)
    return GMM(w / w.sum(), cl.centers)


def gmm_quantize(gmms, k: int, metric: MetricSpace, seed: int = 0):
    """Quantize mixtures on a shared codebook of ``k`` normals.

    The codebook is the Gonzalez k-center solution over all components
    pooled. Each mixture becomes a weight vector over the codebook, adding
    each component's weight to its nearest codeword.

    Returns
    -------
    codebook : list of MVN
    quantized : list of ndarray, shape (k,)
    """
    gmms = list(gmms)
    if not gmms:
        raise InvalidInput("need at least one mixture")
    pooled = [c for g in gmms for c in g.components]
    if not 1 <= k <= len(pooled):
        raise InvalidInput(f"k must be in [1, {len(pooled)}], got {k}")
    cl = kcenter_gonzalez(pooled, k, metric, seed)
    quantized = []
    start = 0
    for g in gmms:
        a = cl.assignment[start:start + len(g)]
        quantized.append(np.bincount(a, weights=g.weights, minlength=k))
        start += len(g)
    return cl.centers, quantized


__all__ = [
    "Clustering", "DistanceCache", "MetricSpace", "VPTree", "gmm_quantize", "gmm_simplify",
    "kcenter_gonzalez", "kmedioid", "linear_scan_nn", "miniball", "miniball_embedded",
    "stochastic_centroid", "thread_count", "vptree_build", "vptree_nn",
]
