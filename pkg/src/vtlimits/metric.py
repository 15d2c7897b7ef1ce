"""Word-metric engine: BFS, diameters, growth and doubling, covering numbers,
radius of freedom and the weighted word-length sandwich."""

from __future__ import annotations

import heapq
import itertools
import json
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.sparse import csgraph

from .graph import LabeledGraph
from .groups import (DEFAULT_BUDGET, BudgetExceeded, GenSet, GroupSpec, enumerate_by_words,
                     subgroup_closure)

UNREACHED = -1


class DisconnectedGraph(ValueError):
    pass


class ProfileTooShort(ValueError):
    pass


# --- BFS -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DistanceField:
    source: int
    dist: np.ndarray

    @property
    def connected(self) -> bool:
        return bool((self.dist != UNREACHED).all())

    @property
    def eccentricity(self) -> int:
        if not self.connected:
            raise DisconnectedGraph("graph is disconnected")
        return int(self.dist.max())

    def __getitem__(self, v):
        return int(self.dist[v])

    def tolist(self) -> list[int]:
        return self.dist.tolist()


def bfs(graph: LabeledGraph, source: int) -> DistanceField:
    return DistanceField(source, multi_source_bfs(graph, [source]))


def multi_source_bfs(graph: LabeledGraph, sources: Iterable[int],
                     blocked: np.ndarray | None = None) -> np.ndarray:
    """Distance to the nearest source; ``blocked`` vertices are never entered."""
    dist = np.full(graph.n, UNREACHED, dtype=np.int64)
    queue = deque()
    for s in sources:
        if dist[s] == UNREACHED:
            dist[s] = 0
            queue.append(s)
    adj = graph.adjacency
    while queue:
        v = queue.popleft()
        dv = dist[v] + 1
        for w in adj[v]:
            if dist[w] == UNREACHED and (blocked is None or not blocked[w]):
                dist[w] = dv
                queue.append(w)
    return dist


def distance_matrix(graph: LabeledGraph, indices: Sequence[int] | None = None) -> np.ndarray:
    """All-pairs (or selected-rows) hop distances; unreachable = ``UNREACHED``."""
    d = csgraph.shortest_path(graph.csr, method="D", unweighted=True, directed=False,
                              indices=indices)
    out = np.where(np.isinf(d), UNREACHED, d).astype(np.int32)
    return out


def eccentricity(graph: LabeledGraph, v: int) -> int:
    return bfs(graph, v).eccentricity


def diameter(graph: LabeledGraph) -> int:
    """Exact diameter. Transitive graphs need a single BFS."""
    if graph.n == 0:
        raise ValueError("empty graph")
    if graph.transitive:
        return eccentricity(graph, 0)
    best = 0
    for chunk in np.array_split(np.arange(graph.n), max(1, graph.n // 512)):
        d = distance_matrix(graph, chunk)
        if (d == UNREACHED).any():
            raise DisconnectedGraph("graph is disconnected")
        best = max(best, int(d.max()))
    return best


# --- growth and doubling ---------------------------------------------------

@dataclass(frozen=True)
class GrowthProfile:
    """``sizes[r] = |B(source, r)|`` for ``r = 0..r_max``.

    ``saturated`` means the last entry already is the whole space, so larger
    radii have the same ball size.
    """

    source: int
    sizes: tuple[int, ...]
    saturated: bool = True

    @property
    def r_max(self) -> int:
        return len(self.sizes) - 1

    def ball(self, r: int) -> int:
        if r <= self.r_max:
            return self.sizes[r]
        if self.saturated:
            return self.sizes[-1]
        raise ProfileTooShort(f"radius {r} beyond profile range {self.r_max}")

    @classmethod
    def from_counts(cls, counts: Sequence[int], saturated: bool = False, source: int = 0):
        return cls(source, tuple(int(c) for c in counts), saturated)


def growth_profile(graph: LabeledGraph, source: int = 0) -> GrowthProfile:
    df = bfs(graph, source)
    if not df.connected:
        raise DisconnectedGraph("graph is disconnected")
    sizes = np.cumsum(np.bincount(df.dist))
    return GrowthProfile(source, tuple(int(s) for s in sizes), True)


def growth_exponent(profile: GrowthProfile, r_min: int = 1, r_max: int | None = None) -> float:
    """Least-squares slope of ``log |B(r)|`` against ``log r``."""
    r_max = profile.r_max if r_max is None else min(r_max, profile.r_max)
    r = np.arange(max(1, r_min), r_max + 1)
    if len(r) < 2:
        raise ValueError("need at least two radii for a slope")
    b = np.array([profile.sizes[i] for i in r], dtype=float)
    slope, _ = np.polyfit(np.log(r), np.log(b), 1)
    return float(slope)


@dataclass(frozen=True)
class DoublingReport:
    factor: int
    q: float
    K: float
    witness_radius: int | None
    ratios: tuple[tuple[int, float], ...]

    def to_dict(self) -> dict:
        return {"factor": self.factor, "q": self.q, "K": self.K,
                "witness_radius": self.witness_radius,
                "ratios": [[r, x] for r, x in self.ratios]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def doubling_report(profile: GrowthProfile, q: float, factor: int = 100) -> DoublingReport:
    """Ratios ``|B(factor R)| / |B(R)|`` at every available ``R >= 1`` and the
    smallest ``R`` with ratio at most ``K = factor^(2q)``."""
    K = factor ** (2 * q)
    if float(q).is_integer():
        K = factor ** (2 * int(q))
    if profile.saturated:
        top = max(1, profile.r_max)
    else:
        top = profile.r_max // factor
    if top < 1:
        raise ProfileTooShort(f"profile stops at r = {profile.r_max} < factor = {factor}")
    ratios = []
    witness = None
    for R in range(1, top + 1):
        big, small = profile.ball(factor * R), profile.ball(R)
        ratios.append((R, big / small))
        if witness is None and big <= K * small:
            witness = R
    return DoublingReport(factor, q, K, witness, tuple(ratios))


# --- finite metric spaces --------------------------------------------------

@dataclass(frozen=True, eq=False)
class FiniteMetricSpace:
    """Points ``0..n-1`` with distances ``dist / scale``.

    ``dist`` is kept in its raw units (hop counts for graphs) so that large
    spaces stay integer-typed.
    """

    dist: np.ndarray
    scale: float = 1.0
    labels: tuple | None = None
    name: str = ""

    def __post_init__(self):
        d = np.asarray(self.dist)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError("distance matrix must be square")
        if self.scale <= 0:
            raise ValueError("scale must be positive")
        object.__setattr__(self, "dist", d)

    @property
    def n(self) -> int:
        return self.dist.shape[0]

    def __len__(self):
        return self.n

    @property
    def d(self) -> np.ndarray:
        return self.dist / self.scale

    @property
    def diameter(self) -> float:
        return float(self.dist.max()) / self.scale if self.n else 0.0

    def row(self, i: int) -> np.ndarray:
        return self.dist[i]

    def rescaled(self, scale: float) -> FiniteMetricSpace:
        return FiniteMetricSpace(self.dist, scale, self.labels, self.name)

    def sub(self, idx: Sequence[int]) -> FiniteMetricSpace:
        idx = np.asarray(idx, dtype=int)
        labels = None if self.labels is None else tuple(self.labels[i] for i in idx)
        return FiniteMetricSpace(self.dist[np.ix_(idx, idx)], self.scale, labels, self.name)

    @classmethod
    def from_graph(cls, graph: LabeledGraph, rescale: bool = True) -> FiniteMetricSpace:
        d = distance_matrix(graph)
        if (d == UNREACHED).any():
            raise DisconnectedGraph("graph is disconnected")
        scale = float(d.max()) if rescale and d.max() > 0 else 1.0
        return cls(d, scale, graph.labels, graph.name)

    @classmethod
    def from_points(cls, points, metric: Callable, name: str = "") -> FiniteMetricSpace:
        pts = list(points)
        d = np.array([[metric(a, b) for b in pts] for a in pts], dtype=float)
        return cls(d, 1.0, tuple(map(tuple, np.atleast_2d(pts))) if pts else None, name)

    def check_metric(self, tol: float = 1e-9, samples: int = 20000, seed: int = 0) -> bool:
        """Metric axioms; exhaustive up to 500 points, sampled triples above."""
        d = self.d
        if not np.allclose(d, d.T, atol=tol) or np.abs(np.diag(d)).max(initial=0) > tol:
            return False
        off = d + np.eye(self.n)
        if (off <= 0).any():
            return False
        if self.n <= 500:
            for k in range(self.n):
                if (d > d[:, [k]] + d[[k], :] + tol).any():
                    return False
            return True
        rng = np.random.default_rng(seed)
        i, j, k = rng.integers(0, self.n, size=(3, samples))
        return bool((d[i, j] <= d[i, k] + d[k, j] + tol).all())


class GraphMetric:
    """BFS-backed metric on a graph's vertices; rows are computed on demand.

    Exposes the same ``n``, ``scale`` and ``row`` interface as
    :class:`FiniteMetricSpace` without materialising all pairs.
    """

    def __init__(self, graph: LabeledGraph, scale: float | None = None):
        self.graph = graph
        self._rows: dict[int, np.ndarray] = {}
        if scale is None:
            scale = float(diameter(graph)) or 1.0
        self.scale = scale

    @property
    def n(self) -> int:
        return self.graph.n

    def __len__(self):
        return self.n

    def row(self, i: int) -> np.ndarray:
        if i not in self._rows:
            df = bfs(self.graph, i)
            if not df.connected:
                raise DisconnectedGraph("graph is disconnected")
            self._rows[i] = df.dist
        return self._rows[i]

    def dense(self) -> FiniteMetricSpace:
        return FiniteMetricSpace.from_graph(self.graph, rescale=False).rescaled(self.scale)


@dataclass(frozen=True)
class CoveringReport:
    eps: float
    greedy_upper: int
    packing_lower: int
    centers: tuple[int, ...] = field(repr=False)
    packing: tuple[int, ...] = field(repr=False)

    def to_dict(self) -> dict:
        return {"eps": self.eps, "greedy_upper": self.greedy_upper,
                "packing_lower": self.packing_lower}


def covering_number(space: FiniteMetricSpace, eps: float) -> CoveringReport:
    """Sandwich the minimal number of closed ``eps``-balls covering ``space``.

    Upper bound: greedy set cover (ball covering most uncovered points, ties
    to the lowest index). Lower bound: a maximal set with pairwise distance
    ``> 2 eps``, since no ball of radius ``eps`` holds two of its points.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    raw = space.dist
    r = eps * space.scale * (1 + 1e-12)
    n = space.n
    balls = [np.flatnonzero(raw[i] <= r) for i in range(n)]
    uncovered = np.ones(n, dtype=bool)
    heap = [(-len(b), i) for i, b in enumerate(balls)]
    heapq.heapify(heap)
    centers = []
    left = n
    while left:
        neg, i = heapq.heappop(heap)
        gain = int(uncovered[balls[i]].sum())
        if gain != -neg:
            heapq.heappush(heap, (-gain, i))
            continue
        centers.append(i)
        uncovered[balls[i]] = False
        left -= gain
    packing = []
    free = np.ones(n, dtype=bool)
    r2 = 2 * eps * space.scale * (1 + 1e-12)
    for i in range(n):
        if free[i]:
            packing.append(i)
            free &= raw[i] > r2
    return CoveringReport(eps, len(centers), len(packing), tuple(centers), tuple(packing))


# --- radius of freedom -----------------------------------------------------

def _lattice_sphere(k: int, t: int):
    """All integer k-vectors with l1 norm exactly ``t``."""
    if k == 1:
        return [(t,), (-t,)] if t else [(0,)]
    out = []
    for a in range(-t, t + 1):
        for rest in _lattice_sphere(k - 1, t - abs(a)):
            out.append((a,) + rest)
    return out


def radius_of_freedom(spec: GroupSpec, generators: Sequence, budget: int = DEFAULT_BUDGET) -> int:
    """Largest ``r`` such that the l1 ball of radius ``r`` in Z^k injects into G.

    ``generators`` are the k positive generators ``e_1..e_k`` in order.
    Lattice spheres are grown one level at a time; the first level that hits
    an already-seen group element gives the answer (two half-relations meet).
    """
    if not spec.abelian:
        raise ValueError("radius of freedom needs an abelian group")
    k = len(generators)
    if k == 0:
        raise ValueError("need at least one generator")
    seen = {spec.identity}
    count = 1
    for t in itertools.count(1):
        level = _lattice_sphere(k, t)
        count += len(level)
        if count > budget:
            raise BudgetExceeded(f"lattice ball exceeds budget {budget}")
        for vec in level:
            g = spec.identity
            for c, e in zip(vec, generators):
                if c:
                    g = spec.mul(g, spec.power(e, c))
            if g in seen:
                return t - 1
            seen.add(g)


# --- weighted word length --------------------------------------------------

def word_lengths(spec: GroupSpec, gens: Sequence, budget: int = DEFAULT_BUDGET) -> dict:
    order, _ = enumerate_by_words(spec, gens, budget)
    length = {spec.identity: 0}
    queue = deque([spec.identity])
    while queue:
        x = queue.popleft()
        for s in gens:
            y = spec.mul(x, s)
            if y not in length:
                length[y] = length[x] + 1
                queue.append(y)
    return length


@dataclass(frozen=True)
class SandwichReport:
    holds: bool
    index: int
    gens: int
    bound: int
    max_slack: int
    min_slack: int
    weighted_set: int
    checked: int


def weighted_word_length(spec: GroupSpec, U: GenSet, A0, budget: int = DEFAULT_BUDGET
                         ) -> SandwichReport:
    """Compare ``|a|_U`` with a weighted word length on the abelian normal
    subgroup ``A0`` (an iterable of elements or a membership predicate).

    ``V`` is the set of nontrivial elements of ``A0`` of U-length at most
    ``|B| = [G : A0]``; ``W`` collects all their conjugates, each weighted by
    the shortest U-length of a ``v`` it comes from.
    """
    if spec.order() > budget:
        raise BudgetExceeded(f"|G| = {spec.order()} exceeds budget {budget}")
    elems = spec.elements(budget)
    if callable(A0):
        sub = frozenset(g for g in elems if A0(g))
    else:
        sub = frozenset(A0)
    if subgroup_closure(spec, sub, budget) != sub:
        raise ValueError("A0 is not a subgroup")
    for a in sub:
        for b in sub:
            if spec.mul(a, b) != spec.mul(b, a):
                raise ValueError("A0 is not abelian")
    if any(spec.conjugate(a, g) not in sub for g in elems for a in sub):
        raise ValueError("A0 is not normal")
    lengths = word_lengths(spec, U.elements, budget)
    if len(lengths) != len(elems):
        raise ValueError("U does not generate G")
    index = len(elems) // len(sub)
    weights: dict = {}
    for v in sub:
        lv = lengths[v]
        if v == spec.identity or lv > index:
            continue
        for g in elems:
            w = spec.mul(spec.mul(g, v), spec.inv(g))
            if lv < weights.get(w, math.inf):
                weights[w] = lv
    wlen = {spec.identity: 0}
    heap = [(0, 0, spec.identity)]
    tie = itertools.count(1)
    items = list(weights.items())
    while heap:
        dist, _, x = heapq.heappop(heap)
        if dist > wlen.get(x, math.inf):
            continue
        for w, c in items:
            y = spec.mul(x, w)
            nd = dist + c
            if nd < wlen.get(y, math.inf):
                wlen[y] = nd
                heapq.heappush(heap, (nd, next(tie), y))
    bound = 2 * index * len(U) ** index
    slacks = [lengths[a] - wlen[a] for a in sub]
    holds = min(slacks) >= 0 and max(slacks) <= bound
    return SandwichReport(holds, index, len(U), bound, max(slacks), min(slacks),
                          len(weights), len(sub))
