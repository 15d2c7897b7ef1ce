"""Geometric structure detectors: 3-carets, fat triangles, net decompositions,
winding loops, geodesic cycles and the line-approximation defect.

Every witness type can re-verify itself from scratch against a graph.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .graph import LabeledGraph
from .metric import UNREACHED, bfs, diameter, distance_matrix, multi_source_bfs

LOG3_4 = math.log(4, 3)


class BudgetExhausted(RuntimeError):
    """Search ran out of budget; this is not a proof that no witness exists."""


class NotGeodesic(ValueError):
    pass


# --- geodesics -------------------------------------------------------------

class GeodesicTrees:
    """BFS trees with the lexicographically smallest parent, cached per source."""

    def __init__(self, graph: LabeledGraph):
        self.graph = graph
        self._cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def tree(self, source: int):
        if source not in self._cache:
            dist = bfs(self.graph, source).dist
            parent = np.full(self.graph.n, -1, dtype=np.int64)
            for w, nbrs in enumerate(self.graph.adjacency):
                if dist[w] > 0:
                    parent[w] = min(u for u in nbrs if dist[u] == dist[w] - 1)
            self._cache[source] = (dist, parent)
        return self._cache[source]

    def dist(self, source: int) -> np.ndarray:
        return self.tree(source)[0]

    def path(self, u: int, v: int) -> list[int]:
        """Geodesic from ``u`` to ``v``."""
        dist, parent = self.tree(u)
        if dist[v] == UNREACHED:
            raise ValueError("vertices are not connected")
        out = [v]
        while out[-1] != u:
            out.append(int(parent[out[-1]]))
        return out[::-1]


def is_geodesic(graph: LabeledGraph, path, dist_from_start: np.ndarray | None = None) -> bool:
    if len(path) == 0:
        return False
    if any(not graph.has_edge(a, b) for a, b in zip(path, path[1:])):
        return False
    d = bfs(graph, path[0]).dist if dist_from_start is None else dist_from_start
    return int(d[path[-1]]) == len(path) - 1


# --- carets ----------------------------------------------------------------

@dataclass(frozen=True)
class Caret3:
    center: int
    branches: tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]

    @property
    def R(self) -> int:
        return len(self.branches[0]) - 1

    def verify(self, graph: LabeledGraph) -> bool:
        R = self.R
        if len(self.branches) != 3 or any(len(b) != R + 1 for b in self.branches):
            return False
        d0 = bfs(graph, self.center).dist
        for b in self.branches:
            if b[0] != self.center or not is_geodesic(graph, b, d0):
                return False
        k = np.arange(R + 1)
        need = np.maximum.outer(k, k)
        rows = {v: bfs(graph, v).dist for b in self.branches for v in b}
        for i in range(3):
            for j in range(i + 1, 3):
                m = np.array([[rows[a][b] for b in self.branches[j]] for a in self.branches[i]])
                if (m < need).any():
                    return False
        return True

    def to_dict(self) -> dict:
        return {"center": self.center, "R": self.R, "branches": [list(b) for b in self.branches]}


def _caret_at(paths: np.ndarray, rows: np.ndarray, R: int):
    """Indices of three mutually compatible branches, or None."""
    k = np.arange(R + 1)
    need = np.maximum.outer(k, k)
    m = len(paths)
    compat = np.zeros((m, m), dtype=bool)
    for a in range(m):
        sub = rows[paths[a]][:, paths]            # (R+1, m, R+1)
        ok = (sub >= need[:, None, :]).all(axis=(0, 2))
        ok[a] = False
        compat[a] = ok
    compat &= compat.T
    for a in range(m):
        nb = np.flatnonzero(compat[a, a + 1:]) + a + 1
        for b in nb:
            common = np.flatnonzero(compat[a] & compat[b])
            common = common[common > b]
            if len(common):
                return a, int(b), int(common[0])
    return None


def max_caret_branch(graph: LabeledGraph, v0: int, r_max: int):
    """Largest ``R <= r_max`` with a 3-caret at ``v0`` built from BFS-tree
    geodesics, plus the witness (``None`` when ``R = 0``).

    Truncating a caret gives a caret, so radii are tried upward until one fails.
    """
    trees = GeodesicTrees(graph)
    dist, parent = trees.tree(v0)
    top = min(r_max, int(dist[dist != UNREACHED].max()))
    if top < 1:
        return 0, None
    ball = np.flatnonzero((dist != UNREACHED) & (dist <= top))
    full = distance_matrix(graph, ball)
    rows = np.zeros((graph.n, graph.n), dtype=np.int32) if graph.n <= 6000 else None
    if rows is None:
        raise ValueError("graph too large for caret search")
    rows[ball] = full
    best, witness = 0, None
    for R in range(1, top + 1):
        sphere = np.flatnonzero(dist == R)
        if len(sphere) < 3:
            break
        paths = np.empty((len(sphere), R + 1), dtype=np.int64)
        paths[:, R] = sphere
        for k in range(R, 0, -1):
            paths[:, k - 1] = parent[paths[:, k]]
        found = _caret_at(paths, rows, R)
        if found is None:
            break
        best = R
        witness = Caret3(v0, tuple(tuple(int(x) for x in paths[i]) for i in found))
    return best, witness


@dataclass(frozen=True)
class CaretGrowthReport:
    holds: bool
    R: int
    ball: int
    bound: float
    size: int
    diameter: int
    global_bound: float
    global_holds: bool


def caret_growth_check(graph: LabeledGraph, caret: Caret3, c: float = 1 / LOG3_4
                       ) -> CaretGrowthReport:
    """``|B(v0, R)| >= R^(log_3 4)``; also evaluates the global volume bound
    with ``eps = R / D^c`` (reported, not enforced)."""
    if not caret.verify(graph):
        raise ValueError("invalid caret witness")
    R = caret.R
    d0 = bfs(graph, caret.center).dist
    ball = int((d0 <= R).sum())
    bound = R ** LOG3_4
    D = diameter(graph)
    eps = R / D ** c
    gb = 0.5 * eps ** (LOG3_4 - 1) * D ** (1 + c * (LOG3_4 - 1))
    return CaretGrowthReport(ball >= bound, R, ball, bound, graph.n, D, gb, graph.n > gb)


# --- fat triangles ---------------------------------------------------------

@dataclass(frozen=True)
class GeodesicTriangle:
    """Corners ``(a, b, c)`` and sides ``a->b``, ``b->c``, ``c->a``."""

    corners: tuple[int, int, int]
    sides: tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]
    fatness: float | None = None

    def to_dict(self) -> dict:
        return {"corners": list(self.corners), "sides": [list(s) for s in self.sides],
                "fatness": self.fatness}


def fatness(graph: LabeledGraph, triangle: GeodesicTriangle) -> int:
    """Minimum over all vertices of the summed distances to the three sides."""
    total = np.zeros(graph.n, dtype=np.int64)
    for side in triangle.sides:
        if not is_geodesic(graph, side):
            raise NotGeodesic(f"side {side[:1]}..{side[-1:]} is not a geodesic")
        d = multi_source_bfs(graph, side)
        if (d == UNREACHED).any():
            raise ValueError("graph is disconnected")
        total += d
    return int(total.min())


def _triangle(trees: GeodesicTrees, a: int, b: int, c: int, ab=None) -> GeodesicTriangle:
    sides = (tuple(ab) if ab is not None else tuple(trees.path(a, b)),
             tuple(trees.path(b, c)), tuple(trees.path(c, a)))
    return GeodesicTriangle((a, b, c), sides)


def find_fat_triangle(graph: LabeledGraph, delta: float, seed: int = 0,
                      budget: int = 2000) -> GeodesicTriangle:
    """Search for a triangle with fatness >= ``delta``.

    First the diameter-pair construction: ``w, z`` at distance ``D`` and a
    geodesic ``x -> z -> y`` of length ``D`` with ``z`` at its midpoint; then
    random corners. Raises :class:`BudgetExhausted` if ``budget`` triangles
    were evaluated without success.
    """
    trees = GeodesicTrees(graph)
    rng = np.random.default_rng(seed)
    w = 0
    dw = trees.dist(w)
    if (dw == UNREACHED).any():
        raise ValueError("graph is disconnected")
    if not graph.transitive:
        best = max(range(graph.n), key=lambda v: int(trees.dist(v).max()))
        w, dw = best, trees.dist(best)
    D = int(dw.max())
    z = int(np.flatnonzero(dw == D)[0])
    dz = trees.dist(z)
    xs = np.flatnonzero(dz == D // 2)
    ys = np.flatnonzero(dz == D - D // 2)
    tried = 0
    for x in xs:
        dx = trees.dist(int(x))
        for y in ys[dx[ys] == D]:
            x, y = int(x), int(y)
            if x == y:
                continue
            side = trees.path(x, z)[:-1] + trees.path(z, y)
            tri = _triangle(trees, w, x, y)
            tri = GeodesicTriangle(tri.corners, (tri.sides[0], tuple(side), tri.sides[2]))
            f = fatness(graph, tri)
            tried += 1
            if f >= delta:
                return GeodesicTriangle(tri.corners, tri.sides, f)
            if tried >= budget // 2:
                break
        if tried >= budget // 2:
            break
    while tried < budget:
        a, b, c = (int(v) for v in rng.choice(graph.n, size=3, replace=graph.n < 3))
        tri = _triangle(trees, a, b, c)
        f = fatness(graph, tri)
        tried += 1
        if f >= delta:
            return GeodesicTriangle(tri.corners, tri.sides, f)
    raise BudgetExhausted(f"no {delta}-fat triangle among {tried} candidates")


# --- net decomposition -----------------------------------------------------

@dataclass(frozen=True, eq=False)
class NetDecomposition:
    separation: float
    ball_radius: int
    centers: tuple[int, ...]
    H: tuple[tuple[int, ...], ...]
    sector: np.ndarray = field(repr=False)
    order: tuple[int, ...] | None = None

    @property
    def is_cycle(self) -> bool:
        return self.order is not None

    @property
    def k(self) -> int:
        return len(self.centers)

    def to_dict(self) -> dict:
        return {"separation": self.separation, "ball_radius": self.ball_radius,
                "centers": list(self.centers), "H": [list(a) for a in self.H],
                "is_cycle": self.is_cycle, "sector": self.sector.tolist()}


def _cycle_order(adj: list[set[int]]) -> tuple[int, ...] | None:
    k = len(adj)
    if k < 3 or any(len(a) != 2 for a in adj):
        return None
    order = [0]
    prev, cur = None, 0
    while True:
        nxt = min(a for a in adj[cur] if a != prev) if prev is None else \
            next(a for a in adj[cur] if a != prev)
        if nxt == 0:
            break
        order.append(nxt)
        prev, cur = cur, nxt
    return tuple(order) if len(order) == k else None


def net_decomposition(graph: LabeledGraph, c: float = 1.0, separation: float | None = None,
                      ball_radius: int | None = None) -> NetDecomposition:
    """Maximal set of centers pairwise further apart than ``cD/10`` (and than
    1), the graph ``H`` of balls joined by
    paths avoiding the other balls, and a sector per vertex.

    ``H`` is reported as a cycle (``order`` set) only when it is connected,
    has at least three vertices and every degree is two. Otherwise sectors
    fall back to nearest-center cells.
    """
    if not 0 < c <= 1:
        raise ValueError("c must lie in (0, 1]")
    D = diameter(graph)
    sep = c * D / 10 if separation is None else separation
    radius = max(1, math.floor(c * D / 100)) if ball_radius is None else ball_radius
    # centers are pairwise further apart than max(1, sep)
    reach = max(1.0, sep)
    centers = []
    blocked = np.zeros(graph.n, dtype=bool)
    for v in range(graph.n):
        if not blocked[v]:
            centers.append(v)
            blocked |= bfs(graph, v).dist <= reach
    k = len(centers)
    owner = np.full(graph.n, -1, dtype=np.int64)
    adj = [set() for _ in range(k)]
    cdist = [bfs(graph, x).dist for x in centers]
    for j in range(k):
        inside = cdist[j] <= radius
        clash = inside & (owner >= 0)
        for i in set(owner[clash].tolist()):
            adj[i].add(j)
            adj[j].add(i)
        owner[inside & (owner < 0)] = j
    for u, v in graph.edges():
        a, b = owner[u], owner[v]
        if a >= 0 and b >= 0 and a != b:
            adj[a].add(b)
            adj[b].add(a)
    comp = np.full(graph.n, -1, dtype=np.int64)
    touches = []
    for s in range(graph.n):
        if owner[s] >= 0 or comp[s] >= 0:
            continue
        cid = len(touches)
        seen_balls = set()
        comp[s] = cid
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for w in graph.adjacency[v]:
                if owner[w] >= 0:
                    seen_balls.add(int(owner[w]))
                elif comp[w] < 0:
                    comp[w] = cid
                    queue.append(w)
        touches.append(sorted(seen_balls))
        for i in seen_balls:
            for j in seen_balls:
                if i != j:
                    adj[i].add(j)
    order = _cycle_order(adj)
    sector = np.full(graph.n, -1, dtype=np.int64)
    if order is not None:
        pos = {j: p for p, j in enumerate(order)}
        ball_sector = np.array([pos[j] for j in range(k)])
        sector[owner >= 0] = ball_sector[owner[owner >= 0]]
        for cid, balls in enumerate(touches):
            ps = sorted(pos[j] for j in balls)
            if not ps:
                continue
            if len(ps) == 2 and ps[1] - ps[0] == k - 1:
                p = ps[1]
            else:
                p = ps[0]
            sector[comp == cid] = p
    if order is None or (sector < 0).any():
        order = None
        nearest = np.stack(cdist).argmin(axis=0)
        sector = nearest.astype(np.int64)
    H = tuple(tuple(sorted(a)) for a in adj)
    return NetDecomposition(sep, radius, tuple(centers), H, sector, order)


# --- geodesic cycles -------------------------------------------------------

@dataclass(frozen=True)
class GeodesicCycle:
    vertices: tuple[int, ...]
    certified: bool

    @property
    def length(self) -> int:
        return len(self.vertices)

    def to_dict(self) -> dict:
        return {"vertices": list(self.vertices), "length": self.length,
                "certified": self.certified}


def _closed(cycle) -> list[int]:
    cyc = [int(v) for v in cycle]
    if len(cyc) > 1 and cyc[0] == cyc[-1]:
        cyc = cyc[:-1]
    return cyc


def verify_geodesic_cycle(graph: LabeledGraph, cycle) -> bool:
    """True iff graph distance equals distance along the cycle for every pair."""
    cyc = _closed(cycle)
    L = len(cyc)
    if L == 0:
        raise ValueError("empty cycle")
    for a, b in zip(cyc, cyc[1:] + cyc[:1]):
        if L > 1 and not graph.has_edge(a, b):
            raise ValueError(f"not a closed walk: {a} and {b} are not adjacent")
    if L < 3 or len(set(cyc)) != L:
        return False
    idx = np.arange(L)
    for i, v in enumerate(cyc):
        d = bfs(graph, v).dist[cyc]
        gap = np.abs(idx - i)
        if (d != np.minimum(gap, L - gap)).any():
            return False
    return True


def shortest_winding_loop(graph: LabeledGraph, net: NetDecomposition) -> GeodesicCycle:
    """Shortest closed walk winding once around the cyclic sector order.

    BFS in the cover whose states are (vertex, lifted sector level), levels
    kept in ``[-1, k+1]``, from every vertex of sector 0 to its own lift at
    level ``k``.
    """
    if not net.is_cycle or net.k < 3:
        raise ValueError("net decomposition is not a cycle of length >= 3")
    k = net.k
    sector = net.sector
    lo, hi = -1, k + 1
    width = hi - lo + 1
    steps = {}
    for u, v in graph.edges():
        diff = (sector[v] - sector[u]) % k
        if diff not in (0, 1, k - 1):
            raise ValueError("sectors are not cyclically adjacent")
        steps[(u, v)] = 1 if diff == 1 else (-1 if diff == k - 1 else 0)
        steps[(v, u)] = -steps[(u, v)]
    best = None
    for s in np.flatnonzero(sector == 0):
        s = int(s)
        start = s * width + (0 - lo)
        goal = s * width + (k - lo)
        parent = {start: -1}
        queue = deque([start])
        limit = best[0] if best else None
        depth = {start: 0}
        while queue:
            st = queue.popleft()
            if st == goal:
                break
            if limit is not None and depth[st] + 1 >= limit:
                continue
            v, lev = divmod(st, width)
            lev += lo
            for w in graph.adjacency[v]:
                nl = lev + steps[(v, w)]
                if nl < lo or nl > hi:
                    continue
                nst = w * width + (nl - lo)
                if nst not in parent:
                    parent[nst] = st
                    depth[nst] = depth[st] + 1
                    queue.append(nst)
        if goal in parent and (best is None or depth[goal] < best[0]):
            walk = []
            st = goal
            while st != -1:
                walk.append(st // width)
                st = parent[st]
            best = (depth[goal], walk[::-1][:-1])
    if best is None:
        raise BudgetExhausted("no winding loop within the level window")
    loop = best[1]
    return GeodesicCycle(tuple(loop), verify_geodesic_cycle(graph, loop))


# --- line defect -----------------------------------------------------------

def line_defect(graph: LabeledGraph, center: int, R: int, samples: int = 64, seed: int = 0
                ) -> int:
    """Upper bound on how far ``B(center, R)`` strays from one geodesic segment.

    Candidate segments are the longest geodesics through ``center`` (a
    diameter pair when one is available), sampled if there are many.
    """
    dc = bfs(graph, center).dist
    if (dc == UNREACHED).any():
        raise ValueError("graph is disconnected")
    if R > dc.max():
        raise ValueError("R exceeds the eccentricity of center")
    full = distance_matrix(graph)
    through = full == dc[:, None] + dc[None, :]
    longest = int(full[through].max())
    pairs = np.argwhere(through & (full == longest))
    pairs = pairs[pairs[:, 0] <= pairs[:, 1]]
    if len(pairs) > samples:
        pairs = pairs[np.random.default_rng(seed).choice(len(pairs), samples, replace=False)]
    trees = GeodesicTrees(graph)
    ball = dc <= R
    best = None
    for x, y in pairs:
        seg = trees.path(int(x), center)[:-1] + trees.path(center, int(y))
        d = multi_source_bfs(graph, seg)
        worst = int(d[ball].max())
        best = worst if best is None else min(best, worst)
    return best
