"""Limit models: polyhedral norms spanned by generator images, flat tori,
word-metric convergence tables and the sumset convexification gap."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, Delaunay, cKDTree

EXACT_MAX_DIM = 3
EXACT_MAX_GENS = 12


class DegenerateNorm(ValueError):
    pass


def _frac(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(x).limit_denominator(10 ** 12)
    return Fraction(x)


def _solve(cols: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]):
    """Solve ``sum_j t_j cols[j] = rhs`` exactly; ``None`` if singular."""
    m = len(rhs)
    a = [[cols[j][i] for j in range(m)] + [rhs[i]] for i in range(m)]
    for c in range(m):
        p = next((r for r in range(c, m) if a[r][c] != 0), None)
        if p is None:
            return None
        a[c], a[p] = a[p], a[c]
        inv = 1 / a[c][c]
        a[c] = [x * inv for x in a[c]]
        for r in range(m):
            if r != c and a[r][c] != 0:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return [a[i][m] for i in range(m)]


# --- norms -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PolyhedralNorm:
    """Gauge of the convex hull of ``{+u_i, -u_i}``.

    Use :func:`norm_from_generators`. ``generators`` keeps one representative
    per ``+-`` pair, as exact fractions.
    """

    generators: tuple[tuple[Fraction, ...], ...]

    @property
    def dim(self) -> int:
        return len(self.generators[0])

    @property
    def vertices(self) -> np.ndarray:
        u = np.array([[float(x) for x in g] for g in self.generators])
        return np.vstack([u, -u]) + 0.0

    @cached_property
    def _bases(self):
        m = self.dim
        out = []
        for idx in itertools.combinations(range(len(self.generators)), m):
            cols = [self.generators[j] for j in idx]
            basis = [_solve(cols, [Fraction(int(i == r)) for i in range(m)]) for r in range(m)]
            if basis[0] is not None:
                out.append(basis)  # basis[r] = coefficients of e_r
        return out

    @cached_property
    def facets(self) -> tuple[np.ndarray, np.ndarray]:
        """``(A, b)`` with the unit ball ``{x : A x <= b}``."""
        v = self.vertices
        if self.dim == 1:
            r = float(np.abs(v).max())
            return np.array([[1.0], [-1.0]]), np.array([r, r])
        hull = ConvexHull(v)
        eq = np.unique(np.round(hull.equations, 12), axis=0)
        return eq[:, :-1], -eq[:, -1]

    def gauge(self, x) -> np.ndarray:
        """Float gauge, vectorised over the last axis."""
        A, b = self.facets
        x = np.asarray(x, dtype=float)
        return np.maximum((x @ A.T) / b, 0).max(axis=-1)

    def __call__(self, x):
        return norm_eval(self, x)

    @cached_property
    def outer_radius(self) -> float:
        return float(np.linalg.norm(self.vertices, axis=1).max())

    @cached_property
    def inner_radius(self) -> float:
        A, b = self.facets
        return float((b / np.linalg.norm(A, axis=1)).min())

    @cached_property
    def axis_weights(self) -> np.ndarray | None:
        """Per-axis weights ``w`` when the gauge is ``sum |x_i| / w_i``."""
        m = self.dim
        w = np.zeros(m)
        for g in self.generators:
            nz = [i for i, x in enumerate(g) if x != 0]
            if len(nz) != 1:
                return None
            w[nz[0]] = max(w[nz[0]], abs(float(g[nz[0]])))
        return w if (w > 0).all() else None

    def to_dict(self) -> dict:
        A, b = self.facets
        return {"dimension": self.dim,
                "vertices": self.vertices.tolist(),
                "inequalities": [{"a": a.tolist(), "b": float(bb)} for a, bb in zip(A, b)]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def norm_from_generators(u) -> PolyhedralNorm:
    gens = []
    for g in u:
        g = tuple(_frac(x) for x in (g if hasattr(g, "__len__") else (g,)))
        if not any(g):
            continue
        neg = tuple(-x for x in g)
        if g not in gens and neg not in gens:
            gens.append(g)
    if not gens:
        raise DegenerateNorm("no nonzero generators")
    m = len(gens[0])
    if any(len(g) != m for g in gens):
        raise ValueError("generators have different dimensions")
    if np.linalg.matrix_rank(np.array([[float(x) for x in g] for g in gens])) < m:
        raise DegenerateNorm("generators do not span the ambient space")
    return PolyhedralNorm(tuple(gens))


def norm_eval(norm: PolyhedralNorm, x):
    """``min sum |t_i|`` subject to ``sum t_i u_i = x``.

    Exact (a Fraction) for small sizes, by trying every basis of generators:
    an optimal vertex of this LP is supported on linearly independent
    generators. Larger problems go through ``scipy.optimize.linprog``.
    """
    if norm.dim <= EXACT_MAX_DIM and len(norm.generators) <= EXACT_MAX_GENS:
        xs = [_frac(v) for v in x]
        if len(xs) != norm.dim:
            raise ValueError("dimension mismatch")
        if not any(xs):
            return Fraction(0)
        best = None
        for basis in norm._bases:
            t = [sum((basis[r][j] * xs[r] for r in range(norm.dim)), Fraction(0))
                 for j in range(norm.dim)]
            cost = sum(abs(v) for v in t)
            if best is None or cost < best:
                best = cost
        return best
    U = np.array([[float(v) for v in g] for g in norm.generators]).T
    k = U.shape[1]
    res = linprog(np.ones(2 * k), A_eq=np.hstack([U, -U]), b_eq=np.asarray(x, dtype=float),
                  bounds=(0, None), method="highs")
    if not res.success:
        raise DegenerateNorm(res.message)
    return float(res.fun)


# --- tori ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TorusModel:
    """``R^m / L`` with the metric induced by ``norm``; rows of ``lattice``
    span ``L``."""

    lattice: np.ndarray
    norm: PolyhedralNorm
    name: str = ""

    def __post_init__(self):
        L = np.atleast_2d(np.asarray(self.lattice, dtype=float))
        if L.shape != (self.norm.dim, self.norm.dim):
            raise ValueError("lattice must be an m x m matrix")
        if abs(np.linalg.det(L)) < 1e-12:
            raise ValueError("lattice is not full rank")
        object.__setattr__(self, "lattice", L)

    @property
    def dim(self) -> int:
        return self.norm.dim

    @cached_property
    def _inv(self) -> np.ndarray:
        return np.linalg.inv(self.lattice)

    def reduce(self, x) -> np.ndarray:
        """Representative in the fundamental domain ``[0,1)^m L``."""
        c = np.asarray(x, dtype=float) @ self._inv
        return (c - np.floor(c)) @ self.lattice

    def distances(self, x, ys) -> np.ndarray:
        """Distance from one point ``x`` to each row of ``ys``."""
        ys = np.atleast_2d(np.asarray(ys, dtype=float))
        diff = ys - np.asarray(x, dtype=float)
        c = diff @ self._inv
        v0 = (c - np.round(c)) @ self.lattice
        g0 = self.norm.gauge(v0)
        reach = np.linalg.norm(v0, axis=1) + self.norm.outer_radius * g0
        w = int(math.floor(float(reach.max(initial=0)) * np.linalg.norm(self._inv, 2) + 1e-9))
        best = g0
        for z in itertools.product(range(-w, w + 1), repeat=self.dim):
            if not any(z):
                continue
            best = np.minimum(best, self.norm.gauge(v0 + np.asarray(z, float) @ self.lattice))
        return best

    def distance(self, x, y) -> float:
        return float(self.distances(x, [y])[0])

    def pairwise(self, pts) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return np.stack([self.distances(p, pts) for p in pts])

    def grid(self, per_axis: int) -> np.ndarray:
        axes = [np.arange(per_axis) / per_axis] * self.dim
        c = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, self.dim)
        return c @ self.lattice

    def grid_radius(self, per_axis: int) -> float:
        """Largest distance from a point to the nearest grid point."""
        h = 0.5 / per_axis
        worst = 0.0
        for signs in itertools.product((-1, 1), repeat=self.dim):
            worst = max(worst, float(self.norm.gauge((np.array(signs) * h) @ self.lattice)))
        return worst

    def codensity(self, pts, spacing: float) -> float:
        """Upper bound on ``sup_y min_i d(y, pts_i)``: the maximum over a grid
        of step ``spacing`` (in lattice coordinates) plus the grid radius."""
        per_axis = max(1, math.ceil(1 / spacing))
        grid = self.grid(per_axis)
        pts = self.reduce(np.atleast_2d(np.asarray(pts, dtype=float)))
        w = self.norm.axis_weights
        if w is not None and np.allclose(self.lattice, np.diag(np.diag(self.lattice))):
            period = np.abs(np.diag(self.lattice)) / w
            tree = cKDTree(np.mod(pts / w, period), boxsize=period)
            d, _ = tree.query(np.mod(grid / w, period), p=1)
            worst = float(d.max())
        else:
            worst = 0.0
            for chunk in np.array_split(grid, max(1, len(grid) // 256)):
                dd = np.stack([self.distances(g, pts) for g in chunk])
                worst = max(worst, float(dd.min(axis=1).max()))
        return worst + self.grid_radius(per_axis)

    def diameter(self, per_axis: int = 64) -> float:
        """Grid estimate (exact when the farthest point lies on the grid)."""
        g = self.grid(per_axis)
        return float(self.distances(np.zeros(self.dim), g).max())


def circle_model() -> TorusModel:
    """Circle of diameter 1: ``R/Z`` with norm ``2|x|``."""
    return TorusModel(np.eye(1), norm_from_generators([[Fraction(1, 2)]]), "circle")


def l1_torus_model(k: int) -> TorusModel:
    """``R^k/Z^k`` with the l1 norm scaled to diameter 1."""
    gens = [[Fraction(k, 2) if i == j else 0 for j in range(k)] for i in range(k)]
    return TorusModel(np.eye(k), norm_from_generators(gens), f"l1-torus-{k}")


def model_from_name(name: str) -> TorusModel:
    if name == "circle":
        return circle_model()
    if name.startswith("l1-torus-"):
        try:
            return l1_torus_model(int(name[len("l1-torus-"):]))
        except ValueError:
            pass
    raise ValueError(f"unknown model {name!r}")


def model_from_json(text: str) -> TorusModel:
    """Custom model: ``{"generators": [[...], ...], "lattice": [[...], ...]}``."""
    data = json.loads(text)
    norm = norm_from_generators([[_frac(x) for x in g] for g in data["generators"]])
    lattice = data.get("lattice", np.eye(norm.dim).tolist())
    return TorusModel(np.array(lattice, dtype=float), norm, data.get("name", "custom"))


def torus_distance(model: TorusModel, x, y) -> float:
    return model.distance(x, y)


# --- convergence tables ----------------------------------------------------

@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    size: int
    diameter: int
    max_error: float
    gh_upper: float
    gh_lower: float | None = None


@dataclass(frozen=True)
class ConvergenceReport:
    family: str
    model: str
    rows: tuple[ConvergenceRow, ...]
    notes: tuple[str, ...] = field(default=())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "size", "diameter", "max_error", "gh_upper"])
        for r in self.rows:
            w.writerow([r.n, r.size, r.diameter, repr(float(r.max_error)),
                        repr(float(r.gh_upper))])
        return buf.getvalue()

    @property
    def upper_bounds(self) -> list[float]:
        return [r.gh_upper for r in self.rows]


def convergence_table(family, model: TorusModel, n_list: Sequence[int], samples: int = 200,
                      seed: int = 0) -> ConvergenceReport:
    """Compare rescaled word metrics with the model under the family's
    comparison map.

    Every supported family is a Cayley graph whose comparison map is a
    homomorphism into the torus, so errors from the identity vertex cover all
    pairs; ``samples`` extra random pairs are checked as well.
    """
    from .gh import map_distortion
    from .metric import GraphMetric, diameter

    rng = np.random.default_rng(seed)
    rows = []
    for n in sorted(n_list):
        graph = family.graph(n)
        coords = family.coordinates(n, graph)
        if coords.shape[1] != model.dim:
            raise ValueError(f"family maps to dimension {coords.shape[1]}, model has {model.dim}")
        D = diameter(graph)
        X = GraphMetric(graph, float(D))
        err = np.abs(X.row(0) / D - model.distances(coords[0], coords))
        worst = float(err.max())
        for u, v in rng.integers(0, graph.n, size=(samples, 2)):
            dg = X.row(int(u))[v] / D
            worst = max(worst, abs(dg - model.distance(coords[u], coords[v])))
        rep = map_distortion(X, model, coords, sources=[0])
        rows.append(ConvergenceRow(n, graph.n, D, worst, rep.gh_upper))
    return ConvergenceReport(family.label, model.name, tuple(rows))


@dataclass(frozen=True)
class FiberRow:
    n: int
    diameter: int
    fiber_diameter: int

    @property
    def diameter_over_n(self) -> float:
        return self.diameter / self.n

    @property
    def fiber_over_sqrt_n(self) -> float:
        return self.fiber_diameter / math.sqrt(self.n)


def heisenberg_fiber_stats(n_list: Sequence[int]) -> list[FiberRow]:
    """Diameter and central-fiber diameter of the Heisenberg Cayley graphs.

    The fiber ``{(0,0,c)}`` is a subgroup, so its diameter is the largest
    word length of one of its elements, read off a single BFS.
    """
    from .groups import heisenberg_cayley
    from .metric import bfs
    rows = []
    for n in n_list:
        g = heisenberg_cayley(n)
        dist = bfs(g, 0).dist
        fiber = max(int(dist[g.vertex_of((0, 0, c))]) for c in range(n))
        rows.append(FiberRow(n, int(dist.max()), fiber))
    return rows


# --- sumset convexification ------------------------------------------------

def _sumset(K: np.ndarray, n: int, budget: int) -> np.ndarray:
    S = np.zeros((1, K.shape[1]))
    for _ in range(n):
        S = np.unique(np.round((S[:, None, :] + K[None, :, :]).reshape(-1, K.shape[1]), 9),
                      axis=0)
        if len(S) > budget:
            raise MemoryError(f"sumset exceeds budget {budget}")
    return S


def sumset_convexity_gap(K, n: int, budget: int = 200_000) -> float:
    """Hausdorff distance between ``K+...+K`` (``n`` terms) and its convex hull.

    The farthest hull point from a finite set sits at a Voronoi vertex inside
    the hull or where a Voronoi edge crosses the hull boundary, so those
    candidates give the exact value. Works in dimensions 1 and 2.
    """
    K = np.atleast_2d(np.asarray(K, dtype=float))
    if K.shape[0] == 1 and K.shape[1] > 2:
        K = K.T
    m = K.shape[1]
    if m > 2:
        raise ValueError("only dimensions 1 and 2 are supported")
    if not any(np.allclose(p, 0) for p in K):
        raise ValueError("K must contain the origin")
    keys = {tuple(np.round(p, 9)) for p in K}
    if any(tuple(np.round(-p, 9)) not in keys for p in K):
        raise ValueError("K must be symmetric")
    S = _sumset(K, n, budget)
    centered = S - S.mean(axis=0)
    rank = np.linalg.matrix_rank(centered, tol=1e-9) if len(S) > 1 else 0
    if rank == 0:
        return 0.0
    if rank == 1:
        direction = np.linalg.svd(centered)[2][0]
        t = np.sort(centered @ direction)
        return float(np.diff(t).max() / 2)
    tree = cKDTree(S)
    hull = ConvexHull(S)
    A, c = hull.equations[:, :-1], hull.equations[:, -1]
    cand = [S[hull.vertices]]
    tri = Delaunay(S)
    pts = S[tri.simplices]
    a, b, cc = pts[:, 0], pts[:, 1], pts[:, 2]
    d = 2 * (a[:, 0] * (b[:, 1] - cc[:, 1]) + b[:, 0] * (cc[:, 1] - a[:, 1])
             + cc[:, 0] * (a[:, 1] - b[:, 1]))
    ok = np.abs(d) > 1e-12
    a2, b2, c2 = (a ** 2).sum(1), (b ** 2).sum(1), (cc ** 2).sum(1)
    ux = (a2 * (b[:, 1] - cc[:, 1]) + b2 * (cc[:, 1] - a[:, 1]) + c2 * (a[:, 1] - b[:, 1]))
    uy = (a2 * (cc[:, 0] - b[:, 0]) + b2 * (a[:, 0] - cc[:, 0]) + c2 * (b[:, 0] - a[:, 0]))
    centers = np.stack([ux[ok] / d[ok], uy[ok] / d[ok]], axis=1)
    inside = (centers @ A.T + c <= 1e-9).all(axis=1)
    cand.append(centers[inside])
    # bisectors of Delaunay edges against hull edges
    edges = set()
    for s in tri.simplices:
        for i, j in ((0, 1), (1, 2), (0, 2)):
            edges.add((min(s[i], s[j]), max(s[i], s[j])))
    edges = np.array(sorted(edges))
    p, q = S[edges[:, 0]], S[edges[:, 1]]
    normal = q - p
    offset = (q ** 2 - p ** 2).sum(1) / 2            # bisector: normal . x = offset
    hv = S[hull.vertices]
    for i in range(len(hv)):
        e0, e1 = hv[i], hv[(i + 1) % len(hv)]
        dirv = e1 - e0
        den = normal @ dirv
        good = np.abs(den) > 1e-12
        t = (offset[good] - normal[good] @ e0) / den[good]
        t = t[(t >= 0) & (t <= 1)]
        cand.append(e0 + t[:, None] * dirv)
    cand = np.vstack(cand)
    dist, _ = tree.query(cand)
    return float(dist.max())
