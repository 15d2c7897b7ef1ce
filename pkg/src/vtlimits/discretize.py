"""Net-graph discretizer: turn a finite sample of a metric space into a graph
on a maximal t-separated subset and measure how well it tracks the sample."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.sparse.csgraph import connected_components

from .graph import LabeledGraph
from .metric import UNREACHED, FiniteMetricSpace, distance_matrix

SAMPLE_METRICS = ("euclidean", "l1-torus", "circle", "explicit-matrix")


class NetNotConnected(ValueError):
    pass


# --- samples ---------------------------------------------------------------

def _metric_matrix(pts: np.ndarray, metric: str) -> np.ndarray:
    diff = np.abs(pts[:, None, :] - pts[None, :, :])
    if metric == "euclidean":
        return np.sqrt((diff ** 2).sum(-1))
    if metric == "l1-torus":
        return np.minimum(diff, 1 - diff).sum(-1)
    if metric == "circle":
        a = np.mod(diff[..., 0], 2 * math.pi)
        return np.minimum(a, 2 * math.pi - a)
    raise ValueError(f"unknown metric {metric!r}; choose from {', '.join(SAMPLE_METRICS)}")


def sample_space(points, metric: str, name: str = "") -> FiniteMetricSpace:
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if metric == "l1-torus":
        pts = np.mod(pts, 1.0)
    return FiniteMetricSpace(_metric_matrix(pts, metric), 1.0,
                             tuple(map(tuple, pts.tolist())), name or metric)


def loads_sample_csv(text: str, metric: str) -> FiniteMetricSpace:
    """Parse ``id,x1..xm`` rows (a header line is optional). With
    ``explicit-matrix`` each row holds that point's distances instead."""
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    # a header has non-numeric value columns; ids themselves may be any text
    if rows and not all(_is_number(c) for c in rows[0][1:]):
        rows = rows[1:]
    if not rows:
        raise ValueError("empty sample")
    try:
        values = np.array([[float(c) for c in r[1:]] for r in rows])
    except ValueError as exc:
        raise ValueError(f"bad sample row: {exc}") from None
    if metric == "explicit-matrix":
        if values.shape != (len(rows), len(rows)):
            raise ValueError("explicit matrix must be square")
        return FiniteMetricSpace(values, 1.0, tuple(r[0] for r in rows), "explicit")
    return sample_space(values, metric)


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def read_sample_csv(path, metric: str) -> FiniteMetricSpace:
    with open(path) as fh:
        return loads_sample_csv(fh.read(), metric)


def sample_model(metric: str, dim: int = 1):
    """Unscaled torus model whose metric agrees with a sample metric."""
    from .limits import TorusModel, norm_from_generators
    if metric == "circle":
        return TorusModel(np.array([[2 * math.pi]]), norm_from_generators([[1]]), "circle-2pi")
    if metric == "l1-torus":
        gens = [[int(i == j) for j in range(dim)] for i in range(dim)]
        return TorusModel(np.eye(dim), norm_from_generators(gens), f"l1-torus-{dim}-raw")
    raise ValueError(f"no model for metric {metric!r}")


def circle_points(m: int) -> np.ndarray:
    """``m`` evenly spaced angles on the unit circle (circumference 2 pi)."""
    return (2 * math.pi * np.arange(m) / m)[:, None]


def torus_points(per_axis: int, k: int = 2) -> np.ndarray:
    axes = [np.arange(per_axis) / per_axis] * k
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, k)


# --- nets ------------------------------------------------------------------

def max_separated_net(sample: FiniteMetricSpace, t: float) -> tuple[int, ...]:
    """Greedy in index order: keep a point if it is at distance >= t from
    every point kept so far. The result is maximal."""
    if t <= 0:
        raise ValueError("t must be positive")
    d = sample.d
    free = np.ones(sample.n, dtype=bool)
    net = []
    for i in range(sample.n):
        if free[i]:
            net.append(i)
            free &= d[i] >= t - 1e-12
    return tuple(net)


@dataclass(frozen=True, eq=False)
class NetGraph:
    """Graph on net points (``graph.labels`` are sample indices); edge length 4t."""

    points: tuple[int, ...]
    t: float
    graph: LabeledGraph
    connected: bool

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(self.points[u], self.points[v]) for u, v in self.graph.edges()]

    def distances(self) -> np.ndarray:
        """Graph metric ``4t * hops`` between net points (inf if disconnected)."""
        hops = distance_matrix(self.graph).astype(float)
        hops[hops == UNREACHED] = np.inf
        return 4 * self.t * hops

    def metric(self) -> FiniteMetricSpace:
        if not self.connected:
            raise NetNotConnected("net graph is disconnected")
        return FiniteMetricSpace(self.distances(), 1.0, self.points, "net")


def net_graph(sample: FiniteMetricSpace, net: Sequence[int], t: float) -> NetGraph:
    """Join net points at ambient distance <= 4t."""
    idx = np.asarray(net, dtype=int)
    d = sample.d[np.ix_(idx, idx)]
    u, v = np.nonzero(np.triu(d <= 4 * t + 1e-12, k=1))
    graph = LabeledGraph.from_edges(len(idx), zip(u.tolist(), v.tolist()),
                                    labels=idx.tolist(), name=f"net(t={t})")
    ncomp = connected_components(graph.csr, directed=False)[0] if len(idx) else 0
    return NetGraph(tuple(idx.tolist()), t, graph, ncomp <= 1)


# --- quasi-isometry check --------------------------------------------------

@dataclass(frozen=True)
class QIBounds:
    """``d_amb <= d_graph <= C (d_amb + t)``; ``additive`` is t."""

    multiplicative: float
    additive: float
    lipschitz: bool
    chaining: bool
    witness: tuple[int, int] | None
    codensity: float
    chaining_violations: int = field(default=0)

    @property
    def holds(self) -> bool:
        return self.lipschitz and self.chaining and self.multiplicative <= 4 + 1e-9


def verify_qi(ng: NetGraph, sample: FiniteMetricSpace) -> QIBounds:
    """Check every pair of net points against the ambient metric: the
    inclusion is 1-Lipschitz from the graph metric, and the graph metric obeys
    the chaining bound ``4 ceil(d/t) t``."""
    if not ng.connected:
        raise NetNotConnected("net graph is disconnected; sample not geodesic at this scale")
    idx = np.asarray(ng.points)
    t = ng.t
    da = sample.d[np.ix_(idx, idx)]
    dg = ng.distances()
    lipschitz = bool((da <= dg + 1e-9).all())
    chain = 4 * np.ceil(da / t - 1e-9) * t
    bad = dg > chain + 1e-9
    ratio = dg / (da + t)
    i, j = np.unravel_index(int(ratio.argmax()), ratio.shape)
    codens = float(sample.d[:, idx].min(axis=1).max()) if len(idx) else 0.0
    witness = (int(idx[i]), int(idx[j]))
    if len(idx) < 2:
        return QIBounds(1.0, 0.0, True, True, None, codens)
    mult = float(ratio[i, j])
    return QIBounds(mult, t, lipschitz, not bad.any(), witness, codens, int(bad.sum()))


@dataclass(frozen=True)
class DiscretizeReport:
    t: float
    net_size: int
    connected: bool
    qi: QIBounds | None
    gh_subspace: float | None
    gh_graph: float | None


def discretize(sample: FiniteMetricSpace, t: float, model=None, coords=None) -> DiscretizeReport:
    """Net, graph and QI check; with a model (and the sample's coordinates in
    it) also GH upper bounds from the net to the model, once with the ambient
    metric and once with the rescaled graph metric."""
    from .gh import map_distortion
    net = max_separated_net(sample, t)
    ng = net_graph(sample, net, t)
    qi = verify_qi(ng, sample) if ng.connected else None
    gh_sub = gh_graph = None
    if model is not None and coords is not None:
        c = np.asarray(coords, dtype=float)[list(net)]
        sub = sample.sub(net)
        gh_sub = map_distortion(sub, model, c).gh_upper
        if ng.connected:
            gm = ng.metric()
            gm = gm.rescaled(float(gm.dist.max()) / max(sub.diameter, 1e-12))
            gh_graph = map_distortion(gm, model, c).gh_upper
    return DiscretizeReport(t, len(net), ng.connected, qi, gh_sub, gh_graph)
