"""Immutable labeled graphs, the ``vtg`` text format, and a small catalog of
vertex-transitive test graphs."""

from __future__ import annotations

import ast
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Hashable, Iterable, Sequence

import numpy as np
from scipy import sparse


class GraphFormatError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class LabeledGraph:
    """Undirected simple graph on vertices ``0..n-1``.

    ``adjacency[v]`` is the sorted tuple of neighbours of ``v``. Labels are
    optional (group elements, coset ids, coordinates...). Build instances with
    :meth:`from_edges`, which deduplicates edges and drops self-loops.
    """

    adjacency: tuple[tuple[int, ...], ...]
    labels: tuple[Hashable, ...] | None = None
    transitive: bool = False
    name: str = ""

    def __post_init__(self):
        n = len(self.adjacency)
        if self.labels is not None and len(self.labels) != n:
            raise ValueError("labels must have one entry per vertex")
        for v, nbrs in enumerate(self.adjacency):
            for w in nbrs:
                if not 0 <= w < n or w == v:
                    raise ValueError(f"bad neighbour {w} of vertex {v}")
                if v not in self.adjacency[w]:
                    raise ValueError(f"adjacency not symmetric at ({v}, {w})")
        if self.transitive and n and len({len(a) for a in self.adjacency}) > 1:
            raise ValueError("graph declared transitive but degrees differ")

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], labels=None,
                   transitive: bool = False, name: str = "") -> LabeledGraph:
        nbrs: list[set[int]] = [set() for _ in range(n)]
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                continue
            nbrs[u].add(v)
            nbrs[v].add(u)
        adjacency = tuple(tuple(sorted(s)) for s in nbrs)
        labels = tuple(labels) if labels is not None else None
        return cls(adjacency, labels, transitive, name)

    @classmethod
    def from_networkx(cls, g, transitive: bool = False, name: str = "") -> LabeledGraph:
        nodes = list(g.nodes())
        index = {v: i for i, v in enumerate(nodes)}
        edges = ((index[u], index[v]) for u, v in g.edges())
        return cls.from_edges(len(nodes), edges, labels=nodes,
                              transitive=transitive, name=name)

    @property
    def n(self) -> int:
        return len(self.adjacency)

    def __len__(self) -> int:
        return self.n

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    @cached_property
    def max_degree(self) -> int:
        return max((len(a) for a in self.adjacency), default=0)

    @cached_property
    def num_edges(self) -> int:
        return sum(len(a) for a in self.adjacency) // 2

    def edges(self) -> list[tuple[int, int]]:
        return [(u, v) for u, nbrs in enumerate(self.adjacency) for v in nbrs if u < v]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self._neighbour_sets[u]

    @cached_property
    def _neighbour_sets(self) -> tuple[frozenset, ...]:
        return tuple(frozenset(a) for a in self.adjacency)

    @cached_property
    def csr(self) -> sparse.csr_matrix:
        rows = np.repeat(np.arange(self.n), [len(a) for a in self.adjacency])
        cols = np.fromiter((w for a in self.adjacency for w in a), dtype=np.int64,
                           count=len(rows))
        data = np.ones(len(rows), dtype=np.int8)
        return sparse.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        seen = {0}
        queue = deque([0])
        while queue:
            v = queue.popleft()
            for w in self.adjacency[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return len(seen) == self.n

    def to_networkx(self):
        import networkx as nx
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges())
        return g

    def vertex_of(self, label) -> int:
        if self.labels is None:
            raise ValueError("graph has no labels")
        return self._label_index[label]

    @cached_property
    def _label_index(self) -> dict:
        return {lab: i for i, lab in enumerate(self.labels)}

    def same_as(self, other: LabeledGraph) -> bool:
        """Vertex-, edge- and label-identical comparison."""
        if self.adjacency != other.adjacency or self.transitive != other.transitive:
            return False
        if (self.labels is None) != (other.labels is None):
            return False
        if self.labels is None:
            return True
        return [format_label(x) for x in self.labels] == [format_label(x) for x in other.labels]


# --- vtg text format -------------------------------------------------------

def format_label(label) -> str:
    if isinstance(label, tuple):
        return "(" + ",".join(format_label(x) for x in label) + ("," if len(label) == 1 else "") + ")"
    return str(label)


def _parse_label(text: str):
    if text.startswith("(") or text.lstrip("-").isdigit():
        try:
            return ast.literal_eval(text)
        except (ValueError, SyntaxError):
            pass
    return text


def dumps_vtg(graph: LabeledGraph) -> str:
    lines = [f"vtg 1 {graph.n}"]
    if graph.transitive:
        lines.append("# transitive")
    lines.extend(f"e {u} {v}" for u, v in graph.edges())
    if graph.labels is not None:
        lines.extend(f"l {v} {format_label(lab)}" for v, lab in enumerate(graph.labels))
    return "\n".join(lines) + "\n"


def loads_vtg(text: str, name: str = "") -> LabeledGraph:
    lines = text.splitlines()
    if not lines:
        raise GraphFormatError("empty vtg input")
    head = lines[0].split()
    if len(head) != 3 or head[0] != "vtg" or head[1] != "1":
        raise GraphFormatError(f"bad vtg header: {lines[0]!r}")
    try:
        n = int(head[2])
    except ValueError:
        raise GraphFormatError(f"bad vertex count: {head[2]!r}") from None
    edges, labels, transitive = [], {}, False
    for lineno, line in enumerate(lines[1:], start=2):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            if stripped[1:].strip() == "transitive":
                transitive = True
            continue
        kind, _, rest = stripped.partition(" ")
        try:
            if kind == "e":
                u, v = (int(x) for x in rest.split())
                if not (0 <= u < n and 0 <= v < n):
                    raise GraphFormatError(f"line {lineno}: vertex out of range")
                edges.append((u, v))
            elif kind == "l":
                v, _, lab = rest.partition(" ")
                labels[int(v)] = _parse_label(lab)
            else:
                raise GraphFormatError(f"line {lineno}: unknown record {kind!r}")
        except ValueError as exc:
            if isinstance(exc, GraphFormatError):
                raise
            raise GraphFormatError(f"line {lineno}: {exc}") from None
    if labels and len(labels) != n:
        raise GraphFormatError("labels must be given for all vertices or none")
    lab = tuple(labels[i] for i in range(n)) if labels else None
    return LabeledGraph.from_edges(n, edges, labels=lab, transitive=transitive, name=name)


def write_vtg(graph: LabeledGraph, path) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_vtg(graph))


def read_vtg(path) -> LabeledGraph:
    with open(path) as fh:
        return loads_vtg(fh.read(), name=str(path))


# --- catalog ---------------------------------------------------------------

def cycle_graph(n: int) -> LabeledGraph:
    if n < 3:
        raise ValueError("cycle needs at least 3 vertices")
    return LabeledGraph.from_edges(n, ((i, (i + 1) % n) for i in range(n)),
                                   labels=range(n), transitive=True, name=f"C{n}")


def complete_graph(n: int) -> LabeledGraph:
    edges = ((i, j) for i in range(n) for j in range(i + 1, n))
    return LabeledGraph.from_edges(n, edges, transitive=True, name=f"K{n}")


def star_graph(leaves: int) -> LabeledGraph:
    return LabeledGraph.from_edges(leaves + 1, ((0, i) for i in range(1, leaves + 1)),
                                   name=f"K1,{leaves}")


def torus_grid(*sizes: int) -> LabeledGraph:
    """Product of cycles C_{n1} x ... x C_{nk}; vertex labels are coordinates.

    Vertex index is the row-major index of the coordinate tuple.
    """
    shape = tuple(sizes)
    coords = list(np.ndindex(*shape))
    index = {c: i for i, c in enumerate(coords)}
    edges = []
    for c in coords:
        for axis, size in enumerate(shape):
            if size < 2:
                continue
            d = list(c)
            d[axis] = (d[axis] + 1) % size
            edges.append((index[c], index[tuple(d)]))
    return LabeledGraph.from_edges(len(coords), edges, labels=coords, transitive=True,
                                   name="x".join(f"C{s}" for s in shape))


def prism_graph(n: int) -> LabeledGraph:
    """C_n x K_2; vertex ``(i, layer)`` has index ``2*i + layer``."""
    edges = []
    for i in range(n):
        edges.append((2 * i, 2 * i + 1))
        for layer in (0, 1):
            edges.append((2 * i + layer, 2 * ((i + 1) % n) + layer))
    labels = [(i, layer) for i in range(n) for layer in (0, 1)]
    return LabeledGraph.from_edges(2 * n, edges, labels=labels, transitive=True,
                                   name=f"C{n}xK2")


def petersen_graph() -> LabeledGraph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    return LabeledGraph.from_edges(10, outer + spokes + inner, transitive=True,
                                   name="Petersen")


def regular_tree_ball(degree: int, radius: int) -> LabeledGraph:
    """Ball of the given radius in the ``degree``-regular tree, root = vertex 0."""
    edges = []
    frontier = [0]
    count = 1
    for depth in range(radius):
        nxt = []
        for v in frontier:
            children = degree if depth == 0 else degree - 1
            for _ in range(children):
                edges.append((v, count))
                nxt.append(count)
                count += 1
        frontier = nxt
    return LabeledGraph.from_edges(count, edges, name=f"T{degree}({radius})")


def random_regular_graph(degree: int, n: int, seed: int = 0) -> LabeledGraph:
    """Connected random ``degree``-regular graph (resampled until connected)."""
    import networkx as nx
    for attempt in range(100):
        g = nx.random_regular_graph(degree, n, seed=seed + attempt)
        if nx.is_connected(g):
            return LabeledGraph.from_edges(n, g.edges(), name=f"RR{degree}({n})")
    raise RuntimeError("could not sample a connected regular graph")


def vertex_transitive_catalog() -> list[LabeledGraph]:
    """Bundled vertex-transitive graphs used by the structure checks."""
    from .groups import heisenberg_cayley
    graphs = [cycle_graph(n) for n in (5, 12, 31)]
    graphs += [prism_graph(n) for n in (8, 25)]
    graphs += [torus_grid(6, 6), torus_grid(12, 12), torus_grid(5, 17)]
    graphs.append(petersen_graph())
    graphs.append(complete_graph(5))
    graphs += [heisenberg_cayley(n) for n in (3, 4, 5)]
    return graphs


def as_index_list(vertices: Sequence[int] | np.ndarray) -> list[int]:
    return [int(v) for v in vertices]
