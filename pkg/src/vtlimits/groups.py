"""Exact finite groups, Cayley and Cayley-Abels graphs, and brute-force
checkers for a few structural facts about nilpotent groups.

Elements are plain hashable tuples in a canonical form chosen per group
variant, so sets and dicts of elements behave as expected.
"""

from __future__ import annotations

import itertools
import logging
import math
import warnings
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Hashable, Iterable, Sequence

from .graph import LabeledGraph

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 2_000_000
CHECK_BUDGET = 10_000

Element = Hashable


class BudgetExceeded(RuntimeError):
    pass


class NotGenerating(ValueError):
    pass


# --- lattices --------------------------------------------------------------

def hermite_normal_form(rows: Iterable[Sequence[int]], dim: int) -> list[list[int]]:
    """Row-style HNF of a full-rank integer lattice in Z^dim.

    Returns an upper-triangular ``dim x dim`` basis with positive diagonal and
    entries above each pivot reduced into ``[0, pivot)``.
    """
    pending = [list(map(int, r)) for r in rows if any(r)]
    for r in pending:
        if len(r) != dim:
            raise ValueError("row length does not match dimension")
    basis = []
    for col in range(dim):
        active = [r for r in pending if r[col] != 0]
        rest = [r for r in pending if r[col] == 0]
        if not active:
            raise ValueError("lattice is not full rank (infinite quotient)")
        while len(active) > 1:
            active.sort(key=lambda r: abs(r[col]))
            piv = active[0]
            nxt = [piv]
            for r in active[1:]:
                q = r[col] // piv[col]
                r = [a - q * b for a, b in zip(r, piv)]
                (nxt if r[col] != 0 else rest).append(r)
            active = nxt
        piv = active[0]
        if piv[col] < 0:
            piv = [-a for a in piv]
        basis.append(piv)
        pending = [r for r in rest if any(r)]
    for j in range(dim):
        for i in range(j):
            q = basis[i][j] // basis[j][j]
            if q:
                basis[i] = [a - q * b for a, b in zip(basis[i], basis[j])]
    return basis


def _reduce(vec, hnf):
    v = list(vec)
    for j, row in enumerate(hnf):
        q = v[j] // row[j]
        if q:
            for t in range(j, len(v)):
                v[t] -= q * row[t]
    return tuple(v)


# --- permutations ----------------------------------------------------------

def perm_mul(a, b):
    """``a*b`` acts as ``b`` first, then ``a`` (left action on points)."""
    return tuple(a[i] for i in b)


def perm_inv(a):
    out = [0] * len(a)
    for i, x in enumerate(a):
        out[x] = i
    return tuple(out)


def schreier_sims(degree: int, gens: Sequence[tuple[int, ...]]):
    """Deterministic Schreier-Sims. Returns ``(base, transversals)``.

    Each transversal maps an orbit point of ``base[i]`` to an element of the
    pointwise stabiliser of ``base[:i]`` sending ``base[i]`` there.
    """
    ident = tuple(range(degree))
    strong = [g for g in gens if g != ident]
    base: list[int] = []

    def build():
        for s in strong:
            if all(s[b] == b for b in base):
                base.append(next(i for i in range(degree) if s[i] != i))
        levels = []
        for i, b in enumerate(base):
            level_gens = [s for s in strong if all(s[x] == x for x in base[:i])]
            trans = {b: ident}
            queue = deque([b])
            while queue:
                x = queue.popleft()
                for s in level_gens:
                    y = s[x]
                    if y not in trans:
                        trans[y] = perm_mul(s, trans[x])
                        queue.append(y)
            levels.append((level_gens, trans))
        return levels

    def sift(h, levels, start):
        for j in range(start, len(base)):
            beta = h[base[j]]
            trans = levels[j][1]
            if beta not in trans:
                return h, j
            h = perm_mul(perm_inv(trans[beta]), h)
        return h, len(base)

    while True:
        levels = build()
        residue = None
        for i, (level_gens, trans) in enumerate(levels):
            for beta, u in trans.items():
                for s in level_gens:
                    h = perm_mul(perm_inv(trans[s[beta]]), perm_mul(s, u))
                    if h == ident:
                        continue
                    r, _ = sift(h, levels, i + 1)
                    if r != ident:
                        residue = r
                        break
                if residue is not None:
                    break
            if residue is not None:
                break
        if residue is None:
            return list(base), [trans for _, trans in levels]
        strong.append(residue)


# --- group variants --------------------------------------------------------

class GroupSpec:
    """Common interface. Subclasses define ``identity``, ``mul``, ``inv``,
    ``order`` and ``elements``."""

    abelian = False
    nilpotent_hint: bool | None = None

    def mul(self, a, b):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def order(self) -> int:
        raise NotImplementedError

    def elements(self, budget: int = DEFAULT_BUDGET) -> list:
        raise NotImplementedError

    def standard_generators(self) -> list:
        raise NotImplementedError

    def _check_budget(self, budget):
        if self.order() > budget:
            raise BudgetExceeded(f"group of order {self.order()} exceeds budget {budget}")

    def power(self, a, k: int):
        if k < 0:
            a, k = self.inv(a), -k
        result = self.identity
        while k:
            if k & 1:
                result = self.mul(result, a)
            a = self.mul(a, a)
            k >>= 1
        return result

    def element_order(self, a) -> int:
        k, x = 1, a
        while x != self.identity:
            x = self.mul(x, a)
            k += 1
        return k

    def commutator(self, a, b):
        """``[a, b] = a b a^-1 b^-1``."""
        return self.mul(self.mul(a, b), self.mul(self.inv(a), self.inv(b)))

    def conjugate(self, h, x):
        """``h^x = x^-1 h x``."""
        return self.mul(self.inv(x), self.mul(h, x))


@dataclass(frozen=True)
class CyclicPower(GroupSpec):
    """(Z/nZ)^k."""

    n: int
    k: int = 1
    abelian = True

    def __post_init__(self):
        if self.n < 2 or self.k < 1:
            raise ValueError("CyclicPower needs n >= 2 and k >= 1")

    @property
    def identity(self):
        return (0,) * self.k

    def mul(self, a, b):
        return tuple((x + y) % self.n for x, y in zip(a, b))

    def inv(self, a):
        return tuple(-x % self.n for x in a)

    def order(self):
        return self.n ** self.k

    def elements(self, budget=DEFAULT_BUDGET):
        self._check_budget(budget)
        return list(itertools.product(range(self.n), repeat=self.k))

    def element(self, *coords):
        return tuple(c % self.n for c in coords)

    def standard_generators(self):
        gens = []
        for i in range(self.k):
            e = [0] * self.k
            e[i] = 1
            gens.append(tuple(e))
        return gens

    def act(self, g, x):
        return self.mul(g, x)


@dataclass(frozen=True)
class AbelianQuotient(GroupSpec):
    """Z^m / L where L is spanned by the rows of ``basis``."""

    basis: tuple[tuple[int, ...], ...]
    abelian = True

    def __post_init__(self):
        basis = tuple(tuple(int(x) for x in row) for row in self.basis)
        object.__setattr__(self, "basis", basis)
        m = len(basis)
        if m == 0 or any(len(r) != m for r in basis):
            raise ValueError("lattice basis must be a non-empty square matrix")
        hnf = hermite_normal_form(basis, m)
        object.__setattr__(self, "hnf", tuple(tuple(r) for r in hnf))
        if self.order() < 2:
            raise ValueError("quotient is trivial")

    @property
    def rank(self) -> int:
        return len(self.basis)

    @property
    def identity(self):
        return (0,) * self.rank

    def reduce(self, v):
        return _reduce(v, self.hnf)

    def mul(self, a, b):
        return self.reduce([x + y for x, y in zip(a, b)])

    def inv(self, a):
        return self.reduce([-x for x in a])

    def order(self):
        return math.prod(self.hnf[i][i] for i in range(self.rank))

    def elements(self, budget=DEFAULT_BUDGET):
        self._check_budget(budget)
        return list(itertools.product(*(range(self.hnf[i][i]) for i in range(self.rank))))

    def standard_generators(self):
        gens = []
        for i in range(self.rank):
            e = [0] * self.rank
            e[i] = 1
            g = self.reduce(e)
            if g != self.identity:
                gens.append(g)
        return gens

    def act(self, g, x):
        return self.mul(g, x)


@dataclass(frozen=True)
class Heisenberg(GroupSpec):
    """Upper unipotent 3x3 matrices over Z/nZ as triples ``(a, b, c)``.

    ``(a,b,c)`` is the matrix with ``a`` at (1,2), ``b`` at (2,3) and ``c`` at
    (1,3), so ``(a,b,c)(a',b',c') = (a+a', b+b', c+c'+ab')``.
    """

    n: int
    nilpotent_hint = True

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("Heisenberg needs n >= 2")

    @property
    def identity(self):
        return (0, 0, 0)

    def mul(self, x, y):
        n = self.n
        return ((x[0] + y[0]) % n, (x[1] + y[1]) % n, (x[2] + y[2] + x[0] * y[1]) % n)

    def inv(self, x):
        n = self.n
        return (-x[0] % n, -x[1] % n, (x[0] * x[1] - x[2]) % n)

    def order(self):
        return self.n ** 3

    def elements(self, budget=DEFAULT_BUDGET):
        self._check_budget(budget)
        return list(itertools.product(range(self.n), repeat=3))

    def standard_generators(self):
        """The three elementary unipotents ``x, y`` and the central ``z``."""
        return [(1, 0, 0), (0, 1, 0), (0, 0, 1)]

    def act(self, g, x):
        return self.mul(g, x)


@dataclass(frozen=True)
class Dihedral(GroupSpec):
    """Symmetries of the regular n-gon; ``(r, f)`` is rotation^r flip^f."""

    n: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("Dihedral needs n >= 2")

    @property
    def identity(self):
        return (0, 0)

    def mul(self, x, y):
        sign = -1 if x[1] else 1
        return ((x[0] + sign * y[0]) % self.n, (x[1] + y[1]) % 2)

    def inv(self, x):
        return x if x[1] else (-x[0] % self.n, 0)

    def order(self):
        return 2 * self.n

    def elements(self, budget=DEFAULT_BUDGET):
        self._check_budget(budget)
        return [(r, f) for f in (0, 1) for r in range(self.n)]

    def standard_generators(self):
        return [(1, 0), (0, 1)]

    @property
    def points(self):
        return range(self.n)

    def act(self, g, i):
        """Natural action on the polygon's vertices ``0..n-1``."""
        return (g[0] + (-i if g[1] else i)) % self.n


@dataclass(frozen=True)
class Permutation(GroupSpec):
    """Subgroup of Sym(degree) generated by image tables ``generators``."""

    degree: int
    generators: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        gens = tuple(tuple(int(x) for x in g) for g in self.generators)
        object.__setattr__(self, "generators", gens)
        if self.degree < 2:
            raise ValueError("Permutation needs degree >= 2")
        for g in gens:
            if sorted(g) != list(range(self.degree)):
                raise ValueError(f"not a permutation of degree {self.degree}: {g}")

    @property
    def identity(self):
        return tuple(range(self.degree))

    def mul(self, a, b):
        return perm_mul(a, b)

    def inv(self, a):
        return perm_inv(a)

    @cached_property
    def _chain(self):
        return schreier_sims(self.degree, self.generators)

    def order(self):
        return math.prod(len(t) for t in self._chain[1])

    def elements(self, budget=DEFAULT_BUDGET):
        self._check_budget(budget)
        return sorted(subgroup_closure(self, self.generators, budget))

    def standard_generators(self):
        return list(self.generators)

    @property
    def points(self):
        return range(self.degree)

    def act(self, g, i):
        return g[i]


# --- generating sets -------------------------------------------------------

@dataclass(frozen=True)
class GenSet:
    """Symmetric generating set, optionally weighted.

    Use :func:`make_genset` to build one: it appends missing inverses (with a
    warning) and drops the identity.
    """

    elements: tuple
    weights: tuple[float, ...] | None = None

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def weight(self, i: int) -> float:
        return 1 if self.weights is None else self.weights[i]


def make_genset(spec: GroupSpec, elements: Iterable, weights: Sequence[float] | None = None,
                warn: bool = True) -> GenSet:
    elems = list(elements)
    if weights is not None:
        if len(weights) != len(elems):
            raise ValueError("one weight per generator expected")
        if any(w <= 0 for w in weights):
            raise ValueError("weights must be positive")
    out, out_w, seen = [], [], set()

    def add(g, w):
        if g == spec.identity or g in seen:
            return
        seen.add(g)
        out.append(g)
        out_w.append(w)

    for i, g in enumerate(elems):
        add(g, 1 if weights is None else weights[i])
    missing = [(g, w) for g, w in zip(list(out), list(out_w)) if spec.inv(g) not in seen]
    if missing and warn:
        warnings.warn(f"generating set not symmetric; adding {len(missing)} inverses",
                      stacklevel=2)
    for g, w in missing:
        add(spec.inv(g), w)
    return GenSet(tuple(out), None if weights is None else tuple(out_w))


def standard_genset(spec: GroupSpec) -> GenSet:
    return make_genset(spec, spec.standard_generators(), warn=False)


# --- subgroups -------------------------------------------------------------

def subgroup_closure(spec: GroupSpec, gens: Iterable, budget: int = DEFAULT_BUDGET) -> frozenset:
    gens = [g for g in gens if g != spec.identity]
    seen = {spec.identity}
    queue = deque([spec.identity])
    while queue:
        x = queue.popleft()
        for g in gens:
            y = spec.mul(x, g)
            if y not in seen:
                seen.add(y)
                if len(seen) > budget:
                    raise BudgetExceeded(f"subgroup exceeds budget {budget}")
                queue.append(y)
    return frozenset(seen)


def normal_closure(spec: GroupSpec, seeds: Iterable, group_gens: Sequence,
                   budget: int = DEFAULT_BUDGET) -> frozenset:
    """Smallest normal subgroup of ``<group_gens>`` containing ``seeds``."""
    generators = [s for s in dict.fromkeys(seeds) if s != spec.identity]
    sub = subgroup_closure(spec, generators, budget)
    while True:
        new = []
        for g in group_gens:
            for t in generators:
                c = spec.conjugate(t, g)
                if c not in sub:
                    new.append(c)
        if not new:
            return sub
        generators.extend(dict.fromkeys(new))
        sub = subgroup_closure(spec, generators, budget)


def derived_subgroup(spec: GroupSpec, gens: Sequence, budget: int = DEFAULT_BUDGET) -> frozenset:
    comms = [spec.commutator(a, b) for a in gens for b in gens]
    return normal_closure(spec, comms, gens, budget)


def lower_central_series(spec: GroupSpec, gens: Sequence | None = None, max_terms: int = 64,
                         budget: int = DEFAULT_BUDGET) -> list[frozenset]:
    """``[G, [G, G], ...]`` until it stabilises."""
    gens = list(gens or spec.standard_generators())
    current = frozenset(spec.elements(budget))
    series = [current]
    for _ in range(max_terms):
        seeds = [spec.commutator(s, t) for s in gens for t in current]
        nxt = normal_closure(spec, seeds, gens, budget)
        if nxt == current:
            break
        series.append(nxt)
        current = nxt
    return series


def nilpotency_class(spec: GroupSpec, gens: Sequence | None = None,
                     budget: int = DEFAULT_BUDGET) -> int | None:
    """Step ``l`` with ``C^l = 1``; ``None`` if not nilpotent."""
    series = lower_central_series(spec, gens, budget=budget)
    if len(series[-1]) != 1:
        return None
    return len(series) - 1


def is_normal(spec: GroupSpec, subgroup: frozenset, gens: Sequence) -> bool:
    return all(spec.conjugate(h, g) in subgroup for g in gens for h in subgroup)


# --- Cayley graphs ---------------------------------------------------------

def enumerate_by_words(spec: GroupSpec, gens: Sequence, budget: int = DEFAULT_BUDGET):
    """BFS over ``<gens>`` from the identity; returns elements in BFS order."""
    order = [spec.identity]
    index = {spec.identity: 0}
    head = 0
    while head < len(order):
        x = order[head]
        head += 1
        for s in gens:
            y = spec.mul(x, s)
            if y not in index:
                index[y] = len(order)
                order.append(y)
                if len(order) > budget:
                    raise BudgetExceeded(f"more than {budget} elements reached")
    return order, index


def build_cayley(spec: GroupSpec, gens: GenSet | None = None,
                 budget: int = DEFAULT_BUDGET) -> LabeledGraph:
    """Cayley graph with edges ``{g, g s}``; vertex 0 is the identity."""
    gens = gens or standard_genset(spec)
    total = spec.order()
    if total > budget:
        raise BudgetExceeded(f"group of order {total} exceeds vertex budget {budget}")
    elems, index = enumerate_by_words(spec, gens.elements, budget)
    if len(elems) != total:
        raise NotGenerating(f"generators reach {len(elems)} of {total} elements")
    edges = []
    for i, x in enumerate(elems):
        for s in gens.elements:
            j = index[spec.mul(x, s)]
            if i < j:
                edges.append((i, j))
    return LabeledGraph.from_edges(len(elems), edges, labels=elems, transitive=True,
                                   name=f"Cay({spec})")


def heisenberg_cayley(n: int) -> LabeledGraph:
    spec = Heisenberg(n)
    return build_cayley(spec, standard_genset(spec))


@dataclass(frozen=True, eq=False)
class CayleyAbels:
    """Cayley-Abels graph ``(G, H, S)`` with the data needed to check it."""

    spec: GroupSpec
    graph: LabeledGraph
    base_point: Hashable
    stabilizer: frozenset
    gens: GenSet
    elements: tuple
    projection: dict = field(repr=False)
    action: Callable = field(repr=False)

    def cayley(self) -> LabeledGraph:
        return build_cayley(self.spec, self.gens)

    def verify_qi(self) -> dict:
        """Compare word length in ``(G, S)`` with distance to the base vertex.

        Both metrics are left-invariant, so distances from the identity
        determine every pair. Returns measured constants and whether balls of
        radius >= 2 project onto balls.
        """
        from .metric import bfs
        cay = self.cayley()
        dg = bfs(cay, 0).dist
        dx = bfs(self.graph, 0).dist
        gaps = []
        lipschitz = True
        for v, g in enumerate(cay.labels):
            a, b = int(dx[self.projection[g]]), int(dg[v])
            lipschitz &= a <= b
            gaps.append(b - a)
        radius = int(dg.max())
        balls_ok = True
        for r in range(2, radius + 1):
            img = {self.projection[g] for v, g in enumerate(cay.labels) if dg[v] <= r}
            ball = {int(u) for u in (dx <= r).nonzero()[0]}
            balls_ok &= img == ball
        return {"multiplicative": 1 if lipschitz else None, "additive": max(gaps),
                "lipschitz": lipschitz, "balls_project": balls_ok,
                "holds": lipschitz and max(gaps) <= 2}


def build_cayley_abels(spec: GroupSpec, base_point, gens: GenSet | None = None,
                       action: Callable | None = None, points: Iterable | None = None,
                       budget: int = DEFAULT_BUDGET) -> CayleyAbels:
    """Quotient of the Cayley graph by the stabiliser ``H`` of ``base_point``.

    ``gens`` is closed to ``H S H`` first. ``action(g, p)`` defaults to the
    spec's own ``act``; ``points`` defaults to ``spec.points`` and is only
    used to detect intransitive actions.
    """
    action = action or spec.act
    gens = gens or standard_genset(spec)
    stab = frozenset(g for g in spec.elements(budget) if action(g, base_point) == base_point)
    closed = list(dict.fromkeys(spec.mul(spec.mul(h, s), k)
                                for s in gens.elements for h in stab for k in stab))
    closed_gens = make_genset(spec, closed, warn=False)
    elems, _ = enumerate_by_words(spec, closed_gens.elements, budget)
    if len(elems) != spec.order():
        raise NotGenerating(f"H S H reaches {len(elems)} of {spec.order()} elements")
    orbit: dict = {}
    reps = []
    for g in elems:
        p = action(g, base_point)
        if p not in orbit:
            orbit[p] = len(reps)
            reps.append(g)
    if points is None:
        points = getattr(spec, "points", None)
    if points is not None and set(points) != set(orbit):
        raise ValueError("action is not transitive")
    if len(reps) == 1:
        raise ValueError("trivial Cayley-Abels graph (|G/H| = 1)")
    edges = []
    for i, g in enumerate(reps):
        for s in closed_gens.elements:
            edges.append((i, orbit[action(spec.mul(g, s), base_point)]))
    labels = sorted(orbit, key=orbit.get)
    graph = LabeledGraph.from_edges(len(reps), edges, labels=labels, transitive=True,
                                    name=f"CayAbels({spec})")
    projection = {g: orbit[action(g, base_point)] for g in elems}
    return CayleyAbels(spec, graph, base_point, stab, closed_gens, tuple(elems),
                       projection, action)


@dataclass(frozen=True, eq=False)
class FiniteIndexSubgraph:
    graph: LabeledGraph
    orbit: tuple[int, ...]
    m: int
    multiplicative: float
    additive: int
    degree_bound: int

    @property
    def within_lemma(self) -> bool:
        return (self.multiplicative <= 2 * self.m + 1 and self.additive <= self.m
                and self.graph.max_degree <= self.degree_bound)


def finite_index_subgraph(graph: LabeledGraph, orbit: Iterable[int], m: int) -> FiniteIndexSubgraph:
    """Graph on ``orbit`` joining vertices at distance <= 2m+1 in ``graph``."""
    from .metric import bfs, multi_source_bfs
    orbit = tuple(sorted(set(int(v) for v in orbit)))
    if not orbit:
        raise ValueError("orbit must be non-empty")
    if m < 1:
        raise ValueError("m must be >= 1")
    density = int(multi_source_bfs(graph, orbit).max())
    if density > m:
        raise ValueError(f"orbit is only {density}-dense, not {m}-dense")
    pos = {v: i for i, v in enumerate(orbit)}
    dx = {v: bfs(graph, v).dist for v in orbit}
    reach = 2 * m + 1
    edges = [(pos[u], pos[v]) for u in orbit for v in orbit if u < v and dx[u][v] <= reach]
    sub = LabeledGraph.from_edges(len(orbit), edges, labels=orbit,
                                  name=f"{graph.name}|orbit,m={m}")
    dsub = {i: bfs(sub, i).dist for i in range(len(orbit))}
    worst = 1.0
    for u in orbit:
        for v in orbit:
            if u < v:
                a, b = int(dx[u][v]), int(dsub[pos[u]][pos[v]])
                worst = max(worst, a / b, b / a)
    bound = graph.max_degree ** reach
    if sub.max_degree > bound:
        raise AssertionError("degree bound d^(2m+1) violated")
    return FiniteIndexSubgraph(sub, orbit, m, worst, density, bound)


# --- abelianisation --------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Abelianization:
    spec: GroupSpec
    gens: GenSet
    project: Callable = field(repr=False)

    def __iter__(self):
        return iter((self.spec, self.gens))


def abelianize(spec: GroupSpec, gens: GenSet | None = None,
               budget: int = DEFAULT_BUDGET) -> Abelianization:
    """Abelian quotient ``G/[G,G]`` with the projected generating set."""
    gens = gens or standard_genset(spec)
    if spec.abelian:
        return Abelianization(spec, gens, lambda g: g)
    if isinstance(spec, Heisenberg):
        target = CyclicPower(spec.n, 2)
        project = lambda g: (g[0], g[1])  # noqa: E731
    elif isinstance(spec, Dihedral):
        if spec.n % 2:
            target = CyclicPower(2, 1)
            project = lambda g: (g[1],)  # noqa: E731
        else:
            target = CyclicPower(2, 2)
            project = lambda g: (g[0] % 2, g[1])  # noqa: E731
    else:
        target, project = _abelianize_generic(spec, gens, budget)
    images = [project(g) for g in gens.elements]
    return Abelianization(target, make_genset(target, images, warn=False), project)


def _abelianize_generic(spec, gens, budget):
    base = []
    for g in gens.elements:
        if spec.inv(g) not in base:
            base.append(g)
    derived = derived_subgroup(spec, gens.elements, budget)
    elems = spec.elements(budget)
    if len(elems) // len(derived) == 1:
        raise ValueError("group is perfect; abelianisation is trivial")
    coset_of = {}
    reps = []
    for g in elems:
        if g in coset_of:
            continue
        for d in derived:
            coset_of[spec.mul(g, d)] = len(reps)
        reps.append(g)
    k = len(base)
    # spanning tree of the quotient Cayley graph gives a coordinate for each coset
    coord = {coset_of[spec.identity]: (0,) * k}
    rep_of = {coset_of[spec.identity]: spec.identity}
    queue = deque([coset_of[spec.identity]])
    relations = []
    while queue:
        c = queue.popleft()
        for i, s in enumerate(base):
            t = coset_of[spec.mul(rep_of[c], s)]
            step = tuple(x + (1 if j == i else 0) for j, x in enumerate(coord[c]))
            if t not in coord:
                coord[t] = step
                rep_of[t] = spec.mul(rep_of[c], s)
                queue.append(t)
            else:
                relations.append(tuple(a - b for a, b in zip(step, coord[t])))
    target = AbelianQuotient(tuple(map(tuple, hermite_normal_form(relations, k))))
    lookup = {c: target.reduce(v) for c, v in coord.items()}
    return target, lambda g: lookup[coset_of[g]]


# --- desk-scale checks -----------------------------------------------------

@dataclass(frozen=True)
class CommutatorWidthReport:
    holds: bool
    steps: int
    width: int | None
    derived_order: int
    reached: tuple[int, ...]


def commutator_width_check(spec: GroupSpec, steps: int, budget: int = CHECK_BUDGET
                           ) -> CommutatorWidthReport:
    """Is every element of ``[G, G]`` a product of at most ``steps`` commutators?"""
    if spec.order() > budget:
        raise BudgetExceeded(f"|G| = {spec.order()} exceeds check budget {budget}")
    elems = spec.elements(budget)
    comms = {spec.commutator(a, b) for a in elems for b in elems}
    derived = subgroup_closure(spec, comms)
    products = {spec.identity}
    reached = [1]
    width = 0 if len(derived) == 1 else None
    frontier = products
    for j in range(1, max(steps, 1) + len(derived) if width is None else 1):
        frontier = {spec.mul(p, c) for p in frontier for c in comms} | frontier
        reached.append(len(frontier))
        if len(frontier) == len(derived):
            width = j
            break
        if reached[-1] == reached[-2]:
            break
    holds = width is not None and width <= steps
    return CommutatorWidthReport(holds, steps, width, len(derived), tuple(reached))


@dataclass(frozen=True)
class NormalClosureReport:
    holds: bool
    radius: int
    closure_order: int
    bounded_order: int
    conjugates: int


def normal_closure_bounded_check(spec: GroupSpec, gens: GenSet, h, steps: int,
                                 budget: int = CHECK_BUDGET) -> NormalClosureReport:
    """Is ``<<h>>`` generated by ``h^x`` with ``|x|`` at most ``4^steps``
    in the word metric of ``S u {h, h^-1}``?"""
    if spec.order() > budget:
        raise BudgetExceeded(f"|G| = {spec.order()} exceeds check budget {budget}")
    step = nilpotency_class(spec, gens.elements, budget)
    if step is None:
        raise ValueError("group is not nilpotent")
    if step > steps:
        raise ValueError(f"group has step {step} > {steps}")
    closure = normal_closure(spec, [h], gens.elements, budget)
    radius = 4 ** steps
    letters = list(dict.fromkeys(list(gens.elements) + [h, spec.inv(h)]))
    ball = {spec.identity}
    frontier = [spec.identity]
    for _ in range(radius):
        nxt = []
        for x in frontier:
            for s in letters:
                y = spec.mul(x, s)
                if y not in ball:
                    ball.add(y)
                    nxt.append(y)
        if not nxt:
            break
        frontier = nxt
    conj = {spec.conjugate(h, x) for x in ball}
    bounded = subgroup_closure(spec, conj, budget)
    return NormalClosureReport(bounded == closure, radius, len(closure), len(bounded), len(conj))


@dataclass(frozen=True)
class StabilizerReport:
    holds: bool
    stabilizer_order: int
    degree: int
    rank: int
    step: int
    prime_torsion: dict
    bound: int


def _prime_powers(k: int) -> dict[int, int]:
    out, p = {}, 2
    while p * p <= k:
        while k % p == 0:
            out[p] = out.get(p, 1) * p
            k //= p
        p += 1
    if k > 1:
        out[k] = out.get(k, 1) * k
    return out


def stabilizer_bound_check(cab: CayleyAbels, rank: int, steps: int) -> StabilizerReport:
    """Compare the stabiliser's p-torsion with ``d ** 4 ** (steps + 1)``.

    ``rank`` is recorded but not computed.
    """
    spec = cab.spec
    points = list(cab.graph.labels)
    kernel = [g for g in cab.elements
              if g != spec.identity and all(cab.action(g, p) == p for p in points)]
    if kernel:
        raise ValueError(f"action is not faithful: kernel has {len(kernel) + 1} elements")
    step = nilpotency_class(spec, cab.gens.elements)
    if step is None:
        raise ValueError("group is not nilpotent")
    if step > steps:
        raise ValueError(f"group has step {step} > {steps}")
    torsion: dict[int, int] = {}
    for h in cab.stabilizer:
        for p, q in _prime_powers(spec.element_order(h)).items():
            torsion[p] = max(torsion.get(p, 1), q)
    d = cab.graph.max_degree
    bound = d ** (4 ** (steps + 1))
    holds = all(q <= bound for q in torsion.values())
    return StabilizerReport(holds, len(cab.stabilizer), d, rank, step, torsion, bound)
