"""Computable Gromov-Hausdorff bounds: map distortion, covering-based lower
bounds, an exact brute-force oracle for tiny spaces, circle certificates and
family certification."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from .graph import LabeledGraph
from .limits import ConvergenceReport, ConvergenceRow, TorusModel, convergence_table
from .metric import FiniteMetricSpace, covering_number, diameter, multi_source_bfs
from .structure import (LOG3_4, BudgetExhausted, net_decomposition, shortest_winding_loop)

ALPHA = math.sqrt(3) / 576
BRUTEFORCE_LIMIT = 14


class CertificationError(RuntimeError):
    """A named stage of a certification pipeline failed."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


# --- upper bounds ----------------------------------------------------------

@dataclass(frozen=True)
class DistortionReport:
    """``eps`` is the smallest value making the map an eps-approximation:
    ``(1-eps)d - eps <= d' <= (1+eps)d + eps`` on every pair and every point
    of the target within ``eps`` of the image."""

    eps: float
    distortion: float
    codensity: float
    gh_upper: float
    worst_pair: tuple[int, int] | None

    def to_dict(self) -> dict:
        return {"eps": self.eps, "distortion": self.distortion, "codensity": self.codensity,
                "gh_upper": self.gh_upper,
                "worst_pair": list(self.worst_pair) if self.worst_pair else None}


def map_distortion(X, Y, f, sources: Sequence[int] | None = None,
                   spacing: float | None = None) -> DistortionReport:
    """Distortion of ``f: X -> Y``.

    ``X`` exposes ``n``, ``scale`` and ``row(i)``. ``Y`` is a finite space
    (``f`` = index array) or a :class:`TorusModel` (``f`` = coordinates; the
    codensity then comes from a grid of step ``spacing`` plus its covering
    radius). ``sources`` restricts the pair scan to those rows, which is
    exact when both metrics and ``f`` are equivariant under a transitive group.
    """
    model = isinstance(Y, TorusModel)
    f = np.asarray(f, dtype=float if model else int)
    if model and f.ndim == 1:
        f = f[:, None]
    rows = range(X.n) if sources is None else sources
    eps_pair, dis, worst = 0.0, 0.0, None
    for i in rows:
        dx = X.row(i) / X.scale
        dy = Y.distances(f[i], f) if model else Y.d[f[i]][f]
        gap = np.abs(dx - dy)
        j = int(gap.argmax())
        if gap[j] > dis:
            dis, worst = float(gap[j]), (int(i), j)
        eps_pair = max(eps_pair, float((gap / (dx + 1)).max()))
    if model:
        if spacing is None:
            distinct = len(np.unique(np.round(f, 12), axis=0))
            spacing = 1 / (10 * distinct ** (1 / Y.dim))
        codens = Y.codensity(f, spacing)
    else:
        codens = float(Y.d[:, np.unique(f)].min(axis=1).max())
    return DistortionReport(max(eps_pair, codens), dis, codens, dis / 2 + codens, worst)


# --- lower bounds ----------------------------------------------------------

def _packing(space: FiniteMetricSpace, sep: float) -> int:
    """Greedy (index order) set with pairwise distance >= ``sep``."""
    d = space.d
    free = np.ones(space.n, dtype=bool)
    count = 0
    for i in range(space.n):
        if free[i]:
            count += 1
            free &= d[i] >= sep - 1e-12
    return count


def _covering_gap(X: FiniteMetricSpace, Y: FiniteMetricSpace, max_candidates: int = 48
                  ) -> float:
    """Largest eps with packing(X, 4 eps) > cover(Y, eps), or 0.

    If a correspondence has distortion ``2g``, two of the packed points land
    in one eps-ball of Y, so ``4 eps <= 2 eps + 2 g``.
    """
    cands = np.union1d(np.unique(X.d), np.unique(Y.d))
    cands = np.union1d(cands, cands / 4)
    if len(cands) > max_candidates:
        # any eps that passes the test is a valid bound, so a subset suffices
        cands = np.unique(np.quantile(cands, np.linspace(0, 1, max_candidates)))
    cands = sorted(cands.tolist(), reverse=True)
    for eps in cands:
        if eps <= 0:
            continue
        if _packing(X, 4 * eps) > covering_number(Y, eps).greedy_upper:
            return float(eps)
    return 0.0


def gh_lower_bounds(X: FiniteMetricSpace, Y: FiniteMetricSpace) -> float:
    return gh_lower_report(X, Y)[0]


def gh_lower_report(X: FiniteMetricSpace, Y: FiniteMetricSpace) -> tuple[float, str]:
    diam = abs(X.diameter - Y.diameter) / 2
    cover = max(_covering_gap(X, Y), _covering_gap(Y, X))
    if cover > diam:
        return cover, "covering gap"
    return diam, "diameter gap"


# --- exact oracle ----------------------------------------------------------

def _correspondence_within(dx, dy, t) -> bool:
    nx, ny = len(dx), len(dy)
    tol = t + 1e-12
    ok = np.abs(dx[:, None, :, None] - dy[None, :, None, :]) <= tol  # (x, y, x', y')
    chosen: list[tuple[int, int]] = []

    def fits(a, b):
        return all(ok[a, b, c, d] for c, d in chosen)

    def assign_y(j, covered):
        while j < ny and covered[j]:
            j += 1
        if j == ny:
            return True
        for a in range(nx):
            if fits(a, j):
                chosen.append((a, j))
                if assign_y(j + 1, covered):
                    return True
                chosen.pop()
        return False

    def assign_x(i, covered):
        if i == nx:
            return assign_y(0, covered)
        for b in range(ny):
            if fits(i, b):
                chosen.append((i, b))
                covered[b] += 1
                if assign_x(i + 1, covered):
                    return True
                covered[b] -= 1
                chosen.pop()
        return False

    return assign_x(0, [0] * ny)


def gh_bruteforce(X: FiniteMetricSpace, Y: FiniteMetricSpace) -> float:
    """Exact GH distance: half the least distortion of a correspondence.

    Binary search over the finitely many candidate distortions; each step
    backtracks over a map X -> Y and then over preimages of missed Y points.
    """
    if X.n + Y.n > BRUTEFORCE_LIMIT:
        raise ValueError(f"|X| + |Y| = {X.n + Y.n} exceeds {BRUTEFORCE_LIMIT}")
    dx, dy = X.d, Y.d
    cands = np.unique(np.abs(dx[:, None, :, None] - dy[None, :, None, :]).ravel())
    cands = np.unique(np.round(cands, 12))
    lo, hi = 0, len(cands) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _correspondence_within(dx, dy, cands[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(cands[lo]) / 2


@dataclass(frozen=True)
class GHEstimate:
    lower: float
    upper: float
    witness: DistortionReport | None
    lower_reason: str

    def to_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "lower_reason": self.lower_reason,
                "witness": self.witness.to_dict() if self.witness else None}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def gh_estimate(X: FiniteMetricSpace, Y: FiniteMetricSpace, f=None) -> GHEstimate:
    lower, reason = gh_lower_report(X, Y)
    witness = map_distortion(X, Y, f) if f is not None else None
    upper = witness.gh_upper if witness else max(X.diameter, Y.diameter) / 2
    if X.n + Y.n <= BRUTEFORCE_LIMIT:
        exact = gh_bruteforce(X, Y)
        return GHEstimate(exact, min(upper, exact), witness, "brute force")
    return GHEstimate(lower, upper, witness, reason)


def circle_sample(m: int) -> FiniteMetricSpace:
    """``m`` equally spaced points of the circle of diameter 1."""
    i = np.arange(m)
    gap = np.abs(i[:, None] - i[None, :])
    return FiniteMetricSpace(2 * np.minimum(gap, m - gap) / m, 1.0, name=f"S1[{m}]")


# --- circle certificates ---------------------------------------------------

@dataclass(frozen=True)
class CircleCertificate:
    cycle: tuple[int, ...]
    L: int
    h: int
    D: int
    bound: Fraction
    volume_ok: bool
    volume_limit: float
    size: int

    def to_dict(self) -> dict:
        return {"cycle": list(self.cycle), "L": self.L, "h": self.h, "D": self.D,
                "bound": float(self.bound), "bound_exact": str(self.bound),
                "volume_hypothesis": self.volume_ok, "volume_limit": self.volume_limit,
                "size": self.size}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def circle_bound(L: int, h: int, D: int) -> Fraction:
    """``((2h + 1) + |L/2 - D|) / D + 2/L``."""
    return (2 * h + 1 + abs(Fraction(L, 2) - D)) / Fraction(D) + Fraction(2, L)


def circle_certificate(graph: LabeledGraph, c_exponent: float = 1 / LOG3_4,
                       strict: bool = False) -> CircleCertificate:
    """Certify closeness of ``graph / diam`` to the circle of diameter 1.

    The volume hypothesis ``|X| < (alpha/d) D^(2-c)`` is recorded; with
    ``strict=True`` its failure aborts the pipeline.
    """
    D = diameter(graph)
    d = graph.max_degree
    limit = (ALPHA / d) * D ** (2 - c_exponent) if d else 0.0
    volume_ok = graph.n < limit
    if strict and not volume_ok:
        raise CertificationError("volume", f"|X| = {graph.n} >= {limit:.3g}")
    net = net_decomposition(graph)
    if not net.is_cycle:
        raise CertificationError("net", "ball graph H is not a cycle")
    try:
        loop = shortest_winding_loop(graph, net)
    except (BudgetExhausted, ValueError) as exc:
        raise CertificationError("cycle", str(exc)) from None
    if not loop.certified:
        raise CertificationError("cycle", "shortest winding loop is not geodesic")
    if loop.length <= D ** c_exponent:
        raise CertificationError("cycle", f"cycle length {loop.length} <= D^c")
    h = int(multi_source_bfs(graph, loop.vertices).max())
    return CircleCertificate(loop.vertices, loop.length, h, D,
                             circle_bound(loop.length, h, D), volume_ok, limit, graph.n)


# --- family certification --------------------------------------------------

@dataclass(frozen=True)
class Certification:
    report: ConvergenceReport
    passed: bool
    tolerance: float
    reason: str = ""
    certificates: tuple = field(default=(), repr=False)


def _model_sample(model: TorusModel, per_axis: int) -> FiniteMetricSpace:
    pts = model.grid(per_axis)
    return FiniteMetricSpace(model.pairwise(pts), 1.0, name=f"{model.name}[{len(pts)}]")


def _lower_vs_model(graph: LabeledGraph, model: TorusModel, limit: int = 1500) -> float | None:
    if graph.n > limit:
        return None
    X = FiniteMetricSpace.from_graph(graph)
    per_axis = max(4, int(round(120 ** (1 / model.dim))))
    S = _model_sample(model, per_axis)
    return max(0.0, gh_lower_bounds(X, S) - model.grid_radius(per_axis))


def certify_family(family, model: TorusModel, n_list: Sequence[int], tol: float = 0.1,
                   samples: int = 200, seed: int = 0) -> Certification:
    """GH upper bounds per ``n``: circle certificates for the circle model,
    map distortion of the comparison map for torus models. PASS iff the
    bounds strictly decrease and the last one is at most ``tol``."""
    ns = sorted(n_list)
    certs = []
    if model.name == "circle":
        rows = []
        for n in ns:
            try:
                graph = family.graph(n)
            except Exception as exc:  # noqa: BLE001 - reported with stage name
                raise CertificationError("build", str(exc)) from None
            cert = circle_certificate(graph)
            certs.append(cert)
            try:
                err = convergence_table(family, model, [n], samples, seed).rows[0].max_error
            except ValueError:
                err = float("nan")
            rows.append(ConvergenceRow(n, graph.n, cert.D, err, float(cert.bound),
                                       _lower_vs_model(graph, model)))
        report = ConvergenceReport(family.label, model.name, tuple(rows))
    else:
        try:
            report = convergence_table(family, model, ns, samples, seed)
        except ValueError as exc:
            raise CertificationError("comparison", str(exc)) from None
        rows = tuple(replace(r, gh_lower=_lower_vs_model(family.graph(r.n), model))
                     for r in report.rows)
        report = replace(report, rows=rows)
    ub = report.upper_bounds
    decreasing = all(b < a for a, b in zip(ub, ub[1:]))
    within = ub[-1] <= tol
    passed = decreasing and within
    reason = "" if passed else ("bounds not strictly decreasing" if not decreasing
                                else f"final bound {ub[-1]:.4g} > tol {tol}")
    return Certification(report, passed, tol, reason, tuple(certs))
