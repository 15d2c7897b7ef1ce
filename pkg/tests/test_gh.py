import itertools
import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import gh_correspondences
from vtlimits.families import FamilySpec
from vtlimits.gh import (BRUTEFORCE_LIMIT, CertificationError, certify_family, circle_bound,
                         circle_certificate, circle_sample, gh_bruteforce, gh_estimate,
                         gh_lower_bounds, gh_lower_report, map_distortion)
from vtlimits.graph import (complete_graph, cycle_graph, prism_graph, random_regular_graph,
                            regular_tree_ball, star_graph)
from vtlimits.limits import circle_model, l1_torus_model
from vtlimits.metric import FiniteMetricSpace, diameter, multi_source_bfs


def space(d):
    return FiniteMetricSpace(np.asarray(d, dtype=float))


POINT = space([[0]])
PAIR = space([[0, 1], [1, 0]])
K3 = space([[0, 1, 1], [1, 0, 1], [1, 1, 0]])


def random_space(rng, n):
    """Shortest-path metric of random positive weights on the complete graph."""
    w = rng.uniform(0.2, 2.0, size=(n, n))
    w = np.round((w + w.T) / 2, 3)
    np.fill_diagonal(w, 0)
    for k in range(n):
        w = np.minimum(w, w[:, [k]] + w[[k], :])
    return space(w)


def small_spaces():
    rng = np.random.default_rng(7)
    out = [POINT, PAIR, K3]
    out += [FiniteMetricSpace.from_graph(g) for g in
            (cycle_graph(4), cycle_graph(5), cycle_graph(6), star_graph(3), complete_graph(4))]
    out += [random_space(rng, int(rng.integers(1, 7))) for _ in range(10)]
    return out


# --- map distortion --------------------------------------------------------

def test_identity_map_is_exact():
    for X in small_spaces():
        rep = map_distortion(X, X, np.arange(X.n))
        assert rep.eps == rep.distortion == rep.codensity == rep.gh_upper == 0


def test_cycle_into_circle_within_two_percent():
    X = FiniteMetricSpace.from_graph(cycle_graph(100))
    angles = np.arange(100) / 100
    rep = map_distortion(X, circle_model(), angles)
    assert rep.eps <= 0.02
    assert rep.distortion == pytest.approx(0.0, abs=1e-12)


def test_constant_map_from_pair():
    rep = map_distortion(PAIR, POINT, [0, 0])
    assert rep.eps >= 0.5
    # exhaustive: the only maps PAIR -> PAIR are constant or bijective
    best = min(map_distortion(PAIR, PAIR, f).eps for f in itertools.product(range(2), repeat=2)
               if len(set(f)) == 1)
    assert best >= 0.5


def test_distortion_monotone_under_restriction_to_image():
    rng = np.random.default_rng(3)
    for _ in range(20):
        X, Y = random_space(rng, 5), random_space(rng, 7)
        f = rng.integers(0, Y.n, size=X.n)
        image = np.unique(f)
        Yi = Y.sub(image)
        g = np.searchsorted(image, f)
        full, sub = map_distortion(X, Y, f), map_distortion(X, Yi, g)
        assert sub.distortion == pytest.approx(full.distortion)
        assert sub.eps <= full.eps + 1e-12
        assert sub.codensity == 0


# --- lower bounds and the exact oracle --------------------------------------

def test_lower_bound_examples():
    for X in small_spaces():
        assert gh_lower_bounds(X, X) == 0
    value, reason = gh_lower_report(POINT, PAIR)
    assert value == 0.5 and reason == "diameter gap"


def test_bruteforce_examples():
    assert gh_bruteforce(PAIR, PAIR) == 0
    assert gh_bruteforce(POINT, PAIR) == 0.5
    assert gh_bruteforce(K3, PAIR) == 0.5
    assert gh_bruteforce(K3, PAIR) == gh_correspondences(K3.d, PAIR.d)
    with pytest.raises(ValueError):
        gh_bruteforce(circle_sample(8), circle_sample(7))


def test_bruteforce_limit_is_fourteen():
    assert BRUTEFORCE_LIMIT == 14
    gh_bruteforce(circle_sample(7), circle_sample(7))


@pytest.mark.parametrize("nx,ny", [(1, 3), (2, 3), (3, 3), (2, 4), (3, 4)])
def test_bruteforce_matches_correspondence_enumeration(nx, ny):
    rng = np.random.default_rng(nx * 10 + ny)
    for _ in range(6):
        X, Y = random_space(rng, nx), random_space(rng, ny)
        assert gh_bruteforce(X, Y) == pytest.approx(gh_correspondences(X.d, Y.d), abs=1e-9)


def test_oracle_sandwich_on_many_pairs():
    rng = np.random.default_rng(11)
    pairs = 0
    for _ in range(60):
        nx = int(rng.integers(1, 8))
        ny = int(rng.integers(1, 15 - nx))
        X, Y = random_space(rng, nx), random_space(rng, ny)
        exact = gh_bruteforce(X, Y)
        low = gh_lower_bounds(X, Y)
        f = rng.integers(0, ny, size=nx)
        up = map_distortion(X, Y, f).gh_upper
        assert low <= exact + 1e-9 <= up + 2e-9
        pairs += 1
    assert pairs >= 50


def test_sandwich_on_graph_pairs():
    graphs = [cycle_graph(n) for n in range(3, 9)] + [star_graph(3), star_graph(4),
                                                      complete_graph(3), complete_graph(5)]
    spaces = [FiniteMetricSpace.from_graph(g) for g in graphs]
    for X, Y in itertools.combinations(spaces, 2):
        if X.n + Y.n > BRUTEFORCE_LIMIT:
            continue
        exact = gh_bruteforce(X, Y)
        assert gh_lower_bounds(X, Y) <= exact + 1e-9
        f = np.arange(X.n) % Y.n
        assert exact <= map_distortion(X, Y, f).gh_upper + 1e-9


def _fixture_six():
    rng = np.random.default_rng(5)
    return [POINT, PAIR, K3] + [random_space(rng, int(rng.integers(2, 7))) for _ in range(4)]


def test_bruteforce_symmetric_and_triangle():
    fx = _fixture_six()
    exact = {}
    for a, b in itertools.product(range(len(fx)), repeat=2):
        if fx[a].n + fx[b].n <= BRUTEFORCE_LIMIT:
            exact[a, b] = gh_bruteforce(fx[a], fx[b])
    for (a, b), v in exact.items():
        assert v == pytest.approx(exact[b, a])
        if a == b:
            assert v == 0
    for a, b, c in itertools.product(range(len(fx)), repeat=3):
        if (a, b) in exact and (b, c) in exact and (a, c) in exact:
            assert exact[a, c] <= exact[a, b] + exact[b, c] + 1e-9


@settings(max_examples=40)
@given(st.permutations(range(6)), st.integers(0, 10 ** 6))
def test_bruteforce_zero_on_isometric_copies(perm, seed):
    X = random_space(np.random.default_rng(seed), 6)
    p = np.asarray(perm)
    Y = space(X.d[np.ix_(p, p)])
    assert gh_bruteforce(X, Y) == 0
    assert gh_bruteforce(X, Y.rescaled(2.0)) > 0


def test_expander_lower_bound_positive():
    g = random_regular_graph(3, 512, seed=0)
    X = FiniteMetricSpace.from_graph(g)
    assert gh_lower_bounds(X, circle_sample(120)) > 0.05


def test_gh_estimate_uses_bruteforce_when_small():
    est = gh_estimate(POINT, PAIR, [0])
    assert est.lower == est.upper == 0.5 and est.lower_reason == "brute force"
    X = FiniteMetricSpace.from_graph(cycle_graph(40))
    est = gh_estimate(X, circle_sample(40), np.arange(40))
    assert 0 <= est.lower <= est.upper == pytest.approx(0.0)
    assert json.loads(est.to_json())["witness"]["gh_upper"] == est.upper


# --- circle certificate ----------------------------------------------------

def test_circle_bound_formula():
    assert circle_bound(100, 1, 51) == Fraction(3 + Fraction(1), 51) + Fraction(2, 100)
    assert circle_bound(100, 0, 50) == Fraction(1, 50) + Fraction(1, 50)
    # monotone in h and in 1/L
    assert circle_bound(40, 2, 20) > circle_bound(40, 1, 20)
    assert circle_bound(42, 0, 21) < circle_bound(40, 0, 20)


def test_cycle_certificate():
    for n in (50, 100, 200):
        cert = circle_certificate(cycle_graph(n), 0.5)
        assert (cert.L, cert.h, cert.D) == (n, 0, n // 2)
        assert cert.bound <= Fraction(4, n)
        assert cert.bound == Fraction(1, n // 2) + Fraction(2, n)


def test_prism_certificate():
    g = prism_graph(100)
    cert = circle_certificate(g)
    assert cert.L == 100 and cert.h == 1 and cert.D == 51
    assert int(multi_source_bfs(g, cert.cycle).max()) == cert.h
    # with D the true prism diameter (51), the formula is 4/51 + 1/51 + 1/50
    assert float(cert.bound) <= 0.1 + 1e-9
    d = json.loads(cert.to_json())
    assert d["L"] == 100 and Fraction(d["bound_exact"]) == cert.bound


def test_tree_ball_fails_certificate():
    with pytest.raises(CertificationError) as info:
        circle_certificate(regular_tree_ball(3, 6))
    assert info.value.stage in ("volume", "net", "cycle")
    with pytest.raises(CertificationError) as info:
        circle_certificate(regular_tree_ball(3, 6), strict=True)
    assert info.value.stage == "volume"


def _small_cycle_data(graph, cycle):
    h = int(multi_source_bfs(graph, cycle).max())
    return len(cycle), h, diameter(graph)


@pytest.mark.parametrize("graph,cycle", [(cycle_graph(n), list(range(n))) for n in range(3, 10)]
                         + [(prism_graph(n), list(range(0, 2 * n, 2))) for n in (3, 4, 5)])
def test_circle_bound_dominates_bruteforce(graph, cycle):
    """The formula bounds GH to the continuous circle; a sample of m points
    is within 1/m of it, so the exact value against the sample can exceed the
    formula by at most 1/m."""
    assert all(graph.has_edge(a, b) for a, b in zip(cycle, cycle[1:] + cycle[:1]))
    L, h, D = _small_cycle_data(graph, cycle)
    X = FiniteMetricSpace.from_graph(graph)
    bound = float(circle_bound(L, h, D))
    for m in range(2, BRUTEFORCE_LIMIT - X.n + 1):
        assert gh_bruteforce(X, circle_sample(m)) <= bound + 1 / m + 1e-9


# --- family certification --------------------------------------------------

def test_certify_cyclic_circle():
    cert = certify_family(FamilySpec.parse("cyclic"), circle_model(), [50, 100, 200, 400])
    assert cert.passed
    for n, b in zip([50, 100, 200, 400], cert.report.upper_bounds):
        assert b <= 4 / n


def test_certify_torus_two():
    cert = certify_family(FamilySpec.parse("torus-2"), l1_torus_model(2), [10, 20, 40])
    assert cert.passed
    for n, b in zip([10, 20, 40], cert.report.upper_bounds):
        assert b <= 5 / n


def test_certify_shifted_base():
    cert = certify_family(FamilySpec.parse("shifted-base-2"), l1_torus_model(2), [10, 20, 40])
    assert cert.passed
    ub = cert.report.upper_bounds
    assert all(b < a for a, b in zip(ub, ub[1:]))


def test_certify_fails_with_tight_tolerance():
    cert = certify_family(FamilySpec.parse("cyclic"), circle_model(), [50, 100], tol=1e-4)
    assert not cert.passed and "tol" in cert.reason


def test_certify_stage_names():
    with pytest.raises(CertificationError) as info:
        certify_family(FamilySpec.parse("random-3-regular"), circle_model(), [64, 128])
    assert info.value.stage == "net"


def test_lower_bounds_reported():
    cert = certify_family(FamilySpec.parse("cyclic"), circle_model(), [50, 100])
    for row in cert.report.rows:
        assert row.gh_lower is None or 0 <= row.gh_lower <= row.gh_upper
