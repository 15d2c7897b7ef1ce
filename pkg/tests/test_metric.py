import json
import random

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import floyd_warshall, heisenberg_words, radius_of_freedom_bruteforce
from vtlimits.graph import LabeledGraph, complete_graph, cycle_graph, random_regular_graph, \
    regular_tree_ball, torus_grid
from vtlimits.groups import AbelianQuotient, CyclicPower, Dihedral, heisenberg_cayley, \
    make_genset, standard_genset
from vtlimits.metric import (UNREACHED, DisconnectedGraph, FiniteMetricSpace, GraphMetric,
                             GrowthProfile, ProfileTooShort, bfs, covering_number, diameter,
                             distance_matrix, doubling_report, growth_exponent, growth_profile,
                             radius_of_freedom, weighted_word_length)


def test_bfs_examples():
    assert bfs(cycle_graph(12), 0).dist[6] == 6
    h = heisenberg_cayley(3)
    df = bfs(h, 0)
    assert df.eccentricity == diameter(h)
    g = LabeledGraph.from_edges(4, [(0, 1), (2, 3)])
    df = bfs(g, 0)
    assert not df.connected
    assert df.dist.tolist() == [0, 1, UNREACHED, UNREACHED]
    with pytest.raises(DisconnectedGraph):
        diameter(g)


@given(st.integers(3, 14), st.lists(st.tuples(st.integers(0, 13), st.integers(0, 13)),
                                    max_size=40))
def test_distance_matrix_vs_floyd_warshall(n, pairs):
    edges = [(u % n, v % n) for u, v in pairs if u % n != v % n]
    g = LabeledGraph.from_edges(n, edges)
    fw = floyd_warshall(n, g.edges())
    want = [[UNREACHED if x == float("inf") else int(x) for x in row] for row in fw]
    assert distance_matrix(g).tolist() == want


@given(st.integers(3, 14), st.lists(st.tuples(st.integers(0, 13), st.integers(0, 13)),
                                    max_size=40))
def test_bfs_field_invariants(n, pairs):
    edges = [(u % n, v % n) for u, v in pairs if u % n != v % n]
    g = LabeledGraph.from_edges(n, edges)
    d = bfs(g, 0).dist
    assert d[0] == 0
    for u, v in g.edges():
        if d[u] >= 0 and d[v] >= 0:
            assert abs(int(d[u]) - int(d[v])) <= 1
        else:
            assert d[u] == d[v] == UNREACHED


def test_diameter_examples():
    for n in (3, 8, 13, 40):
        assert diameter(cycle_graph(n)) == n // 2
    for n in (3, 6, 9, 12):
        spec = CyclicPower(n, 2)
        g = LabeledGraph.from_edges(n * n, nx.convert_node_labels_to_integers(
            nx.grid_2d_graph(n, n, periodic=True)).edges())
        assert diameter(g) == 2 * (n // 2)
        from vtlimits.groups import build_cayley
        assert diameter(build_cayley(spec)) == 2 * (n // 2)


def test_diameter_transitive_vs_all_sources():
    for g in (heisenberg_cayley(4), torus_grid(5, 7), cycle_graph(31)):
        all_src = int(distance_matrix(g).max())
        assert diameter(g) == all_src


def test_diameter_non_transitive_uses_all_sources():
    # path 0-1-2-3-4 is not transitive; eccentricity of vertex 2 is 2 but diameter is 4
    g = LabeledGraph.from_edges(5, [(i, i + 1) for i in range(4)])
    assert diameter(g) == 4


def test_heisenberg_diameter_band():
    ratios = [diameter(heisenberg_cayley(n)) / n for n in range(4, 17)]
    assert max(ratios) / min(ratios) <= 2


def test_growth_profiles():
    p = growth_profile(cycle_graph(20))
    assert all(p.ball(r) == 2 * r + 1 for r in range(10))
    assert p.sizes[-1] == 20 and p.ball(100) == 20
    t = growth_profile(regular_tree_ball(3, 5))
    assert t.ball(2) == 10


def test_growth_profile_heisenberg_matches_matrix_oracle():
    p = growth_profile(heisenberg_cayley(8))
    assert list(p.sizes) == heisenberg_words(8, p.r_max)
    # frozen from the oracle profile (1, 7, 29, 83, 186, 354, 472, 504, 512)
    assert growth_exponent(p, 1, 4) == pytest.approx(2.3509, abs=1e-3)


@given(st.integers(3, 30), st.integers(1, 200))
def test_growth_profile_monotone(n, seed):
    g = random_regular_graph(3, 2 * n, seed=seed)
    p = growth_profile(g)
    assert p.sizes[0] == 1 and p.sizes[-1] == g.n
    assert all(a < b for a, b in zip(p.sizes, p.sizes[1:]))


def test_doubling_examples():
    r = doubling_report(growth_profile(cycle_graph(1000)), 1, 100)
    assert r.witness_radius == 1 and r.ratios[0] == (1, 67.0) and r.K == 10 ** 4
    assert all(x >= 1 for _, x in r.ratios)
    tree = GrowthProfile.from_counts([3 * 2 ** k - 2 for k in range(301)])
    rt = doubling_report(tree, 1, 100)
    assert rt.witness_radius is None and rt.ratios
    rc = doubling_report(growth_profile(complete_graph(7)), 1, 100)
    assert rc.witness_radius == 1 and rc.ratios[0][1] == 1.0
    d = json.loads(r.to_json())
    assert set(d) == {"factor", "q", "K", "witness_radius", "ratios"}
    with pytest.raises(ProfileTooShort):
        doubling_report(GrowthProfile.from_counts([1, 3, 5]), 1, 100)


def test_doubling_witness_satisfies_inequality():
    p = growth_profile(torus_grid(30, 30))
    r = doubling_report(p, 2, 2)
    R = r.witness_radius
    assert p.ball(2 * R) <= r.K * p.ball(R)


def test_finite_metric_space_axioms():
    S = FiniteMetricSpace.from_graph(heisenberg_cayley(4))
    assert S.diameter == 1.0 and S.check_metric()
    bad = FiniteMetricSpace(np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]]))
    assert not bad.check_metric()
    big = FiniteMetricSpace.from_graph(torus_grid(25, 25))
    assert big.check_metric()


def test_graph_metric_rows_match_dense():
    g = torus_grid(6, 9)
    gm = GraphMetric(g)
    dense = gm.dense()
    for i in (0, 7, 33):
        assert np.array_equal(gm.row(i), dense.row(i))
    assert gm.scale == diameter(g)


def test_covering_examples():
    S = FiniteMetricSpace.from_graph(cycle_graph(100))
    rep = covering_number(S, 0.1)
    assert rep.greedy_upper <= 11 and rep.packing_lower >= 5
    assert rep.packing_lower <= rep.greedy_upper
    assert covering_number(S, 1.0).greedy_upper == 1
    assert set(rep.to_dict()) == {"eps", "greedy_upper", "packing_lower"}


def test_covering_grows_on_random_graphs():
    counts = [covering_number(FiniteMetricSpace.from_graph(random_regular_graph(3, 2 ** k)),
                              0.1).greedy_upper for k in range(8, 12)]
    assert counts == sorted(counts) and counts[0] < counts[-1]


@given(st.integers(4, 40), st.floats(0.05, 1.0))
def test_covering_is_valid(n, eps):
    S = FiniteMetricSpace.from_graph(cycle_graph(n))
    rep = covering_number(S, eps)
    d = S.d
    assert (d[:, list(rep.centers)].min(axis=1) <= eps + 1e-12).all()
    P = list(rep.packing)
    assert all(d[a, b] > 2 * eps for a in P for b in P if a != b)
    assert rep.packing_lower <= rep.greedy_upper


# --- radius of freedom ------------------------------------------------------

def test_radius_of_freedom_examples():
    z10 = CyclicPower(10, 1)
    assert radius_of_freedom(z10, [(1,), (3,)]) == 1
    assert radius_of_freedom(CyclicPower(2, 1), [(1,)]) == 0
    for n in range(2, 31):
        assert radius_of_freedom(CyclicPower(n, 1), [(1,)]) == -(-n // 2) - 1
    with pytest.raises(ValueError):
        radius_of_freedom(Dihedral(4), [(1, 0)])


def _random_quotient(rng, k):
    while True:
        rows = [[rng.randint(-4, 4) for _ in range(k)] for _ in range(k)]
        for i in range(k):
            rows[i][i] = rng.randint(2, 7)
        det = round(abs(np.linalg.det(np.array(rows, dtype=float))))
        if 2 <= det <= 400:
            return AbelianQuotient(tuple(map(tuple, rows)))


def test_radius_of_freedom_matches_bruteforce():
    rng = random.Random(7)
    checked = 0
    while checked < 24:
        k = rng.randint(1, 3)
        q = _random_quotient(rng, k)
        gens = [tuple(int(i == j) for j in range(k)) for i in range(k)]
        limit = 20 if k < 3 else 12
        want = radius_of_freedom_bruteforce(lambda v: q.reduce(list(v)) == q.identity, k, limit)
        if want is None or 2 * (want + 1) > limit:
            continue
        assert radius_of_freedom(q, gens) == want, q
        checked += 1


# --- weighted word length ---------------------------------------------------

@pytest.mark.parametrize("n", [10, 20, 30])
def test_sandwich_dihedral(n):
    d = Dihedral(n)
    rep = weighted_word_length(d, make_genset(d, [(1, 0), (0, 1)], warn=False),
                               lambda g: g[1] == 0)
    assert rep.holds and rep.checked == n and rep.index == 2
    assert rep.bound == 2 * 2 * 3 ** 2 == 36


def test_sandwich_abelian_is_exact():
    z = CyclicPower(12, 1)
    rep = weighted_word_length(z, standard_genset(z), z.elements())
    assert rep.index == 1 and rep.max_slack == 0 and rep.min_slack == 0


def test_sandwich_errors():
    d = Dihedral(5)
    U = standard_genset(d)
    with pytest.raises(ValueError):
        weighted_word_length(d, U, [(0, 0), (0, 1)])  # not normal
    with pytest.raises(ValueError):
        weighted_word_length(d, U, [(0, 0), (1, 0)])  # not a subgroup


def test_cycle_covering_is_exact_and_bounded():
    # a radius-r ball on C_n holds 2r + 1 vertices, so ceil(n / (2r + 1)) is exact;
    # at eps = diam/10 it stays in {10, 11} but is not constant in n
    for n in [2 ** k for k in range(7, 13)] + [100, 200, 400]:
        r = (n // 2) // 10
        rep = covering_number(FiniteMetricSpace.from_graph(cycle_graph(n)), 0.1)
        assert rep.greedy_upper == -(-n // (2 * r + 1))
        assert 10 <= rep.greedy_upper <= 11
