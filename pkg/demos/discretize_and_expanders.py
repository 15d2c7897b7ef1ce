"""Net graphs of circle samples and the covering-number diagnostic that
separates expanders from cycles."""

from vtlimits import FiniteMetricSpace, covering_number
from vtlimits.discretize import circle_points, discretize, sample_model, sample_space
from vtlimits.graph import cycle_graph, random_regular_graph

pts = circle_points(1000)
sample = sample_space(pts, "circle")
model = sample_model("circle")
print("t      net  mult   GH(net, circle)")
for t in (0.4, 0.2, 0.1, 0.05):
    r = discretize(sample, t, model, pts)
    print(f"{t:<6} {r.net_size:<4} {r.qi.multiplicative:.3f}  {r.gh_subspace:.4f}")

print("\ncovering number at eps = diam/10")
print("n      random-3-regular  cycle")
for k in range(7, 12):
    n = 2 ** k
    rr = covering_number(FiniteMetricSpace.from_graph(random_regular_graph(3, n)), 0.1)
    cy = covering_number(FiniteMetricSpace.from_graph(cycle_graph(n)), 0.1)
    print(f"{n:<6} {rr.greedy_upper:<17} {cy.greedy_upper}")
