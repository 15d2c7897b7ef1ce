"""Abelian families against the flat l1 torus, then Heisenberg diameters,
central-fibre diameters and a growth fit at small n."""

from vtlimits import FamilySpec, convergence_table, l1_torus_model
from vtlimits.limits import heisenberg_fiber_stats
from vtlimits.metric import growth_exponent, growth_profile

model = l1_torus_model(2)
for name, ns in (("torus-2", [10, 20, 40]), ("shifted-base-2", [10, 20, 40])):
    report = convergence_table(FamilySpec.parse(name), model, ns)
    print(f"# {name} vs {model.name}")
    print(report.to_csv(), end="")

print("# Heisenberg mod n: diameter/n and central fibre diameter/sqrt(n)")
for row in heisenberg_fiber_stats(range(4, 13)):
    print(f"n={row.n:2d} D={row.diameter:3d} D/n={row.diameter_over_n:.3f} "
          f"fibre={row.fiber_diameter} fibre/sqrt(n)={row.fiber_over_sqrt_n:.3f}")

g = FamilySpec.parse("heisenberg").graph(16)
profile = growth_profile(g)
print("log-log growth fit on radii 1..8 for n=16:", round(growth_exponent(profile, 1, 8), 3))
