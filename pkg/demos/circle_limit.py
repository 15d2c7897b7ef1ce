"""Cycles and prisms rescaled to diameter 1 approach the circle.

Prints the certified GH upper bound per size, then the certificate details
for a prism, where the shortest winding loop sits one step from every vertex.
"""

from vtlimits import FamilySpec, certify_family, circle_certificate, circle_model
from vtlimits.graph import prism_graph

cert = certify_family(FamilySpec.parse("cyclic"), circle_model(), [50, 100, 200, 400])
print(cert.report.to_csv(), end="")
print("PASS" if cert.passed else f"FAIL: {cert.reason}")

c = circle_certificate(prism_graph(100))
print(f"prism C100xK2: L={c.L} h={c.h} D={c.D} bound={float(c.bound):.4f} ({c.bound})")
