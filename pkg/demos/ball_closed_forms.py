"""Closed forms at the unit ball against the numerical operators.

Prints the support of Phi^mu B, the Petty product of Pi_2 B, the Busemann
ratio of I B, and the two volume identities for a few bodies and measures.
"""
import numpy as np

from valugeo import radial_valuations as rv
from valugeo import valuations as val
from valugeo.bodies import Ball, volume_star
from valugeo.corpus import cube, octahedron
from valugeo.sphere import ZonalMeasure
from valugeo.verify import identity_5_5_value, identity_5_8_value

KAPPA3 = 4 * np.pi / 3

B = Ball(1.0)
print("Petty product of Pi_2 B   ", val.polar_volume(val.proj_field(B, 2)) * KAPPA3**2, "vs", 64 / 27)
print("V(I B) / V(B)^2           ", volume_star(rv.intersection_field(B, 2)) / KAPPA3**2, "vs", 3 * np.pi**2 / 4)

print("\nV(K, K, Gamma^mu Phi^mu*(K, K)), expected 1/4")
for name, K in (("cube", cube()), ("octahedron", octahedron())):
    for preset in ("discrete", "lebesgue"):
        print(f"  {name:10s} {preset:9s} {identity_5_5_value(K, K, ZonalMeasure.preset(preset, 0.5)):.12f}")

print("\nV_p(K, Gamma^mu_p Phi^mu*_p K), expected 1/(3 + p)")
for p in (1.5, 2.0, 3.0):
    v = identity_5_8_value(cube(), ZonalMeasure.preset("lebesgue", 0.5), p)
    print(f"  cube p={p:<4} {v:.12f}  1/(3+p) = {1 / (3 + p):.12f}")
