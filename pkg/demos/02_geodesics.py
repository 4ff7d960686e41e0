"""
Geodesics by RK4
================

Geodesics solve ``gamma_i = 0``.  On the isotropic plane they are straight
lines; on the cylinder the absolute coordinate advances at unit rate,
``u(x) = +-x + b``, while ``v`` moves linearly.  Richardson's half-step
rerun estimates the integration error.
"""

import numpy as np

from galilean_elastica.catalog import make_cylinder, make_helical_isotropic, make_plane
from galilean_elastica.surfaces import integrate_geodesic

plane = make_plane().chart
c = integrate_geodesic(plane, [0.2, -0.1], [0.6, 0.8], 1.0)
print("plane: end point", c.u[-1], " expected", [0.2 + 0.6, -0.1 + 0.8])
print("       richardson", c.meta["richardson"])

for R in (1.0, 2.0, 5.0):
    chart = make_cylinder(R).chart
    c = integrate_geodesic(chart, [0.1, 0.3], [-1.0, 0.7], 1.0)
    dev = np.max(np.abs(c.u[:, 0] - (0.1 - c.x)))
    v_curv = np.max(np.abs(c.ddu[:, 1]))
    print(f"cylinder R={R:g}: max |u - (b - x)| = {dev:.1e}, max |v''| = {v_curv:.1e}")

# On a helical surface the Christoffel symbols do not vanish and the
# parameter curve bends; the geodesic curvature still stays at roundoff.
helix = make_helical_isotropic(1.0).chart
c = integrate_geodesic(helix, [0.0, 0.3], [0.3, 0.7], 1.0)
print("helical_i: max kappa_g^2", c.meta["max_kappa_g2"],
      " constraint drift", c.meta["constraint_drift"])
