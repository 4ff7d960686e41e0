"""
Three solvers, one answer
=========================

Shooting and collocation solve the Euler-Lagrange boundary-value problem;
the discrete route minimizes a finite-element energy directly and never
looks at the Euler-Lagrange equations.  Agreement between them is the
strongest check available.  The discrete energy converges at second order
because the constraint is imposed at the nodes.
"""

import time

from galilean_elastica import solve_complete, solve_discrete
from galilean_elastica.catalog import elastic_problems

print(f"{'problem':20s} {'method':12s} {'K':>14s} {'discrete K':>14s} {'rel gap':>9s} {'s':>5s}")
for name, problem in elastic_problems("complete").items():
    t0 = time.perf_counter()
    a = solve_complete(problem)
    d = solve_discrete(problem, 256)
    gap = abs(a.K - d.K) / max(a.K, 1e-12)
    print(f"{name:20s} {a.method:12s} {a.K:14.8e} {d.K:14.8e} {gap:9.1e} "
          f"{time.perf_counter() - t0:5.1f}")

problem = elastic_problems("complete")["helical_i_clamped"]
ref = solve_complete(problem, method="collocation").K
print("\nconvergence of the discrete energy on helical_i_clamped")
prev = None
for n in (16, 32, 64, 128):
    gap = abs(solve_discrete(problem, n).K - ref)
    print(f"  n={n:4d}  gap={gap:.3e}" + (f"  ratio={prev / gap:.2f}" if prev else ""))
    prev = gap
