"""Curve and surface invariants in the Galilean space G3 and relaxed elastic lines on surfaces."""

from .galilean import GalileanIsometry, apply_isometry, gcross, gdot, gnorm, is_isotropic
from .curves import (CurveJet, FrenetFrame, ParametricCurve, curvature_arclength,
                     curvature_torsion_general, frenet_frame, frenet_residuals, graph_curve,
                     torsion_arclength)
from .surfaces import (CurveOnSurface, DarbouxData, SurfaceChart, SurfacePoint, christoffel,
                       darboux_along, darboux_invariants, first_form, geodesic_ode,
                       integrate_geodesic, pythagoras_check, second_form, side_tangential,
                       unit_normal)
from .variational import (ElasticSolution, Start, VariationalProblem, boundary_terms,
                          boundary_terms_U1, boundary_terms_U2, el_residual,
                          el_residual_complete, el_residual_incomplete, energy_K, energy_Kn,
                          is_geodesic, solve_du1, solve_du2)
from .solvers import SolverOptions, solve, solve_complete, solve_discrete, solve_incomplete
from .discrete import discrete_functional, el_gradient_check, functional_gradient
from . import catalog, errors

__version__ = "0.1.0"
