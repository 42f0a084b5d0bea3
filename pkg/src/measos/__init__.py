"""Moment/SOS hierarchy over algebras of polynomial coordinates and measurable generators."""
from .certify import (AtomSet, Certificate, GnsOperators, extract_atoms, extract_certificate,
                      gns_operators, verify_certificate)
from .hierarchy import HierarchyOptions, build_relaxation, run, solve_order
from .moment import (MomentSequence, is_flat, localizing_matrix, moment_matrix, numerical_rank,
                     riesz)
from .polyalg import (Poly, RelationSet, RewriteRule, VarSpace, add, evaluate, make_relations,
                      monomial_basis, mul, normal_form, parse_poly)
from .quadmod import (GridSpec, MeasurableEvaluator, QuadraticModule, make_archimedean,
                      min_on_sample, sample_positivity_set)
from .sdp import SdpProblem, SdpSolution, SolverOptions, Status, residuals, solve

__version__ = "0.1.0"
