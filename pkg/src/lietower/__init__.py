"""Lie algebroids on trivial bundles, projective towers of them, and jet calculus.

Every structural claim (axioms, compatibility of a tower, integrability of a
PDE system) is checked numerically at seeded sample points and reported as
a :class:`~lietower.checks.CheckReport`.
"""
from .algebroid import (Algebroid, Section, StructureFunctions, anchor_apply, structure_algebroid,
                        tangent_algebroid, verify_anchor_homomorphism, verify_leibniz,
                        verify_morphism, zero_anchor_algebroid)
from .calculus import (AlgebroidForm, eval_form, exterior_derivative, interior_product,
                       lie_derivative, pullback)
from .checks import CheckReport, Sampling, sample_box
from .constructions import (ConstructionError, NijenhuisTensor, PoissonTensor, action_algebroid,
                            canonical_poisson, distribution_algebroid, harmonic_oscillator_N,
                            jacobi_residual, nijenhuis_algebroid, nijenhuis_torsion,
                            poisson_cotangent_algebroid)
from .dynamics import (DiscreteCurve, Semispray, admissibility_residual, homogeneity_check,
                       integrate, make_semispray, tower_semispray)
from .expr import Expr, diff, evaluate, parse, simplify, to_string
from .fields import Chart, SmoothMap, VectorField, f_related, flow, lie_bracket
from .jets import (JetChart, PDESystem1, cartan_contact_forms, integrability_residual,
                   involutivity_check, prolong, prolong_bracket_check, system_fields,
                   total_derivative)
from .tower import (AlgebroidTower, CoherenceError, LimitSection, ProjectiveSystem, Thread,
                    corank1_tower, h0_membership, limit_bracket, limit_section, nijenhuis_tower,
                    validate_thread, verify_system)

__version__ = "0.1.0"
