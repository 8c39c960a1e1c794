"""Metriplectic 4-bracket dynamics: tensors, constructors, verification and integration."""

from .brackets import (FourBracketField, PoissonField, ScalarField, StructureConstants,
                       double_bracket_tensor, four_bracket, g_metric, km_bracket, km_tensor,
                       lie_poisson_tensor, poisson_bracket, sectional_curvature, two_bracket)
from .constructors import (ChristoffelField, MetricField, b_tensor, cartan_killing, ck_4tensor,
                           contravariant_christoffel, contravariant_curvature, generic_linearize,
                           generic_symmetrize, kn_product, levi_civita, lie_algebra_4tensor,
                           recover_algebraic_curvature, riemann_from_affine, space_form,
                           torsion_removal)
from .dynamics import (IntegrationError, MetriplecticSystem, Trajectory, integrate,
                       relax_to_equilibrium, vector_field)
from .systems import (KidaParams, RigidBodyParams, kida, lie_poisson_system, rigid_body)
from .tensor_core import (DimensionError, SymmetryError, contract4, cyclic_part,
                          symmetry_defects)
from .verify import (VerificationReport, sample_states, verify_degeneracy, verify_gradient,
                     verify_jacobi, verify_minimal_metriplectic, verify_system)

__version__ = "0.1.0"
