"""Zero-range perturbations of A = -d^2/dx^2 + 1: boundary triples, A-scale tools and spectra."""

from .ascale import (
    DistributionalValue,
    ScaleElement,
    decompose,
    defect_basis,
    distributional_apply_a,
    fundamental_solution,
    solve_a_inverse,
    solve_shifted,
)
from .bvs import (
    BoundaryData,
    RadialFunction3D,
    boundary_data_l2,
    green_residual_l2,
    green_residual_powers,
    green_residual_sobolev,
    quasi_boundary_data_sobolev,
    stacked_boundary_data,
)
from .errors import *  # noqa: F401,F403
from .exppoly import (
    ExpTerm,
    PiecewiseExpPoly,
    apply_a,
    l2_inner,
    l2_norm,
    mean_jump,
    quasi_derivative,
    sobolev_inner,
    sobolev_norm,
)
from .extensions import (
    AdmissibilityData,
    ExtensionSpec,
    Family,
    admissibility_witness,
    admissible,
    apply_extension,
    b_from_u,
    cayley_u_from_b,
    constraint_matrix,
    in_closure_domain,
    in_domain,
    nonlocal_apply,
    recover_potential,
    regular_rank_one_b,
    regularized_apply,
    verify_regular_identity,
)
from .oracle import GridOperator, discretize, lowest_eigenvalues, quadrature_inner
from .spectral import (
    Scan,
    SpectrumReport,
    bound_state_3d,
    bound_states_l2,
    bound_states_nonlocal,
    bound_states_sobolev,
    eigencheck,
)

__version__ = "0.1.0"
