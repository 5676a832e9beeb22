"""Numerical laboratory for weighted-L2 polynomial approximation in the plane.

Computes distances from holomorphic functions to polynomial subspaces in
weighted Bergman spaces over planar domains, constructs extremal orthonormal
polynomial bases, and evaluates density criteria and certified non-density
bounds.
"""

from . import certs, errors, geometry, moon, quad, weights
from .bergman import (
    ApproximationResult,
    GramMatrix,
    ScanResult,
    best_poly_approx,
    best_poly_approx_with_jet,
    default_center_scale,
    density_scan,
    extremal_basis,
    gram_matrix,
    scan_verdict,
)
from .certs import (
    NonDensityCertificate,
    cos_half_norm_enclosure,
    cp_constant,
    nondensity_certificate,
    pointwise_eval_bound,
    poisson_bounds_check,
    poisson_extension,
    potential_mass_bound,
)
from .geometry import (
    ArcRegion,
    ArcStage,
    Disc,
    Moon,
    TruncatedPlane,
    boundary_distance,
    contains,
    moon_tangency,
    probe_circle,
)
from .moon import (
    BranchSpec,
    branch_sqrt,
    change_of_variables_check,
    make_branch_spec,
    moon_density_criterion,
    moon_stage,
    parity_split,
    strip_budget_search,
)
from .quad import (
    QuadratureGrid,
    build_grid,
    inner_product,
    integrate,
    integrate_1d,
    truncation_tail,
    weighted_norm_sq,
)
from .weights import (
    ImAbsPlusPower,
    LogPotential,
    PolyBump,
    Polynomial,
    SumWeight,
    ZeroWeight,
    evaluate,
    lelong_number,
    mass_on_disc,
    poly_bump_weight,
    satisfies_condition_A,
)

__version__ = "0.1.0"
