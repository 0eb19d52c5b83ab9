"""Exact algebra for module sheaves on finite topological spaces."""

from .exactalg import (
    AmbientMismatch,
    FpElement,
    Matrix,
    PrimeField,
    QQ,
    RationalField,
    Subspace,
    kernel_basis,
    orthogonal_complement,
    rank_of,
    solve,
    subspace_intersection,
    subspace_sum,
)
from .space import Cover, FiniteSpace, UnknownPoint, validate_topology
from .sheaf import (
    ExplicitPresheaf,
    FreeModuleSheaf,
    MorphismSheaf,
    OverlapMismatch,
    ParentMismatch,
    QuotientSheaf,
    Section,
    SubmoduleSheaf,
    check_completeness,
    full_submodule,
    glue,
    intersect_submodules,
    quotient,
    sections_basis,
    sections_presheaf,
    sheafify,
    sum_submodules,
    zero_submodule,
)
from .pairing import (
    Degenerate,
    NotInvariant,
    PairingSheaf,
    annihilator,
    canonical_pairing,
    check_hom_exactness,
    induced_endomorphism,
    induced_pairing,
    is_nondegenerate,
    quotient_dual_iso,
    theta,
    transpose_endomorphism,
    transpose_morphism,
)
from .symplectic import (
    BadSeed,
    DarbouxResult,
    NoAdmissibleNeighborhood,
    NotCoisotropic,
    NotLagrangian,
    RankNotConstant,
    ReducedModule,
    SymplecticModule,
    TwoFormSheaf,
    ZeroFormAt,
    classify,
    contract,
    darboux,
    flat,
    form_rank,
    lagrangian_complement,
    reduce,
    reduce_lagrangian,
    standard_form,
)

__version__ = "0.1.0"
