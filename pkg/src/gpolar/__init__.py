"""Generalized polar decomposition and matrix sign function via ΣDWH."""

from .errors import (
    ConvergenceError,
    DimensionError,
    DomainError,
    GPDError,
    HyperbolicBreakdownError,
    IllPosedError,
    NoExchangeError,
    NonTerminationError,
    ParseError,
    RankError,
    SingularityError,
    StructureError,
)
from .graph_basis import (
    GraphBasis,
    lagrangian_basis_from_graph,
    permuted_graph_basis,
    permuted_lagrangian_graph_basis,
    ppt_exchange,
    symplectic_swap,
)
from .indefinite import (
    balanced_basis,
    block_diag_eig,
    hyperbolic_givens,
    hyperbolic_qr_elimination,
    indefinite_qr_via_ldl,
    ldl_pivoted,
    ldliqr2,
)
from .oracles import polar_oracle_svd, sign_oracle_eig
from .polar import (
    VARIANTS,
    IterConfig,
    PolarResult,
    dwh_weights,
    matrix_sign,
    newton_determinantal,
    newton_suboptimal,
    rational_map,
    recover_self_adjoint,
    scale_estimates,
    sigma_dwh,
)
from .sigspaces import (
    Signature,
    adjoint_sig,
    is_pseudosymmetric,
    orthogonality_defect,
    pseudosymmetry_defect,
)
from .testgen import GeneratedInstance, gen_example1, gen_example2, random_orthogonal

__version__ = "0.1.0"
