"""Numerical pseudo-differential calculus on a non-self-adjoint model system.

The package instantiates a full operator calculus over the biorthogonal
eigensystem of -i d/dx on (0, 1) with the boundary condition
f(1) = h f(0): biorthogonal Fourier transforms, weighted symbol classes,
composition/adjoint expansions, parametrix construction, Gohberg-distance
compactness diagnostics, a Garding-type lower bound, and the associated
solvers, all at desk scale with exact quadrature on the window span.
"""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    FrequencyWindow,
    ModelSpec,
    ModelSystem,
    SpatialGrid,
    bracket,
    eigenvalue,
    eval_u,
    eval_v,
    make_system,
    verify_eigenpair,
    wz_check,
)
from .transform import (  # noqa: F401
    CoefficientVector,
    GridFunction,
    convolve_L,
    forward_L,
    forward_Lstar,
    inverse_L,
    inverse_Lstar,
    plancherel_pairing,
    riesz_bounds,
)
from .weights import (  # noqa: F401
    WeightFunction,
    check_difference_axiom,
    check_growth,
    smoothed_integer_weight,
    standard_weight,
    user_table_weight,
)
from .symbols import (  # noqa: F401
    SymbolFamilySpec,
    SymbolGrid,
    build_symbol,
    catalogue,
    d_derivative,
    delta_forward,
    delta_kernel_oracle,
    hypoellipticity_check,
    m_ellipticity_check,
    seminorm_estimate,
)
from .calculus import (  # noqa: F401
    OperatorMatrix,
    ParametrixResult,
    adjoint_symbol,
    assemble_matrix,
    asymptotic_sum,
    compose_symbols,
    parametrix,
    quantize_apply,
    quantize_apply_star,
    symbol_from_operator,
)
from .analysis import (  # noqa: F401
    apriori_estimate_check,
    compactness_test,
    garding_verify,
    gohberg_distance,
    lambda_power_apply,
    resolvent_solve_multiplier,
    sobolev_interpolation_check,
    sobolev_norm,
    strong_solve,
    symbol_power,
)
