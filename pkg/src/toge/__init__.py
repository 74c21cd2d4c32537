"""Toric Monge-Ampere geodesics and their Bergman approximations."""

__version__ = "0.1.0"

from .errors import *  # noqa: E402,F401,F403
from .polytope import (  # noqa: E402
    DelzantPolytope,
    FacetProximity,
    LatticeSet,
    build_polytope,
    cube,
    facet_values,
    hirzebruch,
    interval,
    lattice_points,
    near_facets,
    simplex,
)
from .polynomial import Polynomial  # noqa: E402
from .potential import (  # noqa: E402
    HessianPair,
    LegendreResult,
    SymplecticPotential,
    bargmann_fock,
    canonical,
    convexity_check,
    eval_u,
    grad_u,
    hess_u,
    inverse_moment,
    legendre,
    legendre_batch,
    moment_map,
)
from .quantize import (  # noqa: E402
    AsymptoticModel,
    NormingTable,
    PValue,
    QuadConfig,
    asymptotic_model,
    localization_profile,
    log_p_special,
    model_ratios,
    norming_constant,
    norming_table,
    pkernel,
    szego_diagonal,
)
from .geodesic import (  # noqa: E402
    BergmanJet,
    GeodesicPair,
    MAJet,
    bergman_jet,
    ma_jet,
    regularity_gap,
    rinfty,
    rk_ratio,
    volume_ratio,
)
from .converge import (  # noqa: E402
    ErrorReport,
    EvalGrid,
    build_grid,
    converge,
    error_fields,
    fit_rate,
)
