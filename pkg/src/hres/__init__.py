"""Numerics for the residue trace of the Heisenberg calculus.

The package is organized by what each module computes:

- aniso: anisotropic dilations, the pseudo-norm, and quadrature on the
  unit pseudo-sphere and in polar shells;
- extension: homogeneous symbols, cutoff extensions, obstruction
  coefficients, and the (log-)homogeneity scaling laws;
- residue: the finite-part functional on symbol expansions, Laurent
  analysis of gauged families, and residue densities;
- heat: heat-trace expansions, the zeta-function dictionary, and Weyl
  counting asymptotics;
- constants: the universal spectral constants of the flat model;
- sphere3: contact geometry and pseudohermitian volumes on the 3-sphere;
- cli: the command-line front end.
"""

from .aniso import (
    GradedSpace,
    QuadResult,
    SpherePoint,
    WeightedMultiIndex,
    dilate,
    normalize,
    polar_integral,
    pseudo_norm,
    sphere_integral,
    weighted_indices,
)
from .errors import (
    ConfigurationError,
    DomainError,
    HresError,
    NumericalError,
    PreconditionError,
)
from .extension import (
    CutoffProfile,
    ExpBump,
    ExtendedDistribution,
    GaussianBump,
    HomogeneousSymbol,
    MonomialGaussian,
    PolyBump,
    Regime,
    TestFunction,
    build_extension,
    c_alpha,
    classify_regime,
    gauss_tapered,
    kernel_scaling_check,
    koranyi_power,
    odd_x1,
    pair,
    pair_scaled,
    predicted_scaling_defect,
    scaling_defect,
)
from .residue import (
    GaugedFamily,
    LaurentFit,
    ResidueDensity,
    SymbolExpansion,
    dixmier_value,
    gauged_laurent,
    global_res,
    residue_density,
    tilde_L,
)
from .heat import (
    HeatExpansion,
    SpectrumSample,
    ZetaSingularity,
    extract_heat,
    fit_heat_samples,
    heat_model,
    heat_to_zeta,
    load_spectrum,
    load_trace_samples,
    mellin_top_residue,
    synthesize_trace,
    weyl_fit,
    weyl_nu0,
    zeta_res_to_ncres,
)
from .constants import (
    RhoTable,
    alpha_nkpq,
    beta_n,
    beta_nkpq,
    gamma_nk,
    length_element_constant,
    load_rho_fixtures,
    normalization_ratio,
    rho,
    verify_rho_fixtures,
)
from .sphere3 import (
    Chart,
    ContactModel,
    HeatGammaRegistry,
    S3_HEAT_GAMMAS,
    area_dim3,
    area_factor,
    contact_integral,
    contact_model,
    contact_volume,
    gamma_from_heat,
    load_contact_model,
    lower_volume,
)

__version__ = "0.1.0"
