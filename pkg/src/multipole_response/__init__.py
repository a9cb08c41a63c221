"""Multipolar magneto-dielectric response: dispersion, Kramers-Kronig and causality checks."""
from .errors import (
    DegenerateModelError,
    GridError,
    InfeasibleStrategyError,
    ModelValidationError,
    RegimeError,
    ResponseError,
    SumRuleError,
)
from .model import (
    ComplexSpectrum,
    bound_current_parts,
    FrequencyGrid,
    MediumModel,
    MultipoleTransition,
    default_grid,
    eps_mu,
    evaluate_spectrum,
    hydrogen_1s_mean_rho2,
    hydrogen_diamagnetic_moment,
    inverse_permeability,
    inverse_permeability_magnetic,
    permeability,
    permittivity,
    permittivity_k,
    reassign_dispersion,
    static_chi,
    static_chi_multipole_form,
    susceptibility,
    transverse_current,
    transverse_current_coefficient,
    validate_model,
)

__version__ = "0.1.0"
