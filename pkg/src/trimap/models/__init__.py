"""Bundled periodic triangular models with closed-form oracles."""
from .leslie_gower import (
    LeslieGowerCycles,
    LeslieGowerParams,
    exclusion_quotient,
    leslie_gower_box,
    leslie_gower_cycles,
    leslie_gower_jacobians,
    leslie_gower_spectra,
    leslie_gower_system,
)
from .logistic import (
    LogisticFixedPoints,
    LogisticParams,
    LogisticStability,
    cardano_x_star,
    logistic_1d_system,
    logistic_composition_fixed_points,
    logistic_individual_fixed_points,
    logistic_spectra_and_regions,
    logistic_system,
    reality_polynomial,
)
from .ricker import (
    RickerKParams,
    RickerParams,
    RickerStability,
    interior_fixed_point,
    ricker_box,
    ricker_common_fixed_points,
    ricker_k_system,
    ricker_stability_and_generalization,
    ricker_system,
)
