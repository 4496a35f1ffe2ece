"""Tomography of spin qudits: polarization operators, measurement design,
reconstruction and error analysis."""
from .angular import HalfInt, clebsch_gordan, wigner_3j, wigner_6j, wigner_D, wigner_d_small
from .measurement import (
    Axis,
    AxisSet,
    InfeasibleDesignError,
    MeasurementBlock,
    MeasurementDesign,
    error_scales,
    full_measurement_matrix,
    measurement_block,
)
from .optimize import (
    SearchConfig,
    beta_sweep,
    fit_theta_opt,
    newton_young_axes,
    optimize_axes,
    random_axes,
    theta_scan,
)
from .polarization import (
    PolarizationCoefficients,
    PolarizationIndex,
    QuditDim,
    expand_in_basis,
    gamma_table,
    polarization_operator,
    product_coefficient,
    reconstruct_from_coeffs,
    rotate_polarization,
)
from .reconstruct import (
    DensityMatrix,
    MeasurementRecord,
    ReconstructionEstimate,
    chi_vector,
    estimate_polarization,
    exact_error,
    mle_project,
    noise_matrix,
    random_density_matrix,
    reconstruct_state,
    sigma_star,
    simulate_measurements,
)

__version__ = "0.1.0"
