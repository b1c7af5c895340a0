"""tclmix: spectral mixing theory and particle Monte Carlo for randomized
thermostatic load ensembles."""

from .disorder import (
    KINDS,
    DisorderSpec,
    EnvelopePoleError,
    EnvelopeResult,
    averaged_delta_n,
    dpd_density,
    dpd_sample,
    envelope,
    numeric_disorder_average,
)
from .lambert_w import ConvergenceError, LogArgument, lambert_w, lambert_w_log
from .particle_sim import (
    ConsumptionSeries,
    DeviceEnsemble,
    DeviceState,
    SimConfig,
    config_digest,
    init_ensemble,
    run,
    step,
)
from .quadrature import QuadratureError, adaptive_quad
from .spectral import (
    CRITICAL_RT,
    AsymptoticCoeffs,
    DegenerateModeError,
    DegenerateParameterError,
    EnsembleParams,
    InitialCondition,
    SpectralMode,
    TwoVector,
    adjoint_eigenfunction,
    classify_regime,
    eigenfunction,
    eigenfunction_integrals,
    eigenvalue,
    inner_product,
    leading_eigenvalue,
    leading_modes,
    mode,
    pdf_reconstruction,
    projection_coefficient,
    spectral_residual,
    tau_sensitivity,
    theory_delta_n,
    weak_control_series,
    worst_case_phi,
)

__version__ = "0.1.0"
