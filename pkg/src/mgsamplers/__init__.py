"""Monomial Gamma samplers: generalized-kinetic HMC and analytic slice chains."""

from ._kernels import NUMBA_ENABLED
from .diagnostics import (
    DiagnosticsReport,
    autocorrelation,
    effective_sample_size,
    mode_crossings,
    summarize,
)
from .integrator import (
    DIVERGENCE_THRESHOLD,
    IntegratorConfig,
    PhasePoint,
    leapfrog_step,
    make_phase_point,
    mh_accept,
    propose_trajectory,
)
from .kinetics import KineticParams, kinetic_energy, kinetic_gradient, mg_log_density, sample_mg
from .samplers import (
    SAMPLER_KINDS,
    SamplerConfig,
    Trace,
    conditional_draw,
    run_mg_hmc,
    run_mg_hmc_analytic,
    run_mg_ss_analytic,
    run_sampler,
    run_std_slice,
)
from .targets import (
    LabeledDataset,
    Target,
    bimodal_1d_target,
    bimodal_2d_target,
    blr_target,
    exponential_target,
    gamma_target,
    load_dataset,
    synthetic_logistic_dataset,
    truncated_gaussian_target,
)

__version__ = "0.1.0"

__all__ = [
    "NUMBA_ENABLED",
    "DiagnosticsReport",
    "autocorrelation",
    "effective_sample_size",
    "mode_crossings",
    "summarize",
    "DIVERGENCE_THRESHOLD",
    "IntegratorConfig",
    "PhasePoint",
    "leapfrog_step",
    "make_phase_point",
    "mh_accept",
    "propose_trajectory",
    "KineticParams",
    "kinetic_energy",
    "kinetic_gradient",
    "mg_log_density",
    "sample_mg",
    "SAMPLER_KINDS",
    "SamplerConfig",
    "Trace",
    "conditional_draw",
    "run_mg_hmc",
    "run_mg_hmc_analytic",
    "run_mg_ss_analytic",
    "run_sampler",
    "run_std_slice",
    "LabeledDataset",
    "Target",
    "bimodal_1d_target",
    "bimodal_2d_target",
    "blr_target",
    "exponential_target",
    "gamma_target",
    "load_dataset",
    "synthetic_logistic_dataset",
    "truncated_gaussian_target",
    "__version__",
]
