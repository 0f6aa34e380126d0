from .dual_mcl import DualMclConfig, FilterEstimate, FilterState, dual_mcl_step, init_dual_mcl
from .ekf import EkfState, ekf_step, measurement_function, measurement_jacobian
from .particles import (
    KernelDensity2D,
    ParticleSet,
    auxiliary_positions,
    estimate_from_particles,
    find_density,
    importance_weights,
    low_variance_resample,
    sample_proposal,
    sample_velocities,
    systematic_indices,
)
from .standard_pf import StandardPfConfig, range_log_likelihood, standard_pf_step

__all__ = [
    "DualMclConfig",
    "EkfState",
    "FilterEstimate",
    "FilterState",
    "KernelDensity2D",
    "ParticleSet",
    "StandardPfConfig",
    "auxiliary_positions",
    "dual_mcl_step",
    "ekf_step",
    "estimate_from_particles",
    "find_density",
    "importance_weights",
    "init_dual_mcl",
    "low_variance_resample",
    "measurement_function",
    "measurement_jacobian",
    "range_log_likelihood",
    "sample_proposal",
    "sample_velocities",
    "standard_pf_step",
    "systematic_indices",
]
