//! Numerics for the Efimov effect in a system of two identical fermions and
//! one distinguishable particle.
//!
//! The crate computes, for a mass ratio `m` of the third particle:
//!
//! * the closed-form constants of the problem and the critical mass ratio
//!   m* ~ 1/13.607 separating the finite-spectrum regime from the Efimov
//!   regime ([`params`]);
//! * the angular-channel kernels and their Fourier symbols, whose level sets
//!   control the eigenvalue-counting asymptotics ([`kernels`]);
//! * the Efimov constant C(m) with its proven lower and upper bounds, and the
//!   per-channel critical masses ([`constants`]);
//! * Nystrom discretizations of the interval operators with inertia-based
//!   eigenvalue counting, for desk-scale verification of the counting limit
//!   n(lambda, S_R)/(2R) -> C-type level-set sums ([`spectral`]).

pub mod constants;
pub mod error;
pub mod kernels;
pub mod linalg;
pub mod params;
pub mod quadrature;
mod roots;
pub mod spectral;

pub use constants::{
    channel_critical_mass, channel_critical_mass_with_order, efimov_constant,
    efimov_constant_with_order, level_set, level_set_with_scan, lower_bound_c1,
    lower_bound_c1_with_order, upper_bound_c2, ChannelContribution, EfimovReport, LevelSet,
};
pub use error::{Error, Result};
pub use kernels::{kernel_full, legendre, symbol_upper_bound, ChannelSymbol};
pub use params::{channel_cutoff_k, critical_mass, lambda_of, make_params, MassParams};
pub use spectral::{
    build_channel_matrix, check_map_identity, convergence_study, count_above,
    map_prefactor_residual, max_channel_eigenvalue, r_of_z, run_counting, ChannelCount,
    ConvergenceRow, ConvergenceStudy, CountPath, CountReport, Discretization,
    DiscretizationRule, MapSample, SpectralRun,
};
