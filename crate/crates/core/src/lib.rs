//! Finite-volume solver for the nonlinear noisy leaky integrate-and-fire
//! Fokker-Planck equation, written in flux-shift form.
//!
//! The density lives on a uniform grid over `[V_min, V_F]` with `V_R` on a
//! node. Fluxes use Scharfetter-Gummel weights built from the harmonic mean
//! of the local Maxwellian, so the semi-implicit scheme conserves mass
//! for any time step and stays positive under a parabolic step bound.

// `!(x > 0.0)` is used deliberately so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod delay;
pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod harness;
pub mod solver;
pub mod stationary;
pub mod tridiag;

pub use error::{Error, Result};
pub use grid::{
    g_half, harmonic_mean, technical_assumption_holds, Grid, ModelParams, SgCoefficients,
};
pub use solver::{
    cfl_ok, explicit_stable, explicit_step, firing_rate, modified_flux, semi_implicit_step, step,
    NegativeDensityPolicy, Scheme, SolverState, StepConfig,
};
pub use stationary::{
    discrete_stationary, discrete_stationary_normalized, find_stationary_rates, stationary_density,
    Flavor, RootSearch, StationaryProfile,
};
