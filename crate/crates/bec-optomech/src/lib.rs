//! Simulation toolkit for a Bose-Einstein condensate trapped inside a
//! driven optomechanical cavity whose pump laser carries classical phase
//! noise.
//!
//! The pipeline goes from raw physical parameters to stationary quantum
//! correlations:
//!
//! 1. [`model`] — validate inputs and compute every derived constant
//!    (Bogoliubov frequency, optomechanical couplings, thermal occupations).
//! 2. [`steadystate`] — solve the cubic self-consistency equation for the
//!    intracavity amplitude, including optical bistability branches.
//! 3. [`linsys`] — assemble the 8x8 drift and diffusion matrices of the
//!    linearized fluctuation dynamics and decide dynamical stability.
//! 4. [`gaussian`] — solve the stationary Lyapunov equation and compute
//!    bipartite logarithmic negativity.
//! 5. [`adiabatic`] — eliminate the fast cavity field to get the effective
//!    two-mode model (frequency shifts, effective coupling, phase-noise
//!    coupling parameters).
//! 6. [`phasenoise`] — the analytic phase-noise spectrum and a
//!    Euler-Maruyama integrator that doubles as an independent covariance
//!    oracle for the whole linear system.
//! 7. [`experiment`] — named sweep drivers with CSV + JSON manifest output,
//!    used by the `becsim` binary and the runnable examples.
//!
//! All frequencies are stored internally as angular frequencies in rad/s.
//! Parameter files carry explicit `*_is_angular` flags so both of the
//! common conventions ("Hz" vs "2 pi x Hz") can be expressed without silent
//! factor-of-2-pi mistakes; see [`params`].
//!
//! Naming note: the literature uses `omega_c` both for the bare cavity
//! resonance and for the Bogoliubov-mode frequency. Here the bare cavity
//! frequency is always `omega_0` (derived from the pump wavelength) and
//! `omega_c` is reserved for the Bogoliubov mode.

pub mod adiabatic;
pub mod experiment;
pub mod gaussian;
pub mod linsys;
pub mod model;
pub mod params;
pub mod phasenoise;
pub mod steadystate;

pub use model::{DerivedModel, PhaseNoiseParams, SystemParams};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("parameter file {path}: {reason}")]
    ParamFile { path: String, reason: String },

    #[error("invalid experiment spec: {0}")]
    InvalidSpec(String),

    #[error("eigenvalue solver did not converge")]
    EigenFailure,

    #[error("system is dynamically unstable (max Re eigenvalue = {max_real_eig:.6e} rad/s)")]
    Unstable { max_real_eig: f64 },

    #[error("Lyapunov solve ill-conditioned: relative residual {residual:.3e}, condition estimate {condition:.3e}")]
    IllConditioned { residual: f64, condition: f64 },

    #[error("unphysical covariance matrix: {0}")]
    UnphysicalCovariance(String),

    #[error("degenerate effective model: {0}")]
    Degenerate(String),

    #[error("mode pair {0} is not present in this linear system")]
    MissingMode(&'static str),

    #[error("invalid SDE configuration: {0}")]
    InvalidSdeConfig(String),

    #[error("SDE trajectory diverged at step {step} (|u|_inf = {norm:.3e}); system too stiff for the chosen dt or unstable")]
    SdeDiverged { step: usize, norm: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Reduced Planck constant [J s].
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant [J/K].
pub const K_BOLTZMANN: f64 = 1.380_649e-23;
/// Speed of light [m/s].
pub const SPEED_OF_LIGHT: f64 = 2.997_924_58e8;
