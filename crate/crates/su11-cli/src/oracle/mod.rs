//! Independent brute-force simulator in a truncated two-mode Fock space.
//!
//! This module is the referee for every closed form in `su11-core`: it
//! builds the interferometer output by direct linear algebra (coherent
//! input, Taylor-applied two-mode squeezers, ladder-operator photon
//! subtraction, Kraus loss channels, diagonal phase shifts) and reports
//! expectations that the generating-function pipeline must reproduce.
//! Every reported value is cutoff-convergence checked.

mod density;
mod heisenberg;
mod loss;
mod pipeline;
mod state;

pub use density::{reduced_a_of_pure, Mode, TwoModeDensity};
pub use heisenberg::HeisenbergIntensity;
pub use pipeline::{
    converged_moments, converged_scalar, default_cutoff, expand_loss_branches, oracle_intensity,
    oracle_photon_moments, oracle_qfi_pure, oracle_sensitivity, OracleContext, OracleQfi,
    PhotonMoments, CONVERGENCE_DRIFT, CUTOFF_STEP,
};
pub use state::{Monomial, TwoModeState};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("cutoff {cutoff} inadequate: {reason}")]
    CutoffInadequate { cutoff: usize, reason: &'static str },
    #[error("photon subtraction annihilated the state")]
    AnnihilatedState,
    #[error("unsupported configuration: {0}")]
    UnsupportedConfiguration(&'static str),
    #[error(transparent)]
    Core(#[from] su11_core::Error),
}

pub type Result<T> = std::result::Result<T, OracleError>;
