//! Closed-form phase sensitivity, quantum Fisher information, and
//! metrological limits for an SU(1,1) interferometer with a delocalized
//! m-photon subtraction `(s·a + t·b)^m` applied after the first parametric
//! amplifier.
//!
//! Everything in this crate is pure computation over immutable parameter
//! records: the moment generating function is carried by truncated sparse
//! polynomials ([`polyseries`]), its derivative extractions give the
//! five-index moments ([`moments`]), which assemble into intensity
//! observables and the error-propagation sensitivity ([`observables`]) and
//! into Fisher information and limit curves ([`qfi`]). [`optimizer`]
//! provides the deterministic 1-D search used for the delocalization
//! coefficient and the working point.
//!
//! The crate is `no_std`-compatible (with `alloc`); the companion CLI crate
//! carries the brute-force truncated-Fock referee, file formats, and the
//! command-line front end.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod error;
pub mod moments;
pub mod observables;
pub mod optimizer;
pub mod params;
pub mod polyseries;
pub mod qfi;

pub use error::{Error, Result};
pub use moments::{build_w4, normalization, q_moment, MomentTable, QIndex};
pub use observables::{
    exp_na, exp_na2, exp_nanb, exp_nb, exp_nb2, intensity_stats, phase_sensitivity,
    IntensityExpansion, IntensityStats, PhaseExpansion,
};
pub use optimizer::{minimize_scalar, optimize_dpso_t, DpsoObjective, OptimizationResult};
pub use params::InterferometerParams;
pub use polyseries::{ExponentVector, SparsePoly, NUM_VARS};
pub use qfi::{
    limits, mean_photons_mode_a, qfi_ideal, qfi_lossy, qfi_lossy_printed_variant,
    total_photon_number, variance_photons_mode_a, QfiReport,
};
