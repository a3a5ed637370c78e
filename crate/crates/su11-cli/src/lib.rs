//! Companion crate to `su11-core`: the brute-force truncated-Fock referee,
//! the validation harness that compares it against the closed forms, sweep
//! and figure-preset machinery, and machine-readable output formats.

pub mod oracle;
pub mod output;
pub mod sweep;
pub mod validate;
