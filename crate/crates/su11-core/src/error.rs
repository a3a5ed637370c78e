use core::fmt;

/// Errors raised by the closed-form pipeline.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Two polynomials with different truncation caps were combined.
    CapMismatch { left: u32, right: u32 },
    /// `exp` was requested for a polynomial with a nonzero constant term,
    /// which would make the truncated series inexact.
    NonzeroConstantTerm,
    /// A derivative order beyond the truncation cap was requested; the
    /// stored coefficient would be silently wrong.
    DegreeExceedsCap { degree: u32, cap: u32 },
    /// A physical parameter is outside its admissible range.
    InvalidParams(&'static str),
    /// The post-operation state has (numerically) vanishing norm, so no
    /// normalization constant exists.
    DegenerateState(&'static str),
    /// The scalar objective was non-finite at every grid point.
    NoFeasiblePoint,
    /// A configuration outside the balanced-interferometer assumptions of
    /// the closed forms was requested.
    UnsupportedConfiguration(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::CapMismatch { left, right } => {
                write!(f, "truncation cap mismatch: {left} vs {right}")
            }
            Error::NonzeroConstantTerm => {
                write!(f, "exp requires a zero constant term")
            }
            Error::DegreeExceedsCap { degree, cap } => {
                write!(f, "derivative order {degree} exceeds truncation cap {cap}")
            }
            Error::InvalidParams(msg) => write!(f, "invalid parameters: {msg}"),
            Error::DegenerateState(msg) => write!(f, "degenerate state: {msg}"),
            Error::NoFeasiblePoint => write!(f, "objective is non-finite on the whole grid"),
            Error::UnsupportedConfiguration(msg) => {
                write!(f, "unsupported configuration: {msg}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;
