use thiserror::Error;

use crate::multi_index::MultiIndex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("truncation cap mismatch: {left} vs {right}")]
    CapMismatch { left: u32, right: u32 },

    #[error("exponent {0} is outside the series support")]
    InvalidExponent(MultiIndex),

    #[error("substituted series component {component} has a constant term")]
    ConstantTerm { component: usize },

    #[error("series tuple is not tangent to the identity")]
    NotTangentToIdentity,

    #[error("series tuple is not a nonlinear part: {0}")]
    NotNonlinearPart(String),

    #[error("majorant series must have non-negative real coefficients (exponent {0})")]
    NegativeMajorant(MultiIndex),

    #[error("{0} is not an admissible decoration")]
    InvalidDecoration(MultiIndex),

    #[error("resonance at {at}: vanishing small divisor")]
    Resonance { at: MultiIndex },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("operator profile {profile} does not have total degree {degree}")]
    InvalidProfile { profile: MultiIndex, degree: u32 },

    #[error("parse error: {0}")]
    Parse(String),
}
