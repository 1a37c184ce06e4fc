use thiserror::Error;

use crate::intertwiner::GenericPositionReport;
use crate::minimality::{MinimalityReport, Reduction};

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Which of the two representations in a pair an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    A,
    B,
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Side::A => f.write_str("A"),
            Side::B => f.write_str("B"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error(
        "matrix is not invertible at tolerance (sigma_min {sigma_min:e} <= cutoff {cutoff:e})"
    )]
    NotInvertible { sigma_min: f64, cutoff: f64 },

    #[error("algebra `{label}` is not unital: identity is not in the span of generator words")]
    NotUnital { label: String },

    #[error("images do not define a representation of `{label}` (residual {residual:e} > {threshold:e})")]
    NotARepresentation {
        label: String,
        residual: f64,
        threshold: f64,
    },

    #[error("map vanishes along the chain: reduced slot {slot} is zero-dimensional")]
    DegenerateMap {
        slot: usize,
        reduction: Box<Reduction>,
    },

    #[error("representation {side} is not minimal")]
    NotMinimal {
        side: Side,
        report: Box<MinimalityReport>,
    },

    #[error(
        "the two representations define different maps (residual {residual:e} > {threshold:e})"
    )]
    MapsDiffer { residual: f64, threshold: f64 },

    #[error("generic position fails at slot {slot}: meet dimensions {:?}", report.meet_dims())]
    GenericPositionViolated {
        slot: usize,
        report: GenericPositionReport,
    },

    #[error(
        "graph projection does not match (I + T*T)^-1 (residual {residual:e} > {threshold:e})"
    )]
    HalmosIdentityViolated { residual: f64, threshold: f64 },

    #[error("operator does not commute with the slot representation (residual {residual:e})")]
    NotInCommutant { residual: f64 },

    #[error("operator is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },
}
