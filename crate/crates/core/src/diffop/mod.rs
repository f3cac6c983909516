//! Differential operators and point-supported distributions at the origin.

mod distribution;
mod operator;

pub use distribution::{BilinearForm, PointDistribution};
pub use operator::{DiffOperator, Witness};

use crate::kernel::{KernelError, Mono};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DiffOpError {
    #[error("operands live in different variable spaces")]
    SpaceMismatch,
    #[error("the ν^0 part of the operator is not the identity")]
    LeadingTermNotIdentity,
    #[error("no operator of the allowed order matches at monomial {mono:?}; residual {residual}")]
    NoOperatorMatches { mono: Mono, residual: String },
    #[error("distribution is not oscillatory-shaped: {0}")]
    NotOscillatoryShaped(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}
