//! Exact scalars, ν-series and truncated jets.

pub mod crat;
pub mod jet;
pub mod linalg;
pub mod nuseries;
pub mod space;
pub mod text;

pub use crat::{binomial, factorial, CRat};
pub use jet::{invert_jet_matrix, Jet, SubstPlan};
pub use nuseries::NuSeries;
pub use space::{Kind, Mono, TruncationSpec, Var, VarSpace};
pub use text::{parse_expr, parse_jet, render_jet};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum KernelError {
    #[error("operands live in different variable spaces")]
    SpaceMismatch,
    #[error("variable is not part of the space")]
    UnknownVariable,
    #[error("substitution sends variables of different kinds to one target")]
    KindCollision,
    #[error("negative power nu^{0} where a nonnegative series is required")]
    NegativeNuPower(i32),
    #[error("exponential of a nonzero constant is not representable")]
    TranscendentalConstant,
    #[error("constant term of the matrix is singular")]
    SingularConstantTerm,
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}
