//! Star products with separation of variables.

mod engine;
mod potential;

pub use engine::{antiwick_star, embed, C1Tensor, Orientation, StarEngine};
pub use potential::{Builtin, PotentialFile, PotentialJet, PotentialTerm};

use crate::diffop::DiffOpError;
use crate::kernel::{Jet, KernelError, NuSeries};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StarError {
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("inconsistent generator solve at multi-index {alpha}, nu-order {nu}: residual {residual}")]
    Inconsistent {
        alpha: String,
        nu: i32,
        residual: String,
    },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    DiffOp(#[from] DiffOpError),
}

/// `(f⋆g)⋆h − f⋆(g⋆h)`, restricted to filtration weight ≤ `weight` when
/// the engine is not exact.
pub fn check_associativity(
    engine: &StarEngine,
    f: &Jet,
    g: &Jet,
    h: &Jet,
) -> Result<Jet, StarError> {
    let lhs = engine.star(&engine.star(f, g)?, h)?;
    let rhs = engine.star(f, &engine.star(g, h)?)?;
    let diff = &lhs - &rhs;
    Ok(match engine.certified_weight() {
        None => diff,
        Some(w) => {
            let lo: i64 = [f, g, h]
                .iter()
                .map(|x| x.filtration_degree().unwrap_or(0).min(0) + 2 * x.min_nu().unwrap_or(0).min(0) as i64)
                .sum();
            diff.truncate_filtration(w + lo)
        }
    })
}

/// The associativity residual evaluated at the origin.
pub fn associativity_at_origin(
    engine: &StarEngine,
    f: &Jet,
    g: &Jet,
    h: &Jet,
) -> Result<NuSeries, StarError> {
    Ok(check_associativity(engine, f, g, h)?.eval_origin())
}
