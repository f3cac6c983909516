//! Cyclic Calabi functions and the trace identity relating `(𝒩, •)` to
//! the oscillatory action of `exp G^(l)`.

use crate::diffop::{DiffOpError, PointDistribution};
use crate::distalg::{n_trace, DistAlgError, DistAlgebra};
use crate::kernel::{CRat, Jet, Kind, KernelError, Mono, NuSeries, SubstPlan, Var, VarSpace};
use crate::oscact::{act_exp_value, transpose_field, FieldJet, OscError, PhaseJet};
use crate::star::PotentialJet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CalabiError {
    #[error("number of points must be at least 1")]
    NoPoints,
    #[error("critical point check failed: {0}")]
    NotCritical(String),
    #[error("expected {expected} distributions on one copy")]
    Arity { expected: usize },
    #[error("truncation too coarse: certified order is {0}")]
    Inadequate(i32),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    DiffOp(#[from] DiffOpError),
    #[error(transparent)]
    Osc(#[from] OscError),
    #[error(transparent)]
    DistAlg(#[from] DistAlgError),
}

/// `Φ(z_i, z̄_j)` on `l` copies.
fn place(phi: &Jet, l: usize, holo: usize, anti: usize) -> Jet {
    let src = phi.space();
    let dst = VarSpace::new(l, src.cdim());
    let plan = SubstPlan::from_rule(src, dst, |v: Var| {
        let copy = match v.kind {
            Kind::Holo => holo,
            Kind::Anti => anti,
        };
        Some(Var::new(copy, v.kind, v.axis))
    });
    phi.relabel(&plan)
}

/// `G^(l) = Σ_i Φ(z_i, z̄_{i+1}) − Σ_i Φ(z_i, z̄_i)`, indices mod `l`, for
/// a potential body.
pub fn calabi_g_body(phi: &Jet, l: usize) -> Result<Jet, CalabiError> {
    if l == 0 {
        return Err(CalabiError::NoPoints);
    }
    let sp = VarSpace::new(l, phi.space().cdim());
    let mut g = Jet::zero(sp, phi.trunc());
    for i in 0..l {
        g.add_assign(&place(phi, l, i, (i + 1) % l));
        g.add_assign(&-&place(phi, l, i, i));
    }
    Ok(g)
}

/// `G^(l)` as a phase, exact when the potential is.
pub fn calabi_g(phi: &PotentialJet, l: usize) -> Result<PhaseJet, CalabiError> {
    let g = PhaseJet::new(calabi_g_body(phi.body(), l)?)?;
    Ok(if phi.is_exact() { g.exact() } else { g })
}

/// `F^(l)(x_1, …, x_l) = G^(l+1)(0, x_1, …, x_l)`.
pub fn frozen_phase(phi: &PotentialJet, l: usize) -> Result<PhaseJet, CalabiError> {
    if l == 0 {
        return Err(CalabiError::NoPoints);
    }
    let g = calabi_g_body(phi.body(), l + 1)?;
    let src = g.space();
    let dst = VarSpace::new(l, src.cdim());
    let plan = SubstPlan::from_rule(src, dst, |v: Var| {
        (v.copy > 0).then(|| Var::new(v.copy - 1, v.kind, v.axis))
    });
    let f = PhaseJet::new(g.relabel(&plan))?;
    Ok(if phi.is_exact() { f.exact() } else { f })
}

/// What [`critical_check`] verified.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CriticalReport {
    pub l: usize,
    pub gradients_checked: usize,
    pub deg_max: u32,
}

/// `G^(l)` vanishes with its gradient at the origin, and
/// `∂G/∂z_i^p = Φ_{,p}(z_i, z̄_{i+1}) − Φ_{,p}(z_i, z̄_i)`,
/// `∂G/∂z̄_i^q = Φ_{,q̄}(z_{i−1}, z̄_i) − Φ_{,q̄}(z_i, z̄_i)` as jets.
pub fn critical_check(phi: &Jet, l: usize) -> Result<CriticalReport, CalabiError> {
    critical_check_jet(&calabi_g_body(phi, l)?, phi)
}

/// [`critical_check`] for a given jet `g` on `l` copies against `Φ`.
pub fn critical_check_jet(g: &Jet, phi: &Jet) -> Result<CriticalReport, CalabiError> {
    let sp = g.space();
    let l = sp.copies();
    let m = sp.cdim();
    let zero = sp.zero_mono();
    if g.terms().any(|(_, mono, _)| *mono == zero) {
        return Err(CalabiError::NotCritical(format!("G({l}) is {} at the origin", g.eval_origin())));
    }
    let mut checked = 0;
    for i in 0..l {
        for p in 0..m {
            for kind in [Kind::Holo, Kind::Anti] {
                let idx = sp.idx(Var::new(i, kind, p));
                let dg = g.deriv(idx);
                let name = sp.name(idx);
                if !dg.eval_origin().is_zero() {
                    return Err(CalabiError::NotCritical(format!("dG/d{name} is nonzero at the origin")));
                }
                let dphi = phi.deriv(phi.space().idx(Var::new(0, kind, p)));
                let expect = match kind {
                    Kind::Holo => &place(&dphi, l, i, (i + 1) % l) - &place(&dphi, l, i, i),
                    Kind::Anti => &place(&dphi, l, (i + l - 1) % l, i) - &place(&dphi, l, i, i),
                };
                if dg != expect {
                    return Err(CalabiError::NotCritical(format!("dG/d{name} differs from the gradient formula")));
                }
                checked += 1;
            }
        }
    }
    Ok(CriticalReport {
        l,
        gradients_checked: checked,
        deg_max: phi.trunc().deg_max,
    })
}

/// Both sides of the trace identity and their difference, through
/// ν^`certified_order`.
#[derive(Clone, Debug)]
pub struct TraceIdentity {
    pub lhs: NuSeries,
    pub rhs: NuSeries,
    pub residual: NuSeries,
    pub certified_order: i32,
}

fn solve_weight(alg: &DistAlgebra, phase: &PhaseJet, us: &[PointDistribution]) -> i64 {
    let mut w = alg.certified_weight();
    if let Some(p) = phase.certified_weight() {
        w = w.min(p);
    }
    for u in us {
        w = w.min(u.nu_max() as i64);
    }
    w
}

fn check_inputs(alg: &DistAlgebra, us: &[PointDistribution]) -> Result<(), CalabiError> {
    if us.is_empty() {
        return Err(CalabiError::NoPoints);
    }
    if us.iter().any(|u| u.space() != alg.engine().space()) {
        return Err(CalabiError::Arity { expected: us.len() });
    }
    Ok(())
}

/// `n_trace(u₁ • … • u_l) − ⟨(u₁ ⊗ … ⊗ u_l) ∘ e^{G^(l)}, 1⟩`.
pub fn main_theorem_residual(
    alg: &DistAlgebra,
    phi: &PotentialJet,
    us: &[PointDistribution],
) -> Result<TraceIdentity, CalabiError> {
    trace_identity(alg, &calabi_g(phi, us.len())?, us)
}

/// The trace identity with an explicit phase on `us.len()` copies.
pub fn trace_identity(
    alg: &DistAlgebra,
    g: &PhaseJet,
    us: &[PointDistribution],
) -> Result<TraceIdentity, CalabiError> {
    check_inputs(alg, us)?;
    let w = solve_weight(alg, g, us);
    let order = (w / 2) as i32;
    if w < 0 {
        return Err(CalabiError::Inadequate(0));
    }
    let lhs = n_trace(&alg.bullet_chain(us, w)?).truncate(order);
    let parts: Vec<PointDistribution> = us.iter().map(|u| u.truncate_weight(w)).collect();
    let tensor = PointDistribution::tensor(&parts)?.truncate_weight(w).with_nu_max(w as i32);
    let rhs = act_exp_value(&tensor, g)?.truncate(order);
    // a side that stops short would hide the top orders in the difference
    let short = lhs.nu_max().min(rhs.nu_max());
    if short < order {
        return Err(CalabiError::Inadequate(short));
    }
    let residual = lhs.sub(&rhs).truncate(order);
    Ok(TraceIdentity {
        lhs,
        rhs,
        residual,
        certified_order: order,
    })
}

/// `(g₁⋆f₂)(0)(g₂⋆f₃)(0)⋯(g_l⋆f₁)(0)` for `u_i = λ(f_i ⊗ g_i)`.
pub fn product_formula(alg: &DistAlgebra, pairs: &[(Jet, Jet)]) -> Result<NuSeries, CalabiError> {
    let e = alg.engine();
    let nu_max = e.trunc().nu_max;
    let mut acc = NuSeries::constant(CRat::one(), 0, nu_max);
    for i in 0..pairs.len() {
        let (_, g) = &pairs[i];
        let (f, _) = &pairs[(i + 1) % pairs.len()];
        let s = e.star_at_origin(g, f).map_err(DistAlgError::from)?;
        acc = acc.mul(&s);
    }
    Ok(acc)
}

/// `W(U) = Σ a ν^{r−Σ|γ_j|} n_trace(•_j ν^{|γ_j|}δ∘∂^{γ_j})` for a
/// natural distribution `U` on `l` copies.
pub fn trace_functional(alg: &DistAlgebra, u: &PointDistribution, weight: i64) -> Result<NuSeries, CalabiError> {
    let sp = u.space();
    let l = sp.copies();
    let n1 = 2 * sp.cdim();
    let single = alg.engine().space();
    let order = (weight / 2) as i32;
    let mut memo: std::collections::HashMap<Mono, Jet> = std::collections::HashMap::new();
    let mut acc = NuSeries::zero(0, order.max(0));
    for (r, gamma, a) in u.terms() {
        let mut prod: Option<Jet> = None;
        let mut spent = 0i32;
        for j in 0..l {
            let gj = Mono::from_slice(&gamma.0[j * n1..(j + 1) * n1]);
            spent += gj.degree() as i32;
            let gpre = match memo.get(&gj) {
                Some(x) => x.clone(),
                None => {
                    let mut piece = PointDistribution::zero(single, weight as i32);
                    piece.add_term(gj.degree() as i32, gj.clone(), CRat::one());
                    let x = alg.lambda_g_inverse(&piece, weight)?;
                    memo.insert(gj.clone(), x.clone());
                    x
                }
            };
            prod = Some(match prod {
                None => gpre,
                Some(p) => alg.c_mul(&p, &gpre)?.truncate_filtration(weight),
            });
        }
        if r < spent {
            return Err(CalabiError::DistAlg(DistAlgError::NotNatural {
                nu: r,
                order: gamma.degree(),
            }));
        }
        let t = alg.c_trace(&prod.expect("at least one copy"))?;
        for (k, c) in t.terms() {
            acc.add_term(k + r - spent, a * c);
        }
    }
    Ok(acc)
}

/// A coordinate direction `∂/∂z_i^p` or `∂/∂z̄_i^q` on `l` copies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Direction {
    pub copy: usize,
    pub kind: Kind,
    pub axis: usize,
}

impl Direction {
    pub fn all(l: usize, m: usize) -> Vec<Direction> {
        let mut out = Vec::new();
        for copy in 0..l {
            for kind in [Kind::Holo, Kind::Anti] {
                for axis in 0..m {
                    out.push(Direction { copy, kind, axis });
                }
            }
        }
        out
    }
}

/// `W((ν∂ − ν∂G^(l))^t (u₁ ⊗ … ⊗ u_l))` in one direction, through the
/// certified order; zero when the trace identity holds.
pub fn annihilator_residual(
    alg: &DistAlgebra,
    phi: &PotentialJet,
    us: &[PointDistribution],
    dir: Direction,
) -> Result<(NuSeries, i32), CalabiError> {
    annihilator_residual_with(alg, &calabi_g(phi, us.len())?, us, dir)
}

/// [`annihilator_residual`] with an explicit phase.
pub fn annihilator_residual_with(
    alg: &DistAlgebra,
    g: &PhaseJet,
    us: &[PointDistribution],
    dir: Direction,
) -> Result<(NuSeries, i32), CalabiError> {
    check_inputs(alg, us)?;
    let w = solve_weight(alg, g, us);
    let order = (w / 2) as i32;
    let parts: Vec<PointDistribution> = us.iter().map(|u| u.truncate_weight(w)).collect();
    let tensor = PointDistribution::tensor(&parts)?.truncate_weight(w).with_nu_max(w as i32);
    let sp = tensor.space();
    let idx = sp.idx(Var::new(dir.copy, dir.kind, dir.axis));
    let v = FieldJet::partial(sp, g.body().trunc(), idx);
    let img = transpose_field(&tensor, &v, g)?.truncate_weight(w);
    Ok((trace_functional(alg, &img, w)?.truncate(order), order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::{parse_jet, TruncationSpec};
    use crate::star::{Builtin, StarEngine};

    fn flat() -> PotentialJet {
        Builtin::Flat.potential(1, 8)
    }

    #[test]
    fn calabi_examples() {
        let p = flat();
        assert!(calabi_g(&p, 1).unwrap().body().is_zero());
        let g = calabi_g(&p, 2).unwrap();
        let sp = VarSpace::new(2, 1);
        let expect = parse_jet("-nu^-1*(z1_c1 - z1_c2)*(zb1_c1 - zb1_c2)", sp, g.body().trunc()).unwrap();
        assert_eq!(*g.body(), expect);
        let f = frozen_phase(&p, 1).unwrap();
        let e1 = parse_jet("-nu^-1*z1*zb1", VarSpace::single(1), f.body().trunc()).unwrap();
        assert_eq!(*f.body(), e1);
        assert!(f.body().eval_origin().is_zero());
    }

    #[test]
    fn gauge_invariance() {
        let p = Builtin::Hyperbolic.potential(1, 8);
        let shift = parse_jet("nu^-1*(2*z1 - z1^3) + 3*zb1^2 + nu*zb1", p.space(), p.body().trunc()).unwrap();
        let shifted = p.body() + &shift;
        for l in 1..=3 {
            assert_eq!(calabi_g_body(&shifted, l).unwrap(), calabi_g_body(p.body(), l).unwrap());
        }
    }

    #[test]
    fn critical_points() {
        assert_eq!(critical_check(flat().body(), 1).unwrap().gradients_checked, 2);
        critical_check(flat().body(), 2).unwrap();
        critical_check(Builtin::Hyperbolic.potential(1, 8).body(), 3).unwrap();
        critical_check(Builtin::FubiniStudy.potential(2, 6).body(), 2).unwrap();
        // Linear terms of Φ cancel cyclically.
        let lin = parse_jet("nu^-1*(z1*zb1 + z1)", VarSpace::single(1), TruncationSpec::new(-1, 0, 4)).unwrap();
        critical_check(&lin, 2).unwrap();
        let p = flat();
        let g = calabi_g_body(p.body(), 2).unwrap();
        let bent = &g + &parse_jet("nu^-1*z1_c1^2*zb1_c2", g.space(), g.trunc()).unwrap();
        assert!(critical_check_jet(&bent, p.body()).is_err());
        let tilted = &g + &parse_jet("z1_c2", g.space(), g.trunc()).unwrap();
        assert!(critical_check_jet(&tilted, p.body()).is_err());
    }

    fn setup() -> (StarEngine, PotentialJet) {
        (StarEngine::antiwick(1, TruncationSpec::new(0, 8, 8)), flat())
    }

    #[test]
    fn main_theorem_examples() {
        let (e, p) = setup();
        let alg = DistAlgebra::new(&e);
        let sp = e.space();
        let f = parse_jet("z1_c1*zb1_c2", alg.space(), alg.trunc()).unwrap();
        let u = alg.lambda_of(&f).unwrap();
        let r1 = main_theorem_residual(&alg, &p, std::slice::from_ref(&u)).unwrap();
        assert!(r1.residual.is_zero());
        assert_eq!(r1.lhs.coeff(1), CRat::one());
        let r2 = main_theorem_residual(&alg, &p, &[u.clone(), u.clone()]).unwrap();
        assert_eq!(r2.certified_order, 4);
        assert!(r2.residual.is_zero());
        assert_eq!(r2.lhs.coeff(2), CRat::one());
        assert_eq!(r2.lhs.terms().count(), 1);
        let d = PointDistribution::delta(sp, 8);
        let r3 = main_theorem_residual(&alg, &p, &[d.clone(), d.clone()]).unwrap();
        assert!(r3.residual.is_zero());
        assert_eq!(r3.rhs.coeff(0), CRat::one());
    }

    #[test]
    fn annihilator_examples() {
        let (e, p) = setup();
        let alg = DistAlgebra::new(&e);
        let d = PointDistribution::delta(e.space(), 8);
        let dir = Direction { copy: 0, kind: Kind::Holo, axis: 0 };
        assert!(annihilator_residual(&alg, &p, &[d.clone(), d], dir).unwrap().0.is_zero());
        let f = parse_jet("z1_c1*zb1_c2", alg.space(), alg.trunc()).unwrap();
        let u = alg.lambda_of(&f).unwrap();
        for dir in Direction::all(2, 1) {
            let (r, order) = annihilator_residual(&alg, &p, &[u.clone(), u.clone()], dir).unwrap();
            assert_eq!(order, 4);
            assert!(r.is_zero(), "{dir:?}: {r}");
        }
    }
}
