//! The action `u ∘ e^φ` of formal oscillatory exponents on point
//! distributions, transposed vector fields, and FOI checks.

use std::collections::{HashMap, HashSet};

use crate::diffop::{DiffOpError, DiffOperator, PointDistribution};
use crate::kernel::{CRat, Jet, KernelError, Mono, NuSeries, TruncationSpec, VarSpace};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OscError {
    #[error("invalid phase: {0}")]
    InvalidPhase(String),
    #[error("invalid density: {0}")]
    InvalidDensity(String),
    #[error("operator is not natural: term nu^{nu} with derivative order {order}")]
    NotNatural { nu: i32, order: u32 },
    #[error("space mismatch")]
    SpaceMismatch,
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    DiffOp(#[from] DiffOpError),
}

/// A formal phase `φ = ν⁻¹φ₋₁ + φ₀ + …` with a critical point of value 0
/// at the origin for `φ₋₁`.
#[derive(Clone, Debug)]
pub struct PhaseJet {
    body: Jet,
    weight: Option<i64>,
}

impl PhaseJet {
    /// Terms of filtration weight above `deg_max − 2` are treated as
    /// unknown; use [`PhaseJet::exact`] for polynomial phases.
    pub fn new(body: Jet) -> Result<Self, OscError> {
        if let Some(k) = body.min_nu() {
            if k < -1 {
                return Err(OscError::InvalidPhase(format!("phase has a nu^{k} term")));
            }
        }
        for (k, m, _) in body.terms() {
            if k == -1 && m.degree() < 2 {
                return Err(OscError::InvalidPhase(
                    "nu^-1 part must vanish to second order at the origin".into(),
                ));
            }
        }
        let weight = Some(body.trunc().deg_max as i64 - 2);
        Ok(PhaseJet { body, weight })
    }

    pub fn exact(mut self) -> Self {
        self.weight = None;
        self
    }

    pub fn with_weight(mut self, w: Option<i64>) -> Self {
        self.weight = w;
        self
    }

    pub fn zero(space: VarSpace, trunc: TruncationSpec) -> Self {
        PhaseJet {
            body: Jet::zero(space, trunc),
            weight: None,
        }
    }

    pub fn body(&self) -> &Jet {
        &self.body
    }

    pub fn space(&self) -> VarSpace {
        self.body.space()
    }

    /// Filtration weight through which the phase is exact; `None` if fully
    /// exact.
    pub fn certified_weight(&self) -> Option<i64> {
        self.weight
    }

    pub fn add(&self, o: &PhaseJet) -> Result<PhaseJet, OscError> {
        let weight = match (self.weight, o.weight) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        Ok(PhaseJet {
            body: self.body.try_add(&o.body)?,
            weight,
        })
    }

    /// `e^{φ(0)}` through `ν^nu_max`.
    fn exp_at_origin(&self, nu_max: i32) -> Result<NuSeries, OscError> {
        Ok(self.widened(nu_max).eval_origin().with_window(0, nu_max).exp_nonneg()?)
    }

    /// The body, with its ν-window widened to at least `nu_max`.
    fn widened(&self, nu_max: i32) -> Jet {
        let t = self.body.trunc();
        self.body.retruncate(t.with_nu_max(t.nu_max.max(nu_max)))
    }
}

/// A density `ρ = ρ₀ + νρ₁ + …` with `ρ₀(0) ≠ 0`.
#[derive(Clone, Debug)]
pub struct DensityJet {
    body: Jet,
}

impl DensityJet {
    pub fn new(body: Jet) -> Result<Self, OscError> {
        if body.min_nu().unwrap_or(0) < 0 {
            return Err(OscError::InvalidDensity("negative powers of nu".into()));
        }
        if body.coeff(0, &body.space().zero_mono()).is_zero() {
            return Err(OscError::InvalidDensity("rho_0 vanishes at the origin".into()));
        }
        Ok(DensityJet { body })
    }

    pub fn one(space: VarSpace, trunc: TruncationSpec) -> Self {
        DensityJet {
            body: Jet::one(space, trunc),
        }
    }

    pub fn body(&self) -> &Jet {
        &self.body
    }

    /// `1/ρ` by the geometric series around the constant term.
    pub fn inverse(&self) -> Jet {
        let sp = self.body.space();
        let tr = self.body.trunc();
        let c0 = self.body.coeff(0, &sp.zero_mono());
        let c0_inv = c0.inv().expect("checked in constructor");
        let mut eps = self.body.scale(&c0_inv);
        eps.add_term(0, sp.zero_mono(), -CRat::one());
        let steps = tr.deg_max as i32 + tr.nu_max.max(0) + 1;
        let mut acc = Jet::one(sp, tr);
        let mut power = Jet::one(sp, tr);
        let neg = -&eps;
        for _ in 0..steps {
            power = &power * &neg;
            if power.is_zero() {
                break;
            }
            acc.add_assign(&power);
        }
        acc.scale(&c0_inv)
    }
}

/// A formal vector field `Σ vⁱ ∂_i` over all coordinates.
#[derive(Clone, Debug)]
pub struct FieldJet {
    comps: Vec<Jet>,
}

impl FieldJet {
    pub fn new(comps: Vec<Jet>) -> Result<Self, OscError> {
        let Some(first) = comps.first() else {
            return Err(OscError::SpaceMismatch);
        };
        let sp = first.space();
        if comps.len() != sp.nvars() || comps.iter().any(|c| c.space() != sp) {
            return Err(OscError::SpaceMismatch);
        }
        Ok(FieldJet { comps })
    }

    pub fn zero(space: VarSpace, trunc: TruncationSpec) -> Self {
        FieldJet {
            comps: vec![Jet::zero(space, trunc); space.nvars()],
        }
    }

    /// `∂_idx`.
    pub fn partial(space: VarSpace, trunc: TruncationSpec, idx: usize) -> Self {
        let mut f = Self::zero(space, trunc);
        f.comps[idx] = Jet::one(space, trunc);
        f
    }

    /// `c ∂_idx`.
    pub fn scaled_partial(c: Jet, idx: usize) -> Self {
        let mut f = Self::zero(c.space(), c.trunc());
        f.comps[idx] = c;
        f
    }

    pub fn space(&self) -> VarSpace {
        self.comps[0].space()
    }

    pub fn components(&self) -> &[Jet] {
        &self.comps
    }

    /// `v f = Σ vⁱ ∂_i f`.
    pub fn apply(&self, f: &Jet) -> Result<Jet, OscError> {
        let mut acc = Jet::zero(f.space(), f.trunc());
        for (i, c) in self.comps.iter().enumerate() {
            if !c.is_zero() {
                acc.add_assign(&c.try_mul(&f.deriv(i))?);
            }
        }
        Ok(acc)
    }

    /// `Σ ∂_i(ρ vⁱ) / ρ`.
    pub fn divergence(&self, rho: &DensityJet) -> Result<Jet, OscError> {
        let r = rho.body();
        let mut acc = Jet::zero(r.space(), r.trunc());
        for (i, c) in self.comps.iter().enumerate() {
            if !c.is_zero() {
                acc.add_assign(&r.try_mul(c)?.deriv(i));
            }
        }
        Ok(acc.try_mul(&rho.inverse())?)
    }

    /// The operator `νv − ν(vφ)`.
    fn transposed_operator(&self, phi: &Jet, trunc: TruncationSpec) -> Result<DiffOperator, OscError> {
        let sp = self.space();
        let mut op = DiffOperator::zero(sp, trunc);
        let mut vphi = Jet::zero(sp, trunc);
        for (i, c) in self.comps.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let c = c.retruncate(trunc);
            op.add_term(Mono::unit(sp.nvars(), i), c.shift_nu(1));
            vphi.add_assign(&c.try_mul(&phi.retruncate(trunc).deriv(i))?);
        }
        op.add_term(sp.zero_mono(), -&vphi.shift_nu(1));
        Ok(op)
    }
}

fn check_natural(n: &DiffOperator) -> Result<(), OscError> {
    n.is_natural().map_err(|w| OscError::NotNatural {
        nu: w.nu,
        order: w.gamma.degree(),
    })
}

/// `e^{−φ} N e^{φ} = Σ_k (1/k!) (−ad φ)^k N`; the sum stops at the order
/// of `N`.
pub fn conjugate_by_exp(n: &DiffOperator, phi: &PhaseJet) -> Result<DiffOperator, OscError> {
    if n.space() != phi.space() {
        return Err(OscError::SpaceMismatch);
    }
    check_natural(n)?;
    let body = phi.widened(n.trunc().nu_max);
    let mut acc = n.clone();
    let mut term = n.clone();
    let mut k = 0i64;
    while !term.is_zero() {
        k += 1;
        let c = CRat::from_ratio(-1, k);
        term = term.ad_mult(&body)?.scale(&c);
        acc = acc.add(&term)?;
    }
    check_natural(&acc)?;
    Ok(acc)
}

fn action_weight(nu_max: i32, phi: &PhaseJet) -> i64 {
    let w = nu_max as i64;
    phi.certified_weight().map_or(w, |p| w.min(p))
}

/// `u ∘ e^φ` computed from the representative `δ∘N = u`; the result is
/// kept through the certified filtration weight.
pub fn act_exp_with(n: &DiffOperator, phi: &PhaseJet) -> Result<PointDistribution, OscError> {
    let w = action_weight(n.trunc().nu_max, phi);
    let conj = conjugate_by_exp(n, phi)?;
    let e0 = phi.exp_at_origin(w as i32)?;
    Ok(PointDistribution::of_operator(&conj)
        .mul_series(&e0)
        .truncate_weight(w)
        .with_nu_max(w as i32))
}

/// `u ∘ e^φ := e^{φ(0)} δ ∘ (e^{−φ} N e^{φ})` with the constant-coefficient
/// representative `N`.
pub fn act_exp(u: &PointDistribution, phi: &PhaseJet) -> Result<PointDistribution, OscError> {
    if u.space() != phi.space() {
        return Err(OscError::SpaceMismatch);
    }
    let ord = u.order().unwrap_or(0);
    let n = u.to_operator(TruncationSpec::new(-(ord as i32), u.nu_max(), ord));
    act_exp_with(&n, phi)
}

/// `⟨u ∘ e^φ, 1⟩`, through ν^{⌊W/2⌋} for the certified weight `W`.
///
/// Uses `e^{−φ}∂^γ e^{φ} 1 = Y_γ` with `Y_{γ+e_i} = ∂_i Y_γ + φ_{,i} Y_γ`,
/// keeping only the Taylor terms that can still reach the origin.
pub fn act_exp_value(u: &PointDistribution, phi: &PhaseJet) -> Result<NuSeries, OscError> {
    if u.space() != phi.space() {
        return Err(OscError::SpaceMismatch);
    }
    let w = action_weight(u.nu_max(), phi);
    let top = (w / 2) as i32;
    let sp = u.space();
    let n = sp.nvars();
    let gammas: HashSet<Mono> = u.terms().map(|(_, g, _)| g.clone()).collect();
    let mut closure: HashSet<Mono> = HashSet::new();
    for g in &gammas {
        for s in g.submonos() {
            closure.insert(s);
        }
    }
    let maxdeg = closure.iter().map(|g| g.degree()).max().unwrap_or(0);
    let deg_cap = phi.body().trunc().deg_max.max(maxdeg);
    let body = phi.widened(top + maxdeg as i32);
    let grads: Vec<Jet> = (0..n).map(|i| body.deriv(i)).collect();
    let mut order: Vec<Mono> = closure.iter().cloned().collect();
    order.sort_by_key(|g| (g.degree(), g.clone()));
    let trunc = TruncationSpec::new(-(maxdeg as i32), top + maxdeg as i32, deg_cap);
    let mut memo: HashMap<Mono, Jet> = HashMap::new();
    for g in &order {
        if g.is_zero() {
            memo.insert(g.clone(), Jet::one(sp, trunc));
            continue;
        }
        let i = g.0.iter().position(|&e| e > 0).expect("nonzero");
        let mut p = g.clone();
        p.0[i] -= 1;
        let prev = &memo[&p];
        let slack = top + (maxdeg - g.degree()) as i32;
        let keep = |k: i32, mu: &Mono| k <= slack && closure.contains(&g.add(mu));
        let mut y = prev.deriv(i).filter(keep);
        for (k1, m1, c1) in prev.terms() {
            for (k2, m2, c2) in grads[i].terms() {
                let mu = m1.add(m2);
                if keep(k1 + k2, &mu) {
                    y.add_term(k1 + k2, mu, c1 * c2);
                }
            }
        }
        memo.insert(g.clone(), y);
    }
    let zero = sp.zero_mono();
    let mut acc = NuSeries::zero(0, top.max(0));
    for (r, g, a) in u.terms() {
        let y = &memo[g];
        for (k, m, c) in y.terms() {
            if *m == zero {
                acc.add_term(r + k, a * c);
            }
        }
    }
    let e0 = phi.exp_at_origin(top.max(0))?;
    Ok(acc.mul(&e0).truncate(top.max(0)))
}

/// `u ∘ (νv − ν(vφ))`.
pub fn transpose_field(u: &PointDistribution, v: &FieldJet, phi: &PhaseJet) -> Result<PointDistribution, OscError> {
    if u.space() != v.space() || u.space() != phi.space() {
        return Err(OscError::SpaceMismatch);
    }
    let pt = phi.body().trunc();
    let trunc = TruncationSpec::new(pt.nu_min.min(-1), pt.nu_max.max(u.nu_max()), pt.deg_max);
    let op = v.transposed_operator(phi.body(), trunc)?;
    Ok(u.compose_operator(&op)?.with_nu_max(u.nu_max()))
}

/// `Λ(v f + (vφ + div_ρ v) f)`; zero for a formal oscillatory integral.
pub fn foi_residual(
    lambda: &PointDistribution,
    phi: &PhaseJet,
    rho: &DensityJet,
    v: &FieldJet,
    f: &Jet,
) -> Result<NuSeries, OscError> {
    let body = phi.body().retruncate(f.trunc().meet(&phi.body().trunc()).with_nu_max(f.trunc().nu_max));
    let vf = v.apply(f)?;
    let vphi = v.apply(&body)?;
    let div = v.divergence(rho)?;
    let arg = vf.try_add(&vphi.try_add(&div)?.try_mul(f)?)?;
    Ok(lambda.eval(&arg)?)
}

/// `δ ∘ exp(ν Σ ∂_{z_i} ∂_{z̄_i})` through ν^`nu_max`: the FOI of the
/// phase `−ν⁻¹ Σ z_i z̄_i` with `Λ(1) = 1`.
pub fn gaussian(space: VarSpace, nu_max: i32) -> PointDistribution {
    let m = space.cdim();
    let mut u = PointDistribution::zero(space, nu_max);
    for k in 0..=nu_max.max(0) as u32 {
        for a in Mono::all_up_to(m, k).into_iter().filter(|a| a.degree() == k) {
            // (Σ ∂_i∂̄_i)^k / k! = Σ_{|a|=k} ∂^a ∂̄^a / a!
            let mut g = space.zero_mono();
            for i in 0..m {
                g.0[i] = a.0[i];
                g.0[m + i] = a.0[i];
            }
            let c = CRat::from_bigint(a.factorial()).inv().expect("nonzero");
            u.add_term(k as i32, g, c);
        }
    }
    u
}

/// Three-valued nondegeneracy verdict for a Gram matrix over `ℂ[[ν]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GramVerdict {
    /// The determinant's lowest coefficient sits at ν^`order`.
    Nondegenerate { order: i32 },
    /// A constant vector lies in the kernel of every ν-coefficient of the
    /// Gram matrix within the window.
    Degenerate { window: i32 },
    /// Determinant zero within the window but no constant kernel vector.
    Inconclusive { required_nu_max: i32 },
}

#[derive(Clone, Debug)]
pub struct GramReport {
    pub basis: Vec<Mono>,
    pub matrix: Vec<Vec<NuSeries>>,
    pub determinant: NuSeries,
    pub verdict: GramVerdict,
}

/// Determinant by expansion over column subsets.
fn series_det(m: &[Vec<NuSeries>], lo: i32, hi: i32) -> NuSeries {
    let n = m.len();
    let mut minors: HashMap<u64, NuSeries> = HashMap::new();
    minors.insert(0, NuSeries::constant(CRat::one(), lo, hi));
    for entries in m {
        let mut next: HashMap<u64, NuSeries> = HashMap::new();
        for (mask, val) in &minors {
            for (col, e) in entries.iter().enumerate() {
                if mask & (1 << col) != 0 || e.is_zero() {
                    continue;
                }
                // Columns already used to the right of `col` are inversions.
                let above = (mask >> (col + 1)).count_ones();
                let mut p = val.mul(e);
                if above % 2 == 1 {
                    p = p.scale(&-CRat::one());
                }
                let entry = next.entry(mask | (1 << col)).or_insert_with(|| NuSeries::zero(lo, hi));
                *entry = entry.add(&p);
            }
        }
        minors = next;
    }
    minors.remove(&((1u64 << n) - 1)).unwrap_or_else(|| NuSeries::zero(lo, hi))
}

/// Gram matrix `Λ(m_i m_j)` over the monomials of degree ≤ `deg`.
pub fn pairing_gram(lambda: &PointDistribution, deg: u32) -> Result<GramReport, OscError> {
    let sp = lambda.space();
    let n = sp.nvars();
    let basis = Mono::all_up_to(n, deg);
    if basis.len() > 20 {
        return Err(OscError::InvalidDensity(format!("gram basis of {} monomials is too large", basis.len())));
    }
    let window = lambda.nu_max();
    let trunc = TruncationSpec::new(0, window, 2 * deg);
    let mut matrix = Vec::new();
    for a in &basis {
        let mut row = Vec::new();
        for b in &basis {
            let f = Jet::monomial(sp, trunc, 0, a.add(b), CRat::one());
            row.push(lambda.eval(&f)?);
        }
        matrix.push(row);
    }
    let lo = lambda.min_nu().unwrap_or(0).min(0) * basis.len() as i32;
    let det = series_det(&matrix, lo, window);
    let required: i32 = basis.iter().map(|m| m.degree() as i32).sum();
    let verdict = match det.order() {
        Some(order) => GramVerdict::Nondegenerate { order },
        None => {
            // Stack the ν-coefficients and look for a common kernel vector.
            let mut stacked = Vec::new();
            for k in lo..=window {
                for row in &matrix {
                    stacked.push(row.iter().map(|e| e.coeff(k)).collect::<Vec<_>>());
                }
            }
            if crate::kernel::linalg::rank(&stacked) < basis.len() {
                GramVerdict::Degenerate { window }
            } else {
                GramVerdict::Inconclusive {
                    required_nu_max: required,
                }
            }
        }
    };
    Ok(GramReport {
        basis,
        matrix,
        determinant: det,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::parse_jet;

    fn tr() -> TruncationSpec {
        TruncationSpec::new(-1, 4, 8)
    }

    fn phase(sp: VarSpace, s: &str) -> PhaseJet {
        PhaseJet::new(parse_jet(s, sp, tr()).unwrap()).unwrap().exact()
    }

    fn two_copy_phase() -> (VarSpace, PhaseJet) {
        let sp = VarSpace::new(2, 1);
        (sp, phase(sp, "-nu^-1*(z1_c1 - z1_c2)*(zb1_c1 - zb1_c2)"))
    }

    #[test]
    fn phase_invariants() {
        let sp = VarSpace::single(1);
        assert!(PhaseJet::new(parse_jet("nu^-1*z1", sp, tr()).unwrap()).is_err());
        assert!(PhaseJet::new(parse_jet("nu^-1*(1 + z1*zb1)", sp, tr()).unwrap()).is_err());
        assert!(PhaseJet::new(parse_jet("z1 + nu^-1*z1^2", sp, tr()).unwrap()).is_ok());
    }

    #[test]
    fn conjugation_examples() {
        let (sp, phi) = two_copy_phase();
        let t = TruncationSpec::new(-2, 4, 8);
        let id = DiffOperator::identity(sp, t);
        assert_eq!(conjugate_by_exp(&id, &phi).unwrap(), id);
        let mut g = sp.zero_mono();
        g.0[0] = 1;
        g.0[1] = 1;
        let n = DiffOperator::monomial(sp, t, 2, g, CRat::one());
        let zero = PhaseJet::zero(sp, t);
        assert_eq!(conjugate_by_exp(&n, &zero).unwrap(), n);
        let c = conjugate_by_exp(&n, &phi).unwrap();
        let v = c.apply_at_origin(&Jet::one(sp, t)).unwrap();
        assert_eq!(v.coeff(1), CRat::from_int(-1));
        assert_eq!(v.terms().count(), 1);
        let bad = DiffOperator::monomial(sp, t, 0, Mono::unit(4, 0), CRat::one());
        assert!(matches!(conjugate_by_exp(&bad, &phi), Err(OscError::NotNatural { .. })));
    }

    fn lambda_zzb(sp: VarSpace, nu_max: i32) -> PointDistribution {
        let mut u = PointDistribution::zero(sp, nu_max);
        u.add_term(1, sp.zero_mono(), CRat::one());
        u.add_term(2, Mono::from_slice(&[1, 1]), CRat::one());
        u
    }

    #[test]
    fn act_exp_examples() {
        let (sp2, phi) = two_copy_phase();
        let sp = VarSpace::single(1);
        let u = lambda_zzb(sp, 8);
        let zero = PhaseJet::zero(sp, tr());
        assert_eq!(act_exp(&u, &zero).unwrap(), u);
        let d = PointDistribution::delta(sp2, 4);
        let dd = act_exp(&d, &phi).unwrap();
        assert_eq!(crate::distalg::n_trace(&dd).coeff(0), CRat::one());
        let uu = PointDistribution::tensor(&[u.clone(), u]).unwrap();
        let acted = act_exp(&uu, &phi).unwrap();
        let nu2 = NuSeries::monomial(2, CRat::one(), 0, 4);
        assert_eq!(crate::distalg::n_trace(&acted).truncate(4), nu2);
        assert_eq!(act_exp_value(&uu, &phi).unwrap(), nu2);
    }

    #[test]
    fn transpose_examples() {
        let sp = VarSpace::single(1);
        let t = tr();
        let d = PointDistribution::delta(sp, 4);
        let zero = PhaseJet::zero(sp, t);
        let v0 = FieldJet::zero(sp, t);
        assert!(transpose_field(&d, &v0, &zero).unwrap().is_zero());
        let dz = FieldJet::partial(sp, t, 0);
        let mut expect = PointDistribution::zero(sp, 4);
        expect.add_term(1, Mono::from_slice(&[1, 0]), CRat::one());
        assert_eq!(transpose_field(&d, &dz, &zero).unwrap(), expect);
        let phi = phase(sp, "-nu^-1*z1*zb1");
        assert_eq!(transpose_field(&d, &dz, &phi).unwrap(), expect);
        // The image is annihilated by ⟨· ∘ e^φ, 1⟩.
        let u = lambda_zzb(sp, 6);
        for idx in 0..2 {
            let v = FieldJet::partial(sp, t, idx);
            let img = transpose_field(&u, &v, &phi).unwrap();
            assert!(act_exp_value(&img, &phi).unwrap().is_zero());
        }
    }

    #[test]
    fn gaussian_is_foi() {
        let sp = VarSpace::single(1);
        let t = TruncationSpec::new(-1, 6, 8);
        let lam = gaussian(sp, 6);
        let phi = PhaseJet::new(parse_jet("-nu^-1*z1*zb1", sp, t).unwrap()).unwrap();
        let rho = DensityJet::one(sp, t);
        let fields = [
            FieldJet::partial(sp, t, 0),
            FieldJet::partial(sp, t, 1),
            FieldJet::scaled_partial(parse_jet("z1", sp, t).unwrap(), 0),
        ];
        for v in &fields {
            for m in Mono::all_up_to(2, 4) {
                let f = Jet::monomial(sp, t, 0, m, CRat::one());
                let r = foi_residual(&lam, &phi, &rho, v, &f).unwrap();
                assert!(r.is_zero(), "{r}");
            }
        }
        let bent = PhaseJet::new(parse_jet("-nu^-1*z1*zb1 + nu^-1*z1^2*zb1", sp, t).unwrap()).unwrap();
        let f = Jet::one(sp, t);
        let r = foi_residual(&lam, &bent, &rho, &fields[0], &f).unwrap();
        assert!(!r.is_zero());
    }

    #[test]
    fn density_inverse() {
        let sp = VarSpace::single(1);
        let rho = DensityJet::new(parse_jet("2 + z1*zb1 + nu", sp, tr()).unwrap()).unwrap();
        let prod = &rho.inverse() * rho.body();
        assert_eq!(prod, Jet::one(sp, tr()));
    }

    #[test]
    fn gram_examples() {
        let sp = VarSpace::single(1);
        let d = PointDistribution::delta(sp, 4);
        let g0 = pairing_gram(&d, 0).unwrap();
        assert_eq!(g0.matrix.len(), 1);
        assert_eq!(g0.verdict, GramVerdict::Nondegenerate { order: 0 });
        let lam = gaussian(sp, 4);
        let g1 = pairing_gram(&lam, 1).unwrap();
        assert_eq!(g1.verdict, GramVerdict::Nondegenerate { order: 2 });
        assert_eq!(g1.determinant.coeff(2), CRat::from_int(-1));
        assert_eq!(pairing_gram(&d, 1).unwrap().verdict, GramVerdict::Degenerate { window: 4 });
        assert_eq!(
            pairing_gram(&lam, 2).unwrap().verdict,
            GramVerdict::Inconclusive { required_nu_max: 8 }
        );
        let wide = gaussian(sp, 8);
        assert_eq!(pairing_gram(&wide, 2).unwrap().verdict, GramVerdict::Nondegenerate { order: 8 });
    }
}
