//! Two-point jets, the algebra 𝒞 with its trace and splitting, the maps
//! γ and λ, and the transported product on natural distributions.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use crate::berezin::Berezin;
use crate::diffop::{DiffOpError, PointDistribution};
use crate::kernel::linalg::{self, SparseRow};
use crate::kernel::{CRat, Jet, Mono, NuSeries, TruncationSpec, VarSpace};
use crate::star::{StarEngine, StarError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DistAlgError {
    #[error("distribution is not natural within the solve window (term nu^{nu} with derivative order {order})")]
    NotNatural { nu: i32, order: u32 },
    #[error("weight {needed} exceeds the available certified window {available}")]
    WindowTooSmall { needed: i64, available: i64 },
    #[error("lambda restricted to G is singular at filtration weight {weight}")]
    Singular { weight: i64 },
    #[error("distribution is not in the image of lambda at filtration weight {weight}")]
    Inconsistent { weight: i64 },
    #[error("expected a jet on {expected} copies")]
    SpaceMismatch { expected: usize },
    #[error(transparent)]
    Star(#[from] StarError),
    #[error(transparent)]
    DiffOp(#[from] DiffOpError),
}

/// The space of two-point jets over `C^m`.
pub fn bispace(m: usize) -> VarSpace {
    VarSpace::new(2, m)
}

/// Splits a two-point monomial into its slot-1 and slot-2 parts.
pub fn split(mono: &Mono) -> (Mono, Mono) {
    let h = mono.len() / 2;
    (Mono::from_slice(&mono.0[..h]), Mono::from_slice(&mono.0[h..]))
}

/// Concatenates a slot-1 and a slot-2 monomial.
pub fn join(a: &Mono, b: &Mono) -> Mono {
    let mut v = a.0.clone();
    v.extend_from_slice(&b.0);
    Mono(v)
}

/// `f ⊗ g` as a two-point jet.
pub fn tensor(f: &Jet, g: &Jet) -> Result<Jet, DistAlgError> {
    let (s, t) = (f.space(), g.space());
    if s.copies() != 1 || t != s {
        return Err(DistAlgError::SpaceMismatch { expected: 1 });
    }
    let tr = f.trunc().meet(&g.trunc());
    let trunc = tr.with_deg_max(2 * tr.deg_max);
    let mut out = Jet::zero(bispace(s.cdim()), trunc);
    for (k1, a, c1) in f.terms() {
        for (k2, b, c2) in g.terms() {
            out.add_term(k1 + k2, join(a, b), c1 * c2);
        }
    }
    Ok(out)
}

/// `𝒢 = ℂ[[ν, z, w̄]]`: substitutes `z̄ ↦ 0`, `w ↦ 0`.
pub fn g_project(f: &Jet) -> Jet {
    let m = f.space().cdim();
    f.filter(|_, mono| mono.0[m..3 * m].iter().all(|&e| e == 0))
}

/// `F − g_project(F)`, an element of the ideal ℋ.
pub fn h_part(f: &Jet) -> Jet {
    f - &g_project(f)
}

/// `f(z, z̄) ↦ f(z, w̄)`.
pub fn gamma_map(f: &Jet) -> Result<Jet, DistAlgError> {
    let s = f.space();
    if s.copies() != 1 {
        return Err(DistAlgError::SpaceMismatch { expected: 1 });
    }
    let m = s.cdim();
    let mut out = Jet::zero(bispace(m), f.trunc());
    for (k, mono, c) in f.terms() {
        let mut e = vec![0u8; 4 * m];
        e[..m].copy_from_slice(&mono.0[..m]);
        e[3 * m..].copy_from_slice(&mono.0[m..]);
        out.add_term(k, Mono::from_slice(&e), c.clone());
    }
    Ok(out)
}

/// `⟨u, 1⟩`.
pub fn n_trace(u: &PointDistribution) -> NuSeries {
    let zero = u.space().zero_mono();
    let lo = u.min_nu().unwrap_or(0).min(0);
    let mut s = NuSeries::zero(lo, u.nu_max().max(lo));
    for (k, g, c) in u.terms() {
        if *g == zero {
            s.add_term(k, c.clone());
        }
    }
    s
}

/// Operations of 𝒞 and of `(𝒩, •)` relative to one star product.
///
/// Basis images under the star product and under λ are memoized.
pub struct DistAlgebra<'e> {
    engine: &'e StarEngine,
    pairing: RwLock<HashMap<(Mono, Mono), NuSeries>>,
    lambda: RwLock<HashMap<(Mono, Mono), Arc<PointDistribution>>>,
    inverse: RwLock<HashMap<(i64, i32), Arc<GInverse>>>,
}

/// Block solver for λ restricted to 𝒢 up to a filtration weight.
struct GInverse {
    levels: Vec<Level>,
}

struct Level {
    weight: i64,
    unknowns: Vec<(i32, Mono)>,
    columns: Vec<Arc<PointDistribution>>,
    equations: HashMap<(i32, Mono), usize>,
    inv: Vec<SparseRow>,
}

impl<'e> DistAlgebra<'e> {
    pub fn new(engine: &'e StarEngine) -> Self {
        DistAlgebra {
            engine,
            pairing: RwLock::new(HashMap::new()),
            lambda: RwLock::new(HashMap::new()),
            inverse: RwLock::new(HashMap::new()),
        }
    }

    pub fn engine(&self) -> &StarEngine {
        self.engine
    }

    pub fn space(&self) -> VarSpace {
        bispace(self.engine.cdim())
    }

    /// Truncation used for two-point jets.
    pub fn trunc(&self) -> TruncationSpec {
        let t = self.engine.trunc();
        t.with_deg_max(2 * t.deg_max)
    }

    /// The largest filtration weight at which λ and the star product are
    /// exact for this engine.
    pub fn certified_weight(&self) -> i64 {
        let t = self.engine.trunc();
        let w = (t.nu_max as i64).min(t.deg_max as i64);
        match self.engine.certified_weight() {
            Some(c) => w.min(c),
            None => w,
        }
    }

    fn check(&self, f: &Jet) -> Result<(), DistAlgError> {
        if f.space() != self.space() {
            return Err(DistAlgError::SpaceMismatch { expected: 2 });
        }
        Ok(())
    }

    /// `(x^a ⋆ x^b)(0)` for single-copy monomials.
    fn pair(&self, a: &Mono, b: &Mono) -> Result<NuSeries, DistAlgError> {
        let key = (a.clone(), b.clone());
        if let Some(s) = self.pairing.read().expect("cache lock").get(&key) {
            return Ok(s.clone());
        }
        let sp = self.engine.space();
        let tr = self.engine.trunc();
        let fa = Jet::monomial(sp, tr, 0, a.clone(), CRat::one());
        let fb = Jet::monomial(sp, tr, 0, b.clone(), CRat::one());
        let s = self.engine.star_at_origin(&fa, &fb)?;
        self.pairing.write().expect("cache lock").insert(key, s.clone());
        Ok(s)
    }

    /// `(g₁ ⊗ h₁) ∗ (g₂ ⊗ h₂) = (h₁ ⋆ g₂)(0) · g₁ ⊗ h₂`, extended bilinearly.
    pub fn c_mul(&self, f: &Jet, g: &Jet) -> Result<Jet, DistAlgError> {
        self.check(f)?;
        self.check(g)?;
        let mut out = Jet::zero(self.space(), f.trunc().meet(&g.trunc()));
        for (k1, m1, c1) in f.terms() {
            let (a1, h1) = split(m1);
            for (k2, m2, c2) in g.terms() {
                let (g2, b2) = split(m2);
                let s = self.pair(&h1, &g2)?;
                if s.is_zero() {
                    continue;
                }
                let c = c1 * c2;
                let mono = join(&a1, &b2);
                for (e, v) in s.terms() {
                    out.add_term(k1 + k2 + e, mono.clone(), &c * v);
                }
            }
        }
        Ok(out)
    }

    /// `tr(f ⊗ g) = (g ⋆ f)(0)`.
    pub fn c_trace(&self, f: &Jet) -> Result<NuSeries, DistAlgError> {
        self.check(f)?;
        let lo = f.min_nu().unwrap_or(0).min(0);
        let mut acc = NuSeries::zero(lo, self.engine.trunc().nu_max.max(lo));
        for (k, mono, c) in f.terms() {
            let (a, b) = split(mono);
            for (e, v) in self.pair(&b, &a)?.terms() {
                acc.add_term(k + e, c * v);
            }
        }
        Ok(acc)
    }

    /// `λ(x^a ⊗ x^b) = δ∘L_{x^b}∘R_{x^a}`.
    fn lambda_mono(&self, a: &Mono, b: &Mono) -> Result<Arc<PointDistribution>, DistAlgError> {
        let key = (a.clone(), b.clone());
        if let Some(u) = self.lambda.read().expect("cache lock").get(&key) {
            return Ok(u.clone());
        }
        let sp = self.engine.space();
        let tr = self.engine.trunc();
        let fa = Jet::monomial(sp, tr, 0, a.clone(), CRat::one());
        let fb = Jet::monomial(sp, tr, 0, b.clone(), CRat::one());
        let l = self.engine.left_operator(&fb)?;
        let r = self.engine.right_operator(&fa)?;
        let u = Arc::new(PointDistribution::of_operator(&l).compose_operator(&r)?);
        self.lambda
            .write()
            .expect("cache lock")
            .entry(key)
            .or_insert_with(|| u.clone());
        Ok(u)
    }

    /// `λ(f ⊗ g)(h) = (g ⋆ h ⋆ f)(0)`, extended linearly.
    pub fn lambda_of(&self, f: &Jet) -> Result<PointDistribution, DistAlgError> {
        self.check(f)?;
        let sp = self.engine.space();
        let mut out = PointDistribution::zero(sp, self.engine.trunc().nu_max);
        for (k, mono, c) in f.terms() {
            let (a, b) = split(mono);
            let u = self.lambda_mono(&a, &b)?;
            for (r, g, v) in u.terms() {
                out.add_term(r + k, g.clone(), c * v);
            }
        }
        Ok(out)
    }

    fn g_inverse(&self, weight: i64, s_lo: i32) -> Result<Arc<GInverse>, DistAlgError> {
        if let Some(g) = self.inverse.read().expect("cache lock").get(&(weight, s_lo)) {
            return Ok(g.clone());
        }
        let m = self.engine.cdim();
        let sp = self.engine.space();
        let mut levels = Vec::new();
        for w in (2 * s_lo as i64)..=weight {
            let mut unknowns = Vec::new();
            let mut columns = Vec::new();
            let mut s = s_lo;
            while 2 * s as i64 <= w {
                let d = (w - 2 * s as i64) as u32;
                for ab in Mono::all_up_to(2 * m, d).into_iter().filter(|x| x.degree() == d) {
                    let (a, b) = (Mono::from_slice(&ab.0[..m]), Mono::from_slice(&ab.0[m..]));
                    let mut full_a = sp.zero_mono();
                    full_a.0[..m].copy_from_slice(&a.0);
                    let mut full_b = sp.zero_mono();
                    full_b.0[m..].copy_from_slice(&b.0);
                    let col = self.lambda_mono(&full_a, &full_b)?.shift_nu(s).truncate_weight(weight);
                    unknowns.push((s, join(&full_a, &full_b)));
                    columns.push(Arc::new(col));
                }
                s += 1;
            }
            // Equations: components ν^r ∂^γ with 2r − |γ| = w and r − |γ| ≥ s_lo.
            let mut equations = HashMap::new();
            let mut r = s_lo;
            while r as i64 <= w - s_lo as i64 {
                let gdeg = 2 * r as i64 - w;
                if gdeg >= 0 && r as i64 - gdeg >= s_lo as i64 {
                    for g in Mono::all_up_to(2 * m, gdeg as u32)
                        .into_iter()
                        .filter(|x| x.degree() as i64 == gdeg)
                    {
                        let n = equations.len();
                        equations.insert((r, g), n);
                    }
                }
                r += 1;
            }
            if equations.len() != unknowns.len() {
                return Err(DistAlgError::Singular { weight: w });
            }
            let mut rows = vec![SparseRow::new(); equations.len()];
            for (j, col) in columns.iter().enumerate() {
                for (r, g, c) in col.terms() {
                    if 2 * r as i64 - g.degree() as i64 != w {
                        continue;
                    }
                    if let Some(&i) = equations.get(&(r, g.clone())) {
                        rows[i].insert(j, c.clone());
                    }
                }
            }
            let inv = linalg::sparse_inverse(&rows, unknowns.len()).ok_or(DistAlgError::Singular { weight: w })?;
            levels.push(Level {
                weight: w,
                unknowns,
                columns,
                equations,
                inv,
            });
        }
        let g = Arc::new(GInverse { levels });
        self.inverse
            .write()
            .expect("cache lock")
            .insert((weight, s_lo), g.clone());
        Ok(g)
    }

    /// The unique `G ∈ 𝒢` with `λ(G) = u` through filtration weight `weight`.
    ///
    /// `u` must be certified through ν^`weight`, and the terms of the
    /// result are exact for filtration weight ≤ `weight`.
    pub fn lambda_g_inverse(&self, u: &PointDistribution, weight: i64) -> Result<Jet, DistAlgError> {
        if u.space() != self.engine.space() {
            return Err(DistAlgError::SpaceMismatch { expected: 1 });
        }
        let nu_min = self.engine.trunc().nu_min.min(0);
        let mut s_lo = 0;
        for (r, g, _) in u.terms() {
            let shift = r - g.degree() as i32;
            if shift < nu_min {
                return Err(DistAlgError::NotNatural { nu: r, order: g.degree() });
            }
            s_lo = s_lo.min(shift);
        }
        // Negative ν-shifts pull in basis images of higher ν-order.
        let available = (self.certified_weight() + 2 * s_lo as i64).min(u.nu_max() as i64);
        if weight > available {
            return Err(DistAlgError::WindowTooSmall { needed: weight, available });
        }
        let solver = self.g_inverse(weight, s_lo)?;
        let mut residual: BTreeMap<(i32, Mono), CRat> = u
            .truncate_weight(weight)
            .terms()
            .map(|(r, g, c)| ((r, g.clone()), c.clone()))
            .collect();
        let tr = self.trunc();
        let mut out = Jet::zero(self.space(), tr.with_nu_max(tr.nu_max.max(weight as i32)));
        for level in &solver.levels {
            let mut rhs: SparseRow = SparseRow::new();
            for ((r, g), c) in &residual {
                if 2 * *r as i64 - g.degree() as i64 != level.weight {
                    continue;
                }
                match level.equations.get(&(*r, g.clone())) {
                    Some(&i) => {
                        rhs.insert(i, c.clone());
                    }
                    None => return Err(DistAlgError::NotNatural { nu: *r, order: g.degree() }),
                }
            }
            if rhs.is_empty() {
                continue;
            }
            for (j, row) in level.inv.iter().enumerate() {
                let mut x = CRat::zero();
                for (i, v) in row {
                    if let Some(b) = rhs.get(i) {
                        x += &(v * b);
                    }
                }
                if x.is_zero() {
                    continue;
                }
                let (s, mono) = &level.unknowns[j];
                out.add_term(*s, mono.clone(), x.clone());
                for (r, g, c) in level.columns[j].terms() {
                    let key = (r, g.clone());
                    let e = residual.entry(key.clone()).or_default();
                    *e -= &(c * &x);
                    if e.is_zero() {
                        residual.remove(&key);
                    }
                }
            }
            if let Some(((r, g), _)) = residual
                .iter()
                .find(|((r, g), _)| 2 * *r as i64 - g.degree() as i64 <= level.weight)
            {
                let w = 2 * *r as i64 - g.degree() as i64;
                return Err(DistAlgError::Inconsistent { weight: w });
            }
        }
        if let Some(((r, g), _)) = residual.iter().next() {
            return Err(DistAlgError::NotNatural { nu: *r, order: g.degree() });
        }
        Ok(out)
    }

    /// `u₁ • u₂ = λ(λ|𝒢⁻¹(u₁) ∗ λ|𝒢⁻¹(u₂))` through filtration weight `weight`.
    pub fn bullet(
        &self,
        u1: &PointDistribution,
        u2: &PointDistribution,
        weight: i64,
    ) -> Result<PointDistribution, DistAlgError> {
        self.bullet_chain(&[u1.clone(), u2.clone()], weight)
    }

    /// `u₁ • … • u_l`, multiplying the preimages in 𝒞 before applying λ once.
    pub fn bullet_chain(&self, us: &[PointDistribution], weight: i64) -> Result<PointDistribution, DistAlgError> {
        let g = self.g_product(us, weight)?;
        Ok(self.lambda_of(&g)?.truncate_weight(weight).with_nu_max(weight as i32))
    }

    /// `λ|𝒢⁻¹(u₁) ∗ … ∗ λ|𝒢⁻¹(u_l)` truncated to filtration weight `weight`.
    pub fn g_product(&self, us: &[PointDistribution], weight: i64) -> Result<Jet, DistAlgError> {
        let mut acc: Option<Jet> = None;
        for u in us {
            let g = self.lambda_g_inverse(u, weight)?;
            acc = Some(match acc {
                None => g,
                Some(a) => self.c_mul(&a, &g)?.truncate_filtration(weight),
            });
        }
        Ok(acc.unwrap_or_else(|| Jet::one(self.space(), self.trunc())))
    }

    /// ℂ-rank of λ on `ν^s z^α ⊗ w̄^β` with `|α| + |β| ≤ deg` and
    /// `s + |α| + |β| ≤ nu`, images truncated at ν^`nu`; returns
    /// `(rank, number of basis elements)`.
    pub fn lambda_rank(&self, deg: u32, nu: i32) -> Result<(usize, usize), DistAlgError> {
        let m = self.engine.cdim();
        let sp = self.engine.space();
        let mut cols = Vec::new();
        for ab in Mono::all_up_to(2 * m, deg) {
            let d = ab.degree() as i32;
            let mut full_a = sp.zero_mono();
            full_a.0[..m].copy_from_slice(&ab.0[..m]);
            let mut full_b = sp.zero_mono();
            full_b.0[m..].copy_from_slice(&ab.0[m..]);
            let base = self.lambda_mono(&full_a, &full_b)?;
            for s in 0..=(nu - d) {
                cols.push(base.shift_nu(s));
            }
        }
        let mut index: HashMap<(i32, Mono), usize> = HashMap::new();
        for c in &cols {
            for (r, g, _) in c.terms() {
                if r <= nu {
                    let n = index.len();
                    index.entry((r, g.clone())).or_insert(n);
                }
            }
        }
        let mut mat = vec![vec![CRat::zero(); cols.len()]; index.len()];
        for (j, c) in cols.iter().enumerate() {
            for (r, g, v) in c.terms() {
                if let Some(&i) = index.get(&(r, g.clone())) {
                    mat[i][j] = v.clone();
                }
            }
        }
        Ok((linalg::rank(&mat), cols.len()))
    }
}

/// The distribution `h ↦ (B(g · B⁻¹h))(0)` read off on monomials of degree
/// at most `max_order`.
pub fn conjugated_multiplication(
    b: &Berezin,
    g: &Jet,
    nu_max: i32,
    max_order: u32,
) -> Result<PointDistribution, DistAlgError> {
    let sp = g.space();
    let tr = g.trunc();
    Ok(PointDistribution::from_values(sp, nu_max, max_order, |gamma| {
        let h = Jet::monomial(sp, tr, 0, gamma.clone(), CRat::one());
        let k = b.apply_inverse(&h);
        let prod = g.try_mul(&k).map_err(DiffOpError::from)?;
        Ok(b.apply(&prod).eval_origin())
    })?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::parse_jet;

    fn flat(nu_max: i32) -> StarEngine {
        StarEngine::antiwick(1, TruncationSpec::new(0, nu_max, 8))
    }

    fn bj(e: &StarEngine, s: &str) -> Jet {
        let a = DistAlgebra::new(e);
        parse_jet(s, a.space(), a.trunc()).unwrap()
    }

    fn dist(sp: VarSpace, nu_max: i32, terms: &[(i32, &[u8], i64)]) -> PointDistribution {
        let mut u = PointDistribution::zero(sp, nu_max);
        for (k, g, c) in terms {
            u.add_term(*k, Mono::from_slice(g), CRat::from_int(*c));
        }
        u
    }

    #[test]
    fn c_mul_examples() {
        let e = flat(4);
        let a = DistAlgebra::new(&e);
        let one = bj(&e, "1");
        assert_eq!(a.c_mul(&one, &one).unwrap(), one);
        let f = bj(&e, "z1_c1*zb1_c2");
        assert_eq!(a.c_mul(&f, &f).unwrap(), bj(&e, "nu*z1_c1*zb1_c2"));
        assert!(a.c_mul(&f, &one).unwrap().is_zero());
    }

    #[test]
    fn trace_examples() {
        let e = flat(4);
        let a = DistAlgebra::new(&e);
        assert_eq!(a.c_trace(&bj(&e, "1")).unwrap().coeff(0), CRat::one());
        let t = a.c_trace(&bj(&e, "z1_c1*zb1_c2")).unwrap();
        assert_eq!(t.coeff(1), CRat::one());
        assert_eq!(t.terms().count(), 1);
        assert!(a.c_trace(&bj(&e, "z1_c1^2*zb1_c2")).unwrap().is_zero());
    }

    #[test]
    fn splitting_and_gamma() {
        let e = flat(4);
        let f = bj(&e, "z1_c1*zb1_c2");
        assert_eq!(g_project(&f), f);
        assert!(g_project(&bj(&e, "z1_c1*zb1_c1*zb1_c2 + zb1_c1")).is_zero());
        assert!(g_project(&bj(&e, "z1_c2")).is_zero());
        let mixed = bj(&e, "1 + z1_c1*zb1_c1 + zb1_c2");
        assert_eq!(&g_project(&mixed) + &h_part(&mixed), mixed);

        let sp = e.space();
        let g = parse_jet("z1*zb1", sp, e.trunc()).unwrap();
        assert_eq!(gamma_map(&g).unwrap(), bj(&e, "z1_c1*zb1_c2"));
        let h = parse_jet("z1^2 + 3", sp, e.trunc()).unwrap();
        assert_eq!(gamma_map(&h).unwrap(), bj(&e, "z1_c1^2 + 3"));
    }

    #[test]
    fn lambda_examples() {
        let e = flat(4);
        let a = DistAlgebra::new(&e);
        let sp = e.space();
        assert_eq!(a.lambda_of(&bj(&e, "1")).unwrap(), PointDistribution::delta(sp, 4));
        // λ(z⊗1)(h) = ν ∂_z̄ h(0)
        assert_eq!(a.lambda_of(&bj(&e, "z1_c1")).unwrap(), dist(sp, 4, &[(1, &[0, 1], 1)]));
        assert_eq!(
            a.lambda_of(&bj(&e, "z1_c1*zb1_c2")).unwrap(),
            dist(sp, 4, &[(1, &[0, 0], 1), (2, &[1, 1], 1)])
        );
        // ℋ ⊆ ker λ
        assert!(a.lambda_of(&bj(&e, "zb1_c1*z1_c2 + z1_c1*zb1_c1")).unwrap().is_zero());
    }

    #[test]
    fn inverse_examples() {
        let e = flat(4);
        let a = DistAlgebra::new(&e);
        let sp = e.space();
        let d = PointDistribution::delta(sp, 4);
        assert_eq!(a.lambda_g_inverse(&d, 4).unwrap(), bj(&e, "1"));
        let u = dist(sp, 4, &[(1, &[0, 0], 1), (2, &[1, 1], 1)]);
        assert_eq!(a.lambda_g_inverse(&u, 4).unwrap(), bj(&e, "z1_c1*zb1_c2"));
        let dzb = dist(sp, 4, &[(0, &[0, 1], 1)]);
        assert!(matches!(
            a.lambda_g_inverse(&dzb, 4),
            Err(DistAlgError::NotNatural { .. })
        ));
        let wide = StarEngine::antiwick(1, TruncationSpec::new(-1, 4, 8));
        let b = DistAlgebra::new(&wide);
        let g = b.lambda_g_inverse(&dzb, 2).unwrap();
        assert_eq!(g, parse_jet("nu^-1*z1_c1", b.space(), b.trunc()).unwrap());
        assert!(matches!(
            a.lambda_g_inverse(&d, 5),
            Err(DistAlgError::WindowTooSmall { .. })
        ));
    }

    #[test]
    fn bullet_examples() {
        let e = flat(4);
        let a = DistAlgebra::new(&e);
        let sp = e.space();
        let d = PointDistribution::delta(sp, 4);
        assert_eq!(a.bullet(&d, &d, 4).unwrap(), d);
        let u = a.lambda_of(&bj(&e, "z1_c1*zb1_c2")).unwrap();
        let uu = a.bullet(&u, &u, 4).unwrap();
        assert_eq!(uu, u.shift_nu(1).truncate_weight(4));
        assert_eq!(n_trace(&uu).coeff(2), CRat::one());
        assert_eq!(n_trace(&u), NuSeries::monomial(1, CRat::one(), 0, 4));
        // δ is not a unit for •
        let v = a.lambda_of(&bj(&e, "z1_c1")).unwrap();
        assert_eq!(a.bullet(&v, &d, 4).unwrap(), v);
        assert!(a.bullet(&d, &v, 4).unwrap().is_zero());
    }

    #[test]
    fn lambda_full_rank() {
        let e = flat(3);
        let a = DistAlgebra::new(&e);
        let (rank, n) = a.lambda_rank(3, 3).unwrap();
        assert_eq!(rank, n);
    }

    #[test]
    fn gamma_conjugation_flat() {
        let e = flat(4);
        let a = DistAlgebra::new(&e);
        let b = Berezin::new(&e).unwrap();
        for g in ["z1*zb1", "z1^2 + 2*zb1", "3*z1*zb1^2 - z1"] {
            let g = parse_jet(g, e.space(), e.trunc()).unwrap();
            let lhs = a.lambda_of(&gamma_map(&g).unwrap()).unwrap().truncate_weight(4);
            let rhs = conjugated_multiplication(&b, &g, 4, 4).unwrap().truncate_weight(4);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn hyperbolic_inverse_round_trip() {
        use crate::star::Builtin;
        let p = Builtin::Hyperbolic.potential(1, 8);
        let e = StarEngine::new(p, TruncationSpec::new(0, 6, 8));
        let a = DistAlgebra::new(&e);
        let w = a.certified_weight();
        assert_eq!(w, 6);
        for f in ["z1_c1*zb1_c2", "z1_c1^2*zb1_c2 + zb1_c1*z1_c2", "z1_c1 + 2*zb1_c2^2"] {
            let f = bj(&e, f);
            let u = a.lambda_of(&f).unwrap();
            let g = a.lambda_g_inverse(&u, w).unwrap();
            assert_eq!(g, g_project(&f).truncate_filtration(w));
        }
    }
}
