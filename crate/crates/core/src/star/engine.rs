//! Star products: the closed-form anti-Wick product and the general
//! engine that builds `L_f` and `R_g` from a potential.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use crate::diffop::DiffOperator;
use crate::kernel::{invert_jet_matrix, CRat, Jet, Kind, Mono, NuSeries, TruncationSpec, Var, VarSpace};

use super::{PotentialJet, StarError};

/// Which argument the bidifferential operators differentiate
/// antiholomorphically.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// `C_r` differentiates the first argument in `z̄` and the second in `z`.
    Standard,
    /// The opposite product `f ⋆' g = g ⋆ f`.
    Flipped,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Side {
    Left,
    Right,
}

/// The closed-form product on flat space,
/// `f ⋆ g = Σ_α ν^{|α|}/α! ∂_z̄^α f ∂_z^α g`.
pub fn antiwick_star(f: &Jet, g: &Jet) -> Result<Jet, StarError> {
    let space = f.space();
    if space != g.space() {
        return Err(StarError::Kernel(crate::kernel::KernelError::SpaceMismatch));
    }
    let trunc = f.trunc().meet(&g.trunc());
    let m = space.cdim();
    let mut out = Jet::zero(space, trunc);
    let lo = f.min_nu().unwrap_or(0) + g.min_nu().unwrap_or(0);
    let top = (trunc.nu_max - lo).max(0) as u32;
    for alpha in Mono::all_up_to(m, top.min(trunc.deg_max)) {
        let n = alpha.degree();
        let df = f.deriv_multi(&embed(space, 0, Kind::Anti, &alpha));
        if df.is_zero() {
            continue;
        }
        let dg = g.deriv_multi(&embed(space, 0, Kind::Holo, &alpha));
        if dg.is_zero() {
            continue;
        }
        let c = CRat::from_bigint(alpha.factorial()).inv().expect("nonzero");
        out.add_assign(&(&df * &dg).shift_nu(n as i32).scale(&c));
    }
    Ok(out)
}

/// Places an `m`-axis multi-index on the variables of one kind and copy.
pub fn embed(space: VarSpace, copy: usize, kind: Kind, alpha: &Mono) -> Mono {
    let mut out = space.zero_mono();
    for (k, &e) in alpha.0.iter().enumerate() {
        out.0[space.idx(Var::new(copy, kind, k))] = e;
    }
    out
}

#[derive(Clone, Debug)]
enum Mode {
    ClosedForm,
    Recursive(Box<PotentialJet>),
}

type OpCache = RwLock<HashMap<(Side, Mono, i32), Arc<DiffOperator>>>;

/// A star product with separation of variables on one chart.
///
/// Operators `L_{x^μ}` and `R_{x^μ}` are memoized per monomial; the cache is
/// filled idempotently and may be shared across threads.
pub struct StarEngine {
    space: VarSpace,
    trunc: TruncationSpec,
    mode: Mode,
    orientation: Orientation,
    cache: OpCache,
}

impl std::fmt::Debug for StarEngine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("StarEngine")
            .field("space", &self.space)
            .field("trunc", &self.trunc)
            .field("potential", &self.potential().map(|p| p.name().to_string()))
            .field("orientation", &self.orientation)
            .finish()
    }
}

impl Clone for StarEngine {
    fn clone(&self) -> Self {
        StarEngine {
            space: self.space,
            trunc: self.trunc,
            mode: self.mode.clone(),
            orientation: self.orientation,
            cache: RwLock::new(self.cache.read().expect("cache lock").clone()),
        }
    }
}

impl StarEngine {
    /// The closed-form flat product on `C^m`.
    pub fn antiwick(m: usize, trunc: TruncationSpec) -> Self {
        StarEngine {
            space: VarSpace::single(m),
            trunc,
            mode: Mode::ClosedForm,
            orientation: Orientation::Standard,
            cache: RwLock::new(HashMap::new()),
        }
    }

    /// The product defined by a potential, built by the generator recursion.
    pub fn new(potential: PotentialJet, trunc: TruncationSpec) -> Self {
        let trunc = trunc.with_deg_max(trunc.deg_max.min(potential.deg_max()));
        StarEngine {
            space: potential.space(),
            trunc,
            mode: Mode::Recursive(Box::new(potential)),
            orientation: Orientation::Standard,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn with_orientation(mut self, o: Orientation) -> Self {
        self.orientation = o;
        self
    }

    pub fn space(&self) -> VarSpace {
        self.space
    }

    pub fn trunc(&self) -> TruncationSpec {
        self.trunc
    }

    pub fn cdim(&self) -> usize {
        self.space.cdim()
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn potential(&self) -> Option<&PotentialJet> {
        match &self.mode {
            Mode::ClosedForm => None,
            Mode::Recursive(p) => Some(p),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.potential().is_none_or(|p| p.is_exact())
    }

    /// Largest filtration weight `|α| + 2k` up to which products of inputs
    /// with nonnegative filtration degree are exact; `None` when there is
    /// no truncation error at all.
    pub fn certified_weight(&self) -> Option<i64> {
        if self.is_exact() {
            None
        } else {
            Some(self.trunc.deg_max as i64 - 2)
        }
    }

    /// Certified weight for a particular pair of arguments.
    pub fn certified_weight_for(&self, f: &Jet, g: &Jet) -> Option<i64> {
        let w = self.certified_weight()?;
        let lo_f = f.min_nu().unwrap_or(0).min(0) as i64;
        let lo_g = g.filtration_degree().unwrap_or(0).min(0);
        let lo_f2 = f.filtration_degree().unwrap_or(0).min(0);
        Some(w + 2 * lo_f + lo_g.min(lo_f2))
    }

    /// `f ⋆ g` truncated to the engine window.
    pub fn star(&self, f: &Jet, g: &Jet) -> Result<Jet, StarError> {
        self.check(f)?;
        self.check(g)?;
        let (f, g) = match self.orientation {
            Orientation::Standard => (f, g),
            Orientation::Flipped => (g, f),
        };
        match &self.mode {
            Mode::ClosedForm => antiwick_star(&f.retruncate(self.trunc), &g.retruncate(self.trunc)),
            Mode::Recursive(_) => {
                let l = self.side_operator(Side::Left, f)?;
                Ok(l.apply(&g.retruncate(self.trunc))?)
            }
        }
    }

    /// `(f ⋆ g)(0)`.
    pub fn star_at_origin(&self, f: &Jet, g: &Jet) -> Result<NuSeries, StarError> {
        Ok(self.star(f, g)?.eval_origin())
    }

    fn check(&self, f: &Jet) -> Result<(), StarError> {
        if f.space() != self.space {
            return Err(StarError::Kernel(crate::kernel::KernelError::SpaceMismatch));
        }
        Ok(())
    }

    /// The operator `L_f` with `L_f g = f ⋆ g`.
    pub fn left_operator(&self, f: &Jet) -> Result<DiffOperator, StarError> {
        self.check(f)?;
        match self.orientation {
            Orientation::Standard => self.side_operator(Side::Left, f),
            Orientation::Flipped => self.side_operator(Side::Right, f),
        }
    }

    /// The operator `R_g` with `R_g f = f ⋆ g`.
    pub fn right_operator(&self, g: &Jet) -> Result<DiffOperator, StarError> {
        self.check(g)?;
        match self.orientation {
            Orientation::Standard => self.side_operator(Side::Right, g),
            Orientation::Flipped => self.side_operator(Side::Left, g),
        }
    }

    fn side_operator(&self, side: Side, f: &Jet) -> Result<DiffOperator, StarError> {
        let mut op = DiffOperator::zero(self.space, self.trunc);
        for (k, mono, c) in f.terms() {
            let nu_hi = self.trunc.nu_max - k;
            if nu_hi < 0 {
                continue;
            }
            let base = self.monomial_operator(side, mono, nu_hi)?;
            let scaled = base.shift_nu(k).scale(c);
            for (g, coeff) in scaled.coefficients() {
                op.add_term(g.clone(), coeff.clone());
            }
        }
        Ok(op)
    }

    fn monomial_operator(&self, side: Side, mono: &Mono, nu_hi: i32) -> Result<Arc<DiffOperator>, StarError> {
        let key = (side, mono.clone(), nu_hi);
        if let Some(op) = self.cache.read().expect("cache lock").get(&key) {
            return Ok(op.clone());
        }
        let op = Arc::new(match &self.mode {
            Mode::ClosedForm => self.closed_form_operator(side, mono, nu_hi),
            Mode::Recursive(p) => Recursion::new(self, p, side, nu_hi).solve(mono)?,
        });
        self.cache
            .write()
            .expect("cache lock")
            .entry(key)
            .or_insert_with(|| op.clone());
        Ok(op)
    }

    /// `L_{x^μ} = Σ ν^{|α|}/α! (∂_z̄^α x^μ) ∂_z^α` for the flat product.
    fn closed_form_operator(&self, side: Side, mono: &Mono, nu_hi: i32) -> DiffOperator {
        let (fk, dk) = match side {
            Side::Left => (Kind::Anti, Kind::Holo),
            Side::Right => (Kind::Holo, Kind::Anti),
        };
        let trunc = self.trunc.with_nu_max(nu_hi);
        let x = Jet::monomial(self.space, trunc, 0, mono.clone(), CRat::one());
        let mut op = DiffOperator::zero(self.space, trunc);
        let top = (nu_hi.max(0) as u32).min(trunc.deg_max);
        for alpha in Mono::all_up_to(self.cdim(), top) {
            let dx = x.deriv_multi(&embed(self.space, 0, fk, &alpha));
            if dx.is_zero() {
                continue;
            }
            let c = CRat::from_bigint(alpha.factorial()).inv().expect("nonzero");
            op.add_term(
                embed(self.space, 0, dk, &alpha),
                dx.shift_nu(alpha.degree() as i32).scale(&c),
            );
        }
        op
    }

    /// The order-ν bidifferential tensor `K^{ij}` over all coordinates,
    /// `C_1(f,g) = K^{ij} ∂_i f ∂_j g`, read off from products of
    /// coordinate functions.
    pub fn c1_tensor(&self) -> Result<C1Tensor, StarError> {
        let n = self.space.nvars();
        let trunc = self.trunc.with_nu_max(self.trunc.nu_max.max(1));
        let coords: Vec<Jet> = (0..n)
            .map(|i| Jet::monomial(self.space, trunc, 0, Mono::unit(n, i), CRat::one()))
            .collect();
        let mut k = vec![vec![Jet::zero(self.space, trunc); n]; n];
        for i in 0..n {
            for j in 0..n {
                k[i][j] = self.star(&coords[i], &coords[j])?.nu_part(1);
            }
        }
        let at0: Vec<Vec<CRat>> = k
            .iter()
            .map(|row| row.iter().map(|e| e.coeff(0, &self.space.zero_mono())).collect())
            .collect();
        let rank = crate::kernel::linalg::rank(&at0);
        Ok(C1Tensor { k, rank })
    }
}

/// `K^{ij}` together with the rank of `K(0)`.
#[derive(Clone, Debug)]
pub struct C1Tensor {
    pub k: Vec<Vec<Jet>>,
    pub rank: usize,
}

/// Order-by-order solve of `[L_f, ∂_l̄ + Φ_{,l̄}] = 0` (left side) or
/// `[R_g, ∂_k + Φ_{,k}] = 0` (right side).
///
/// Writing `L_f = Σ ν^{|α|+s} b_{α,s} ∂^α`, the ν^s part of the
/// commutation condition at `∂^ε` reads
/// `Σ_k (ε_k+1) b_{ε+e_k} ĝ_{kl̄} = ∂_l̄ b_ε − Σ_{|α−ε|≥2} C(α,ε)
/// ν^{|α−ε|−1} b_α ∂^{α−ε}(νΦ)_{,l̄}` with `ĝ = ν∂∂̄Φ`, and is solved for
/// the level `|ε|+1` unknowns with the inverse of `ĝ` at ν^0.
struct Recursion {
    space: VarSpace,
    m: usize,
    deg: u32,
    nu_hi: i32,
    exact: bool,
    dkind: Kind,
    ckind: Kind,
    /// ν-parts of `ν ∂_{c_l} Φ`.
    phi_c: Vec<Vec<Jet>>,
    /// `a0_inv[l][k]`: inverse of `A0[k][l] = ∂_{d_k}∂_{c_l}Φ_{-1}`.
    a0_inv: Vec<Vec<Jet>>,
    memo: RwLock<HashMap<(usize, Mono, usize), Jet>>,
}

impl Recursion {
    fn new(engine: &StarEngine, p: &PotentialJet, side: Side, nu_hi: i32) -> Self {
        let space = engine.space;
        let deg = engine.trunc.deg_max;
        let m = space.cdim();
        let (dkind, ckind) = match side {
            Side::Left => (Kind::Holo, Kind::Anti),
            Side::Right => (Kind::Anti, Kind::Holo),
        };
        let flat = TruncationSpec::new(0, 0, deg);
        let nu_phi = p.body().shift_nu(1);
        let top = nu_phi.max_nu().unwrap_or(0).max(0);
        let phi_c: Vec<Vec<Jet>> = (0..m)
            .map(|l| {
                let d = nu_phi.deriv(space.idx(Var::new(0, ckind, l)));
                (0..=top).map(|t| d.nu_part(t).retruncate(flat)).collect()
            })
            .collect();
        let a0: Vec<Vec<Jet>> = (0..m)
            .map(|k| {
                (0..m)
                    .map(|l| phi_c[l][0].deriv(space.idx(Var::new(0, dkind, k))))
                    .collect()
            })
            .collect();
        let a0_inv = invert_jet_matrix(&a0).expect("validated potential has invertible metric");
        Recursion {
            space,
            m,
            deg,
            nu_hi,
            exact: p.is_exact(),
            dkind,
            ckind,
            phi_c,
            a0_inv,
            memo: RwLock::new(HashMap::new()),
        }
    }

    /// Degree up to which `b_{α,s}` is exact; higher terms are dropped.
    fn cap(&self, level: u32, s: i32) -> Option<u32> {
        if self.exact || level == 0 {
            return Some(self.deg);
        }
        let c = self.deg as i64 - 2 - level as i64 - 2 * s as i64;
        (c >= 0).then_some(c as u32)
    }

    fn flat(&self) -> TruncationSpec {
        TruncationSpec::new(0, 0, self.deg)
    }

    /// `∂_d^δ (ν Φ_{,c_l})` at ν-order `t`.
    fn dphi(&self, l: usize, delta: &Mono, t: usize) -> Jet {
        let Some(base) = self.phi_c[l].get(t) else {
            return Jet::zero(self.space, self.flat());
        };
        let key = (l, delta.clone(), t);
        if let Some(j) = self.memo.read().expect("memo lock").get(&key) {
            return j.clone();
        }
        let j = base.deriv_multi(&embed(self.space, 0, self.dkind, delta));
        self.memo.write().expect("memo lock").insert(key, j.clone());
        j
    }

    fn solve(&self, mono: &Mono) -> Result<DiffOperator, StarError> {
        let flat = self.flat();
        let f = Jet::monomial(self.space, flat, 0, mono.clone(), CRat::one());
        // b[(α, s)] for the ν-free coefficient of ν^{|α|+s} ∂^α
        let mut b: HashMap<(Mono, i32), Jet> = HashMap::new();
        let zero_m = Mono::zero(self.m);
        b.insert((zero_m.clone(), 0), f);
        let max_level = (self.nu_hi.max(0) as u32).min(self.deg);
        let cidx: Vec<usize> = (0..self.m)
            .map(|l| self.space.idx(Var::new(0, self.ckind, l)))
            .collect();
        let levels: Vec<Vec<Mono>> = {
            let all = Mono::all_up_to(self.m, max_level);
            (0..=max_level)
                .map(|n| all.iter().filter(|a| a.degree() == n).cloned().collect())
                .collect()
        };
        for s in 0..=self.nu_hi {
            for n in 0..max_level {
                if n as i32 + 1 + s > self.nu_hi {
                    break;
                }
                let Some(cap) = self.cap(n + 1, s) else {
                    continue;
                };
                let t = flat.with_deg_max(cap);
                for eps in &levels[n as usize] {
                    // right-hand sides indexed by l
                    let mut rhs: Vec<Jet> = Vec::with_capacity(self.m);
                    for l in 0..self.m {
                        let mut r = match b.get(&(eps.clone(), s)) {
                            Some(be) => be.deriv(cidx[l]).retruncate(t),
                            None => Jet::zero(self.space, t),
                        };
                        self.subtract_known(&mut r, &b, eps, s, l, &levels, t);
                        rhs.push(r);
                    }
                    if rhs.iter().all(|r| r.is_zero()) {
                        continue;
                    }
                    for k in 0..self.m {
                        let mut v = Jet::zero(self.space, t);
                        for (l, r) in rhs.iter().enumerate() {
                            if !r.is_zero() && !self.a0_inv[l][k].is_zero() {
                                v.add_assign(&(r * &self.a0_inv[l][k].retruncate(t)));
                            }
                        }
                        let mut alpha = eps.clone();
                        alpha.0[k] += 1;
                        let v = v.scale(&CRat::from_ratio(1, alpha.0[k] as i64));
                        self.store(&mut b, alpha, s, v, t)?;
                    }
                }
            }
        }
        let mut op = DiffOperator::zero(self.space, TruncationSpec::new(0, self.nu_hi, self.deg));
        let opt = op.trunc();
        for ((alpha, s), c) in b {
            let nu = alpha.degree() as i32 + s;
            if nu > self.nu_hi {
                continue;
            }
            op.add_term(
                embed(self.space, 0, self.dkind, &alpha),
                c.retruncate(opt).shift_nu(nu),
            );
        }
        Ok(op)
    }

    /// Subtracts the already-known contributions at ν-order `s`:
    /// higher levels through `∂^{α−ε}(νΦ)_{,l̄}` and the ν-corrections
    /// of `ĝ` acting on the unknown level.
    #[allow(clippy::too_many_arguments)]
    fn subtract_known(
        &self,
        r: &mut Jet,
        b: &HashMap<(Mono, i32), Jet>,
        eps: &Mono,
        s: i32,
        l: usize,
        levels: &[Vec<Mono>],
        t: TruncationSpec,
    ) {
        let n = eps.degree() as usize;
        // |α − ε| = j ≥ 2: contributes at ν-order (j − 1) + s_α + t_phi = s
        for (j, lev) in levels.iter().enumerate().skip(n + 2) {
            let j = j - n;
            for alpha in lev {
                let Some(delta) = alpha.checked_sub(eps) else {
                    continue;
                };
                let binom = CRat::from_bigint(alpha.binomial(eps));
                for sa in 0..=(s - (j as i32 - 1)) {
                    let Some(ba) = b.get(&(alpha.clone(), sa)) else {
                        continue;
                    };
                    let tp = (s - (j as i32 - 1) - sa) as usize;
                    let dp = self.dphi(l, &delta, tp);
                    if dp.is_zero() {
                        continue;
                    }
                    let prod = &ba.retruncate(t) * &dp.retruncate(t);
                    r.add_assign_scaled(&prod, &-binom.clone());
                }
            }
        }
        // |α − ε| = 1 with the ν^{t≥1} parts of ĝ
        for k in 0..self.m {
            let mut alpha = eps.clone();
            alpha.0[k] += 1;
            let delta = Mono::unit(self.m, k);
            let f = CRat::from_int(alpha.0[k] as i64);
            for tp in 1..=s as usize {
                let Some(ba) = b.get(&(alpha.clone(), s - tp as i32)) else {
                    continue;
                };
                let dp = self.dphi(l, &delta, tp);
                if dp.is_zero() {
                    continue;
                }
                let prod = &ba.retruncate(t) * &dp.retruncate(t);
                r.add_assign_scaled(&prod, &-f.clone());
            }
        }
    }

    fn store(
        &self,
        b: &mut HashMap<(Mono, i32), Jet>,
        alpha: Mono,
        s: i32,
        v: Jet,
        t: TruncationSpec,
    ) -> Result<(), StarError> {
        match b.get(&(alpha.clone(), s)) {
            Some(prev) => {
                let diff = &prev.retruncate(t) - &v;
                if !diff.is_zero() {
                    return Err(StarError::Inconsistent {
                        alpha: format!("{alpha:?}"),
                        nu: s,
                        residual: diff.to_string(),
                    });
                }
            }
            None => {
                if !v.is_zero() {
                    b.insert((alpha, s), v);
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::parse_jet;
    use crate::star::Builtin;

    fn t() -> TruncationSpec {
        TruncationSpec::new(-1, 4, 6)
    }

    fn j(s: &str, m: usize) -> Jet {
        parse_jet(s, VarSpace::single(m), t()).unwrap()
    }

    #[test]
    fn antiwick_examples() {
        assert_eq!(antiwick_star(&j("zb1", 1), &j("z1", 1)).unwrap(), j("z1*zb1 + nu", 1));
        assert_eq!(
            antiwick_star(&j("zb1^2", 1), &j("z1^2", 1)).unwrap(),
            j("z1^2*zb1^2 + 4*nu*z1*zb1 + 2*nu^2", 1)
        );
        let h = j("z1*zb1^2 + 3*zb1", 1);
        assert_eq!(antiwick_star(&j("z1^2", 1), &h).unwrap(), &j("z1^2", 1) * &h);
    }

    #[test]
    fn flat_recursion_matches_closed_form() {
        let eng = StarEngine::new(Builtin::Flat.potential(1, 6), t());
        let cf = StarEngine::antiwick(1, t());
        for f in ["zb1", "z1*zb1", "zb1^2 + z1", "z1^2*zb1^3"] {
            for g in ["z1", "z1^2*zb1", "z1^3 + zb1"] {
                let (f, g) = (j(f, 1), j(g, 1));
                assert_eq!(eng.star(&f, &g).unwrap(), cf.star(&f, &g).unwrap(), "{f} * {g}");
            }
        }
    }

    #[test]
    fn flat_generator_operator() {
        let eng = StarEngine::new(Builtin::Flat.potential(1, 6), t());
        let l = eng.left_operator(&j("zb1", 1)).unwrap();
        let mut expected = DiffOperator::mult(&j("zb1", 1));
        expected.add_term(Mono::from_slice(&[1, 0]), j("nu", 1));
        assert_eq!(l, expected);
        assert_eq!(
            eng.left_operator(&j("1", 1)).unwrap(),
            DiffOperator::identity(VarSpace::single(1), t())
        );
    }

    #[test]
    fn hyperbolic_first_order() {
        let eng = StarEngine::new(Builtin::Hyperbolic.potential(1, 10), TruncationSpec::new(-1, 3, 10));
        let p = eng.star(&j("zb1", 1), &j("z1", 1)).unwrap();
        let s = VarSpace::single(1);
        let tt = p.trunc();
        let nu1 = parse_jet("1 - 2*z1*zb1 + z1^2*zb1^2", s, tt).unwrap();
        assert_eq!(p.nu_part(1).truncate_filtration(6), nu1);
        assert_eq!(p.nu_part(0), parse_jet("z1*zb1", s, tt).unwrap());
    }

    #[test]
    fn c1_tensor_flat() {
        let eng = StarEngine::antiwick(2, t());
        let c = eng.c1_tensor().unwrap();
        assert_eq!(c.rank, 2);
        // K^{z̄_1 z_1} = 1
        assert_eq!(c.k[2][0], Jet::one(VarSpace::single(2), t()));
        assert!(c.k[0][2].is_zero());
    }

    #[test]
    fn hyperbolic_left_and_right_agree() {
        let tr = TruncationSpec::new(-1, 3, 10);
        let eng = StarEngine::new(Builtin::Hyperbolic.potential(1, 10), tr);
        let s = VarSpace::single(1);
        let w = eng.certified_weight().unwrap();
        for (f, g) in [("zb1", "z1"), ("z1*zb1", "z1^2"), ("zb1^2", "z1*zb1")] {
            let f = parse_jet(f, s, tr).unwrap();
            let g = parse_jet(g, s, tr).unwrap();
            let a = eng.left_operator(&f).unwrap().apply(&g).unwrap();
            let b = eng.right_operator(&g).unwrap().apply(&f).unwrap();
            assert_eq!(a.truncate_filtration(w), b.truncate_filtration(w));
        }
    }

    #[test]
    fn hyperbolic_associativity() {
        let tr = TruncationSpec::new(-1, 3, 10);
        let eng = StarEngine::new(Builtin::Hyperbolic.potential(1, 10), tr);
        let s = VarSpace::single(1);
        let f = parse_jet("zb1 + z1", s, tr).unwrap();
        let g = parse_jet("z1*zb1", s, tr).unwrap();
        let h = parse_jet("z1 - 2*zb1^2", s, tr).unwrap();
        let r = crate::star::check_associativity(&eng, &f, &g, &h).unwrap();
        assert!(r.is_zero(), "{r}");
    }

    #[test]
    fn fubini_study_c2_generators() {
        let tr = TruncationSpec::new(-1, 2, 6);
        let p = Builtin::FubiniStudy.potential(2, 6);
        let eng = StarEngine::new(p.clone(), tr);
        let s = VarSpace::single(2);
        let w = eng.certified_weight().unwrap();
        // L_{∂Φ/∂z^k} = ∂Φ/∂z^k + ∂/∂z^k
        let g = parse_jet("z1*zb2 + zb1^2", s, tr).unwrap();
        let dphi = p.body().deriv(0).retruncate(tr);
        let lhs = eng.star(&dphi, &g).unwrap();
        let rhs = &(&dphi * &g) + &g.deriv(0);
        let lo = 2 * dphi.min_nu().unwrap() as i64;
        assert_eq!(lhs.truncate_filtration(w + lo), rhs.truncate_filtration(w + lo));
    }
}
