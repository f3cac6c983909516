//! Truncated formal series in ν and the coordinates of a [`VarSpace`].

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::crat::CRat;
use super::nuseries::NuSeries;
use super::space::{Kind, Mono, TruncationSpec, Var, VarSpace};
use super::KernelError;

/// A jet `Σ c ν^k x^α`, truncated to `trunc`.
///
/// Terms with `k > nu_max` or `|α| > deg_max` are discarded on insertion;
/// terms below `nu_min` widen the lower bound of the window instead of being
/// dropped, because they are the most significant part of a Laurent jet.
///
/// Equality compares the space and the stored terms only; the window is
/// bookkeeping.
#[derive(Clone)]
pub struct Jet {
    space: VarSpace,
    trunc: TruncationSpec,
    terms: BTreeMap<(i32, Mono), CRat>,
}

impl PartialEq for Jet {
    fn eq(&self, o: &Jet) -> bool {
        self.space == o.space && self.terms == o.terms
    }
}

impl Eq for Jet {}

impl std::hash::Hash for Jet {
    fn hash<H: std::hash::Hasher>(&self, h: &mut H) {
        self.space.hash(h);
        self.terms.hash(h);
    }
}

impl Jet {
    pub fn zero(space: VarSpace, trunc: TruncationSpec) -> Self {
        Jet {
            space,
            trunc,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(space: VarSpace, trunc: TruncationSpec, c: CRat) -> Self {
        let mut j = Self::zero(space, trunc);
        j.add_term(0, space.zero_mono(), c);
        j
    }

    pub fn one(space: VarSpace, trunc: TruncationSpec) -> Self {
        Self::constant(space, trunc, CRat::one())
    }

    pub fn var(space: VarSpace, trunc: TruncationSpec, v: Var) -> Self {
        let mut j = Self::zero(space, trunc);
        j.add_term(0, Mono::unit(space.nvars(), space.idx(v)), CRat::one());
        j
    }

    pub fn nu_power(space: VarSpace, trunc: TruncationSpec, k: i32) -> Self {
        let mut j = Self::zero(space, trunc);
        j.add_term(k, space.zero_mono(), CRat::one());
        j
    }

    pub fn monomial(space: VarSpace, trunc: TruncationSpec, nu: i32, mono: Mono, c: CRat) -> Self {
        let mut j = Self::zero(space, trunc);
        j.add_term(nu, mono, c);
        j
    }

    pub fn space(&self) -> VarSpace {
        self.space
    }

    pub fn trunc(&self) -> TruncationSpec {
        self.trunc
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &Mono, &CRat)> {
        self.terms.iter().map(|((k, m), c)| (*k, m, c))
    }

    pub fn coeff(&self, nu: i32, mono: &Mono) -> CRat {
        self.terms
            .get(&(nu, mono.clone()))
            .cloned()
            .unwrap_or_default()
    }

    pub fn add_term(&mut self, nu: i32, mono: Mono, c: CRat) {
        debug_assert_eq!(mono.len(), self.space.nvars());
        if c.is_zero() || nu > self.trunc.nu_max || mono.degree() > self.trunc.deg_max {
            return;
        }
        if nu < self.trunc.nu_min {
            self.trunc.nu_min = nu;
        }
        match self.terms.entry((nu, mono)) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                *e.get_mut() += &c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn check_space(&self, o: &Jet) -> Result<(), KernelError> {
        if self.space != o.space {
            return Err(KernelError::SpaceMismatch);
        }
        Ok(())
    }

    /// Re-truncates to a new window.
    pub fn retruncate(&self, trunc: TruncationSpec) -> Jet {
        let mut j = Jet::zero(self.space, trunc);
        for (k, m, c) in self.terms() {
            j.add_term(k, m.clone(), c.clone());
        }
        j
    }

    /// Keeps only terms whose filtration degree `|α| + 2k` is at most `f`.
    pub fn truncate_filtration(&self, f: i64) -> Jet {
        let mut j = Jet::zero(self.space, self.trunc);
        for (k, m, c) in self.terms() {
            if m.degree() as i64 + 2 * k as i64 <= f {
                j.add_term(k, m.clone(), c.clone());
            }
        }
        j
    }

    pub fn try_add(&self, o: &Jet) -> Result<Jet, KernelError> {
        self.check_space(o)?;
        let mut j = Jet::zero(self.space, self.trunc.meet(&o.trunc));
        for (k, m, c) in self.terms().chain(o.terms()) {
            j.add_term(k, m.clone(), c.clone());
        }
        Ok(j)
    }

    pub fn add_assign_scaled(&mut self, o: &Jet, c: &CRat) {
        assert_eq!(self.space, o.space, "jet space mismatch");
        if c.is_zero() {
            return;
        }
        for (k, m, a) in o.terms() {
            self.add_term(k, m.clone(), a * c);
        }
    }

    pub fn add_assign(&mut self, o: &Jet) {
        assert_eq!(self.space, o.space, "jet space mismatch");
        for (k, m, a) in o.terms() {
            self.add_term(k, m.clone(), a.clone());
        }
    }

    pub fn scale(&self, c: &CRat) -> Jet {
        let mut j = Jet::zero(self.space, self.trunc);
        if c.is_zero() {
            return j;
        }
        for (k, m, a) in self.terms() {
            j.add_term(k, m.clone(), a * c);
        }
        j
    }

    /// Multiplies by `ν^s`; the window moves with the terms.
    pub fn shift_nu(&self, s: i32) -> Jet {
        let mut j = Jet::zero(self.space, self.trunc.shifted(s));
        for (k, m, a) in self.terms() {
            j.add_term(k + s, m.clone(), a.clone());
        }
        j
    }

    /// Exact product, re-truncated to the coarser of the two windows.
    pub fn try_mul(&self, o: &Jet) -> Result<Jet, KernelError> {
        self.check_space(o)?;
        let trunc = self.trunc.meet(&o.trunc);
        let mut j = Jet::zero(self.space, trunc);
        let rhs: Vec<(i32, &Mono, u32, &CRat)> =
            o.terms().map(|(k, m, c)| (k, m, m.degree(), c)).collect();
        for (ka, ma, ca) in self.terms() {
            let da = ma.degree();
            if da > trunc.deg_max {
                continue;
            }
            for &(kb, mb, db, cb) in &rhs {
                if ka + kb > trunc.nu_max || da + db > trunc.deg_max {
                    continue;
                }
                j.add_term(ka + kb, ma.add(mb), ca * cb);
            }
        }
        Ok(j)
    }

    /// Multiplies every coefficient by a scalar ν-series.
    pub fn mul_series(&self, s: &NuSeries) -> Jet {
        let mut j = Jet::zero(self.space, self.trunc);
        for (k, m, a) in self.terms() {
            for (e, c) in s.terms() {
                j.add_term(k + e, m.clone(), a * c);
            }
        }
        j
    }

    pub fn pow(&self, e: u32) -> Jet {
        let mut acc = Jet::one(self.space, self.trunc);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Formal partial derivative in the variable with flat index `idx`.
    pub fn deriv(&self, idx: usize) -> Jet {
        let mut j = Jet::zero(self.space, self.trunc);
        for (k, m, c) in self.terms() {
            let e = m.0[idx];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2.0[idx] -= 1;
            j.add_term(k, m2, c * &CRat::from_int(e as i64));
        }
        j
    }

    pub fn try_deriv(&self, v: Var) -> Result<Jet, KernelError> {
        let idx = self.space.index(v).ok_or(KernelError::UnknownVariable)?;
        Ok(self.deriv(idx))
    }

    /// `∂^γ` for a multi-index over all variables.
    pub fn deriv_multi(&self, gamma: &Mono) -> Jet {
        let mut j = Jet::zero(self.space, self.trunc);
        for (k, m, c) in self.terms() {
            if let Some(rest) = m.checked_sub(gamma) {
                // m!/(m-γ)!
                let num = m.factorial();
                let den = rest.factorial();
                let f = CRat::from_bigint(num / den);
                j.add_term(k, rest, c * &f);
            }
        }
        j
    }

    /// Value at the origin as a ν-series.
    pub fn eval_origin(&self) -> NuSeries {
        let mut s = NuSeries::zero(self.trunc.nu_min, self.trunc.nu_max);
        for (k, m, c) in self.terms() {
            if m.is_zero() {
                s.add_term(k, c.clone());
            }
        }
        s
    }

    /// `(∂^γ h)(0)` as a ν-series.
    pub fn deriv_at_origin(&self, gamma: &Mono) -> NuSeries {
        let f = CRat::from_bigint(gamma.factorial());
        let mut s = NuSeries::zero(self.trunc.nu_min, self.trunc.nu_max);
        for (k, m, c) in self.terms() {
            if m == gamma {
                s.add_term(k, c * &f);
            }
        }
        s
    }

    /// The coefficient of `ν^k`, as a jet with no ν-dependence.
    pub fn nu_part(&self, k: i32) -> Jet {
        let mut j = Jet::zero(self.space, self.trunc);
        for (e, m, c) in self.terms() {
            if e == k {
                j.add_term(0, m.clone(), c.clone());
            }
        }
        j
    }

    pub fn min_nu(&self) -> Option<i32> {
        self.terms.keys().map(|(k, _)| *k).min()
    }

    pub fn max_nu(&self) -> Option<i32> {
        self.terms.keys().map(|(k, _)| *k).max()
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().map(|(_, m)| m.degree()).max()
    }

    /// Lowest `|α| + 2k` over the terms; `None` stands for +∞ (zero jet).
    pub fn filtration_degree(&self) -> Option<i64> {
        self.terms
            .keys()
            .map(|(k, m)| m.degree() as i64 + 2 * *k as i64)
            .min()
    }

    /// Keeps the terms satisfying a predicate.
    pub fn filter<F: Fn(i32, &Mono) -> bool>(&self, keep: F) -> Jet {
        let mut j = Jet::zero(self.space, self.trunc);
        for (k, m, c) in self.terms() {
            if keep(k, m) {
                j.add_term(k, m.clone(), c.clone());
            }
        }
        j
    }

    /// True when the jet depends only on variables of the given kind.
    pub fn depends_only_on(&self, kind: Kind) -> bool {
        self.terms().all(|(_, m, _)| {
            m.0.iter()
                .enumerate()
                .all(|(i, &e)| e == 0 || self.space.var(i).kind == kind)
        })
    }

    /// Exact substitution according to a plan.
    pub fn substitute(&self, plan: &SubstPlan) -> Result<Jet, KernelError> {
        if plan.source != self.space {
            return Err(KernelError::SpaceMismatch);
        }
        let mut j = Jet::zero(plan.target, self.trunc);
        let n = plan.target.nvars();
        'terms: for (k, m, c) in self.terms() {
            let mut out = Mono::zero(n);
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                match plan.map[i] {
                    Some(t) => out.0[t] += e,
                    None => continue 'terms,
                }
            }
            j.add_term(k, out, c.clone());
        }
        Ok(j)
    }

    /// Moves the jet into a different space by a plan, panicking on error.
    pub fn relabel(&self, plan: &SubstPlan) -> Jet {
        self.substitute(plan).expect("substitution plan does not fit jet")
    }
}

/// Maps each source variable to a target variable or freezes it to 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubstPlan {
    pub source: VarSpace,
    pub target: VarSpace,
    pub map: Vec<Option<usize>>,
}

impl SubstPlan {
    pub fn identity(space: VarSpace) -> Self {
        SubstPlan {
            source: space,
            target: space,
            map: (0..space.nvars()).map(Some).collect(),
        }
    }

    /// Builds a plan from a variable-level rule; `None` freezes to zero.
    pub fn from_rule<F: Fn(Var) -> Option<Var>>(
        source: VarSpace,
        target: VarSpace,
        rule: F,
    ) -> Self {
        let map = source
            .vars()
            .map(|v| rule(v).map(|t| target.idx(t)))
            .collect();
        SubstPlan { source, target, map }
    }

    /// Rejects plans that send variables of different kinds to one target.
    pub fn check_kinds(&self) -> Result<(), KernelError> {
        let mut seen: Vec<Option<Kind>> = vec![None; self.target.nvars()];
        for (i, t) in self.map.iter().enumerate() {
            if let Some(t) = *t {
                let kind = self.source.var(i).kind;
                match seen[t] {
                    Some(k) if k != kind => return Err(KernelError::KindCollision),
                    _ => seen[t] = Some(kind),
                }
            }
        }
        Ok(())
    }

    /// Inverse of a bijective relabeling.
    pub fn inverse(&self) -> Option<SubstPlan> {
        if self.source.nvars() != self.target.nvars() {
            return None;
        }
        let mut map = vec![None; self.target.nvars()];
        for (i, t) in self.map.iter().enumerate() {
            let t = (*t)?;
            if map[t].is_some() {
                return None;
            }
            map[t] = Some(i);
        }
        Some(SubstPlan {
            source: self.target,
            target: self.source,
            map,
        })
    }
}

impl<'a> Add<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn add(self, o: &Jet) -> Jet {
        self.try_add(o).expect("jet space mismatch")
    }
}

impl<'a> Sub<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn sub(self, o: &Jet) -> Jet {
        self.try_add(&o.scale(&CRat::from_int(-1)))
            .expect("jet space mismatch")
    }
}

impl<'a> Mul<&'a Jet> for &'a Jet {
    type Output = Jet;
    fn mul(self, o: &Jet) -> Jet {
        self.try_mul(o).expect("jet space mismatch")
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(&CRat::from_int(-1))
    }
}

impl fmt::Display for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", super::text::render_jet(self))
    }
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Jet({})", super::text::render_jet(self))
    }
}

/// Inverts a square matrix of jets whose constant part is invertible.
///
/// The scalar constant matrix `M(0)` is inverted exactly and the
/// remainder is handled by a Neumann series, which terminates because the
/// remainder raises the filtration degree and the window is finite.
pub fn invert_jet_matrix(m: &[Vec<Jet>]) -> Result<Vec<Vec<Jet>>, KernelError> {
    let n = m.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let space = m[0][0].space();
    let trunc = m
        .iter()
        .flatten()
        .fold(m[0][0].trunc(), |t, j| t.meet(&j.trunc()));
    let zero = space.zero_mono();
    for row in m {
        if row.len() != n {
            return Err(KernelError::SpaceMismatch);
        }
        for e in row {
            if e.space() != space {
                return Err(KernelError::SpaceMismatch);
            }
            if e.min_nu().is_some_and(|k| k < 0) {
                return Err(KernelError::NegativeNuPower(e.min_nu().unwrap()));
            }
        }
    }
    let m0: Vec<Vec<CRat>> = m
        .iter()
        .map(|row| row.iter().map(|e| e.coeff(0, &zero)).collect())
        .collect();
    let m0inv = super::linalg::invert_dense(&m0).ok_or(KernelError::SingularConstantTerm)?;
    let lift = |a: &Vec<Vec<CRat>>| -> Vec<Vec<Jet>> {
        a.iter()
            .map(|row| {
                row.iter()
                    .map(|c| Jet::constant(space, trunc, c.clone()))
                    .collect()
            })
            .collect()
    };
    let m0inv_j = lift(&m0inv);
    // E = M0^{-1} (M - M0): filtration-positive
    let mut rem = vec![vec![Jet::zero(space, trunc); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut e = m[i][j].retruncate(trunc);
            e.add_term(0, zero.clone(), -m0[i][j].clone());
            rem[i][j] = e;
        }
    }
    let e = matmul(&m0inv_j, &rem);
    let neg_e: Vec<Vec<Jet>> = e.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
    let mut acc = identity_matrix(space, trunc, n);
    let mut power = identity_matrix(space, trunc, n);
    let bound = (trunc.nu_max - trunc.nu_min.max(0)) as u32 + trunc.deg_max + 2;
    for _ in 0..bound {
        power = matmul(&power, &neg_e);
        if power.iter().flatten().all(|x| x.is_zero()) {
            break;
        }
        for i in 0..n {
            for j in 0..n {
                acc[i][j].add_assign(&power[i][j]);
            }
        }
    }
    Ok(matmul(&acc, &m0inv_j))
}

pub fn identity_matrix(space: VarSpace, trunc: TruncationSpec, n: usize) -> Vec<Vec<Jet>> {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        Jet::one(space, trunc)
                    } else {
                        Jet::zero(space, trunc)
                    }
                })
                .collect()
        })
        .collect()
}

pub fn matmul(a: &[Vec<Jet>], b: &[Vec<Jet>]) -> Vec<Vec<Jet>> {
    let n = a.len();
    let k = b.len();
    let p = if k == 0 { 0 } else { b[0].len() };
    let space = a[0][0].space();
    let trunc = a[0][0].trunc();
    let mut out = vec![vec![Jet::zero(space, trunc); p]; n];
    for i in 0..n {
        for j in 0..p {
            let mut acc = Jet::zero(space, trunc);
            for l in 0..k {
                if a[i][l].is_zero() || b[l][j].is_zero() {
                    continue;
                }
                acc.add_assign(&(&a[i][l] * &b[l][j]));
            }
            out[i][j] = acc;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c1() -> (VarSpace, TruncationSpec) {
        (VarSpace::single(1), TruncationSpec::new(-2, 4, 6))
    }

    #[test]
    fn distributivity_example() {
        let (s, t) = c1();
        let z = Jet::var(s, t, Var::z(0));
        let zb = Jet::var(s, t, Var::zb(0));
        let nu = Jet::nu_power(s, t, 1);
        let lhs = &(&z + &nu) * &zb;
        let rhs = &(&z * &zb) + &(&nu * &zb);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn exponents_add() {
        let (s, t) = c1();
        let z = Jet::var(s, t, Var::z(0));
        let zb = Jet::var(s, t, Var::zb(0));
        let a = &Jet::nu_power(s, t, -1) * &z;
        let b = &Jet::nu_power(s, t, 1) * &zb;
        assert_eq!(&a * &b, &z * &zb);
    }

    #[test]
    fn degree_cap_truncates() {
        let (s, t) = c1();
        let z = Jet::var(s, t, Var::z(0));
        assert!(!z.pow(6).is_zero());
        assert!((&z.pow(6) * &z).is_zero());
    }

    #[test]
    fn derivative_examples() {
        let (s, t) = c1();
        let z = Jet::var(s, t, Var::z(0));
        let zb = Jet::var(s, t, Var::zb(0));
        let f = &(&z * &z) * &zb;
        assert_eq!(f.deriv(0), (&z * &zb).scale(&CRat::from_int(2)));
        assert!(z.pow(3).deriv(1).is_zero());
        let g = &Jet::nu_power(s, t, -1) * &(&z * &zb);
        assert_eq!(g.deriv(0), &Jet::nu_power(s, t, -1) * &zb);
        assert_eq!(
            z.try_deriv(Var::new(1, Kind::Holo, 0)),
            Err(KernelError::UnknownVariable)
        );
    }

    #[test]
    fn filtration_examples() {
        let (s, t) = c1();
        let z = Jet::var(s, t, Var::z(0));
        assert_eq!(Jet::nu_power(s, t, 1).filtration_degree(), Some(2));
        assert_eq!(z.filtration_degree(), Some(1));
        let f = &Jet::nu_power(s, t, -1) * &z.pow(2);
        assert_eq!(f.filtration_degree(), Some(0));
        assert_eq!(Jet::zero(s, t).filtration_degree(), None);
    }

    #[test]
    fn mismatched_spaces_error() {
        let t = TruncationSpec::new(0, 2, 2);
        let a = Jet::one(VarSpace::single(1), t);
        let b = Jet::one(VarSpace::single(2), t);
        assert_eq!(a.try_mul(&b), Err(KernelError::SpaceMismatch));
    }

    #[test]
    fn geometric_series_inverse() {
        let (s, t) = c1();
        let zz = &Jet::var(s, t, Var::z(0)) * &Jet::var(s, t, Var::zb(0));
        let m = vec![vec![&Jet::one(s, t) - &zz]];
        let inv = invert_jet_matrix(&m).unwrap();
        // oracle: 1 + zz̄ + (zz̄)² + (zz̄)³ up to degree 6
        let mut expected = Jet::zero(s, t);
        for k in 0..=3 {
            expected.add_assign(&zz.pow(k));
        }
        assert_eq!(inv[0][0], expected);
    }

    #[test]
    fn singular_constant_term() {
        let (s, t) = c1();
        let zz = &Jet::var(s, t, Var::z(0)) * &Jet::var(s, t, Var::zb(0));
        assert_eq!(
            invert_jet_matrix(&[vec![zz]]),
            Err(KernelError::SingularConstantTerm)
        );
    }

    #[test]
    fn identity_inverse() {
        let (s, t) = c1();
        let id = identity_matrix(s, t, 2);
        assert_eq!(invert_jet_matrix(&id).unwrap(), id);
    }
}
