//! Point-supported distributions `h ↦ Σ ν^r a_{r,γ} (∂^γ h)(0)`.

use std::collections::BTreeMap;
use std::fmt;

use crate::kernel::{linalg, CRat, Jet, Mono, NuSeries, TruncationSpec, VarSpace};

use super::{DiffOpError, DiffOperator};

/// A finite combination of `ν^r δ∘∂^γ`, certified up to `ν^{nu_max}`.
#[derive(Clone)]
pub struct PointDistribution {
    space: VarSpace,
    nu_max: i32,
    terms: BTreeMap<(i32, Mono), CRat>,
}

impl PartialEq for PointDistribution {
    fn eq(&self, o: &Self) -> bool {
        self.space == o.space && self.terms == o.terms
    }
}

impl Eq for PointDistribution {}

impl PointDistribution {
    pub fn zero(space: VarSpace, nu_max: i32) -> Self {
        PointDistribution {
            space,
            nu_max,
            terms: BTreeMap::new(),
        }
    }

    /// Evaluation at the origin.
    pub fn delta(space: VarSpace, nu_max: i32) -> Self {
        let mut u = Self::zero(space, nu_max);
        u.add_term(0, space.zero_mono(), CRat::one());
        u
    }

    pub fn space(&self) -> VarSpace {
        self.space
    }

    pub fn nu_max(&self) -> i32 {
        self.nu_max
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, nu: i32, gamma: Mono, c: CRat) {
        if c.is_zero() || nu > self.nu_max {
            return;
        }
        let key = (nu, gamma);
        let e = self.terms.entry(key.clone()).or_default();
        *e += &c;
        if e.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &Mono, &CRat)> {
        self.terms.iter().map(|((k, g), c)| (*k, g, c))
    }

    pub fn coeff(&self, nu: i32, gamma: &Mono) -> CRat {
        self.terms
            .get(&(nu, gamma.clone()))
            .cloned()
            .unwrap_or_default()
    }

    pub fn min_nu(&self) -> Option<i32> {
        self.terms.keys().map(|(k, _)| *k).min()
    }

    /// Highest derivative order present.
    pub fn order(&self) -> Option<u32> {
        self.terms.keys().map(|(_, g)| g.degree()).max()
    }

    pub fn with_nu_max(&self, nu_max: i32) -> Self {
        let mut u = Self::zero(self.space, nu_max);
        for (k, g, c) in self.terms() {
            u.add_term(k, g.clone(), c.clone());
        }
        u
    }

    pub fn add(&self, o: &PointDistribution) -> Result<Self, DiffOpError> {
        if self.space != o.space {
            return Err(DiffOpError::SpaceMismatch);
        }
        let mut u = Self::zero(self.space, self.nu_max.min(o.nu_max));
        for (k, g, c) in self.terms().chain(o.terms()) {
            u.add_term(k, g.clone(), c.clone());
        }
        Ok(u)
    }

    pub fn scale(&self, c: &CRat) -> Self {
        let mut u = Self::zero(self.space, self.nu_max);
        for (k, g, a) in self.terms() {
            u.add_term(k, g.clone(), a * c);
        }
        u
    }

    /// Multiplies by `ν^s`.
    pub fn shift_nu(&self, s: i32) -> Self {
        let mut u = Self::zero(self.space, self.nu_max + s.max(0));
        for (k, g, a) in self.terms() {
            u.add_term(k + s, g.clone(), a.clone());
        }
        u
    }

    pub fn mul_series(&self, s: &NuSeries) -> Self {
        let lo = s.order().unwrap_or(0);
        let mut u = Self::zero(self.space, (self.nu_max + lo).min(s.nu_max() + self.min_nu().unwrap_or(0)));
        for (k, g, a) in self.terms() {
            for (e, c) in s.terms() {
                u.add_term(k + e, g.clone(), a * c);
            }
        }
        u
    }

    /// Every term has `r ≥ |γ|` (and hence `r ≥ 0`).
    pub fn is_natural(&self) -> bool {
        self.terms().all(|(k, g, _)| k >= 0 && g.degree() as i64 <= k as i64)
    }

    /// `u(h)`; the result is certified up to the smaller of the two windows
    /// after accounting for the lowest orders of both sides.
    pub fn eval(&self, h: &Jet) -> Result<NuSeries, DiffOpError> {
        if self.space != h.space() {
            return Err(DiffOpError::SpaceMismatch);
        }
        let lo_u = self.min_nu().unwrap_or(0);
        let lo_h = h.min_nu().unwrap_or(0);
        let nu_max = (self.nu_max + lo_h).min(h.trunc().nu_max + lo_u);
        let nu_min = (lo_u + lo_h).min(nu_max);
        let mut acc = NuSeries::zero(nu_min, nu_max);
        for (kh, m, c) in h.terms() {
            for (ku, g, a) in self.terms_with_gamma(m) {
                let f = CRat::from_bigint(g.factorial());
                acc.add_term(kh + ku, &(a * c) * &f);
            }
        }
        Ok(acc)
    }

    fn terms_with_gamma<'a>(&'a self, g: &'a Mono) -> impl Iterator<Item = (i32, &'a Mono, &'a CRat)> {
        self.terms().filter(move |(_, m, _)| *m == g)
    }

    /// `u ∘ A`, expanded back into the `δ∘∂^γ` basis.
    pub fn compose_operator(&self, a: &DiffOperator) -> Result<PointDistribution, DiffOpError> {
        if self.space != a.space() {
            return Err(DiffOpError::SpaceMismatch);
        }
        let lo_a = a.min_nu().unwrap_or(0);
        let lo_u = self.min_nu().unwrap_or(0);
        let nu_max = (self.nu_max + lo_a).min(a.trunc().nu_max + lo_u);
        let mut out = PointDistribution::zero(self.space, nu_max);
        for (r, alpha, c) in self.terms() {
            for eps in alpha.submonos() {
                let rest = alpha.checked_sub(&eps).expect("ε ≤ α");
                let binom = CRat::from_bigint(alpha.binomial(&eps));
                let cb = c * &binom;
                for (beta, coeff) in a.coefficients() {
                    let val = coeff.deriv_at_origin(&rest);
                    for (k, v) in val.terms() {
                        out.add_term(r + k, eps.add(beta), &cb * v);
                    }
                }
            }
        }
        Ok(out)
    }

    /// The canonical constant-coefficient operator `N` with `δ∘N = u`.
    pub fn to_operator(&self, trunc: TruncationSpec) -> DiffOperator {
        let mut op = DiffOperator::zero(self.space, trunc.with_nu_max(trunc.nu_max.max(self.nu_max)));
        for (k, g, c) in self.terms() {
            op.add_term(
                g.clone(),
                Jet::monomial(self.space, op.trunc(), k, self.space.zero_mono(), c.clone()),
            );
        }
        op
    }

    /// `δ ∘ N`: coefficients evaluated at the origin.
    pub fn of_operator(n: &DiffOperator) -> PointDistribution {
        let mut u = PointDistribution::zero(n.space(), n.trunc().nu_max);
        let zero = n.space().zero_mono();
        for (g, c) in n.coefficients() {
            for (k, m, a) in c.terms() {
                if *m == zero {
                    u.add_term(k, g.clone(), a.clone());
                }
            }
        }
        u
    }

    /// Tensor product over disjoint copies: the result lives on the space
    /// whose copies are the concatenation of the factors' copies.
    pub fn tensor(factors: &[PointDistribution]) -> Result<PointDistribution, DiffOpError> {
        let cdim = factors[0].space.cdim();
        if factors.iter().any(|u| u.space.cdim() != cdim) {
            return Err(DiffOpError::SpaceMismatch);
        }
        let copies: usize = factors.iter().map(|u| u.space.copies()).sum();
        let space = VarSpace::new(copies, cdim);
        let mut acc: Vec<(i32, Vec<u8>, CRat)> = vec![(0, Vec::new(), CRat::one())];
        let mut nu_max = i32::MAX;
        let mut lo_total = 0;
        for u in factors {
            lo_total += u.min_nu().unwrap_or(0);
        }
        for u in factors {
            let lo = u.min_nu().unwrap_or(0);
            nu_max = nu_max.min(u.nu_max + lo_total - lo);
            let mut next = Vec::new();
            for (k0, g0, c0) in &acc {
                for (k, g, c) in u.terms() {
                    let mut g2 = g0.clone();
                    g2.extend_from_slice(&g.0);
                    next.push((k0 + k, g2, c0 * c));
                }
            }
            acc = next;
        }
        let mut out = PointDistribution::zero(space, nu_max);
        for (k, g, c) in acc {
            out.add_term(k, Mono::from_slice(&g), c);
        }
        Ok(out)
    }

    /// Drops the terms of filtration weight `2r − |γ|` above `w`.
    pub fn truncate_weight(&self, w: i64) -> PointDistribution {
        let mut u = PointDistribution::zero(self.space, self.nu_max);
        for (k, g, c) in self.terms() {
            if 2 * k as i64 - g.degree() as i64 <= w {
                u.add_term(k, g.clone(), c.clone());
            }
        }
        u
    }

    /// Lowest filtration weight `2r − |γ|` among the terms.
    pub fn weight(&self) -> Option<i64> {
        self.terms().map(|(k, g, _)| 2 * k as i64 - g.degree() as i64).min()
    }

    /// Reads a distribution off its values on the monomials of degree at
    /// most `max_order`.
    pub fn from_values<F>(space: VarSpace, nu_max: i32, max_order: u32, mut value: F) -> Result<Self, DiffOpError>
    where
        F: FnMut(&Mono) -> Result<NuSeries, DiffOpError>,
    {
        let mut u = PointDistribution::zero(space, nu_max);
        for g in Mono::all_up_to(space.nvars(), max_order) {
            let v = value(&g)?;
            let f = CRat::from_bigint(g.factorial()).inv().expect("nonzero");
            for (k, c) in v.terms() {
                u.add_term(k, g.clone(), c * &f);
            }
        }
        Ok(u)
    }

    /// The ν-coefficient `u_r` as a scalar distribution.
    pub fn nu_part(&self, r: i32) -> PointDistribution {
        let mut u = PointDistribution::zero(self.space, 0);
        for (k, g, c) in self.terms() {
            if k == r {
                u.add_term(0, g.clone(), c.clone());
            }
        }
        u
    }

    /// `β_Λ[a][b] = Λ_1(x^a x^b)` together with its rank.
    pub fn beta_form(&self) -> Result<BilinearForm, DiffOpError> {
        let zero = self.space.zero_mono();
        let l0 = self.nu_part(0);
        if l0 != PointDistribution::delta(self.space, 0) {
            return Err(DiffOpError::NotOscillatoryShaped(
                "the ν^0 part is not evaluation at the origin".into(),
            ));
        }
        let l1 = self.nu_part(1);
        if l1.order().unwrap_or(0) > 2 {
            return Err(DiffOpError::NotOscillatoryShaped(
                "the ν^1 part has order above 2".into(),
            ));
        }
        let n = self.space.nvars();
        let mut m = vec![vec![CRat::zero(); n]; n];
        for (a, row) in m.iter_mut().enumerate() {
            for (b, entry) in row.iter_mut().enumerate() {
                let mut g = zero.clone();
                g.0[a] += 1;
                g.0[b] += 1;
                // (∂^γ x^a x^b)(0) = γ!
                let c = l1.coeff(0, &g);
                *entry = &c * &CRat::from_bigint(g.factorial());
            }
        }
        let rank = linalg::rank(&m);
        Ok(BilinearForm { space: self.space, matrix: m, rank })
    }
}

/// A symmetric scalar form on the coordinate differentials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BilinearForm {
    pub space: VarSpace,
    pub matrix: Vec<Vec<CRat>>,
    pub rank: usize,
}

impl BilinearForm {
    pub fn entry(&self, a: usize, b: usize) -> &CRat {
        &self.matrix[a][b]
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.matrix.len();
        (0..n).all(|a| (0..n).all(|b| self.matrix[a][b] == self.matrix[b][a]))
    }
}

impl fmt::Debug for PointDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for PointDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for ((k, g), c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})*nu^{k}*delta")?;
            for (i, &e) in g.0.iter().enumerate() {
                if e > 0 {
                    write!(f, "*d{}^{e}", self.space.name(i))?;
                }
            }
        }
        Ok(())
    }
}
