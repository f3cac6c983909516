//! The formal Berezin transform `B(ab) = b ⋆ a`, its inverse, the
//! Wick-type twin product and the functionals `K^(l)`.

use std::collections::BTreeMap;

use crate::diffop::{DiffOpError, DiffOperator, Witness};
use crate::kernel::{CRat, Jet, Kind, Mono, NuSeries, TruncationSpec, VarSpace};
use crate::star::{StarEngine, StarError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BerezinError {
    #[error("map is not unipotent at monomial {0}")]
    NotUnipotent(String),
    #[error("the two expressions for K disagree: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Star(#[from] StarError),
    #[error(transparent)]
    DiffOp(#[from] DiffOpError),
}

/// A linear map on jets given by the images of the basis monomials
/// `x^μ`, `|μ| ≤ deg_max`, and extended linearly over ν.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetLinMap {
    space: VarSpace,
    trunc: TruncationSpec,
    images: BTreeMap<Mono, Jet>,
}

impl JetLinMap {
    pub fn from_fn<F>(space: VarSpace, trunc: TruncationSpec, image: F) -> Result<Self, BerezinError>
    where
        F: FnMut(&Mono) -> Result<Jet, BerezinError>,
    {
        Self::from_fn_up_to(space, trunc, trunc.deg_max, image)
    }

    /// Like [`from_fn`](Self::from_fn) on the monomials of degree ≤ `deg`.
    pub fn from_fn_up_to<F>(
        space: VarSpace,
        trunc: TruncationSpec,
        deg: u32,
        mut image: F,
    ) -> Result<Self, BerezinError>
    where
        F: FnMut(&Mono) -> Result<Jet, BerezinError>,
    {
        let mut images = BTreeMap::new();
        for mu in Mono::all_up_to(space.nvars(), deg.min(trunc.deg_max)) {
            let im = image(&mu)?.retruncate(trunc);
            images.insert(mu, im);
        }
        Ok(JetLinMap { space, trunc, images })
    }

    pub fn identity(space: VarSpace, trunc: TruncationSpec) -> Self {
        Self::from_fn(space, trunc, |mu| Ok(Jet::monomial(space, trunc, 0, mu.clone(), CRat::one())))
            .expect("identity images are infallible")
    }

    pub fn space(&self) -> VarSpace {
        self.space
    }

    pub fn trunc(&self) -> TruncationSpec {
        self.trunc
    }

    pub fn image(&self, mu: &Mono) -> Option<&Jet> {
        self.images.get(mu)
    }

    pub fn images(&self) -> impl Iterator<Item = (&Mono, &Jet)> {
        self.images.iter()
    }

    pub fn apply(&self, f: &Jet) -> Jet {
        let trunc = self.trunc.meet(&f.trunc());
        let mut out = Jet::zero(self.space, trunc);
        for (k, mu, c) in f.terms() {
            if let Some(im) = self.images.get(mu) {
                out.add_assign(&im.shift_nu(k).scale(c));
            }
        }
        out
    }

    pub fn compose(&self, o: &JetLinMap) -> JetLinMap {
        let images = o
            .images
            .iter()
            .map(|(mu, im)| (mu.clone(), self.apply(im)))
            .collect();
        JetLinMap {
            space: self.space,
            trunc: self.trunc.meet(&o.trunc),
            images,
        }
    }

    pub fn sub(&self, o: &JetLinMap) -> JetLinMap {
        let images = self
            .images
            .iter()
            .map(|(mu, im)| {
                let other = o.images.get(mu).cloned().unwrap_or_else(|| Jet::zero(self.space, self.trunc));
                (mu.clone(), im - &other)
            })
            .collect();
        JetLinMap {
            space: self.space,
            trunc: self.trunc,
            images,
        }
    }

    pub fn scale(&self, c: &CRat) -> JetLinMap {
        JetLinMap {
            space: self.space,
            trunc: self.trunc,
            images: self.images.iter().map(|(m, j)| (m.clone(), j.scale(c))).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.images.values().all(|j| j.is_zero())
    }

    /// Keeps image terms of filtration weight ≤ `w`, the part of a
    /// filtered map certified when errors have weight above `w`.
    pub fn truncate_weight(&self, w: i64) -> JetLinMap {
        let images = self
            .images
            .iter()
            .map(|(mu, im)| (mu.clone(), im.truncate_filtration(w)))
            .collect();
        JetLinMap {
            space: self.space,
            trunc: self.trunc,
            images,
        }
    }

    /// Inverse of a map `1 + N` where `N` strictly raises the ν-order;
    /// the Neumann series stops because the ν-window is finite.
    pub fn inverse(&self) -> Result<JetLinMap, BerezinError> {
        let id = JetLinMap::identity(self.space, self.trunc);
        let n = self.sub(&id);
        for (mu, im) in &n.images {
            if im.min_nu().is_some_and(|k| k <= 0) {
                return Err(BerezinError::NotUnipotent(render_mono(self.space, mu)));
            }
        }
        let mut acc = id.clone();
        let mut power = id;
        let steps = (self.trunc.nu_max - self.trunc.nu_min.min(0)).max(0) + 1;
        for k in 1..=steps {
            power = n.compose(&power);
            if power.is_zero() {
                break;
            }
            let sign = if k % 2 == 1 { -1 } else { 1 };
            acc = acc.sub(&power.scale(&CRat::from_int(-sign)));
        }
        Ok(acc)
    }

    /// Reconstructs the map as a differential operator.
    pub fn to_operator(&self, max_order: u32) -> Result<DiffOperator, DiffOpError> {
        DiffOperator::from_jet_action(self.space, self.trunc, max_order, |mu| {
            self.images
                .get(mu)
                .cloned()
                .unwrap_or_else(|| Jet::zero(self.space, self.trunc))
        })
    }
}

fn render_mono(space: VarSpace, mu: &Mono) -> String {
    Jet::monomial(space, TruncationSpec::new(0, 0, mu.degree()), 0, mu.clone(), CRat::one()).to_string()
}

/// Splits `z^α z̄^β` into its holomorphic and antiholomorphic factors.
fn split(space: VarSpace, mu: &Mono) -> (Mono, Mono) {
    let mut a = space.zero_mono();
    let mut b = space.zero_mono();
    for (i, &e) in mu.0.iter().enumerate() {
        match space.var(i).kind {
            Kind::Holo => a.0[i] = e,
            Kind::Anti => b.0[i] = e,
        }
    }
    (a, b)
}

/// The Berezin transform of an engine together with its inverse.
#[derive(Clone, Debug)]
pub struct Berezin {
    pub map: JetLinMap,
    pub inverse: JetLinMap,
}

impl Berezin {
    /// `B(z^α z̄^β) = z̄^β ⋆ z^α` on every basis monomial.
    pub fn new(engine: &StarEngine) -> Result<Self, BerezinError> {
        let space = engine.space();
        let trunc = engine.trunc();
        let map = JetLinMap::from_fn(space, trunc, |mu| {
            let (a, b) = split(space, mu);
            let a = Jet::monomial(space, trunc, 0, a, CRat::one());
            let b = Jet::monomial(space, trunc, 0, b, CRat::one());
            Ok(engine.star(&b, &a)?)
        })?;
        let inverse = map.inverse()?;
        Ok(Berezin { map, inverse })
    }

    pub fn apply(&self, f: &Jet) -> Jet {
        self.map.apply(f)
    }

    pub fn apply_inverse(&self, f: &Jet) -> Jet {
        self.inverse.apply(f)
    }
}

/// `f ⋆′ g = B^{-1}(Bf ⋆ Bg)`.
pub fn wick_star(engine: &StarEngine, b: &Berezin, f: &Jet, g: &Jet) -> Result<Jet, BerezinError> {
    let p = engine.star(&b.apply(f), &b.apply(g))?;
    Ok(b.apply_inverse(&p))
}

/// Residuals `L_b − B∘b∘B^{-1}` and `R_a − B∘a∘B^{-1}` on the basis
/// monomials whose products with `a` and `b` stay inside the degree cap,
/// restricted to the certified weight of the engine.
pub fn conjugation_check(
    engine: &StarEngine,
    bz: &Berezin,
    a: &Jet,
    b: &Jet,
) -> Result<(JetLinMap, JetLinMap), BerezinError> {
    let space = engine.space();
    let trunc = engine.trunc();
    let lb = engine.left_operator(b)?;
    let ra = engine.right_operator(a)?;
    let basis = |mu: &Mono| Jet::monomial(space, trunc, 0, mu.clone(), CRat::one());
    let room = |f: &Jet| trunc.deg_max.saturating_sub(f.max_degree().unwrap_or(0));
    let left = JetLinMap::from_fn_up_to(space, trunc, room(b), |mu| {
        let x = basis(mu);
        let lhs = lb.apply(&x).map_err(StarError::from)?;
        let rhs = bz.apply(&(b * &bz.apply_inverse(&x)));
        Ok(&lhs - &rhs)
    })?;
    let right = JetLinMap::from_fn_up_to(space, trunc, room(a), |mu| {
        let x = basis(mu);
        let lhs = ra.apply(&x).map_err(StarError::from)?;
        let rhs = bz.apply(&(a * &bz.apply_inverse(&x)));
        Ok(&lhs - &rhs)
    })?;
    Ok(match engine.certified_weight() {
        None => (left, right),
        Some(w) => (left.truncate_weight(w), right.truncate_weight(w)),
    })
}

/// `ν log B` has the oscillatory shape within the certified weight of the
/// engine.
pub fn oscillatory_check(engine: &StarEngine, bz: &Berezin) -> Result<Result<(), Witness>, BerezinError> {
    let op = bz.map.to_operator(engine.trunc().deg_max)?;
    Ok(match engine.certified_weight() {
        None => op.is_oscillatory()?,
        Some(w) => op.is_oscillatory_within(w)?,
    })
}

/// `K^(l)(f_1, …, f_l)`: `(Bf_1 ⋆ … ⋆ Bf_l)(0)`, cross-checked against
/// `B(f_1 ⋆′ … ⋆′ f_l)(0)` within the certified ν-order.
pub fn k_functional(engine: &StarEngine, bz: &Berezin, fs: &[Jet]) -> Result<NuSeries, BerezinError> {
    let trunc = engine.trunc();
    let mut direct = Jet::one(engine.space(), trunc);
    let mut twin = Jet::one(engine.space(), trunc);
    for f in fs {
        direct = engine.star(&direct, &bz.apply(f))?;
        twin = wick_star(engine, bz, &twin, f)?;
    }
    let lhs = direct.eval_origin();
    let rhs = bz.apply(&twin).eval_origin();
    let top = certified_nu(engine, fs);
    let diff = lhs.sub(&rhs).truncate(top);
    if !diff.is_zero() {
        return Err(BerezinError::Mismatch(diff.to_string()));
    }
    Ok(lhs.truncate(top))
}

/// Highest ν-order of a value at the origin built from `fs` that is free
/// of truncation error.
pub fn certified_nu(engine: &StarEngine, fs: &[Jet]) -> i32 {
    let nu_max = engine.trunc().nu_max;
    match engine.certified_weight() {
        None => nu_max,
        Some(w) => {
            let lo: i64 = fs
                .iter()
                .map(|f| f.filtration_degree().unwrap_or(0).min(0))
                .sum();
            (((w + lo).div_euclid(2)) as i32).min(nu_max)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::parse_jet;
    use crate::star::Builtin;

    fn flat() -> (StarEngine, Berezin) {
        let e = StarEngine::antiwick(1, TruncationSpec::new(0, 4, 6));
        let b = Berezin::new(&e).unwrap();
        (e, b)
    }

    fn j(e: &StarEngine, s: &str) -> Jet {
        parse_jet(s, e.space(), e.trunc()).unwrap()
    }

    #[test]
    fn flat_images() {
        let (e, b) = flat();
        assert_eq!(b.apply(&j(&e, "z1^3")), j(&e, "z1^3"));
        assert_eq!(b.apply(&j(&e, "zb1^2")), j(&e, "zb1^2"));
        assert_eq!(b.apply(&j(&e, "z1*zb1")), j(&e, "z1*zb1 + nu"));
        assert_eq!(
            b.apply(&j(&e, "z1^2*zb1^2")),
            j(&e, "z1^2*zb1^2 + 4*nu*z1*zb1 + 2*nu^2")
        );
        assert_eq!(b.apply_inverse(&j(&e, "z1*zb1")), j(&e, "z1*zb1 - nu"));
        assert_eq!(b.map.compose(&b.inverse), JetLinMap::identity(e.space(), e.trunc()));
    }

    #[test]
    fn identity_inverse() {
        let s = VarSpace::single(1);
        let t = TruncationSpec::new(0, 2, 3);
        let id = JetLinMap::identity(s, t);
        assert_eq!(id.inverse().unwrap(), id);
        let bad = JetLinMap::from_fn(s, t, |mu| Ok(Jet::monomial(s, t, 0, mu.clone(), CRat::from_int(2)))).unwrap();
        assert!(bad.inverse().is_err());
    }

    #[test]
    fn wick_examples() {
        let (e, b) = flat();
        assert_eq!(wick_star(&e, &b, &j(&e, "z1"), &j(&e, "zb1")).unwrap(), j(&e, "z1*zb1 - nu"));
        assert_eq!(wick_star(&e, &b, &j(&e, "zb1"), &j(&e, "z1")).unwrap(), j(&e, "z1*zb1"));
        let g = j(&e, "z1^2*zb1 + 3");
        assert_eq!(wick_star(&e, &b, &j(&e, "1"), &g).unwrap(), g);
    }

    #[test]
    fn k_examples() {
        let (e, b) = flat();
        let one = k_functional(&e, &b, &[j(&e, "1")]).unwrap();
        assert_eq!(one, NuSeries::constant(CRat::one(), 0, 4));
        let k1 = k_functional(&e, &b, &[j(&e, "z1*zb1")]).unwrap();
        assert_eq!(k1.coeff(1), CRat::one());
        assert_eq!(k1.terms().count(), 1);
        assert!(k_functional(&e, &b, &[j(&e, "z1"), j(&e, "zb1")]).unwrap().is_zero());
    }

    #[test]
    fn conjugation_flat_and_hyperbolic() {
        let (e, b) = flat();
        let (l, r) = conjugation_check(&e, &b, &j(&e, "z1"), &j(&e, "zb1")).unwrap();
        assert!(l.is_zero() && r.is_zero());
        let t = TruncationSpec::new(0, 3, 8);
        let h = StarEngine::new(Builtin::Hyperbolic.potential(1, 8), t);
        let hb = Berezin::new(&h).unwrap();
        let (l, r) = conjugation_check(&h, &hb, &j(&h, "z1"), &j(&h, "zb1^2")).unwrap();
        assert!(l.is_zero(), "{l:?}");
        assert!(r.is_zero(), "{r:?}");
    }

    #[test]
    fn berezin_is_oscillatory() {
        let (_, b) = flat();
        let op = b.map.to_operator(6).unwrap();
        assert_eq!(op.is_oscillatory().unwrap(), Ok(()));
    }
}
