//! Classifying potentials `Φ = ν^{-1}Φ_{-1} + Φ_0 + νΦ_1 + …` as jets.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::kernel::{
    invert_jet_matrix, CRat, Jet, Kind, KernelError, Mono, TruncationSpec, Var, VarSpace,
};

use super::StarError;

/// A validated potential together with its metric `g_{kl̄} = ∂_k∂_l̄ Φ_{-1}`.
#[derive(Clone, Debug)]
pub struct PotentialJet {
    name: String,
    body: Jet,
    metric: Vec<Vec<Jet>>,
    metric_inv: Vec<Vec<Jet>>,
    exact: bool,
}

/// The potentials shipped with the engine.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Builtin {
    Flat,
    Hyperbolic,
    FubiniStudy,
}

impl Builtin {
    pub const ALL: [Builtin; 3] = [Builtin::Flat, Builtin::Hyperbolic, Builtin::FubiniStudy];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Flat => "flat",
            Builtin::Hyperbolic => "hyperbolic",
            Builtin::FubiniStudy => "fubini-study",
        }
    }

    pub fn from_name(s: &str) -> Option<Builtin> {
        Self::ALL.into_iter().find(|b| b.name() == s)
    }

    pub fn description(self) -> &'static str {
        match self {
            Builtin::Flat => "nu^-1 * sum z_k zb_k",
            Builtin::Hyperbolic => "-nu^-1 * log(1 - sum z_k zb_k)",
            Builtin::FubiniStudy => "nu^-1 * log(1 + sum z_k zb_k)",
        }
    }

    /// Jet of the potential on `C^m` up to coordinate degree `deg_max`.
    pub fn potential(self, m: usize, deg_max: u32) -> PotentialJet {
        let space = VarSpace::single(m);
        let trunc = TruncationSpec::new(-1, 0, deg_max);
        let mut s = Jet::zero(space, trunc);
        for k in 0..m {
            s.add_assign(&(&Jet::var(space, trunc, Var::z(k)) * &Jet::var(space, trunc, Var::zb(k))));
        }
        // Σ_n c_n s^n with c_n = 1 (flat, n = 1 only), 1/n, (−1)^{n+1}/n
        let mut body = Jet::zero(space, trunc);
        let mut power = Jet::one(space, trunc);
        for n in 1..=(deg_max / 2).max(1) {
            power = &power * &s;
            let c = match self {
                Builtin::Flat if n == 1 => CRat::one(),
                Builtin::Flat => break,
                Builtin::Hyperbolic => CRat::from_ratio(1, n as i64),
                Builtin::FubiniStudy => {
                    CRat::from_ratio(if n % 2 == 1 { 1 } else { -1 }, n as i64)
                }
            };
            body.add_assign_scaled(&power, &c);
        }
        PotentialJet::new(self.name(), body.shift_nu(-1).retruncate(trunc)).expect("builtin potentials are valid")
    }
}

impl PotentialJet {
    pub fn new(name: &str, body: Jet) -> Result<Self, StarError> {
        let space = body.space();
        if space.copies() != 1 {
            return Err(StarError::InvalidPotential("potential must live on one copy".into()));
        }
        if let Some(k) = body.min_nu() {
            if k < -1 {
                return Err(StarError::InvalidPotential(format!(
                    "potential has a nu^{k} term"
                )));
            }
        }
        let m = space.cdim();
        let phi_m1 = body.nu_part(-1);
        for (_, mono, _) in phi_m1.terms() {
            if mono.degree() <= 1 {
                return Err(StarError::InvalidPotential(
                    "the nu^-1 part must have no constant or linear terms".into(),
                ));
            }
        }
        let metric: Vec<Vec<Jet>> = (0..m)
            .map(|k| {
                (0..m)
                    .map(|l| {
                        phi_m1
                            .deriv(space.idx(Var::z(k)))
                            .deriv(space.idx(Var::zb(l)))
                    })
                    .collect()
            })
            .collect();
        let metric_inv = invert_jet_matrix(&metric).map_err(|e| match e {
            KernelError::SingularConstantTerm => {
                StarError::InvalidPotential("metric at the origin is singular".into())
            }
            other => StarError::Kernel(other),
        })?;
        // bilinear mixed part only: the recursion then never truncates
        let exact = body.terms().all(|(_, mono, _)| {
            let (h, a) = kind_degrees(space, mono);
            h == 0 || a == 0 || (h == 1 && a == 1)
        });
        Ok(PotentialJet {
            name: name.to_string(),
            body,
            metric,
            metric_inv,
            exact,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn body(&self) -> &Jet {
        &self.body
    }

    pub fn space(&self) -> VarSpace {
        self.body.space()
    }

    pub fn cdim(&self) -> usize {
        self.body.space().cdim()
    }

    pub fn deg_max(&self) -> u32 {
        self.body.trunc().deg_max
    }

    /// `g_{kl̄}`.
    pub fn metric(&self) -> &[Vec<Jet>] {
        &self.metric
    }

    /// `g^{l̄k}` at `[l][k]`: the matrix inverse of `metric()`.
    pub fn metric_inv(&self) -> &[Vec<Jet>] {
        &self.metric_inv
    }

    /// True when the product is computed without any degree truncation
    /// error: every mixed term of `Φ` is bilinear.
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    /// Adds `c·ν^{-1}(z_1² z̄_1 + z_1 z̄_1²)`, a change that keeps the
    /// potential valid but alters the product from order ν² on.
    pub fn perturbed(&self, c: CRat) -> PotentialJet {
        let space = self.space();
        let (z, zb) = (space.idx(Var::z(0)), space.idx(Var::zb(0)));
        let mut body = self.body.clone();
        for (a, b) in [(2, 1), (1, 2)] {
            let mut mono = Mono::zero(space.nvars());
            mono.0[z] = a;
            mono.0[zb] = b;
            body.add_term(-1, mono, c.clone());
        }
        PotentialJet::new(&format!("{}+perturbed", self.name), body)
            .expect("perturbation keeps the potential valid")
    }

    pub fn to_file(&self) -> PotentialFile {
        PotentialFile {
            m: self.cdim(),
            deg_max: self.deg_max(),
            terms: self
                .body
                .terms()
                .map(|(nu, mono, c)| PotentialTerm {
                    nu,
                    exps: mono.0.iter().map(|&e| e as u32).collect(),
                    re: rat_text(c.re()),
                    im: rat_text(c.im()),
                })
                .collect(),
        }
    }

    pub fn from_file(name: &str, f: &PotentialFile) -> Result<Self, StarError> {
        if f.m == 0 {
            return Err(StarError::InvalidPotential("m must be at least 1".into()));
        }
        let space = VarSpace::single(f.m);
        let mut body = Jet::zero(space, TruncationSpec::new(-1, 0, f.deg_max));
        for t in &f.terms {
            if t.exps.len() != space.nvars() {
                return Err(StarError::InvalidPotential(format!(
                    "term has {} exponents, expected {}",
                    t.exps.len(),
                    space.nvars()
                )));
            }
            if t.exps.iter().any(|&e| e > u8::MAX as u32) {
                return Err(StarError::InvalidPotential("exponent too large".into()));
            }
            let mono = Mono(t.exps.iter().map(|&e| e as u8).collect());
            if mono.degree() > f.deg_max {
                return Err(StarError::InvalidPotential("term exceeds deg_max".into()));
            }
            let re = parse_rat(&t.re)?;
            let im = parse_rat(&t.im)?;
            let nu_max = body.trunc().nu_max.max(t.nu);
            body = body.retruncate(body.trunc().with_nu_max(nu_max));
            body.add_term(t.nu, mono, CRat::new(re, im));
        }
        PotentialJet::new(name, body)
    }

    pub fn load(path: &Path) -> Result<Self, StarError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| StarError::InvalidPotential(format!("{}: {e}", path.display())))?;
        let f: PotentialFile = serde_json::from_str(&text)
            .map_err(|e| StarError::InvalidPotential(format!("{}: {e}", path.display())))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "file".into());
        Self::from_file(&name, &f)
    }
}

fn kind_degrees(space: VarSpace, mono: &Mono) -> (u32, u32) {
    let mut h = 0;
    let mut a = 0;
    for (i, &e) in mono.0.iter().enumerate() {
        match space.var(i).kind {
            Kind::Holo => h += e as u32,
            Kind::Anti => a += e as u32,
        }
    }
    (h, a)
}

fn rat_text(r: &num_rational::BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn parse_rat(s: &str) -> Result<num_rational::BigRational, StarError> {
    let bad = || StarError::InvalidPotential(format!("bad rational {s:?}"));
    let (p, q) = match s.trim().split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s.trim(), "1"),
    };
    let p: num_bigint::BigInt = p.parse().map_err(|_| bad())?;
    let q: num_bigint::BigInt = q.parse().map_err(|_| bad())?;
    if q == num_bigint::BigInt::from(0) {
        return Err(bad());
    }
    Ok(num_rational::BigRational::new(p, q))
}

/// On-disk potential: `{m, deg_max, terms: [{nu, exps, re, im}]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PotentialFile {
    pub m: usize,
    pub deg_max: u32,
    pub terms: Vec<PotentialTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PotentialTerm {
    pub nu: i32,
    pub exps: Vec<u32>,
    pub re: String,
    #[serde(default = "zero_text")]
    pub im: String,
}

fn zero_text() -> String {
    "0".into()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::parse_jet;

    #[test]
    fn hyperbolic_series() {
        let p = Builtin::Hyperbolic.potential(1, 6);
        let t = p.body().trunc();
        let expected = parse_jet(
            "nu^-1*z1*zb1 + 1/2*nu^-1*z1^2*zb1^2 + 1/3*nu^-1*z1^3*zb1^3",
            p.space(),
            t,
        )
        .unwrap();
        assert_eq!(p.body(), &expected);
        assert!(!p.is_exact());
        // g = ∂∂̄Φ_{-1} = 1/(1−zz̄)², inverse (1−zz̄)² truncated
        let inv = &p.metric_inv()[0][0];
        let oracle = parse_jet("1 - 2*z1*zb1 + z1^2*zb1^2", p.space(), inv.trunc()).unwrap();
        assert_eq!(inv.truncate_filtration(4), oracle);
    }

    #[test]
    fn flat_is_exact() {
        let p = Builtin::Flat.potential(2, 6);
        assert!(p.is_exact());
        assert_eq!(p.metric_inv()[0][0], Jet::one(p.space(), p.body().trunc()));
        assert!(p.metric_inv()[0][1].is_zero());
    }

    #[test]
    fn rejects_linear_terms_and_degenerate_metric() {
        let s = VarSpace::single(1);
        let t = TruncationSpec::new(-1, 0, 4);
        let lin = parse_jet("nu^-1*z1 + nu^-1*z1*zb1", s, t).unwrap();
        assert!(PotentialJet::new("x", lin).is_err());
        let deg = parse_jet("nu^-1*z1^2*zb1^2", s, t).unwrap();
        assert!(PotentialJet::new("x", deg).is_err());
    }

    #[test]
    fn file_roundtrip() {
        let p = Builtin::FubiniStudy.potential(2, 4);
        let f = p.to_file();
        let text = serde_json::to_string(&f).unwrap();
        let back: PotentialFile = serde_json::from_str(&text).unwrap();
        let q = PotentialJet::from_file("fs", &back).unwrap();
        assert_eq!(q.body(), p.body());
        assert_eq!(q.body().to_string(), p.body().to_string());
    }
}
