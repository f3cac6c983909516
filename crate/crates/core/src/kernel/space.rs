//! Variable spaces, multi-indices and truncation windows.

use std::fmt;

use smallvec::SmallVec;

/// Holomorphic (`z`) or antiholomorphic (`z̄`) coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Holo,
    Anti,
}

impl Kind {
    pub fn flip(self) -> Kind {
        match self {
            Kind::Holo => Kind::Anti,
            Kind::Anti => Kind::Holo,
        }
    }
}

/// A coordinate `(copy, kind, axis)`; all indices are zero-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub copy: usize,
    pub kind: Kind,
    pub axis: usize,
}

impl Var {
    pub fn new(copy: usize, kind: Kind, axis: usize) -> Self {
        Var { copy, kind, axis }
    }

    pub fn z(axis: usize) -> Self {
        Var::new(0, Kind::Holo, axis)
    }

    pub fn zb(axis: usize) -> Self {
        Var::new(0, Kind::Anti, axis)
    }
}

/// Coordinates on `l` copies of a chart of complex dimension `m`.
///
/// Variables are laid out in lexicographic `(copy, kind, axis)` order, so
/// the flat index of a variable is `copy·2m + kind·m + axis`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct VarSpace {
    copies: usize,
    cdim: usize,
}

impl VarSpace {
    pub fn new(copies: usize, cdim: usize) -> Self {
        assert!(copies >= 1 && cdim >= 1, "VarSpace needs l ≥ 1 and m ≥ 1");
        VarSpace { copies, cdim }
    }

    pub fn single(cdim: usize) -> Self {
        Self::new(1, cdim)
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn cdim(&self) -> usize {
        self.cdim
    }

    pub fn nvars(&self) -> usize {
        2 * self.copies * self.cdim
    }

    pub fn index(&self, v: Var) -> Option<usize> {
        if v.copy >= self.copies || v.axis >= self.cdim {
            return None;
        }
        let k = match v.kind {
            Kind::Holo => 0,
            Kind::Anti => 1,
        };
        Some(v.copy * 2 * self.cdim + k * self.cdim + v.axis)
    }

    pub fn idx(&self, v: Var) -> usize {
        self.index(v).expect("variable outside space")
    }

    pub fn var(&self, idx: usize) -> Var {
        assert!(idx < self.nvars());
        let copy = idx / (2 * self.cdim);
        let rem = idx % (2 * self.cdim);
        let kind = if rem < self.cdim { Kind::Holo } else { Kind::Anti };
        Var::new(copy, kind, rem % self.cdim)
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        (0..self.nvars()).map(|i| self.var(i))
    }

    /// Text name: `z<axis>` / `zb<axis>` (one-based), with `_c<copy>`
    /// (one-based) when there is more than one copy.
    pub fn name(&self, idx: usize) -> String {
        let v = self.var(idx);
        let base = match v.kind {
            Kind::Holo => format!("z{}", v.axis + 1),
            Kind::Anti => format!("zb{}", v.axis + 1),
        };
        if self.copies > 1 {
            format!("{base}_c{}", v.copy + 1)
        } else {
            base
        }
    }

    pub fn parse_name(&self, name: &str) -> Option<usize> {
        let (base, copy) = match name.split_once("_c") {
            Some((b, c)) => (b, c.parse::<usize>().ok()?.checked_sub(1)?),
            None if self.copies == 1 => (name, 0),
            None => return None,
        };
        let (kind, digits) = if let Some(d) = base.strip_prefix("zb") {
            (Kind::Anti, d)
        } else {
            let d = base.strip_prefix('z')?;
            (Kind::Holo, d)
        };
        let axis = digits.parse::<usize>().ok()?.checked_sub(1)?;
        self.index(Var::new(copy, kind, axis))
    }

    pub fn zero_mono(&self) -> Mono {
        Mono::zero(self.nvars())
    }
}

/// Exponent vector over the variables of a [`VarSpace`].
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Mono(pub SmallVec<[u8; 16]>);

impl Mono {
    pub fn zero(n: usize) -> Self {
        Mono(SmallVec::from_elem(0, n))
    }

    pub fn from_slice(e: &[u8]) -> Self {
        Mono(SmallVec::from_slice(e))
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut m = Self::zero(n);
        m.0[i] = 1;
        m
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn add(&self, o: &Mono) -> Mono {
        Mono(self.0.iter().zip(o.0.iter()).map(|(a, b)| a + b).collect())
    }

    /// `self - o` when `o ≤ self` componentwise.
    pub fn checked_sub(&self, o: &Mono) -> Option<Mono> {
        let mut out = SmallVec::with_capacity(self.len());
        for (a, b) in self.0.iter().zip(o.0.iter()) {
            out.push(a.checked_sub(*b)?);
        }
        Some(Mono(out))
    }

    pub fn divides(&self, o: &Mono) -> bool {
        self.0.iter().zip(o.0.iter()).all(|(a, b)| a <= b)
    }

    /// All `ε ≤ self` componentwise.
    pub fn submonos(&self) -> Vec<Mono> {
        let mut out = vec![Mono(SmallVec::new())];
        for &e in self.0.iter() {
            let mut next = Vec::with_capacity(out.len() * (e as usize + 1));
            for m in &out {
                for k in 0..=e {
                    let mut m2 = m.clone();
                    m2.0.push(k);
                    next.push(m2);
                }
            }
            out = next;
        }
        out
    }

    /// `Π α_i!` as an integer.
    pub fn factorial(&self) -> num_bigint::BigInt {
        self.0
            .iter()
            .map(|&e| super::crat::factorial(e as u32))
            .product()
    }

    /// `Π binom(α_i, ε_i)`.
    pub fn binomial(&self, eps: &Mono) -> num_bigint::BigInt {
        self.0
            .iter()
            .zip(eps.0.iter())
            .map(|(&a, &e)| super::crat::binomial(a as u32, e as u32))
            .product()
    }

    /// Every exponent vector of length `n` with total degree ≤ `d`.
    pub fn all_up_to(n: usize, d: u32) -> Vec<Mono> {
        let mut out = Vec::new();
        let mut cur = vec![0u8; n];
        fn rec(i: usize, left: u32, cur: &mut Vec<u8>, out: &mut Vec<Mono>) {
            if i == cur.len() {
                out.push(Mono::from_slice(cur));
                return;
            }
            for k in 0..=left {
                cur[i] = k as u8;
                rec(i + 1, left - k, cur, out);
            }
            cur[i] = 0;
        }
        rec(0, d, &mut cur, &mut out);
        out.sort_by_key(|m| (m.degree(), std::cmp::Reverse(m.clone())));
        out
    }
}

impl fmt::Debug for Mono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0.as_slice())
    }
}

/// ν-window and coordinate-degree cap shared by a family of jets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct TruncationSpec {
    pub nu_min: i32,
    pub nu_max: i32,
    pub deg_max: u32,
}

impl TruncationSpec {
    pub fn new(nu_min: i32, nu_max: i32, deg_max: u32) -> Self {
        assert!(nu_min <= nu_max, "nu_min must not exceed nu_max");
        TruncationSpec {
            nu_min,
            nu_max,
            deg_max,
        }
    }

    /// Coarsest window contained in both (for binary operations).
    pub fn meet(&self, o: &TruncationSpec) -> TruncationSpec {
        TruncationSpec {
            nu_min: self.nu_min.min(o.nu_min),
            nu_max: self.nu_max.min(o.nu_max),
            deg_max: self.deg_max.min(o.deg_max),
        }
    }

    pub fn with_nu_max(&self, nu_max: i32) -> TruncationSpec {
        TruncationSpec {
            nu_max,
            nu_min: self.nu_min.min(nu_max),
            ..*self
        }
    }

    pub fn with_deg_max(&self, deg_max: u32) -> TruncationSpec {
        TruncationSpec { deg_max, ..*self }
    }

    /// The window after multiplication by `ν^s`.
    pub fn shifted(&self, s: i32) -> TruncationSpec {
        TruncationSpec {
            nu_min: self.nu_min + s,
            nu_max: self.nu_max + s,
            ..*self
        }
    }

    pub fn admits(&self, nu: i32, deg: u32) -> bool {
        nu <= self.nu_max && deg <= self.deg_max
    }
}
