//! Truncated Laurent series in the formal parameter ν.

use std::collections::BTreeMap;
use std::fmt;

use super::crat::CRat;
use super::KernelError;

/// `Σ_k c_k ν^k` with every stored exponent inside `[nu_min, nu_max]`.
///
/// Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct NuSeries {
    terms: BTreeMap<i32, CRat>,
    nu_min: i32,
    nu_max: i32,
}

impl NuSeries {
    pub fn zero(nu_min: i32, nu_max: i32) -> Self {
        assert!(nu_min <= nu_max, "empty ν-window");
        NuSeries {
            terms: BTreeMap::new(),
            nu_min,
            nu_max,
        }
    }

    pub fn constant(c: CRat, nu_min: i32, nu_max: i32) -> Self {
        let mut s = Self::zero(nu_min, nu_max);
        s.add_term(0, c);
        s
    }

    pub fn monomial(k: i32, c: CRat, nu_min: i32, nu_max: i32) -> Self {
        let mut s = Self::zero(nu_min.min(k), nu_max);
        s.add_term(k, c);
        s
    }

    pub fn nu_min(&self) -> i32 {
        self.nu_min
    }

    pub fn nu_max(&self) -> i32 {
        self.nu_max
    }

    /// Accumulates `c ν^k`; exponents above `nu_max` are dropped, exponents
    /// below `nu_min` widen the window.
    pub fn add_term(&mut self, k: i32, c: CRat) {
        if k > self.nu_max || c.is_zero() {
            return;
        }
        if k < self.nu_min {
            self.nu_min = k;
        }
        match self.terms.entry(k) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += &c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn coeff(&self, k: i32) -> CRat {
        self.terms.get(&k).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &CRat)> {
        self.terms.iter().map(|(k, c)| (*k, c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Lowest exponent with a nonzero coefficient.
    pub fn order(&self) -> Option<i32> {
        self.terms.keys().next().copied()
    }

    pub fn truncate(&self, nu_max: i32) -> Self {
        let mut s = Self::zero(self.nu_min.min(nu_max), nu_max.min(self.nu_max));
        for (k, c) in self.terms() {
            s.add_term(k, c.clone());
        }
        s
    }

    pub fn with_window(&self, nu_min: i32, nu_max: i32) -> Self {
        let mut s = Self::zero(nu_min, nu_max);
        for (k, c) in self.terms() {
            s.add_term(k, c.clone());
        }
        s
    }

    pub fn add(&self, o: &NuSeries) -> NuSeries {
        let mut s = Self::zero(self.nu_min.min(o.nu_min), self.nu_max.min(o.nu_max));
        for (k, c) in self.terms().chain(o.terms()) {
            s.add_term(k, c.clone());
        }
        s
    }

    pub fn sub(&self, o: &NuSeries) -> NuSeries {
        self.add(&o.scale(&CRat::from_int(-1)))
    }

    pub fn scale(&self, c: &CRat) -> NuSeries {
        let mut s = Self::zero(self.nu_min, self.nu_max);
        for (k, a) in self.terms() {
            s.add_term(k, a * c);
        }
        s
    }

    pub fn shift(&self, k: i32) -> NuSeries {
        let mut s = Self::zero(self.nu_min + k, self.nu_max);
        for (e, a) in self.terms() {
            s.add_term(e + k, a.clone());
        }
        s
    }

    /// Product truncated at the smaller of the two certified upper bounds
    /// after accounting for the other factor's lowest exponent.
    pub fn mul(&self, o: &NuSeries) -> NuSeries {
        let lo_a = self.order().unwrap_or(self.nu_min);
        let lo_b = o.order().unwrap_or(o.nu_min);
        let nu_max = (self.nu_max + lo_b).min(o.nu_max + lo_a);
        let nu_min = (self.nu_min + o.nu_min).min(nu_max);
        let mut s = Self::zero(nu_min, nu_max);
        for (ka, a) in self.terms() {
            for (kb, b) in o.terms() {
                if ka + kb <= nu_max {
                    s.add_term(ka + kb, a * b);
                }
            }
        }
        s
    }

    /// Formal exponential of a series with no negative powers of ν.
    pub fn exp_nonneg(&self) -> Result<NuSeries, KernelError> {
        if let Some(k) = self.order() {
            if k < 0 {
                return Err(KernelError::NegativeNuPower(k));
            }
        }
        let nu_max = self.nu_max;
        let c0 = self.coeff(0);
        if !c0.is_zero() {
            // exp of a nonzero constant is transcendental in general
            return Err(KernelError::TranscendentalConstant);
        }
        let mut result = NuSeries::constant(CRat::one(), 0, nu_max);
        let mut power = result.clone();
        for k in 1..=nu_max.max(0) {
            power = power.mul(self).with_window(0, nu_max);
            if power.is_zero() {
                break;
            }
            result = result.add(&power.scale(&CRat::inv_factorial(k as u32)));
        }
        Ok(result)
    }

    /// Multiplicative inverse of a series with a unit leading term at ν^0.
    pub fn inv_unit(&self) -> Option<NuSeries> {
        if self.order() != Some(0) {
            return None;
        }
        let c0inv = self.coeff(0).inv()?;
        let nu_max = self.nu_max;
        // x = c0^{-1} Σ (-e)^k with e = c0^{-1} s - 1
        let e = self
            .scale(&c0inv)
            .sub(&NuSeries::constant(CRat::one(), 0, nu_max));
        let mut result = NuSeries::constant(CRat::one(), 0, nu_max);
        let mut power = result.clone();
        let neg_e = e.scale(&CRat::from_int(-1));
        for _ in 0..=nu_max {
            power = power.mul(&neg_e).with_window(0, nu_max);
            if power.is_zero() {
                break;
            }
            result = result.add(&power);
        }
        Some(result.scale(&c0inv))
    }
}

impl fmt::Display for NuSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.terms() {
            let (neg, mag) = if c.is_negative_real() {
                (true, -c)
            } else {
                (false, c.clone())
            };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            first = false;
            let nu = match k {
                0 => String::new(),
                1 => "nu".into(),
                _ => format!("nu^{k}"),
            };
            if nu.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{nu}")?;
            } else {
                write!(f, "{mag}*{nu}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for NuSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NuSeries[{}..={}]({})", self.nu_min, self.nu_max, self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_zero_is_one() {
        let s = NuSeries::zero(0, 4);
        assert_eq!(s.exp_nonneg().unwrap(), NuSeries::constant(CRat::one(), 0, 4));
    }

    #[test]
    fn exp_of_nu_is_maclaurin() {
        let s = NuSeries::monomial(1, CRat::one(), 0, 4);
        let e = s.exp_nonneg().unwrap();
        for k in 0..=4 {
            assert_eq!(e.coeff(k), CRat::inv_factorial(k as u32));
        }
        assert_eq!(e.coeff(5), CRat::zero());
    }

    #[test]
    fn exp_rejects_negative_power() {
        let s = NuSeries::monomial(-1, CRat::one(), -1, 4);
        assert!(matches!(s.exp_nonneg(), Err(KernelError::NegativeNuPower(-1))));
    }

    #[test]
    fn unit_inverse() {
        let mut s = NuSeries::constant(CRat::one(), 0, 5);
        s.add_term(1, CRat::one());
        let inv = s.inv_unit().unwrap();
        assert_eq!(s.mul(&inv).with_window(0, 5), NuSeries::constant(CRat::one(), 0, 5));
    }

    #[test]
    fn display() {
        let mut s = NuSeries::zero(0, 3);
        s.add_term(1, CRat::one());
        s.add_term(2, CRat::from_int(-2));
        assert_eq!(s.to_string(), "nu - 2*nu^2");
    }
}
