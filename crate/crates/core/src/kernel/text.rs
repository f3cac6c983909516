//! Text form of jets: rendering and a small expression parser.
//!
//! Terms look like `c*nu^k*z1^a*zb1^b`; complex coefficients are printed
//! as `(p/q+r/si)`. The parser accepts the same syntax plus parentheses,
//! products, integer powers, division by constants and named function calls.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::crat::CRat;
use super::jet::Jet;
use super::space::{Mono, TruncationSpec, VarSpace};
use super::KernelError;

/// Canonical rendering: ν ascending, then degree descending, then
/// exponent vector descending.
pub fn render_jet(j: &Jet) -> String {
    let space = j.space();
    let mut terms: Vec<(i32, &Mono, &CRat)> = j.terms().collect();
    if terms.is_empty() {
        return "0".into();
    }
    terms.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(b.1.degree().cmp(&a.1.degree()))
            .then(b.1.cmp(a.1))
    });
    let mut out = String::new();
    for (n, (k, m, c)) in terms.into_iter().enumerate() {
        let mut factors = Vec::new();
        match k {
            0 => {}
            1 => factors.push("nu".to_string()),
            _ => factors.push(format!("nu^{k}")),
        }
        for (i, &e) in m.0.iter().enumerate() {
            match e {
                0 => {}
                1 => factors.push(space.name(i)),
                _ => factors.push(format!("{}^{e}", space.name(i))),
            }
        }
        let neg = c.is_negative_real();
        let mag = if neg { -c } else { c.clone() };
        if n == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        if factors.is_empty() {
            out.push_str(&mag.to_string());
        } else {
            if !mag.is_one() {
                out.push_str(&mag.to_string());
                out.push('*');
            }
            out.push_str(&factors.join("*"));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigRational, bool),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

fn lex(s: &str) -> Result<Vec<(usize, Tok)>, KernelError> {
    let b = s.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    let err = |pos: usize, msg: &str| KernelError::Parse {
        pos,
        msg: msg.to_string(),
    };
    while i < b.len() {
        let c = b[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            let num: BigInt = s[start..i].parse().map_err(|_| err(start, "bad integer"))?;
            let mut val = BigRational::from_integer(num);
            if i + 1 < b.len() && b[i] == b'/' && b[i + 1].is_ascii_digit() {
                let ds = i + 1;
                i += 1;
                while i < b.len() && b[i].is_ascii_digit() {
                    i += 1;
                }
                let den: BigInt = s[ds..i].parse().map_err(|_| err(ds, "bad integer"))?;
                if den.is_zero() {
                    return Err(err(ds, "zero denominator"));
                }
                val /= BigRational::from_integer(den);
            }
            let mut j = i;
            while j < b.len() && b[j] == b' ' {
                j += 1;
            }
            let imag = j < b.len()
                && b[j] == b'i'
                && !(j + 1 < b.len() && (b[j + 1].is_ascii_alphanumeric() || b[j + 1] == b'_'));
            if imag {
                i = j + 1;
            }
            out.push((start, Tok::Num(val, imag)));
            continue;
        }
        if s[i..].starts_with("inv-berezin") {
            i += "inv-berezin".len();
            out.push((start, Tok::Ident("inv-berezin".into())));
            continue;
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(s[start..i].to_string())));
            continue;
        }
        let t = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            _ => return Err(err(start, "unexpected character")),
        };
        out.push((start, t));
        i += 1;
    }
    Ok(out)
}

/// Callback resolving `name(arg, ...)` during parsing.
pub type FnResolver<'a> = dyn Fn(&str, Vec<Jet>) -> Result<Jet, String> + 'a;

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    space: VarSpace,
    trunc: TruncationSpec,
    funcs: Option<&'a FnResolver<'a>>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn err(&self, msg: &str) -> KernelError {
        KernelError::Parse {
            pos: self.here(),
            msg: msg.to_string(),
        }
    }

    fn expect(&mut self, t: Tok, msg: &str) -> Result<(), KernelError> {
        if self.peek() == Some(&t) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(msg))
        }
    }

    fn expr(&mut self) -> Result<Jet, KernelError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = &acc + &t;
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    let t = self.term()?;
                    acc = &acc - &t;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Jet, KernelError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    let t = self.unary()?;
                    acc = &acc * &t;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let at = self.here();
                    let t = self.unary()?;
                    let c = scalar_of(&t).and_then(|c| c.inv()).ok_or(KernelError::Parse {
                        pos: at,
                        msg: "division by a non-constant or zero".into(),
                    })?;
                    acc = acc.scale(&c);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Jet, KernelError> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            let u = self.unary()?;
            return Ok(-&u);
        }
        if self.peek() == Some(&Tok::Plus) {
            self.pos += 1;
            return self.unary();
        }
        self.power()
    }

    fn int_exponent(&mut self) -> Result<i64, KernelError> {
        let neg_paren = self.peek() == Some(&Tok::LParen);
        if neg_paren {
            self.pos += 1;
        }
        let neg = if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            true
        } else {
            false
        };
        let v = match self.peek() {
            Some(Tok::Num(r, false)) if r.is_integer() => {
                let v: i64 = r
                    .to_integer()
                    .try_into()
                    .map_err(|_| self.err("exponent too large"))?;
                self.pos += 1;
                v
            }
            _ => return Err(self.err("expected integer exponent")),
        };
        if neg_paren {
            self.expect(Tok::RParen, "expected ')'")?;
        }
        Ok(if neg { -v } else { v })
    }

    fn power(&mut self) -> Result<Jet, KernelError> {
        // ν^k is built directly so that it survives windows with nu_max < 1
        if self.peek() == Some(&Tok::Ident("nu".into()))
            && self.toks.get(self.pos + 1).map(|(_, t)| t) == Some(&Tok::Caret)
        {
            self.pos += 2;
            let at = self.here();
            let e = self.int_exponent()?;
            let k = i32::try_from(e).map_err(|_| KernelError::Parse {
                pos: at,
                msg: "exponent too large".into(),
            })?;
            return Ok(Jet::nu_power(self.space, self.trunc, k));
        }
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        self.pos += 1;
        let at = self.here();
        let e = self.int_exponent()?;
        if e >= 0 {
            return Ok(base.pow(e as u32));
        }
        // negative powers only for single-term ν-monomials c·ν^k
        let mut it = base.terms();
        match (it.next(), it.next()) {
            (Some((k, m, c)), None) if m.is_zero() => {
                let inv = c.inv().expect("stored coefficients are nonzero");
                let e = -e;
                let kk = -(k as i64) * e;
                let kk = i32::try_from(kk).map_err(|_| KernelError::Parse {
                    pos: at,
                    msg: "exponent too large".into(),
                })?;
                Ok(Jet::monomial(
                    self.space,
                    self.trunc,
                    kk,
                    self.space.zero_mono(),
                    inv.pow(e as u32),
                ))
            }
            _ => Err(KernelError::Parse {
                pos: at,
                msg: "negative power of a non-monomial".into(),
            }),
        }
    }

    fn atom(&mut self) -> Result<Jet, KernelError> {
        let (s, t) = (self.space, self.trunc);
        match self.peek().cloned() {
            Some(Tok::Num(r, imag)) => {
                self.pos += 1;
                let c = if imag {
                    CRat::new(BigRational::zero(), r)
                } else {
                    CRat::real(r)
                };
                Ok(Jet::constant(s, t, c))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(Tok::RParen, "expected ')'")?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                let at = self.here();
                self.pos += 1;
                if self.peek() == Some(&Tok::LParen) {
                    self.pos += 1;
                    let mut args = Vec::new();
                    if self.peek() != Some(&Tok::RParen) {
                        loop {
                            args.push(self.expr()?);
                            if self.peek() == Some(&Tok::Comma) {
                                self.pos += 1;
                            } else {
                                break;
                            }
                        }
                    }
                    self.expect(Tok::RParen, "expected ')'")?;
                    let f = self.funcs.ok_or(KernelError::Parse {
                        pos: at,
                        msg: format!("unknown function {name}"),
                    })?;
                    return f(&name, args).map_err(|msg| KernelError::Parse { pos: at, msg });
                }
                match name.as_str() {
                    "nu" => Ok(Jet::nu_power(s, t, 1)),
                    "i" => Ok(Jet::constant(s, t, CRat::i())),
                    _ => {
                        let idx = s.parse_name(&name).ok_or(KernelError::Parse {
                            pos: at,
                            msg: format!("unknown variable {name}"),
                        })?;
                        let mut j = Jet::zero(s, t);
                        j.add_term(0, Mono::unit(s.nvars(), idx), CRat::one());
                        Ok(j)
                    }
                }
            }
            _ => Err(self.err("expected a term")),
        }
    }
}

fn scalar_of(j: &Jet) -> Option<CRat> {
    let mut it = j.terms();
    match (it.next(), it.next()) {
        (None, _) => Some(CRat::zero()),
        (Some((0, m, c)), None) if m.is_zero() => Some(c.clone()),
        _ => None,
    }
}

/// Parses a jet literal (no function calls).
pub fn parse_jet(s: &str, space: VarSpace, trunc: TruncationSpec) -> Result<Jet, KernelError> {
    parse_expr(s, space, trunc, None)
}

/// Parses an expression, resolving function calls through `funcs`.
pub fn parse_expr(
    s: &str,
    space: VarSpace,
    trunc: TruncationSpec,
    funcs: Option<&FnResolver<'_>>,
) -> Result<Jet, KernelError> {
    let toks = lex(s)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: s.len(),
        space,
        trunc,
        funcs,
    };
    let j = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(j)
}

/// Convenience for `BigRational` literals in tests and builtins.
pub fn rat(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::space::Var;

    fn sp() -> (VarSpace, TruncationSpec) {
        (VarSpace::single(1), TruncationSpec::new(-2, 4, 6))
    }

    #[test]
    fn render_canonical_order() {
        let (s, t) = sp();
        let j = parse_jet("nu + z1*zb1", s, t).unwrap();
        assert_eq!(render_jet(&j), "z1*zb1 + nu");
    }

    #[test]
    fn complex_coefficients_roundtrip() {
        let (s, t) = sp();
        let j = parse_jet("(1/2-3/4i)*z1^2 - 5/3*nu^-1*zb1 + 2 i", s, t).unwrap();
        let text = render_jet(&j);
        assert_eq!(parse_jet(&text, s, t).unwrap(), j);
        assert_eq!(j.coeff(-1, &Mono::from_slice(&[0, 1])), CRat::from_ratio(-5, 3));
        assert_eq!(j.coeff(0, &Mono::zero(2)), CRat::new(rat(0, 1), rat(2, 1)));
    }

    #[test]
    fn spaced_imaginary_literal() {
        let (s, t) = sp();
        let a = parse_jet("1/2+3/4 i", s, t).unwrap();
        let b = parse_jet("1/2+3/4*i", s, t).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn multi_copy_names() {
        let s = VarSpace::new(2, 1);
        let t = TruncationSpec::new(0, 2, 4);
        let j = parse_jet("z1_c1*zb1_c2", s, t).unwrap();
        let expected = &Jet::var(s, t, Var::z(0)) * &Jet::var(s, t, Var::new(1, super::super::space::Kind::Anti, 0));
        assert_eq!(j, expected);
        assert_eq!(render_jet(&j), "z1_c1*zb1_c2");
    }

    #[test]
    fn parse_errors_report_position() {
        let (s, t) = sp();
        match parse_jet("z1 + w3", s, t) {
            Err(KernelError::Parse { pos, .. }) => assert_eq!(pos, 5),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_jet("z1 +", s, t).is_err());
        assert!(parse_jet("z1/zb1", s, t).is_err());
    }

    #[test]
    fn function_calls_resolve() {
        let (s, t) = sp();
        let f = |name: &str, args: Vec<Jet>| -> Result<Jet, String> {
            match name {
                "twice" => Ok(args[0].scale(&CRat::from_int(2))),
                _ => Err(format!("unknown function {name}")),
            }
        };
        let j = parse_expr("twice(z1) + 1", s, t, Some(&f)).unwrap();
        assert_eq!(render_jet(&j), "2*z1 + 1");
        assert!(parse_expr("nope(z1)", s, t, Some(&f)).is_err());
    }
}
