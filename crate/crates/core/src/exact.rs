//! Exact Gaussian-rational scalars and univariate polynomials over them.
//!
//! Everything on the algebraic side (Hecke towers, determinants, normal
//! forms) runs on these types so that root multiplicities are never
//! perturbed by rounding.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot parse `{input}` as a Gaussian rational: {reason}")]
pub struct ParseScalarError {
    pub input: String,
    pub reason: &'static str,
}

/// A number `a + b i` with `a, b` rational.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct ExactScalar(Complex<BigRational>);

impl ExactScalar {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self(Complex::new(re, im))
    }

    pub fn zero() -> Self {
        Self(Complex::new(BigRational::zero(), BigRational::zero()))
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Self::new(BigRational::from_integer(n.into()), BigRational::zero())
    }

    pub fn gaussian(re: i64, im: i64) -> Self {
        Self::new(
            BigRational::from_integer(re.into()),
            BigRational::from_integer(im.into()),
        )
    }

    /// `(re_num/re_den) + (im_num/im_den) i`.
    pub fn from_fractions(re: (i64, i64), im: (i64, i64)) -> Self {
        Self::new(
            BigRational::new(re.0.into(), re.1.into()),
            BigRational::new(im.0.into(), im.1.into()),
        )
    }

    pub fn re(&self) -> &BigRational {
        &self.0.re
    }

    pub fn im(&self) -> &BigRational {
        &self.0.im
    }

    pub fn is_zero(&self) -> bool {
        self.0.re.is_zero() && self.0.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.re.is_one() && self.0.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self(self.0.conj())
    }

    /// Multiplicative inverse; panics on zero like integer division does.
    pub fn inv(&self) -> Self {
        assert!(!self.is_zero(), "inverse of zero Gaussian rational");
        let norm = &self.0.re * &self.0.re + &self.0.im * &self.0.im;
        Self::new(&self.0.re / &norm, -(&self.0.im / &norm))
    }

    pub fn to_complex64(&self) -> Complex64 {
        Complex64::new(
            self.0.re.to_f64().unwrap_or(f64::NAN),
            self.0.im.to_f64().unwrap_or(f64::NAN),
        )
    }
}

impl Default for ExactScalar {
    fn default() -> Self {
        Self::zero()
    }
}

fn fmt_rational(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (re, im) = (&self.0.re, &self.0.im);
        if im.is_zero() {
            return f.write_str(&fmt_rational(re));
        }
        let im_abs = if im.abs().is_one() {
            String::new()
        } else {
            fmt_rational(&im.abs())
        };
        if re.is_zero() {
            let sign = if im.is_negative() { "-" } else { "" };
            write!(f, "{sign}{im_abs}i")
        } else {
            let sign = if im.is_negative() { '-' } else { '+' };
            write!(f, "{}{sign}{im_abs}i", fmt_rational(re))
        }
    }
}

/// Parses `"3"`, `"-1/2"`, `"0.25"`, `"1e-3"` into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (negative, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}0").parse().ok()?;
    let digits = digits / BigInt::from(10);
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut q = if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    if negative {
        q = -q;
    }
    Some(q)
}

impl FromStr for ExactScalar {
    type Err = ParseScalarError;

    /// Accepts `a`, `bi`, `ib`, `a+bi`, `a-ib`, with rational or decimal parts.
    fn from_str(input: &str) -> Result<Self, Self::Err> {
        let err = |reason| ParseScalarError { input: input.to_string(), reason };
        let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(err("empty"));
        }
        let bytes = s.as_bytes();
        let mut terms = Vec::new();
        let mut start = 0;
        for i in 1..bytes.len() {
            let c = bytes[i];
            if (c == b'+' || c == b'-') && !matches!(bytes[i - 1], b'e' | b'E' | b'/') {
                terms.push(&s[start..i]);
                start = i;
            }
        }
        terms.push(&s[start..]);
        let mut re = BigRational::zero();
        let mut im = BigRational::zero();
        for term in terms {
            let (negative, body) = match term.strip_prefix('-') {
                Some(rest) => (true, rest),
                None => (false, term.strip_prefix('+').unwrap_or(term)),
            };
            let mut value = if body.contains('i') {
                let stripped = body.replacen('i', "", 1).replace('*', "");
                let q = if stripped.is_empty() {
                    BigRational::one()
                } else {
                    parse_rational(&stripped).ok_or_else(|| err("bad imaginary part"))?
                };
                (BigRational::zero(), q)
            } else {
                (BigRational::zero(), BigRational::zero())
            };
            if !body.contains('i') {
                value.0 = parse_rational(body).ok_or_else(|| err("bad real part"))?;
            }
            if negative {
                re -= value.0;
                im -= value.1;
            } else {
                re += value.0;
                im += value.1;
            }
        }
        Ok(Self::new(re, im))
    }
}

impl Serialize for ExactScalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExactScalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        // Accept both `"1/2+i"` strings and bare JSON numbers.
        let value = serde_json::Value::deserialize(deserializer)?;
        let text = match &value {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Number(n) => n.to_string(),
            other => {
                return Err(serde::de::Error::custom(format!(
                    "expected a Gaussian rational, found {other}"
                )))
            }
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl<'a> $trait<&'a ExactScalar> for &'a ExactScalar {
            type Output = ExactScalar;
            fn $method(self, rhs: &'a ExactScalar) -> ExactScalar {
                ExactScalar(&self.0 $op &rhs.0)
            }
        }
        impl $trait for ExactScalar {
            type Output = ExactScalar;
            fn $method(self, rhs: ExactScalar) -> ExactScalar {
                ExactScalar(self.0 $op rhs.0)
            }
        }
    };
}

forward_binop!(Add, add, +);
forward_binop!(Sub, sub, -);
forward_binop!(Mul, mul, *);

impl<'a> Div<&'a ExactScalar> for &'a ExactScalar {
    type Output = ExactScalar;
    fn div(self, rhs: &'a ExactScalar) -> ExactScalar {
        ExactScalar(&self.0 / &rhs.0)
    }
}

impl Div for ExactScalar {
    type Output = ExactScalar;
    fn div(self, rhs: ExactScalar) -> ExactScalar {
        &self / &rhs
    }
}

impl Neg for ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar(-self.0)
    }
}

impl Neg for &ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar(-self.0.clone())
    }
}

/// Univariate polynomial in `z`, coefficients stored lowest degree first.
/// Trailing zeros are never stored, so the zero polynomial is empty.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Poly {
    coeffs: Vec<ExactScalar>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<ExactScalar>) -> Self {
        while coeffs.last().is_some_and(ExactScalar::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(ExactScalar::one())
    }

    pub fn constant(c: ExactScalar) -> Self {
        Self::new(vec![c])
    }

    /// `z - root`.
    pub fn linear(root: &ExactScalar) -> Self {
        Self::new(vec![-root, ExactScalar::one()])
    }

    pub fn coeffs(&self) -> &[ExactScalar] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&ExactScalar> {
        self.coeffs.last()
    }

    pub fn eval(&self, x: &ExactScalar) -> ExactScalar {
        self.coeffs
            .iter()
            .rev()
            .fold(ExactScalar::zero(), |acc, c| &(&acc * x) + c)
    }

    pub fn scale(&self, c: &ExactScalar) -> Self {
        Self::new(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Rescales to a monic polynomial; the zero polynomial stays zero.
    pub fn monic(&self) -> Self {
        match self.leading() {
            Some(lead) if !lead.is_one() => self.scale(&lead.inv()),
            _ => self.clone(),
        }
    }

    pub fn pow(&self, k: usize) -> Self {
        (0..k).fold(Self::one(), |acc, _| &acc * self)
    }

    /// Euclidean division: `self = q * divisor + r` with `deg r < deg divisor`.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        let dd = divisor.degree().expect("polynomial division by zero");
        let lead_inv = divisor.coeffs[dd].inv();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![ExactScalar::zero(); rem.len().saturating_sub(dd)];
        while rem.len() > dd {
            let top = rem.len() - 1;
            let c = &rem[top] * &lead_inv;
            let shift = top - dd;
            for (j, dc) in divisor.coeffs.iter().enumerate() {
                rem[shift + j] = &rem[shift + j] - &(&c * dc);
            }
            quot[shift] = c;
            rem.pop();
            while rem.last().is_some_and(ExactScalar::is_zero) {
                rem.pop();
            }
        }
        (Poly::new(quot), Poly::new(rem))
    }

    /// Monic greatest common divisor; `gcd(0, 0) = 0`.
    pub fn gcd(a: &Poly, b: &Poly) -> Poly {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    /// Strips every factor `(z - root)`, returning the multiplicity and the cofactor.
    pub fn divide_out_root(&self, root: &ExactScalar) -> (usize, Poly) {
        assert!(!self.is_zero(), "zero polynomial has every root");
        let linear = Poly::linear(root);
        let mut mult = 0;
        let mut current = self.clone();
        loop {
            let (q, r) = current.div_rem(&linear);
            if !r.is_zero() {
                return (mult, current);
            }
            mult += 1;
            current = q;
        }
    }

    /// Order of vanishing at `root`; infinite (`None`) for the zero polynomial.
    pub fn order_at(&self, root: &ExactScalar) -> Option<usize> {
        (!self.is_zero()).then(|| self.divide_out_root(root).0)
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            match k {
                0 => write!(f, "({c})")?,
                1 => write!(f, "({c})z")?,
                _ => write!(f, "({c})z^{k}")?,
            }
        }
        Ok(())
    }
}

impl Serialize for Poly {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.coeffs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        Ok(Poly::new(Vec::deserialize(deserializer)?))
    }
}

impl<'a> Add<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn add(self, rhs: &'a Poly) -> Poly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let zero = ExactScalar::zero();
        Poly::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).unwrap_or(&zero) + rhs.coeffs.get(k).unwrap_or(&zero)
                })
                .collect(),
        )
    }
}

impl<'a> Sub<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn sub(self, rhs: &'a Poly) -> Poly {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a Poly> for &'a Poly {
    type Output = Poly;
    fn mul(self, rhs: &'a Poly) -> Poly {
        if self.is_zero() || rhs.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![ExactScalar::zero(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        Poly::new(out)
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> ExactScalar {
        text.parse().unwrap()
    }

    #[test]
    fn parses_gaussian_forms() {
        assert_eq!(s("3"), ExactScalar::from_int(3));
        assert_eq!(s("2i"), ExactScalar::gaussian(0, 2));
        assert_eq!(s("i"), ExactScalar::gaussian(0, 1));
        assert_eq!(s("-i"), ExactScalar::gaussian(0, -1));
        assert_eq!(s("1-2i"), ExactScalar::gaussian(1, -2));
        assert_eq!(s("1 + i2"), ExactScalar::gaussian(1, 2));
        assert_eq!(s("1/2-3/4i"), ExactScalar::from_fractions((1, 2), (-3, 4)));
        assert_eq!(s("0.25+1.5i"), ExactScalar::from_fractions((1, 4), (3, 2)));
        assert_eq!(s("2.5e-1"), ExactScalar::from_fractions((1, 4), (0, 1)));
        assert_eq!(s("-1e2"), ExactScalar::from_int(-100));
        assert!("".parse::<ExactScalar>().is_err());
        assert!("1/0".parse::<ExactScalar>().is_err());
        assert!("abc".parse::<ExactScalar>().is_err());
    }

    #[test]
    fn display_parses_back() {
        for text in ["0", "-7/3", "i", "-i", "2-i", "1/2+5/3i", "-4i"] {
            let x = s(text);
            assert_eq!(s(&x.to_string()), x, "{text}");
        }
    }

    #[test]
    fn field_operations() {
        let a = s("1+2i");
        let b = s("3-i");
        assert_eq!(&a * &b, s("5+5i"));
        assert_eq!(&(&a / &b) * &b, a);
        assert_eq!(&a * &a.inv(), ExactScalar::one());
    }

    #[test]
    fn polynomial_division_and_roots() {
        let x = s("1/2+i");
        let p = &Poly::linear(&x).pow(3) * &Poly::linear(&s("2"));
        assert_eq!(p.degree(), Some(4));
        let (mult, rest) = p.divide_out_root(&x);
        assert_eq!(mult, 3);
        assert_eq!(rest, Poly::linear(&s("2")));
        assert_eq!(p.order_at(&s("5")), Some(0));
        let (q, r) = p.div_rem(&Poly::linear(&s("2")));
        assert!(r.is_zero());
        assert_eq!(q, Poly::linear(&x).pow(3));
        assert!(p.eval(&x).is_zero());
    }

    #[test]
    fn gcd_is_monic() {
        let common = Poly::linear(&s("i"));
        let a = (&common * &Poly::linear(&s("1"))).scale(&s("3"));
        let b = &common * &Poly::linear(&s("-1"));
        assert_eq!(Poly::gcd(&a, &b), common);
        assert_eq!(Poly::gcd(&Poly::zero(), &Poly::zero()), Poly::zero());
    }
}
