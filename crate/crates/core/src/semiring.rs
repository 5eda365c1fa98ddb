//! Coefficient domains. Circuits and matrices carry a `Semiring` tag and
//! store `Scalar` values; arithmetic is dispatched through the tag so that
//! mixing domains is caught at the boundary rather than silently coerced.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Semiring {
    Rational,
    ModP(u64),
    Cyclotomic(u32),
    Or,
    Par,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rat(BigRational),
    Mod(u64),
    Cyc(Cyclo),
    Bool(bool),
    Count(u64),
}

impl Semiring {
    pub fn is_field(self) -> bool {
        matches!(self, Semiring::Rational | Semiring::ModP(_) | Semiring::Cyclotomic(_))
    }

    pub fn zero(self) -> Scalar {
        match self {
            Semiring::Rational => Scalar::Rat(BigRational::zero()),
            Semiring::ModP(_) => Scalar::Mod(0),
            Semiring::Cyclotomic(m) => Scalar::Cyc(Cyclo::zero(m)),
            Semiring::Or => Scalar::Bool(false),
            Semiring::Par => Scalar::Count(0),
        }
    }

    pub fn one(self) -> Scalar {
        self.from_i64(1)
    }

    /// Embeds an integer. Negative values are rejected by OR/PAR at the
    /// parse layer; here they saturate to their support.
    pub fn from_i64(self, v: i64) -> Scalar {
        match self {
            Semiring::Rational => Scalar::Rat(BigRational::from_integer(v.into())),
            Semiring::ModP(p) => Scalar::Mod(v.rem_euclid(p as i64) as u64),
            Semiring::Cyclotomic(m) => Scalar::Cyc(Cyclo::from_int(m, v.into())),
            Semiring::Or => Scalar::Bool(v != 0),
            Semiring::Par => Scalar::Count(v.unsigned_abs()),
        }
    }

    pub fn is_zero(self, x: &Scalar) -> bool {
        match x {
            Scalar::Rat(r) => r.is_zero(),
            Scalar::Mod(v) => *v == 0,
            Scalar::Cyc(c) => c.is_zero(),
            Scalar::Bool(b) => !b,
            Scalar::Count(c) => *c == 0,
        }
    }

    pub fn add(self, a: &Scalar, b: &Scalar) -> Scalar {
        match (self, a, b) {
            (Semiring::Rational, Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(x + y),
            (Semiring::ModP(p), Scalar::Mod(x), Scalar::Mod(y)) => {
                Scalar::Mod(((*x as u128 + *y as u128) % p as u128) as u64)
            }
            (Semiring::Cyclotomic(_), Scalar::Cyc(x), Scalar::Cyc(y)) => Scalar::Cyc(x.add(y)),
            (Semiring::Or, Scalar::Bool(x), Scalar::Bool(y)) => Scalar::Bool(*x || *y),
            (Semiring::Par, Scalar::Count(x), Scalar::Count(y)) => Scalar::Count(x + y),
            _ => panic!("scalar {a:?} or {b:?} does not belong to {self:?}"),
        }
    }

    pub fn mul(self, a: &Scalar, b: &Scalar) -> Scalar {
        match (self, a, b) {
            (Semiring::Rational, Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(x * y),
            (Semiring::ModP(p), Scalar::Mod(x), Scalar::Mod(y)) => {
                Scalar::Mod(((*x as u128 * *y as u128) % p as u128) as u64)
            }
            (Semiring::Cyclotomic(_), Scalar::Cyc(x), Scalar::Cyc(y)) => Scalar::Cyc(x.mul(y)),
            (Semiring::Or, Scalar::Bool(x), Scalar::Bool(y)) => Scalar::Bool(*x && *y),
            (Semiring::Par, Scalar::Count(x), Scalar::Count(y)) => Scalar::Count(x * y),
            _ => panic!("scalar {a:?} or {b:?} does not belong to {self:?}"),
        }
    }

    /// Additive inverse, where one exists.
    pub fn neg(self, a: &Scalar) -> Option<Scalar> {
        match (self, a) {
            (Semiring::Rational, Scalar::Rat(x)) => Some(Scalar::Rat(-x)),
            (Semiring::ModP(p), Scalar::Mod(x)) => Some(Scalar::Mod((p - x) % p)),
            (Semiring::Cyclotomic(_), Scalar::Cyc(x)) => Some(Scalar::Cyc(x.neg())),
            _ => None,
        }
    }

    pub fn belongs(self, a: &Scalar) -> bool {
        match (self, a) {
            (Semiring::Rational, Scalar::Rat(_)) | (Semiring::Or, Scalar::Bool(_)) | (Semiring::Par, Scalar::Count(_)) => true,
            (Semiring::ModP(p), Scalar::Mod(v)) => v < &p,
            (Semiring::Cyclotomic(m), Scalar::Cyc(c)) => c.m == m,
            _ => false,
        }
    }

    /// Maps a value from another domain. Only the 0/1/integer embeddings
    /// that are unambiguous are supported.
    pub fn convert(self, from: Semiring, a: &Scalar) -> Result<Scalar> {
        if from == self {
            return Ok(a.clone());
        }
        let int = match a {
            Scalar::Rat(r) if r.is_integer() => r.to_integer(),
            Scalar::Count(c) => BigInt::from(*c),
            Scalar::Bool(b) => BigInt::from(*b as u8),
            Scalar::Mod(v) if matches!(self, Semiring::Or) => BigInt::from(*v),
            Scalar::Cyc(c) if c.is_integer() => c.coeffs[0].clone(),
            _ => return Err(Error::Semiring(format!("cannot map {a:?} from {from:?} to {self:?}"))),
        };
        Ok(match self {
            Semiring::Rational => Scalar::Rat(BigRational::from_integer(int)),
            Semiring::ModP(p) => {
                let r = int.mod_floor(&BigInt::from(p));
                Scalar::Mod(r.try_into().expect("reduced below p"))
            }
            Semiring::Cyclotomic(m) => Scalar::Cyc(Cyclo::from_int(m, int)),
            Semiring::Or => Scalar::Bool(!int.is_zero()),
            Semiring::Par => {
                if int.is_negative() {
                    return Err(Error::Semiring(format!("negative value {int} has no PAR image")));
                }
                Scalar::Count(int.try_into().map_err(|_| Error::Semiring("count overflow".into()))?)
            }
        })
    }

    pub fn parse_value(self, s: &str) -> Result<Scalar> {
        let bad = |m: &str| Error::Invalid(format!("bad {self} value '{s}': {m}"));
        match self {
            Semiring::Rational => parse_rational(s).map(Scalar::Rat).ok_or_else(|| bad("expected p or p/q")),
            Semiring::ModP(p) => {
                let v: u64 = s.parse().map_err(|_| bad("expected integer"))?;
                if v >= p {
                    return Err(bad("not reduced"));
                }
                Ok(Scalar::Mod(v))
            }
            Semiring::Cyclotomic(m) => Cyclo::parse(m, s).map(Scalar::Cyc).ok_or_else(|| bad("expected c0,c1,...[/q]")),
            Semiring::Or => match s {
                "1" => Ok(Scalar::Bool(true)),
                _ => Err(bad("OR values are 1")),
            },
            Semiring::Par => s.parse().map(Scalar::Count).map_err(|_| bad("expected count")),
        }
    }

    pub fn format_value(self, a: &Scalar) -> String {
        match a {
            Scalar::Rat(r) => format_rational(r),
            Scalar::Mod(v) => v.to_string(),
            Scalar::Cyc(c) => c.to_string(),
            Scalar::Bool(b) => (*b as u8).to_string(),
            Scalar::Count(c) => c.to_string(),
        }
    }

    /// Parses the semiring token of a `.krc` header.
    pub fn parse_token(s: &str) -> Result<Self> {
        let bad = || Error::Invalid(format!("unknown semiring '{s}'"));
        Ok(match s {
            "rational" => Semiring::Rational,
            "or" => Semiring::Or,
            "par" => Semiring::Par,
            _ => {
                let (k, v) = s.split_once(':').ok_or_else(bad)?;
                let v: u64 = v.parse().map_err(|_| bad())?;
                match k {
                    "modp" if v >= 2 => Semiring::ModP(v),
                    "cyclotomic" if v >= 1 => Semiring::Cyclotomic(v as u32),
                    _ => return Err(bad()),
                }
            }
        })
    }
}

impl fmt::Display for Semiring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Semiring::Rational => write!(f, "rational"),
            Semiring::ModP(p) => write!(f, "modp:{p}"),
            Semiring::Cyclotomic(m) => write!(f, "cyclotomic:{m}"),
            Semiring::Or => write!(f, "or"),
            Semiring::Par => write!(f, "par"),
        }
    }
}

pub fn parse_rational(s: &str) -> Option<BigRational> {
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.parse::<BigInt>().ok()?, q.parse::<BigInt>().ok()?),
        None => (s.parse::<BigInt>().ok()?, BigInt::one()),
    };
    if q.is_zero() {
        return None;
    }
    Some(BigRational::new(p, q))
}

pub fn format_rational(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Coefficients of the m-th cyclotomic polynomial, lowest degree first.
pub fn cyclotomic_poly(m: u32) -> Vec<i64> {
    // X^m - 1 divided by every Phi_d with d | m, d < m.
    let mut p = vec![0i64; m as usize + 1];
    p[0] = -1;
    p[m as usize] = 1;
    for d in 1..m {
        if m.is_multiple_of(d) {
            p = poly_div_exact(&p, &cyclotomic_poly(d));
        }
    }
    p
}

fn poly_div_exact(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let mut q = vec![0i64; num.len() - dd];
    for i in (0..q.len()).rev() {
        let c = rem[i + dd];
        q[i] = c;
        for (j, &dj) in den.iter().enumerate() {
            rem[i + j] -= c * dj;
        }
    }
    debug_assert!(rem.iter().all(|&c| c == 0));
    q
}

/// An element of Q(ζ_m) stored as an integer polynomial of degree < φ(m)
/// over a positive common denominator, in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cyclo {
    pub m: u32,
    pub coeffs: Vec<BigInt>,
    pub den: BigInt,
}

impl Cyclo {
    pub fn zero(m: u32) -> Self {
        let phi = cyclotomic_poly(m).len() - 1;
        Cyclo { m, coeffs: vec![BigInt::zero(); phi], den: BigInt::one() }
    }

    pub fn from_int(m: u32, v: BigInt) -> Self {
        let mut c = Self::zero(m);
        if c.coeffs.is_empty() {
            return c;
        }
        c.coeffs[0] = v;
        c
    }

    /// ζ_m^k.
    pub fn root_power(m: u32, k: u64) -> Self {
        let mut poly = vec![BigInt::zero(); m as usize];
        poly[(k % m as u64) as usize] = BigInt::one();
        Self::from_poly(m, poly, BigInt::one())
    }

    pub fn from_poly(m: u32, mut poly: Vec<BigInt>, den: BigInt) -> Self {
        let phi = cyclotomic_poly(m);
        let deg = phi.len() - 1;
        for i in (deg..poly.len()).rev() {
            let c = std::mem::take(&mut poly[i]);
            if c.is_zero() {
                continue;
            }
            for (j, &pj) in phi.iter().enumerate().take(deg) {
                poly[i - deg + j] -= &c * pj;
            }
        }
        poly.resize(deg, BigInt::zero());
        let mut out = Cyclo { m, coeffs: poly, den };
        out.normalize();
        out
    }

    fn normalize(&mut self) {
        if self.den.is_negative() {
            self.den = -std::mem::take(&mut self.den);
            for c in &mut self.coeffs {
                *c = -std::mem::take(c);
            }
        }
        let mut g = self.den.clone();
        for c in &self.coeffs {
            g = g.gcd(c);
        }
        if self.coeffs.iter().all(|c| c.is_zero()) {
            self.den = BigInt::one();
            return;
        }
        if !g.is_one() {
            self.den /= &g;
            for c in &mut self.coeffs {
                *c /= &g;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    pub fn is_integer(&self) -> bool {
        self.den.is_one() && self.coeffs.iter().skip(1).all(|c| c.is_zero())
    }

    pub fn add(&self, o: &Cyclo) -> Cyclo {
        assert_eq!(self.m, o.m);
        let coeffs = self.coeffs.iter().zip(&o.coeffs).map(|(a, b)| a * &o.den + b * &self.den).collect();
        let mut out = Cyclo { m: self.m, coeffs, den: &self.den * &o.den };
        out.normalize();
        out
    }

    pub fn neg(&self) -> Cyclo {
        Cyclo { m: self.m, coeffs: self.coeffs.iter().map(|c| -c).collect(), den: self.den.clone() }
    }

    pub fn mul(&self, o: &Cyclo) -> Cyclo {
        assert_eq!(self.m, o.m);
        let n = self.coeffs.len();
        let mut poly = vec![BigInt::zero(); (2 * n).saturating_sub(1).max(1)];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                poly[i + j] += a * b;
            }
        }
        Self::from_poly(self.m, poly, &self.den * &o.den)
    }

    fn parse(m: u32, s: &str) -> Option<Cyclo> {
        let (body, den) = match s.split_once('/') {
            Some((b, d)) => (b, d.parse::<BigInt>().ok()?),
            None => (s, BigInt::one()),
        };
        if den.is_zero() {
            return None;
        }
        let poly = body.split(',').map(|t| t.parse::<BigInt>().ok()).collect::<Option<Vec<_>>>()?;
        Some(Self::from_poly(m, poly, den))
    }
}

impl fmt::Display for Cyclo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body: Vec<String> = self.coeffs.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", body.join(","))?;
        if !self.den.is_one() {
            write!(f, "/{}", self.den)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(cyclotomic_poly(1), vec![-1, 1]);
        assert_eq!(cyclotomic_poly(2), vec![1, 1]);
        assert_eq!(cyclotomic_poly(3), vec![1, 1, 1]);
        assert_eq!(cyclotomic_poly(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_poly(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_poly(12), vec![1, 0, -1, 0, 1]);
    }

    #[test]
    fn roots_of_unity_sum_to_zero() {
        for m in [2u32, 3, 5, 6, 7] {
            let mut s = Cyclo::zero(m);
            for k in 0..m as u64 {
                s = s.add(&Cyclo::root_power(m, k));
            }
            assert!(s.is_zero(), "m={m}");
            let z = Cyclo::root_power(m, 1);
            let mut p = Cyclo::from_int(m, 1.into());
            for _ in 0..m {
                p = p.mul(&z);
            }
            assert_eq!(p, Cyclo::from_int(m, 1.into()));
        }
    }

    #[test]
    fn value_round_trip() {
        let sr = Semiring::Cyclotomic(5);
        let v = sr.parse_value("3,-1,0,2/6").unwrap();
        let s = sr.format_value(&v);
        assert_eq!(s, "3,-1,0,2/6");
        assert_eq!(sr.parse_value(&s).unwrap(), v);
        let v = sr.parse_value("2,4,0,6/4").unwrap();
        assert_eq!(sr.format_value(&v), "1,2,0,3/2");
        let q = Semiring::Rational.parse_value("6/4").unwrap();
        assert_eq!(Semiring::Rational.format_value(&q), "3/2");
    }

    #[test]
    fn tokens() {
        for s in [Semiring::Rational, Semiring::ModP(7), Semiring::Cyclotomic(3), Semiring::Or, Semiring::Par] {
            assert_eq!(Semiring::parse_token(&s.to_string()).unwrap(), s);
        }
    }
}
