use std::fmt::Debug;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};

use crate::error::{Error, Result};
use crate::semiring::{Cyclo, Scalar, Semiring};

/// Value domain of a vector–matrix–vector evaluation. Circuit coefficients
/// are embedded once when a plan is built.
pub trait Ring: Send + Sync {
    type V: Clone + Send + Sync + Debug + PartialEq;
    fn zero(&self) -> Self::V;
    fn add_assign(&self, a: &mut Self::V, b: &Self::V);
    fn mul(&self, a: &Self::V, b: &Self::V) -> Self::V;
    fn is_zero(&self, a: &Self::V) -> bool;
    fn embed(&self, sr: Semiring, s: &Scalar) -> Result<Self::V>;
}

fn nonneg_integer(sr: Semiring, s: &Scalar) -> Result<u128> {
    let bad = || Error::Semiring(format!("{} is not a nonnegative integer", sr.format_value(s)));
    match s {
        Scalar::Count(c) => Ok(*c as u128),
        Scalar::Bool(b) => Ok(*b as u128),
        Scalar::Rat(q) if q.is_integer() => q.to_integer().to_u128().ok_or_else(bad),
        _ => Err(bad()),
    }
}

/// Nonnegative integer counts, for PAR circuits.
#[derive(Clone, Copy, Debug, Default)]
pub struct Counting;

impl Ring for Counting {
    type V = u128;
    fn zero(&self) -> u128 {
        0
    }
    fn add_assign(&self, a: &mut u128, b: &u128) {
        *a = a.checked_add(*b).expect("count overflow");
    }
    fn mul(&self, a: &u128, b: &u128) -> u128 {
        a.checked_mul(*b).expect("count overflow")
    }
    fn is_zero(&self, a: &u128) -> bool {
        *a == 0
    }
    fn embed(&self, sr: Semiring, s: &Scalar) -> Result<u128> {
        nonneg_integer(sr, s)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct Boolean;

impl Ring for Boolean {
    type V = bool;
    fn zero(&self) -> bool {
        false
    }
    fn add_assign(&self, a: &mut bool, b: &bool) {
        *a |= *b;
    }
    fn mul(&self, a: &bool, b: &bool) -> bool {
        *a && *b
    }
    fn is_zero(&self, a: &bool) -> bool {
        !*a
    }
    fn embed(&self, sr: Semiring, s: &Scalar) -> Result<bool> {
        Ok(!sr.is_zero(s))
    }
}

/// Z[X]/(X^m − 1). Maps onto Z[ζ_m] by X ↦ ζ_m, so products of roots of
/// unity stay monomials and the reduction modulo Φ_m happens once at the end.
#[derive(Clone, Copy, Debug)]
pub struct GroupRing {
    pub m: u32,
}

impl GroupRing {
    pub fn monomial(&self, e: u64, c: i128) -> Vec<i128> {
        let mut v = vec![0; self.m as usize];
        v[(e % self.m as u64) as usize] = c;
        v
    }

    pub fn project(&self, a: &[i128]) -> Cyclo {
        Cyclo::from_poly(self.m, a.iter().map(|&c| BigInt::from(c)).collect(), BigInt::one())
    }
}

impl Ring for GroupRing {
    type V = Vec<i128>;
    fn zero(&self) -> Vec<i128> {
        vec![0; self.m as usize]
    }
    fn add_assign(&self, a: &mut Vec<i128>, b: &Vec<i128>) {
        for (x, y) in a.iter_mut().zip(b) {
            *x += y;
        }
    }
    fn mul(&self, a: &Vec<i128>, b: &Vec<i128>) -> Vec<i128> {
        let m = self.m as usize;
        let mut out = vec![0; m];
        for (i, x) in a.iter().enumerate().filter(|(_, x)| **x != 0) {
            for (j, y) in b.iter().enumerate() {
                out[(i + j) % m] += x * y;
            }
        }
        out
    }
    fn is_zero(&self, a: &Vec<i128>) -> bool {
        a.iter().all(|&c| c == 0)
    }
    fn embed(&self, sr: Semiring, s: &Scalar) -> Result<Vec<i128>> {
        let m = self.m as usize;
        let int = |b: &BigInt| b.to_i128().ok_or_else(|| Error::Semiring("coefficient out of i128 range".into()));
        match s {
            Scalar::Cyc(c) if c.m == self.m => {
                if !c.den.is_one() {
                    return Err(Error::Semiring(format!("non-integral cyclotomic coefficient {c}")));
                }
                let mut v = vec![0; m];
                for (k, b) in c.coeffs.iter().enumerate() {
                    v[k % m] += int(b)?;
                }
                Ok(v)
            }
            Scalar::Rat(q) if q.is_integer() => Ok(self.monomial(0, int(&q.to_integer())?)),
            Scalar::Count(_) | Scalar::Bool(_) => Ok(self.monomial(0, nonneg_integer(sr, s)? as i128)),
            _ => Err(Error::Semiring(format!("cannot embed {} into Z[X]/(X^{m} - 1)", sr.format_value(s)))),
        }
    }
}

/// Arithmetic of any `Semiring`, on `Scalar` values.
#[derive(Clone, Copy, Debug)]
pub struct Exact(pub Semiring);

impl Ring for Exact {
    type V = Scalar;
    fn zero(&self) -> Scalar {
        self.0.zero()
    }
    fn add_assign(&self, a: &mut Scalar, b: &Scalar) {
        *a = self.0.add(a, b);
    }
    fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.0.mul(a, b)
    }
    fn is_zero(&self, a: &Scalar) -> bool {
        self.0.is_zero(a)
    }
    fn embed(&self, sr: Semiring, s: &Scalar) -> Result<Scalar> {
        self.0.convert(sr, s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_ring_projects_to_cyclotomics() {
        let r = GroupRing { m: 3 };
        // (1 + X)(1 + X²) = 2 + X + X² ↦ 2 + ζ + ζ² = 1
        let p = r.mul(&vec![1, 1, 0], &vec![1, 0, 1]);
        assert_eq!(p, vec![2, 1, 1]);
        assert_eq!(r.project(&p), Cyclo::from_int(3, BigInt::one()));
        let z = r.embed(Semiring::Cyclotomic(3), &Scalar::Cyc(Cyclo::root_power(3, 2))).unwrap();
        assert_eq!(r.project(&z), Cyclo::root_power(3, 2));
        assert!(r.embed(Semiring::Rational, &Semiring::Rational.from_i64(-2)).unwrap() == vec![-2, 0, 0]);
        assert!(Counting.embed(Semiring::Rational, &Semiring::Rational.from_i64(-2)).is_err());
    }
}
