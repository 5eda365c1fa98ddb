//! Outward-rounded real intervals on top of MPFR.
//!
//! Every operation rounds the lower end down and the upper end up, so an
//! `Interval` always encloses the exact real it stands for. Comparisons
//! are three-valued: `certainly_lt` is only true when the enclosures are
//! separated.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use rug::float::Round;
use rug::{Assign, Float, Integer};

pub const PREC: u32 = 192;

#[derive(Clone, Debug)]
pub struct Interval {
    lo: Float,
    hi: Float,
}

fn big_to_rug(b: &BigInt) -> Integer {
    b.to_string().parse().expect("decimal round trip")
}

impl Interval {
    pub fn point(v: f64) -> Self {
        let f = Float::with_val(PREC, v);
        Interval { lo: f.clone(), hi: f }
    }

    pub fn from_u128(v: u128) -> Self {
        let i = Integer::from(v);
        Self::from_integer(&i)
    }

    pub fn from_bigint(v: &BigInt) -> Self {
        Self::from_integer(&big_to_rug(v))
    }

    fn from_integer(i: &Integer) -> Self {
        let (lo, _) = Float::with_val_round(PREC, i, Round::Down);
        let (hi, _) = Float::with_val_round(PREC, i, Round::Up);
        Interval { lo, hi }
    }

    pub fn from_ratio(p: i64, q: i64) -> Self {
        assert!(q != 0);
        let r = rug::Rational::from((p, q));
        let (lo, _) = Float::with_val_round(PREC, &r, Round::Down);
        let (hi, _) = Float::with_val_round(PREC, &r, Round::Up);
        Interval { lo, hi }
    }

    pub fn from_rational(r: &BigRational) -> Self {
        let r = rug::Rational::from((big_to_rug(r.numer()), big_to_rug(r.denom())));
        let (lo, _) = Float::with_val_round(PREC, &r, Round::Down);
        let (hi, _) = Float::with_val_round(PREC, &r, Round::Up);
        Interval { lo, hi }
    }

    pub fn zero() -> Self {
        Self::point(0.0)
    }

    pub fn one() -> Self {
        Self::point(1.0)
    }

    pub fn lo(&self) -> f64 {
        self.lo.to_f64_round(Round::Down)
    }

    pub fn hi(&self) -> f64 {
        self.hi.to_f64_round(Round::Up)
    }

    pub fn mid(&self) -> f64 {
        let s = Float::with_val(PREC, &self.lo + &self.hi);
        (s / 2u32).to_f64()
    }

    /// The degenerate interval at the upper end.
    pub fn upper_end(&self) -> Interval {
        Interval { lo: self.hi.clone(), hi: self.hi.clone() }
    }

    pub fn lower_end(&self) -> Interval {
        Interval { lo: self.lo.clone(), hi: self.lo.clone() }
    }

    /// Width as an upper bound.
    pub fn width(&self) -> f64 {
        let (w, _) = Float::with_val_round(PREC, &self.hi - &self.lo, Round::Up);
        w.to_f64_round(Round::Up)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn contains_interval(&self, o: &Interval) -> bool {
        self.lo <= o.lo && o.hi <= self.hi
    }

    pub fn overlaps(&self, o: &Interval) -> bool {
        self.lo <= o.hi && o.lo <= self.hi
    }

    pub fn certainly_lt(&self, o: &Interval) -> bool {
        self.hi < o.lo
    }

    pub fn certainly_le(&self, o: &Interval) -> bool {
        self.hi <= o.lo
    }

    /// `Some(ordering)` when the enclosures decide it.
    pub fn partial_cmp_certain(&self, o: &Interval) -> Option<Ordering> {
        if self.hi < o.lo {
            Some(Ordering::Less)
        } else if o.hi < self.lo {
            Some(Ordering::Greater)
        } else {
            None
        }
    }

    pub fn add(&self, o: &Interval) -> Interval {
        let (lo, _) = Float::with_val_round(PREC, &self.lo + &o.lo, Round::Down);
        let (hi, _) = Float::with_val_round(PREC, &self.hi + &o.hi, Round::Up);
        Interval { lo, hi }
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        let (lo, _) = Float::with_val_round(PREC, &self.lo - &o.hi, Round::Down);
        let (hi, _) = Float::with_val_round(PREC, &self.hi - &o.lo, Round::Up);
        Interval { lo, hi }
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let mut lo: Option<Float> = None;
        let mut hi: Option<Float> = None;
        for a in [&self.lo, &self.hi] {
            for b in [&o.lo, &o.hi] {
                let (l, _) = Float::with_val_round(PREC, a * b, Round::Down);
                let (h, _) = Float::with_val_round(PREC, a * b, Round::Up);
                if lo.as_ref().is_none_or(|x| l < *x) {
                    lo = Some(l);
                }
                if hi.as_ref().is_none_or(|x| h > *x) {
                    hi = Some(h);
                }
            }
        }
        Interval { lo: lo.unwrap(), hi: hi.unwrap() }
    }

    /// Division by an interval that excludes zero.
    pub fn div(&self, o: &Interval) -> Interval {
        assert!(o.lo > 0 || o.hi < 0, "division by an interval containing zero");
        let mut lo: Option<Float> = None;
        let mut hi: Option<Float> = None;
        for a in [&self.lo, &self.hi] {
            for b in [&o.lo, &o.hi] {
                let (l, _) = Float::with_val_round(PREC, a / b, Round::Down);
                let (h, _) = Float::with_val_round(PREC, a / b, Round::Up);
                if lo.as_ref().is_none_or(|x| l < *x) {
                    lo = Some(l);
                }
                if hi.as_ref().is_none_or(|x| h > *x) {
                    hi = Some(h);
                }
            }
        }
        Interval { lo: lo.unwrap(), hi: hi.unwrap() }
    }

    pub fn scale_u128(&self, k: u128) -> Interval {
        self.mul(&Interval::from_u128(k))
    }

    /// log2 of a positive interval.
    pub fn log2(&self) -> Interval {
        assert!(self.lo > 0, "log2 of a non-positive interval");
        let mut lo = self.lo.clone();
        lo.log2_round(Round::Down);
        let mut hi = self.hi.clone();
        hi.log2_round(Round::Up);
        Interval { lo, hi }
    }

    pub fn exp2(&self) -> Interval {
        let mut lo = self.lo.clone();
        lo.exp2_round(Round::Down);
        let mut hi = self.hi.clone();
        hi.exp2_round(Round::Up);
        Interval { lo, hi }
    }

    pub fn ln(&self) -> Interval {
        assert!(self.lo > 0, "ln of a non-positive interval");
        let mut lo = self.lo.clone();
        lo.ln_round(Round::Down);
        let mut hi = self.hi.clone();
        hi.ln_round(Round::Up);
        Interval { lo, hi }
    }

    pub fn sqrt(&self) -> Interval {
        assert!(self.lo >= 0);
        let mut lo = self.lo.clone();
        lo.sqrt_round(Round::Down);
        let mut hi = self.hi.clone();
        hi.sqrt_round(Round::Up);
        Interval { lo, hi }
    }

    /// `x^e` for a positive base, as `2^(e·log2 x)`. `0^e` is 0 for e > 0
    /// and 1 for e = 0.
    pub fn powf(&self, e: &Interval) -> Interval {
        if self.hi == 0 {
            if e.lo > 0 {
                return Interval::zero();
            }
            if e.lo == 0 && e.hi == 0 {
                return Interval::one();
            }
            panic!("0^e with e not certainly positive");
        }
        self.log2().mul(e).exp2()
    }

    /// The n-th root of a positive interval.
    pub fn root(&self, n: u32) -> Interval {
        self.log2().div(&Interval::from_u128(n as u128)).exp2()
    }

    pub fn min(&self, o: &Interval) -> Interval {
        let lo = if self.lo < o.lo { self.lo.clone() } else { o.lo.clone() };
        let hi = if self.hi < o.hi { self.hi.clone() } else { o.hi.clone() };
        Interval { lo, hi }
    }

    pub fn max(&self, o: &Interval) -> Interval {
        let lo = if self.lo > o.lo { self.lo.clone() } else { o.lo.clone() };
        let hi = if self.hi > o.hi { self.hi.clone() } else { o.hi.clone() };
        Interval { lo, hi }
    }

    /// Convex hull of two intervals.
    pub fn hull(&self, o: &Interval) -> Interval {
        let lo = if self.lo < o.lo { self.lo.clone() } else { o.lo.clone() };
        let hi = if self.hi > o.hi { self.hi.clone() } else { o.hi.clone() };
        Interval { lo, hi }
    }

    /// Decimal rendering of the upper end, rounded up, with `digits`
    /// fractional digits.
    pub fn upper_string(&self, digits: usize) -> String {
        directed_decimal(&self.hi, digits, true)
    }

    pub fn lower_string(&self, digits: usize) -> String {
        directed_decimal(&self.lo, digits, false)
    }
}

/// Fixed-point decimal of `x` rounded towards +inf (`up`) or -inf.
fn directed_decimal(x: &Float, digits: usize, up: bool) -> String {
    let scale = Integer::from(Integer::u_pow_u(10, digits as u32));
    let scaled = Float::with_val(PREC + 64, x * &scale);
    let mut r = Integer::new();
    if up {
        r.assign(scaled.ceil_ref_int());
    } else {
        r.assign(scaled.floor_ref_int());
    }
    let neg = r < 0;
    let s = r.abs().to_string();
    let s = format!("{:0>width$}", s, width = digits + 1);
    let (ip, fp) = s.split_at(s.len() - digits);
    let sign = if neg { "-" } else { "" };
    if digits == 0 {
        format!("{sign}{ip}")
    } else {
        format!("{sign}{ip}.{fp}")
    }
}

trait CeilFloorRef {
    fn ceil_ref_int(&self) -> Integer;
    fn floor_ref_int(&self) -> Integer;
}

impl CeilFloorRef for Float {
    fn ceil_ref_int(&self) -> Integer {
        self.clone().ceil().to_integer().expect("finite")
    }
    fn floor_ref_int(&self) -> Integer {
        self.clone().floor().to_integer().expect("finite")
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lower_string(12), self.upper_string(12))
    }
}

/// Sum of `mult · a^α · b^(1−α)` over the terms, enclosed.
pub fn alpha_volume_terms(terms: impl IntoIterator<Item = (u128, u128, u128)>, alpha: &Interval) -> Interval {
    let one_minus = Interval::one().sub(alpha);
    let mut acc = Interval::zero();
    for (a, b, mult) in terms {
        if mult == 0 {
            continue;
        }
        let t = Interval::from_u128(a).powf(alpha).mul(&Interval::from_u128(b).powf(&one_minus));
        acc = acc.add(&t.scale_u128(mult));
    }
    acc
}
