use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};

use super::profile::AlphaProfile;

pub const DEFAULT_STATE_CAP: usize = 1_000_000;

fn rat(v: u128) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Memoized F_n(λ) = min_t Σ_i a_i · F_{n−n_t}(λ · b_i / a_i), F_0(λ) = 1 + λ.
/// States are keyed by the reduced rational λ, which is canonical.
pub struct FTable<'a> {
    profiles: &'a [AlphaProfile],
    memo: HashMap<(u32, BigRational), Option<(BigRational, usize)>>,
    cap: usize,
}

impl<'a> FTable<'a> {
    pub fn new(profiles: &'a [AlphaProfile], cap: usize) -> Self {
        FTable { profiles, memo: HashMap::new(), cap }
    }

    pub fn states(&self) -> usize {
        self.memo.len()
    }

    /// None when no combination of profile levels sums to n.
    pub fn value(&mut self, n: u32, lambda: &BigRational) -> Result<Option<BigRational>> {
        Ok(self.solve(n, lambda)?.map(|(v, _)| v))
    }

    /// The minimizing profile index (lowest index on ties).
    pub fn choice(&mut self, n: u32, lambda: &BigRational) -> Result<Option<usize>> {
        Ok(self.solve(n, lambda)?.map(|(_, t)| t))
    }

    fn solve(&mut self, n: u32, lambda: &BigRational) -> Result<Option<(BigRational, usize)>> {
        if n == 0 {
            return Ok(Some((BigRational::one() + lambda, usize::MAX)));
        }
        let key = (n, lambda.clone());
        if let Some(v) = self.memo.get(&key) {
            return Ok(v.clone());
        }
        if self.memo.len() >= self.cap {
            return Err(Error::StateCap(self.cap));
        }
        let mut best: Option<(BigRational, usize)> = None;
        'profiles: for t in 0..self.profiles.len() {
            let p = &self.profiles[t];
            if p.level > n {
                continue;
            }
            let mut total = BigRational::from_integer(0.into());
            for &(a, b, m) in &p.terms {
                let child = lambda * rat(b) / rat(a);
                match self.solve(n - p.level, &child)? {
                    Some((v, _)) => total += v * rat(a * m),
                    None => continue 'profiles,
                }
            }
            if best.as_ref().is_none_or(|(v, _)| total < *v) {
                best = Some((total, t));
            }
        }
        self.memo.insert(key, best.clone());
        Ok(best)
    }
}

pub fn f_exact(profiles: &[AlphaProfile], n: u32, lambda: &BigRational) -> Result<BigRational> {
    f_exact_capped(profiles, n, lambda, DEFAULT_STATE_CAP)
}

pub fn f_exact_capped(profiles: &[AlphaProfile], n: u32, lambda: &BigRational, cap: usize) -> Result<BigRational> {
    FTable::new(profiles, cap)
        .value(n, lambda)?
        .ok_or_else(|| Error::Invalid(format!("no combination of profile levels reaches n = {n}")))
}
