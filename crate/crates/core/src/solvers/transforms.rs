//! In-place transforms over {0,1}^n tables. Each returns the number of
//! semiring additions it performed.

use crate::error::{Error, Result};
use crate::semiring::{Scalar, Semiring};

fn levels(len: usize) -> Result<u32> {
    if !len.is_power_of_two() {
        return Err(Error::Shape(format!("table length {len} is not a power of two")));
    }
    Ok(len.trailing_zeros())
}

fn butterfly(a: &mut [Scalar], f: impl Fn(&mut Scalar, &mut Scalar) -> Result<()>) -> Result<u64> {
    let n = levels(a.len())?;
    let mut ops = 0;
    for b in 0..n {
        let bit = 1usize << b;
        for i in 0..a.len() {
            if i & bit == 0 {
                let (lo, hi) = a.split_at_mut(i | bit);
                f(&mut lo[i], &mut hi[0])?;
                ops += 1;
            }
        }
    }
    Ok(ops)
}

fn negate(sr: Semiring, x: &Scalar) -> Result<Scalar> {
    sr.neg(x).ok_or_else(|| Error::Semiring(format!("{sr} has no negation")))
}

/// a[S] ← Σ_{T ⊆ S} a[T].
pub fn zeta_subset(sr: Semiring, a: &mut [Scalar]) -> Result<u64> {
    butterfly(a, |lo, hi| {
        *hi = sr.add(hi, lo);
        Ok(())
    })
}

/// a[S] ← Σ_{T ⊇ S} a[T].
pub fn zeta_superset(sr: Semiring, a: &mut [Scalar]) -> Result<u64> {
    butterfly(a, |lo, hi| {
        *lo = sr.add(lo, hi);
        Ok(())
    })
}

/// a[S] ← Σ_{T ⊆ S} (−1)^{|S|−|T|} a[T]; inverts `zeta_subset`.
pub fn mobius_subset(sr: Semiring, a: &mut [Scalar]) -> Result<u64> {
    butterfly(a, |lo, hi| {
        *hi = sr.add(hi, &negate(sr, lo)?);
        Ok(())
    })
}

/// g(z) = Σ_{x ⊇ z} (−1)^{|x|−|z|} f(x), so that f(x) = Σ_{z ⊇ x} g(z).
pub fn mobius_superset(sr: Semiring, a: &mut [Scalar]) -> Result<u64> {
    butterfly(a, |lo, hi| {
        *lo = sr.add(lo, &negate(sr, hi)?);
        Ok(())
    })
}

/// Unnormalized Walsh–Hadamard transform, a ← H^{⊗n} a.
pub fn wht(sr: Semiring, a: &mut [Scalar]) -> Result<u64> {
    let ops = butterfly(a, |lo, hi| {
        let (x, y) = (lo.clone(), hi.clone());
        *lo = sr.add(&x, &y);
        *hi = sr.add(&x, &negate(sr, &y)?);
        Ok(())
    })?;
    Ok(2 * ops)
}

/// R^{⊗n} a through the subset zeta transform: (R a)[S] = Σ_{T ⊆ ¬S} a[T].
pub fn apply_disjointness(sr: Semiring, a: &[Scalar]) -> Result<(Vec<Scalar>, u64)> {
    let mut z = a.to_vec();
    let ops = zeta_subset(sr, &mut z)?;
    let full = a.len() - 1;
    Ok(((0..a.len()).map(|s| z[full & !s].clone()).collect(), ops))
}
