use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

pub fn binom(n: u32, k: u32) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    c
}

pub fn binom_big(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut c = BigUint::one();
    for i in 0..k {
        c = c * (n - i) / (i + 1);
    }
    c
}

/// Σ_{j ≥ k} C(n, j); a negative `k` counts everything.
pub fn binom_tail(n: u32, k: i64) -> u128 {
    let start = k.max(0) as u32;
    (start..=n).map(|j| binom(n, j)).sum()
}

/// Masks of popcount `k` below `1 << n`, in increasing order.
pub fn weight_subsets(n: u32, k: u32) -> impl Iterator<Item = u64> {
    let limit = if n >= 64 { None } else { Some(1u64 << n) };
    let mut next = if k > n {
        None
    } else if k == 0 {
        Some(0u64)
    } else {
        Some(u64::MAX >> (64 - k))
    };
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 {
            None
        } else {
            // Gosper's hack
            let c = cur & cur.wrapping_neg();
            let r = cur.wrapping_add(c);
            if r == 0 {
                None
            } else {
                let nx = (((r ^ cur) >> 2) / c) | r;
                match limit {
                    Some(l) if nx >= l => None,
                    _ => Some(nx),
                }
            }
        };
        Some(cur)
    })
}

/// Scatters the low bits of `x` onto the set bits of `mask`.
pub fn deposit(mut x: u64, mask: u64) -> u64 {
    let mut out = 0u64;
    let mut m = mask;
    while m != 0 && x != 0 {
        let low = m & m.wrapping_neg();
        if x & 1 == 1 {
            out |= low;
        }
        x >>= 1;
        m ^= low;
    }
    out
}

/// Supersets of `base` inside `universe` of total popcount `size`.
pub fn supersets_of_weight(base: u64, universe: u64, size: u32) -> impl Iterator<Item = u64> {
    let free = universe & !base;
    let have = base.count_ones();
    let nfree = free.count_ones();
    let need = size.checked_sub(have);
    let ok = base & !universe == 0 && need.is_some_and(|k| k <= nfree);
    let it = if ok { Some(weight_subsets(nfree, need.unwrap())) } else { None };
    it.into_iter().flatten().map(move |x| base | deposit(x, free))
}

/// `(N choose i_1..i_k) · Π (i_j/N)^{i_j}`, exactly.
pub fn multinomial_type_mass(counts: &[u32]) -> BigRational {
    let n: u32 = counts.iter().sum();
    if n == 0 {
        return BigRational::one();
    }
    let mut coef = BigUint::one();
    let mut rest = n as u64;
    for &c in counts {
        coef *= binom_big(rest, c as u64);
        rest -= c as u64;
    }
    let mut num = coef;
    for &c in counts {
        num *= BigUint::from(c).pow(c);
    }
    let den = BigUint::from(n).pow(n);
    BigRational::new(num.into(), den.into())
}
