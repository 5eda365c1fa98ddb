use kronsynth::solvers::PointSet;
use kronsynth::{Scalar, Semiring};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` binary vectors of dimension `d`, each coordinate set with probability `p`.
pub fn random_points(d: u32, n: usize, p: f64, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n).map(|_| (0..d).filter(|_| rng.gen_bool(p)).fold(0u64, |a, i| a | 1 << i)).collect();
    PointSet::new(d, 2, points).expect("valid point set")
}

/// Vectors of dimension `d` over Z_m with uniform digits.
pub fn random_digits(d: u32, m: u32, n: usize, seed: u64) -> PointSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = (m as u64).pow(d);
    PointSet::new(d, m, (0..n).map(|_| rng.gen_range(0..size)).collect()).expect("valid point set")
}

pub fn random_vector(len: usize, seed: u64) -> Vec<Scalar> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| Semiring::Rational.from_i64(rng.gen_range(-100..100))).collect()
}
