use kronsynth::formats::{read_krc, read_rects, write_krc, write_rects};
use kronsynth::partitions::{simple_partition, simple_terms, validate_partition, ValidationMode};
use kronsynth::solvers::{mobius_subset, mobius_superset, ov_count, ov_count_mod, wht, zeta_subset, zeta_superset, PointSet};
use kronsynth::spectrum::{f_exact, weak_duality_bound, AlphaProfile, Envelope};
use kronsynth::{Interval, Scalar, Semiring};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;

fn word(max_d: u32) -> impl Strategy<Value = String> {
    (1..=max_d).prop_flat_map(|d| proptest::collection::vec(prop::bool::ANY, d as usize + 1))
        .prop_map(|v| v.into_iter().map(|r| if r { 'R' } else { 'C' }).collect())
}

fn rationals(n: usize) -> impl Strategy<Value = Vec<Scalar>> {
    proptest::collection::vec((-50i64..50, 1i64..7), n)
        .prop_map(|v| v.into_iter().map(|(p, q)| Scalar::Rat(BigRational::new(p.into(), q.into()))).collect())
}

fn points(d: u32, m: u32) -> impl Strategy<Value = Vec<u64>> {
    proptest::collection::vec(0..(m as u64).pow(d), 0..24)
}

fn dot_mod(a: u64, b: u64, d: u32, m: u32) -> bool {
    let (mut a, mut b, mut s) = (a, b, 0u64);
    for _ in 0..d {
        s += (a % m as u64) * (b % m as u64);
        a /= m as u64;
        b /= m as u64;
    }
    s % m as u64 == 0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn every_word_partitions(w in word(6)) {
        let d = w.len() as u32 - 1;
        let fam = simple_partition(d, &w).unwrap();
        let rep = validate_partition(&fam, ValidationMode::Exhaustive).unwrap();
        prop_assert!(rep.passed(), "{w}: {:?}", rep.failure);
        prop_assert_eq!(fam.covered(), 3u128.pow(d));
    }

    #[test]
    fn rects_and_krc_round_trip(w in word(5)) {
        let d = w.len() as u32 - 1;
        let fam = simple_partition(d, &w).unwrap();
        let text = write_rects(&fam);
        prop_assert_eq!(write_rects(&read_rects(&text).unwrap()), text);
        let c = fam.to_circuit(Semiring::Par).unwrap();
        prop_assert_eq!(read_krc(&write_krc(&c)).unwrap(), c);
    }

    #[test]
    fn closed_form_matches_the_family(w in word(7), a in 0u32..=16) {
        let d = w.len() as u32 - 1;
        let alpha = Interval::from_ratio(a as i64, 16);
        let fam = simple_partition(d, &w).unwrap();
        let closed = AlphaProfile::from_terms("w", d, simple_terms(d, &w).unwrap()).rho(&alpha);
        prop_assert!(closed.overlaps(&fam.alpha_volume(&alpha)));
    }

    #[test]
    fn volumes_are_log_convex(w in word(8), a in 0u32..=32, b in 0u32..=32) {
        let d = w.len() as u32 - 1;
        let p = AlphaProfile::from_terms("w", d, simple_terms(d, &w).unwrap());
        let (x, y) = (a as f64 / 32.0, b as f64 / 32.0);
        let mid = p.rho_f64((x + y) / 2.0).log2();
        prop_assert!(mid <= (p.rho_f64(x).log2() + p.rho_f64(y).log2()) / 2.0 + 1e-9);
    }

    #[test]
    fn kron_multiplies_volumes(w1 in word(4), w2 in word(4), a in 0u32..=8) {
        let prof = |w: &str| {
            let d = w.len() as u32 - 1;
            AlphaProfile::from_terms(w, d, simple_terms(d, w).unwrap())
        };
        let (p, q) = (prof(&w1), prof(&w2));
        let x = a as f64 / 8.0;
        let got = p.kron(&q).rho_f64(x);
        let want = p.rho_f64(x) * q.rho_f64(x);
        prop_assert!((got / want - 1.0).abs() < 1e-12);
    }

    #[test]
    fn weak_duality_holds(w in word(3), k in 0u32..4, lam in 1i64..6, a in 0u32..=8) {
        let d = w.len() as u32 - 1;
        let n = k * d;
        let p = AlphaProfile::from_terms(&w, d, simple_terms(d, &w).unwrap());
        let profiles = vec![p.clone(), p.transpose()];
        let lambda = BigRational::from_integer(BigInt::from(lam));
        let f = f_exact(&profiles, n, &lambda).unwrap().to_f64().unwrap();
        let env = Envelope::new(profiles).unwrap();
        let bound = weak_duality_bound(&env, &Interval::from_ratio(a as i64, 8), n, &lambda);
        prop_assert!(bound.lo() <= f * (1.0 + 1e-12), "F={f} bound={:?}", bound);
    }

    #[test]
    fn transforms_invert(x in rationals(16)) {
        let sr = Semiring::Rational;
        let mut a = x.clone();
        zeta_subset(sr, &mut a).unwrap();
        mobius_subset(sr, &mut a).unwrap();
        prop_assert_eq!(&a, &x);
        zeta_superset(sr, &mut a).unwrap();
        mobius_superset(sr, &mut a).unwrap();
        prop_assert_eq!(&a, &x);
        wht(sr, &mut a).unwrap();
        wht(sr, &mut a).unwrap();
        let scaled: Vec<Scalar> = x.iter().map(|v| sr.mul(v, &sr.from_i64(16))).collect();
        prop_assert_eq!(a, scaled);
    }

    #[test]
    fn ov_count_matches_brute_force((d, u, v) in (1u32..10).prop_flat_map(|d| (Just(d), points(d, 2), points(d, 2)))) {
        let want = u.iter().flat_map(|a| v.iter().map(move |b| (a & b == 0) as u128)).sum::<u128>();
        let got = ov_count(&PointSet::new(d, 2, u).unwrap(), &PointSet::new(d, 2, v).unwrap()).unwrap();
        prop_assert_eq!(got.answer, want);
    }

    #[test]
    fn ov_mod_matches_brute_force((d, m, u, v) in (1u32..5, 2u32..5).prop_flat_map(|(d, m)| (Just(d), Just(m), points(d, m), points(d, m)))) {
        let want = u.iter().flat_map(|&a| v.iter().map(move |&b| dot_mod(a, b, d, m) as u128)).sum::<u128>();
        let got = ov_count_mod(&PointSet::new(d, m, u).unwrap(), &PointSet::new(d, m, v).unwrap(), None).unwrap();
        prop_assert_eq!(got.answer, want);
    }
}
