use num_rational::BigRational;

use crate::circuit::{circuit_kron, circuit_power, disjointness_pair_partition, Circuit};
use crate::error::{Error, Result};
use crate::matrix::{check_cap, kron, MatrixSpec, SparseMatrix};
use crate::semiring::{Scalar, Semiring};

use super::transforms::mobius_superset;

/// U and V of a depth-2 circuit as explicit matrices, one column per gate.
pub fn circuit_factors(c: &Circuit) -> Result<(SparseMatrix, SparseMatrix)> {
    let g = c.gates.len() as u64;
    let mut u = Vec::new();
    let mut v = Vec::new();
    for (k, gate) in c.gates.iter().enumerate() {
        u.extend(gate.u.entries().iter().map(|(i, x)| (*i, k as u64, x.clone())));
        v.extend(gate.v.entries().iter().map(|(j, x)| (*j, k as u64, x.clone())));
    }
    Ok((SparseMatrix::from_entries(c.n_rows, g, c.semiring, u)?, SparseMatrix::from_entries(c.n_cols, g, c.semiring, v)?))
}

fn pad3(left: u64, m: &SparseMatrix, right: u64) -> Result<SparseMatrix> {
    let sr = m.semiring;
    kron(&kron(&SparseMatrix::identity(left, sr)?, m)?, &SparseMatrix::identity(right, sr)?)
}

/// Layers whose product is (U V^T)^{⊗depth/2} for the square circuit
/// `base`: factor j contributes (I ⊗ U ⊗ I)(I ⊗ V^T ⊗ I), with N^j
/// identity rows on the left and N^{s−1−j} on the right.
pub fn depth_d_stack(base: &Circuit, depth: u32) -> Result<Vec<SparseMatrix>> {
    if depth == 0 || depth % 2 == 1 {
        return Err(Error::Invalid(format!("depth must be even and positive, got {depth}")));
    }
    if base.n_rows != base.n_cols {
        return Err(Error::Shape(format!("base circuit is {}x{}, not square", base.n_rows, base.n_cols)));
    }
    let s = depth / 2;
    let n = base.n_rows;
    let (u, v) = circuit_factors(base)?;
    let vt = v.transpose();
    let pad = n.checked_pow(s - 1).ok_or_else(|| Error::Invalid("layer dimensions overflow".into()))?;
    check_cap(u.nnz().max(v.nnz()) as u128 * pad as u128)?;
    let mut layers = Vec::with_capacity(depth as usize);
    for j in 0..s {
        let (left, right) = (n.pow(j), n.pow(s - 1 - j));
        layers.push(pad3(left, &u, right)?);
        layers.push(pad3(left, &vt, right)?);
    }
    Ok(layers)
}

/// A depth-2 PAR-valid circuit for R^{⊗k}: powers of the four-rectangle
/// partition, times the row split of R_1 when k is odd.
pub fn disjointness_base(k: u32, sr: Semiring) -> Result<Circuit> {
    let r1 = Circuit::row_decomposition(&MatrixSpec::Disjointness(1).generate_in(sr)?);
    match (k / 2, k % 2) {
        (0, 0) => Err(Error::Invalid("level must be positive".into())),
        (0, _) => Ok(r1),
        (h, 0) => circuit_power(&disjointness_pair_partition(sr), h),
        (h, _) => circuit_kron(&circuit_power(&disjointness_pair_partition(sr), h)?, &r1),
    }
}

fn restrict(m: &SparseMatrix, rows: u64, cols: u64) -> Result<SparseMatrix> {
    let e = m.entries().iter().filter(|(i, j, _)| *i < rows && *j < cols).cloned().collect();
    SparseMatrix::from_entries(rows.min(m.n_rows), cols.min(m.n_cols), m.semiring, e)
}

/// Depth-`depth` layers for R^{⊗n}. When depth/2 does not divide n the
/// power is padded up and the outer layers are cut back to the 2^n indices
/// whose padding coordinates are zero.
pub fn disjointness_stack(n: u32, depth: u32, pad: bool, sr: Semiring) -> Result<Vec<SparseMatrix>> {
    if depth == 0 || depth % 2 == 1 {
        return Err(Error::Invalid(format!("depth must be even and positive, got {depth}")));
    }
    let s = depth / 2;
    if !n.is_multiple_of(s) && !pad {
        return Err(Error::Invalid(format!("depth/2 = {s} does not divide n = {n}; enable padding")));
    }
    let k = n.div_ceil(s).max(1);
    let mut layers = depth_d_stack(&disjointness_base(k, sr)?, depth)?;
    if k * s != n {
        let keep = 1u64 << n;
        let last = layers.len() - 1;
        layers[0] = restrict(&layers[0], keep, layers[0].n_cols)?;
        layers[last] = restrict(&layers[last], layers[last].n_rows, keep)?;
    }
    Ok(layers)
}

pub fn stack_size(layers: &[SparseMatrix]) -> u128 {
    layers.iter().map(|m| m.nnz() as u128).sum()
}

pub fn stack_product(layers: &[SparseMatrix]) -> Result<SparseMatrix> {
    let (first, rest) = layers.split_first().ok_or_else(|| Error::Invalid("no layers".into()))?;
    rest.iter().try_fold(first.clone(), |acc, m| acc.matmul(m))
}

pub fn stack_apply(layers: &[SparseMatrix], x: &[Scalar]) -> Result<Vec<Scalar>> {
    layers.iter().rev().try_fold(x.to_vec(), |v, m| m.mul_vec(&v))
}

#[derive(Clone, Debug)]
pub struct MfCircuit {
    pub n: u32,
    pub g: Vec<BigRational>,
    pub layers: Vec<SparseMatrix>,
}

/// A depth-2·`depth` circuit for M_f[x, y] = f(x ∨ y). With g the superset
/// Möbius transform of f, M_f = L Λ_g L^T where L[x, z] = [x ⊆ z] = R[x, ¬z].
/// L reuses the disjointness stack with its last layer's columns
/// complemented; Λ_g is merged into that layer.
pub fn mf_pipeline(f: &[BigRational], depth: u32) -> Result<MfCircuit> {
    if !f.len().is_power_of_two() {
        return Err(Error::Shape(format!("table length {} is not a power of two", f.len())));
    }
    let n = f.len().trailing_zeros();
    if n == 0 {
        return Err(Error::Invalid("f needs at least one variable".into()));
    }
    let sr = Semiring::Rational;
    let mut g: Vec<Scalar> = f.iter().map(|q| Scalar::Rat(q.clone())).collect();
    mobius_superset(sr, &mut g)?;
    let g: Vec<BigRational> = g
        .into_iter()
        .map(|s| match s {
            Scalar::Rat(q) => q,
            _ => unreachable!("rational transform"),
        })
        .collect();
    let r = disjointness_stack(n, depth, true, sr)?;
    let full = (1u64 << n) - 1;
    let last = r.len() - 1;
    let a = &r[last];
    let scaled = a
        .entries()
        .iter()
        .filter_map(|(i, w, v)| {
            let z = full & !w;
            let gz = &g[z as usize];
            (!num_traits::Zero::is_zero(gz)).then(|| (*i, z, sr.mul(v, &Scalar::Rat(gz.clone()))))
        })
        .collect();
    let merged = SparseMatrix::from_entries(a.n_rows, a.n_cols, sr, scaled)?;
    let flipped = a.entries().iter().map(|(i, w, v)| (full & !w, *i, v.clone())).collect();
    let flipped = SparseMatrix::from_entries(a.n_cols, a.n_rows, sr, flipped)?;
    let mut layers: Vec<SparseMatrix> = r[..last].to_vec();
    layers.push(merged);
    layers.push(flipped);
    layers.extend(r[..last].iter().rev().map(|m| m.transpose()));
    Ok(MfCircuit { n, g, layers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn q(v: i64) -> BigRational {
        BigRational::from_integer(v.into())
    }

    #[test]
    fn depth_two_is_the_base() {
        let base = disjointness_base(4, Semiring::Rational).unwrap();
        let layers = depth_d_stack(&base, 2).unwrap();
        assert_eq!(layers.len(), 2);
        assert_eq!(stack_size(&layers), base.size());
    }

    #[test]
    fn depth_four_n4() {
        let layers = disjointness_stack(4, 4, false, Semiring::Rational).unwrap();
        assert_eq!(layers.len(), 4);
        assert_eq!(stack_product(&layers).unwrap(), MatrixSpec::Disjointness(4).generate().unwrap());
        let (u, v) = circuit_factors(&disjointness_base(2, Semiring::Rational).unwrap()).unwrap();
        // the outer layers carry a 2^{(d−2)n/d} identity
        assert_eq!(layers[0].nnz(), u.nnz() * 4);
        assert_eq!(layers[3].nnz(), v.nnz() * 4);
    }

    #[test]
    fn padding() {
        assert!(disjointness_stack(5, 4, false, Semiring::Rational).is_err());
        let layers = disjointness_stack(5, 4, true, Semiring::Rational).unwrap();
        assert_eq!(stack_product(&layers).unwrap(), MatrixSpec::Disjointness(5).generate().unwrap());
    }

    #[test]
    fn mf_fixture() {
        let c = mf_pipeline(&[q(0), q(1)], 2).unwrap();
        assert_eq!(c.g, vec![q(-1), q(1)]);
        assert_eq!(c.layers.len(), 4);
        let m = stack_product(&c.layers).unwrap();
        assert_eq!(m, SparseMatrix::from_dense_i64(&[vec![0, 1], vec![1, 1]], Semiring::Rational));
        let ones = mf_pipeline(&vec![BigRational::one(); 8], 2).unwrap();
        assert_eq!(ones.g.iter().filter(|x| !num_traits::Zero::is_zero(*x)).count(), 1);
        assert!(ones.g[7].is_one());
    }
}
