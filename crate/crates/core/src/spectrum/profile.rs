use std::collections::BTreeMap;

use crate::circuit::Circuit;
use crate::interval::{alpha_volume_terms, Interval};
use crate::partitions::RectangleFamily;

/// The α-volume of one decomposition of M^{⊗level}, kept as the multiset
/// of gate shapes (nnz(U_i), nnz(V_i)).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlphaProfile {
    pub label: String,
    pub level: u32,
    /// (a, b, multiplicity), sorted, distinct shapes.
    pub terms: Vec<(u128, u128, u128)>,
}

impl AlphaProfile {
    pub fn from_terms(label: impl Into<String>, level: u32, terms: impl IntoIterator<Item = (u128, u128, u128)>) -> Self {
        let mut h: BTreeMap<(u128, u128), u128> = BTreeMap::new();
        for (a, b, m) in terms {
            if m > 0 && a > 0 && b > 0 {
                *h.entry((a, b)).or_insert(0) += m;
            }
        }
        assert!(level >= 1, "profile level must be positive");
        assert!(!h.is_empty(), "profile needs at least one gate");
        AlphaProfile { label: label.into(), level, terms: h.into_iter().map(|((a, b), m)| (a, b, m)).collect() }
    }

    pub fn from_circuit(label: impl Into<String>, level: u32, c: &Circuit) -> Self {
        Self::from_terms(label, level, c.gate_sizes().into_iter().map(|(a, b)| (a, b, 1)))
    }

    pub fn from_family(label: impl Into<String>, f: &RectangleFamily) -> Self {
        Self::from_terms(label, f.d, f.shape_histogram())
    }

    /// ρ(α) = Σ a^α b^{1−α}.
    pub fn rho(&self, alpha: &Interval) -> Interval {
        alpha_volume_terms(self.terms.iter().copied(), alpha)
    }

    /// ρ(α)^{1/level}.
    pub fn normalized(&self, alpha: &Interval) -> Interval {
        self.rho(alpha).root(self.level)
    }

    pub fn rho_f64(&self, alpha: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(a, b, m)| m as f64 * (a as f64).powf(alpha) * (b as f64).powf(1.0 - alpha))
            .sum()
    }

    /// log2 ρ(α) / level in floating point, for plotting and scheduling.
    pub fn log2_normalized_f64(&self, alpha: f64) -> f64 {
        self.rho_f64(alpha).log2() / self.level as f64
    }

    pub fn transpose(&self) -> Self {
        Self::from_terms(format!("{}^T", self.label), self.level, self.terms.iter().map(|&(a, b, m)| (b, a, m)))
    }

    /// Profile of the Kronecker product of the underlying decompositions.
    pub fn kron(&self, o: &AlphaProfile) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * o.terms.len());
        for &(a, b, m) in &self.terms {
            for &(c, d, k) in &o.terms {
                terms.push((a * c, b * d, m * k));
            }
        }
        Self::from_terms(format!("{}⊗{}", self.label, o.label), self.level + o.level, terms)
    }

    pub fn size(&self) -> u128 {
        self.terms.iter().map(|&(a, b, m)| m * (a + b)).sum()
    }

    pub fn gate_count(&self) -> u128 {
        self.terms.iter().map(|t| t.2).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_is_multiplicative() {
        let p = AlphaProfile::from_terms("row", 1, [(1, 2, 1), (1, 1, 1)]);
        let q = AlphaProfile::from_terms("col", 1, [(2, 1, 1), (1, 1, 1)]);
        let a = Interval::from_ratio(2, 7);
        let pq = p.kron(&q);
        let lhs = pq.rho(&a);
        let rhs = p.rho(&a).mul(&q.rho(&a));
        assert!(lhs.overlaps(&rhs));
        assert_eq!(pq.level, 2);
    }

    #[test]
    fn transpose_mirrors_alpha() {
        let p = AlphaProfile::from_terms("x", 1, [(1, 5, 2), (3, 1, 1)]);
        let a = Interval::from_ratio(1, 5);
        let b = Interval::one().sub(&a);
        assert!(p.rho(&a).overlaps(&p.transpose().rho(&b)));
    }
}
