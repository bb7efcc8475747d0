//! Finite abelian groups `Z^n / Sigma`, their generating sets, and the
//! kernel lattices `Lambda_s = { k in Z^m : u k in Sigma }`.
//!
//! `Z^m / Lambda_s` is isomorphic to `Z^n / Sigma` by an isomorphism taking
//! the standard basis to `s`, which is what lets the graph computations run
//! on the approximate torus graph instead of on the group directly.

mod window;

pub use window::{FnWindow, FullWindow, SortedBoxWindow, Window};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::intlinalg::{
    canonical_residue, hnf, integer_kernel, snf, span_hnf, HnfBasis, IntMatrix, LinalgError,
};

/// Default number of candidate sets drawn before a sampler gives up.
pub const DEFAULT_REJECTION_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CayleyError {
    #[error("sigma basis is singular")]
    SingularSigma,
    #[error("need m >= n and m >= 2, got n = {n}, m = {m}")]
    BadDimensions { n: usize, m: usize },
    #[error("no generating set accepted after {draws} draws")]
    RejectionBudgetExceeded { draws: u64 },
    #[error("window accepted no generating set after {draws} draws")]
    EmptyWindow { draws: u64 },
    #[error("group of order {order} has no subset of size {m}")]
    GroupTooSmall { order: i64, m: usize },
    #[error("restricted sampling needs sigma = k Z^n and m > n")]
    NotScalar,
    #[error("generating set has a repeated element")]
    DuplicateElement,
    #[error("elements do not generate the group")]
    NotGenerating,
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// The finite group `Z^n / Sigma`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbelianQuotient {
    pub n: usize,
    pub sigma_basis: HnfBasis,
    pub order: i64,
    pub divisors: Vec<i64>,
    pub gcd_sigma: i64,
}

/// Builds `Z^n / M Z^n` from a nonsingular `n x n` matrix `M`.
pub fn quotient_from_basis(m: &IntMatrix) -> Result<AbelianQuotient, CayleyError> {
    assert!(m.is_square(), "sigma basis must be square");
    if m.determinant()? == 0 {
        return Err(CayleyError::SingularSigma);
    }
    let sigma_basis = hnf(m)?;
    let divisors = snf(m)?.d;
    let order = divisors
        .iter()
        .try_fold(1i64, |acc, &d| acc.checked_mul(d))
        .ok_or(LinalgError::Overflow)?;
    Ok(AbelianQuotient {
        n: m.rows(),
        gcd_sigma: divisors[0],
        sigma_basis,
        order,
        divisors,
    })
}

impl AbelianQuotient {
    /// `Z^n / k Z^n`.
    pub fn scalar(n: usize, k: i64) -> Result<Self, CayleyError> {
        quotient_from_basis(&IntMatrix::scalar(n, k))
    }

    pub fn sigma(&self) -> &IntMatrix {
        &self.sigma_basis.h
    }

    /// `Some(k)` when `Sigma = k Z^n`.
    pub fn scalar_modulus(&self) -> Option<i64> {
        let k = self.divisors[0];
        self.divisors.iter().all(|&d| d == k).then_some(k)
    }

    pub fn residue(&self, v: &[i64]) -> Result<Vec<i64>, CayleyError> {
        Ok(canonical_residue(v, &self.sigma_basis)?)
    }

    /// Uniform element, as a canonical residue.
    pub fn random_element<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<i64> {
        self.sigma_basis
            .pivots()
            .into_iter()
            .map(|p| rng.random_range(0..p))
            .collect()
    }

    /// All group elements as canonical residues, in mixed-radix order.
    pub fn elements(&self) -> Vec<Vec<i64>> {
        let radices = self.sigma_basis.pivots();
        let mut out = vec![Vec::new()];
        for &r in &radices {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    (0..r).map(move |x| {
                        let mut v = prefix.clone();
                        v.push(x);
                        v
                    })
                })
                .collect();
        }
        out
    }
}

/// `|Sigma|` when `m > n`, and `|Sigma| / (gcd Sigma)^n` when `m = n`; the
/// quantity whose growth defines `Sigma -> infinity`.
pub fn divergence_parameter(q: &AbelianQuotient, m: usize) -> Result<i64, CayleyError> {
    if m < q.n || m < 2 {
        return Err(CayleyError::BadDimensions { n: q.n, m });
    }
    if m > q.n {
        return Ok(q.order);
    }
    // gcd^n divides the order since gcd divides every elementary divisor
    let mut denom = 1i64;
    for _ in 0..q.n {
        denom = denom.checked_mul(q.gcd_sigma).ok_or(LinalgError::Overflow)?;
    }
    Ok(q.order / denom)
}

/// Whether the columns of `u` generate `Z^n / Sigma`, i.e. `u Z^m + Sigma = Z^n`.
pub fn is_generating(u: &IntMatrix, q: &AbelianQuotient) -> Result<bool, CayleyError> {
    assert_eq!(u.rows(), q.n);
    let block = u.hstack(q.sigma());
    Ok(snf(&block)?.d.iter().all(|&d| d == 1))
}

/// A generating set of size `m`, stored as the `n x m` matrix of canonical
/// residues, columns sorted lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratingSet {
    pub m: usize,
    pub u: IntMatrix,
    pub quotient: AbelianQuotient,
}

impl GeneratingSet {
    /// Validates and canonicalizes a set of group elements.
    pub fn from_elements(q: &AbelianQuotient, elements: &[Vec<i64>]) -> Result<Self, CayleyError> {
        let m = elements.len();
        if m < q.n || m < 2 {
            return Err(CayleyError::BadDimensions { n: q.n, m });
        }
        let mut cols = elements
            .iter()
            .map(|e| q.residue(e))
            .collect::<Result<Vec<_>, _>>()?;
        cols.sort();
        if cols.windows(2).any(|w| w[0] == w[1]) {
            return Err(CayleyError::DuplicateElement);
        }
        let u = IntMatrix::from_cols(&cols);
        if !is_generating(&u, q)? {
            return Err(CayleyError::NotGenerating);
        }
        Ok(Self { m, u, quotient: q.clone() })
    }

    pub fn elements(&self) -> Vec<Vec<i64>> {
        self.u.columns()
    }

    /// The points `u_i / k` of `T^n`, defined when `Sigma = k Z^n`.
    pub fn torus_points(&self) -> Option<Vec<Vec<f64>>> {
        let k = self.quotient.scalar_modulus()? as f64;
        Some(
            self.u
                .columns()
                .into_iter()
                .map(|c| c.into_iter().map(|x| x as f64 / k).collect())
                .collect(),
        )
    }
}

/// Uniform sample from the generating sets of size `m`.
pub fn sample_generating_set<R: Rng + ?Sized>(
    q: &AbelianQuotient,
    m: usize,
    rng: &mut R,
) -> Result<GeneratingSet, CayleyError> {
    sample_generating_set_with_cap(q, m, DEFAULT_REJECTION_CAP, rng)
}

/// As [`sample_generating_set`] with an explicit rejection cap.
///
/// Draws `m` distinct uniform residues and accepts iff they generate; the
/// accepted set is uniform on the generating sets because every `m`-subset
/// is equally likely to be drawn.
pub fn sample_generating_set_with_cap<R: Rng + ?Sized>(
    q: &AbelianQuotient,
    m: usize,
    cap: u64,
    rng: &mut R,
) -> Result<GeneratingSet, CayleyError> {
    let mut budget = cap;
    draw_generating(q, m, &mut budget, rng)?
        .ok_or(CayleyError::RejectionBudgetExceeded { draws: cap })
}

fn draw_generating<R: Rng + ?Sized>(
    q: &AbelianQuotient,
    m: usize,
    budget: &mut u64,
    rng: &mut R,
) -> Result<Option<GeneratingSet>, CayleyError> {
    if m < q.n || m < 2 {
        return Err(CayleyError::BadDimensions { n: q.n, m });
    }
    if (q.order as u128) < m as u128 {
        return Err(CayleyError::GroupTooSmall { order: q.order, m });
    }
    while *budget > 0 {
        *budget -= 1;
        let mut cols: Vec<Vec<i64>> = Vec::with_capacity(m);
        while cols.len() < m {
            let x = q.random_element(rng);
            if !cols.contains(&x) {
                cols.push(x);
            }
        }
        cols.sort();
        let u = IntMatrix::from_cols(&cols);
        if is_generating(&u, q)? {
            return Ok(Some(GeneratingSet { m, u, quotient: q.clone() }));
        }
    }
    Ok(None)
}

/// Uniform sample from the generating sets whose torus image lies in
/// `window`, for `Sigma = k Z^n` and `m > n`.
pub fn sample_restricted<R: Rng + ?Sized, W: Window + ?Sized>(
    q: &AbelianQuotient,
    m: usize,
    window: &W,
    rng: &mut R,
) -> Result<GeneratingSet, CayleyError> {
    sample_restricted_with_cap(q, m, window, DEFAULT_REJECTION_CAP, rng)
}

pub fn sample_restricted_with_cap<R: Rng + ?Sized, W: Window + ?Sized>(
    q: &AbelianQuotient,
    m: usize,
    window: &W,
    cap: u64,
    rng: &mut R,
) -> Result<GeneratingSet, CayleyError> {
    if q.scalar_modulus().is_none() || m <= q.n {
        return Err(CayleyError::NotScalar);
    }
    let mut budget = cap;
    while let Some(s) = draw_generating(q, m, &mut budget, rng)? {
        let points = s.torus_points().expect("scalar quotient");
        if window.contains(&points) {
            return Ok(s);
        }
    }
    Err(CayleyError::EmptyWindow { draws: cap })
}

/// A finite-index sublattice of `Z^m` in canonical HNF.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegerLattice {
    pub m: usize,
    pub basis: HnfBasis,
    pub index: i64,
    pub divisors: Vec<i64>,
}

impl IntegerLattice {
    /// Lattice spanned by the columns of `generators` (must have full rank).
    pub fn from_generators(generators: &IntMatrix) -> Result<Self, CayleyError> {
        let basis = span_hnf(generators)?;
        let index = basis.index()?;
        let divisors = snf(&basis.h)?.d;
        Ok(Self { m: basis.dim(), basis, index, divisors })
    }

    /// `k Z^m`.
    pub fn scalar(m: usize, k: i64) -> Result<Self, CayleyError> {
        Self::from_generators(&IntMatrix::scalar(m, k))
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.basis.contains(v)
    }
}

/// `Lambda_s = ker(k -> u k + Sigma)`.
///
/// Computed from the integer kernel of `(u | M)`: the first `m` coordinates
/// of its kernel vectors span `Lambda_s`.
pub fn kernel_of_generating_map(s: &GeneratingSet) -> Result<IntegerLattice, CayleyError> {
    let block = s.u.hstack(s.quotient.sigma());
    let kernel = integer_kernel(&block)?;
    IntegerLattice::from_generators(&kernel.top_rows(s.m))
}

/// Flat JSON record of a generating set and its kernel lattice.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelRecord {
    pub n: usize,
    pub m: usize,
    pub sigma_basis: Vec<i64>,
    pub u: Vec<i64>,
    pub lambda_basis: Vec<i64>,
    pub index: i64,
}

impl KernelRecord {
    pub fn new(s: &GeneratingSet, lattice: &IntegerLattice) -> Self {
        Self {
            n: s.quotient.n,
            m: s.m,
            sigma_basis: s.quotient.sigma().entries().to_vec(),
            u: s.u.entries().to_vec(),
            lambda_basis: lattice.basis.h.entries().to_vec(),
            index: lattice.index,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;
    use std::collections::BTreeMap;

    #[test]
    fn quotient_examples() {
        let q = AbelianQuotient::scalar(2, 5).unwrap();
        assert_eq!((q.order, q.divisors.clone(), q.gcd_sigma), (25, vec![5, 5], 5));
        let q = quotient_from_basis(&IntMatrix::diagonal(&[2, 6])).unwrap();
        assert_eq!((q.order, q.divisors.clone(), q.gcd_sigma), (12, vec![2, 6], 2));
        let q = quotient_from_basis(&IntMatrix::from_cols(&[vec![2, 0], vec![1, 3]])).unwrap();
        assert_eq!((q.order, q.divisors.clone(), q.gcd_sigma), (6, vec![1, 6], 1));
        assert_eq!(
            quotient_from_basis(&IntMatrix::from_cols(&[vec![1, 2], vec![2, 4]])),
            Err(CayleyError::SingularSigma)
        );
    }

    #[test]
    fn gcd_sigma_is_largest_common_divisor_of_basis() {
        for m in [IntMatrix::diagonal(&[2, 6]), IntMatrix::from_cols(&[vec![6, 4], vec![10, 14]])] {
            let q = quotient_from_basis(&m).unwrap();
            let g = q.gcd_sigma;
            assert!(q.sigma().entries().iter().all(|x| x % g == 0));
            for bigger in g + 1..=q.order {
                assert!(q.sigma().entries().iter().any(|x| x % bigger != 0));
            }
        }
    }

    #[test]
    fn divergence_examples() {
        let q = AbelianQuotient::scalar(1, 7).unwrap();
        assert_eq!(divergence_parameter(&q, 2).unwrap(), 7);
        let q = AbelianQuotient::scalar(2, 5).unwrap();
        assert_eq!(divergence_parameter(&q, 2).unwrap(), 1);
        let q = quotient_from_basis(&IntMatrix::diagonal(&[2, 6])).unwrap();
        assert_eq!(divergence_parameter(&q, 2).unwrap(), 3);
        let q = quotient_from_basis(&IntMatrix::from_cols(&[vec![2, 0], vec![1, 3]])).unwrap();
        assert_eq!(divergence_parameter(&q, 2).unwrap(), 6);
        assert!(matches!(divergence_parameter(&q, 1), Err(CayleyError::BadDimensions { .. })));
        let q1 = AbelianQuotient::scalar(1, 7).unwrap();
        assert!(matches!(divergence_parameter(&q1, 1), Err(CayleyError::BadDimensions { .. })));
    }

    #[test]
    fn generating_examples() {
        let z4 = AbelianQuotient::scalar(1, 4).unwrap();
        assert!(!is_generating(&IntMatrix::from_rows(&[vec![2, 2]]), &z4).unwrap());
        assert!(is_generating(&IntMatrix::from_rows(&[vec![2, 3]]), &z4).unwrap());
        let z5sq = AbelianQuotient::scalar(2, 5).unwrap();
        assert!(is_generating(&IntMatrix::identity(2), &z5sq).unwrap());
        assert_eq!(
            GeneratingSet::from_elements(&z4, &[vec![0], vec![2]]),
            Err(CayleyError::NotGenerating)
        );
        assert_eq!(
            GeneratingSet::from_elements(&z4, &[vec![1], vec![5]]),
            Err(CayleyError::DuplicateElement)
        );
    }

    #[test]
    fn sampler_on_z2_is_forced() {
        let q = AbelianQuotient::scalar(1, 2).unwrap();
        let mut rng = stream_rng(1, 0);
        for _ in 0..20 {
            let s = sample_generating_set(&q, 2, &mut rng).unwrap();
            assert_eq!(s.elements(), vec![vec![0], vec![1]]);
        }
        assert!(matches!(
            sample_generating_set(&q, 3, &mut rng),
            Err(CayleyError::GroupTooSmall { .. })
        ));
    }

    #[test]
    fn sampler_on_z4_never_returns_zero_two() {
        let q = AbelianQuotient::scalar(1, 4).unwrap();
        let mut rng = stream_rng(2, 0);
        for _ in 0..2000 {
            let s = sample_generating_set(&q, 2, &mut rng).unwrap();
            assert_ne!(s.elements(), vec![vec![0], vec![2]]);
        }
    }

    #[test]
    fn sampler_is_uniform_on_z5_pairs() {
        let q = AbelianQuotient::scalar(1, 5).unwrap();
        // oracle: every 2-subset of Z/5 generates
        let mut expected = Vec::new();
        for a in 0..5i64 {
            for b in a + 1..5 {
                let u = IntMatrix::from_rows(&[vec![a, b]]);
                if is_generating(&u, &q).unwrap() {
                    expected.push(vec![a, b]);
                }
            }
        }
        assert_eq!(expected.len(), 10);
        let mut rng = stream_rng(3, 0);
        let draws = 100_000;
        let mut counts: BTreeMap<Vec<i64>, u64> = BTreeMap::new();
        for _ in 0..draws {
            let s = sample_generating_set(&q, 2, &mut rng).unwrap();
            *counts.entry(s.u.row(0).to_vec()).or_default() += 1;
        }
        assert_eq!(counts.keys().cloned().collect::<Vec<_>>(), expected);
        let e = draws as f64 / 10.0;
        let chi2: f64 = counts.values().map(|&c| (c as f64 - e).powi(2) / e).sum();
        // chi-square, 9 degrees of freedom, p = 0.01
        assert!(chi2 < 21.666, "chi2 = {chi2}");
    }

    #[test]
    fn restricted_sampler_respects_window() {
        let q = AbelianQuotient::scalar(1, 10).unwrap();
        let w = FnWindow(|p: &[Vec<f64>]| p.iter().map(|x| x[0]).fold(f64::INFINITY, f64::min) < 0.5);
        let mut rng = stream_rng(4, 0);
        for _ in 0..500 {
            let s = sample_restricted(&q, 2, &w, &mut rng).unwrap();
            assert!(s.elements().iter().any(|e| (0..5).contains(&e[0])));
        }
        let never = FnWindow(|_: &[Vec<f64>]| false);
        assert!(matches!(
            sample_restricted_with_cap(&q, 2, &never, 100, &mut rng),
            Err(CayleyError::EmptyWindow { draws: 100 })
        ));
        let z5sq = AbelianQuotient::scalar(2, 5).unwrap();
        assert_eq!(sample_restricted(&z5sq, 2, &FullWindow, &mut rng), Err(CayleyError::NotScalar));
    }

    #[test]
    fn restricted_acceptance_rate_matches_enumeration() {
        let k = 100i64;
        let q = AbelianQuotient::scalar(1, k).unwrap();
        let window = SortedBoxWindow::intervals(&[(0.0, 0.5), (0.0, 1.0)]);
        // exact fraction of generating pairs inside the window
        let (mut total, mut inside) = (0u64, 0u64);
        for a in 0..k {
            for b in a + 1..k {
                let u = IntMatrix::from_rows(&[vec![a, b]]);
                if is_generating(&u, &q).unwrap() {
                    total += 1;
                    if window.contains(&[vec![a as f64 / k as f64], vec![b as f64 / k as f64]]) {
                        inside += 1;
                    }
                }
            }
        }
        let exact = inside as f64 / total as f64;
        assert!((exact - 0.75).abs() < 0.05, "exact rate {exact}");
        let mut rng = stream_rng(5, 0);
        let trials = 10_000;
        let hits = (0..trials)
            .filter(|_| {
                let s = sample_generating_set(&q, 2, &mut rng).unwrap();
                window.contains(&s.torus_points().unwrap())
            })
            .count();
        let rate = hits as f64 / trials as f64;
        assert!((rate - exact).abs() < 0.02, "sampled {rate} vs exact {exact}");
    }

    fn brute_kernel(u: &[i64], k: i64, r: i64) -> Vec<(i64, i64)> {
        let mut out = Vec::new();
        for a in -r..=r {
            for b in -r..=r {
                if (u[0] * a + u[1] * b).rem_euclid(k) == 0 {
                    out.push((a, b));
                }
            }
        }
        out
    }

    #[test]
    fn kernel_lattice_examples() {
        let q = AbelianQuotient::scalar(1, 5).unwrap();
        let s = GeneratingSet::from_elements(&q, &[vec![1], vec![2]]).unwrap();
        let lat = kernel_of_generating_map(&s).unwrap();
        assert_eq!(lat.index, 5);
        assert!(lat.contains(&[1, 2]) && lat.contains(&[5, 0]));
        let brute = brute_kernel(&[1, 2], 5, 5);
        for a in -5..=5i64 {
            for b in -5..=5i64 {
                assert_eq!(lat.contains(&[a, b]), brute.contains(&(a, b)), "({a},{b})");
            }
        }

        let q = AbelianQuotient::scalar(2, 5).unwrap();
        let s = GeneratingSet::from_elements(&q, &[vec![1, 0], vec![0, 1]]).unwrap();
        let lat = kernel_of_generating_map(&s).unwrap();
        assert_eq!(lat.basis.h, IntMatrix::scalar(2, 5));

        let q = AbelianQuotient::scalar(1, 4).unwrap();
        let s = GeneratingSet::from_elements(&q, &[vec![1], vec![3]]).unwrap();
        let lat = kernel_of_generating_map(&s).unwrap();
        assert_eq!(lat.index, 4);
        assert!(lat.contains(&[1, 1]));
        let brute = brute_kernel(&[1, 3], 4, 5);
        for a in -5..=5i64 {
            for b in -5..=5i64 {
                assert_eq!(lat.contains(&[a, b]), brute.contains(&(a, b)));
            }
        }
    }

    #[test]
    fn kernel_divisors_are_padded_sigma_divisors() {
        let q = quotient_from_basis(&IntMatrix::diagonal(&[2, 6])).unwrap();
        let mut rng = stream_rng(6, 0);
        for m in 2..=4 {
            for _ in 0..20 {
                let s = sample_generating_set(&q, m, &mut rng).unwrap();
                let lat = kernel_of_generating_map(&s).unwrap();
                assert_eq!(lat.index, q.order);
                let mut expect = vec![1; m - 2];
                expect.extend([2, 6]);
                assert_eq!(lat.divisors, expect);
            }
        }
    }

    #[test]
    fn record_serializes_flat() {
        let q = AbelianQuotient::scalar(1, 5).unwrap();
        let s = GeneratingSet::from_elements(&q, &[vec![1], vec![2]]).unwrap();
        let lat = kernel_of_generating_map(&s).unwrap();
        let json = serde_json::to_value(KernelRecord::new(&s, &lat)).unwrap();
        assert_eq!(json["n"], 1);
        assert_eq!(json["m"], 2);
        assert_eq!(json["sigma_basis"], serde_json::json!([5]));
        assert_eq!(json["u"], serde_json::json!([1, 2]));
        assert_eq!(json["index"], 5);
        assert_eq!(json["lambda_basis"].as_array().unwrap().len(), 4);
    }
}
