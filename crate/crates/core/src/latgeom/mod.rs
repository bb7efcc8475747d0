//! Lattice functionals in the l1 geometry: torus distance, shortest positive
//! vector, covering radius and torus distance moments.
//!
//! The undirected gauge is the cross-polytope norm `sum |v_i|`. The directed
//! gauge is `sum v_i` on the non-negative orthant and infinite elsewhere.
//! Every query LLL-reduces the basis first and then enumerates exactly.

mod enumerate;
mod reduce;

pub use enumerate::{ReducedLattice, DEFAULT_NODE_BUDGET};

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cayley::IntegerLattice;

/// Largest supported dimension.
pub const MAX_DIM: usize = 8;

/// Added to certified upper bounds to absorb floating-point error.
const FP_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatgeomError {
    #[error("enumeration exceeded its budget after {nodes} nodes")]
    EnumerationBudgetExceeded { nodes: u64 },
    #[error("basis is singular")]
    Singular,
    #[error("dimension {m} outside 1..=8")]
    UnsupportedDimension { m: usize },
    #[error("expected a point of dimension {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}

/// Which unit ball defines the distance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormBall {
    /// Open cross-polytope `{sum |v_i| < 1}`.
    Undirected,
    /// Open simplex `{v_i > 0, sum v_i < 1}`.
    Directed,
}

impl NormBall {
    pub fn from_directed(directed: bool) -> Self {
        if directed {
            NormBall::Directed
        } else {
            NormBall::Undirected
        }
    }

    pub fn is_directed(self) -> bool {
        self == NormBall::Directed
    }
}

/// A full-rank lattice in `R^m`, basis vectors as columns.
#[derive(Clone, Debug, PartialEq)]
pub struct RealLattice {
    basis: DMatrix<f64>,
}

impl RealLattice {
    pub fn new(basis: DMatrix<f64>) -> Result<Self, LatgeomError> {
        if !basis.is_square() || basis.nrows() == 0 || basis.nrows() > MAX_DIM {
            return Err(LatgeomError::UnsupportedDimension { m: basis.nrows() });
        }
        if !basis.iter().all(|x| x.is_finite()) || basis.determinant() == 0.0 {
            return Err(LatgeomError::Singular);
        }
        Ok(Self { basis })
    }

    pub fn from_columns(cols: &[Vec<f64>]) -> Result<Self, LatgeomError> {
        let m = cols.len();
        if cols.iter().any(|c| c.len() != m) {
            return Err(LatgeomError::UnsupportedDimension { m });
        }
        Self::new(DMatrix::from_fn(m, m, |i, j| cols[j][i]))
    }

    pub fn integer_lattice(l: &IntegerLattice) -> Self {
        let h = &l.basis.h;
        Self { basis: DMatrix::from_fn(h.rows(), h.cols(), |i, j| h[(i, j)] as f64) }
    }

    pub fn standard(m: usize) -> Self {
        Self { basis: DMatrix::identity(m, m) }
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        self.basis.column_iter().map(|c| c.iter().copied().collect()).collect()
    }

    pub fn covolume(&self) -> f64 {
        self.basis.determinant().abs()
    }

    pub fn scaled(&self, t: f64) -> Self {
        Self { basis: &self.basis * t }
    }

    /// The same lattice scaled to covolume 1.
    pub fn normalized(&self) -> Self {
        self.scaled(self.covolume().powf(-1.0 / self.dim() as f64))
    }

    pub fn reduce(&self) -> Result<ReducedLattice, LatgeomError> {
        ReducedLattice::new(self)
    }
}

/// `|Lambda|^(-1/m) Lambda` for an integer lattice, using the exact index.
pub fn normalize(l: &IntegerLattice) -> RealLattice {
    RealLattice::integer_lattice(l).scaled((l.index as f64).powf(-1.0 / l.m as f64))
}

/// Certified enclosure `lower <= value <= upper`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

/// Minimum of the gauge of `x + v` over lattice vectors `v`.
pub fn torus_distance(l: &RealLattice, x: &[f64], ball: NormBall) -> Result<f64, LatgeomError> {
    l.reduce()?.torus_distance(x, ball)
}

/// Minimum of `sum v_i` over nonzero lattice vectors `v >= 0`.
pub fn shortest_positive(l: &RealLattice) -> Result<f64, LatgeomError> {
    l.reduce()?.shortest_positive_vector().map(|(d, _)| d)
}

pub fn covering_radius(l: &RealLattice, ball: NormBall, grid_per_axis: usize) -> Result<Interval, LatgeomError> {
    l.reduce()?.covering_radius(ball, grid_per_axis)
}

pub fn torus_moment<R: Rng + ?Sized>(
    l: &RealLattice,
    alpha: f64,
    ball: NormBall,
    samples: usize,
    rng: &mut R,
) -> Result<Estimate, LatgeomError> {
    l.reduce()?.torus_moment(alpha, ball, samples, rng)
}

impl ReducedLattice {
    /// Certified interval for `sup_x d(x, Lambda)`.
    ///
    /// The fundamental cell of the reduced basis is cut into `g^m` cells. In
    /// the undirected case the distance is 1-Lipschitz in l1, so its value at
    /// a cell centre is within half the cell's l1 diameter of every value in
    /// the cell. In the directed case `d(x) <= d(p) + sum (x - p)` for
    /// `x >= p`, so each cell is evaluated at its componentwise lower corner
    /// `p = centre - e`.
    pub fn covering_radius(&self, ball: NormBall, grid_per_axis: usize) -> Result<Interval, LatgeomError> {
        if grid_per_axis < 2 {
            return Err(LatgeomError::InvalidArgument("grid_per_axis must be at least 2"));
        }
        let m = self.dim();
        let g = grid_per_axis;
        let cols = self.basis_columns();
        let l1_sum: f64 = cols.iter().map(|c| c.iter().map(|v| v.abs()).sum::<f64>()).sum();
        let half_extent: Vec<f64> = (0..m)
            .map(|k| 0.5 * cols.iter().map(|c| c[k].abs()).sum::<f64>() / g as f64)
            .collect();
        let (eps, shift) = match ball {
            NormBall::Undirected => (0.5 * l1_sum / g as f64, vec![0.0; m]),
            NormBall::Directed => (l1_sum / g as f64, half_extent),
        };
        let total = (g as u64).checked_pow(m as u32).ok_or(LatgeomError::InvalidArgument("grid too large"))?;
        let lower = (0..total)
            .into_par_iter()
            .map(|mut idx| {
                let mut t = vec![0.0; m];
                for tj in t.iter_mut() {
                    *tj = ((idx % g as u64) as f64 + 0.5) / g as f64;
                    idx /= g as u64;
                }
                let mut x = self.point_at(&t);
                for (xk, sk) in x.iter_mut().zip(&shift) {
                    *xk -= sk;
                }
                self.torus_distance(&x, ball)
            })
            .try_reduce(|| f64::NEG_INFINITY, |a, b| Ok(a.max(b)))?;
        Ok(Interval { lower, upper: lower + eps + FP_SLACK })
    }

    /// `(E d(x)^alpha)^(1/alpha)` for `x` uniform on the torus.
    ///
    /// The standard error is the delta-method image of the standard error
    /// of the mean of `d^alpha`.
    pub fn torus_moment<R: Rng + ?Sized>(
        &self,
        alpha: f64,
        ball: NormBall,
        samples: usize,
        rng: &mut R,
    ) -> Result<Estimate, LatgeomError> {
        if !(alpha > 0.0) {
            return Err(LatgeomError::InvalidArgument("alpha must be positive"));
        }
        if samples < 100 {
            return Err(LatgeomError::InvalidArgument("at least 100 samples required"));
        }
        let m = self.dim();
        let mut t = vec![0.0; m];
        let (mut sum, mut sum_sq) = (0.0, 0.0);
        for _ in 0..samples {
            for tj in t.iter_mut() {
                *tj = rng.random::<f64>();
            }
            let d = self.torus_distance(&self.point_at(&t), ball)?;
            let v = if alpha == 1.0 { d } else { d.powf(alpha) };
            sum += v;
            sum_sq += v * v;
        }
        let n = samples as f64;
        let mean = sum / n;
        let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
        let se_mean = (var / n).sqrt();
        let value = mean.powf(1.0 / alpha);
        let stderr = if mean > 0.0 { value / (alpha * mean) * se_mean } else { 0.0 };
        Ok(Estimate { value, stderr })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cayley::{kernel_of_generating_map, AbelianQuotient, GeneratingSet};
    use crate::rng::stream_rng;
    use approx::assert_abs_diff_eq;

    fn z2() -> RealLattice {
        RealLattice::standard(2)
    }

    fn kernel(u: &[i64], k: i64) -> IntegerLattice {
        let q = AbelianQuotient::scalar(1, k).unwrap();
        let elems: Vec<Vec<i64>> = u.iter().map(|&x| vec![x]).collect();
        kernel_of_generating_map(&GeneratingSet::from_elements(&q, &elems).unwrap()).unwrap()
    }

    /// Exhaustive minimum over lattice vectors with small integer coefficients.
    fn brute_distance(l: &RealLattice, x: &[f64], directed: bool, range: i64) -> f64 {
        let cols = l.columns();
        let mut best = f64::INFINITY;
        for a in -range..=range {
            for b in -range..=range {
                let w: Vec<f64> = (0..2).map(|k| x[k] + a as f64 * cols[0][k] + b as f64 * cols[1][k]).collect();
                if let Some(v) = enumerate::gauge(&w, directed) {
                    best = best.min(v);
                }
            }
        }
        best
    }

    #[test]
    fn normalization() {
        let n = normalize(&IntegerLattice::scalar(2, 5).unwrap());
        assert_abs_diff_eq!(n.covolume(), 1.0, epsilon = 1e-12);
        // |5Z^2| = 25, so the normalization is Z^2 itself
        assert_abs_diff_eq!(n.basis()[(0, 0)], 1.0, epsilon = 1e-12);
        assert_eq!(normalize(&IntegerLattice::scalar(3, 1).unwrap()), RealLattice::standard(3));
        assert_abs_diff_eq!(normalize(&kernel(&[1, 2], 5)).covolume(), 1.0, epsilon = 1e-12);
        let skew = RealLattice::from_columns(&[vec![3.0, 1.0], vec![0.5, 2.0]]).unwrap();
        assert_abs_diff_eq!(skew.normalized().covolume(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn singular_and_oversized_rejected() {
        assert_eq!(
            RealLattice::from_columns(&[vec![1.0, 2.0], vec![2.0, 4.0]]),
            Err(LatgeomError::Singular)
        );
        assert!(RealLattice::new(DMatrix::identity(9, 9)).is_err());
    }

    #[test]
    fn shortest_positive_examples() {
        assert_abs_diff_eq!(shortest_positive(&z2()).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(shortest_positive(&RealLattice::standard(4)).unwrap(), 1.0, epsilon = 1e-12);
        let k = RealLattice::integer_lattice(&kernel(&[1, 2], 5));
        let (d, v) = k.reduce().unwrap().shortest_positive_vector().unwrap();
        assert_abs_diff_eq!(d, 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(v[0], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(v[1], 2.0, epsilon = 1e-9);
        // brute force over the box [0,5]^2
        let lat = kernel(&[1, 2], 5);
        let brute = (0..=5i64)
            .flat_map(|a| (0..=5i64).map(move |b| (a, b)))
            .filter(|&(a, b)| (a, b) != (0, 0) && lat.contains(&[a, b]))
            .map(|(a, b)| a + b)
            .min()
            .unwrap();
        assert_eq!(brute, 3);
        assert_abs_diff_eq!(shortest_positive(&z2().scaled(2.5)).unwrap(), 2.5, epsilon = 1e-12);
    }

    #[test]
    fn thin_lattices_stay_within_budget() {
        // shortest vector of length 8.5e-4 pointing out of the positive quadrant
        let l = RealLattice::from_columns(&[
            vec![-9.452716983689959e-5, 0.0008435162959574113],
            vec![-1170.81035906709, -131.2044216764422],
        ])
        .unwrap();
        let r = l.reduce().unwrap().with_budget(1000);
        let (d, v) = r.shortest_positive_vector().unwrap();
        assert_abs_diff_eq!(d, 1185.5140161102433, epsilon = 1e-6);
        assert!(v.iter().all(|&c| c >= 0.0));
        // scan every lattice point within 2600 of the target
        let cols = l.columns();
        let x = [0.3, 500.0];
        let brute = |directed: bool, skip_zero: bool, at: [f64; 2]| {
            let mut best = f64::INFINITY;
            for z1 in -3i64..=3 {
                for z0 in -3_000_000i64..=3_000_000 {
                    if skip_zero && z0 == 0 && z1 == 0 {
                        continue;
                    }
                    let w: Vec<f64> =
                        (0..2).map(|k| at[k] + z0 as f64 * cols[0][k] + z1 as f64 * cols[1][k]).collect();
                    if let Some(g) = enumerate::gauge(&w, directed) {
                        best = best.min(g);
                    }
                }
            }
            best
        };
        assert_abs_diff_eq!(d, brute(true, true, [0.0, 0.0]), epsilon = 1e-6);
        for directed in [false, true] {
            let fast = r.torus_distance(&x, NormBall::from_directed(directed)).unwrap();
            assert_abs_diff_eq!(fast, brute(directed, false, x), epsilon = 1e-6);
        }
    }

    #[test]
    fn torus_distance_examples() {
        assert_abs_diff_eq!(torus_distance(&z2(), &[0.5, 0.5], NormBall::Undirected).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(torus_distance(&z2(), &[0.3, 0.4], NormBall::Directed).unwrap(), 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(torus_distance(&z2(), &[-0.2, -0.2], NormBall::Directed).unwrap(), 1.6, epsilon = 1e-12);
        assert_abs_diff_eq!(brute_distance(&z2(), &[-0.2, -0.2], true, 2), 1.6, epsilon = 1e-12);
        assert_abs_diff_eq!(torus_distance(&z2(), &[3.0, -7.0], NormBall::Directed).unwrap(), 0.0, epsilon = 1e-12);
        assert!(torus_distance(&z2(), &[0.1], NormBall::Directed).is_err());
    }

    #[test]
    fn torus_distance_matches_brute_force_on_skewed_lattices() {
        let mut rng = stream_rng(7, 0);
        for _ in 0..200 {
            let a: f64 = rng.random_range(0.3..3.0);
            let c: f64 = rng.random_range(-2.0..2.0);
            let d: f64 = rng.random_range(0.3..3.0);
            let l = RealLattice::from_columns(&[vec![a, c * 0.3], vec![c, d]]).unwrap();
            // keep the brute-force coefficient box large enough
            if l.covolume() < 0.3 {
                continue;
            }
            let x = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
            for directed in [false, true] {
                let fast = torus_distance(&l, &x, NormBall::from_directed(directed)).unwrap();
                let slow = brute_distance(&l, &x, directed, 40);
                assert!((fast - slow).abs() < 1e-9, "{fast} vs {slow} for {l:?} at {x:?}");
            }
        }
    }

    #[test]
    fn covering_radius_examples() {
        let u = covering_radius(&z2(), NormBall::Undirected, 64).unwrap();
        assert!(u.contains(1.0), "{u:?}");
        let d = covering_radius(&z2(), NormBall::Directed, 64).unwrap();
        assert!(d.contains(2.0), "{d:?}");
        assert!(d.lower < 2.0);
        let sep = RealLattice::from_columns(&[vec![2.0, 0.0], vec![0.0, 0.5]]).unwrap();
        let s = covering_radius(&sep, NormBall::Undirected, 64).unwrap();
        assert!(s.contains(1.25), "{s:?}");
        assert!(s.width() < 0.05);
        assert!(covering_radius(&z2(), NormBall::Undirected, 1).is_err());
    }

    #[test]
    fn covering_radius_three_dimensional() {
        let u = covering_radius(&RealLattice::standard(3), NormBall::Undirected, 24).unwrap();
        assert!(u.contains(1.5), "{u:?}");
        let d = covering_radius(&RealLattice::standard(3), NormBall::Directed, 24).unwrap();
        assert!(d.contains(3.0), "{d:?}");
    }

    #[test]
    fn refinement_tightens_undirected_interval() {
        let l = RealLattice::from_columns(&[vec![1.3, 0.2], vec![-0.4, 0.9]]).unwrap();
        let coarse = covering_radius(&l, NormBall::Undirected, 8).unwrap();
        let fine = covering_radius(&l, NormBall::Undirected, 24).unwrap();
        assert!(fine.lower >= coarse.lower - 1e-12);
        assert!(fine.lower <= coarse.upper && coarse.lower <= fine.upper);
        assert!(fine.width() < coarse.width());
    }

    #[test]
    fn torus_moment_analytic_values() {
        let mut rng = stream_rng(11, 0);
        let cases = [
            (NormBall::Undirected, 1.0, 0.5),
            (NormBall::Directed, 1.0, 1.0),
            (NormBall::Directed, 2.0, (7.0f64 / 6.0).sqrt()),
        ];
        for (ball, alpha, exact) in cases {
            let e = torus_moment(&z2(), alpha, ball, 20_000, &mut rng).unwrap();
            assert!(e.stderr > 0.0);
            assert!((e.value - exact).abs() < 4.0 * e.stderr, "{ball:?} {alpha}: {e:?} vs {exact}");
        }
        assert!(torus_moment(&z2(), 0.0, NormBall::Directed, 1000, &mut rng).is_err());
        assert!(torus_moment(&z2(), 1.0, NormBall::Directed, 10, &mut rng).is_err());
    }

    #[test]
    fn integer_results_are_integral() {
        for (u, k) in [(vec![1, 7], 101), (vec![3, 5, 11], 997), (vec![2, 9], 1000)] {
            let lat = kernel(&u, k);
            let d = shortest_positive(&RealLattice::integer_lattice(&lat)).unwrap();
            assert!((d - d.round()).abs() < 1e-9, "{d}");
        }
    }
}
