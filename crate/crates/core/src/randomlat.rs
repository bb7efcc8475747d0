//! Random unimodular lattices: exact Haar draws for `m = 2` and Hecke-point
//! draws (normalized random index-`p` sublattices of `Z^m`) for any `m`.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cayley::{CayleyError, IntegerLattice};
use crate::intlinalg::IntMatrix;
use crate::latgeom::{normalize, LatgeomError, NormBall, RealLattice};
use crate::rng::{domain, stream_rng};
use crate::stats::{EmpiricalDistribution, StatsError};

/// Default Hecke prime.
pub const DEFAULT_HECKE_PRIME: u64 = 10_007;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RandomLatError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("dimension {m} unsupported by this sampler")]
    UnsupportedDimension { m: usize },
    #[error("{functional:?} is not defined for the {ball:?} ball")]
    IllegalCombination { functional: Functional, ball: NormBall },
    #[error(transparent)]
    Latgeom(#[from] LatgeomError),
    #[error(transparent)]
    Cayley(#[from] CayleyError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// One Haar-random unimodular lattice in `R^2`, with the number of
/// rejection-step attempts it took.
///
/// `tau = x + iy` is drawn from `(3/pi) y^-2 dx dy` on the standard
/// fundamental domain by rejection from the half-strip `y >= sqrt(3)/2`, and
/// the basis `y^(-1/2) (1, 0), y^(-1/2) (x, y)` is then rotated by a uniform
/// angle, which supplies the compact factor of the Iwasawa decomposition.
pub fn sample_x2_exact_counted<R: Rng + ?Sized>(rng: &mut R) -> (RealLattice, u32) {
    let y_min = 3f64.sqrt() / 2.0;
    let mut attempts = 0;
    let (x, y) = loop {
        attempts += 1;
        let x = rng.random::<f64>() - 0.5;
        let u = 1.0 - rng.random::<f64>();
        let y = y_min / u;
        if x * x + y * y >= 1.0 {
            break (x, y);
        }
    };
    let s = y.sqrt().recip();
    let theta = 2.0 * PI * rng.random::<f64>();
    let (sin, cos) = theta.sin_cos();
    let rot = |a: f64, b: f64| vec![cos * a - sin * b, sin * a + cos * b];
    let lattice = RealLattice::from_columns(&[rot(s, 0.0), rot(s * x, s * y)])
        .expect("fundamental-domain basis is nonsingular");
    (lattice, attempts)
}

pub fn sample_x2_exact<R: Rng + ?Sized>(rng: &mut R) -> RealLattice {
    sample_x2_exact_counted(rng).0
}

/// Uniform index-`p` sublattice of `Z^m`: the vectors whose reduction mod
/// `p` is orthogonal to a uniform point of `P^(m-1)(F_p)`.
pub fn hecke_sublattice<R: Rng + ?Sized>(m: usize, p: u64, rng: &mut R) -> Result<IntegerLattice, RandomLatError> {
    if !is_prime(p) {
        return Err(RandomLatError::NotPrime(p));
    }
    if m < 2 {
        return Err(RandomLatError::UnsupportedDimension { m });
    }
    let p = p as i64;
    let a = loop {
        let a: Vec<i64> = (0..m).map(|_| rng.random_range(0..p)).collect();
        if a.iter().any(|&c| c != 0) {
            break a;
        }
    };
    let j = a.iter().position(|&c| c != 0).expect("nonzero");
    let inv = mod_inverse(a[j], p);
    let line: Vec<i64> = a.iter().map(|&c| c * inv % p).collect();
    let mut cols = Vec::with_capacity(m);
    for i in 0..m {
        let mut v = vec![0; m];
        if i == j {
            v[j] = p;
        } else {
            v[i] = 1;
            v[j] = (p - line[i]) % p;
        }
        cols.push(v);
    }
    Ok(IntegerLattice::from_generators(&IntMatrix::from_cols(&cols))?)
}

fn mod_inverse(a: i64, p: i64) -> i64 {
    let (mut r0, mut r1, mut t0, mut t1) = (p, a.rem_euclid(p), 0i64, 1i64);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    t0.rem_euclid(p)
}

/// The normalization of [`hecke_sublattice`].
pub fn sample_hecke<R: Rng + ?Sized>(m: usize, p: u64, rng: &mut R) -> Result<RealLattice, RandomLatError> {
    Ok(normalize(&hecke_sublattice(m, p, rng)?))
}

/// A lattice functional evaluated on reference lattices.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Functional {
    CoveringRadius,
    Moment { alpha: f64 },
    ShortestPositive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ReferenceMethod {
    ExactM2,
    Hecke { p: u64 },
}

/// Accuracy knobs for functional evaluation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalOptions {
    pub grid_per_axis: usize,
    pub mc_samples: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        Self { grid_per_axis: 48, mc_samples: 10_000 }
    }
}

/// A functional value with its numerical uncertainty: the certified interval
/// width for covering radii, the standard error for moments, zero otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: f64,
    pub uncertainty: f64,
}

pub fn check_combination(functional: Functional, ball: NormBall) -> Result<(), RandomLatError> {
    match (functional, ball) {
        (Functional::ShortestPositive, NormBall::Undirected) => {
            Err(RandomLatError::IllegalCombination { functional, ball })
        }
        (Functional::Moment { alpha }, _) if !(alpha > 0.0) => {
            Err(RandomLatError::IllegalCombination { functional, ball })
        }
        _ => Ok(()),
    }
}

pub fn evaluate<R: Rng + ?Sized>(
    l: &RealLattice,
    functional: Functional,
    ball: NormBall,
    opts: &EvalOptions,
    rng: &mut R,
) -> Result<Evaluation, RandomLatError> {
    check_combination(functional, ball)?;
    let reduced = l.reduce()?;
    Ok(match functional {
        Functional::CoveringRadius => {
            let iv = reduced.covering_radius(ball, opts.grid_per_axis)?;
            Evaluation { value: iv.midpoint(), uncertainty: iv.width() }
        }
        Functional::Moment { alpha } => {
            let e = reduced.torus_moment(alpha, ball, opts.mc_samples, rng)?;
            Evaluation { value: e.value, uncertainty: e.stderr }
        }
        Functional::ShortestPositive => {
            Evaluation { value: reduced.shortest_positive_vector()?.0, uncertainty: 0.0 }
        }
    })
}

/// Draws of a functional on reference lattices, in draw order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSampleSet {
    pub m: usize,
    pub method: ReferenceMethod,
    pub functional: Functional,
    pub ball: NormBall,
    pub samples: Vec<f64>,
    pub uncertainty: Vec<f64>,
}

impl ReferenceSampleSet {
    pub fn distribution(&self) -> Result<EmpiricalDistribution, StatsError> {
        EmpiricalDistribution::new(self.samples.clone())
    }
}

pub fn sample_reference_lattice<R: Rng + ?Sized>(
    m: usize,
    method: ReferenceMethod,
    rng: &mut R,
) -> Result<RealLattice, RandomLatError> {
    match method {
        ReferenceMethod::ExactM2 if m == 2 => Ok(sample_x2_exact(rng)),
        ReferenceMethod::ExactM2 => Err(RandomLatError::UnsupportedDimension { m }),
        ReferenceMethod::Hecke { p } => sample_hecke(m, p, rng),
    }
}

/// `n_samples` independent values of the functional on reference lattices.
///
/// Draw `i` uses its own stream `domain::REFERENCE + stream_offset + i`, so
/// the result does not depend on the thread count.
#[allow(clippy::too_many_arguments)]
pub fn reference_distribution(
    m: usize,
    functional: Functional,
    ball: NormBall,
    n_samples: usize,
    method: ReferenceMethod,
    opts: &EvalOptions,
    seed: u64,
    stream_offset: u64,
) -> Result<ReferenceSampleSet, RandomLatError> {
    check_combination(functional, ball)?;
    let evals = (0..n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, domain::REFERENCE + stream_offset + i);
            let l = sample_reference_lattice(m, method, &mut rng)?;
            evaluate(&l, functional, ball, opts, &mut rng)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ReferenceSampleSet {
        m,
        method,
        functional,
        ball,
        samples: evals.iter().map(|e| e.value).collect(),
        uncertainty: evals.iter().map(|e| e.uncertainty).collect(),
    })
}
