//! Empirical distributions, the two-sample Kolmogorov-Smirnov statistic and
//! summary statistics.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatsError {
    #[error("empirical distribution needs at least one sample")]
    Empty,
    #[error("sample {index} is not finite")]
    NonFinite { index: usize },
}

/// Sorted, non-empty list of finite samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct EmpiricalDistribution {
    samples: Vec<f64>,
}

impl TryFrom<Vec<f64>> for EmpiricalDistribution {
    type Error = StatsError;

    fn try_from(v: Vec<f64>) -> Result<Self, StatsError> {
        Self::new(v)
    }
}

impl From<EmpiricalDistribution> for Vec<f64> {
    fn from(d: EmpiricalDistribution) -> Self {
        d.samples
    }
}

impl EmpiricalDistribution {
    pub fn new(mut samples: Vec<f64>) -> Result<Self, StatsError> {
        if samples.is_empty() {
            return Err(StatsError::Empty);
        }
        if let Some(index) = samples.iter().position(|x| !x.is_finite()) {
            return Err(StatsError::NonFinite { index });
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `#{s <= t} / n`.
    pub fn ecdf(&self, t: f64) -> f64 {
        self.samples.partition_point(|&s| s <= t) as f64 / self.len() as f64
    }

    /// Linear interpolation between order statistics at `(n - 1) q`.
    pub fn quantile(&self, q: f64) -> f64 {
        let q = q.clamp(0.0, 1.0);
        let h = (self.len() - 1) as f64 * q;
        let lo = h.floor() as usize;
        let hi = (lo + 1).min(self.len() - 1);
        let frac = h - lo as f64;
        self.samples[lo] + frac * (self.samples[hi] - self.samples[lo])
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.len() as f64
    }

    pub fn summary(&self) -> Summary {
        Summary {
            n: self.len(),
            mean: self.mean(),
            min: self.samples[0],
            q05: self.quantile(0.05),
            q25: self.quantile(0.25),
            q50: self.quantile(0.5),
            q75: self.quantile(0.75),
            q95: self.quantile(0.95),
            max: self.samples[self.len() - 1],
        }
    }

    /// One sample per line, ascending.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for s in &self.samples {
            writeln!(w, "{s}")?;
        }
        Ok(())
    }
}

pub fn ecdf(d: &EmpiricalDistribution, t: f64) -> f64 {
    d.ecdf(t)
}

pub fn summary(d: &EmpiricalDistribution) -> Summary {
    d.summary()
}

/// `sup_t |F_a(t) - F_b(t)|`, by a merge sweep over both sorted samples.
pub fn ks_two_sample(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> f64 {
    let (x, y) = (a.samples(), b.samples());
    let (n, m) = (x.len() as f64, y.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < x.len() && j < y.len() {
        let t = x[i].min(y[j]);
        while i < x.len() && x[i] <= t {
            i += 1;
        }
        while j < y.len() && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    // once one side is exhausted the gap only shrinks toward zero
    d
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub n: usize,
    pub mean: f64,
    pub min: f64,
    pub q05: f64,
    pub q25: f64,
    pub q50: f64,
    pub q75: f64,
    pub q95: f64,
    pub max: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dist(v: &[f64]) -> EmpiricalDistribution {
        EmpiricalDistribution::new(v.to_vec()).unwrap()
    }

    #[test]
    fn ecdf_examples() {
        let d = dist(&[3.0, 1.0, 2.0]);
        assert_eq!(d.samples(), &[1.0, 2.0, 3.0]);
        assert!((d.ecdf(2.0) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(d.ecdf(0.5), 0.0);
        assert_eq!(d.ecdf(3.0), 1.0);
        assert_eq!(ecdf(&d, 2.5), d.ecdf(2.5));
    }

    #[test]
    fn ks_examples() {
        let a = dist(&[1.0, 2.0, 3.0]);
        assert_eq!(ks_two_sample(&a, &a), 0.0);
        assert_eq!(ks_two_sample(&a, &dist(&[4.0, 5.0])), 1.0);
        assert_eq!(ks_two_sample(&dist(&[4.0, 5.0]), &a), 1.0);
        let b = dist(&[1.0, 2.0, 3.0, 4.0]);
        assert!((ks_two_sample(&a, &b) - 0.25).abs() < 1e-15);
    }

    /// Sup over every sample point of the ECDF gap, evaluated directly.
    fn ks_brute(a: &EmpiricalDistribution, b: &EmpiricalDistribution) -> f64 {
        a.samples()
            .iter()
            .chain(b.samples())
            .map(|&t| (a.ecdf(t) - b.ecdf(t)).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn ks_matches_direct_evaluation_with_ties() {
        let a = dist(&[1.0, 1.0, 2.0, 2.0, 2.0, 5.0, 7.0]);
        let b = dist(&[0.0, 1.0, 2.0, 3.0, 3.0, 7.0]);
        assert!((ks_two_sample(&a, &b) - ks_brute(&a, &b)).abs() < 1e-15);
    }

    #[test]
    fn summary_examples() {
        let c = dist(&[2.5; 4]).summary();
        assert_eq!((c.mean, c.min, c.max, c.q50), (2.5, 2.5, 2.5, 2.5));
        assert_eq!(dist(&[0.0, 1.0]).summary().mean, 0.5);
        let hundred: Vec<f64> = (1..=100).map(f64::from).collect();
        let s = dist(&hundred).summary();
        assert_eq!(s.q50, 50.5);
        assert_eq!(s.n, 100);
        assert!((s.q05 - 5.95).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(EmpiricalDistribution::new(vec![]), Err(StatsError::Empty));
        assert_eq!(
            EmpiricalDistribution::new(vec![1.0, f64::NAN]),
            Err(StatsError::NonFinite { index: 1 })
        );
    }

    #[test]
    fn csv_and_json() {
        let d = dist(&[0.5, 0.25]);
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0.25\n0.5\n");
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(json, "[0.25,0.5]");
        let back: EmpiricalDistribution = serde_json::from_str("[3.0,1.0]").unwrap();
        assert_eq!(back.samples(), &[1.0, 3.0]);
        assert!(serde_json::from_str::<EmpiricalDistribution>("[]").is_err());
    }
}
