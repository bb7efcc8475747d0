//! Experiment orchestration: graph ensembles, reference distributions,
//! comparison reports, isomorphism cross-checks and `k` sweeps.
//!
//! Every random draw comes from its own stream `(seed, domain + index)`, and
//! results are gathered by index, so outputs are identical for any thread
//! count.

use std::io::{self, Write};
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cayley::{
    divergence_parameter, kernel_of_generating_map, quotient_from_basis, sample_generating_set_with_cap,
    sample_restricted_with_cap, AbelianQuotient, CayleyError, GeneratingSet, SortedBoxWindow,
};
use crate::graphmetrics::{
    diameter, direct_cayley_profile_with_budget, direct_girth, distance_profile_with_budget, girth_directed_with_budget,
    moment, GraphError,
};
use crate::intlinalg::IntMatrix;
use crate::latgeom::NormBall;
use crate::randomlat::{
    is_prime, reference_distribution, EvalOptions, Functional, RandomLatError, ReferenceMethod, ReferenceSampleSet,
};
use crate::rng::{domain, stream_rng, GENERATOR_NAME};
use crate::stats::{ks_two_sample, EmpiricalDistribution, StatsError, Summary};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("no ensemble member succeeded ({failures} failures)")]
    NoSuccessfulSamples { failures: usize },
    #[error(transparent)]
    Cayley(#[from] CayleyError),
    #[error(transparent)]
    RandomLat(#[from] RandomLatError),
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Graph parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XiKind {
    Diameter,
    Moment,
    Girth,
}

impl std::str::FromStr for XiKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "diameter" => Ok(XiKind::Diameter),
            "moment" => Ok(XiKind::Moment),
            "girth" => Ok(XiKind::Girth),
            other => Err(format!("unknown xi `{other}` (expected diameter, moment or girth)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceConfig {
    pub method: ReferenceMethod,
    pub n_samples: usize,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        Self { method: ReferenceMethod::ExactM2, n_samples: 2000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub m: usize,
    /// `Sigma = k Z^n`; exclusive with `sigma`.
    pub k: Option<i64>,
    /// Explicit basis of `Sigma`, given as rows.
    pub sigma: Option<Vec<Vec<i64>>>,
    pub xi: XiKind,
    pub alpha: f64,
    pub directed: bool,
    pub ensemble_size: usize,
    pub reference: ReferenceConfig,
    pub window: Option<SortedBoxWindow>,
    pub seed: u64,
    pub grid_per_axis: usize,
    pub mc_samples: usize,
    pub ks_threshold: f64,
    pub memory_budget: u64,
    pub rejection_cap: u64,
    /// Values of `k` for the sweep subcommand.
    pub sweep_ks: Vec<i64>,
    pub out: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 1,
            m: 2,
            k: Some(10_007),
            sigma: None,
            xi: XiKind::Diameter,
            alpha: 1.0,
            directed: false,
            ensemble_size: 500,
            reference: ReferenceConfig::default(),
            window: None,
            seed: 0,
            grid_per_axis: 48,
            mc_samples: 10_000,
            ks_threshold: 0.10,
            memory_budget: crate::graphmetrics::DEFAULT_MEMORY_BUDGET,
            rejection_cap: crate::cayley::DEFAULT_REJECTION_CAP,
            sweep_ks: vec![1_009, 10_007, 100_003],
            out: PathBuf::from("out"),
        }
    }
}

fn invalid<T>(msg: impl Into<String>) -> Result<T, ExperimentError> {
    Err(ExperimentError::Config(msg.into()))
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.n < 1 {
            return invalid("n must be at least 1");
        }
        if self.m < 2 || self.m < self.n {
            return invalid(format!("need m >= n and m >= 2 (n = {}, m = {})", self.n, self.m));
        }
        if self.m > crate::latgeom::MAX_DIM {
            return invalid(format!("m = {} exceeds {}", self.m, crate::latgeom::MAX_DIM));
        }
        match (&self.k, &self.sigma) {
            (Some(_), Some(_)) => return invalid("give either k or sigma, not both"),
            (None, None) => return invalid("one of k or sigma is required"),
            (Some(k), None) if *k < 1 => return invalid("k must be positive"),
            (None, Some(rows)) if rows.len() != self.n || rows.iter().any(|r| r.len() != self.n) => {
                return invalid("sigma must be an n x n matrix")
            }
            _ => {}
        }
        if self.xi == XiKind::Girth && !self.directed {
            return invalid("girth is only defined for the directed graph");
        }
        if self.xi == XiKind::Moment && !(self.alpha > 0.0) {
            return invalid("alpha must be positive");
        }
        if let Some(w) = &self.window {
            if self.m <= self.n || self.k.is_none() {
                return invalid("a window needs m > n and a scalar sigma");
            }
            if w.points() != self.m || w.dim() != self.n || w.upper.len() != self.m {
                return invalid("window must bound m points of dimension n");
            }
        }
        if self.ensemble_size == 0 {
            return invalid("ensemble_size must be positive");
        }
        if self.grid_per_axis < 2 {
            return invalid("grid_per_axis must be at least 2");
        }
        if self.mc_samples < 100 {
            return invalid("mc_samples must be at least 100");
        }
        if self.reference.n_samples == 0 {
            return invalid("reference.n_samples must be positive");
        }
        if let ReferenceMethod::Hecke { p } = self.reference.method {
            if !is_prime(p) {
                return invalid(format!("hecke prime {p} is not prime"));
            }
        }
        if self.sweep_ks.iter().any(|&k| k < 1) {
            return invalid("sweep_ks must be positive");
        }
        Ok(())
    }

    /// [`validate`](Self::validate) plus the constraints of the reference sampler.
    pub fn validate_reference(&self) -> Result<(), ExperimentError> {
        self.validate()?;
        if self.reference.method == ReferenceMethod::ExactM2 && self.m != 2 {
            return invalid("exact_m2 reference requires m = 2");
        }
        Ok(())
    }

    pub fn quotient(&self) -> Result<AbelianQuotient, ExperimentError> {
        Ok(match (&self.k, &self.sigma) {
            (Some(k), _) => AbelianQuotient::scalar(self.n, *k)?,
            (None, Some(rows)) => quotient_from_basis(&IntMatrix::from_rows(rows))?,
            (None, None) => return invalid("one of k or sigma is required"),
        })
    }

    pub fn functional(&self) -> Functional {
        match self.xi {
            XiKind::Diameter => Functional::CoveringRadius,
            XiKind::Moment => Functional::Moment { alpha: self.alpha },
            XiKind::Girth => Functional::ShortestPositive,
        }
    }

    pub fn ball(&self) -> NormBall {
        NormBall::from_directed(self.directed)
    }

    pub fn eval_options(&self) -> EvalOptions {
        EvalOptions { grid_per_axis: self.grid_per_axis, mc_samples: self.mc_samples }
    }

    /// Conditions that are legal but outside the limit theorems.
    pub fn warnings(&self) -> Result<Vec<String>, ExperimentError> {
        let mut out = Vec::new();
        let q = self.quotient()?;
        if self.m == q.n && divergence_parameter(&q, self.m)? == 1 {
            out.push(format!(
                "divergence parameter is 1 for m = n = {}: scalar Sigma is excluded from the limit theorem",
                self.m
            ));
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphSample {
    pub index: u64,
    pub raw_xi: f64,
    pub scaled_xi: f64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub index: u64,
    pub error: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphEnsemble {
    pub samples: Vec<GraphSample>,
    pub failures: Vec<Failure>,
    pub warnings: Vec<String>,
}

impl GraphEnsemble {
    pub fn distribution(&self) -> Result<EmpiricalDistribution, ExperimentError> {
        if self.samples.is_empty() {
            return Err(ExperimentError::NoSuccessfulSamples { failures: self.failures.len() });
        }
        Ok(EmpiricalDistribution::new(self.samples.iter().map(|s| s.scaled_xi).collect())?)
    }
}

#[derive(Debug, Error)]
enum SampleError {
    #[error(transparent)]
    Cayley(#[from] CayleyError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Generating set of the ensemble member drawn from `stream`.
pub fn ensemble_member(cfg: &ExperimentConfig, q: &AbelianQuotient, stream: u64) -> Result<GeneratingSet, CayleyError> {
    let mut rng = stream_rng(cfg.seed, stream);
    match &cfg.window {
        Some(w) => sample_restricted_with_cap(q, cfg.m, w, cfg.rejection_cap, &mut rng),
        None => sample_generating_set_with_cap(q, cfg.m, cfg.rejection_cap, &mut rng),
    }
}

fn graph_parameter(cfg: &ExperimentConfig, s: &GeneratingSet) -> Result<f64, SampleError> {
    let lattice = kernel_of_generating_map(s)?;
    Ok(match cfg.xi {
        XiKind::Girth => f64::from(girth_directed_with_budget(&lattice, cfg.memory_budget)?),
        XiKind::Diameter => f64::from(diameter(&distance_profile_with_budget(&lattice, cfg.directed, cfg.memory_budget)?)),
        XiKind::Moment => moment(&distance_profile_with_budget(&lattice, cfg.directed, cfg.memory_budget)?, cfg.alpha),
    })
}

/// Scaled graph parameters `|Sigma|^(-1/m) xi(G)` over the ensemble.
pub fn run_graph_ensemble(cfg: &ExperimentConfig) -> Result<GraphEnsemble, ExperimentError> {
    run_graph_ensemble_at(cfg, domain::GRAPH)
}

/// As [`run_graph_ensemble`], drawing member `i` from stream `base + i`.
pub fn run_graph_ensemble_at(cfg: &ExperimentConfig, base: u64) -> Result<GraphEnsemble, ExperimentError> {
    cfg.validate()?;
    let q = cfg.quotient()?;
    let warnings = cfg.warnings()?;
    for w in &warnings {
        log::warn!("{w}");
    }
    let scale = (q.order as f64).powf(-1.0 / cfg.m as f64);
    let results: Vec<Result<GraphSample, Failure>> = (0..cfg.ensemble_size as u64)
        .into_par_iter()
        .map(|index| {
            let s = ensemble_member(cfg, &q, base + index).map_err(SampleError::from);
            s.and_then(|s| graph_parameter(cfg, &s))
                .map(|raw_xi| GraphSample { index, raw_xi, scaled_xi: raw_xi * scale })
                .map_err(|e| Failure { index, error: e.to_string() })
        })
        .collect();
    let mut samples = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(s) => samples.push(s),
            Err(f) => {
                log::warn!("ensemble member {} failed: {}", f.index, f.error);
                failures.push(f);
            }
        }
    }
    Ok(GraphEnsemble { samples, failures, warnings })
}

/// Reference draws of the lattice functional matching `cfg.xi`.
pub fn run_reference(cfg: &ExperimentConfig) -> Result<ReferenceSampleSet, ExperimentError> {
    cfg.validate_reference()?;
    Ok(reference_distribution(
        cfg.m,
        cfg.functional(),
        cfg.ball(),
        cfg.reference.n_samples,
        cfg.reference.method,
        &cfg.eval_options(),
        cfg.seed,
        0,
    )?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub ks: f64,
    pub threshold: f64,
    pub pass: bool,
    pub graph: Summary,
    pub reference: Summary,
}

pub fn compare(graph: &EmpiricalDistribution, reference: &EmpiricalDistribution, threshold: f64) -> Comparison {
    let ks = ks_two_sample(graph, reference);
    Comparison { ks, threshold, pass: ks < threshold || ks == 0.0, graph: graph.summary(), reference: reference.summary() }
}

/// Per-instance agreement of `C(Z^n/Sigma, s)` with `C(Z^m/Lambda_s, I)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrossCheckReport {
    pub instances: usize,
    pub matches: usize,
    pub mismatches: Vec<u64>,
    pub failures: Vec<Failure>,
}

impl CrossCheckReport {
    pub fn all_match(&self) -> bool {
        self.mismatches.is_empty() && self.failures.is_empty()
    }
}

/// Whether both constructions give identical sorted distance multisets, the
/// kernel has index `|Sigma|`, and its divisors are those of `Sigma` padded
/// with ones; girths are compared too when directed.
pub fn cross_check_instance(s: &GeneratingSet, directed: bool, budget: u64) -> Result<bool, ExperimentError> {
    let lattice = kernel_of_generating_map(s)?;
    let q = &s.quotient;
    let mut padded = vec![1i64; s.m - q.n];
    padded.extend(&q.divisors);
    let structure = lattice.index == q.order && lattice.divisors == padded;
    let run = || -> Result<bool, GraphError> {
        let a = direct_cayley_profile_with_budget(s, directed, budget)?;
        let b = distance_profile_with_budget(&lattice, directed, budget)?;
        let mut same = a.sorted_distances() == b.sorted_distances();
        if directed {
            same &= direct_girth(s)? == girth_directed_with_budget(&lattice, budget)?;
        }
        Ok(same)
    };
    match run() {
        Ok(same) => Ok(structure && same),
        Err(e) => Err(ExperimentError::Config(e.to_string())),
    }
}

pub fn cross_check(cfg: &ExperimentConfig) -> Result<CrossCheckReport, ExperimentError> {
    cfg.validate()?;
    let q = cfg.quotient()?;
    let results: Vec<(u64, Result<bool, String>)> = (0..cfg.ensemble_size as u64)
        .into_par_iter()
        .map(|index| {
            let r = ensemble_member(cfg, &q, domain::GRAPH + index)
                .map_err(ExperimentError::from)
                .and_then(|s| cross_check_instance(&s, cfg.directed, cfg.memory_budget))
                .map_err(|e| e.to_string());
            (index, r)
        })
        .collect();
    let mut report = CrossCheckReport { instances: results.len(), matches: 0, mismatches: Vec::new(), failures: Vec::new() };
    for (index, r) in results {
        match r {
            Ok(true) => report.matches += 1,
            Ok(false) => report.mismatches.push(index),
            Err(error) => report.failures.push(Failure { index, error }),
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub k: i64,
    pub ks: f64,
    pub failures: usize,
    pub summary: Summary,
}

/// KS distance to the reference for each `k` in `cfg.sweep_ks`.
///
/// The trend is reported, not asserted.
pub fn sweep(cfg: &ExperimentConfig, reference: &EmpiricalDistribution) -> Result<Vec<SweepPoint>, ExperimentError> {
    if cfg.sigma.is_some() {
        return invalid("sweep varies k and needs a scalar sigma");
    }
    cfg.sweep_ks
        .iter()
        .enumerate()
        .map(|(j, &k)| {
            let at = ExperimentConfig { k: Some(k), ..cfg.clone() };
            let ensemble = run_graph_ensemble_at(&at, domain::GRAPH + ((j as u64) << 32))?;
            let dist = ensemble.distribution()?;
            Ok(SweepPoint { k, ks: ks_two_sample(&dist, reference), failures: ensemble.failures.len(), summary: dist.summary() })
        })
        .collect()
}

/// Reproducibility record attached to every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub rng: String,
    pub seed: u64,
    pub graph_stream_base: u64,
    pub reference_stream_base: u64,
    pub warnings: Vec<String>,
    pub failures: Vec<Failure>,
}

impl Manifest {
    pub fn new(cfg: &ExperimentConfig, warnings: Vec<String>, failures: Vec<Failure>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            rng: GENERATOR_NAME.to_string(),
            seed: cfg.seed,
            graph_stream_base: domain::GRAPH,
            reference_stream_base: domain::REFERENCE,
            warnings,
            failures,
        }
    }
}

pub fn write_samples_csv<W: Write>(mut w: W, samples: &[GraphSample]) -> io::Result<()> {
    writeln!(w, "index,raw_xi,scaled_xi")?;
    for s in samples {
        writeln!(w, "{},{},{}", s.index, s.raw_xi, s.scaled_xi)?;
    }
    Ok(())
}

pub fn write_reference_csv<W: Write>(mut w: W, reference: &ReferenceSampleSet) -> io::Result<()> {
    writeln!(w, "index,value,uncertainty")?;
    for (i, (v, u)) in reference.samples.iter().zip(&reference.uncertainty).enumerate() {
        writeln!(w, "{i},{v},{u}")?;
    }
    Ok(())
}
