use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use randcayley::experiment::{
    compare, cross_check, ensemble_member, run_graph_ensemble, run_reference, sweep, write_reference_csv,
    write_samples_csv, ExperimentConfig, Manifest, XiKind,
};
use randcayley::graphmetrics::{distance_profile_with_budget, girth_directed_with_budget, ProfileSummary};
use randcayley::rng::domain;

#[derive(Parser, Debug)]
#[command(name = "randcayley", version, about = "Random Cayley graphs of abelian groups and their lattice limits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample the graph ensemble and write samples.csv.
    SampleGraphs {
        /// Also dump the distance profile of this ensemble member (raw u32 LE).
        #[arg(long)]
        dump_profile: Option<u64>,
    },
    /// Sample the reference lattice functional and write reference.csv.
    Reference,
    /// Run both sides and report their KS distance.
    Compare,
    /// Check that both Cayley graph constructions agree on every ensemble member.
    CrossCheck,
    /// Report the KS distance to the reference for each k in sweep_ks.
    Sweep {
        /// Comma-separated values of k, replacing sweep_ks from the config.
        #[arg(long, value_delimiter = ',')]
        ks: Option<Vec<i64>>,
    },
}

#[derive(Args, Debug)]
struct Overrides {
    /// JSON config file; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    m: Option<usize>,
    /// Sigma = k Z^n.
    #[arg(long, global = true)]
    k: Option<i64>,
    /// diameter, moment or girth.
    #[arg(long, global = true)]
    xi: Option<XiKind>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Use the directed graph and the directed unit ball.
    #[arg(long, global = true)]
    directed: bool,
    /// Ensemble size.
    #[arg(long, global = true)]
    ensemble: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

impl Overrides {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.n {
            cfg.n = v;
        }
        if let Some(v) = self.m {
            cfg.m = v;
        }
        if let Some(v) = self.k {
            cfg.k = Some(v);
            cfg.sigma = None;
        }
        if let Some(v) = self.xi {
            cfg.xi = v;
        }
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if self.directed {
            cfg.directed = true;
        }
        if let Some(v) = self.ensemble {
            cfg.ensemble_size = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    Ok(BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?))
}

fn write_report(dir: &Path, report: &serde_json::Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    fs::write(dir.join("report.json"), text).context("writing report.json")
}

fn dump_profile(cfg: &ExperimentConfig, index: u64) -> Result<()> {
    let q = cfg.quotient()?;
    let s = ensemble_member(cfg, &q, domain::GRAPH + index)?;
    let lattice = randcayley::cayley::kernel_of_generating_map(&s)?;
    let profile = distance_profile_with_budget(&lattice, cfg.directed, cfg.memory_budget)?;
    let girth = if cfg.directed { Some(girth_directed_with_budget(&lattice, cfg.memory_budget)?) } else { None };
    profile.write_raw(create(&cfg.out, &format!("profile_{index}.bin"))?)?;
    let summary = ProfileSummary::new(&profile, girth, &[1.0, 2.0]);
    fs::write(cfg.out.join(format!("profile_{index}.json")), serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    let mut cfg = cli.overrides.resolve()?;
    if let Command::Sweep { ks: Some(ks) } = &cli.command {
        cfg.sweep_ks = ks.clone();
        cfg.validate()?;
    }
    fs::create_dir_all(&cfg.out).with_context(|| format!("creating {}", cfg.out.display()))?;
    let out = cfg.out.clone();
    match cli.command {
        Command::SampleGraphs { dump_profile: dump } => {
            let ensemble = run_graph_ensemble(&cfg)?;
            write_samples_csv(create(&out, "samples.csv")?, &ensemble.samples)?;
            if let Some(index) = dump {
                dump_profile(&cfg, index)?;
            }
            let graph = ensemble.distribution()?;
            write_report(
                &out,
                &json!({
                    "summaries": { "graph": graph.summary() },
                    "config": cfg,
                    "manifest": Manifest::new(&cfg, ensemble.warnings, ensemble.failures),
                }),
            )?;
            log::info!("{} samples written to {}", ensemble.samples.len(), out.display());
            Ok(true)
        }
        Command::Reference => {
            let reference = run_reference(&cfg)?;
            write_reference_csv(create(&out, "reference.csv")?, &reference)?;
            write_report(
                &out,
                &json!({
                    "summaries": { "reference": reference.distribution()?.summary() },
                    "reference": { "m": reference.m, "method": reference.method, "functional": reference.functional, "ball": reference.ball },
                    "config": cfg,
                    "manifest": Manifest::new(&cfg, Vec::new(), Vec::new()),
                }),
            )?;
            Ok(true)
        }
        Command::Compare => {
            let ensemble = run_graph_ensemble(&cfg)?;
            let reference = run_reference(&cfg)?;
            write_samples_csv(create(&out, "samples.csv")?, &ensemble.samples)?;
            write_reference_csv(create(&out, "reference.csv")?, &reference)?;
            let c = compare(&ensemble.distribution()?, &reference.distribution()?, cfg.ks_threshold);
            println!("ks = {:.4} (threshold {}) {}", c.ks, c.threshold, if c.pass { "PASS" } else { "FAIL" });
            write_report(
                &out,
                &json!({
                    "ks": c.ks,
                    "threshold": c.threshold,
                    "pass": c.pass,
                    "summaries": { "graph": c.graph, "reference": c.reference },
                    "config": cfg,
                    "manifest": Manifest::new(&cfg, ensemble.warnings, ensemble.failures),
                }),
            )?;
            Ok(c.pass)
        }
        Command::CrossCheck => {
            let report = cross_check(&cfg)?;
            println!("{}/{} instances match", report.matches, report.instances);
            let ok = report.all_match();
            write_report(
                &out,
                &json!({
                    "cross_check": report,
                    "config": cfg,
                    "manifest": Manifest::new(&cfg, cfg.warnings()?, Vec::new()),
                }),
            )?;
            Ok(ok)
        }
        Command::Sweep { .. } => {
            if cfg.sweep_ks.is_empty() {
                bail!("sweep needs at least one k");
            }
            let reference = run_reference(&cfg)?;
            write_reference_csv(create(&out, "reference.csv")?, &reference)?;
            let points = sweep(&cfg, &reference.distribution()?)?;
            {
                use std::io::Write;
                let mut w = create(&out, "sweep.csv")?;
                writeln!(w, "k,ks,n,failures")?;
                for p in &points {
                    writeln!(w, "{},{},{},{}", p.k, p.ks, p.summary.n, p.failures)?;
                }
            }
            for p in &points {
                println!("k = {:>8}  ks = {:.4}", p.k, p.ks);
            }
            write_report(
                &out,
                &json!({
                    "sweep": points,
                    "summaries": { "reference": reference.distribution()?.summary() },
                    "config": cfg,
                    "manifest": Manifest::new(&cfg, cfg.warnings()?, Vec::new()),
                }),
            )?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
