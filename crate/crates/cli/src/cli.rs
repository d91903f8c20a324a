//! Argument parsing and the subcommand drivers behind the `ctmc-mlmc`
//! binary.

use std::ffi::OsString;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ctmc_mlmc::mlmc::Method;
use ctmc_mlmc::model::compute_scaling;
use ctmc_mlmc::paths::ExactMethod;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::job::{
    load_model, run_compare, run_estimate, run_pilot, run_simulate, run_sweep, CliError, JobConfig,
    SimulateConfig, SweepPlan,
};
use crate::report;

#[derive(Debug, Parser)]
#[command(
    name = "ctmc-mlmc",
    version,
    about = "Monte Carlo and multilevel Monte Carlo estimates for reaction networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate independent paths and print their final states as CSV.
    Simulate(SimulateArgs),
    /// Estimate E f(X(T)) to a given confidence-interval half-width.
    Estimate(EstimateArgs),
    /// Run pilot paths per level and print the cost and variance table.
    Pilot(PilotArgs),
    /// Run exact-cmc and unbiased-mlmc at equal epsilon and report the speedup.
    Compare(EstimateArgs),
    /// Repeat `compare` along a model family.
    Sweep(SweepArgs),
    /// Parse a model file and print a summary or its canonical form.
    ValidateModel(ValidateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    /// Bundled model name or path to a TOML model file.
    #[arg(long)]
    pub model: String,
    /// Member of the isomerization family.
    #[arg(long)]
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, env = "MLMC_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; never changes the result.
    #[arg(long, env = "MLMC_WORKERS")]
    pub workers: Option<usize>,
    #[arg(long, value_parser = parse_exact_method, default_value = "next-reaction")]
    pub exact_method: ExactMethod,
    /// Abort a path after this many updates.
    #[arg(long, default_value_t = 1_000_000_000)]
    pub max_path_updates: u64,
}

#[derive(Debug, Clone, Args)]
pub struct StatArgs {
    /// Target confidence-interval half-width.
    #[arg(long)]
    pub epsilon: f64,
    /// Normal quantile of the interval (default 1.96).
    #[arg(long, conflicts_with = "confidence")]
    pub z: Option<f64>,
    /// Confidence level, e.g. 0.99; sets z.
    #[arg(long)]
    pub confidence: Option<f64>,
    /// Paths per sequential batch.
    #[arg(long, default_value_t = 1000)]
    pub batch: u64,
    #[arg(long, default_value_t = 100)]
    pub min_samples: u64,
    /// Pilot paths per level.
    #[arg(long, default_value_t = 100)]
    pub pilot: u64,
    /// Per-level sample cap.
    #[arg(long, default_value_t = 1_000_000_000)]
    pub max_samples: u64,
}

#[derive(Debug, Clone, Args)]
pub struct PlanArgs {
    /// Refinement factor between levels.
    #[arg(long = "M")]
    pub m: Option<u32>,
    /// Coarsest level.
    #[arg(long = "l0")]
    pub l0: Option<u32>,
    /// Finest level.
    #[arg(long = "L")]
    pub finest: Option<u32>,
}

#[derive(Debug, Clone, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// `S`, `S1*S2` or `indicator(S, lo, hi)`.
    #[arg(long)]
    pub observable: String,
    /// Observable on the reduced model (control-variate only).
    #[arg(long)]
    pub reduced_observable: Option<String>,
    /// Horizon T.
    #[arg(long)]
    pub time: f64,
    #[arg(long, value_parser = parse_method, default_value = "unbiased-mlmc")]
    pub method: Method,
    #[command(flatten)]
    pub stat: StatArgs,
    #[command(flatten)]
    pub plan: PlanArgs,
    /// Tau-leap step for tau-cmc.
    #[arg(long)]
    pub h: Option<f64>,
    #[command(flatten)]
    pub run: RunArgs,
    /// Include wall-clock time in the report (makes it non-reproducible).
    #[arg(long)]
    pub timing: bool,
    /// Write the JSON report here.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Write the per-level table as CSV here.
    #[arg(long)]
    pub levels_csv: Option<PathBuf>,
    /// Print the JSON report instead of the table.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct PilotArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub observable: String,
    #[arg(long)]
    pub time: f64,
    #[command(flatten)]
    pub plan: PlanArgs,
    /// Include the exact level (X, Z_L).
    #[arg(long)]
    pub unbiased: bool,
    #[arg(long, default_value_t = 100)]
    pub pilot: u64,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, default_value = "isomerization")]
    pub model: String,
    /// Parameter to vary; `theta` is supported.
    #[arg(long)]
    pub param: String,
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<f64>,
    #[arg(long, default_value = "A")]
    pub observable: String,
    #[arg(long, default_value_t = 1.0)]
    pub time: f64,
    /// One epsilon, or one per value.
    #[arg(long, value_delimiter = ',', required = true)]
    pub epsilon: Vec<f64>,
    #[arg(long = "M")]
    pub m: Option<u32>,
    /// One l0, or one per value.
    #[arg(long = "l0", value_delimiter = ',')]
    pub l0: Vec<u32>,
    /// One L, or one per value.
    #[arg(long = "L", value_delimiter = ',')]
    pub finest: Vec<u32>,
    #[arg(long)]
    pub z: Option<f64>,
    #[arg(long, default_value_t = 100)]
    pub pilot: u64,
    #[command(flatten)]
    pub run: RunArgs,
    /// Write the rows as CSV here.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub time: f64,
    #[arg(long, default_value_t = 1)]
    pub paths: u64,
    /// Tau-leap with this step instead of simulating exactly.
    #[arg(long)]
    pub h: Option<f64>,
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Print the canonical TOML form instead of a summary.
    #[arg(long)]
    pub canonical: bool,
}

pub fn parse_method(s: &str) -> Result<Method, String> {
    [
        Method::ExactCmc,
        Method::TauCmc,
        Method::BiasedMlmc,
        Method::UnbiasedMlmc,
        Method::ControlVariate,
    ]
    .into_iter()
    .find(|m| m.as_str() == s)
    .ok_or_else(|| {
        format!("unknown method `{s}` (expected exact-cmc, tau-cmc, biased-mlmc, unbiased-mlmc or control-variate)")
    })
}

pub fn parse_exact_method(s: &str) -> Result<ExactMethod, String> {
    match s {
        "next-reaction" => Ok(ExactMethod::NextReaction),
        "direct" => Ok(ExactMethod::Direct),
        _ => Err(format!(
            "unknown exact method `{s}` (expected next-reaction or direct)"
        )),
    }
}

/// Two-sided normal quantile for a confidence level in (0, 1).
pub fn z_for_confidence(c: f64) -> Result<f64, CliError> {
    if !(c > 0.0 && c < 1.0) {
        return Err(CliError::Usage(format!(
            "confidence must lie in (0, 1), got {c}"
        )));
    }
    Ok(Normal::standard().inverse_cdf(0.5 + c / 2.0))
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn job_from(a: &EstimateArgs) -> Result<JobConfig, CliError> {
    let mut job = JobConfig::new(
        &a.model.model,
        &a.observable,
        a.time,
        a.method,
        a.stat.epsilon,
    );
    job.theta = a.model.theta;
    job.reduced_observable = a.reduced_observable.clone();
    if let Some(z) = a.stat.z {
        job.z = z;
    }
    if let Some(c) = a.stat.confidence {
        job.z = z_for_confidence(c)?;
    }
    job.m = a.plan.m;
    job.l0 = a.plan.l0;
    job.finest = a.plan.finest;
    job.h = a.h;
    job.seed = a.run.seed;
    job.workers = a.run.workers.unwrap_or_else(default_workers);
    job.batch = a.stat.batch;
    job.min_samples = a.stat.min_samples;
    job.pilot_samples = a.stat.pilot;
    job.max_samples = a.stat.max_samples;
    job.max_path_updates = a.run.max_path_updates;
    job.exact_method = a.run.exact_method;
    job.timing = a.timing;
    Ok(job)
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        context: format!("writing {}", path.display()),
        source,
    })
}

fn print(text: &str) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())
        .map_err(|source| CliError::Io {
            context: "writing to stdout".into(),
            source,
        })
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Estimate(a) => {
            let doc = run_estimate(&job_from(&a)?)?;
            let json = report::to_json(&doc);
            if let Some(p) = &a.output {
                write_file(p, &json)?;
            }
            if let Some(p) = &a.levels_csv {
                write_file(p, &report::levels_csv(&doc.report))?;
            }
            print(&if a.json {
                json
            } else {
                report::estimate_table(&doc)
            })
        }
        Command::Compare(a) => {
            let doc = run_compare(&job_from(&a)?)?;
            let json = report::to_json(&doc);
            if let Some(p) = &a.output {
                write_file(p, &json)?;
            }
            print(&if a.json {
                json
            } else {
                report::compare_table(&doc)
            })
        }
        Command::Pilot(a) => {
            let mut job = JobConfig::new(
                &a.model.model,
                &a.observable,
                a.time,
                Method::UnbiasedMlmc,
                1.0,
            );
            job.theta = a.model.theta;
            job.m = a.plan.m;
            job.l0 = a.plan.l0;
            job.finest = a.plan.finest;
            job.pilot_samples = a.pilot;
            job.seed = a.run.seed;
            job.workers = a.run.workers.unwrap_or_else(default_workers);
            job.max_path_updates = a.run.max_path_updates;
            job.exact_method = a.run.exact_method;
            let doc = run_pilot(&job, a.unbiased)?;
            let json = report::to_json(&doc);
            if let Some(p) = &a.output {
                write_file(p, &json)?;
            }
            print(&if a.json {
                json
            } else {
                report::pilot_table(&doc)
            })
        }
        Command::Sweep(a) => {
            let mut job = JobConfig::new(
                &a.model,
                &a.observable,
                a.time,
                Method::UnbiasedMlmc,
                a.epsilon[0],
            );
            job.m = a.m;
            if let Some(z) = a.z {
                job.z = z;
            }
            job.pilot_samples = a.pilot;
            job.seed = a.run.seed;
            job.workers = a.run.workers.unwrap_or_else(default_workers);
            job.max_path_updates = a.run.max_path_updates;
            job.exact_method = a.run.exact_method;
            let plan = SweepPlan {
                values: a.values.clone(),
                epsilon: a.epsilon.clone(),
                l0: a.l0.clone(),
                finest: a.finest.clone(),
            };
            let doc = run_sweep(&a.param, &plan, &job)?;
            let csv = report::sweep_csv(&doc);
            if let Some(p) = &a.output {
                write_file(p, &csv)?;
            }
            print(&if a.json { report::to_json(&doc) } else { csv })
        }
        Command::Simulate(a) => {
            let csv = run_simulate(&SimulateConfig {
                model: a.model.model.clone(),
                theta: a.model.theta,
                time: a.time,
                paths: a.paths,
                h: a.h,
                seed: a.run.seed,
                exact_method: a.run.exact_method,
                max_path_updates: a.run.max_path_updates,
            })?;
            match &a.output {
                Some(p) => write_file(p, &csv),
                None => print(&csv),
            }
        }
        Command::ValidateModel(a) => {
            let model = load_model(&a.model.model, a.model.theta)?;
            for w in &model.warnings {
                eprintln!("warning: {w}");
            }
            if a.canonical {
                return print(&model.to_file().to_toml());
            }
            print(&model_summary(&model))
        }
    }
}

fn model_summary(model: &crate::Model) -> String {
    use std::fmt::Write as _;
    let net = &model.network;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "model {}: {} species, {} reactions",
        model.name,
        net.dimension(),
        net.num_reactions()
    );
    let names: Vec<String> = net
        .species()
        .iter()
        .map(|s| format!("{}={}", s.name, s.initial))
        .collect();
    let _ = writeln!(out, "initial state  {}", names.join(" "));
    if let Some(red) = &model.reduced {
        let _ = writeln!(
            out,
            "reduced model  {} species, {} reactions, {} coupled channels",
            red.network.dimension(),
            red.network.num_reactions(),
            red.map.pairs().len()
        );
    }
    if let Ok(p) = compute_scaling(net, &net.initial_state()) {
        let _ = writeln!(
            out,
            "scaling        N = {}, gamma = {:.4}, rho = {:.4}",
            p.n, p.gamma, p.rho
        );
    }
    out
}

/// Parses `args` and runs the command; returns the process exit code.
pub fn main_from<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code() as u8;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
