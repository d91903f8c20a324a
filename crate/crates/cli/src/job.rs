//! Job configuration and dispatch to the estimators.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use ctmc_mlmc::mlmc::{
    cmc_exact, cmc_tau, control_variate, mlmc_biased, mlmc_unbiased, pilot, ControlVariate,
    EstimatorConfig, LevelPlan, Method, Problem,
};
use ctmc_mlmc::model::{a_of_h, compute_scaling};
use ctmc_mlmc::paths::{exact_path, tau_leap_path, ExactMethod, SimOptions};
use ctmc_mlmc::RandomStream;

use crate::bundled::{bundled_model, bundled_names, isomerization};
use crate::exec::RayonExecutor;
use crate::model_file::{parse_model, Model, ModelError};
use crate::observable_spec::{parse_observable, ObservableError};
use crate::report::{
    CompareDocument, PilotDocument, PilotLevel, RunDocument, Settings, SweepDocument, SweepRow,
    REPORT_VERSION,
};

pub const DEFAULT_M: u32 = 3;
pub const DEFAULT_L0: u32 = 2;
pub const DEFAULT_L: u32 = 5;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("model: {0}")]
    Model(#[from] ModelError),
    #[error(transparent)]
    Observable(#[from] ObservableError),
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] ctmc_mlmc::Error),
    #[error("thread pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

impl CliError {
    /// 1 I/O, 2 usage, 3 model or observable, 4 budget cap, 5 invalid
    /// argument or simulation failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } | CliError::Pool(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Model(_) | CliError::Observable(_) => 3,
            CliError::Core(ctmc_mlmc::Error::PathBudgetExceeded { .. })
            | CliError::Core(ctmc_mlmc::Error::SampleBudgetExceeded { .. }) => 4,
            CliError::Core(_) => 5,
        }
    }
}

fn usage<T>(msg: impl Into<String>) -> Result<T, CliError> {
    Err(CliError::Usage(msg.into()))
}

/// Loads a bundled model by name, or a model file by path. `theta` selects a
/// member of the isomerization family.
pub fn load_model(spec: &str, theta: Option<f64>) -> Result<Model, CliError> {
    if let Some(theta) = theta {
        if spec != "isomerization" {
            return usage("--theta applies only to the bundled isomerization model");
        }
        return Ok(isomerization(theta)?);
    }
    let path = Path::new(spec);
    if !path.exists() {
        if let Some(m) = bundled_model(spec) {
            return Ok(m);
        }
        let names: Vec<&str> = bundled_names().collect();
        return Err(CliError::Io {
            context: format!(
                "model `{spec}` is neither a file nor a bundled model ({})",
                names.join(", ")
            ),
            source: std::io::Error::from(std::io::ErrorKind::NotFound),
        });
    }
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        context: format!("reading {spec}"),
        source,
    })?;
    Ok(parse_model(&text)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct JobConfig {
    pub model: String,
    pub theta: Option<f64>,
    pub observable: String,
    /// Observable on the reduced model for control-variate runs; defaults to
    /// `observable`.
    pub reduced_observable: Option<String>,
    pub time: f64,
    pub method: Method,
    pub epsilon: f64,
    pub z: f64,
    pub m: Option<u32>,
    pub l0: Option<u32>,
    pub finest: Option<u32>,
    pub h: Option<f64>,
    pub seed: u64,
    pub workers: usize,
    pub batch: u64,
    pub min_samples: u64,
    pub pilot_samples: u64,
    pub max_samples: u64,
    pub max_path_updates: u64,
    pub exact_method: ExactMethod,
    pub timing: bool,
}

impl JobConfig {
    pub fn new(model: &str, observable: &str, time: f64, method: Method, epsilon: f64) -> Self {
        let defaults = EstimatorConfig::new(epsilon, 0);
        JobConfig {
            model: model.to_string(),
            theta: None,
            observable: observable.to_string(),
            reduced_observable: None,
            time,
            method,
            epsilon,
            z: defaults.z,
            m: None,
            l0: None,
            finest: None,
            h: None,
            seed: 1,
            workers: 1,
            batch: defaults.batch_size,
            min_samples: defaults.min_samples,
            pilot_samples: defaults.pilot_samples,
            max_samples: defaults.max_samples,
            max_path_updates: SimOptions::default().max_updates,
            exact_method: ExactMethod::default(),
            timing: false,
        }
    }

    fn estimator_config(&self) -> EstimatorConfig {
        EstimatorConfig {
            epsilon: self.epsilon,
            z: self.z,
            seed: self.seed,
            batch_size: self.batch,
            min_samples: self.min_samples,
            pilot_samples: self.pilot_samples,
            max_samples: self.max_samples,
        }
    }

    fn sim(&self) -> SimOptions {
        SimOptions {
            exact_method: self.exact_method,
            max_updates: self.max_path_updates,
        }
    }

    /// `(M, l0, L)` for the multilevel methods, with defaults filled in.
    fn plan(&self) -> Result<(u32, u32, u32), CliError> {
        let m = self.m.unwrap_or(DEFAULT_M);
        let l0 = self.l0.unwrap_or(DEFAULT_L0);
        let finest = match (self.method, self.finest) {
            (_, Some(l)) => l,
            (Method::BiasedMlmc, None) => {
                return usage("biased-mlmc needs --L; its bias cannot be inferred from epsilon")
            }
            (_, None) => DEFAULT_L,
        };
        Ok((m, l0, finest))
    }

    fn settings(&self) -> Result<Settings, CliError> {
        let multilevel = matches!(self.method, Method::BiasedMlmc | Method::UnbiasedMlmc);
        let plan = if multilevel { Some(self.plan()?) } else { None };
        Ok(Settings {
            method: self.method,
            epsilon: self.epsilon,
            z: self.z,
            m: plan.map(|p| p.0),
            l0: plan.map(|p| p.1),
            finest: plan.map(|p| p.2),
            h: if self.method == Method::TauCmc {
                self.h
            } else {
                None
            },
            theta: self.theta,
            seed: self.seed,
            batch: self.batch,
            min_samples: self.min_samples,
            pilot_samples: self.pilot_samples,
            max_samples: self.max_samples,
            max_path_updates: self.max_path_updates,
            exact_method: self.exact_method,
        })
    }
}

pub fn run_estimate(job: &JobConfig) -> Result<RunDocument, CliError> {
    let model = load_model(&job.model, job.theta)?;
    let exec = RayonExecutor::new(job.workers)?;
    estimate_with(&model, job, &exec)
}

fn estimate_with(
    model: &Model,
    job: &JobConfig,
    exec: &RayonExecutor,
) -> Result<RunDocument, CliError> {
    let settings = job.settings()?;
    let x0 = model.network.initial_counts();
    let problem = Problem {
        network: &model.network,
        x0: &x0,
        horizon: job.time,
        observable: parse_observable(&job.observable, &model.network)?,
        sim: job.sim(),
    };
    let cfg = job.estimator_config();
    let start = Instant::now();
    let mut report = match job.method {
        Method::ExactCmc => cmc_exact(&problem, &cfg, exec)?,
        Method::TauCmc => {
            let Some(h) = job.h else {
                return usage("tau-cmc needs --h");
            };
            cmc_tau(&problem, h, &cfg, exec)?
        }
        Method::BiasedMlmc => {
            let (m, l0, l) = job.plan()?;
            mlmc_biased(&problem, m, l0, l, &cfg, exec)?
        }
        Method::UnbiasedMlmc => {
            let (m, l0, l) = job.plan()?;
            mlmc_unbiased(&problem, m, l0, l, &cfg, exec)?
        }
        Method::ControlVariate => {
            let Some(red) = &model.reduced else {
                return usage(format!(
                    "model `{}` has no [reduced] section for control-variate",
                    model.name
                ));
            };
            let spec = job.reduced_observable.as_deref().unwrap_or(&job.observable);
            let z0 = red.network.initial_counts();
            let cv = ControlVariate {
                reduced: &red.network,
                x0: &z0,
                observable: parse_observable(spec, &red.network)?,
                map: &red.map,
            };
            control_variate(&problem, &cv, &cfg, exec)?
        }
    };
    if job.timing {
        report.wall_time_secs = Some(start.elapsed().as_secs_f64());
    }
    Ok(RunDocument {
        format_version: REPORT_VERSION,
        model: model.name.clone(),
        observable: job.observable.clone(),
        time: job.time,
        settings,
        report,
    })
}

/// Runs exact-CMC and unbiased MLMC at the same epsilon and seed.
pub fn run_compare(job: &JobConfig) -> Result<CompareDocument, CliError> {
    let model = load_model(&job.model, job.theta)?;
    let exec = RayonExecutor::new(job.workers)?;
    compare_with(&model, job, &exec)
}

fn compare_with(
    model: &Model,
    job: &JobConfig,
    exec: &RayonExecutor,
) -> Result<CompareDocument, CliError> {
    let exact_job = JobConfig {
        method: Method::ExactCmc,
        ..job.clone()
    };
    let mlmc_job = JobConfig {
        method: Method::UnbiasedMlmc,
        ..job.clone()
    };
    let exact = estimate_with(model, &exact_job, exec)?;
    let mlmc = estimate_with(model, &mlmc_job, exec)?;
    let speedup = exact.report.total_updates as f64 / mlmc.report.total_updates.max(1) as f64;
    Ok(CompareDocument {
        format_version: REPORT_VERSION,
        model: model.name.clone(),
        observable: job.observable.clone(),
        time: job.time,
        exact,
        mlmc,
        speedup,
    })
}

/// Pilot statistics for the level plan of `job`; `unbiased` adds the exact
/// level.
pub fn run_pilot(job: &JobConfig, unbiased: bool) -> Result<PilotDocument, CliError> {
    let model = load_model(&job.model, job.theta)?;
    let exec = RayonExecutor::new(job.workers)?;
    let m = job.m.unwrap_or(DEFAULT_M);
    let l0 = job.l0.unwrap_or(DEFAULT_L0);
    let finest = job.finest.unwrap_or(DEFAULT_L);
    let x0 = model.network.initial_counts();
    let problem = Problem {
        network: &model.network,
        x0: &x0,
        horizon: job.time,
        observable: parse_observable(&job.observable, &model.network)?,
        sim: job.sim(),
    };
    let plan = LevelPlan::new(m, l0, finest, unbiased)?;
    let stats = pilot(&problem, &plan, &job.estimator_config(), &exec)?;
    let profile = compute_scaling(&model.network, &model.network.initial_state()).ok();
    let levels = stats
        .iter()
        .map(|s| {
            let step = s.level.step();
            PilotLevel {
                label: s.level.label(),
                step,
                samples: s.samples,
                mean: s.mean,
                variance: s.variance,
                cost_per_sample: s.cost_per_sample,
                k: s.k,
                a_of_h: profile.as_ref().zip(step).map(|(p, h)| a_of_h(p, h)),
            }
        })
        .collect();
    Ok(PilotDocument {
        format_version: REPORT_VERSION,
        model: model.name,
        observable: job.observable.clone(),
        time: job.time,
        m,
        l0,
        finest,
        unbiased,
        seed: job.seed,
        levels,
    })
}

/// Per-value overrides for a sweep; each list has one entry or one per
/// value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepPlan {
    pub values: Vec<f64>,
    pub epsilon: Vec<f64>,
    pub l0: Vec<u32>,
    pub finest: Vec<u32>,
}

fn pick<T: Copy>(list: &[T], i: usize, default: T, what: &str, n: usize) -> Result<T, CliError> {
    match list.len() {
        0 => Ok(default),
        1 => Ok(list[0]),
        len if len == n => Ok(list[i]),
        len => usage(format!("{what} has {len} entries; expected 1 or {n}")),
    }
}

/// Compares exact-CMC with unbiased MLMC along the isomerization family.
pub fn run_sweep(
    param: &str,
    plan: &SweepPlan,
    job: &JobConfig,
) -> Result<SweepDocument, CliError> {
    if param != "theta" {
        return usage(format!(
            "unknown sweep parameter `{param}` (supported: theta)"
        ));
    }
    if job.model != "isomerization" {
        return usage("sweep --param theta runs the bundled isomerization model");
    }
    if plan.values.is_empty() {
        return usage("sweep needs --values");
    }
    let exec = RayonExecutor::new(job.workers)?;
    let n = plan.values.len();
    let mut rows = Vec::with_capacity(n);
    for (i, &theta) in plan.values.iter().enumerate() {
        let model = isomerization(theta)?;
        let point = JobConfig {
            theta: Some(theta),
            epsilon: pick(&plan.epsilon, i, job.epsilon, "--epsilon", n)?,
            l0: Some(pick(&plan.l0, i, job.l0.unwrap_or(DEFAULT_L0), "--l0", n)?),
            finest: Some(pick(
                &plan.finest,
                i,
                job.finest.unwrap_or(DEFAULT_L),
                "--L",
                n,
            )?),
            ..job.clone()
        };
        let c = compare_with(&model, &point, &exec)?;
        rows.push(SweepRow {
            value: theta,
            epsilon: point.epsilon,
            m: point.m.unwrap_or(DEFAULT_M),
            l0: point.l0.unwrap_or(DEFAULT_L0),
            finest: point.finest.unwrap_or(DEFAULT_L),
            exact_estimate: c.exact.report.estimate,
            exact_half_width: c.exact.report.half_width,
            exact_updates: c.exact.report.total_updates,
            mlmc_estimate: c.mlmc.report.estimate,
            mlmc_half_width: c.mlmc.report.half_width,
            mlmc_updates: c.mlmc.report.total_updates,
            speedup: c.speedup,
        });
    }
    Ok(SweepDocument {
        format_version: REPORT_VERSION,
        model: "isomerization".into(),
        param: param.into(),
        observable: job.observable.clone(),
        time: job.time,
        seed: job.seed,
        rows,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateConfig {
    pub model: String,
    pub theta: Option<f64>,
    pub time: f64,
    pub paths: u64,
    /// Tau-leap step; exact simulation when `None`.
    pub h: Option<f64>,
    pub seed: u64,
    pub exact_method: ExactMethod,
    pub max_path_updates: u64,
}

/// Final states of independent paths as CSV: `path,updates,<species...>`.
pub fn run_simulate(cfg: &SimulateConfig) -> Result<String, CliError> {
    let model = load_model(&cfg.model, cfg.theta)?;
    let net = &model.network;
    let x0 = net.initial_counts();
    let opts = SimOptions {
        exact_method: cfg.exact_method,
        max_updates: cfg.max_path_updates,
    };
    let mut out = String::from("path,updates");
    for s in net.species() {
        out.push(',');
        out.push_str(&s.name);
    }
    out.push('\n');
    for i in 0..cfg.paths {
        let mut stream = RandomStream::new(cfg.seed, i);
        let r = match cfg.h {
            Some(h) => tau_leap_path(net, &x0, cfg.time, h, &opts, &mut stream)?,
            None => exact_path(net, &x0, cfg.time, &opts, &mut stream)?,
        };
        let _ = write!(out, "{i},{}", r.updates);
        for c in &r.final_state.counts {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
    }
    Ok(out)
}
