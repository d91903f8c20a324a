use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::coupling::{coupled_exact_exact, coupled_exact_tau, coupled_tau_pair, ChannelMap};
use crate::error::{invalid_argument, Error, Result};
use crate::mlmc::allocate::{allocate, predicted_cost};
use crate::mlmc::exec::Executor;
use crate::mlmc::report::{EstimateReport, LevelReport, Method};
use crate::mlmc::stats::{LevelAccumulator, Sample};
use crate::model::{Observable, ReactionNetwork};
use crate::paths::{exact_path, tau_leap_path, SimOptions};
use crate::stochastics::RandomStream;

const PHASE_MAIN: u64 = 0;
const PHASE_PILOT: u64 = 1;

/// The expectation `E f(X(T))` to estimate.
#[derive(Debug, Clone, Copy)]
pub struct Problem<'a> {
    pub network: &'a ReactionNetwork,
    pub x0: &'a [i64],
    pub horizon: f64,
    pub observable: Observable,
    pub sim: SimOptions,
}

impl Problem<'_> {
    fn validate(&self) -> Result<()> {
        self.network.check_dimension(self.x0)?;
        self.observable.validate(self.network)?;
        if !(self.horizon.is_finite() && self.horizon >= 0.0) {
            return Err(invalid_argument("horizon T must be finite and >= 0"));
        }
        Ok(())
    }
}

/// A cheaper exact chain used as a control variate for the target, coupled
/// to it through `map`.
#[derive(Debug, Clone, Copy)]
pub struct ControlVariate<'a> {
    pub reduced: &'a ReactionNetwork,
    pub x0: &'a [i64],
    /// `f` evaluated on the reduced chain's state.
    pub observable: Observable,
    pub map: &'a ChannelMap,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    /// Target half-width of the confidence interval.
    pub epsilon: f64,
    /// Normal quantile of the confidence level (1.96 for 95%).
    pub z: f64,
    pub seed: u64,
    /// Maximum paths per sequential batch.
    pub batch_size: u64,
    /// Every level takes at least this many samples.
    pub min_samples: u64,
    /// Pilot paths per level.
    pub pilot_samples: u64,
    /// Hard cap on the samples of any one level.
    pub max_samples: u64,
}

impl EstimatorConfig {
    pub fn new(epsilon: f64, seed: u64) -> Self {
        EstimatorConfig {
            epsilon,
            z: 1.96,
            seed,
            batch_size: 1000,
            min_samples: 100,
            pilot_samples: 100,
            max_samples: 1_000_000_000,
        }
    }

    pub fn budget(&self) -> f64 {
        (self.epsilon / self.z) * (self.epsilon / self.z)
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(invalid_argument("epsilon must be finite and > 0"));
        }
        if !(self.z.is_finite() && self.z > 0.0) {
            return Err(invalid_argument("z must be finite and > 0"));
        }
        if self.batch_size == 0 || self.min_samples < 2 {
            return Err(invalid_argument(
                "batch size must be >= 1 and minimum samples >= 2",
            ));
        }
        if self.pilot_samples < 2 {
            return Err(invalid_argument("pilot needs at least 2 samples per level"));
        }
        Ok(())
    }
}

/// One term of a telescoping estimator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Level {
    /// `f(Z_h)` from plain tau-leaping.
    Tau { level: Option<u32>, h: f64 },
    /// `f(Z_l) - f(Z_{l-1})` from coupled tau-leap paths.
    TauPair { level: u32, h_fine: f64, m: u32 },
    /// `f(X) - f(Z_l)` from an exact path coupled to a tau-leap path.
    ExactTau { level: u32, h: f64 },
    /// `f(X)` from an exact path.
    Exact,
    /// `f(Z)` from an exact path of the control-variate network.
    Reduced,
    /// `f(X) - f(Z)` from the target coupled to the control-variate network.
    ExactPair,
}

impl Level {
    pub fn label(&self) -> String {
        match *self {
            Level::Tau { level: Some(l), .. } => format!("Z_{l}"),
            Level::Tau { level: None, h } => format!("Z(h={h})"),
            Level::TauPair { level, .. } => format!("(Z_{}, Z_{})", level, level - 1),
            Level::ExactTau { level, .. } => format!("(X, Z_{level})"),
            Level::Exact => "X".into(),
            Level::Reduced => "Z".into(),
            Level::ExactPair => "(X, Z)".into(),
        }
    }

    /// Step of the finest tau-leap member.
    pub fn step(&self) -> Option<f64> {
        match *self {
            Level::Tau { h, .. } | Level::ExactTau { h, .. } => Some(h),
            Level::TauPair { h_fine, .. } => Some(h_fine),
            _ => None,
        }
    }

    /// Key of the random streams used by this level. It depends on the step
    /// and not on the level index, so a one-level plan at `h` replays the
    /// plain tau-leap estimator at `h`.
    fn domain(&self, phase: u64) -> u64 {
        let (kind, bits) = match *self {
            Level::Tau { h, .. } => (1u64, h.to_bits()),
            Level::TauPair { h_fine, m, .. } => {
                (2, h_fine.to_bits() ^ u64::from(m).rotate_left(52))
            }
            Level::ExactTau { h, .. } => (3, h.to_bits()),
            Level::Exact => (4, 0),
            Level::Reduced => (5, 0),
            Level::ExactPair => (6, 0),
        };
        mix(bits ^ mix(kind | (phase << 8)))
    }
}

fn mix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Level structure of a multilevel run with steps `h_l = T * M^-l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LevelPlan {
    pub m: u32,
    pub ell0: u32,
    pub finest: u32,
    /// Add the `(X, Z_L)` level on top of the tau-leap levels.
    pub include_exact_level: bool,
}

impl LevelPlan {
    pub fn new(m: u32, ell0: u32, finest: u32, include_exact_level: bool) -> Result<Self> {
        if m < 2 {
            return Err(invalid_argument("refinement factor M must be >= 2"));
        }
        if ell0 > finest {
            return Err(invalid_argument(
                "coarsest level l0 must not exceed finest level L",
            ));
        }
        Ok(LevelPlan {
            m,
            ell0,
            finest,
            include_exact_level,
        })
    }

    pub fn step(&self, horizon: f64, level: u32) -> f64 {
        horizon / libm::pow(f64::from(self.m), f64::from(level))
    }

    /// Levels from coarsest to finest.
    pub fn levels(&self, horizon: f64) -> Vec<Level> {
        let mut out = vec![Level::Tau {
            level: Some(self.ell0),
            h: self.step(horizon, self.ell0),
        }];
        for l in self.ell0 + 1..=self.finest {
            out.push(Level::TauPair {
                level: l,
                h_fine: self.step(horizon, l),
                m: self.m,
            });
        }
        if self.include_exact_level {
            out.push(Level::ExactTau {
                level: self.finest,
                h: self.step(horizon, self.finest),
            });
        }
        out
    }
}

/// Pilot statistics of one level.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelStats {
    pub level: Level,
    pub samples: u64,
    pub mean: f64,
    /// Per-sample variance of the level summand.
    pub variance: f64,
    pub updates: u64,
    pub cost_per_sample: f64,
    /// `K_l = cost per sample * variance per sample`, so that
    /// `cost = K_l / V_l` when `V_l = variance / n`.
    pub k: f64,
    /// Mean, variance and cost of `f` on the fine member alone.
    pub fine_mean: f64,
    pub fine_variance: f64,
    pub fine_cost_per_sample: f64,
}

impl LevelStats {
    fn from_acc(level: Level, acc: &LevelAccumulator) -> Self {
        let n = acc.count().max(1) as f64;
        let cost = acc.updates as f64 / n;
        LevelStats {
            level,
            samples: acc.count(),
            mean: acc.summand.mean(),
            variance: acc.summand.variance(),
            updates: acc.updates,
            cost_per_sample: cost,
            k: cost * acc.summand.variance(),
            fine_mean: acc.fine.mean(),
            fine_variance: acc.fine.variance(),
            fine_cost_per_sample: acc.fine_updates as f64 / n,
        }
    }
}

fn draw(
    problem: &Problem<'_>,
    cv: Option<&ControlVariate<'_>>,
    level: &Level,
    mut stream: RandomStream,
) -> Result<Sample> {
    let p = problem;
    let f = |counts: &[i64]| p.observable.evaluate(counts);
    let control = || cv.ok_or_else(|| invalid_argument("level needs a control-variate model"));
    let single = |value: f64, updates: u64| Sample {
        value,
        fine_value: value,
        updates,
        fine_updates: updates,
    };
    match *level {
        Level::Tau { h, .. } => {
            let r = tau_leap_path(p.network, p.x0, p.horizon, h, &p.sim, &mut stream)?;
            Ok(single(f(&r.final_state.counts), r.updates))
        }
        Level::Exact => {
            let r = exact_path(p.network, p.x0, p.horizon, &p.sim, &mut stream)?;
            Ok(single(f(&r.final_state.counts), r.updates))
        }
        Level::Reduced => {
            let c = control()?;
            let r = exact_path(c.reduced, c.x0, p.horizon, &p.sim, &mut stream)?;
            Ok(single(
                c.observable.evaluate(&r.final_state.counts),
                r.updates,
            ))
        }
        Level::TauPair { h_fine, m, .. } => {
            let r = coupled_tau_pair(p.network, p.x0, p.horizon, h_fine, m, &p.sim, &stream)?;
            let fine = f(&r.fine_final.counts);
            Ok(Sample {
                value: fine - f(&r.coarse_final.counts),
                fine_value: fine,
                updates: r.updates,
                fine_updates: r.fine_updates,
            })
        }
        Level::ExactTau { h, .. } => {
            let r = coupled_exact_tau(p.network, p.x0, p.horizon, h, &p.sim, &stream)?;
            let fine = f(&r.fine_final.counts);
            Ok(Sample {
                value: fine - f(&r.coarse_final.counts),
                fine_value: fine,
                updates: r.updates,
                fine_updates: r.fine_updates,
            })
        }
        Level::ExactPair => {
            let c = control()?;
            let r = coupled_exact_exact(
                p.network, c.reduced, p.x0, c.x0, p.horizon, c.map, &p.sim, &stream,
            )?;
            let fine = f(&r.fine_final.counts);
            Ok(Sample {
                value: fine - c.observable.evaluate(&r.coarse_final.counts),
                fine_value: fine,
                updates: r.updates,
                fine_updates: r.fine_updates,
            })
        }
    }
}

fn run_fixed<E: Executor + ?Sized>(
    problem: &Problem<'_>,
    cv: Option<&ControlVariate<'_>>,
    level: &Level,
    phase: u64,
    seed: u64,
    count: u64,
    exec: &E,
) -> Result<LevelAccumulator> {
    let domain = level.domain(phase);
    let job = |i: u64| draw(problem, cv, level, RandomStream::keyed(seed, domain, i));
    exec.run(0, count, &job)
}

/// Samples `level` in batches until its estimator variance is at most
/// `target`. A zero target means the pilot saw no variance; the level then
/// gets exactly the minimum sample count.
fn run_to_target<E: Executor + ?Sized>(
    problem: &Problem<'_>,
    cv: Option<&ControlVariate<'_>>,
    level: &Level,
    target: f64,
    cfg: &EstimatorConfig,
    exec: &E,
) -> Result<LevelAccumulator> {
    let domain = level.domain(PHASE_MAIN);
    let seed = cfg.seed;
    let job = |i: u64| draw(problem, cv, level, RandomStream::keyed(seed, domain, i));
    let mut acc = LevelAccumulator::default();
    loop {
        let n = acc.count();
        let batch = if n < cfg.min_samples {
            cfg.min_samples - n
        } else {
            let s2 = acc.summand.variance();
            if target <= 0.0 || s2 / n as f64 <= target {
                break;
            }
            let needed = libm::ceil(s2 / target) as u64;
            needed.saturating_sub(n).clamp(1, cfg.batch_size)
        };
        if n + batch > cfg.max_samples {
            return Err(Error::SampleBudgetExceeded {
                level: level.label(),
                limit: cfg.max_samples,
            });
        }
        acc = acc.merge(&exec.run(n, batch, &job)?);
    }
    Ok(acc)
}

fn pilot_levels<E: Executor + ?Sized>(
    problem: &Problem<'_>,
    cv: Option<&ControlVariate<'_>>,
    levels: &[Level],
    cfg: &EstimatorConfig,
    exec: &E,
) -> Result<Vec<LevelStats>> {
    levels
        .iter()
        .map(|level| {
            let acc = run_fixed(
                problem,
                cv,
                level,
                PHASE_PILOT,
                cfg.seed,
                cfg.pilot_samples,
                exec,
            )?;
            Ok(LevelStats::from_acc(*level, &acc))
        })
        .collect()
}

/// Runs `cfg.pilot_samples` paths or pairs per level of `plan` and reports
/// their cost and variance. Pilot paths use their own random streams and are
/// never reused by an estimate.
pub fn pilot<E: Executor + ?Sized>(
    problem: &Problem<'_>,
    plan: &LevelPlan,
    cfg: &EstimatorConfig,
    exec: &E,
) -> Result<Vec<LevelStats>> {
    problem.validate()?;
    cfg.validate()?;
    pilot_levels(problem, None, &plan.levels(problem.horizon), cfg, exec)
}

struct Run<'a, 'b> {
    problem: &'a Problem<'b>,
    cv: Option<&'a ControlVariate<'b>>,
    method: Method,
    biased: bool,
}

impl Run<'_, '_> {
    fn execute<E: Executor + ?Sized>(
        &self,
        levels: &[Level],
        cfg: &EstimatorConfig,
        exec: &E,
    ) -> Result<EstimateReport> {
        self.problem.validate()?;
        cfg.validate()?;
        if let Some(cv) = self.cv {
            cv.reduced.check_dimension(cv.x0)?;
            cv.observable.validate(cv.reduced)?;
        }
        let budget = cfg.budget();
        let mut warnings = Vec::new();
        let mut pilot_updates = 0;
        let mut predicted_speedup = None;
        let (targets, ks): (Vec<f64>, Option<Vec<f64>>) = if levels.len() == 1 {
            (vec![budget], None)
        } else {
            let stats = pilot_levels(self.problem, self.cv, levels, cfg, exec)?;
            pilot_updates = stats.iter().map(|s| s.updates).sum();
            let ks: Vec<f64> = stats.iter().map(|s| s.k).collect();
            let alloc = allocate(&ks, cfg.epsilon, cfg.z)?;
            if alloc.degenerate {
                warnings.push(String::from(
                    "pilot saw zero variance on every level; budget split evenly",
                ));
            }
            if self.method == Method::UnbiasedMlmc {
                let top = stats.last().expect("at least one level");
                let exact_cost = top.fine_variance * top.fine_cost_per_sample / budget;
                let mlmc_cost = predicted_cost(&ks, &alloc.targets);
                if mlmc_cost > 0.0 {
                    let speedup = exact_cost / mlmc_cost;
                    predicted_speedup = Some(speedup);
                    if speedup <= 1.0 {
                        warnings.push(format!(
                            "pilot predicts no speedup over exact-cmc (predicted factor {speedup:.3}); \
                             an exact simulator with crude Monte Carlo is recommended"
                        ));
                    }
                }
            }
            (alloc.targets, Some(ks))
        };

        let mut reports = Vec::with_capacity(levels.len());
        let mut estimate = 0.0;
        let mut variance = 0.0;
        let mut updates = 0u64;
        for (i, level) in levels.iter().enumerate() {
            let acc = run_to_target(self.problem, self.cv, level, targets[i], cfg, exec)?;
            estimate += acc.summand.mean();
            variance += acc.summand.mean_variance();
            updates += acc.updates;
            reports.push(LevelReport {
                label: level.label(),
                step: level.step(),
                samples: acc.count(),
                mean: acc.summand.mean(),
                sample_variance: acc.summand.variance(),
                estimator_variance: acc.summand.mean_variance(),
                target_variance: ks.as_ref().map(|_| targets[i]),
                pilot_k: ks.as_ref().map(|k| k[i]),
                updates: acc.updates,
            });
        }
        if self.biased {
            let h = levels
                .iter()
                .filter_map(Level::step)
                .fold(f64::INFINITY, f64::min);
            warnings.push(format!(
                "estimate targets the tau-leap approximation at h = {h}; its O(h) bias is not \
                 covered by the half-width"
            ));
        }
        Ok(EstimateReport {
            method: self.method,
            estimate,
            half_width: cfg.z * libm::sqrt(variance),
            z: cfg.z,
            confidence: libm::erf(cfg.z / core::f64::consts::SQRT_2),
            epsilon: cfg.epsilon,
            estimator_variance: variance,
            variance_budget: budget,
            biased: self.biased,
            levels: reports,
            total_updates: updates + pilot_updates,
            pilot_updates,
            predicted_speedup,
            seed: cfg.seed,
            warnings,
            wall_time_secs: None,
        })
    }
}

/// Crude Monte Carlo over exact paths, sampled until `z * s / sqrt(n) <=
/// epsilon` (at least `cfg.min_samples` paths).
pub fn cmc_exact<E: Executor + ?Sized>(
    problem: &Problem<'_>,
    cfg: &EstimatorConfig,
    exec: &E,
) -> Result<EstimateReport> {
    Run {
        problem,
        cv: None,
        method: Method::ExactCmc,
        biased: false,
    }
    .execute(&[Level::Exact], cfg, exec)
}

/// Crude Monte Carlo over tau-leap paths with step `h`; estimates
/// `E f(Z_h(T))`.
pub fn cmc_tau<E: Executor + ?Sized>(
    problem: &Problem<'_>,
    h: f64,
    cfg: &EstimatorConfig,
    exec: &E,
) -> Result<EstimateReport> {
    if !(h.is_finite() && h > 0.0) {
        return Err(invalid_argument("tau-leap step h must be finite and > 0"));
    }
    Run {
        problem,
        cv: None,
        method: Method::TauCmc,
        biased: true,
    }
    .execute(&[Level::Tau { level: None, h }], cfg, exec)
}

/// Multilevel estimator of `E f(Z_L(T))` built from tau-leap levels
/// `l0 ..= L`.
pub fn mlmc_biased<E: Executor + ?Sized>(
    problem: &Problem<'_>,
    m: u32,
    ell0: u32,
    finest: u32,
    cfg: &EstimatorConfig,
    exec: &E,
) -> Result<EstimateReport> {
    let plan = LevelPlan::new(m, ell0, finest, false)?;
    Run {
        problem,
        cv: None,
        method: Method::BiasedMlmc,
        biased: true,
    }
    .execute(&plan.levels(problem.horizon), cfg, exec)
}

/// Unbiased multilevel estimator of `E f(X(T))`: the tau-leap levels plus a
/// top level coupling the exact chain to `Z_L`.
pub fn mlmc_unbiased<E: Executor + ?Sized>(
    problem: &Problem<'_>,
    m: u32,
    ell0: u32,
    finest: u32,
    cfg: &EstimatorConfig,
    exec: &E,
) -> Result<EstimateReport> {
    let plan = LevelPlan::new(m, ell0, finest, true)?;
    Run {
        problem,
        cv: None,
        method: Method::UnbiasedMlmc,
        biased: false,
    }
    .execute(&plan.levels(problem.horizon), cfg, exec)
}

/// `E f(X) = E f(Z) + E[f(X) - f(Z)]`, with the first term from crude Monte
/// Carlo on the reduced chain and the second from exact/exact coupled pairs.
pub fn control_variate<E: Executor + ?Sized>(
    problem: &Problem<'_>,
    cv: &ControlVariate<'_>,
    cfg: &EstimatorConfig,
    exec: &E,
) -> Result<EstimateReport> {
    Run {
        problem,
        cv: Some(cv),
        method: Method::ControlVariate,
        biased: false,
    }
    .execute(&[Level::Reduced, Level::ExactPair], cfg, exec)
}
