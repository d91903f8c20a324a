use alloc::string::String;
use alloc::vec::Vec;

/// Which estimator produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Method {
    ExactCmc,
    TauCmc,
    BiasedMlmc,
    UnbiasedMlmc,
    ControlVariate,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::ExactCmc => "exact-cmc",
            Method::TauCmc => "tau-cmc",
            Method::BiasedMlmc => "biased-mlmc",
            Method::UnbiasedMlmc => "unbiased-mlmc",
            Method::ControlVariate => "control-variate",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LevelReport {
    pub label: String,
    /// Step size of the finest tau-leap member, if any.
    pub step: Option<f64>,
    pub samples: u64,
    pub mean: f64,
    pub sample_variance: f64,
    pub estimator_variance: f64,
    /// Allocated variance target; `None` for single-level runs.
    pub target_variance: Option<f64>,
    /// `K_l` from the pilot, when one was run.
    pub pilot_k: Option<f64>,
    pub updates: u64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EstimateReport {
    pub method: Method,
    pub estimate: f64,
    pub half_width: f64,
    pub z: f64,
    pub confidence: f64,
    pub epsilon: f64,
    pub estimator_variance: f64,
    /// `(epsilon / z)^2`.
    pub variance_budget: f64,
    /// Whether the estimate targets a tau-leap approximation rather than the
    /// exact chain.
    pub biased: bool,
    /// Levels in ascending order; the estimate is the sum of their means in
    /// this order.
    pub levels: Vec<LevelReport>,
    /// Updates of the main run plus the pilot.
    pub total_updates: u64,
    pub pilot_updates: u64,
    /// Pilot prediction of exact-CMC cost over MLMC cost, unbiased mode only.
    pub predicted_speedup: Option<f64>,
    pub seed: u64,
    pub warnings: Vec<String>,
    #[cfg_attr(
        feature = "serde",
        serde(default, skip_serializing_if = "Option::is_none")
    )]
    pub wall_time_secs: Option<f64>,
}
