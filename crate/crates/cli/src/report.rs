//! Report documents (JSON), terminal tables and per-level CSV.

use std::fmt::Write as _;

use ctmc_mlmc::mlmc::{EstimateReport, Method};
use ctmc_mlmc::paths::ExactMethod;
use serde::{Deserialize, Serialize};

pub const REPORT_VERSION: u32 = 1;

/// Everything that determines the numbers in a report. Worker count is
/// deliberately absent: it never changes the result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    pub method: Method,
    pub epsilon: f64,
    pub z: f64,
    #[serde(rename = "M", default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l0: Option<u32>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub finest: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    pub seed: u64,
    pub batch: u64,
    pub min_samples: u64,
    pub pilot_samples: u64,
    pub max_samples: u64,
    pub max_path_updates: u64,
    pub exact_method: ExactMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunDocument {
    pub format_version: u32,
    pub model: String,
    pub observable: String,
    pub time: f64,
    pub settings: Settings,
    pub report: EstimateReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareDocument {
    pub format_version: u32,
    pub model: String,
    pub observable: String,
    pub time: f64,
    pub exact: RunDocument,
    pub mlmc: RunDocument,
    /// Exact-CMC total updates over MLMC total updates.
    pub speedup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PilotLevel {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    pub samples: u64,
    pub mean: f64,
    pub variance: f64,
    pub cost_per_sample: f64,
    pub k: f64,
    /// Predicted order of the level variance from the scaling diagnostics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_of_h: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PilotDocument {
    pub format_version: u32,
    pub model: String,
    pub observable: String,
    pub time: f64,
    #[serde(rename = "M")]
    pub m: u32,
    pub l0: u32,
    #[serde(rename = "L")]
    pub finest: u32,
    pub unbiased: bool,
    pub seed: u64,
    pub levels: Vec<PilotLevel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepRow {
    pub value: f64,
    pub epsilon: f64,
    #[serde(rename = "M")]
    pub m: u32,
    pub l0: u32,
    #[serde(rename = "L")]
    pub finest: u32,
    pub exact_estimate: f64,
    pub exact_half_width: f64,
    pub exact_updates: u64,
    pub mlmc_estimate: f64,
    pub mlmc_half_width: f64,
    pub mlmc_updates: u64,
    pub speedup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepDocument {
    pub format_version: u32,
    pub model: String,
    pub param: String,
    pub observable: String,
    pub time: f64,
    pub seed: u64,
    pub rows: Vec<SweepRow>,
}

pub fn to_json<T: Serialize>(doc: &T) -> String {
    let mut s = serde_json::to_string_pretty(doc).expect("reports serialize");
    s.push('\n');
    s
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".to_string(), |v| format!("{v:.4e}"))
}

pub fn estimate_table(doc: &RunDocument) -> String {
    let r = &doc.report;
    let mut out = String::new();
    let _ = writeln!(out, "model        {}", doc.model);
    let _ = writeln!(out, "observable   {} at T = {}", doc.observable, doc.time);
    let _ = writeln!(out, "method       {}", r.method.as_str());
    let _ = writeln!(
        out,
        "estimate     {:.6} +- {:.6} ({:.1}% CI, target +- {})",
        r.estimate,
        r.half_width,
        100.0 * r.confidence,
        r.epsilon
    );
    if r.biased {
        let _ = writeln!(
            out,
            "bias         not covered by the interval (tau-leap target)"
        );
    }
    let _ = writeln!(
        out,
        "updates      {} (pilot {})",
        r.total_updates, r.pilot_updates
    );
    if let Some(s) = r.predicted_speedup {
        let _ = writeln!(out, "predicted    {s:.2}x fewer updates than exact-cmc");
    }
    if let Some(t) = r.wall_time_secs {
        let _ = writeln!(out, "wall time    {t:.3} s");
    }
    let _ = writeln!(
        out,
        "\n{:<14} {:>11} {:>10} {:>14} {:>12} {:>12} {:>12} {:>14}",
        "level", "h", "samples", "mean", "variance", "V_l", "V_target", "updates"
    );
    for l in &r.levels {
        let _ = writeln!(
            out,
            "{:<14} {:>11} {:>10} {:>14.6} {:>12.4e} {:>12.4e} {:>12} {:>14}",
            l.label,
            fmt_opt(l.step),
            l.samples,
            l.mean,
            l.sample_variance,
            l.estimator_variance,
            fmt_opt(l.target_variance),
            l.updates
        );
    }
    for w in &r.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}

pub fn levels_csv(report: &EstimateReport) -> String {
    let mut out = String::from("level,step,samples,mean,sample_variance,estimator_variance,target_variance,pilot_k,updates\n");
    let opt = |x: Option<f64>| x.map(|v| v.to_string()).unwrap_or_default();
    for l in &report.levels {
        let _ = writeln!(
            out,
            "\"{}\",{},{},{},{},{},{},{},{}",
            l.label,
            opt(l.step),
            l.samples,
            l.mean,
            l.sample_variance,
            l.estimator_variance,
            opt(l.target_variance),
            opt(l.pilot_k),
            l.updates
        );
    }
    out
}

pub fn pilot_table(doc: &PilotDocument) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "pilot of {} ({} at T = {}), M = {}, l0 = {}, L = {}, {} samples per level",
        doc.model,
        doc.observable,
        doc.time,
        doc.m,
        doc.l0,
        doc.finest,
        doc.levels.first().map_or(0, |l| l.samples)
    );
    let _ = writeln!(
        out,
        "{:<14} {:>11} {:>14} {:>12} {:>12} {:>12} {:>11}",
        "level", "h", "mean", "variance", "cost/path", "K_l", "A(h)"
    );
    for l in &doc.levels {
        let _ = writeln!(
            out,
            "{:<14} {:>11} {:>14.6} {:>12.4e} {:>12.1} {:>12.4e} {:>11}",
            l.label,
            fmt_opt(l.step),
            l.mean,
            l.variance,
            l.cost_per_sample,
            l.k,
            fmt_opt(l.a_of_h)
        );
    }
    out
}

pub fn compare_table(doc: &CompareDocument) -> String {
    let mut out = String::new();
    for (name, d) in [("exact-cmc", &doc.exact), ("unbiased-mlmc", &doc.mlmc)] {
        let r = &d.report;
        let _ = writeln!(
            out,
            "{name:<14} {:>14.6} +- {:<12.6} updates {:>16}",
            r.estimate, r.half_width, r.total_updates
        );
    }
    let _ = writeln!(out, "speedup (updates)  {:.2}", doc.speedup);
    for w in doc
        .exact
        .report
        .warnings
        .iter()
        .chain(&doc.mlmc.report.warnings)
    {
        let _ = writeln!(out, "warning: {w}");
    }
    out
}

pub fn sweep_csv(doc: &SweepDocument) -> String {
    let mut out = format!(
        "{},epsilon,M,l0,L,exact_estimate,exact_half_width,exact_updates,mlmc_estimate,mlmc_half_width,mlmc_updates,speedup\n",
        doc.param
    );
    for r in &doc.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.value,
            r.epsilon,
            r.m,
            r.l0,
            r.finest,
            r.exact_estimate,
            r.exact_half_width,
            r.exact_updates,
            r.mlmc_estimate,
            r.mlmc_half_width,
            r.mlmc_updates,
            r.speedup
        );
    }
    out
}
