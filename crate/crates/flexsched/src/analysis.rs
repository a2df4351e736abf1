//! Instance metrics, flexibility-distribution metrics, histogramming, and
//! the statistics used by the experiment reports.

use thiserror::Error;

use crate::instance::{Instance, TemporalProfile};
use crate::schedule::{IntervalSchedule, ZERO_FLEX_TOL};

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("degenerate horizon: makespan is zero")]
    DegenerateHorizon,
    #[error("series lengths differ ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("series is constant; correlation is undefined")]
    ConstantSeries,
    #[error("both samples have zero variance; the t statistic is undefined")]
    DegenerateVariance,
}

/// Structural metrics of one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceMetrics {
    pub avg_tight_width: f64,
    pub avg_filled_width: f64,
    pub natural_flex: f64,
    pub complexity: i64,
}

/// Metrics of one flexibility distribution on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct FlexMetrics {
    pub num_zeros: usize,
    pub flex_x_pred: f64,
    pub flex_x_succ: f64,
    pub total_flex: f64,
}

/// Which reading of the natural-flexibility formula to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NaturalFlexMode {
    /// Slack between each task's tight finish and its earliest successor's
    /// tight start; sinks measured against the makespan.
    #[default]
    Slack,
    /// Gap between start times instead of finish-to-start slack, skipping
    /// sink tasks. Kept for comparison with older tooling.
    StartGap,
}

/// Average number of simultaneous tasks per time unit when everything is
/// scheduled at its earliest start: total work over the makespan.
pub fn avg_tight_width(instance: &Instance) -> Result<f64, AnalysisError> {
    let profile = TemporalProfile::compute(instance, 1.0);
    if profile.makespan <= 0.0 {
        return Err(AnalysisError::DegenerateHorizon);
    }
    let work: f64 = instance.durations().iter().sum();
    Ok(work / profile.makespan)
}

/// Average simultaneous tasks when every window is stretched until its
/// earliest successor's tight start (sinks stretch to the makespan).
pub fn avg_filled_width(instance: &Instance) -> Result<f64, AnalysisError> {
    let profile = TemporalProfile::compute(instance, 1.0);
    if profile.makespan <= 0.0 {
        return Err(AnalysisError::DegenerateHorizon);
    }
    let coverage: f64 = (0..instance.n_tasks())
        .map(|t| successor_horizon(instance, &profile, t) - profile.est[t])
        .sum();
    Ok(coverage / profile.makespan)
}

/// Total slack between each task's tight finish and its earliest successor's
/// tight start.
pub fn natural_flexibility(instance: &Instance, mode: NaturalFlexMode) -> f64 {
    let profile = TemporalProfile::compute(instance, 1.0);
    (0..instance.n_tasks())
        .map(|t| match mode {
            NaturalFlexMode::Slack => {
                successor_horizon(instance, &profile, t) - profile.est[t] - instance.duration(t)
            }
            NaturalFlexMode::StartGap => {
                if instance.successors(t).is_empty() {
                    0.0
                } else {
                    successor_horizon(instance, &profile, t) - profile.est[t]
                }
            }
        })
        .sum()
}

/// Earliest start among a task's successors, or the makespan for sinks.
fn successor_horizon(instance: &Instance, profile: &TemporalProfile, task: usize) -> f64 {
    instance
        .successors(task)
        .iter()
        .map(|&s| profile.est[s])
        .fold(
            if instance.successors(task).is_empty() {
                profile.makespan
            } else {
                f64::INFINITY
            },
            f64::min,
        )
}

/// Cyclomatic complexity `E - N + 2` of the precedence graph.
pub fn complexity(instance: &Instance) -> i64 {
    instance.n_edges() as i64 - instance.n_tasks() as i64 + 2
}

pub fn instance_metrics(instance: &Instance) -> Result<InstanceMetrics, AnalysisError> {
    Ok(InstanceMetrics {
        avg_tight_width: avg_tight_width(instance)?,
        avg_filled_width: avg_filled_width(instance)?,
        natural_flex: natural_flexibility(instance, NaturalFlexMode::Slack),
        complexity: complexity(instance),
    })
}

/// Distribution metrics of a schedule: zero-flexibility count and the
/// flexibility mass weighted by direct predecessor/successor counts.
pub fn flex_metrics(schedule: &IntervalSchedule, instance: &Instance) -> FlexMetrics {
    let mut flex_x_pred = 0.0;
    let mut flex_x_succ = 0.0;
    for t in 0..instance.n_tasks() {
        let f = schedule.flexibility(t);
        flex_x_pred += f * instance.predecessors(t).len() as f64;
        flex_x_succ += f * instance.successors(t).len() as f64;
    }
    FlexMetrics {
        num_zeros: schedule.zero_count(ZERO_FLEX_TOL),
        flex_x_pred,
        flex_x_succ,
        total_flex: schedule.total_flexibility(),
    }
}

/// Histogram of per-task flexibilities, averaged over the given schedules.
/// The first bin counts exactly the zero-flexibility tasks; bin `k >= 1`
/// covers `((k-1)w, kw]`.
pub fn flex_histogram(schedules: &[IntervalSchedule], bin_width: f64) -> Vec<f64> {
    assert!(bin_width > 0.0, "bin width must be positive");
    let mut sums: Vec<f64> = Vec::new();
    for schedule in schedules {
        for &f in schedule.flexibilities() {
            let bin = if f <= ZERO_FLEX_TOL {
                0
            } else {
                (f / bin_width).ceil() as usize
            };
            if bin >= sums.len() {
                sums.resize(bin + 1, 0.0);
            }
            sums[bin] += 1.0;
        }
    }
    let count = schedules.len().max(1) as f64;
    for s in &mut sums {
        *s /= count;
    }
    sums
}

/// Sample Pearson correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, AnalysisError> {
    if x.len() != y.len() {
        return Err(AnalysisError::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(AnalysisError::InsufficientSamples {
            needed: 2,
            got: x.len(),
        });
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let dx = xi - mean_x;
        let dy = yi - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(AnalysisError::ConstantSeries);
    }
    Ok((cov / (var_x.sqrt() * var_y.sqrt())).clamp(-1.0, 1.0))
}

/// Unbiased sample variance.
pub fn variance(x: &[f64]) -> Result<f64, AnalysisError> {
    if x.len() < 2 {
        return Err(AnalysisError::InsufficientSamples {
            needed: 2,
            got: x.len(),
        });
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let ss: f64 = x.iter().map(|&v| (v - mean) * (v - mean)).sum();
    Ok(ss / (n - 1.0))
}

/// Welch's two-sample t statistic with Satterthwaite degrees of freedom and
/// a two-sided p-value.
#[derive(Debug, Clone, PartialEq)]
pub struct WelchT {
    pub t: f64,
    pub dof: f64,
    pub p: f64,
}

pub fn welch_t(x: &[f64], y: &[f64]) -> Result<WelchT, AnalysisError> {
    if x.len() < 2 || y.len() < 2 {
        return Err(AnalysisError::InsufficientSamples {
            needed: 2,
            got: x.len().min(y.len()),
        });
    }
    let nx = x.len() as f64;
    let ny = y.len() as f64;
    let mean_x = x.iter().sum::<f64>() / nx;
    let mean_y = y.iter().sum::<f64>() / ny;
    let var_x = variance(x)?;
    let var_y = variance(y)?;
    let sx = var_x / nx;
    let sy = var_y / ny;
    if sx + sy == 0.0 {
        return Err(AnalysisError::DegenerateVariance);
    }
    let se = (sx + sy).sqrt();
    let t = (mean_x - mean_y) / se;
    let dof = (sx + sy) * (sx + sy) / (sx * sx / (nx - 1.0) + sy * sy / (ny - 1.0));
    // Two-sided p through the regularized incomplete beta function.
    let p = statrs::function::beta::beta_reg(dof / 2.0, 0.5, dof / (dof + t * t));
    Ok(WelchT { t, dof, p })
}

/// Fraction of instances where the candidate's mean is strictly below the
/// baseline's; ties do not count.
pub fn outperform_rate(candidate: &[f64], baseline: &[f64]) -> Result<f64, AnalysisError> {
    if candidate.len() != baseline.len() {
        return Err(AnalysisError::LengthMismatch {
            left: candidate.len(),
            right: baseline.len(),
        });
    }
    if candidate.is_empty() {
        return Err(AnalysisError::InsufficientSamples { needed: 1, got: 0 });
    }
    let wins = candidate
        .iter()
        .zip(baseline)
        .filter(|(c, b)| c < b)
        .count();
    Ok(wins as f64 / candidate.len() as f64)
}
