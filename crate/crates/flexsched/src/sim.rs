//! Randomized delay scenarios and schedule execution under them.
//!
//! Every run derives its own RNG seed by mixing the master seed, the
//! instance name, and the run index, so scenarios do not depend on
//! evaluation order and campaigns parallelize without losing
//! reproducibility.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::Instance;
use crate::schedule::IntervalSchedule;

/// Tolerance when deciding whether a finish time violates its window.
const VIOLATION_TOL: f64 = 1e-9;

/// Parameters of a delay campaign: the fraction `p` of (positive-duration)
/// tasks delayed, each by fraction `q` of its own length.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayParams {
    pub delayed_fraction: f64,
    pub delay_fraction: f64,
    pub runs: usize,
    pub master_seed: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("delayed fraction {0} is outside [0, 1]")]
    BadDelayedFraction(f64),
    #[error("delay fraction {0} is negative")]
    BadDelayFraction(f64),
    #[error("a campaign needs at least one run")]
    NoRuns,
    #[error("schedule has {schedule} tasks but instance has {instance}")]
    DimensionMismatch { schedule: usize, instance: usize },
}

impl DelayParams {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(0.0..=1.0).contains(&self.delayed_fraction) {
            return Err(SimError::BadDelayedFraction(self.delayed_fraction));
        }
        if self.delay_fraction < 0.0 {
            return Err(SimError::BadDelayFraction(self.delay_fraction));
        }
        if self.runs == 0 {
            return Err(SimError::NoRuns);
        }
        Ok(())
    }
}

/// Which tasks are delayed in one run, and by how much.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayScenario {
    /// Sorted ids of the delayed tasks.
    pub delayed: Vec<usize>,
    /// Per-task extra duration, `q * l_t` for delayed tasks and 0 otherwise.
    pub extra: Vec<f64>,
}

/// Actual start and finish times when the schedule runs under a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ExecutionTrace {
    pub start: Vec<f64>,
    pub finish: Vec<f64>,
    /// Sorted ids of tasks that finished after their window allowed.
    pub violations: Vec<usize>,
}

/// Per-run violation counts with their summary statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub counts: Vec<usize>,
    pub mean: f64,
    /// Unbiased sample variance; 0 by convention for a single run.
    pub variance: f64,
    /// Set when fewer than two runs make the variance meaningless.
    pub degenerate: bool,
}

/// SplitMix64 finalizer; the standard 64-bit avalanche mix.
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// Derives the per-run RNG seed from the campaign seed, the instance name,
/// and the run index.
pub fn mix_seed(master_seed: u64, instance_name: &str, run_index: u64) -> u64 {
    let with_name = splitmix64(master_seed ^ fnv1a(instance_name.as_bytes()));
    splitmix64(with_name ^ run_index)
}

/// Samples the delayed-task set for one run: `round(p * K)` tasks drawn
/// uniformly without replacement from the `K` tasks with positive duration.
pub fn sample_scenario(
    instance: &Instance,
    params: &DelayParams,
    run_index: usize,
) -> Result<DelayScenario, SimError> {
    params.validate()?;
    let mut eligible: Vec<usize> = (0..instance.n_tasks())
        .filter(|&t| instance.duration(t) > 0.0)
        .collect();
    // Round half up.
    let k = ((params.delayed_fraction * eligible.len() as f64) + 0.5).floor() as usize;
    let k = k.min(eligible.len());

    let seed = mix_seed(params.master_seed, instance.name(), run_index as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Partial Fisher-Yates: the first k slots become the sample.
    for i in 0..k {
        let j = rng.random_range(i..eligible.len());
        eligible.swap(i, j);
    }
    let mut delayed: Vec<usize> = eligible[..k].to_vec();
    delayed.sort_unstable();

    let mut extra = vec![0.0; instance.n_tasks()];
    for &t in &delayed {
        extra[t] = params.delay_fraction * instance.duration(t);
    }
    Ok(DelayScenario { delayed, extra })
}

/// Executes the schedule under a scenario with early-start dispatching:
/// every task starts at its window start unless a predecessor is still
/// running. A task is violated when it finishes after `b_t + l_t`.
pub fn execute(
    schedule: &IntervalSchedule,
    instance: &Instance,
    scenario: &DelayScenario,
) -> Result<ExecutionTrace, SimError> {
    if schedule.len() != instance.n_tasks() {
        return Err(SimError::DimensionMismatch {
            schedule: schedule.len(),
            instance: instance.n_tasks(),
        });
    }
    let n = instance.n_tasks();
    let mut start = vec![0.0; n];
    let mut finish = vec![0.0; n];
    let mut violations = Vec::new();
    for &t in instance.topological_order() {
        let mut s = schedule.start(t);
        for &p in instance.predecessors(t) {
            if finish[p] > s {
                s = finish[p];
            }
        }
        start[t] = s;
        finish[t] = s + instance.duration(t) + scenario.extra[t];
        let allowed = schedule.end(t) + instance.duration(t);
        if finish[t] > allowed + VIOLATION_TOL {
            violations.push(t);
        }
    }
    violations.sort_unstable();
    Ok(ExecutionTrace {
        start,
        finish,
        violations,
    })
}

/// Runs `params.runs` independent scenarios and summarizes the violation
/// counts. Runs are seeded individually, so the result does not depend on
/// evaluation order.
pub fn monte_carlo(
    schedule: &IntervalSchedule,
    instance: &Instance,
    params: &DelayParams,
) -> Result<SimulationResult, SimError> {
    params.validate()?;
    let mut counts = Vec::with_capacity(params.runs);
    for run in 0..params.runs {
        let scenario = sample_scenario(instance, params, run)?;
        let trace = execute(schedule, instance, &scenario)?;
        counts.push(trace.violations.len());
    }
    Ok(summarize(counts))
}

/// Mean and unbiased sample variance of the per-run violation counts.
pub fn summarize(counts: Vec<usize>) -> SimulationResult {
    let n = counts.len();
    let mean = counts.iter().sum::<usize>() as f64 / n as f64;
    let (variance, degenerate) = if n < 2 {
        (0.0, true)
    } else {
        let ss: f64 = counts
            .iter()
            .map(|&c| {
                let d = c as f64 - mean;
                d * d
            })
            .sum();
        (ss / (n - 1) as f64, false)
    };
    SimulationResult {
        counts,
        mean,
        variance,
        degenerate,
    }
}
