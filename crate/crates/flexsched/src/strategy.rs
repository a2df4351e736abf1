//! The flexibility-distribution strategies. Each one composes the solver
//! stages and pins the result to a canonical earliest-placement schedule.

use std::fmt;
use std::str::FromStr;

use crate::instance::{Instance, PredecessorMode, TemporalProfile};
use crate::schedule::{canonicalize, IntervalSchedule, ScheduleError};
use crate::solver::{
    self, EqualiseSpec, FeasibleSet, PathCache, SolveError,
};

use thiserror::Error;

/// A named way of spreading flexibility over the tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    /// Maximize total flexibility, then equalise at that total.
    Maximal,
    /// Minimize the squared flexibility loss with unit weights.
    Equalised,
    /// Equalise weighted by the number of direct predecessors.
    Wpre,
    /// Equalise weighted by the number of predecessors within `N` steps.
    WpreN(usize),
    /// Equalise weighted by the number of all (transitive) predecessors.
    Wallpre,
    /// Equalise weighted by the number of direct successors.
    Wsucc,
    /// Maximize the minimum flexibility, re-maximize the total above that
    /// floor, then equalise at the total with the floor kept.
    MaxMinflex,
    /// Maximize the minimum flexibility, then equalise weighted by
    /// successors with the floor kept.
    WsuccMinflex,
}

/// The distance used by the paper-style `wpre5` strategy.
pub const DEFAULT_WPREN_DISTANCE: usize = 5;

/// All strategies in their canonical reporting order, with `wpreN`
/// instantiated at distance 5.
pub const ALL_STRATEGIES: [Strategy; 8] = [
    Strategy::Maximal,
    Strategy::Equalised,
    Strategy::Wpre,
    Strategy::WpreN(DEFAULT_WPREN_DISTANCE),
    Strategy::Wallpre,
    Strategy::Wsucc,
    Strategy::MaxMinflex,
    Strategy::WsuccMinflex,
];

#[derive(Debug, Error, PartialEq)]
#[error("unknown strategy '{0}'")]
pub struct ParseStrategyError(String);

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Maximal => write!(f, "maximal"),
            Strategy::Equalised => write!(f, "equalised"),
            Strategy::Wpre => write!(f, "wpre"),
            Strategy::WpreN(n) => write!(f, "wpre{n}"),
            Strategy::Wallpre => write!(f, "wallpre"),
            Strategy::Wsucc => write!(f, "wsucc"),
            Strategy::MaxMinflex => write!(f, "max_minflex"),
            Strategy::WsuccMinflex => write!(f, "wsucc_minflex"),
        }
    }
}

impl FromStr for Strategy {
    type Err = ParseStrategyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "maximal" => Ok(Strategy::Maximal),
            "equalised" => Ok(Strategy::Equalised),
            "wpre" => Ok(Strategy::Wpre),
            "wallpre" => Ok(Strategy::Wallpre),
            "wsucc" => Ok(Strategy::Wsucc),
            "max_minflex" => Ok(Strategy::MaxMinflex),
            "wsucc_minflex" => Ok(Strategy::WsuccMinflex),
            _ => {
                if let Some(digits) = s.strip_prefix("wpre") {
                    if let Ok(n) = digits.parse::<usize>() {
                        if n >= 1 {
                            return Ok(Strategy::WpreN(n));
                        }
                    }
                }
                Err(ParseStrategyError(s.to_string()))
            }
        }
    }
}

#[derive(Debug, Error)]
pub enum StrategyError {
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
}

/// Per-task weights for the weighted strategies: one plus the relevant
/// neighbour count, so weights stay strictly positive and source tasks keep
/// uniform relative weight.
pub fn weights(strategy: Strategy, instance: &Instance) -> Vec<f64> {
    let counts = match strategy {
        Strategy::Wpre => instance.predecessor_counts(PredecessorMode::Direct),
        Strategy::WpreN(n) => instance.predecessor_counts(PredecessorMode::WithinDistance(n)),
        Strategy::Wallpre => instance.predecessor_counts(PredecessorMode::Transitive),
        Strategy::Wsucc | Strategy::WsuccMinflex => instance.successor_counts(),
        Strategy::Maximal | Strategy::Equalised | Strategy::MaxMinflex => {
            vec![0; instance.n_tasks()]
        }
    };
    counts.into_iter().map(|c| 1.0 + c as f64).collect()
}

/// Runs the strategy's stage composition on `instance` under the deadline
/// `deadline_factor * makespan` and returns the canonical schedule.
pub fn distribute(
    strategy: Strategy,
    instance: &Instance,
    deadline_factor: f64,
) -> Result<IntervalSchedule, StrategyError> {
    let profile = TemporalProfile::compute(instance, deadline_factor);
    let fs = FeasibleSet::new(instance, profile.deadline)?;
    let flex = distribute_flex(strategy, instance, &fs)?;
    Ok(canonicalize(&flex, instance, fs.deadline())?)
}

fn distribute_flex(
    strategy: Strategy,
    instance: &Instance,
    fs: &FeasibleSet,
) -> Result<Vec<f64>, SolveError> {
    let targets = fs.max_task_flexibility().to_vec();
    let n = instance.n_tasks();
    let mut cache = PathCache::default();
    let mut spec = EqualiseSpec {
        targets,
        weights: vec![1.0; n],
        lower_bound: 0.0,
        total_flex: None,
    };

    match strategy {
        Strategy::Equalised => {}
        Strategy::Wpre | Strategy::WpreN(_) | Strategy::Wallpre | Strategy::Wsucc => {
            spec.weights = weights(strategy, instance);
        }
        Strategy::Maximal => {
            let (total, _) = solver::max_total_flex_cached(fs, 0.0, &mut cache)?;
            spec.total_flex = Some(total);
        }
        Strategy::MaxMinflex => {
            let (floor, _) = solver::solve_max_min_flex(fs)?;
            let (total, _) = solver::max_total_flex_cached(fs, floor, &mut cache)?;
            spec.lower_bound = floor;
            spec.total_flex = Some(total);
        }
        Strategy::WsuccMinflex => {
            let (floor, _) = solver::solve_max_min_flex(fs)?;
            spec.weights = weights(strategy, instance);
            spec.lower_bound = floor;
        }
    }
    solver::equalise_cached(fs, &spec, &mut cache)
}
