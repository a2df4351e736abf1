//! Flexible scheduling for precedence-constrained projects under a deadline.
//!
//! Instead of fixed start times, every task receives a start interval; the
//! interval lengths ("flexibility") are spread over the tasks by one of
//! several distribution strategies, each built from staged convex
//! optimization problems. Seeded Monte-Carlo simulation then measures how
//! well each distribution absorbs randomized task delays.

pub mod analysis;
pub mod ingest;
pub mod instance;
pub mod schedule;
pub mod sim;
pub mod solver;
pub mod strategy;

pub use instance::{Instance, PredecessorMode, Task, TemporalProfile, ValidationError};
pub use schedule::{canonicalize, IntervalSchedule, ScheduleError, ScheduleViolation};
pub use sim::{execute, monte_carlo, sample_scenario, DelayParams, DelayScenario, ExecutionTrace};
pub use solver::{
    solve_equalise, solve_max_min_flex, solve_max_total_flex, solve_max_total_flex_bounded,
    verify_kkt, EqualiseSpec, FeasibleSet, KktReport, SolveError,
};
pub use strategy::{distribute, weights, Strategy, StrategyError, ALL_STRATEGIES};
