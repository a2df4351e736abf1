//! Interval schedules: each task gets a window `[a_t, b_t]` of allowed start
//! times. Windows decouple across precedence edges, so any start choice
//! within each window executes consistently.

use thiserror::Error;

use crate::instance::{Instance, TemporalProfile};

/// Default additive tolerance for feasibility checks.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Flexibility at or below this threshold counts as zero.
pub const ZERO_FLEX_TOL: f64 = 1e-9;

/// Per-task start windows. Stored as `(start, flex)` so the window end is
/// `start + flex` and total flexibility sums the stored values directly.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSchedule {
    starts: Vec<f64>,
    flex: Vec<f64>,
}

#[derive(Debug, Error, PartialEq)]
pub enum ScheduleError {
    #[error("starts and flexibilities have different lengths ({starts} vs {flex})")]
    LengthMismatch { starts: usize, flex: usize },
    #[error("schedule has {schedule} tasks but instance has {instance}")]
    DimensionMismatch { schedule: usize, instance: usize },
    #[error("flexibilities are infeasible: task {task} finishes {excess} past the deadline")]
    InfeasibleFlexibilities { task: usize, excess: f64 },
}

/// One violated interval-schedule invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum ScheduleViolation {
    /// `a_t < 0`.
    NegativeStart { task: usize, start: f64 },
    /// `b_t < a_t`.
    NegativeFlexibility { task: usize, flex: f64 },
    /// `b_t + l_t > a_u` for edge `(t, u)`.
    CouplingBroken { pred: usize, succ: usize, excess: f64 },
    /// `b_t + l_t > D`.
    DeadlineExceeded { task: usize, excess: f64 },
}

impl IntervalSchedule {
    pub fn new(starts: Vec<f64>, flex: Vec<f64>) -> Result<Self, ScheduleError> {
        if starts.len() != flex.len() {
            return Err(ScheduleError::LengthMismatch {
                starts: starts.len(),
                flex: flex.len(),
            });
        }
        Ok(IntervalSchedule { starts, flex })
    }

    /// The tight schedule `a = b = est`: zero flexibility everywhere.
    pub fn tight(profile: &TemporalProfile) -> Self {
        IntervalSchedule {
            starts: profile.est.clone(),
            flex: vec![0.0; profile.est.len()],
        }
    }

    pub fn len(&self) -> usize {
        self.starts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.starts.is_empty()
    }

    /// Window start `a_t`.
    pub fn start(&self, task: usize) -> f64 {
        self.starts[task]
    }

    /// Window end `b_t = a_t + f_t`.
    pub fn end(&self, task: usize) -> f64 {
        self.starts[task] + self.flex[task]
    }

    /// Window length `f_t`.
    pub fn flexibility(&self, task: usize) -> f64 {
        self.flex[task]
    }

    pub fn flexibilities(&self) -> &[f64] {
        &self.flex
    }

    pub fn starts(&self) -> &[f64] {
        &self.starts
    }

    /// Sum of all window lengths.
    pub fn total_flexibility(&self) -> f64 {
        self.flex.iter().sum()
    }

    /// Number of tasks whose flexibility is at most `tol`.
    pub fn zero_count(&self, tol: f64) -> usize {
        self.flex.iter().filter(|&&f| f <= tol).count()
    }

    /// Verifies all four interval-schedule invariants within `tol`, listing
    /// every violated constraint.
    pub fn check_feasible(
        &self,
        instance: &Instance,
        deadline: f64,
        tol: f64,
    ) -> Result<Vec<ScheduleViolation>, ScheduleError> {
        if self.len() != instance.n_tasks() {
            return Err(ScheduleError::DimensionMismatch {
                schedule: self.len(),
                instance: instance.n_tasks(),
            });
        }
        let mut violations = Vec::new();
        for t in 0..self.len() {
            if self.starts[t] < -tol {
                violations.push(ScheduleViolation::NegativeStart {
                    task: t,
                    start: self.starts[t],
                });
            }
            if self.flex[t] < -tol {
                violations.push(ScheduleViolation::NegativeFlexibility {
                    task: t,
                    flex: self.flex[t],
                });
            }
            let latest_finish = self.end(t) + instance.duration(t);
            if latest_finish > deadline + tol {
                violations.push(ScheduleViolation::DeadlineExceeded {
                    task: t,
                    excess: latest_finish - deadline,
                });
            }
        }
        for &(u, v) in instance.edges() {
            let excess = self.end(u) + instance.duration(u) - self.starts[v];
            if excess > tol {
                violations.push(ScheduleViolation::CouplingBroken {
                    pred: u,
                    succ: v,
                    excess,
                });
            }
        }
        Ok(violations)
    }
}

/// Pins flexibilities to concrete windows by placing every task as early as
/// its predecessors' window ends allow. The result is the unique earliest
/// placement, making strategy outputs reproducible byte for byte.
pub fn canonicalize(
    flex: &[f64],
    instance: &Instance,
    deadline: f64,
) -> Result<IntervalSchedule, ScheduleError> {
    if flex.len() != instance.n_tasks() {
        return Err(ScheduleError::DimensionMismatch {
            schedule: flex.len(),
            instance: instance.n_tasks(),
        });
    }
    let mut starts = vec![0.0; flex.len()];
    for &t in instance.topological_order() {
        let mut a = 0.0f64;
        for &p in instance.predecessors(t) {
            let release = starts[p] + flex[p] + instance.duration(p);
            if release > a {
                a = release;
            }
        }
        let latest_finish = a + flex[t] + instance.duration(t);
        if latest_finish > deadline + FEASIBILITY_TOL {
            return Err(ScheduleError::InfeasibleFlexibilities {
                task: t,
                excess: latest_finish - deadline,
            });
        }
        starts[t] = a;
    }
    Ok(IntervalSchedule {
        starts,
        flex: flex.to_vec(),
    })
}
