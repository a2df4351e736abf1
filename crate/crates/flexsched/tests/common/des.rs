//! Discrete-event execution oracle: a priority queue of task completions
//! instead of the production topological forward pass.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use flexsched::{Instance, IntervalSchedule};

/// Executes the schedule under per-task extra durations and returns the
/// finish times with the sorted violated-task set.
pub fn des_execute(
    schedule: &IntervalSchedule,
    instance: &Instance,
    extra: &[f64],
) -> (Vec<f64>, Vec<usize>) {
    let n = instance.n_tasks();
    let mut waiting: Vec<usize> = (0..n).map(|t| instance.predecessors(t).len()).collect();
    let mut release = vec![0.0f64; n];
    let mut finish = vec![0.0f64; n];
    // Heap entries: completion events (time, task), processed in time order
    // with task id as tie-break.
    let mut events: BinaryHeap<Reverse<(OrderedTime, usize)>> = BinaryHeap::new();

    let launch = |t: usize, release_at: f64, events: &mut BinaryHeap<_>| {
        let start = release_at.max(schedule.start(t));
        let done = start + instance.duration(t) + extra[t];
        events.push(Reverse((OrderedTime(done), t)));
        done
    };

    for t in 0..n {
        if waiting[t] == 0 {
            finish[t] = launch(t, 0.0, &mut events);
        }
    }
    while let Some(Reverse((OrderedTime(done), t))) = events.pop() {
        for &s in instance.successors(t) {
            release[s] = release[s].max(done);
            waiting[s] -= 1;
            if waiting[s] == 0 {
                finish[s] = launch(s, release[s], &mut events);
            }
        }
    }

    let violations: Vec<usize> = (0..n)
        .filter(|&t| finish[t] > schedule.end(t) + instance.duration(t) + 1e-9)
        .collect();
    (finish, violations)
}

#[derive(PartialEq, PartialOrd)]
struct OrderedTime(f64);

impl Eq for OrderedTime {}

#[allow(clippy::derive_ord_xor_partial_ord)]
impl Ord for OrderedTime {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}
