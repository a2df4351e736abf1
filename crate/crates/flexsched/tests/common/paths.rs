//! Exhaustive path enumeration over small instances and the constraint-row
//! builders used by the oracles.

use flexsched::{Instance, TemporalProfile};

use super::vertex::OracleLp;

/// Every source-to-sink path, found by depth-first search. Only usable on
/// small instances; the count is exponential.
pub fn enumerate_paths(instance: &Instance) -> Vec<Vec<usize>> {
    let mut paths = Vec::new();
    let sources: Vec<usize> = (0..instance.n_tasks())
        .filter(|&t| instance.predecessors(t).is_empty())
        .collect();
    for source in sources {
        let mut stack = vec![(source, vec![source])];
        while let Some((node, path)) = stack.pop() {
            if instance.successors(node).is_empty() {
                paths.push(path);
                continue;
            }
            for &s in instance.successors(node) {
                let mut next = path.clone();
                next.push(s);
                stack.push((s, next));
            }
        }
    }
    paths
}

/// Slack of one path: deadline minus its total duration.
pub fn path_slack(instance: &Instance, deadline: f64, path: &[usize]) -> f64 {
    deadline - path.iter().map(|&t| instance.duration(t)).sum::<f64>()
}

/// Max-min flexibility by brute force: the uniform value is limited by every
/// path to its slack spread over its length.
pub fn maxmin_by_paths(instance: &Instance, deadline: f64) -> f64 {
    enumerate_paths(instance)
        .iter()
        .map(|p| path_slack(instance, deadline, p) / p.len() as f64)
        .fold(f64::INFINITY, f64::min)
        .max(0.0)
}

/// The flexibility-space constraint system with exhaustively enumerated
/// paths: `f >= lb` and `sum_{t in path} f_t <= slack(path)`, optionally with
/// a pinned total. Objective: total flexibility.
pub fn f_space_lp(
    instance: &Instance,
    deadline: f64,
    lower_bound: f64,
    total: Option<f64>,
) -> OracleLp {
    let n = instance.n_tasks();
    let mut ineqs = Vec::new();
    for t in 0..n {
        let mut row = vec![0.0; n];
        row[t] = -1.0;
        ineqs.push((row, -lower_bound));
    }
    for path in enumerate_paths(instance) {
        let mut row = vec![0.0; n];
        for &t in &path {
            row[t] = 1.0;
        }
        ineqs.push((row, path_slack(instance, deadline, &path)));
    }
    let eqs = match total {
        Some(total) => vec![(vec![1.0; n], total)],
        None => Vec::new(),
    };
    OracleLp {
        dim: n,
        objective: vec![1.0; n],
        ineqs,
        eqs,
    }
}

/// The raw interval-schedule constraint system over `x = [a; b]`:
/// `a >= 0`, `a <= b`, `b_u + l_u <= a_v` per edge, `b + l <= D`.
/// Objective: total flexibility `sum (b - a)`.
pub fn ab_space_lp(instance: &Instance, deadline: f64) -> OracleLp {
    let n = instance.n_tasks();
    let dim = 2 * n;
    let mut ineqs = Vec::new();
    for t in 0..n {
        let mut row = vec![0.0; dim];
        row[t] = -1.0; // -a_t <= 0
        ineqs.push((row, 0.0));

        let mut row = vec![0.0; dim];
        row[t] = 1.0; // a_t - b_t <= 0
        row[n + t] = -1.0;
        ineqs.push((row, 0.0));

        let mut row = vec![0.0; dim];
        row[n + t] = 1.0; // b_t <= D - l_t
        ineqs.push((row, deadline - instance.duration(t)));
    }
    for &(u, v) in instance.edges() {
        let mut row = vec![0.0; dim];
        row[n + u] = 1.0; // b_u - a_v <= -l_u
        row[v] = -1.0;
        ineqs.push((row, -instance.duration(u)));
    }
    let mut objective = vec![-1.0; dim];
    for c in objective.iter_mut().skip(n) {
        *c = 1.0;
    }
    OracleLp {
        dim,
        objective,
        ineqs,
        eqs: Vec::new(),
    }
}

/// Constraint system over window starts `a` for a fixed flexibility vector:
/// used to verify that the canonical placement is the component-wise least
/// feasible placement.
pub fn placement_lp(instance: &Instance, deadline: f64, flex: &[f64], minimize_task: usize) -> OracleLp {
    let n = instance.n_tasks();
    let mut ineqs = Vec::new();
    for t in 0..n {
        let mut row = vec![0.0; n];
        row[t] = -1.0; // -a_t <= 0
        ineqs.push((row, 0.0));

        let mut row = vec![0.0; n];
        row[t] = 1.0; // a_t <= D - l_t - f_t
        ineqs.push((row, deadline - instance.duration(t) - flex[t]));
    }
    for &(u, v) in instance.edges() {
        let mut row = vec![0.0; n];
        row[u] = 1.0; // a_u + f_u + l_u <= a_v
        row[v] = -1.0;
        ineqs.push((row, -(instance.duration(u) + flex[u])));
    }
    let mut objective = vec![0.0; n];
    objective[minimize_task] = -1.0;
    OracleLp {
        dim: n,
        objective,
        ineqs,
        eqs: Vec::new(),
    }
}

/// Reference temporal profile helper for oracle setups.
pub fn deadline_at(instance: &Instance, factor: f64) -> f64 {
    TemporalProfile::compute(instance, factor).deadline
}
