//! Project instances: tasks with durations, precedence constraints, and the
//! temporal quantities (earliest/latest starts, makespan, deadline) derived
//! from them.

use std::collections::BinaryHeap;
use std::collections::HashSet;

use thiserror::Error;

/// A single unit of work with a fixed duration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Task {
    /// Dense 0-based index.
    pub id: usize,
    /// Non-negative duration in time units.
    pub duration: f64,
}

/// How predecessors are counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredecessorMode {
    /// Immediate predecessors only.
    Direct,
    /// Distinct tasks reaching this one via a path of at most `N` edges.
    WithinDistance(usize),
    /// All distinct ancestors.
    Transitive,
}

/// A problem that failed instance validation. Every violation found is
/// reported, not just the first.
#[derive(Debug, Error, PartialEq)]
pub enum InstanceDefect {
    #[error("task {task} has negative duration {duration}")]
    NegativeDuration { task: usize, duration: f64 },
    #[error("edge ({pred}, {succ}) references a task id outside 0..{n_tasks}")]
    DanglingEdge {
        pred: usize,
        succ: usize,
        n_tasks: usize,
    },
    #[error("edge ({task}, {task}) is a self-loop")]
    SelfLoop { task: usize },
    #[error("edge ({pred}, {succ}) appears more than once")]
    DuplicateEdge { pred: usize, succ: usize },
    #[error("precedence graph contains a cycle: {cycle:?}")]
    CycleDetected { cycle: Vec<usize> },
}

/// Validation failure carrying every defect found.
#[derive(Debug, Error, PartialEq)]
#[error("invalid instance{}: {}", name_suffix(.name), format_defects(.defects))]
pub struct ValidationError {
    pub name: String,
    pub defects: Vec<InstanceDefect>,
}

fn name_suffix(name: &str) -> String {
    if name.is_empty() {
        String::new()
    } else {
        format!(" '{name}'")
    }
}

fn format_defects(defects: &[InstanceDefect]) -> String {
    defects
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// An immutable precedence DAG with task durations.
///
/// Construction validates all invariants (ids dense, durations non-negative,
/// edges well-formed, graph acyclic) and precomputes adjacency and a
/// deterministic topological order.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    name: String,
    durations: Vec<f64>,
    edges: Vec<(usize, usize)>,
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
    topo: Vec<usize>,
}

impl Instance {
    /// Builds an instance from per-task durations and precedence edges.
    /// Fails with the full list of defects if any invariant is violated.
    pub fn new(
        name: impl Into<String>,
        durations: Vec<f64>,
        edges: Vec<(usize, usize)>,
    ) -> Result<Self, ValidationError> {
        let name = name.into();
        let n = durations.len();
        let mut defects = Vec::new();

        for (id, &d) in durations.iter().enumerate() {
            if !(d >= 0.0) {
                defects.push(InstanceDefect::NegativeDuration {
                    task: id,
                    duration: d,
                });
            }
        }

        let mut seen = HashSet::new();
        for &(u, v) in &edges {
            if u >= n || v >= n {
                defects.push(InstanceDefect::DanglingEdge {
                    pred: u,
                    succ: v,
                    n_tasks: n,
                });
                continue;
            }
            if u == v {
                defects.push(InstanceDefect::SelfLoop { task: u });
                continue;
            }
            if !seen.insert((u, v)) {
                defects.push(InstanceDefect::DuplicateEdge { pred: u, succ: v });
            }
        }

        if !defects.is_empty() {
            return Err(ValidationError { name, defects });
        }

        let mut preds = vec![Vec::new(); n];
        let mut succs = vec![Vec::new(); n];
        let mut sorted_edges = edges;
        sorted_edges.sort_unstable();
        for &(u, v) in &sorted_edges {
            preds[v].push(u);
            succs[u].push(v);
        }

        match topological_sort(n, &succs, &preds) {
            Ok(topo) => Ok(Instance {
                name,
                durations,
                edges: sorted_edges,
                preds,
                succs,
                topo,
            }),
            Err(cycle) => Err(ValidationError {
                name,
                defects: vec![InstanceDefect::CycleDetected { cycle }],
            }),
        }
    }

    /// Same instance under a different label.
    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_tasks(&self) -> usize {
        self.durations.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn duration(&self, task: usize) -> f64 {
        self.durations[task]
    }

    pub fn durations(&self) -> &[f64] {
        &self.durations
    }

    /// Edges sorted ascending by (pred, succ).
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn predecessors(&self, task: usize) -> &[usize] {
        &self.preds[task]
    }

    pub fn successors(&self, task: usize) -> &[usize] {
        &self.succs[task]
    }

    pub fn tasks(&self) -> impl Iterator<Item = Task> + '_ {
        self.durations
            .iter()
            .enumerate()
            .map(|(id, &duration)| Task { id, duration })
    }

    /// Topological order with ties broken by ascending id.
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    /// Per-task predecessor counts under the requested mode.
    pub fn predecessor_counts(&self, mode: PredecessorMode) -> Vec<usize> {
        match mode {
            PredecessorMode::Direct => self.preds.iter().map(Vec::len).collect(),
            PredecessorMode::WithinDistance(dist) => (0..self.n_tasks())
                .map(|t| self.ancestors_within(t, dist).len())
                .collect(),
            PredecessorMode::Transitive => (0..self.n_tasks())
                .map(|t| self.ancestors_within(t, usize::MAX).len())
                .collect(),
        }
    }

    /// Per-task direct successor counts.
    pub fn successor_counts(&self) -> Vec<usize> {
        self.succs.iter().map(Vec::len).collect()
    }

    fn ancestors_within(&self, task: usize, max_depth: usize) -> HashSet<usize> {
        let mut seen = HashSet::new();
        let mut frontier = vec![task];
        let mut depth = 0usize;
        while !frontier.is_empty() && depth < max_depth {
            let mut next = Vec::new();
            for &t in &frontier {
                for &p in &self.preds[t] {
                    if seen.insert(p) {
                        next.push(p);
                    }
                }
            }
            frontier = next;
            depth += 1;
        }
        seen
    }
}

/// Kahn's algorithm with a min-heap so equal in-degree ties resolve by
/// ascending id. Returns one cycle's member tasks on failure.
fn topological_sort(
    n: usize,
    succs: &[Vec<usize>],
    preds: &[Vec<usize>],
) -> Result<Vec<usize>, Vec<usize>> {
    let mut in_degree: Vec<usize> = preds.iter().map(Vec::len).collect();
    let mut ready: BinaryHeap<std::cmp::Reverse<usize>> = (0..n)
        .filter(|&t| in_degree[t] == 0)
        .map(std::cmp::Reverse)
        .collect();
    let mut order = Vec::with_capacity(n);

    while let Some(std::cmp::Reverse(t)) = ready.pop() {
        order.push(t);
        for &s in &succs[t] {
            in_degree[s] -= 1;
            if in_degree[s] == 0 {
                ready.push(std::cmp::Reverse(s));
            }
        }
    }

    if order.len() == n {
        Ok(order)
    } else {
        Err(extract_cycle(n, &in_degree, preds))
    }
}

/// Walks backwards through unresolved tasks until one repeats, then returns
/// the loop portion of the walk.
fn extract_cycle(n: usize, in_degree: &[usize], preds: &[Vec<usize>]) -> Vec<usize> {
    let start = (0..n).find(|&t| in_degree[t] > 0).expect("cycle exists");
    let stuck: HashSet<usize> = (0..n).filter(|&t| in_degree[t] > 0).collect();
    let mut walk = vec![start];
    let mut seen_at = std::collections::HashMap::new();
    seen_at.insert(start, 0usize);
    let mut cur = start;
    loop {
        let next = *preds[cur]
            .iter()
            .find(|p| stuck.contains(p))
            .expect("unresolved task keeps an unresolved predecessor");
        if let Some(&pos) = seen_at.get(&next) {
            let mut cycle: Vec<usize> = walk[pos..].to_vec();
            cycle.reverse();
            return cycle;
        }
        seen_at.insert(next, walk.len());
        walk.push(next);
        cur = next;
    }
}

/// Earliest/latest start times under a deadline, plus makespan.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalProfile {
    pub est: Vec<f64>,
    pub lst: Vec<f64>,
    pub makespan: f64,
    pub deadline: f64,
}

impl TemporalProfile {
    /// Forward longest-path pass for earliest starts, then a backward pass
    /// from `deadline_factor * makespan` for latest starts.
    pub fn compute(instance: &Instance, deadline_factor: f64) -> Self {
        assert!(
            deadline_factor >= 1.0,
            "deadline factor must be at least 1, got {deadline_factor}"
        );
        let (est, makespan) = earliest_starts(instance);
        Self::finish(instance, est, makespan, deadline_factor * makespan)
    }

    /// As [`TemporalProfile::compute`] but against an absolute deadline,
    /// which may lie below the makespan (latest starts then precede earliest
    /// ones).
    pub fn with_deadline(instance: &Instance, deadline: f64) -> Self {
        let (est, makespan) = earliest_starts(instance);
        Self::finish(instance, est, makespan, deadline)
    }

    fn finish(instance: &Instance, est: Vec<f64>, makespan: f64, deadline: f64) -> Self {
        let mut lst = vec![f64::INFINITY; instance.n_tasks()];
        for &t in instance.topological_order().iter().rev() {
            let latest_finish = instance
                .successors(t)
                .iter()
                .map(|&s| lst[s])
                .fold(deadline, f64::min);
            lst[t] = latest_finish - instance.duration(t);
        }
        TemporalProfile {
            est,
            lst,
            makespan,
            deadline,
        }
    }

    /// Per-task maximum flexibility `lst - est` (classical total slack).
    pub fn max_task_flexibility(&self) -> Vec<f64> {
        self.est
            .iter()
            .zip(&self.lst)
            .map(|(&e, &l)| l - e)
            .collect()
    }
}

fn earliest_starts(instance: &Instance) -> (Vec<f64>, f64) {
    let n = instance.n_tasks();
    let mut est = vec![0.0; n];
    for &t in instance.topological_order() {
        for &p in instance.predecessors(t) {
            let ready = est[p] + instance.duration(p);
            if ready > est[t] {
                est[t] = ready;
            }
        }
    }
    let makespan = (0..n)
        .map(|t| est[t] + instance.duration(t))
        .fold(0.0, f64::max);
    (est, makespan)
}
