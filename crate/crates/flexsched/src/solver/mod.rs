//! Optimization stages shared by every flexibility-distribution strategy.
//!
//! All three problem shapes are solved over the flexibility vector `f`
//! directly. A vector `f >= lb` is realizable by an interval schedule iff the
//! earliest placement (every window pushed left) finishes by the deadline,
//! which holds iff `sum_{t in pi} (l_t + f_t) <= D` for every source-to-sink
//! path `pi`. There are exponentially many such path constraints, so masters
//! are solved against a growing working set: solve, push the solution through
//! a forward placement pass, and if some task overruns the deadline, add the
//! critical path that witnesses the overrun. Termination follows because each
//! round adds a path the master has not seen.

mod qp;
mod simplex;

use std::collections::HashSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::{Instance, TemporalProfile};

/// Placement overruns up to this much are treated as feasible during
/// constraint generation.
const GENERATION_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("infeasible: deadline {deadline} is below the makespan {makespan}")]
    Infeasible { deadline: f64, makespan: f64 },
    #[error("infeasible specification: {0}")]
    InfeasibleSpec(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl From<simplex::SimplexError> for SolveError {
    fn from(err: simplex::SimplexError) -> Self {
        SolveError::Numerical(err.to_string())
    }
}

impl From<qp::QpError> for SolveError {
    fn from(err: qp::QpError) -> Self {
        SolveError::Numerical(err.to_string())
    }
}

/// The constraint system of interval schedules for one instance under one
/// deadline: window starts at or after zero, windows ordered, windows
/// decoupled across every edge, and every window's latest finish at or
/// before the deadline.
#[derive(Debug, Clone)]
pub struct FeasibleSet<'a> {
    instance: &'a Instance,
    deadline: f64,
    makespan: f64,
    max_flex: Vec<f64>,
}

impl<'a> FeasibleSet<'a> {
    pub fn new(instance: &'a Instance, deadline: f64) -> Result<Self, SolveError> {
        let profile = TemporalProfile::with_deadline(instance, deadline);
        if deadline < profile.makespan - GENERATION_TOL {
            return Err(SolveError::Infeasible {
                deadline,
                makespan: profile.makespan,
            });
        }
        Ok(FeasibleSet {
            instance,
            deadline,
            makespan: profile.makespan,
            max_flex: profile.max_task_flexibility(),
        })
    }

    pub fn instance(&self) -> &Instance {
        self.instance
    }

    pub fn deadline(&self) -> f64 {
        self.deadline
    }

    pub fn makespan(&self) -> f64 {
        self.makespan
    }

    /// Per-task maximum flexibility `lst - est`; upper bounds any feasible
    /// flexibility assignment.
    pub fn max_task_flexibility(&self) -> &[f64] {
        &self.max_flex
    }

    fn n(&self) -> usize {
        self.instance.n_tasks()
    }
}

/// Weighted equalisation problem: minimize `sum_t w_t (F_t - f_t)^2` over
/// the feasible set, optionally with a uniform lower bound on every
/// flexibility and a pinned total.
#[derive(Debug, Clone)]
pub struct EqualiseSpec {
    /// Per-task targets, normally the maximum flexibilities.
    pub targets: Vec<f64>,
    /// Strictly positive per-task weights; heavier tasks lose less.
    pub weights: Vec<f64>,
    /// Uniform lower bound on every flexibility (0 when absent).
    pub lower_bound: f64,
    /// When present, constrains the total flexibility to this exact value.
    pub total_flex: Option<f64>,
}

impl EqualiseSpec {
    pub fn unit(targets: Vec<f64>) -> Self {
        let n = targets.len();
        EqualiseSpec {
            targets,
            weights: vec![1.0; n],
            lower_bound: 0.0,
            total_flex: None,
        }
    }

    pub fn objective(&self, flex: &[f64]) -> f64 {
        self.targets
            .iter()
            .zip(&self.weights)
            .zip(flex)
            .map(|((&target, &w), &f)| w * (target - f) * (target - f))
            .sum()
    }
}

/// One source-to-sink path with its slack `D - sum of durations`.
#[derive(Debug, Clone)]
struct PathConstraint {
    tasks: Vec<usize>,
    slack: f64,
}

/// Path constraints discovered so far. Strategies solve several stages on
/// the same feasible set, so the cache is shared between them.
#[derive(Debug, Default, Clone)]
pub(crate) struct PathCache {
    paths: Vec<PathConstraint>,
    seen: HashSet<Vec<usize>>,
}

impl PathCache {
    fn insert(&mut self, tasks: Vec<usize>, slack: f64) -> bool {
        if self.seen.insert(tasks.clone()) {
            self.paths.push(PathConstraint { tasks, slack });
            true
        } else {
            false
        }
    }
}

/// Earliest placement of the windows defined by `flex`: the largest overrun
/// past the deadline, the task attaining it, and per-task argmax
/// predecessors for path extraction.
struct Placement {
    starts: Vec<f64>,
    worst_excess: f64,
    worst_task: usize,
    choice: Vec<Option<usize>>,
}

fn earliest_placement(fs: &FeasibleSet, flex: &[f64]) -> Placement {
    let inst = fs.instance;
    let n = fs.n();
    let mut starts = vec![0.0f64; n];
    let mut choice = vec![None; n];
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_task = 0;
    for &t in inst.topological_order() {
        for &p in inst.predecessors(t) {
            let release = starts[p] + inst.duration(p) + flex[p];
            if release > starts[t] {
                starts[t] = release;
                choice[t] = Some(p);
            }
        }
        let excess = starts[t] + inst.duration(t) + flex[t] - fs.deadline;
        if excess > worst_excess {
            worst_excess = excess;
            worst_task = t;
        }
    }
    Placement {
        starts,
        worst_excess,
        worst_task,
        choice,
    }
}

fn extract_path(placement: &Placement, fs: &FeasibleSet) -> (Vec<usize>, f64) {
    let mut tasks = Vec::new();
    let mut cur = Some(placement.worst_task);
    while let Some(t) = cur {
        tasks.push(t);
        cur = placement.choice[t];
    }
    tasks.reverse();
    let total_len: f64 = tasks.iter().map(|&t| fs.instance.duration(t)).sum();
    (tasks, fs.deadline - total_len)
}

/// Runs a master solve against the cached paths, adding the most violated
/// path constraint until the earliest placement meets the deadline.
fn solve_with_generation(
    fs: &FeasibleSet,
    cache: &mut PathCache,
    mut master: impl FnMut(&[PathConstraint]) -> Result<Vec<f64>, SolveError>,
) -> Result<Vec<f64>, SolveError> {
    let rounds = 1000 + 10 * fs.n();
    for _ in 0..rounds {
        let flex = master(&cache.paths)?;
        let placement = earliest_placement(fs, &flex);
        if placement.worst_excess <= GENERATION_TOL || fs.n() == 0 {
            return Ok(flex);
        }
        let (tasks, slack) = extract_path(&placement, fs);
        if !cache.insert(tasks, slack) {
            return Err(SolveError::Numerical(
                "path generation stalled on a repeated constraint".into(),
            ));
        }
    }
    Err(SolveError::Numerical(
        "path generation exceeded its round budget".into(),
    ))
}

/// Requires that assigning `lower_bound` to every task stays feasible.
fn check_uniform_bound(fs: &FeasibleSet, lower_bound: f64) -> Result<(), SolveError> {
    if lower_bound < 0.0 {
        return Err(SolveError::InfeasibleSpec(format!(
            "lower bound {lower_bound} is negative"
        )));
    }
    if fs.n() == 0 {
        return Ok(());
    }
    let uniform = vec![lower_bound; fs.n()];
    let placement = earliest_placement(fs, &uniform);
    if placement.worst_excess > GENERATION_TOL {
        return Err(SolveError::InfeasibleSpec(format!(
            "uniform lower bound {lower_bound} overruns the deadline by {}",
            placement.worst_excess
        )));
    }
    Ok(())
}

/// Maximizes the total flexibility over the feasible set.
pub fn solve_max_total_flex(fs: &FeasibleSet) -> Result<(f64, Vec<f64>), SolveError> {
    solve_max_total_flex_bounded(fs, 0.0)
}

/// Maximizes total flexibility with `f_t >= lower_bound` for every task.
pub fn solve_max_total_flex_bounded(
    fs: &FeasibleSet,
    lower_bound: f64,
) -> Result<(f64, Vec<f64>), SolveError> {
    let mut cache = PathCache::default();
    max_total_flex_cached(fs, lower_bound, &mut cache)
}

pub(crate) fn max_total_flex_cached(
    fs: &FeasibleSet,
    lower_bound: f64,
    cache: &mut PathCache,
) -> Result<(f64, Vec<f64>), SolveError> {
    check_uniform_bound(fs, lower_bound)?;
    let n = fs.n();
    // Master variables are the shifted flexibilities g = f - lb, so the
    // all-slack simplex basis is feasible. The per-task maximum
    // flexibilities bound the relaxation before any path is known.
    let flex = solve_with_generation(fs, cache, |paths| {
        let mut rows = Vec::with_capacity(n + paths.len());
        for t in 0..n {
            rows.push(simplex::Row {
                coeffs: vec![(t, 1.0)],
                rhs: (fs.max_flex[t] - lower_bound).max(0.0),
            });
        }
        for path in paths {
            rows.push(simplex::Row {
                coeffs: path.tasks.iter().map(|&t| (t, 1.0)).collect(),
                rhs: (path.slack - lower_bound * path.tasks.len() as f64).max(0.0),
            });
        }
        let lp = simplex::DenseLp {
            n_vars: n,
            objective: vec![1.0; n],
            rows,
        };
        let (_, g) = simplex::maximize(&lp)?;
        Ok(g.iter().map(|gi| gi + lower_bound).collect())
    })?;
    Ok((flex.iter().sum(), flex))
}

/// Maximizes the smallest per-task flexibility. Returns the optimum and the
/// uniform witness assignment.
///
/// The largest uniform value `m` with every window stretched by `m` still
/// meeting the deadline is the root of the piecewise-linear convex map
/// `m -> longest path under durations l + m`. Newton steps from above land
/// on it exactly after finitely many supporting-line switches.
pub fn solve_max_min_flex(fs: &FeasibleSet) -> Result<(f64, Vec<f64>), SolveError> {
    let n = fs.n();
    if n == 0 {
        return Ok((0.0, Vec::new()));
    }
    let mut m = (fs.deadline - fs.makespan).max(0.0);
    for _ in 0..(n + 64) {
        let (value, path_len, path_count) = stretched_critical_path(fs, m);
        if value <= fs.deadline + 1e-12 {
            return Ok((m.max(0.0), vec![m.max(0.0); n]));
        }
        m = (fs.deadline - path_len) / path_count as f64;
    }
    Err(SolveError::Numerical(
        "max-min Newton iteration failed to settle".into(),
    ))
}

/// Longest path when every duration is stretched by `m`; reports its value,
/// unstretched length, and task count.
fn stretched_critical_path(fs: &FeasibleSet, m: f64) -> (f64, f64, usize) {
    let inst = fs.instance;
    let n = fs.n();
    let mut finish = vec![0.0f64; n];
    let mut length = vec![0.0f64; n];
    let mut count = vec![0usize; n];
    let mut best = (f64::NEG_INFINITY, 0.0, 0usize);
    for &t in inst.topological_order() {
        let mut start = 0.0f64;
        let mut chain_len = 0.0f64;
        let mut chain_count = 0usize;
        for &p in inst.predecessors(t) {
            // Prefer longer chains on exact ties so Newton takes the
            // steepest supporting line available.
            if finish[p] > start || (finish[p] == start && count[p] > chain_count) {
                start = finish[p];
                chain_len = length[p];
                chain_count = count[p];
            }
        }
        finish[t] = start + inst.duration(t) + m;
        length[t] = chain_len + inst.duration(t);
        count[t] = chain_count + 1;
        if finish[t] > best.0 {
            best = (finish[t], length[t], count[t]);
        }
    }
    best
}

/// Minimizes the weighted squared flexibility loss `sum_t w_t (F_t - f_t)^2`
/// over the feasible set, intersected with the spec's lower bound and, when
/// present, the pinned total. The optimizer is unique.
pub fn solve_equalise(fs: &FeasibleSet, spec: &EqualiseSpec) -> Result<Vec<f64>, SolveError> {
    let mut cache = PathCache::default();
    equalise_cached(fs, spec, &mut cache)
}

pub(crate) fn equalise_cached(
    fs: &FeasibleSet,
    spec: &EqualiseSpec,
    cache: &mut PathCache,
) -> Result<Vec<f64>, SolveError> {
    let n = fs.n();
    if spec.targets.len() != n || spec.weights.len() != n {
        return Err(SolveError::DimensionMismatch(format!(
            "spec has {} targets and {} weights for {} tasks",
            spec.targets.len(),
            spec.weights.len(),
            n
        )));
    }
    if let Some(w) = spec.weights.iter().find(|&&w| !(w > 0.0)) {
        return Err(SolveError::InfeasibleSpec(format!(
            "weights must be strictly positive, found {w}"
        )));
    }
    check_uniform_bound(fs, spec.lower_bound)?;
    if n == 0 {
        return Ok(Vec::new());
    }

    let lb = spec.lower_bound;
    let quad: Vec<f64> = spec.weights.iter().map(|w| 2.0 * w).collect();
    let lin: Vec<f64> = spec
        .weights
        .iter()
        .zip(&spec.targets)
        .map(|(w, target)| 2.0 * w * target)
        .collect();
    let mut warm = None;

    let Some(total) = spec.total_flex else {
        return equalise_core(fs, &quad, &lin, lb, cache, &mut warm);
    };

    let (best_total, _) = max_total_flex_cached(fs, lb, cache)?;
    if total > best_total + 1e-6 * (1.0 + best_total.abs()) {
        return Err(SolveError::InfeasibleSpec(format!(
            "requested total flexibility {total} exceeds the maximum {best_total}"
        )));
    }
    let floor = lb * n as f64;
    if total < floor - 1e-9 * (1.0 + floor.abs()) {
        return Err(SolveError::InfeasibleSpec(format!(
            "requested total flexibility {total} is below the lower-bound floor {floor}"
        )));
    }

    // The total-flexibility equality is handled through its scalar
    // multiplier: shifting every target upward by a uniform amount trades
    // squared loss against total flexibility. Two regimes:
    //   * total at the maximum (how the strategies use this): an exact
    //     penalty. The equality's multiplier is finite, so some finite shift
    //     already yields the equalisation over the max-total face exactly;
    //     escalate until the total stops short no more.
    //   * total strictly inside: the dual is monotone in the shift, so
    //     bisect it.
    if total >= best_total - 1e-7 * (1.0 + best_total.abs()) {
        let mut bonus = 1.0 + 2.0 * lin.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        for _ in 0..60 {
            let shifted: Vec<f64> = lin.iter().map(|c| c + bonus).collect();
            let flex = equalise_core(fs, &quad, &shifted, lb, cache, &mut warm)?;
            let reached: f64 = flex.iter().sum();
            if reached >= best_total - 1e-9 * (1.0 + best_total.abs()) {
                return Ok(flex);
            }
            bonus *= 4.0;
        }
        return Err(SolveError::Numerical(
            "penalty escalation failed to reach the pinned total".into(),
        ));
    }

    let mut evaluate = |shift: f64, warm: &mut Option<Vec<f64>>| -> Result<(Vec<f64>, f64), SolveError> {
        let shifted: Vec<f64> = lin.iter().map(|c| c + shift).collect();
        let flex = equalise_core(fs, &quad, &shifted, lb, cache, warm)?;
        let sum = flex.iter().sum();
        Ok((flex, sum))
    };
    let total_tol = 1e-9 * (1.0 + total.abs());
    let scale = 1.0 + lin.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    // Establish a bracket: totals grow with the shift.
    let (at_zero, sum_zero) = evaluate(0.0, &mut warm)?;
    if (sum_zero - total).abs() <= total_tol {
        return Ok(at_zero);
    }
    let (mut lo, mut hi) = if sum_zero < total {
        let mut hi = scale;
        for _ in 0..60 {
            let (_, sum) = evaluate(hi, &mut warm)?;
            if sum >= total {
                break;
            }
            hi *= 2.0;
        }
        (0.0, hi)
    } else {
        let mut lo = -scale;
        for _ in 0..60 {
            let (_, sum) = evaluate(lo, &mut warm)?;
            if sum <= total {
                break;
            }
            lo *= 2.0;
        }
        (lo, 0.0)
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let (flex, sum) = evaluate(mid, &mut warm)?;
        if (sum - total).abs() <= total_tol {
            return Ok(flex);
        }
        if sum < total {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(SolveError::Numerical(
        "bisection on the total-flexibility multiplier did not converge".into(),
    ))
}

/// Constraint-generation loop around the active-set solve for one quadratic
/// objective. The warm start carries over between master rounds (and between
/// multiplier probes), pulled back toward the uniform floor just enough to
/// satisfy any newly added path.
fn equalise_core(
    fs: &FeasibleSet,
    quad: &[f64],
    lin: &[f64],
    lower_bound: f64,
    cache: &mut PathCache,
    warm: &mut Option<Vec<f64>>,
) -> Result<Vec<f64>, SolveError> {
    let n = fs.n();
    let flex = solve_with_generation(fs, cache, |paths| {
        let rows = paths
            .iter()
            .map(|path| qp::SparseRow {
                coeffs: path.tasks.iter().map(|&t| (t, 1.0)).collect(),
                rhs: path.slack,
            })
            .collect();
        let problem = qp::DiagQp {
            quad: quad.to_vec(),
            lin: lin.to_vec(),
            lower_bound,
            rows,
        };
        let start = match warm.as_deref() {
            Some(prev) => pull_back(prev, lower_bound, paths),
            None => vec![lower_bound; n],
        };
        let solved = qp::minimize(&problem, &start)?;
        *warm = Some(solved.clone());
        Ok(solved)
    })?;
    *warm = Some(flex.clone());
    Ok(flex)
}

/// Shrinks a previously optimal point toward the uniform floor until it
/// satisfies every listed path constraint. The floor itself satisfies all of
/// them, so some blend always works.
fn pull_back(flex: &[f64], lower_bound: f64, paths: &[PathConstraint]) -> Vec<f64> {
    let mut blend = 1.0f64;
    for path in paths {
        let margin = path.slack - lower_bound * path.tasks.len() as f64;
        let load: f64 = path.tasks.iter().map(|&t| flex[t] - lower_bound).sum();
        if load > margin {
            blend = blend.min((margin / load).max(0.0));
        }
    }
    flex.iter()
        .map(|&f| lower_bound + blend * (f - lower_bound))
        .collect()
}

/// Optimality certificate for an equalisation solution.
#[derive(Debug, Clone)]
pub struct KktReport {
    /// No sampled feasible perturbation improved the objective by more than
    /// the tolerance.
    pub perturbations_ok: bool,
    /// Fitted multipliers on tight constraints are non-negative and the
    /// stationarity residual is small.
    pub multipliers_ok: bool,
    /// Most negative objective change seen over the sampled perturbations.
    pub worst_improvement: f64,
    /// Infinity norm of the fitted stationarity residual.
    pub stationarity_residual: f64,
    /// Most negative fitted multiplier on a tight inequality.
    pub min_multiplier: f64,
    /// Feasible perturbations actually evaluated.
    pub trials: usize,
}

impl KktReport {
    pub fn ok(&self) -> bool {
        self.perturbations_ok && self.multipliers_ok
    }
}

/// Checks first-order optimality of `flex` for the given equalisation without
/// consulting the solver's own working set: random feasible perturbations
/// must not improve the objective beyond `tol`, and a least-squares fit of
/// multipliers on the tight constraints must come out non-negative with a
/// small stationarity residual.
pub fn verify_kkt(
    fs: &FeasibleSet,
    spec: &EqualiseSpec,
    flex: &[f64],
    tol: f64,
) -> Result<KktReport, SolveError> {
    let n = fs.n();
    if flex.len() != n || spec.targets.len() != n || spec.weights.len() != n {
        return Err(SolveError::DimensionMismatch(format!(
            "flex/spec dimensions do not match {n} tasks"
        )));
    }

    let base_objective = spec.objective(flex);
    let scale = fs
        .max_flex
        .iter()
        .fold(1.0f64, |acc, &v| acc.max(v.abs()));
    let step = 1e-3 * scale;

    let mut rng = ChaCha8Rng::seed_from_u64(0x6b7c_9d2e_5a41_f308);
    let mut worst_improvement = 0.0f64;
    let mut trials = 0usize;
    let mut attempts = 0usize;
    while trials < 1000 && attempts < 20_000 {
        attempts += 1;
        let mut dir: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect();
        if spec.total_flex.is_some() {
            let mean = dir.iter().sum::<f64>() / n as f64;
            for d in &mut dir {
                *d -= mean;
            }
        }
        let norm = dir.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        if norm < 1e-12 {
            continue;
        }
        for d in &mut dir {
            *d /= norm;
        }
        let Some(alpha) = largest_feasible_step(fs, spec, flex, &dir, step) else {
            continue;
        };
        let candidate: Vec<f64> = flex
            .iter()
            .zip(&dir)
            .map(|(&f, &d)| f + alpha * d)
            .collect();
        let delta = spec.objective(&candidate) - base_objective;
        if delta < worst_improvement {
            worst_improvement = delta;
        }
        trials += 1;
    }
    let perturbations_ok = worst_improvement >= -tol;

    let (stationarity_residual, min_multiplier) = fit_multipliers(fs, spec, flex);
    let grad_scale = spec
        .weights
        .iter()
        .zip(&spec.targets)
        .zip(flex)
        .map(|((&w, &target), &f)| (2.0 * w * (f - target)).abs())
        .fold(1.0f64, f64::max);
    let multipliers_ok =
        stationarity_residual <= 1e-5 * grad_scale && min_multiplier >= -1e-6 * grad_scale;

    Ok(KktReport {
        perturbations_ok,
        multipliers_ok,
        worst_improvement,
        stationarity_residual,
        min_multiplier,
        trials,
    })
}

/// Largest step in `[0, cap]` along `dir` that stays feasible, found by
/// bisection against the placement pass. Returns None when even a tiny step
/// leaves the feasible set.
fn largest_feasible_step(
    fs: &FeasibleSet,
    spec: &EqualiseSpec,
    flex: &[f64],
    dir: &[f64],
    cap: f64,
) -> Option<f64> {
    let feasible = |alpha: f64| -> bool {
        let candidate: Vec<f64> = flex
            .iter()
            .zip(dir)
            .map(|(&f, &d)| f + alpha * d)
            .collect();
        if candidate.iter().any(|&f| f < spec.lower_bound - 1e-8) {
            return false;
        }
        earliest_placement(fs, &candidate).worst_excess <= 1e-8
    };
    if !feasible(0.0) {
        return None;
    }
    if feasible(cap) {
        return Some(cap);
    }
    let mut lo = 0.0f64;
    let mut hi = cap;
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo > 1e-10 * cap {
        Some(lo)
    } else {
        None
    }
}

/// Least-squares multiplier fit on the tight constraints at `flex`:
/// `grad + sum lambda_i a_i - sum mu_t e_t + nu 1 = 0` with `lambda, mu >= 0`
/// (`nu` free). Solved as non-negative least squares by projected gradient.
/// Returns the residual infinity norm and the most negative constrained
/// multiplier.
fn fit_multipliers(fs: &FeasibleSet, spec: &EqualiseSpec, flex: &[f64]) -> (f64, f64) {
    let n = fs.n();
    let tol_act = 1e-7 * (1.0 + fs.deadline.abs());
    let grad: Vec<f64> = spec
        .weights
        .iter()
        .zip(&spec.targets)
        .zip(flex)
        .map(|((&w, &target), &f)| 2.0 * w * (f - target))
        .collect();

    // Columns of the constraint matrix: tight paths (+1 entries), tight
    // lower bounds (-1 entries), and the total-flex equality split into a
    // free +/- pair.
    let mut columns: Vec<(Vec<(usize, f64)>, bool)> = Vec::new();
    for path in tight_paths(fs, flex, tol_act, 4 * n.max(1)) {
        columns.push((path.into_iter().map(|t| (t, 1.0)).collect(), true));
    }
    for t in 0..n {
        if flex[t] <= spec.lower_bound + tol_act {
            columns.push((vec![(t, -1.0)], true));
        }
    }
    if spec.total_flex.is_some() {
        columns.push(((0..n).map(|t| (t, 1.0)).collect(), false));
        columns.push(((0..n).map(|t| (t, -1.0)).collect(), false));
    }

    if columns.is_empty() {
        let residual = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
        return (residual, 0.0);
    }

    // Projected gradient on 1/2 ||grad + C z||^2 with z >= 0 on constrained
    // columns. The Lipschitz constant is bounded by the trace of C'C.
    let k = columns.len();
    let trace: f64 = columns
        .iter()
        .map(|(col, _)| col.iter().map(|&(_, v)| v * v).sum::<f64>())
        .sum();
    let eta = 1.0 / trace.max(1.0);
    let mut z = vec![0.0f64; k];
    let mut residual = vec![0.0f64; n];
    for _ in 0..20_000 {
        residual.copy_from_slice(&grad);
        for (zi, (col, _)) in z.iter().zip(&columns) {
            for &(t, v) in col {
                residual[t] += zi * v;
            }
        }
        let mut moved = 0.0f64;
        for i in 0..k {
            let g: f64 = columns[i].0.iter().map(|&(t, v)| v * residual[t]).sum();
            let mut next = z[i] - eta * g;
            if columns[i].1 {
                next = next.max(0.0);
            }
            moved = moved.max((next - z[i]).abs());
            z[i] = next;
        }
        if moved <= 1e-14 * (1.0 + trace) {
            break;
        }
    }
    residual.copy_from_slice(&grad);
    for (zi, (col, _)) in z.iter().zip(&columns) {
        for &(t, v) in col {
            residual[t] += zi * v;
        }
    }
    let res_norm = residual.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    // Due to the +/- split the free multiplier never reports as negative.
    let min_mult = z
        .iter()
        .zip(&columns)
        .filter(|(_, (_, constrained))| *constrained)
        .map(|(&zi, _)| zi)
        .fold(0.0f64, f64::min);
    (res_norm, min_mult)
}

/// Enumerates paths whose constraint is tight at `flex`: chains that start
/// at time zero, stay tight across every link in the earliest placement, and
/// finish exactly at the deadline. Capped for safety on degenerate webs.
fn tight_paths(fs: &FeasibleSet, flex: &[f64], tol: f64, cap: usize) -> Vec<Vec<usize>> {
    let inst = fs.instance;
    let placement = earliest_placement(fs, flex);
    let mut found = Vec::new();
    let mut seen = HashSet::new();

    for t in 0..fs.n() {
        if found.len() >= cap {
            break;
        }
        let finish = placement.starts[t] + inst.duration(t) + flex[t];
        if finish < fs.deadline - tol {
            continue;
        }
        // DFS backward over tight links from the deadline-tight endpoint.
        let mut stack = vec![(t, vec![t])];
        while let Some((node, path)) = stack.pop() {
            if found.len() >= cap {
                break;
            }
            if placement.starts[node] <= tol {
                let mut ordered = path.clone();
                ordered.reverse();
                if seen.insert(ordered.clone()) {
                    found.push(ordered);
                }
            }
            for &p in inst.predecessors(node) {
                let release = placement.starts[p] + inst.duration(p) + flex[p];
                if release >= placement.starts[node] - tol {
                    let mut next = path.clone();
                    next.push(p);
                    stack.push((p, next));
                }
            }
        }
    }
    found
}
