//! Reading PSPLIB single-mode files and the plain-text native format, and
//! generating random instances with an exact cyclomatic complexity.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::instance::{Instance, ValidationError};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("missing section: {0}")]
    MissingSection(&'static str),
    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("inconsistent job count: header says {expected}, found {found}")]
    InconsistentJobCount { expected: usize, found: usize },
    #[error("count mismatch: {0}")]
    CountMismatch(String),
    #[error(transparent)]
    Invalid(#[from] ValidationError),
}

#[derive(Debug, Error)]
pub enum GenerateError {
    #[error("need at least 2 tasks, got {0}")]
    TooFewTasks(usize),
    #[error(
        "infeasible edge count: complexity {complexity} on {n_tasks} tasks needs {edges} edges, \
         valid range is {min}..={max}"
    )]
    InfeasibleEdgeCount {
        complexity: usize,
        n_tasks: usize,
        edges: i64,
        min: usize,
        max: usize,
    },
    #[error("duration range [{lo}, {hi}] is invalid (need 1 <= lo <= hi)")]
    BadDurationRange { lo: u32, hi: u32 },
}

/// Parses a PSPLIB single-mode (.sm) file. Only the precedence relations and
/// the duration column are read; resource demands and availabilities are
/// skipped. Job numbers are remapped to 0-based ids in file order, dummy
/// source/sink jobs included.
pub fn parse_psplib(text: &str) -> Result<Instance, ParseError> {
    let lines: Vec<&str> = text.lines().collect();

    let precedence_at = find_section(&lines, "PRECEDENCE RELATIONS")
        .ok_or(ParseError::MissingSection("PRECEDENCE RELATIONS"))?;
    let requests_at = find_section(&lines, "REQUESTS/DURATIONS")
        .ok_or(ParseError::MissingSection("REQUESTS/DURATIONS"))?;

    // Successor lists: jobnr, #modes, #successors, successors...
    let mut successor_lists: Vec<(usize, Vec<usize>)> = Vec::new();
    for (offset, raw) in lines[precedence_at + 1..].iter().enumerate() {
        let line_no = precedence_at + 2 + offset;
        if is_section_boundary(raw) {
            break;
        }
        let fields = match parse_integers(raw) {
            Some(fields) => fields,
            None => continue, // column header
        };
        if fields.len() < 3 {
            return Err(ParseError::MalformedLine {
                line: line_no,
                message: format!("expected at least 3 integers, got {}", fields.len()),
            });
        }
        let job = fields[0];
        let n_succ = fields[2];
        let succ = &fields[3..];
        if succ.len() != n_succ {
            return Err(ParseError::MalformedLine {
                line: line_no,
                message: format!("declared {} successors but listed {}", n_succ, succ.len()),
            });
        }
        successor_lists.push((job, succ.to_vec()));
    }
    if successor_lists.is_empty() {
        return Err(ParseError::MissingSection("PRECEDENCE RELATIONS"));
    }

    // Duration rows: jobnr, mode, duration, demands...
    let mut durations: Vec<(usize, f64)> = Vec::new();
    for (offset, raw) in lines[requests_at + 1..].iter().enumerate() {
        let line_no = requests_at + 2 + offset;
        if is_section_boundary(raw) {
            break;
        }
        let fields = match parse_integers(raw) {
            Some(fields) => fields,
            None => continue, // column header or ruler
        };
        if fields.len() < 3 {
            return Err(ParseError::MalformedLine {
                line: line_no,
                message: format!("expected at least 3 integers, got {}", fields.len()),
            });
        }
        durations.push((fields[0], fields[2] as f64));
    }

    let n = successor_lists.len();
    if durations.len() != n {
        return Err(ParseError::InconsistentJobCount {
            expected: n,
            found: durations.len(),
        });
    }

    // Jobs are numbered 1..=n in file order.
    let job_to_id = |job: usize| -> Result<usize, ParseError> {
        if job >= 1 && job <= n {
            Ok(job - 1)
        } else {
            Err(ParseError::CountMismatch(format!(
                "job number {job} outside 1..={n}"
            )))
        }
    };

    let mut duration_by_id = vec![0.0; n];
    for &(job, d) in &durations {
        duration_by_id[job_to_id(job)?] = d;
    }
    let mut edges = Vec::new();
    for (job, succs) in &successor_lists {
        let u = job_to_id(*job)?;
        for &s in succs {
            edges.push((u, job_to_id(s)?));
        }
    }
    Ok(Instance::new("", duration_by_id, edges)?)
}

fn find_section(lines: &[&str], needle: &str) -> Option<usize> {
    lines.iter().position(|line| line.contains(needle))
}

fn is_section_boundary(line: &str) -> bool {
    line.starts_with('*') || line.to_ascii_uppercase().contains("RESOURCEAVAILABIL")
}

/// All-whitespace-separated non-negative integers, or None if any token is
/// not an integer (header lines).
fn parse_integers(line: &str) -> Option<Vec<usize>> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.is_empty() {
        return None;
    }
    tokens.iter().map(|t| t.parse::<usize>().ok()).collect()
}

/// Parses the native format: first line `N M`, then `N` lines `id duration`,
/// then `M` lines `u v`.
pub fn parse_native(text: &str) -> Result<Instance, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());

    let (line_no, header) = lines
        .next()
        .ok_or(ParseError::MissingSection("header line"))?;
    let header_fields: Vec<usize> = parse_integers(header).ok_or_else(|| {
        ParseError::MalformedLine {
            line: line_no + 1,
            message: "header must be two integers 'N M'".into(),
        }
    })?;
    let [n, m] = header_fields[..] else {
        return Err(ParseError::MalformedLine {
            line: line_no + 1,
            message: "header must be two integers 'N M'".into(),
        });
    };

    let mut durations = vec![0.0f64; n];
    for expected in 0..n {
        let (line_no, raw) = lines.next().ok_or_else(|| {
            ParseError::CountMismatch(format!("expected {n} task lines, got {expected}"))
        })?;
        let fields: Vec<&str> = raw.split_whitespace().collect();
        let parsed: Option<(usize, f64)> = match fields[..] {
            [id, dur] => id.parse().ok().zip(dur.parse().ok()),
            _ => None,
        };
        let Some((id, duration)) = parsed else {
            return Err(ParseError::MalformedLine {
                line: line_no + 1,
                message: "task line must be 'id duration'".into(),
            });
        };
        if id != expected {
            return Err(ParseError::MalformedLine {
                line: line_no + 1,
                message: format!("task ids must be dense and ordered; expected {expected}, got {id}"),
            });
        }
        durations[id] = duration;
    }

    let mut edges = Vec::with_capacity(m);
    for count in 0..m {
        let (line_no, raw) = lines.next().ok_or_else(|| {
            ParseError::CountMismatch(format!("expected {m} edge lines, got {count}"))
        })?;
        let Some(fields) = parse_integers(raw) else {
            return Err(ParseError::MalformedLine {
                line: line_no + 1,
                message: "edge line must be 'u v'".into(),
            });
        };
        let [u, v] = fields[..] else {
            return Err(ParseError::MalformedLine {
                line: line_no + 1,
                message: "edge line must be 'u v'".into(),
            });
        };
        edges.push((u, v));
    }
    if let Some((line_no, _)) = lines.next() {
        return Err(ParseError::CountMismatch(format!(
            "unexpected extra content at line {}",
            line_no + 1
        )));
    }
    Ok(Instance::new("", durations, edges)?)
}

/// Writes the native format; `parse_native` inverts it exactly.
pub fn write_native(instance: &Instance) -> String {
    let mut out = String::new();
    out.push_str(&format!("{} {}\n", instance.n_tasks(), instance.n_edges()));
    for task in instance.tasks() {
        out.push_str(&format!("{} {}\n", task.id, task.duration));
    }
    for &(u, v) in instance.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

/// Generates a random DAG with exactly `target_complexity + n_tasks - 2`
/// edges (so the cyclomatic complexity hits the target exactly), a unique
/// source and a unique sink, and integer durations uniform in the range.
/// Deterministic in all arguments.
///
/// Construction: tasks are numbered in topological order. Every task picks a
/// parent from a trailing window, preferring parents that still lack an
/// outgoing edge whenever the remaining edge budget demands it; leftover
/// out-degree gaps are patched afterwards and the remaining budget is spent
/// on uniformly sampled extra forward edges.
pub fn generate(
    n_tasks: usize,
    target_complexity: usize,
    duration_range: (u32, u32),
    seed: u64,
) -> Result<Instance, GenerateError> {
    if n_tasks < 2 {
        return Err(GenerateError::TooFewTasks(n_tasks));
    }
    let (lo, hi) = duration_range;
    if lo < 1 || lo > hi {
        return Err(GenerateError::BadDurationRange { lo, hi });
    }
    let n = n_tasks;
    let edges_needed = target_complexity as i64 + n as i64 - 2;
    let max_edges = n * (n - 1) / 2;
    if edges_needed < (n - 1) as i64 || edges_needed > max_edges as i64 {
        return Err(GenerateError::InfeasibleEdgeCount {
            complexity: target_complexity,
            n_tasks: n,
            edges: edges_needed,
            min: n - 1,
            max: max_edges,
        });
    }
    let edges_needed = edges_needed as usize;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let durations: Vec<f64> = (0..n)
        .map(|_| rng.random_range(lo..=hi) as f64)
        .collect();

    // The attachment window controls the network shape: parents come from
    // the last `window` tasks, giving layered graphs whose depth and width
    // are in the range of the classic 122-task benchmark sets.
    let window = (n / 8).clamp(4, n.max(4));
    let mut present = vec![false; max_edges];
    let pair_index = |u: usize, v: usize| -> usize {
        // Strictly-upper-triangular packing of (u, v) with u < v.
        v * (v - 1) / 2 + u
    };
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(edges_needed);
    let push_edge = |present: &mut Vec<bool>, edges: &mut Vec<(usize, usize)>, u: usize, v: usize| {
        present[pair_index(u, v)] = true;
        edges.push((u, v));
    };

    // Spanning skeleton: each task gets one parent, drawn from the pool of
    // tasks still lacking an out-edge whenever the extra budget would
    // otherwise be blown on patches.
    let budget = edges_needed - (n - 1);
    let mut uncovered: Vec<usize> = vec![0];
    for v in 1..n {
        let parent = if uncovered.len() > budget {
            let at = rng.random_range(0..uncovered.len());
            uncovered[at]
        } else {
            rng.random_range(v.saturating_sub(window)..v)
        };
        push_edge(&mut present, &mut edges, parent, v);
        if let Some(at) = uncovered.iter().position(|&u| u == parent) {
            uncovered.swap_remove(at);
        }
        if v < n - 1 {
            uncovered.push(v);
        }
    }

    // Patch remaining out-degree gaps so the sink stays unique. An uncovered
    // task has no outgoing edge yet, so any forward pair from it is free.
    uncovered.sort_unstable();
    for u in uncovered {
        let hi_target = (u + 1 + window).min(n);
        let v = rng.random_range(u + 1..hi_target);
        push_edge(&mut present, &mut edges, u, v);
    }

    // Spend the leftover budget on absent forward pairs, preferring pairs
    // within the window so extra complexity adds binding local structure.
    // Fall back to the full pair pool when the local one runs dry.
    let extras = edges_needed - edges.len();
    let mut absent: Vec<(usize, usize)> = Vec::new();
    for v in 1..n {
        for u in v.saturating_sub(window)..v {
            if !present[pair_index(u, v)] {
                absent.push((u, v));
            }
        }
    }
    if absent.len() < extras {
        for v in 1..n {
            for u in 0..v.saturating_sub(window) {
                if !present[pair_index(u, v)] {
                    absent.push((u, v));
                }
            }
        }
    }
    for i in 0..extras {
        let j = rng.random_range(i..absent.len());
        absent.swap(i, j);
        let (u, v) = absent[i];
        push_edge(&mut present, &mut edges, u, v);
    }

    let instance = Instance::new(format!("gen_{seed}"), durations, edges)
        .expect("construction yields a valid DAG");
    debug_assert_eq!(instance.n_edges(), edges_needed);
    Ok(instance)
}
