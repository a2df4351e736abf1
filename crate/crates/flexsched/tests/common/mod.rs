//! Shared test support: reference fixtures and brute-force oracles that are
//! independent of the library's solver implementation.

#![allow(dead_code)]

pub mod des;
pub mod paths;
pub mod pg;
pub mod vertex;

use flexsched::Instance;

/// The reference diamond: durations (2, 3, 1, 1), edges 0->{1,2}->3,
/// makespan 6, deadline 6.6 at factor 1.1.
pub fn ref4() -> Instance {
    Instance::new(
        "REF4",
        vec![2.0, 3.0, 1.0, 1.0],
        vec![(0, 1), (0, 2), (1, 3), (2, 3)],
    )
    .unwrap()
}

/// Deterministic battery of small generated instances (2 to 5 tasks) with
/// valid complexities for each size.
pub fn small_instances(count: usize) -> Vec<Instance> {
    let mut instances = Vec::with_capacity(count);
    let mut seed = 0u64;
    while instances.len() < count {
        let n = 2 + (seed as usize) % 4;
        let max_complexity = (n - 1) * (n - 2) / 2 + 1;
        let c = 1 + (seed as usize / 4) % max_complexity;
        let inst = flexsched::ingest::generate(n, c, (1, 10), seed)
            .unwrap()
            .with_name(format!("small_{seed}"));
        instances.push(inst);
        seed += 1;
    }
    instances
}

/// Deterministic battery of mid-size generated instances.
pub fn mid_instances(count: usize, n_tasks: usize) -> Vec<Instance> {
    (0..count as u64)
        .map(|seed| {
            let max_complexity = (n_tasks - 1) * (n_tasks - 2) / 2 + 1;
            let c = (2 + (seed as usize * 7) % (2 * n_tasks)).min(max_complexity);
            flexsched::ingest::generate(n_tasks, c, (1, 10), 1000 + seed)
                .unwrap()
                .with_name(format!("mid_{seed}"))
        })
        .collect()
}
