//! Acceptance suite. Each test prints one `acceptance <n> ...: PASS/FAIL`
//! line (run with `--nocapture` to see them all).
//!
//! Criteria 1-3 are exact or property-based and always blocking. Criteria
//! 4-7 reproduce benchmark-scale directional results: they are blocking when
//! a PSPLIB instance directory is supplied via `FLEXSCHED_PSPLIB` and at
//! least 60 single-mode files parse; otherwise they run on 60 generated
//! instances (20 per complexity level 63/100/137, 122 tasks) and are logged
//! without failing the build, since their exact numbers depend on the
//! benchmark set.

mod common;

use std::collections::BTreeMap;
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use common::{paths, pg, ref4, vertex};
use flexsched::analysis;
use flexsched::ingest;
use flexsched::schedule::ZERO_FLEX_TOL;
use flexsched::sim::{self, DelayParams, DelayScenario};
use flexsched::{
    canonicalize, distribute, solve_equalise, solve_max_min_flex, solve_max_total_flex,
    solve_max_total_flex_bounded, EqualiseSpec, FeasibleSet, Instance, Strategy,
    TemporalProfile, ALL_STRATEGIES,
};

fn report(criterion: &str, pass: bool, blocking: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let note = if blocking { "" } else { " (non-blocking)" };
    println!("acceptance {criterion}: {verdict}{note} — {detail}");
    if blocking {
        assert!(pass, "acceptance {criterion} failed: {detail}");
    }
}

#[test]
fn criterion_1_solver_oracle_equivalence() {
    let started = Instant::now();
    let mut worst_lp = 0.0f64;
    let mut worst_maxmin = 0.0f64;
    let mut worst_qp = 0.0f64;

    for seed in 0..200u64 {
        let n = 2 + (seed as usize) % 4;
        let max_complexity = (n - 1) * (n - 2) / 2 + 1;
        let c = 1 + (seed as usize / 4) % max_complexity;
        let inst = ingest::generate(n, c, (1, 10), seed).unwrap();
        let deadline = TemporalProfile::compute(&inst, 1.1).deadline;
        let fs = FeasibleSet::new(&inst, deadline).unwrap();

        // Total-flexibility LP against vertex enumeration.
        let (total, _) = solve_max_total_flex(&fs).unwrap();
        let (oracle_total, _) =
            vertex::vertex_enumerate_max(&paths::f_space_lp(&inst, deadline, 0.0, None)).unwrap();
        worst_lp = worst_lp.max((total - oracle_total).abs());

        // Max-min against exhaustive path ratios.
        let (phi, _) = solve_max_min_flex(&fs).unwrap();
        worst_maxmin = worst_maxmin.max((phi - paths::maxmin_by_paths(&inst, deadline)).abs());

        // Equalisation (unit and weighted) against projected gradient.
        for weights in [
            vec![1.0; n],
            flexsched::weights(Strategy::Wpre, &inst),
        ] {
            let spec = EqualiseSpec {
                targets: fs.max_task_flexibility().to_vec(),
                weights,
                lower_bound: 0.0,
                total_flex: None,
            };
            let flex = solve_equalise(&fs, &spec).unwrap();
            let oracle = pg_objective(&inst, deadline, &spec, &vec![0.0; n]);
            worst_qp = worst_qp.max((spec.objective(&flex) - oracle).abs());
        }
    }

    let elapsed = started.elapsed();
    let pass = worst_lp <= 1e-4
        && worst_maxmin <= 1e-4
        && worst_qp <= 1e-4
        && elapsed < Duration::from_secs(120);
    report(
        "1 (oracle equivalence, 200 instances)",
        pass,
        true,
        &format!(
            "max objective errors: lp {worst_lp:.2e}, maxmin {worst_maxmin:.2e}, qp {worst_qp:.2e}; {elapsed:.1?}"
        ),
    );
}

fn pg_objective(
    instance: &Instance,
    deadline: f64,
    spec: &EqualiseSpec,
    start: &[f64],
) -> f64 {
    let n = instance.n_tasks();
    let mut halfspaces = Vec::new();
    for t in 0..n {
        let mut row = vec![0.0; n];
        row[t] = -1.0;
        halfspaces.push((row, -spec.lower_bound));
    }
    for path in paths::enumerate_paths(instance) {
        let mut row = vec![0.0; n];
        for &t in &path {
            row[t] = 1.0;
        }
        halfspaces.push((row, paths::path_slack(instance, deadline, &path)));
    }
    let problem = pg::PgProblem {
        weights: spec.weights.clone(),
        targets: spec.targets.clone(),
        halfspaces,
        hyperplane: spec.total_flex.map(|total| (vec![1.0; n], total)),
    };
    let solution = pg::projected_gradient(&problem, start, 100_000, 60);
    problem.objective(&solution)
}

#[test]
fn criterion_2_ref4_golden_fixtures() {
    let inst = ref4();
    let fs = FeasibleSet::new(&inst, 6.6).unwrap();
    let tol = 1e-6;
    let mut checks: Vec<(String, bool)> = Vec::new();
    let mut check = |name: &str, ok: bool| checks.push((name.to_string(), ok));

    let (total, _) = solve_max_total_flex(&fs).unwrap();
    check("phi_star=3.2", (total - 3.2).abs() <= tol);
    let (ab_oracle, _) = vertex::vertex_enumerate_max(&paths::ab_space_lp(&inst, 6.6)).unwrap();
    check("phi_star matches raw-system oracle", (total - ab_oracle).abs() <= tol);

    let (phi, _) = solve_max_min_flex(&fs).unwrap();
    check("phi_min=0.2", (phi - 0.2).abs() <= tol);

    let close = |flex: &[f64], expect: &[f64]| {
        flex.iter()
            .zip(expect)
            .all(|(a, b)| (a - b).abs() <= tol)
    };
    let equalised = distribute(Strategy::Equalised, &inst, 1.1).unwrap();
    check(
        "equalised flex",
        close(equalised.flexibilities(), &[0.12, 0.36, 2.36, 0.12]),
    );
    let maximal = distribute(Strategy::Maximal, &inst, 1.1).unwrap();
    check(
        "maximal flex",
        close(maximal.flexibilities(), &[0.0, 0.6, 2.6, 0.0]),
    );
    let (bounded_total, _) = solve_max_total_flex_bounded(&fs, phi).unwrap();
    check("bounded total=2.8", (bounded_total - 2.8).abs() <= tol);
    let minflex = distribute(Strategy::MaxMinflex, &inst, 1.1).unwrap();
    check(
        "max_minflex flex",
        close(minflex.flexibilities(), &[0.2, 0.2, 2.2, 0.2]),
    );

    let scenario = DelayScenario {
        delayed: vec![0],
        extra: vec![2.0, 0.0, 0.0, 0.0],
    };
    let trace = sim::execute(&equalised, &inst, &scenario).unwrap();
    check(
        "trace finishes (4,7,5,8)",
        close(&trace.finish, &[4.0, 7.0, 5.0, 8.0]),
    );
    check("trace violations {0,1,3}", trace.violations == vec![0, 1, 3]);

    let failed: Vec<String> = checks
        .iter()
        .filter(|(_, ok)| !ok)
        .map(|(name, _)| name.clone())
        .collect();
    report(
        "2 (REF4 golden fixtures)",
        failed.is_empty(),
        true,
        &if failed.is_empty() {
            format!("{} fixture values confirmed at 1e-6", checks.len())
        } else {
            format!("failed: {failed:?}")
        },
    );
}

#[test]
fn criterion_3_decoupling_property() {
    let started = Instant::now();
    let mut triples = 0usize;
    let mut violated = 0usize;

    for seed in 0..50u64 {
        let n = 5 + (seed as usize * 3) % 36;
        let max_complexity = (n - 1) * (n - 2) / 2 + 1;
        let c = (2 + (seed as usize * 5) % (2 * n)).min(max_complexity);
        let inst = ingest::generate(n, c, (1, 10), 500 + seed).unwrap();
        for s in 0..4usize {
            let strategy = ALL_STRATEGIES[(seed as usize + s) % ALL_STRATEGIES.len()];
            let schedule = distribute(strategy, &inst, 1.1).unwrap();
            for round in 0..5u64 {
                // Per-task delays at a random fraction of each flexibility.
                let mut state = seed
                    .wrapping_mul(1_000_003)
                    .wrapping_add(round * 7919 + s as u64);
                let extra: Vec<f64> = (0..n)
                    .map(|t| {
                        state = state
                            .wrapping_mul(6364136223846793005)
                            .wrapping_add(1442695040888963407);
                        let frac = (state >> 11) as f64 / (1u64 << 53) as f64;
                        frac * schedule.flexibility(t)
                    })
                    .collect();
                let scenario = DelayScenario {
                    delayed: (0..n).collect(),
                    extra,
                };
                let trace = sim::execute(&schedule, &inst, &scenario).unwrap();
                triples += 1;
                violated += usize::from(!trace.violations.is_empty());
            }
        }
    }

    let elapsed = started.elapsed();
    let pass = triples == 1000 && violated == 0 && elapsed < Duration::from_secs(60);
    report(
        "3 (decoupling under within-flexibility delays)",
        pass,
        true,
        &format!("{triples} triples, {violated} with violations; {elapsed:.1?}"),
    );
}

// ---------------------------------------------------------------------------
// Benchmark-scale campaign shared by criteria 4-7.

const CAMPAIGN_STRATEGIES: [Strategy; 7] = [
    Strategy::Maximal,
    Strategy::Equalised,
    Strategy::Wpre,
    Strategy::Wallpre,
    Strategy::Wsucc,
    Strategy::MaxMinflex,
    Strategy::WsuccMinflex,
];

/// Delay settings as percent pairs.
const SETTINGS: [(u32, u32); 2] = [(80, 5), (80, 80)];

struct Campaign {
    blocking: bool,
    source: String,
    complexity: Vec<i64>,
    n_tasks: Vec<usize>,
    /// strategy -> per-instance zero-flexibility counts.
    zeros: BTreeMap<String, Vec<usize>>,
    /// strategy -> per-instance flexibility-mass metrics.
    flex_pred: BTreeMap<String, Vec<f64>>,
    flex_succ: BTreeMap<String, Vec<f64>>,
    /// (strategy, setting) -> per-instance mean violations over 150 runs.
    mean_violations: BTreeMap<(String, (u32, u32)), Vec<f64>>,
    elapsed: Duration,
}

fn campaign() -> &'static Campaign {
    static CAMPAIGN: OnceLock<Campaign> = OnceLock::new();
    CAMPAIGN.get_or_init(run_campaign)
}

fn psplib_instances() -> Option<(Vec<Instance>, String)> {
    let dir = std::env::var_os("FLEXSCHED_PSPLIB")?;
    let dir = std::path::PathBuf::from(dir);
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .ok()?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "sm"))
        .collect();
    files.sort();
    let mut instances = Vec::new();
    for path in files.iter().take(120) {
        let text = std::fs::read_to_string(path).ok()?;
        let stem = path.file_stem().unwrap().to_string_lossy().into_owned();
        match ingest::parse_psplib(&text) {
            Ok(inst) => instances.push(inst.with_name(stem)),
            Err(err) => {
                eprintln!("skipping {}: {err}", path.display());
            }
        }
    }
    if instances.len() >= 60 {
        Some((instances, format!("{} PSPLIB instances", dir.display())))
    } else {
        eprintln!(
            "FLEXSCHED_PSPLIB={} yielded {} instances (< 60); falling back",
            dir.display(),
            instances.len()
        );
        None
    }
}

fn generated_instances() -> (Vec<Instance>, String) {
    let mut instances = Vec::new();
    for &complexity in &[63usize, 100, 137] {
        for i in 0..20u64 {
            let seed = 9000 + complexity as u64 * 100 + i;
            let inst = ingest::generate(122, complexity, (1, 10), seed)
                .unwrap()
                .with_name(format!("gen_c{complexity}_{i}"));
            instances.push(inst);
        }
    }
    (
        instances,
        "60 generated instances (20 per complexity level 63/100/137)".into(),
    )
}

fn run_campaign() -> Campaign {
    let started = Instant::now();
    let (instances, source, blocking) = match psplib_instances() {
        Some((instances, source)) => (instances, source, true),
        None => {
            let (instances, source) = generated_instances();
            (instances, source, false)
        }
    };

    let mut campaign = Campaign {
        blocking,
        source,
        complexity: Vec::new(),
        n_tasks: Vec::new(),
        zeros: BTreeMap::new(),
        flex_pred: BTreeMap::new(),
        flex_succ: BTreeMap::new(),
        mean_violations: BTreeMap::new(),
        elapsed: Duration::ZERO,
    };

    for inst in &instances {
        campaign.complexity.push(analysis::complexity(inst));
        campaign.n_tasks.push(inst.n_tasks());
        for strategy in CAMPAIGN_STRATEGIES {
            let schedule = distribute(strategy, inst, 1.1)
                .unwrap_or_else(|e| panic!("{} / {strategy}: {e}", inst.name()));
            let metrics = analysis::flex_metrics(&schedule, inst);
            let key = strategy.to_string();
            campaign
                .zeros
                .entry(key.clone())
                .or_default()
                .push(metrics.num_zeros);
            campaign
                .flex_pred
                .entry(key.clone())
                .or_default()
                .push(metrics.flex_x_pred);
            campaign
                .flex_succ
                .entry(key.clone())
                .or_default()
                .push(metrics.flex_x_succ);
            for (p_pct, q_pct) in SETTINGS {
                let params = DelayParams {
                    delayed_fraction: p_pct as f64 / 100.0,
                    delay_fraction: q_pct as f64 / 100.0,
                    runs: 150,
                    master_seed: 42,
                };
                let result = sim::monte_carlo(&schedule, inst, &params).unwrap();
                campaign
                    .mean_violations
                    .entry((key.clone(), (p_pct, q_pct)))
                    .or_default()
                    .push(result.mean);
            }
        }
    }
    campaign.elapsed = started.elapsed();
    campaign
}

impl Campaign {
    fn violations(&self, strategy: Strategy, setting: (u32, u32)) -> &[f64] {
        &self.mean_violations[&(strategy.to_string(), setting)]
    }

    fn average(&self, strategy: Strategy, setting: (u32, u32)) -> f64 {
        let series = self.violations(strategy, setting);
        series.iter().sum::<f64>() / series.len() as f64
    }
}

#[test]
fn criterion_4_table_direction() {
    let c = campaign();

    let minflex_small = c.average(Strategy::MaxMinflex, (80, 5));
    let combo_small = c.average(Strategy::WsuccMinflex, (80, 5));
    let part_a = minflex_small == 0.0 && combo_small == 0.0;

    let wsucc_rate = analysis::outperform_rate(
        c.violations(Strategy::Wsucc, (80, 80)),
        c.violations(Strategy::Equalised, (80, 80)),
    )
    .unwrap();
    let part_b = wsucc_rate >= 0.9;

    let equalised_large = c.average(Strategy::Equalised, (80, 80));
    let minflex_large = c.average(Strategy::MaxMinflex, (80, 80));
    let part_c = (minflex_large - equalised_large).abs() <= 0.1 * equalised_large;

    let pass = part_a && part_b && part_c && c.elapsed < Duration::from_secs(600);
    report(
        "4 (performance table direction)",
        pass,
        c.blocking,
        &format!(
            "{}; (80,5): max_minflex {minflex_small:.3}, wsucc_minflex {combo_small:.3}; \
             (80,80): wsucc outperforms equalised on {:.0}% of instances, \
             max_minflex {minflex_large:.2} vs equalised {equalised_large:.2}; campaign {:.1?}",
            c.source,
            wsucc_rate * 100.0,
            c.elapsed
        ),
    );
}

#[test]
fn criterion_5_correlation_signs() {
    let c = campaign();
    let setting = (80u32, 80u32);

    let complexity: Vec<f64> = c.complexity.iter().map(|&v| v as f64).collect();
    let r_complexity =
        analysis::pearson(&complexity, c.violations(Strategy::Wallpre, setting)).unwrap();

    // Flexibility-mass correlations pool the four classic distributions.
    let pooled = [
        Strategy::Maximal,
        Strategy::Equalised,
        Strategy::Wpre,
        Strategy::Wallpre,
    ];
    let mut succ_series = Vec::new();
    let mut pred_series = Vec::new();
    let mut violation_series = Vec::new();
    for strategy in pooled {
        let key = strategy.to_string();
        succ_series.extend_from_slice(&c.flex_succ[&key]);
        pred_series.extend_from_slice(&c.flex_pred[&key]);
        violation_series.extend_from_slice(c.violations(strategy, setting));
    }
    let r_succ = analysis::pearson(&succ_series, &violation_series).unwrap();
    let r_pred = analysis::pearson(&pred_series, &violation_series).unwrap();

    let pass = r_complexity >= 0.4 && r_succ <= -0.2 && r_pred.abs() <= 0.3;
    report(
        "5 (correlation signs at 80/80)",
        pass,
        c.blocking,
        &format!(
            "complexity vs wallpre violations r={r_complexity:.3} (>=0.4); \
             flex*succ r={r_succ:.3} (<=-0.2); flex*pred r={r_pred:.3} (|r|<=0.3)"
        ),
    );
}

#[test]
fn criterion_6_variance_stratification() {
    let c = campaign();
    let series = c.violations(Strategy::Wallpre, (80, 80));
    let pooled = analysis::variance(series).unwrap();

    let mut strata: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
    for (level, &value) in c.complexity.iter().zip(series) {
        strata.entry(*level).or_default().push(value);
    }
    let mut detail = format!("pooled {pooled:.1}");
    let mut pass = strata.len() > 1;
    for (level, values) in &strata {
        let within = analysis::variance(values).unwrap();
        detail.push_str(&format!(", c{level} {within:.1}"));
        pass &= pooled > within;
    }
    report(
        "6 (variance stratification, wallpre 80/80)",
        pass,
        c.blocking,
        &detail,
    );
}

#[test]
fn criterion_7_zero_flexibility_share() {
    let c = campaign();
    let equalised_zeros = &c.zeros[&Strategy::Equalised.to_string()];
    let share: f64 = equalised_zeros
        .iter()
        .zip(&c.n_tasks)
        .map(|(&z, &n)| z as f64 / n as f64)
        .sum::<f64>()
        / equalised_zeros.len() as f64;

    let mean = |zs: &[usize]| zs.iter().sum::<usize>() as f64 / zs.len() as f64;
    let maximal_zeros = mean(&c.zeros[&Strategy::Maximal.to_string()]);
    let equalised_mean = mean(equalised_zeros);

    let pass = (0.25..=0.50).contains(&share) && maximal_zeros > equalised_mean;
    report(
        "7 (zero-flexibility share)",
        pass,
        c.blocking,
        &format!(
            "equalised first-bin share {share:.3} (in [0.25, 0.50]); \
             mean zeros: maximal {maximal_zeros:.1} > equalised {equalised_mean:.1}"
        ),
    );
}

#[test]
fn criterion_8_fallback_machinery() {
    let c = campaign();
    // Whichever source is active, the campaign must be well-formed: 60+
    // instances, complexity levels restricted to the benchmark's three
    // values in fallback mode, and every series aligned.
    let n = c.complexity.len();
    let mut pass = n >= 60;
    if !c.blocking {
        pass &= c.complexity.iter().all(|c| [63, 100, 137].contains(c));
        pass &= c.n_tasks.iter().all(|&t| t == 122);
        let per_level = c
            .complexity
            .iter()
            .filter(|&&level| level == 63)
            .count();
        pass &= per_level == 20;
    }
    for series in c.mean_violations.values() {
        pass &= series.len() == n;
    }
    report(
        "8 (benchmark source and fallback)",
        pass,
        true,
        &format!(
            "{} ({}); criteria 4-7 {}",
            c.source,
            if c.blocking {
                "PSPLIB mode"
            } else {
                "generated fallback"
            },
            if c.blocking {
                "blocking"
            } else {
                "logged, non-blocking"
            }
        ),
    );
}
