//! The experiment subcommands. Every output is a deterministic function of
//! the configuration and the instance files: rows are sorted, numbers are
//! formatted with fixed precision, and all randomness flows from the master
//! seed.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use flexsched::{
    analysis, distribute, ingest, monte_carlo, sim, DelayParams, Instance, IntervalSchedule,
    Strategy, TemporalProfile,
};

use crate::config::{ExperimentConfig, InstanceFormat};
use crate::csvfmt::{fixed6, parse_field, read_csv, trimmed, write_file};
use crate::CliError;

pub const INSTANCES_HEADER: &str =
    "instance,n_tasks,n_edges,complexity,avg_tight_width,avg_filled_width,natural_flex,makespan,deadline";
pub const SCHEDULES_HEADER: &str = "instance,strategy,task,a,b,flex";
pub const FLEXMETRICS_HEADER: &str =
    "instance,strategy,num_zeros,flex_x_pred,flex_x_succ,total_flex";
pub const SIMRESULTS_HEADER: &str = "instance,strategy,p,q,runs,mean_violations,var_violations";
pub const REPORT_HEADER: &str = "strategy,p,q,mean_violations,outperform_equalised";
pub const CORRELATIONS_HEADER: &str = "record,metric,strategy,p,q,value";

/// Loads every instance file with the configured extension, sorted by file
/// name; instance names are the file stems.
pub fn load_instances(config: &ExperimentConfig) -> Result<Vec<Instance>, CliError> {
    let dir = config
        .instance_dir
        .as_ref()
        .ok_or_else(|| CliError::Usage("no instance directory given (--instances)".into()))?;
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::Data(format!("cannot read {}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|path| {
            path.is_file()
                && path
                    .extension()
                    .is_some_and(|ext| ext == config.format.extension())
        })
        .collect();
    files.sort();

    let mut instances = Vec::with_capacity(files.len());
    for path in files {
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
        let parsed = match config.format {
            InstanceFormat::Psplib => ingest::parse_psplib(&text),
            InstanceFormat::Native => ingest::parse_native(&text),
        };
        let instance = parsed
            .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?
            .with_name(stem_name(&path));
        instances.push(instance);
    }
    eprintln!(
        "loaded {} instance(s) from {}",
        instances.len(),
        dir.display()
    );
    Ok(instances)
}

fn stem_name(path: &std::path::Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().replace(',', "_"))
        .unwrap_or_default()
}

/// `metrics`: one row of structural metrics per instance.
pub fn cmd_metrics(config: &ExperimentConfig) -> Result<(), CliError> {
    let instances = load_instances(config)?;
    let mut out = String::from(INSTANCES_HEADER);
    out.push('\n');
    for inst in &instances {
        let metrics = analysis::instance_metrics(inst)
            .map_err(|e| CliError::Data(format!("{}: {e}", inst.name())))?;
        let profile = TemporalProfile::compute(inst, config.deadline_factor);
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            inst.name(),
            inst.n_tasks(),
            inst.n_edges(),
            metrics.complexity,
            fixed6(metrics.avg_tight_width),
            fixed6(metrics.avg_filled_width),
            fixed6(metrics.natural_flex),
            trimmed(profile.makespan),
            trimmed(profile.deadline),
        ));
    }
    let path = config.out_dir.join("instances.csv");
    write_file(&path, &out)?;
    eprintln!("wrote {} ({} rows)", path.display(), instances.len());
    Ok(())
}

fn compute_schedule(
    inst: &Instance,
    strategy: Strategy,
    factor: f64,
) -> Result<IntervalSchedule, CliError> {
    distribute(strategy, inst, factor)
        .map_err(|e| CliError::Data(format!("{} / {strategy}: {e}", inst.name())))
}

/// `distribute`: per-task windows and per-distribution metrics for every
/// (instance, strategy) pair.
pub fn cmd_distribute(config: &ExperimentConfig) -> Result<(), CliError> {
    let instances = load_instances(config)?;
    let mut schedules = String::from(SCHEDULES_HEADER);
    schedules.push('\n');
    let mut flexmetrics = String::from(FLEXMETRICS_HEADER);
    flexmetrics.push('\n');

    for inst in &instances {
        for &strategy in &config.strategies {
            let schedule = compute_schedule(inst, strategy, config.deadline_factor)?;
            for task in 0..inst.n_tasks() {
                schedules.push_str(&format!(
                    "{},{strategy},{task},{},{},{}\n",
                    inst.name(),
                    fixed6(schedule.start(task)),
                    fixed6(schedule.end(task)),
                    fixed6(schedule.flexibility(task)),
                ));
            }
            let metrics = analysis::flex_metrics(&schedule, inst);
            flexmetrics.push_str(&format!(
                "{},{strategy},{},{},{},{}\n",
                inst.name(),
                metrics.num_zeros,
                fixed6(metrics.flex_x_pred),
                fixed6(metrics.flex_x_succ),
                fixed6(metrics.total_flex),
            ));
        }
    }

    let schedules_path = config.out_dir.join("schedules.csv");
    write_file(&schedules_path, &schedules)?;
    let flexmetrics_path = config.out_dir.join("flexmetrics.csv");
    write_file(&flexmetrics_path, &flexmetrics)?;
    eprintln!(
        "wrote {} and {}",
        schedules_path.display(),
        flexmetrics_path.display()
    );
    Ok(())
}

/// `simulate`: Monte-Carlo campaigns for every (instance, strategy, p, q).
pub fn cmd_simulate(config: &ExperimentConfig) -> Result<(), CliError> {
    let instances = load_instances(config)?;
    let mut out = String::from(SIMRESULTS_HEADER);
    out.push('\n');
    let mut rows = 0usize;
    for inst in &instances {
        for &strategy in &config.strategies {
            let schedule = compute_schedule(inst, strategy, config.deadline_factor)?;
            for &(p, q) in &config.grid {
                let params = DelayParams {
                    delayed_fraction: p,
                    delay_fraction: q,
                    runs: config.runs,
                    master_seed: config.master_seed,
                };
                let result = monte_carlo(&schedule, inst, &params)
                    .map_err(|e| CliError::Data(format!("{} / {strategy}: {e}", inst.name())))?;
                out.push_str(&format!(
                    "{},{strategy},{},{},{},{},{}\n",
                    inst.name(),
                    fixed6(p),
                    fixed6(q),
                    config.runs,
                    fixed6(result.mean),
                    fixed6(result.variance),
                ));
                rows += 1;
            }
        }
        eprintln!("simulated {}", inst.name());
    }
    let path = config.out_dir.join("simresults.csv");
    write_file(&path, &out)?;
    eprintln!("wrote {} ({rows} rows)", path.display());
    Ok(())
}

/// `gen`: writes `count` native-format instances with the exact complexity.
pub fn cmd_gen(
    n_tasks: usize,
    complexity: usize,
    count: usize,
    seed: u64,
    out_dir: &std::path::Path,
) -> Result<(), CliError> {
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", out_dir.display())))?;
    for i in 0..count {
        let file_seed = sim::mix_seed(seed, "gen", i as u64);
        let instance = ingest::generate(n_tasks, complexity, (1, 10), file_seed)
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let path = out_dir.join(format!("gen_{seed}_{i}.txt"));
        write_file(&path, &ingest::write_native(&instance))?;
    }
    eprintln!("wrote {count} instance(s) to {}", out_dir.display());
    Ok(())
}

struct SimRow {
    instance: String,
    strategy: String,
    p: String,
    q: String,
    mean: f64,
}

/// `report`: aggregates simresults + metrics into the performance table and
/// the correlation/variance table.
pub fn cmd_report(config: &ExperimentConfig) -> Result<(), CliError> {
    let sim_path = config.out_dir.join("simresults.csv");
    let instances_path = config.out_dir.join("instances.csv");
    let flex_path = config.out_dir.join("flexmetrics.csv");

    let sim_rows: Vec<SimRow> = read_csv(&sim_path, SIMRESULTS_HEADER)?
        .into_iter()
        .enumerate()
        .map(|(idx, row)| {
            if row.len() != 7 {
                return Err(CliError::Data(format!(
                    "{} row {}: expected 7 fields",
                    sim_path.display(),
                    idx + 2
                )));
            }
            Ok(SimRow {
                instance: row[0].clone(),
                strategy: row[1].clone(),
                p: row[2].clone(),
                q: row[3].clone(),
                mean: parse_field(&sim_path, idx, "mean_violations", &row[5])?,
            })
        })
        .collect::<Result<_, _>>()?;

    // instance -> [tight, filled, natural, complexity]
    let mut instance_metrics: BTreeMap<String, [f64; 4]> = BTreeMap::new();
    for (idx, row) in read_csv(&instances_path, INSTANCES_HEADER)?.iter().enumerate() {
        instance_metrics.insert(
            row[0].clone(),
            [
                parse_field(&instances_path, idx, "avg_tight_width", &row[4])?,
                parse_field(&instances_path, idx, "avg_filled_width", &row[5])?,
                parse_field(&instances_path, idx, "natural_flex", &row[6])?,
                parse_field(&instances_path, idx, "complexity", &row[3])?,
            ],
        );
    }

    // (instance, strategy) -> [num_zeros, flex_x_pred, flex_x_succ, total_flex]
    let mut flex_metrics: BTreeMap<(String, String), [f64; 4]> = BTreeMap::new();
    for (idx, row) in read_csv(&flex_path, FLEXMETRICS_HEADER)?.iter().enumerate() {
        flex_metrics.insert(
            (row[0].clone(), row[1].clone()),
            [
                parse_field(&flex_path, idx, "num_zeros", &row[2])?,
                parse_field(&flex_path, idx, "flex_x_pred", &row[3])?,
                parse_field(&flex_path, idx, "flex_x_succ", &row[4])?,
                parse_field(&flex_path, idx, "total_flex", &row[5])?,
            ],
        );
    }

    let instances: BTreeSet<String> = sim_rows.iter().map(|r| r.instance.clone()).collect();
    let strategies: BTreeSet<String> = sim_rows.iter().map(|r| r.strategy.clone()).collect();
    let mut settings: Vec<(String, String)> = sim_rows
        .iter()
        .map(|r| (r.p.clone(), r.q.clone()))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    settings.sort_by(|a, b| {
        let pa: f64 = a.0.parse().unwrap_or(0.0);
        let pb: f64 = b.0.parse().unwrap_or(0.0);
        let qa: f64 = a.1.parse().unwrap_or(0.0);
        let qb: f64 = b.1.parse().unwrap_or(0.0);
        (pa, qa).partial_cmp(&(pb, qb)).unwrap()
    });

    // (strategy, p, q) -> instance -> mean violations
    let mut means: BTreeMap<(String, String, String), BTreeMap<String, f64>> = BTreeMap::new();
    for row in &sim_rows {
        means
            .entry((row.strategy.clone(), row.p.clone(), row.q.clone()))
            .or_default()
            .insert(row.instance.clone(), row.mean);
    }
    let series = |strategy: &str, p: &str, q: &str| -> Result<Vec<f64>, CliError> {
        let key = (strategy.to_string(), p.to_string(), q.to_string());
        let by_instance = means.get(&key).ok_or_else(|| {
            CliError::Data(format!(
                "simresults.csv has no rows for ({strategy}, {p}, {q})"
            ))
        })?;
        instances
            .iter()
            .map(|inst| {
                by_instance.get(inst).copied().ok_or_else(|| {
                    CliError::Data(format!(
                        "simresults.csv is missing ({inst}, {strategy}, {p}, {q})"
                    ))
                })
            })
            .collect()
    };

    // Performance table.
    let baseline = "equalised";
    if !strategies.contains(baseline) {
        return Err(CliError::Data(
            "simresults.csv has no 'equalised' rows; the report baseline is missing".into(),
        ));
    }
    let mut report = String::from(REPORT_HEADER);
    report.push('\n');
    for strategy in &strategies {
        for (p, q) in &settings {
            let candidate = series(strategy, p, q)?;
            let base = series(baseline, p, q)?;
            let mean = candidate.iter().sum::<f64>() / candidate.len() as f64;
            let outperform = analysis::outperform_rate(&candidate, &base)
                .map_err(|e| CliError::Data(e.to_string()))?;
            report.push_str(&format!(
                "{strategy},{p},{q},{},{}\n",
                fixed6(mean),
                fixed6(outperform)
            ));
        }
    }
    let report_path = config.out_dir.join("report.csv");
    write_file(&report_path, &report)?;

    // Correlation and variance table.
    let instance_metric_names = ["avg_tight_width", "avg_filled_width", "natural_flex", "complexity"];
    let flex_metric_names = ["num_zeros", "flex_x_pred", "flex_x_succ", "total_flex"];
    let mut corr = String::from(CORRELATIONS_HEADER);
    corr.push('\n');

    let fmt_r = |r: Result<f64, analysis::AnalysisError>| match r {
        Ok(v) => fixed6(v),
        Err(_) => "NA".to_string(),
    };

    for strategy in &strategies {
        for (p, q) in &settings {
            let violations = series(strategy, p, q)?;
            for (slot, name) in instance_metric_names.iter().enumerate() {
                let metric: Vec<f64> = instances
                    .iter()
                    .map(|inst| {
                        instance_metrics.get(inst).map(|m| m[slot]).ok_or_else(|| {
                            CliError::Data(format!("instances.csv is missing {inst}"))
                        })
                    })
                    .collect::<Result<_, _>>()?;
                corr.push_str(&format!(
                    "correlation,{name},{strategy},{p},{q},{}\n",
                    fmt_r(analysis::pearson(&metric, &violations))
                ));
            }
            for (slot, name) in flex_metric_names.iter().enumerate() {
                let metric: Vec<f64> = instances
                    .iter()
                    .map(|inst| {
                        flex_metrics
                            .get(&(inst.clone(), strategy.clone()))
                            .map(|m| m[slot])
                            .ok_or_else(|| {
                                CliError::Data(format!(
                                    "flexmetrics.csv is missing ({inst}, {strategy})"
                                ))
                            })
                    })
                    .collect::<Result<_, _>>()?;
                corr.push_str(&format!(
                    "correlation,{name},{strategy},{p},{q},{}\n",
                    fmt_r(analysis::pearson(&metric, &violations))
                ));
            }

            // Violation variance pooled and within each complexity stratum,
            // plus pairwise mean-difference tests between strata.
            let violations_by_level = || -> Result<BTreeMap<i64, Vec<f64>>, CliError> {
                let mut by_level: BTreeMap<i64, Vec<f64>> = BTreeMap::new();
                for (inst, v) in instances.iter().zip(&violations) {
                    let level = instance_metrics
                        .get(inst)
                        .map(|m| m[3] as i64)
                        .ok_or_else(|| {
                            CliError::Data(format!("instances.csv is missing {inst}"))
                        })?;
                    by_level.entry(level).or_default().push(*v);
                }
                Ok(by_level)
            };
            let by_level = violations_by_level()?;
            corr.push_str(&format!(
                "variance,pooled,{strategy},{p},{q},{}\n",
                fmt_r(analysis::variance(&violations))
            ));
            for (level, values) in &by_level {
                corr.push_str(&format!(
                    "variance,complexity_{level},{strategy},{p},{q},{}\n",
                    fmt_r(analysis::variance(values))
                ));
            }
            let levels: Vec<i64> = by_level.keys().copied().collect();
            for (i, &a) in levels.iter().enumerate() {
                for &b in &levels[i + 1..] {
                    let p_value = analysis::welch_t(&by_level[&a], &by_level[&b]).map(|w| w.p);
                    corr.push_str(&format!(
                        "welch_t,complexity_{a}_vs_{b},{strategy},{p},{q},{}\n",
                        fmt_r(p_value)
                    ));
                }
            }
        }
    }
    let corr_path = config.out_dir.join("correlations.csv");
    write_file(&corr_path, &corr)?;
    eprintln!(
        "wrote {} and {}",
        report_path.display(),
        corr_path.display()
    );
    Ok(())
}
