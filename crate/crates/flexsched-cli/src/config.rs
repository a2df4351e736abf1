//! Experiment configuration: defaults, flat key=value config files, and CLI
//! flag overrides (flags win).

use std::path::{Path, PathBuf};

use flexsched::Strategy;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceFormat {
    Psplib,
    Native,
}

impl InstanceFormat {
    pub fn parse(s: &str) -> Result<Self, CliError> {
        match s {
            "psplib" => Ok(InstanceFormat::Psplib),
            "native" => Ok(InstanceFormat::Native),
            other => Err(CliError::Usage(format!(
                "unknown format '{other}' (expected psplib or native)"
            ))),
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            InstanceFormat::Psplib => "sm",
            InstanceFormat::Native => "txt",
        }
    }
}

/// Everything an experiment command needs. Paper-style defaults: the five
/// delay settings, 150 runs, deadline factor 1.1.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub instance_dir: Option<PathBuf>,
    pub format: InstanceFormat,
    pub strategies: Vec<Strategy>,
    pub grid: Vec<(f64, f64)>,
    pub runs: usize,
    pub deadline_factor: f64,
    pub master_seed: u64,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            instance_dir: None,
            format: InstanceFormat::Native,
            strategies: flexsched::ALL_STRATEGIES.to_vec(),
            grid: vec![
                (0.05, 0.05),
                (0.05, 1.0),
                (0.3, 0.3),
                (0.8, 0.05),
                (0.8, 0.8),
            ],
            runs: 150,
            deadline_factor: 1.1,
            master_seed: 42,
            out_dir: PathBuf::from("out"),
        }
    }
}

/// Unmerged option values, as they appear on the command line or in a
/// config file.
#[derive(Debug, Clone, Default)]
pub struct ConfigOverrides {
    pub instances: Option<PathBuf>,
    pub format: Option<String>,
    pub strategies: Option<String>,
    pub grid: Option<String>,
    pub runs: Option<usize>,
    pub seed: Option<u64>,
    pub deadline_factor: Option<f64>,
    pub out: Option<PathBuf>,
}

impl ConfigOverrides {
    /// Reads a flat `key=value` file; `#` starts a comment.
    pub fn from_file(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            CliError::Data(format!("cannot read config file {}: {e}", path.display()))
        })?;
        let mut overrides = ConfigOverrides::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Usage(format!(
                    "{}:{}: expected key=value, got '{line}'",
                    path.display(),
                    idx + 1
                )));
            };
            let key = key.trim();
            let value = value.trim();
            let bad_value = |what: &str| {
                CliError::Usage(format!(
                    "{}:{}: invalid {what} value '{value}'",
                    path.display(),
                    idx + 1
                ))
            };
            match key {
                "instances" => overrides.instances = Some(PathBuf::from(value)),
                "format" => overrides.format = Some(value.to_string()),
                "strategies" => overrides.strategies = Some(value.to_string()),
                "grid" => overrides.grid = Some(value.to_string()),
                "runs" => {
                    overrides.runs = Some(value.parse().map_err(|_| bad_value("runs"))?)
                }
                "seed" => overrides.seed = Some(value.parse().map_err(|_| bad_value("seed"))?),
                "deadline-factor" => {
                    overrides.deadline_factor =
                        Some(value.parse().map_err(|_| bad_value("deadline-factor"))?)
                }
                "out" => overrides.out = Some(PathBuf::from(value)),
                other => {
                    return Err(CliError::Usage(format!(
                        "{}:{}: unknown config key '{other}'",
                        path.display(),
                        idx + 1
                    )))
                }
            }
        }
        Ok(overrides)
    }

    /// Applies this layer on top of `config`; present values win.
    pub fn apply(self, config: &mut ExperimentConfig) -> Result<(), CliError> {
        if let Some(dir) = self.instances {
            config.instance_dir = Some(dir);
        }
        if let Some(format) = self.format {
            config.format = InstanceFormat::parse(&format)?;
        }
        if let Some(list) = self.strategies {
            config.strategies = parse_strategies(&list)?;
        }
        if let Some(grid) = self.grid {
            config.grid = parse_grid(&grid)?;
        }
        if let Some(runs) = self.runs {
            if runs == 0 {
                return Err(CliError::Usage("runs must be at least 1".into()));
            }
            config.runs = runs;
        }
        if let Some(seed) = self.seed {
            config.master_seed = seed;
        }
        if let Some(factor) = self.deadline_factor {
            if !(factor >= 1.0) {
                return Err(CliError::Usage(format!(
                    "deadline-factor must be at least 1, got {factor}"
                )));
            }
            config.deadline_factor = factor;
        }
        if let Some(out) = self.out {
            config.out_dir = out;
        }
        Ok(())
    }
}

pub fn parse_strategies(list: &str) -> Result<Vec<Strategy>, CliError> {
    let mut strategies = Vec::new();
    for name in list.split(',') {
        let name = name.trim();
        if name.is_empty() {
            continue;
        }
        let strategy: Strategy = name
            .parse()
            .map_err(|e| CliError::Usage(format!("{e}")))?;
        if !strategies.contains(&strategy) {
            strategies.push(strategy);
        }
    }
    if strategies.is_empty() {
        return Err(CliError::Usage("strategy list is empty".into()));
    }
    Ok(strategies)
}

/// Grid syntax: `p:q,p:q,...` with fractions in [0, 1] for p.
pub fn parse_grid(text: &str) -> Result<Vec<(f64, f64)>, CliError> {
    let mut grid = Vec::new();
    for pair in text.split(',') {
        let pair = pair.trim();
        if pair.is_empty() {
            continue;
        }
        let parsed = pair
            .split_once(':')
            .and_then(|(p, q)| p.trim().parse::<f64>().ok().zip(q.trim().parse::<f64>().ok()));
        let Some((p, q)) = parsed else {
            return Err(CliError::Usage(format!(
                "grid entry '{pair}' is not of the form p:q"
            )));
        };
        if !(0.0..=1.0).contains(&p) || q < 0.0 {
            return Err(CliError::Usage(format!(
                "grid entry '{pair}' out of range (p in [0,1], q >= 0)"
            )));
        }
        grid.push((p, q));
    }
    if grid.is_empty() {
        return Err(CliError::Usage("grid is empty".into()));
    }
    Ok(grid)
}

/// Resolves the final configuration: defaults, then the config file, then
/// command-line flags.
pub fn resolve(
    config_file: Option<&Path>,
    flags: ConfigOverrides,
) -> Result<ExperimentConfig, CliError> {
    let mut config = ExperimentConfig::default();
    if let Some(path) = config_file {
        ConfigOverrides::from_file(path)?.apply(&mut config)?;
    }
    flags.apply(&mut config)?;
    Ok(config)
}
