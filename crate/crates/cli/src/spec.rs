//! Experiment specification: command-line flags merged over an optional
//! `key = value` configuration file.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sparse_recover::superres::ScheduleMode;

use crate::CliError;

/// Environment variable holding the worker thread count for `recoverd`.
pub const THREADS_ENV: &str = "SPARSE_RECOVER_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CommandKind {
    EnergyGd,
    Recover1d,
    Recoverd,
    NnDemo,
    BoundsCheck,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::EnergyGd => "energy-gd",
            Self::Recover1d => "recover1d",
            Self::Recoverd => "recoverd",
            Self::NnDemo => "nn-demo",
            Self::BoundsCheck => "bounds-check",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Mode {
    #[default]
    Theory,
    Empirical,
}

impl From<Mode> for ScheduleMode {
    fn from(mode: Mode) -> Self {
        match mode {
            Mode::Theory => ScheduleMode::Theory,
            Mode::Empirical => ScheduleMode::Empirical,
        }
    }
}

/// Which d-dimensional pipeline `recoverd` runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Variant {
    /// Box-distributed truth recovered coordinate by coordinate.
    #[default]
    Deterministic,
    /// Unit-sphere truth recovered after a random Gaussian projection.
    Randomized,
}

/// Origin of the separation constant in the randomized pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum BetaChoice {
    #[default]
    Exact,
    Formula,
}

/// A fully specified run. Unset parameters fall back to per-command
/// defaults when the run starts.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub command: CommandKind,
    pub seed: u64,
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub gamma: Option<f64>,
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub ell: Option<f64>,
    pub eps: Option<f64>,
    pub beta: Option<f64>,
    pub kappa: Option<f64>,
    pub samples: Option<usize>,
    pub m_b: Option<usize>,
    pub mode: Option<Mode>,
    pub variant: Variant,
    pub beta_source: BetaChoice,
    pub out_dir: PathBuf,
    pub threads: usize,
}

impl ExperimentSpec {
    pub fn new(command: CommandKind, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            command,
            seed: 0,
            n: None,
            d: None,
            gamma: None,
            m: None,
            k: None,
            ell: None,
            eps: None,
            beta: None,
            kappa: None,
            samples: None,
            m_b: None,
            mode: None,
            variant: Variant::default(),
            beta_source: BetaChoice::default(),
            out_dir: out_dir.into(),
            threads: 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sparse-recover", version, about = "Seeded sparse-measure recovery experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact particle descent on the energy distance towards random spikes.
    EnergyGd(Params),
    /// One-dimensional recovery from Fourier moments.
    Recover1d(Params),
    /// d-dimensional recovery (deterministic or randomized).
    Recoverd(Params),
    /// Two-dimensional zero-one network trained through its neuron angles.
    NnDemo(Params),
    /// Tabulate the truncated sign series against its error bounds.
    BoundsCheck(Params),
}

impl Command {
    fn split(self) -> (CommandKind, Params) {
        match self {
            Self::EnergyGd(p) => (CommandKind::EnergyGd, p),
            Self::Recover1d(p) => (CommandKind::Recover1d, p),
            Self::Recoverd(p) => (CommandKind::Recoverd, p),
            Self::NnDemo(p) => (CommandKind::NnDemo, p),
            Self::BoundsCheck(p) => (CommandKind::BoundsCheck, p),
        }
    }
}

/// Flags shared by every subcommand. Config-file keys use the same names.
#[derive(Debug, Clone, Default, Args)]
pub struct Params {
    /// Seed of the ChaCha8 generator driving every random draw.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of spikes, particles or neurons.
    #[arg(long)]
    pub n: Option<usize>,
    /// Ambient dimension.
    #[arg(long)]
    pub d: Option<usize>,
    /// Stepsize.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Number of Fourier moments.
    #[arg(long)]
    pub m: Option<usize>,
    /// Number of iterations.
    #[arg(long)]
    pub k: Option<usize>,
    /// Minimum separation of the true spikes.
    #[arg(long)]
    pub ell: Option<f64>,
    /// Target accuracy.
    #[arg(long)]
    pub eps: Option<f64>,
    /// Separation constant of coordinates and coordinate sums.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Allowed failure probability of the random projection.
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Monte Carlo sample count.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Expansion order of the sign series.
    #[arg(long = "mB")]
    pub m_b: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long, value_enum)]
    pub variant: Option<Variant>,
    #[arg(long = "beta-source", value_enum)]
    pub beta_source: Option<BetaChoice>,
    /// Directory receiving the CSV and JSON outputs.
    #[arg(long = "out-dir")]
    pub out_dir: Option<PathBuf>,
    /// File of `key = value` lines; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl Params {
    /// Fills every unset field from `entries`.
    pub fn fill_from(&mut self, entries: &BTreeMap<String, String>) -> Result<(), CliError> {
        for (key, raw) in entries {
            match key.as_str() {
                "seed" => fill(&mut self.seed, key, raw)?,
                "n" => fill(&mut self.n, key, raw)?,
                "d" => fill(&mut self.d, key, raw)?,
                "gamma" => fill(&mut self.gamma, key, raw)?,
                "m" => fill(&mut self.m, key, raw)?,
                "k" => fill(&mut self.k, key, raw)?,
                "ell" => fill(&mut self.ell, key, raw)?,
                "eps" => fill(&mut self.eps, key, raw)?,
                "beta" => fill(&mut self.beta, key, raw)?,
                "kappa" => fill(&mut self.kappa, key, raw)?,
                "samples" => fill(&mut self.samples, key, raw)?,
                "mB" => fill(&mut self.m_b, key, raw)?,
                "mode" => fill_enum(&mut self.mode, key, raw)?,
                "variant" => fill_enum(&mut self.variant, key, raw)?,
                "beta-source" => fill_enum(&mut self.beta_source, key, raw)?,
                "out-dir" => {
                    self.out_dir.get_or_insert_with(|| PathBuf::from(raw));
                }
                other => return Err(CliError::Usage(format!("unknown config key `{other}`"))),
            }
        }
        Ok(())
    }
}

fn fill<T: FromStr>(slot: &mut Option<T>, key: &str, raw: &str) -> Result<(), CliError>
where
    T::Err: fmt::Display,
{
    if slot.is_none() {
        let value = raw
            .parse()
            .map_err(|e| CliError::Usage(format!("config key `{key}`: cannot parse `{raw}`: {e}")))?;
        *slot = Some(value);
    }
    Ok(())
}

fn fill_enum<T: ValueEnum>(slot: &mut Option<T>, key: &str, raw: &str) -> Result<(), CliError> {
    if slot.is_none() {
        let value = T::from_str(raw, true)
            .map_err(|e| CliError::Usage(format!("config key `{key}`: {e}")))?;
        *slot = Some(value);
    }
    Ok(())
}

/// Parses `key = value` lines. Blank lines and lines starting with `#` are
/// skipped; a repeated key keeps its last value.
pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut entries = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| CliError::Usage(format!("config line {}: expected `key = value`", lineno + 1)))?;
        entries.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(entries)
}

pub fn read_config(path: &Path) -> Result<BTreeMap<String, String>, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

/// Reads the thread count from [`THREADS_ENV`], defaulting to one.
pub fn threads_from_env() -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(1),
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(t) if t >= 1 => Ok(t),
            _ => Err(CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got `{raw}`"))),
        },
    }
}

impl Cli {
    /// Resolves flags, the optional config file and the environment into a
    /// spec.
    pub fn into_spec(self) -> Result<ExperimentSpec, CliError> {
        let (command, mut params) = self.command.split();
        if let Some(path) = params.config.clone() {
            params.fill_from(&read_config(&path)?)?;
        }
        let mut spec = ExperimentSpec::new(command, params.out_dir.unwrap_or_else(|| PathBuf::from(".")));
        spec.seed = params.seed.unwrap_or(0);
        spec.n = params.n;
        spec.d = params.d;
        spec.gamma = params.gamma;
        spec.m = params.m;
        spec.k = params.k;
        spec.ell = params.ell;
        spec.eps = params.eps;
        spec.beta = params.beta;
        spec.kappa = params.kappa;
        spec.samples = params.samples;
        spec.m_b = params.m_b;
        spec.mode = params.mode;
        spec.variant = params.variant.unwrap_or_default();
        spec.beta_source = params.beta_source.unwrap_or_default();
        spec.threads = threads_from_env()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_lines() {
        let parsed = parse_config("# sweep\nn = 4\n\ngamma=0.05\nn=6\n").unwrap();
        assert_eq!(parsed["n"], "6");
        assert_eq!(parsed["gamma"], "0.05");
        assert!(parse_config("oops").is_err());
    }

    #[test]
    fn flags_win_over_file() {
        let mut params = Params {
            n: Some(3),
            ..Params::default()
        };
        let file = parse_config("n = 9\ngamma = 0.2\nmode = empirical\nmB = 16").unwrap();
        params.fill_from(&file).unwrap();
        assert_eq!(params.n, Some(3));
        assert_eq!(params.gamma, Some(0.2));
        assert_eq!(params.mode, Some(Mode::Empirical));
        assert_eq!(params.m_b, Some(16));
    }

    #[test]
    fn bad_config_values_are_usage_errors() {
        let mut params = Params::default();
        let err = params.fill_from(&parse_config("n = many").unwrap()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err = Params::default().fill_from(&parse_config("colour = red").unwrap()).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
