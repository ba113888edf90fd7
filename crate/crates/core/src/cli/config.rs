//! Run configuration: built-in defaults, overridden by a flat `key = value`
//! file, overridden by command-line flags.

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

/// Environment variable naming a config file used when `--config` is absent.
pub const CONFIG_ENV: &str = "WCASCADE_CONFIG";

#[derive(Debug, Error)]
pub enum ConfigError {
    /// Parse failure or help/version request; clap renders it.
    #[error("{0}")]
    Usage(#[from] clap::Error),
    #[error("invalid value for {key}: {value:?} ({reason})")]
    InvalidValue { key: String, value: String, reason: String },
    #[error("unknown config key {key:?} at {path}:{line}")]
    UnknownKey { key: String, path: String, line: usize },
    #[error("malformed line {line} in {path}: expected key = value")]
    Malformed { path: String, line: usize },
    #[error("cannot read config file {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Step-1 pair state from |e⟩|g⟩
    Epr,
    /// Ideal cascade to --target-n atoms
    Expand,
    /// Monte-Carlo fidelity under jitter and decay
    Simulate,
    /// Effective vs exact pass over a detuning grid
    Validate,
    /// Pass-by-pass plan for --target-n
    Schedule,
    /// Timing budget against the radiative lifetime
    Feasibility,
    /// Fidelity over jitter/lifetime grids
    NoiseSweep,
    /// Measurement reduction success frequency, --from to --to
    Reduce,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Epr => "epr",
            Command::Expand => "expand",
            Command::Simulate => "simulate",
            Command::Validate => "validate",
            Command::Schedule => "schedule",
            Command::Feasibility => "feasibility",
            Command::NoiseSweep => "noise-sweep",
            Command::Reduce => "reduce",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

#[derive(Debug, Parser)]
#[command(name = "wcascade", version, about = "Deterministic W-state expansion in cavity QED")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Flat key = value config file (default: $WCASCADE_CONFIG)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    target_n: Option<String>,
    /// Coupling as an ordinary frequency, Hz (g = 2π·g_hz)
    #[arg(long, global = true)]
    g_hz: Option<String>,
    #[arg(long, global = true)]
    delta_over_g: Option<String>,
    /// Radiative lifetime, s
    #[arg(long = "t-r-s", global = true)]
    t_r_s: Option<String>,
    /// Pulse-angle jitter, rad
    #[arg(long, global = true)]
    theta_sigma: Option<String>,
    #[arg(long, global = true)]
    trials: Option<String>,
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Photon-ladder truncation of the exact model
    #[arg(long, global = true)]
    n_max: Option<String>,
    #[arg(long, global = true)]
    from: Option<String>,
    #[arg(long, global = true)]
    to: Option<String>,
    /// Enable radiative decay in simulate (true/false)
    #[arg(long, global = true)]
    decay: Option<String>,
    #[arg(long = "output", global = true)]
    output_path: Option<PathBuf>,
    #[arg(long = "format", global = true)]
    output_format: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub target_n: usize,
    pub g_hz: f64,
    pub delta_over_g: f64,
    pub t_r_s: f64,
    pub theta_sigma: f64,
    pub trials: usize,
    pub seed: u64,
    pub n_max: usize,
    pub from: usize,
    pub to: usize,
    pub decay: bool,
    pub output_path: Option<PathBuf>,
    pub output_format: OutputFormat,
}

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        Self {
            command,
            target_n: 4,
            g_hz: 24_000.0,
            delta_over_g: 10.0,
            t_r_s: 0.03,
            theta_sigma: 0.0,
            trials: 10_000,
            seed: 0,
            n_max: crate::interaction::DEFAULT_N_MAX,
            from: 4,
            to: 3,
            decay: true,
            output_path: None,
            output_format: OutputFormat::Csv,
        }
    }

    /// Parses `argv` (program name first); the config file comes from
    /// `--config` or the [`CONFIG_ENV`] variable.
    pub fn parse_from<I, T>(argv: I) -> Result<Self, ConfigError>
    where
        I: IntoIterator<Item = T>,
        T: Into<OsString> + Clone,
    {
        let env_path = std::env::var_os(CONFIG_ENV).filter(|p| !p.is_empty()).map(PathBuf::from);
        Self::parse_with_env(argv, env_path)
    }

    pub fn parse_with_env<I, T>(argv: I, env_path: Option<PathBuf>) -> Result<Self, ConfigError>
    where
        I: IntoIterator<Item = T>,
        T: Into<OsString> + Clone,
    {
        let cli = Cli::try_parse_from(argv)?;
        let mut cfg = Self::defaults(cli.command);
        if let Some(path) = cli.config.clone().or(env_path) {
            cfg.apply_file(&path)?;
        }
        let flags = [
            ("target_n", &cli.target_n),
            ("g_hz", &cli.g_hz),
            ("delta_over_g", &cli.delta_over_g),
            ("t_r_s", &cli.t_r_s),
            ("theta_sigma", &cli.theta_sigma),
            ("trials", &cli.trials),
            ("seed", &cli.seed),
            ("n_max", &cli.n_max),
            ("from", &cli.from),
            ("to", &cli.to),
            ("decay", &cli.decay),
            ("output_format", &cli.output_format),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        if let Some(p) = cli.output_path {
            cfg.output_path = Some(p);
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let shown = path.display().to_string();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: shown.clone(), source })?;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Malformed { path: shown, line: i + 1 });
            };
            let key = key.trim();
            let value = value.trim();
            if key == "output_path" {
                self.output_path = Some(PathBuf::from(value));
                continue;
            }
            if !self.knows(key) {
                return Err(ConfigError::UnknownKey { key: key.to_string(), path: shown, line: i + 1 });
            }
            self.set(key, value)?;
        }
        Ok(())
    }

    fn knows(&self, key: &str) -> bool {
        matches!(
            canonical_key(key),
            "target_n"
                | "g_hz"
                | "delta_over_g"
                | "t_r_s"
                | "theta_sigma"
                | "trials"
                | "seed"
                | "n_max"
                | "from"
                | "to"
                | "decay"
                | "output_format"
                | "output_path"
        )
    }

    /// Sets one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match canonical_key(key) {
            "target_n" => self.target_n = parse(key, value)?,
            "g_hz" => self.g_hz = parse(key, value)?,
            "delta_over_g" => self.delta_over_g = parse(key, value)?,
            "t_r_s" => self.t_r_s = parse(key, value)?,
            "theta_sigma" => self.theta_sigma = parse(key, value)?,
            "trials" => self.trials = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "n_max" => self.n_max = parse(key, value)?,
            "from" => self.from = parse(key, value)?,
            "to" => self.to = parse(key, value)?,
            "decay" => self.decay = parse(key, value)?,
            "output_format" => {
                self.output_format =
                    OutputFormat::from_str(value, true).map_err(|reason| invalid(key, value, reason))?
            }
            "output_path" => self.output_path = Some(PathBuf::from(value)),
            _ => return Err(invalid(key, value, "unknown key".into())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [("g_hz", self.g_hz), ("delta_over_g", self.delta_over_g), ("t_r_s", self.t_r_s)];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(key, &v.to_string(), "must be positive".into()));
            }
        }
        if !(self.theta_sigma.is_finite() && self.theta_sigma >= 0.0) {
            return Err(invalid("theta_sigma", &self.theta_sigma.to_string(), "must be non-negative".into()));
        }
        let counts = [
            ("target_n", self.target_n),
            ("trials", self.trials),
            ("n_max", self.n_max),
            ("from", self.from),
            ("to", self.to),
        ];
        for (key, v) in counts {
            if v == 0 {
                return Err(invalid(key, "0", "must be at least 1".into()));
            }
        }
        if self.command == Command::Reduce && self.to > self.from {
            return Err(invalid("to", &self.to.to_string(), format!("exceeds from = {}", self.from)));
        }
        Ok(())
    }
}

fn canonical_key(key: &str) -> &str {
    match key {
        "T_r_s" | "t-r-s" => "t_r_s",
        "output" => "output_path",
        "format" => "output_format",
        other => other,
    }
}

fn invalid(key: &str, value: &str, reason: String) -> ConfigError {
    ConfigError::InvalidValue { key: canonical_key(key).replace('-', "_"), value: value.to_string(), reason }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: fmt::Display,
{
    value.trim().parse().map_err(|e: T::Err| invalid(key, value, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn parse_args(args: &[&str]) -> Result<RunConfig, ConfigError> {
        RunConfig::parse_with_env(std::iter::once("wcascade").chain(args.iter().copied()), None)
    }

    #[test]
    fn feasibility_defaults() {
        let cfg = parse_args(&["feasibility"]).unwrap();
        assert_eq!(cfg.command, Command::Feasibility);
        assert_eq!(cfg.g_hz, 24_000.0);
        assert_eq!(cfg.delta_over_g, 10.0);
        assert_eq!(cfg.t_r_s, 0.03);
    }

    #[test]
    fn zero_target_names_the_key() {
        let err = parse_args(&["expand", "--target-n", "0"]).unwrap_err();
        assert!(err.to_string().contains("target_n"), "{err}");
        let err = parse_args(&["expand", "--target-n", "four"]).unwrap_err();
        assert!(err.to_string().contains("target_n"), "{err}");
    }

    #[test]
    fn unknown_command_is_usage_error() {
        assert!(matches!(parse_args(&["frobnicate"]), Err(ConfigError::Usage(_))));
        assert!(matches!(parse_args(&[]), Err(ConfigError::Usage(_))));
    }

    #[test]
    fn flag_beats_file_beats_default() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "# sweep settings\ntrials = 1000\nseed=42 # inline\n\nT_r_s = 0.5").unwrap();
        let path = f.path().to_str().unwrap().to_string();
        let cfg = parse_args(&["simulate", "--config", &path, "--trials", "5000"]).unwrap();
        assert_eq!(cfg.trials, 5000);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.t_r_s, 0.5);

        let cfg = RunConfig::parse_with_env(["wcascade", "simulate"], Some(f.path().to_path_buf())).unwrap();
        assert_eq!(cfg.trials, 1000);
    }

    #[test]
    fn file_rejects_unknown_keys_and_bad_lines() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "trials = 10\ncolour = blue").unwrap();
        let path = f.path().to_str().unwrap().to_string();
        let err = parse_args(&["simulate", "--config", &path]).unwrap_err();
        assert!(matches!(err, ConfigError::UnknownKey { ref key, line: 2, .. } if key == "colour"));

        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "trials 10").unwrap();
        let path = f.path().to_str().unwrap().to_string();
        assert!(matches!(parse_args(&["simulate", "--config", &path]), Err(ConfigError::Malformed { line: 1, .. })));

        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "g_hz = -3").unwrap();
        let path = f.path().to_str().unwrap().to_string();
        let err = parse_args(&["feasibility", "--config", &path]).unwrap_err();
        assert!(err.to_string().contains("g_hz"));
    }

    #[test]
    fn reduce_bounds() {
        let err = parse_args(&["reduce", "--from", "4", "--to", "5"]).unwrap_err();
        assert!(err.to_string().contains("to"));
        let cfg = parse_args(&["reduce", "--from", "8", "--to", "5", "--format", "json"]).unwrap();
        assert_eq!((cfg.from, cfg.to, cfg.output_format), (8, 5, OutputFormat::Json));
    }
}
