//! Run configuration: command-line flags layered over an optional
//! key=value config file. Flags win.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Solve,
    Oracle,
    Sweep,
    Probe,
    Figure1,
    Verify,
}

impl Command {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "solve" => Command::Solve,
            "oracle" => Command::Oracle,
            "sweep" => Command::Sweep,
            "probe" => Command::Probe,
            "figure1" => Command::Figure1,
            "verify" => Command::Verify,
            _ => return None,
        })
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Command::Solve => "solve",
            Command::Oracle => "oracle",
            Command::Sweep => "sweep",
            Command::Probe => "probe",
            Command::Figure1 => "figure1",
            Command::Verify => "verify",
        };
        f.write_str(s)
    }
}

/// Fully resolved run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub mu: f64,
    pub alpha: f64,
    pub m: f64,
    pub grid_exp: u32,
    pub k_max: u32,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub jobs: usize,
    pub domain: (f64, f64),
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// sweep axes (defaults cover the admissible box)
    pub mu_list: Vec<f64>,
    pub alpha_list: Vec<f64>,
    pub m_list: Vec<f64>,
    /// growth-ratio thresholds checked by probe/figure1 summaries
    pub stable_ratio: f64,
    pub jump_rel_tol: f64,
    /// allowed spread of the fractional quantities across the tail states
    pub fractional_stable: f64,
}

#[derive(Debug)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error at `{}`: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError { key: key.into(), message: message.into() }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, ConfigError> {
    v.parse().map_err(|_| err(key, format!("`{v}` is not a number")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    v.split(',')
        .map(|tok| tok.trim().parse().map_err(|_| err(key, format!("`{tok}` is not a number"))))
        .collect()
}

impl RunConfig {
    fn defaults(command: Command) -> Self {
        let jobs = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
        RunConfig {
            command,
            mu: 1.4,
            alpha: 0.25,
            m: 20.0,
            grid_exp: 12,
            k_max: 64,
            out_dir: PathBuf::from("out"),
            seed: 0,
            jobs,
            domain: (-1.0, 1.0),
            newton_tol: 1e-12,
            newton_max_iter: 100,
            mu_list: vec![1.1, 1.3, 1.4, 1.6, 1.9],
            alpha_list: vec![0.1, 0.25, 0.9],
            m_list: vec![5.0, 20.0],
            stable_ratio: 1.05,
            jump_rel_tol: 0.02,
            fractional_stable: 1.2,
        }
    }

    /// Build from argv (without the program name). The first positional
    /// argument is the command; `--config file` is read first, then the
    /// remaining flags override it.
    pub fn from_args(args: &[String]) -> Result<Self, ConfigError> {
        let mut command = None;
        let mut flags: BTreeMap<String, String> = BTreeMap::new();
        let mut config_path: Option<PathBuf> = None;
        let mut it = args.iter().peekable();
        while let Some(arg) = it.next() {
            if let Some(name) = arg.strip_prefix("--") {
                let value = it
                    .next()
                    .ok_or_else(|| err(name, "missing value"))?
                    .clone();
                if name == "config" {
                    config_path = Some(PathBuf::from(value));
                } else {
                    flags.insert(name.to_string(), value);
                }
            } else if command.is_none() {
                command = Some(
                    Command::parse(arg).ok_or_else(|| err("command", format!("unknown command `{arg}`")))?,
                );
            } else {
                return Err(err("args", format!("unexpected argument `{arg}`")));
            }
        }
        let command = command.ok_or_else(|| {
            err("command", "expected one of: solve, oracle, sweep, probe, figure1, verify")
        })?;
        let mut cfg = Self::defaults(command);
        if command == Command::Figure1 {
            // preset pinned to the published simulation parameters
            cfg.mu = 1.4;
            cfg.alpha = 0.25;
            cfg.m = 20.0;
            cfg.grid_exp = 14;
            cfg.k_max = 512;
        }
        if let Some(path) = &config_path {
            let text = std::fs::read_to_string(path)
                .map_err(|e| err("config", format!("cannot read {}: {e}", path.display())))?;
            for (lineno, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() || line.starts_with('#') {
                    continue;
                }
                let (k, v) = line
                    .split_once('=')
                    .ok_or_else(|| err("config", format!("line {}: expected key=value", lineno + 1)))?;
                cfg.apply(k.trim(), v.trim())?;
            }
        }
        for (k, v) in &flags {
            cfg.apply(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "mu" => self.mu = parse_f64(key, value)?,
            "alpha" => self.alpha = parse_f64(key, value)?,
            "M" | "m" => self.m = parse_f64(key, value)?,
            "grid-exp" | "grid_exp" => {
                self.grid_exp =
                    value.parse().map_err(|_| err(key, format!("`{value}` is not an integer")))?
            }
            "k-max" | "k_max" => {
                self.k_max =
                    value.parse().map_err(|_| err(key, format!("`{value}` is not an integer")))?
            }
            "out" | "out_dir" => self.out_dir = PathBuf::from(value),
            "seed" => {
                self.seed =
                    value.parse().map_err(|_| err(key, format!("`{value}` is not an integer")))?
            }
            "jobs" => {
                self.jobs =
                    value.parse().map_err(|_| err(key, format!("`{value}` is not an integer")))?
            }
            "a" => self.domain.0 = parse_f64(key, value)?,
            "b" => self.domain.1 = parse_f64(key, value)?,
            "newton_tol" => self.newton_tol = parse_f64(key, value)?,
            "newton_max_iter" => {
                self.newton_max_iter =
                    value.parse().map_err(|_| err(key, format!("`{value}` is not an integer")))?
            }
            "mu_list" => self.mu_list = parse_list(key, value)?,
            "alpha_list" => self.alpha_list = parse_list(key, value)?,
            "m_list" | "M_list" => self.m_list = parse_list(key, value)?,
            "stable_ratio" => self.stable_ratio = parse_f64(key, value)?,
            "jump_rel_tol" => self.jump_rel_tol = parse_f64(key, value)?,
            "fractional_stable" => self.fractional_stable = parse_f64(key, value)?,
            _ => return Err(err(key, "unknown key")),
        }
        Ok(())
    }

    // negated comparisons reject NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    fn validate(&self) -> Result<(), ConfigError> {
        if !(self.mu > 1.0 && self.mu < 2.0) {
            return Err(err("mu", format!("{} outside (1, 2)", self.mu)));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(err("alpha", format!("{} outside (0, 1)", self.alpha)));
        }
        if self.m < 0.0 || !self.m.is_finite() {
            return Err(err("M", format!("{} must be a finite nonnegative number", self.m)));
        }
        if self.grid_exp < 2 || self.grid_exp > 26 {
            return Err(err("grid-exp", format!("{} outside 2..=26", self.grid_exp)));
        }
        if self.k_max < 1 {
            return Err(err("k-max", "must be >= 1"));
        }
        if self.jobs == 0 {
            return Err(err("jobs", "must be >= 1"));
        }
        if !(self.domain.0 < 0.0 && 0.0 < self.domain.1) {
            return Err(err("a", format!("domain [{}, {}] must straddle 0", self.domain.0, self.domain.1)));
        }
        if !(self.newton_tol > 0.0) {
            return Err(err("newton_tol", "must be positive"));
        }
        Ok(())
    }

    /// Key=value echo of the effective configuration, written next to
    /// the artifacts for reproducibility.
    pub fn echo(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("command={}\n", self.command));
        s.push_str(&format!("mu={}\n", self.mu));
        s.push_str(&format!("alpha={}\n", self.alpha));
        s.push_str(&format!("M={}\n", self.m));
        s.push_str(&format!("grid_exp={}\n", self.grid_exp));
        s.push_str(&format!("k_max={}\n", self.k_max));
        s.push_str(&format!("seed={}\n", self.seed));
        s.push_str(&format!("jobs={}\n", self.jobs));
        s.push_str(&format!("a={}\n", self.domain.0));
        s.push_str(&format!("b={}\n", self.domain.1));
        s.push_str(&format!("newton_tol={}\n", self.newton_tol));
        s.push_str(&format!("newton_max_iter={}\n", self.newton_max_iter));
        s.push_str(&format!("stable_ratio={}\n", self.stable_ratio));
        s.push_str(&format!("jump_rel_tol={}\n", self.jump_rel_tol));
        s.push_str(&format!("fractional_stable={}\n", self.fractional_stable));
        if self.command == Command::Sweep {
            let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
            s.push_str(&format!("mu_list={}\n", join(&self.mu_list)));
            s.push_str(&format!("alpha_list={}\n", join(&self.alpha_list)));
            s.push_str(&format!("m_list={}\n", join(&self.m_list)));
        }
        s
    }
}
