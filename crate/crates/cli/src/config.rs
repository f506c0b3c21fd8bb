//! Session configuration: built-in defaults, overridden by an optional
//! config file (`--config PATH` or the `TAMESPACE_CONFIG` environment
//! variable), overridden in turn by command-line flags.
//!
//! The config file is line-oriented `key = value` text; `#` starts a
//! comment. Recognized keys: `field`, `vars`, `cap`, `tolerance`, `mesh`,
//! `depth`, `seed`.

use std::path::Path;

use tamespace::metric::METRIC_TOLERANCE;
use tamespace::{Error, Field, Result, DEFAULT_DEGREE_CAP};

/// Environment variable naming the default config file.
pub const CONFIG_ENV_VAR: &str = "TAMESPACE_CONFIG";

/// Everything a subcommand needs besides its own arguments.
#[derive(Clone, Debug)]
pub struct SessionConfig {
    /// Coefficient field for polynomials and words.
    pub field: Field,
    /// Number of variables assumed when no weight argument implies it.
    pub vars: usize,
    /// Degree cap for exact word expansion and substitution.
    pub cap: u32,
    /// Numeric tolerance for metric reports.
    pub tolerance: f64,
    /// Grid refinement for chain upper bounds.
    pub mesh: u32,
    /// Search depth for chains, tree balls, and link group balls.
    pub depth: usize,
    /// Seed for sampling-based subroutines (reserved for reproducibility).
    pub seed: u64,
}

impl Default for SessionConfig {
    fn default() -> Self {
        SessionConfig {
            field: Field::Rational,
            vars: 3,
            cap: DEFAULT_DEGREE_CAP,
            tolerance: METRIC_TOLERANCE,
            mesh: 4,
            depth: 2,
            seed: 0,
        }
    }
}

/// Parse a field spec: `rationals` (or `q`), or a prime number.
pub fn parse_field(src: &str) -> Result<Field> {
    let trimmed = src.trim();
    if trimmed.eq_ignore_ascii_case("rationals") || trimmed.eq_ignore_ascii_case("q") {
        return Ok(Field::Rational);
    }
    let p: u64 = trimmed.parse().map_err(|_| {
        Error::precondition(format!(
            "field must be `rationals` or a prime number, got `{trimmed}`"
        ))
    })?;
    Field::prime(p)
}

impl SessionConfig {
    /// Defaults overlaid with the config file, if one is named by `--config`
    /// or by the environment variable.
    pub fn load(explicit_path: Option<&Path>) -> Result<SessionConfig> {
        let mut config = SessionConfig::default();
        let env_path = std::env::var(CONFIG_ENV_VAR).ok();
        let path: Option<&Path> = explicit_path.or(env_path.as_deref().map(Path::new));
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|err| {
                Error::precondition(format!("cannot read config {}: {err}", path.display()))
            })?;
            config.apply_file(&text)?;
        }
        config.validate()?;
        Ok(config)
    }

    fn apply_file(&mut self, text: &str) -> Result<()> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut parts = line.splitn(2, '=');
            let key = parts.next().unwrap_or("").trim();
            let value = parts.next().map(str::trim).ok_or(Error::Parse {
                line: idx + 1,
                column: raw.len() + 1,
                message: "expected `key = value`".into(),
            })?;
            let bad = |message: String| Error::Parse {
                line: idx + 1,
                column: raw.find(value).map_or(1, |c| c + 1),
                message,
            };
            match key {
                "field" => self.field = parse_field(value).map_err(|e| bad(e.to_string()))?,
                "vars" => {
                    self.vars = value
                        .parse()
                        .map_err(|_| bad(format!("invalid variable count `{value}`")))?
                }
                "cap" => {
                    self.cap = value
                        .parse()
                        .map_err(|_| bad(format!("invalid degree cap `{value}`")))?
                }
                "tolerance" => {
                    self.tolerance = value
                        .parse()
                        .map_err(|_| bad(format!("invalid tolerance `{value}`")))?
                }
                "mesh" => {
                    self.mesh = value
                        .parse()
                        .map_err(|_| bad(format!("invalid mesh `{value}`")))?
                }
                "depth" => {
                    self.depth = value
                        .parse()
                        .map_err(|_| bad(format!("invalid depth `{value}`")))?
                }
                "seed" => {
                    self.seed = value
                        .parse()
                        .map_err(|_| bad(format!("invalid seed `{value}`")))?
                }
                other => return Err(bad(format!("unknown config key `{other}`"))),
            }
        }
        Ok(())
    }

    /// The invariants every session must satisfy.
    pub fn validate(&self) -> Result<()> {
        if self.vars < 2 {
            return Err(Error::precondition("vars must be at least 2"));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::precondition("tolerance must be positive"));
        }
        if self.mesh == 0 {
            return Err(Error::precondition("mesh must be at least 1"));
        }
        Ok(())
    }
}
