//! Run configuration in a line-oriented `key = value` format.
//!
//! ```text
//! # comment
//! [grid]
//! nx = 64
//! [initial]
//! scenario = spinodal   # inline comments are allowed
//! ```
//!
//! Every key is optional and falls back to the documented default; unknown
//! sections or keys are rejected.

use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::constitutive::Params;
use crate::error::Error as CoreError;
use crate::grid::Grid;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown key '{key}' in section [{section}]")]
    UnknownKey {
        line: usize,
        section: String,
        key: String,
    },
    #[error("line {line}: unknown section [{section}]")]
    UnknownSection { line: usize, section: String },
    #[error("{0}")]
    Constraint(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    /// Mean `m0` plus seeded band-limited noise, fluid at rest.
    Spinodal,
    /// Tanh-profile disk of radius `radius` in a `φ = −1` background.
    Bubble,
    /// Taylor-Green velocity over a stratified `φ` plus noise.
    Shear,
    /// Initial data of the Cahn-Hilliard manufactured solution.
    Manufactured,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Spinodal => "spinodal",
            Scenario::Bubble => "bubble",
            Scenario::Shear => "shear",
            Scenario::Manufactured => "manufactured",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "spinodal" => Ok(Scenario::Spinodal),
            "bubble" => Ok(Scenario::Bubble),
            "shear" => Ok(Scenario::Shear),
            "manufactured" => Ok(Scenario::Manufactured),
            other => Err(CoreError::UnknownScenario(other.to_string())),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhysicsConfig {
    pub epsilon: f64,
    pub beta: f64,
    pub delta: f64,
    pub nu0: f64,
    pub nu1: f64,
    pub stab: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_final: f64,
    pub cfl: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InitialConfig {
    pub scenario: Scenario,
    pub m0: f64,
    pub amplitude: f64,
    pub theta0: f64,
    pub seed: u64,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub snap_every: usize,
    pub diag_file: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub grid: GridConfig,
    pub physics: PhysicsConfig,
    pub time: TimeConfig,
    pub initial: InitialConfig,
    pub output: OutputConfig,
}

impl Default for Config {
    fn default() -> Self {
        let p = Params::default();
        Config {
            grid: GridConfig {
                nx: 64,
                ny: 64,
                lx: 2.0 * PI,
                ly: 2.0 * PI,
            },
            physics: PhysicsConfig {
                epsilon: p.epsilon,
                beta: p.beta,
                delta: p.delta,
                nu0: p.nu0,
                nu1: p.nu1,
                stab: p.stab,
            },
            time: TimeConfig {
                dt: 1e-3,
                t_final: 0.5,
                cfl: 0.25,
            },
            initial: InitialConfig {
                scenario: Scenario::Spinodal,
                m0: 0.0,
                amplitude: 0.1,
                theta0: 1.0,
                seed: 42,
                radius: 1.0,
            },
            output: OutputConfig {
                dir: PathBuf::from("out"),
                snap_every: 10,
                diag_file: "diagnostics.csv".into(),
            },
        }
    }
}

fn parse_value<T: FromStr>(line: usize, key: &str, raw: &str) -> Result<T, ConfigError> {
    raw.parse().map_err(|_| ConfigError::Syntax {
        line,
        message: format!("cannot parse '{raw}' for key '{key}'"),
    })
}

impl Config {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Config::default();
        let mut section: Option<String> = None;
        for (idx, raw_line) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw_line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| ConfigError::Syntax {
                    line,
                    message: format!("malformed section header '{content}'"),
                })?;
                let name = name.trim();
                if !matches!(name, "grid" | "physics" | "time" | "initial" | "output") {
                    return Err(ConfigError::UnknownSection {
                        line,
                        section: name.to_string(),
                    });
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                message: format!("expected 'key = value', found '{content}'"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError::Syntax {
                    line,
                    message: format!("empty key or value in '{content}'"),
                });
            }
            let sec = section.as_deref().ok_or_else(|| ConfigError::Syntax {
                line,
                message: format!("key '{key}' appears before any [section]"),
            })?;
            cfg.set(sec, key, value, line)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, section: &str, key: &str, value: &str, line: usize) -> Result<(), ConfigError> {
        macro_rules! put {
            ($field:expr) => {
                $field = parse_value(line, key, value)?
            };
        }
        match (section, key) {
            ("grid", "nx") => put!(self.grid.nx),
            ("grid", "ny") => put!(self.grid.ny),
            ("grid", "lx") => put!(self.grid.lx),
            ("grid", "ly") => put!(self.grid.ly),
            ("physics", "epsilon") => put!(self.physics.epsilon),
            ("physics", "beta") => put!(self.physics.beta),
            ("physics", "delta") => put!(self.physics.delta),
            ("physics", "nu0") => put!(self.physics.nu0),
            ("physics", "nu1") => put!(self.physics.nu1),
            ("physics", "stab") => put!(self.physics.stab),
            ("time", "dt") => put!(self.time.dt),
            ("time", "t_final") => put!(self.time.t_final),
            ("time", "cfl") => put!(self.time.cfl),
            ("initial", "scenario") => {
                self.initial.scenario = value.parse().map_err(|e: CoreError| ConfigError::Syntax {
                    line,
                    message: e.to_string(),
                })?
            }
            ("initial", "m0") => put!(self.initial.m0),
            ("initial", "amplitude") => put!(self.initial.amplitude),
            ("initial", "theta0") => put!(self.initial.theta0),
            ("initial", "seed") => put!(self.initial.seed),
            ("initial", "radius") => put!(self.initial.radius),
            ("output", "dir") => self.output.dir = PathBuf::from(value),
            ("output", "snap_every") => put!(self.output.snap_every),
            ("output", "diag_file") => self.output.diag_file = value.to_string(),
            _ => {
                return Err(ConfigError::UnknownKey {
                    line,
                    section: section.to_string(),
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    /// Checks every numeric constraint, including the admissible exponents.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Constraint(m));
        self.params()
            .validate()
            .map_err(|e| ConfigError::Constraint(e.to_string()))?;
        if let Err(e) = Grid::new(self.grid.nx, self.grid.ny, self.grid.lx, self.grid.ly) {
            return bad(e.to_string());
        }
        if !(self.time.dt > 0.0 && self.time.dt.is_finite()) {
            return bad(format!("dt = {} must be positive", self.time.dt));
        }
        if !(self.time.t_final >= 0.0 && self.time.t_final.is_finite()) {
            return bad(format!("t_final = {} must be nonnegative", self.time.t_final));
        }
        if !(self.time.cfl > 0.0 && self.time.cfl.is_finite()) {
            return bad(format!("cfl = {} must be positive", self.time.cfl));
        }
        if !(self.initial.theta0 > 0.0 && self.initial.theta0.is_finite()) {
            return bad(format!("theta0 = {} must be positive", self.initial.theta0));
        }
        for (name, v) in [
            ("m0", self.initial.m0),
            ("amplitude", self.initial.amplitude),
            ("radius", self.initial.radius),
        ] {
            if !v.is_finite() {
                return bad(format!("{name} = {v} is not finite"));
            }
        }
        if self.initial.amplitude < 0.0 || self.initial.radius < 0.0 {
            return bad("amplitude and radius must be nonnegative".into());
        }
        if self.output.snap_every == 0 {
            return bad("snap_every must be at least 1".into());
        }
        Ok(())
    }

    pub fn params(&self) -> Params {
        Params {
            epsilon: self.physics.epsilon,
            beta: self.physics.beta,
            delta: self.physics.delta,
            nu0: self.physics.nu0,
            nu1: self.physics.nu1,
            stab: self.physics.stab,
            ..Params::default()
        }
    }

    pub fn build_grid(&self) -> crate::error::Result<Grid> {
        Grid::new(self.grid.nx, self.grid.ny, self.grid.lx, self.grid.ly)
    }

    /// Canonical text form; parses back to an equal `Config`.
    pub fn to_text(&self) -> String {
        let c = self;
        format!(
            "[grid]\nnx = {}\nny = {}\nlx = {:?}\nly = {:?}\n\n\
             [physics]\nepsilon = {:?}\nbeta = {:?}\ndelta = {:?}\nnu0 = {:?}\nnu1 = {:?}\nstab = {:?}\n\n\
             [time]\ndt = {:?}\nt_final = {:?}\ncfl = {:?}\n\n\
             [initial]\nscenario = {}\nm0 = {:?}\namplitude = {:?}\ntheta0 = {:?}\nseed = {}\nradius = {:?}\n\n\
             [output]\ndir = {}\nsnap_every = {}\ndiag_file = {}\n",
            c.grid.nx,
            c.grid.ny,
            c.grid.lx,
            c.grid.ly,
            c.physics.epsilon,
            c.physics.beta,
            c.physics.delta,
            c.physics.nu0,
            c.physics.nu1,
            c.physics.stab,
            c.time.dt,
            c.time.t_final,
            c.time.cfl,
            c.initial.scenario,
            c.initial.m0,
            c.initial.amplitude,
            c.initial.theta0,
            c.initial.seed,
            c.initial.radius,
            c.output.dir.display(),
            c.output.snap_every,
            c.output.diag_file,
        )
    }

    /// SHA-256 of everything that affects the computed trajectory.
    pub fn fingerprint(&self) -> String {
        let mut physics_only = self.clone();
        physics_only.output = Config::default().output;
        let digest = Sha256::digest(physics_only.to_text().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
