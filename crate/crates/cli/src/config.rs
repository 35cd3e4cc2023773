//! Run configuration: strict JSON with cross-field validation.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sh2d_core::evolve::{EvolutionConfig, Scheme};
use sh2d_core::groundstate::{GnConfig, SolverConfig};
use sh2d_core::pointop::PointOpParams;
use sh2d_core::potential::{Potential, PotentialSpec};
use sh2d_core::GridSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    #[serde(default)]
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_ref: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolution: Option<EvolutionSection>,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default)]
    pub gn: GnConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "L")]
    pub length: f64,
    #[serde(rename = "N")]
    pub cells: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub tol: f64,
    pub max_iter: usize,
    pub symmetrize_every: usize,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolverConfig::new(0.0);
        Self {
            tol: d.tol,
            max_iter: d.max_iter,
            symmetrize_every: d.symmetrize_every,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSection {
    pub theta: f64,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_final: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot_every: Option<usize>,
    #[serde(default)]
    pub initial: InitialDatum,
}

fn default_record_every() -> usize {
    10
}

impl EvolutionSection {
    pub fn to_core(&self) -> EvolutionConfig {
        EvolutionConfig {
            theta: self.theta,
            dt: self.dt,
            t_final: self.t_final,
            scheme: self.scheme,
            record_every: self.record_every,
            snapshot_every: self.snapshot_every,
        }
    }
}

/// Initial datum of an evolution run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialDatum {
    /// `amplitude·exp(−|x − center|²/(2·width²)) + singular·G/‖G‖` with `G`
    /// the Green function at `omega_ref`.
    Gaussian {
        #[serde(default = "one")]
        amplitude: f64,
        #[serde(default = "one")]
        width: f64,
        #[serde(default)]
        center: [f64; 2],
        #[serde(default)]
        singular: f64,
    },
    /// A binary snapshot; relative paths resolve against the config file.
    File { path: PathBuf },
    /// The `v` snapshot of a `groundstate` output directory, by default
    /// rescaled to the standing wave `Q = √Λ·v`.
    Groundstate {
        path: PathBuf,
        #[serde(default = "yes")]
        rescale: bool,
    },
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

impl Default for InitialDatum {
    fn default() -> Self {
        Self::Gaussian {
            amplitude: 1.0,
            width: 1.0,
            center: [0.0, 0.0],
            singular: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub trials: usize,
}

impl Default for VerifySection {
    fn default() -> Self {
        Self { trials: 100 }
    }
}

/// Configuration failure, pointing at a line of the source file when possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: PathBuf,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "{}:{}: {}", self.path.display(), l, self.message),
            None => write!(f, "{}: {}", self.path.display(), self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

/// Which sections a command needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Needs {
    pub lambda: bool,
    pub potential: bool,
    pub evolution: bool,
}

/// A parsed configuration together with its source text.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub path: PathBuf,
    pub text: String,
}

impl LoadedConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|e| ConfigError {
            path: path.to_path_buf(),
            line: None,
            message: format!("cannot read config: {e}"),
        })?;
        Self::parse(path, text)
    }

    pub fn parse(path: &Path, text: String) -> Result<Self, ConfigError> {
        let config = serde_json::from_str(&text).map_err(|e| ConfigError {
            path: path.to_path_buf(),
            line: Some(e.line()),
            message: strip_position(&e.to_string()),
        })?;
        Ok(Self {
            config,
            path: path.to_path_buf(),
            text,
        })
    }

    fn error(&self, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError {
            path: self.path.clone(),
            line: key_line(&self.text, key),
            message: message.into(),
        }
    }

    /// Resolves a path from the config relative to the config file.
    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.path.parent().unwrap_or(Path::new(".")).join(p)
        }
    }

    /// Cross-field validation, run before any compute.
    pub fn validate(&self, needs: Needs) -> Result<Validated, ConfigError> {
        let c = &self.config;
        let g = c.grid;
        if !(g.length > 0.0 && g.length.is_finite()) {
            return Err(self.error("L", "L must be positive"));
        }
        if g.cells < 16 || g.cells % 2 != 0 {
            return Err(self.error("N", "N must be even and >= 16"));
        }
        let spec = GridSpec::new(g.length, g.cells).map_err(|e| self.error("grid", e.to_string()))?;
        if !c.alpha.is_finite() {
            return Err(self.error("alpha", "alpha must be finite"));
        }
        let params = match c.omega_ref {
            Some(w) => PointOpParams::with_omega_ref(c.alpha, w).map_err(|e| self.error("omega_ref", e.to_string()))?,
            None => PointOpParams::new(c.alpha).map_err(|e| self.error("alpha", e.to_string()))?,
        };
        let e_alpha = params.e_alpha();
        let lambda = match (c.lambda, needs.lambda) {
            (Some(l), _) => {
                if !(l > e_alpha.abs()) {
                    return Err(self.error(
                        "lambda",
                        format!("lambda must exceed |e_alpha| (lambda = {l}, |e_alpha| = {})", e_alpha.abs()),
                    ));
                }
                Some(l)
            }
            (None, true) => return Err(self.error("lambda", "missing field `lambda`")),
            (None, false) => None,
        };
        let potential = match (&c.potential, needs.potential) {
            (Some(p), _) => Some(p.build(spec).map_err(|e| self.error("potential", e.to_string()))?),
            (None, true) => return Err(self.error("potential", "missing field `potential`")),
            (None, false) => None,
        };
        let s = c.solver;
        if !(s.tol > 0.0) || s.max_iter == 0 || s.symmetrize_every == 0 {
            return Err(self.error(
                "solver",
                "solver needs tol > 0, max_iter >= 1 and symmetrize_every >= 1",
            ));
        }
        if !(c.gn.tol > 0.0) || c.gn.max_iter == 0 || c.gn.symmetrize_every == 0 {
            return Err(self.error("gn", "gn needs tol > 0, max_iter >= 1 and symmetrize_every >= 1"));
        }
        if c.verify.trials == 0 {
            return Err(self.error("trials", "verify.trials must be >= 1"));
        }
        let evolution = match (&c.evolution, needs.evolution) {
            (Some(ev), _) => {
                if ev.theta != 1.0 && ev.theta != -1.0 {
                    return Err(self.error("theta", "theta must be +1 or -1"));
                }
                if !(ev.dt > 0.0 && ev.dt <= ev.t_final && ev.t_final.is_finite()) {
                    return Err(self.error("dt", "dt must lie in (0, T]"));
                }
                let core = ev.to_core();
                core.validate().map_err(|e| self.error("evolution", e.to_string()))?;
                Some(core)
            }
            (None, true) => return Err(self.error("evolution", "missing field `evolution`")),
            (None, false) => None,
        };
        Ok(Validated {
            spec,
            params,
            lambda,
            potential,
            evolution,
        })
    }
}

/// Validated, built inputs.
#[derive(Debug)]
pub struct Validated {
    pub spec: GridSpec,
    pub params: PointOpParams,
    pub lambda: Option<f64>,
    pub potential: Option<Potential>,
    pub evolution: Option<EvolutionConfig>,
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(i) => msg[..i].to_string(),
        None => msg.to_string(),
    }
}

/// 1-based line of the first occurrence of `"key"` as an object key.
fn key_line(text: &str, key: &str) -> Option<usize> {
    let needle = format!("\"{key}\"");
    text.lines().position(|l| l.contains(&needle)).map(|i| i + 1)
}
