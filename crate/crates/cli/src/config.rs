//! Experiment configuration: TOML with one table per section, unknown keys
//! rejected.
//!
//! ```toml
//! [lattice]
//! num_steps = 10
//! horizon = 1.0
//! layout = "path"          # or "recombining"
//!
//! [driver]
//! kind = "quadratic"
//! gamma = 1.0
//!
//! [constraint]
//! kind = "z_band"
//! k = 1.0
//!
//! [claim]
//! kind = "tanh"
//! a = 1.0
//! b = 1.0
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use gbsde_core::{Claim, Constraint, Driver, DriverFlags, Lattice, Layout, SolverConfig};
use serde::{Deserialize, Serialize};

use crate::csvio::read_claim_table;

/// Invalid or inconsistent configuration (exit code 2).
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

type Res<T> = std::result::Result<T, ConfigError>;

fn bad<T>(msg: impl Into<String>) -> Res<T> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub lattice: LatticeConfig,
    pub driver: DriverConfig,
    /// Second agent for `transfer`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub driver2: Option<DriverConfig>,
    #[serde(default)]
    pub constraint: ConstraintConfig,
    pub claim: ClaimConfig,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transfer: Option<TransferConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub export: Option<ExportConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayoutKind {
    #[default]
    Path,
    Recombining,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub num_steps: usize,
    #[serde(default = "one")]
    pub horizon: f64,
    #[serde(default)]
    pub layout: LayoutKind,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriverKind {
    Zero,
    Linear,
    Abs,
    Quadratic,
}

/// A built-in coefficient, optionally dilated by `dilate`. The three flag
/// keys override the declared structure (used to exercise `verify`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriverConfig {
    pub kind: DriverKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dilate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convex: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subadditive: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub positively_homogeneous: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    #[default]
    None,
    ZBand,
    ZFloor,
    ZSign,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintConfig {
    #[serde(default)]
    pub kind: ConstraintKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimKind {
    /// `scale * W_T + shift`
    Brownian,
    /// `a * tanh(b * W_T) + shift`
    Tanh,
    /// `max(W_T - strike, 0)`
    Call,
    Constant,
    /// Terminal values listed inline, in node order.
    Values,
    /// Terminal layer of a node table written by `solve --csv`.
    Table,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClaimConfig {
    pub kind: ClaimKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strike: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    /// Relative paths resolve against the config file's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub tol: f64,
    pub m0: f64,
    pub m_cap: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let c = SolverConfig::default();
        Self { tol: c.tol, m0: c.m0, m_cap: c.m_cap }
    }
}

impl SolverSection {
    pub fn build(&self) -> Res<SolverConfig> {
        let c = SolverConfig { tol: self.tol, m0: self.m0, m_cap: self.m_cap };
        c.validate().map_err(|e| ConfigError(format!("solver: {e}")))?;
        Ok(c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransferMode {
    #[default]
    Sweep,
    Construct,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransferConfig {
    #[serde(default)]
    pub mode: TransferMode,
    #[serde(default = "default_alpha_step")]
    pub alpha_step: f64,
}

fn default_alpha_step() -> f64 {
    0.01
}

impl Default for TransferConfig {
    fn default() -> Self {
        Self { mode: TransferMode::Sweep, alpha_step: default_alpha_step() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn default_samples() -> usize {
    8
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { samples: default_samples(), seed: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExportConfig {
    /// Steps written to the node table; all steps when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<Vec<usize>>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Res<Self> {
        toml::from_str(text).map_err(|e| ConfigError(e.message().to_string()))
    }

    /// Read and parse a config file; a relative `claim.path` is resolved
    /// against the file's directory.
    pub fn from_path(path: &Path) -> Res<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))?;
        if let Some(p) = &cfg.claim.path {
            if p.is_relative() {
                let base = path.parent().unwrap_or_else(|| Path::new("."));
                cfg.claim.path = Some(base.join(p));
            }
        }
        Ok(cfg)
    }

    pub fn build_lattice(&self) -> Res<Lattice> {
        let layout = match self.lattice.layout {
            LayoutKind::Path => Layout::PathTree,
            LayoutKind::Recombining => Layout::Recombining,
        };
        Lattice::new(self.lattice.num_steps, self.lattice.horizon, layout)
            .map_err(|e| ConfigError(format!("lattice: {e}")))
    }

    pub fn second_driver(&self) -> Res<Driver> {
        match &self.driver2 {
            Some(d) => d.build("driver2"),
            None => bad("transfer needs a [driver2] section"),
        }
    }

    pub fn transfer(&self) -> TransferConfig {
        self.transfer.unwrap_or_default()
    }

    pub fn verify(&self) -> VerifyConfig {
        self.verify.unwrap_or_default()
    }

    /// Steps to export, validated against the lattice.
    pub fn export_steps(&self) -> Res<Vec<usize>> {
        let n = self.lattice.num_steps;
        match self.export.as_ref().and_then(|e| e.steps.clone()) {
            None => Ok((0..=n).collect()),
            Some(mut steps) => {
                steps.sort_unstable();
                steps.dedup();
                if let Some(s) = steps.iter().find(|&&s| s > n) {
                    return bad(format!("export.steps: step {s} outside 0..={n}"));
                }
                Ok(steps)
            }
        }
    }
}

/// Reject parameters that the chosen kind does not use.
fn only(section: &str, kind: &str, present: &[(&str, bool)], allowed: &[&str]) -> Res<()> {
    for (name, set) in present {
        if *set && !allowed.contains(name) {
            return bad(format!("{section}.{name} is not used by kind = \"{kind}\""));
        }
    }
    Ok(())
}

fn need(section: &str, name: &str, v: Option<f64>) -> Res<f64> {
    match v {
        Some(x) if x.is_finite() => Ok(x),
        Some(x) => bad(format!("{section}.{name} must be finite, got {x}")),
        None => bad(format!("{section}.{name} is required")),
    }
}

impl DriverConfig {
    pub fn build(&self, section: &str) -> Res<Driver> {
        let present = [("mu", self.mu.is_some()), ("gamma", self.gamma.is_some())];
        let core = |r: gbsde_core::Result<Driver>| r.map_err(|e| ConfigError(format!("{section}: {e}")));
        let base = match self.kind {
            DriverKind::Zero => {
                only(section, "zero", &present, &[])?;
                Driver::zero()
            }
            DriverKind::Linear => {
                only(section, "linear", &present, &["mu"])?;
                core(Driver::linear(need(section, "mu", self.mu)?))?
            }
            DriverKind::Abs => {
                only(section, "abs", &present, &["mu"])?;
                core(Driver::abs(need(section, "mu", self.mu)?))?
            }
            DriverKind::Quadratic => {
                only(section, "quadratic", &present, &["gamma"])?;
                core(Driver::quadratic(need(section, "gamma", self.gamma)?))?
            }
        };
        let mut g = match self.dilate {
            Some(lam) => core(base.dilate(lam))?,
            None => base,
        };
        if self.convex.is_some() || self.subadditive.is_some() || self.positively_homogeneous.is_some() {
            let f = g.flags();
            g = g.with_flags(DriverFlags {
                convex: self.convex.unwrap_or(f.convex),
                subadditive: self.subadditive.unwrap_or(f.subadditive),
                positively_homogeneous: self.positively_homogeneous.unwrap_or(f.positively_homogeneous),
            });
        }
        Ok(g)
    }
}

impl ConstraintConfig {
    pub fn build(&self) -> Res<Constraint> {
        let core = |r: gbsde_core::Result<Constraint>| r.map_err(|e| ConfigError(format!("constraint: {e}")));
        match self.kind {
            ConstraintKind::None | ConstraintKind::ZSign if self.k.is_some() => {
                bad("constraint.k is only used by z_band and z_floor")
            }
            ConstraintKind::None => Ok(Constraint::none()),
            ConstraintKind::ZSign => Ok(Constraint::z_sign()),
            ConstraintKind::ZBand => core(Constraint::z_band(need("constraint", "k", self.k)?)),
            ConstraintKind::ZFloor => core(Constraint::z_floor(need("constraint", "k", self.k)?)),
        }
    }
}

impl ClaimConfig {
    pub fn build(&self, lattice: &Lattice) -> Res<Claim> {
        let present = [
            ("scale", self.scale.is_some()),
            ("shift", self.shift.is_some()),
            ("a", self.a.is_some()),
            ("b", self.b.is_some()),
            ("strike", self.strike.is_some()),
            ("value", self.value.is_some()),
            ("values", self.values.is_some()),
            ("path", self.path.is_some()),
        ];
        let opt = |v: Option<f64>, name: &str, default: f64| match v {
            None => Ok(default),
            some => need("claim", name, some),
        };
        let core = |r: gbsde_core::Result<Claim>| r.map_err(|e| ConfigError(format!("claim: {e}")));
        match self.kind {
            ClaimKind::Brownian => {
                only("claim", "brownian", &present, &["scale", "shift"])?;
                let (s, c) = (opt(self.scale, "scale", 1.0)?, opt(self.shift, "shift", 0.0)?);
                core(Claim::from_terminal_w(lattice, |w| s * w + c))
            }
            ClaimKind::Tanh => {
                only("claim", "tanh", &present, &["a", "b", "shift"])?;
                let (a, b) = (opt(self.a, "a", 1.0)?, opt(self.b, "b", 1.0)?);
                let c = opt(self.shift, "shift", 0.0)?;
                core(Claim::from_terminal_w(lattice, |w| a * (b * w).tanh() + c))
            }
            ClaimKind::Call => {
                only("claim", "call", &present, &["strike"])?;
                let k = opt(self.strike, "strike", 0.0)?;
                core(Claim::from_terminal_w(lattice, |w| (w - k).max(0.0)))
            }
            ClaimKind::Constant => {
                only("claim", "constant", &present, &["value"])?;
                core(Claim::constant(lattice, need("claim", "value", self.value)?))
            }
            ClaimKind::Values => {
                only("claim", "values", &present, &["values"])?;
                let values = self.values.clone().unwrap_or_default();
                core(Claim::from_values(lattice, values))
            }
            ClaimKind::Table => {
                only("claim", "table", &present, &["path"])?;
                let Some(path) = &self.path else {
                    return bad("claim.path is required for kind = \"table\"");
                };
                let values = read_claim_table(path, lattice)
                    .map_err(|e| ConfigError(format!("claim table {}: {e:#}", path.display())))?;
                core(Claim::from_values(lattice, values))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"
        [lattice]
        num_steps = 4

        [driver]
        kind = "abs"
        mu = 0.5

        [claim]
        kind = "brownian"
    "#;

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = ExperimentConfig::parse(BASE).unwrap();
        assert_eq!(cfg.lattice.horizon, 1.0);
        assert_eq!(cfg.lattice.layout, LayoutKind::Path);
        assert_eq!(cfg.constraint.kind, ConstraintKind::None);
        assert_eq!(cfg.solver.build().unwrap(), SolverConfig::default());
        assert_eq!(cfg.export_steps().unwrap(), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn dotted_keys_are_accepted() {
        let text = "lattice.num_steps = 3\ndriver.kind = \"zero\"\nclaim.kind = \"constant\"\nclaim.value = 2.0\n";
        let cfg = ExperimentConfig::parse(text).unwrap();
        let l = cfg.build_lattice().unwrap();
        assert_eq!(cfg.claim.build(&l).unwrap().values(), &[2.0; 8]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = ExperimentConfig::parse(&format!("{BASE}\n[solver]\ntolerance = 1e-6\n")).unwrap_err();
        assert!(err.0.contains("tolerance"), "{err}");
        let err = ExperimentConfig::parse(&BASE.replace("mu = 0.5", "mu = 0.5\nsigma = 1")).unwrap_err();
        assert!(err.0.contains("sigma"), "{err}");
    }

    #[test]
    fn parameters_must_match_the_kind() {
        let cfg = ExperimentConfig::parse(&BASE.replace("mu = 0.5", "gamma = 1.0")).unwrap();
        assert!(cfg.driver.build("driver").is_err());
        let cfg = ExperimentConfig::parse(&BASE.replace("mu = 0.5", "")).unwrap();
        assert!(cfg.driver.build("driver").unwrap_err().0.contains("driver.mu"));
    }

    #[test]
    fn flag_overrides_apply_after_dilation() {
        let text = BASE.replace("kind = \"abs\"\n        mu = 0.5", "kind = \"quadratic\"\ngamma = 1.0\ndilate = 2.0\npositively_homogeneous = true");
        let cfg = ExperimentConfig::parse(&text).unwrap();
        let g = cfg.driver.build("driver").unwrap();
        assert!(g.flags().positively_homogeneous);
        assert!(g.flags().convex);
        assert_eq!(g.eval(0.0, 2.0), 1.0);
    }

    #[test]
    fn oversized_path_tree_is_a_config_error() {
        let cfg = ExperimentConfig::parse(&BASE.replace("num_steps = 4", "num_steps = 64")).unwrap();
        assert!(cfg.build_lattice().is_err());
        let text = BASE.replace("num_steps = 4", "num_steps = 64\nlayout = \"recombining\"");
        let cfg = ExperimentConfig::parse(&text).unwrap();
        assert_eq!(cfg.build_lattice().unwrap().terminal_len(), 65);
    }
}
