use std::collections::BTreeMap;

use serde::Serialize;

use crate::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Converged,
    NonConverged,
    Diverged,
    HypothesisViolation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CommandKind {
    Solve,
    Transfer,
    Verify,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyLine {
    pub name: String,
    pub max_violation: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
    pub passed: bool,
}

/// Summary of one run, printed as JSON on stdout. Everything except
/// `wall_time_s` is a deterministic function of the config and seed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRecord {
    pub command: CommandKind,
    pub status: Status,
    pub config: ExperimentConfig,
    pub outputs: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub properties: Vec<PropertyLine>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub failures: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
    pub wall_time_s: f64,
}

impl ResultRecord {
    pub fn new(command: CommandKind, config: &ExperimentConfig) -> Self {
        Self {
            command,
            status: Status::Converged,
            config: config.clone(),
            outputs: BTreeMap::new(),
            properties: Vec::new(),
            failures: Vec::new(),
            diagnostics: Vec::new(),
            wall_time_s: 0.0,
        }
    }

    pub fn set(&mut self, key: &str, value: f64) {
        self.outputs.insert(key.to_string(), value);
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.outputs.get(key).copied()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("record serializes")
    }

    /// Short human-readable report.
    pub fn summary(&self) -> String {
        let mut out = format!("{:?}: {:?}", self.command, self.status).to_lowercase();
        for (k, v) in &self.outputs {
            out.push_str(&format!("\n  {k:<22} {v:.10e}"));
        }
        for p in &self.properties {
            let verdict = match (&p.skipped, p.passed) {
                (Some(why), _) => format!("skipped ({why})"),
                (None, true) => "ok".to_string(),
                (None, false) => "FAILED".to_string(),
            };
            out.push_str(&format!(
                "\n  {:<32} {:.3e} <= {:.1e}  {verdict}",
                p.name, p.max_violation, p.tolerance
            ));
        }
        for d in &self.diagnostics {
            out.push_str(&format!("\n  note: {d}"));
        }
        out.push_str(&format!("\n  wall time {:.3}s", self.wall_time_s));
        out
    }
}
