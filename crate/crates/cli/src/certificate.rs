//! The certificate document written by `run` and read by `explain`.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::RunConfig;

pub const SCHEMA: &str = "bapkit-certificate/1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub id: String,
    pub statement: String,
    pub passed: bool,
    pub observed: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin: Option<String>,
}

impl Check {
    pub fn new(id: impl Into<String>, statement: impl Into<String>, passed: bool, observed: impl Into<String>) -> Self {
        Check {
            id: id.into(),
            statement: statement.into(),
            passed,
            observed: observed.into(),
            margin: None,
        }
    }

    pub fn with_margin(mut self, margin: impl ToString) -> Self {
        self.margin = Some(margin.to_string());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    #[serde(default)]
    pub data: Value,
}

impl SuiteResult {
    pub fn new(name: &str, checks: Vec<Check>, data: Value) -> Self {
        SuiteResult {
            name: name.into(),
            passed: checks.iter().all(|c| c.passed),
            checks,
            data,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateDocument {
    pub schema: String,
    pub toolkit_version: String,
    /// Seconds since the Unix epoch; the only field that differs between identical runs.
    pub timestamp: u64,
    pub config: RunConfig,
    pub suites: Vec<SuiteResult>,
    pub verdict: Verdict,
}

impl CertificateDocument {
    pub fn new(config: RunConfig, suites: Vec<SuiteResult>) -> Self {
        let verdict = if suites.iter().all(|s| s.passed) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        CertificateDocument {
            schema: SCHEMA.into(),
            toolkit_version: env!("CARGO_PKG_VERSION").into(),
            timestamp,
            config,
            suites,
            verdict,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn check(&self, id: &str) -> Option<&Check> {
        self.suites.iter().flat_map(|s| &s.checks).find(|c| c.id == id)
    }

    pub fn to_pretty_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}
