//! The JSON run configuration.

use std::path::{Path, PathBuf};

use bapkit::polyhedral::Combine;
use bapkit::ScalarMode;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Vogt,
    Pelczynski,
    Normability,
}

impl Suite {
    pub const ALL: [Suite; 3] = [Suite::Vogt, Suite::Pelczynski, Suite::Normability];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Vogt => "vogt",
            Suite::Pelczynski => "pelczynski",
            Suite::Normability => "normability",
        }
    }

    /// `all` expands to every suite.
    pub fn parse_selection(name: &str) -> Result<Vec<Suite>, CliError> {
        match name {
            "all" => Ok(Suite::ALL.to_vec()),
            "vogt" => Ok(vec![Suite::Vogt]),
            "pelczynski" => Ok(vec![Suite::Pelczynski]),
            "normability" => Ok(vec![Suite::Normability]),
            other => Err(CliError::Config(format!("unknown suite {other:?}"))),
        }
    }
}

/// `"dyadic"` or an inline table `rho[μ-1][ν-1]` of exact scalars.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RhoSpec {
    Formula(String),
    Table(Vec<Vec<Value>>),
}

impl Default for RhoSpec {
    fn default() -> Self {
        RhoSpec::Formula("dyadic".into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VogtConfig {
    pub rho: RhoSpec,
    #[serde(rename = "box")]
    pub bx: [usize; 3],
    pub levels: usize,
    pub p0: usize,
    pub q: usize,
    pub length: usize,
    pub nuclearity_levels: Vec<usize>,
    pub positivity_box: [usize; 3],
    pub positivity_levels: usize,
    pub comparison_samples: usize,
}

impl Default for VogtConfig {
    fn default() -> Self {
        VogtConfig {
            rho: RhoSpec::default(),
            bx: [20, 6, 6],
            levels: 4,
            p0: 1,
            q: 3,
            length: 20,
            nuclearity_levels: vec![1, 2],
            positivity_box: [3, 3, 3],
            positivity_levels: 4,
            comparison_samples: 1000,
        }
    }
}

/// A construction instance: a built-in name or a Köthe system with an explicit family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceSpec {
    /// `identity`, `telescoped` or `random`.
    Named(String),
    Koethe(KoetheInstance),
    File { file: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KoetheInstance {
    pub name: String,
    pub combine: Combine,
    /// `weights[k-1][i]`.
    pub weights: Vec<Vec<Value>>,
    /// One square matrix per operator, as rows.
    pub family: Vec<Vec<Vec<Value>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PelczynskiConfig {
    pub instances: Vec<InstanceSpec>,
    pub samples: usize,
    pub coefficient_lists: usize,
    pub random_dim: usize,
    pub random_levels: usize,
    pub telescoped_dim: usize,
}

impl Default for PelczynskiConfig {
    fn default() -> Self {
        PelczynskiConfig {
            instances: ["identity", "telescoped", "random"]
                .iter()
                .map(|s| InstanceSpec::Named((*s).into()))
                .collect(),
            samples: 500,
            coefficient_lists: 200,
            random_dim: 6,
            random_levels: 3,
            telescoped_dim: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormabilityConfig {
    /// Vogt evidence uses the `vogt` section's instance; these are the `j` values tried for `k0 = 1`, `k = 2`.
    pub vogt_j: Vec<usize>,
    pub prefix_dim: usize,
    pub families: usize,
    pub family_length: usize,
}

impl Default for NormabilityConfig {
    fn default() -> Self {
        NormabilityConfig {
            vogt_j: vec![3, 4, 5],
            prefix_dim: 4,
            families: 100,
            family_length: 12,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    pub decay: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            decay: bapkit::normability::DEFAULT_DECAY_TOLERANCE,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default = "default_mode")]
    pub mode: ScalarMode,
    #[serde(default = "default_suites")]
    pub suites: Vec<String>,
    #[serde(default)]
    pub vogt: VogtConfig,
    #[serde(default)]
    pub pelczynski: PelczynskiConfig,
    #[serde(default)]
    pub normability: NormabilityConfig,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
    /// Where the certificate goes; not recorded in it.
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
}

fn default_mode() -> ScalarMode {
    ScalarMode::Rational
}

fn default_suites() -> Vec<String> {
    vec!["all".into()]
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: None,
            mode: default_mode(),
            suites: default_suites(),
            vogt: VogtConfig::default(),
            pelczynski: PelczynskiConfig::default(),
            normability: NormabilityConfig::default(),
            tolerances: ToleranceConfig::default(),
            out: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| {
            CliError::Config(format!(
                "{}: {e} (byte offset {})",
                path.display(),
                crate::error_offset(&text, &e)
            ))
        })
    }

    /// The selected suites in canonical order, without duplicates.
    pub fn selected(&self) -> Result<Vec<Suite>, CliError> {
        let mut out = Vec::new();
        for name in &self.suites {
            out.extend(Suite::parse_selection(name)?);
        }
        out.sort();
        out.dedup();
        if out.is_empty() {
            return Err(CliError::Config("no suite selected".into()));
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: &str| Err(CliError::Config(msg.into()));
        if self.seed.is_none() {
            return bad("a seed is required (config \"seed\" or --seed)");
        }
        self.selected()?;
        if !(self.tolerances.decay > 0.0 && self.tolerances.decay.is_finite()) {
            return bad("tolerances must be positive");
        }
        let v = &self.vogt;
        if v.bx.contains(&0) || v.positivity_box.contains(&0) {
            return bad("box dimensions must be at least 1");
        }
        if v.levels == 0 || v.positivity_levels == 0 || v.length == 0 {
            return bad("levels and witness length must be at least 1");
        }
        if let RhoSpec::Formula(name) = &v.rho {
            if name != "dyadic" {
                return Err(CliError::Config(format!("unknown rho formula {name:?}")));
            }
        }
        let p = &self.pelczynski;
        if p.instances.is_empty() {
            return bad("no construction instance given");
        }
        if p.random_dim == 0 || p.random_dim > 12 || p.random_levels == 0 || p.telescoped_dim == 0 {
            return bad("random_dim must be in 1..=12 and levels at least 1");
        }
        let n = &self.normability;
        if n.prefix_dim < 2 || n.family_length == 0 {
            return bad("prefix_dim must be at least 2 and family_length at least 1");
        }
        Ok(())
    }
}
