//! Run configuration: a TOML file with sections, overridden by flags.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use lacuna::regularity::{SweepCase, SweepPlan, DEFAULT_SPECS};
use lacuna::separation::SeminormSpec;
use lacuna::Mode;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid setting {key}: {reason}")]
    Invalid { key: String, reason: String },
}

/// `"auto"` or an explicit base.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QSetting {
    Explicit(u32),
    Named(AutoQ),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoQ {
    Auto,
}

impl Default for QSetting {
    fn default() -> Self {
        QSetting::Named(AutoQ::Auto)
    }
}

impl std::str::FromStr for QSetting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(QSetting::Named(AutoQ::Auto));
        }
        s.parse().map(QSetting::Explicit).map_err(|_| format!("expected 'auto' or an integer, got {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BcSetting {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RhsSetting {
    /// `g = 1`.
    One,
    /// Harmonic quadratic with zero mean on the mesh.
    Harmonic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamsSection {
    pub q: QSetting,
    pub mode: Mode,
    pub terms: usize,
}

impl Default for ParamsSection {
    fn default() -> Self {
        ParamsSection {
            q: QSetting::default(),
            mode: Mode::Strict,
            terms: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeshSection {
    pub n_theta: usize,
    /// Defaults to `n_theta / 8`.
    pub n_r: Option<usize>,
    /// Points for the series and boundary samples.
    pub samples: u64,
}

impl Default for MeshSection {
    fn default() -> Self {
        MeshSection {
            n_theta: 256,
            n_r: None,
            samples: 1024,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveSection {
    pub bc: BcSetting,
    pub rhs: Option<RhsSetting>,
}

impl Default for SolveSection {
    fn default() -> Self {
        SolveSection {
            bc: BcSetting::Dirichlet,
            rhs: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub q: u32,
    pub mode: Mode,
    pub terms: Vec<usize>,
    pub n_theta: Vec<usize>,
    pub n_r_divisor: usize,
    pub specs: Vec<(f64, f64)>,
    pub grad_pair_budget: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        let plan = SweepPlan::default_plan();
        SweepSection {
            q: plan.q,
            mode: plan.mode,
            terms: vec![0, 1, 2],
            n_theta: vec![256, 512, 1024],
            n_r_divisor: 8,
            specs: DEFAULT_SPECS.to_vec(),
            grad_pair_budget: plan.grad_pair_budget,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub format: Format,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("lacuna-out"),
            format: Format::Csv,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub params: ParamsSection,
    pub mesh: MeshSection,
    pub solve: SolveSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |key: &str, reason: String| {
            Err(ConfigError::Invalid {
                key: key.into(),
                reason,
            })
        };
        if self.mesh.n_theta < 16 || self.mesh.n_theta % 8 != 0 {
            return bad("mesh.n_theta", format!("must be >= 16 and a multiple of 8, got {}", self.mesh.n_theta));
        }
        if self.mesh.samples < 16 {
            return bad("mesh.samples", "must be >= 16".into());
        }
        if self.sweep.terms.is_empty() || self.sweep.n_theta.is_empty() || self.sweep.specs.is_empty() {
            return bad("sweep", "terms, n_theta and specs must be nonempty".into());
        }
        if self.sweep.n_r_divisor == 0 {
            return bad("sweep.n_r_divisor", "must be >= 1".into());
        }
        Ok(())
    }

    pub fn n_r(&self) -> usize {
        self.mesh.n_r.unwrap_or(self.mesh.n_theta / 8).max(4)
    }

    pub fn sweep_plan(&self) -> SweepPlan {
        let s = &self.sweep;
        let mut terms = s.terms.clone();
        if !terms.contains(&0) {
            terms.insert(0, 0);
        }
        let mut cases = Vec::new();
        for &n_theta in &s.n_theta {
            for &m in &terms {
                cases.push(SweepCase {
                    m,
                    n_theta,
                    n_r: (n_theta / s.n_r_divisor).max(4),
                });
            }
        }
        SweepPlan {
            q: s.q,
            gamma: lacuna::lacunary::GAMMA_REFERENCE,
            mode: s.mode,
            cases,
            specs: s.specs.iter().map(|&(p, epsilon)| SeminormSpec { p, epsilon }).collect(),
            grad_pair_budget: s.grad_pair_budget,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_gives_defaults() {
        let c = RunConfig::parse("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.sweep_plan(), SweepPlan::default_plan());
    }

    #[test]
    fn sections_parse() {
        let c = RunConfig::parse(
            "[params]\nq = 7\nmode = \"demo\"\nterms = 3\n[mesh]\nn_theta = 64\n[output]\nformat = \"json\"\n",
        )
        .unwrap();
        assert_eq!(c.params.q, QSetting::Explicit(7));
        assert_eq!(c.params.mode, Mode::Demo);
        assert_eq!(c.n_r(), 8);
        assert_eq!(c.output.format, Format::Json);
        let auto = RunConfig::parse("[params]\nq = \"auto\"\n").unwrap();
        assert_eq!(auto.params.q, QSetting::default());
    }

    #[test]
    fn malformed_configs_fail() {
        assert!(RunConfig::parse("[params]\nq = \"seven\"\n").is_err());
        assert!(RunConfig::parse("[mesh]\nn_theta = 20\n").is_err());
        assert!(RunConfig::parse("[nonsense]\n").is_err());
        assert!(RunConfig::parse("[sweep]\nterms = []\n").is_err());
    }
}
