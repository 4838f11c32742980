//! TOML run configuration.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use trcomm::schemes::{BetaRule, SchemeConfig, SchemeKind};
use trcomm::SceneSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scene: SceneSpec,
    pub scheme: SchemeSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSection {
    pub scheme: SchemeKind,
    /// Fixed step size; exact line search when absent.
    #[serde(default)]
    pub beta: Option<f64>,
    /// Regularization weight; `1e-2 ||A||^2` when absent.
    #[serde(default)]
    pub lambda: Option<f64>,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub user_weights: Option<Vec<f64>>,
}

fn default_max_iter() -> usize {
    50
}

fn default_tol() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    /// Used when `--out` is not given.
    #[serde(default)]
    pub dir: Option<PathBuf>,
    #[serde(default = "yes")]
    pub trace_csv: bool,
    #[serde(default = "yes")]
    pub signals: bool,
    /// Write every k-th field frame of the final emission; 0 disables.
    #[serde(default)]
    pub snapshot_every: usize,
}

fn yes() -> bool {
    true
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: None, trace_csv: true, signals: true, snapshot_every: 0 }
    }
}

impl SchemeSection {
    pub fn to_config(&self) -> SchemeConfig<f64> {
        SchemeConfig {
            scheme: self.scheme,
            beta_rule: self.beta.map_or(BetaRule::ExactLineSearch, BetaRule::Fixed),
            lambda: self.lambda,
            max_iter: self.max_iter,
            tol: self.tol,
            user_weights: self.user_weights.clone(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        toml::from_str(text).map_err(|e| anyhow::anyhow!("config parse error: {e}"))
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[scene]
physics = "acoustic"
seed = 1
pilot = { kind = "ricker", f0 = 1.0 }
grid = { nx = 20, ny = 20, dx = 0.1, nt = 50 }
medium = { kind = "homogeneous", c = 1.0 }
base = { kind = "points", positions = [[4, 10]] }
users = { kind = "points", positions = [[15, 10]] }

[scheme]
scheme = "min_norm_reg"
lambda = 0.5
"#;

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::parse(MINIMAL).unwrap();
        assert_eq!(c.scheme.max_iter, 50);
        assert!(c.output.trace_csv && c.output.signals);
        let sc = c.scheme.to_config();
        assert_eq!(sc.beta_rule, BetaRule::ExactLineSearch);
        assert_eq!(sc.lambda, Some(0.5));
    }

    #[test]
    fn unknown_key_is_named_with_its_line() {
        let bad = MINIMAL.replace("lambda = 0.5", "lambda = 0.5\nlamda = 0.1");
        let msg = RunConfig::parse(&bad).unwrap_err().to_string();
        assert!(msg.contains("lamda"), "{msg}");
        assert!(msg.contains("line 14"), "{msg}");
    }
}
