//! Experiment configuration and output provenance.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ansatz::{default_driver, driver_with_field, AnsatzSpec, DriverTerm, ParamMode};
use crate::error::{Error, Result};
use crate::lattice::{BuiltinRhs, RhsSource};
use crate::rng::RNG_ALGORITHM;
use crate::vqa::{Backend, OptimizerOptions};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProblemConfig {
    pub d: usize,
    pub m: usize,
    /// `"x"`, `"one"`, `"sin_pi_x"` or explicit values of length `2^(d·m)`.
    pub rhs: RhsSource,
}

impl Default for ProblemConfig {
    fn default() -> Self {
        Self {
            d: 1,
            m: 2,
            rhs: RhsSource::Named(BuiltinRhs::X),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnsatzConfig {
    pub layers: usize,
    pub mode: ParamMode,
    /// Add a Z field on every qubit to the default driver.
    pub field: bool,
    /// Explicit driver terms; replaces the default ring when present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub driver: Option<Vec<DriverTerm>>,
    /// Explicit mixer qubits; all qubits when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mixer: Option<Vec<usize>>,
}

impl Default for AnsatzConfig {
    fn default() -> Self {
        Self {
            layers: 2,
            mode: ParamMode::PerTerm,
            field: true,
            driver: None,
            mixer: None,
        }
    }
}

impl AnsatzConfig {
    pub fn spec(&self, qubits: usize, layers: usize) -> Result<AnsatzSpec> {
        let driver = match &self.driver {
            Some(d) => d.clone(),
            None if self.field => driver_with_field(qubits),
            None => default_driver(qubits),
        };
        let spec = AnsatzSpec {
            qubits,
            layers,
            mode: self.mode,
            driver,
            mixer: self.mixer.clone().unwrap_or_else(|| (0..qubits).collect()),
        };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub m: Vec<usize>,
    pub p_min: usize,
    pub p_max: usize,
    pub fidelity_target: f64,
    /// Optional second target on the cost at `θ_opt`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost_target: Option<f64>,
    /// Add the previous depth's optimum, padded with a zero layer, as an
    /// extra start.
    pub warm_start: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            m: vec![2, 3, 4],
            p_min: 1,
            p_max: 30,
            fidelity_target: 0.99,
            cost_target: None,
            warm_start: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory for result files; not part of the config hash.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

/// Everything a `solve` or `sweep` run depends on.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub ansatz: AnsatzConfig,
    pub backend: Backend,
    /// Subtract sampling variance from the squared-overlap estimate.
    pub debias_overlap: bool,
    pub optimizer: OptimizerOptions,
    pub sweep: SweepConfig,
    pub seed: u64,
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| Error::input(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::input(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.problem.d == 0 || self.problem.m == 0 {
            return Err(Error::input("problem.d and problem.m must be at least 1"));
        }
        let t = self.sweep.fidelity_target;
        if !(t > 0.0 && t <= 1.0) {
            return Err(Error::input(format!("fidelity target {t} outside (0, 1]")));
        }
        if let Some(c) = self.sweep.cost_target {
            if !(c >= 0.0) {
                return Err(Error::input("cost target must be non-negative"));
            }
        }
        if self.sweep.m.is_empty() || self.sweep.m.contains(&0) {
            return Err(Error::input("sweep.m must list positive qubit counts"));
        }
        if self.sweep.p_min > self.sweep.p_max {
            return Err(Error::input("sweep.p_min exceeds sweep.p_max"));
        }
        if let Backend::Shots { shots: 0, .. } = self.backend {
            return Err(Error::input("shot count must be positive"));
        }
        self.optimizer.validate()
    }

    /// SHA-256 of the compact JSON form, output location excluded.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.output = OutputConfig::default();
        let json = serde_json::to_string(&c).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }
}

/// Header embedded in every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub rng: String,
}

impl Provenance {
    pub fn new(config_hash: String, seeds: Vec<u64>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash,
            seeds,
            rng: RNG_ALGORITHM.to_string(),
        }
    }

    /// `#`-prefixed comment lines for CSV files.
    pub fn csv_comment(&self) -> String {
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        format!(
            "# {} {}\n# config_hash={}\n# seeds={}\n# rng={}\n",
            self.tool,
            self.version,
            self.config_hash,
            seeds.join(" "),
            self.rng
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = ExperimentConfig::default();
        cfg.validate().unwrap();
        let back = ExperimentConfig::from_json(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(cfg.sweep.fidelity_target, 0.99);
        assert_eq!(cfg.optimizer.restarts, 5);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let cfg = ExperimentConfig::from_json(r#"{"problem": {"m": 3, "rhs": "one"}, "seed": 4}"#).unwrap();
        assert_eq!(cfg.problem.m, 3);
        assert_eq!(cfg.problem.d, 1);
        assert_eq!(cfg.problem.rhs, RhsSource::Named(BuiltinRhs::One));
        assert_eq!(cfg.seed, 4);
        let cfg = ExperimentConfig::from_json(r#"{"problem": {"m": 1, "rhs": [1, 2]}}"#).unwrap();
        assert_eq!(cfg.problem.rhs, RhsSource::Values(vec![1.0, 2.0]));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(ExperimentConfig::from_json(r#"{"seeed": 1}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"problem": {"mm": 1}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"sweep": {"fidelity_target": 1.5}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"sweep": {"fidelity_target": 0}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"sweep": {"p_min": 4, "p_max": 2}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"backend": {"kind": "shots", "shots": 0}}"#).is_err());
    }

    #[test]
    fn hash_ignores_output_dir_only() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        b.output.dir = Some("/tmp/x".into());
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
        b.seed = 1;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn ansatz_config_builds_specs() {
        let c = AnsatzConfig::default();
        let s = c.spec(3, 2).unwrap();
        assert_eq!(s.mode, ParamMode::PerTerm);
        assert_eq!(s.driver.len(), 7);
        let plain = AnsatzConfig {
            field: false,
            mode: ParamMode::TwoPerLayer,
            ..Default::default()
        };
        assert_eq!(plain.spec(3, 1).unwrap(), AnsatzSpec::qaoa(3, 1));
        let bad = AnsatzConfig {
            mixer: Some(vec![7]),
            ..Default::default()
        };
        assert!(bad.spec(3, 1).is_err());
    }
}
