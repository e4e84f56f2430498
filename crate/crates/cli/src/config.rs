//! JSON inputs. Parse failures name the file and the offending field.

use std::path::Path;

use emergent_core::cosmo::OutputGrid;
use emergent_core::quantum::Factorization;
use emergent_core::units::UnitSystem;
use emergent_core::witness::Bipartition;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::CliError;

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    parse(&text, &path.display().to_string())
}

pub fn parse<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let field = e.path().to_string();
        let inner = e.into_inner();
        CliError::input(format!("{origin}: field `{field}`: {inner}"))
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierTable {
    pub points: Vec<[f64; 2]>,
    /// Emitted energy in joules, for the effective temperature.
    #[serde(default)]
    pub energy_joules: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum AlphaSpec {
    Value(f64),
    Named(String),
}

fn third() -> f64 {
    1.0 / 3.0
}

fn default_threshold() -> f64 {
    emergent_core::cosmo::DEFAULT_EPOCH_THRESHOLD
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CosmoConfig {
    #[serde(default = "third")]
    pub omega_eos: f64,
    pub alpha: AlphaSpec,
    pub a0: f64,
    pub rho0: f64,
    pub t_end: f64,
    pub grid: OutputGrid,
    #[serde(default)]
    pub units: Option<UnitSystem>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

impl CosmoConfig {
    /// Deep-inflation run over about eight e-folds in Planck units.
    pub fn default_run() -> Self {
        CosmoConfig {
            omega_eos: third(),
            alpha: AlphaSpec::Named("paper-default".into()),
            a0: 1.0,
            rho0: 60.0 * (1.0 - 1e-7),
            t_end: 40.0,
            grid: OutputGrid::Uniform { n: 2000 },
            units: Some(UnitSystem::Natural),
            threshold: default_threshold(),
        }
    }

    pub fn alpha(&self, units: UnitSystem) -> Result<f64, CliError> {
        match &self.alpha {
            AlphaSpec::Value(x) => Ok(*x),
            AlphaSpec::Named(s) if s == "paper-default" => Ok(emergent_core::cosmo::default_alpha(units)),
            AlphaSpec::Named(s) => {
                Err(CliError::input(format!("field `alpha`: expected a number or \"paper-default\", got \"{s}\"")))
            }
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessConfig {
    pub factors: Factorization,
    pub hamiltonian: Vec<Vec<[f64; 2]>>,
    pub bipartition: Bipartition,
    #[serde(default)]
    pub temperatures: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn error_names_field() {
        let err = parse::<CosmoConfig>(
            r#"{"alpha": 0.1, "a0": "x", "rho0": 1, "t_end": 1, "grid": {"kind": "uniform", "n": 2}}"#,
            "c.json",
        )
        .unwrap_err();
        assert_eq!(err.code, 2);
        assert!(err.message.contains("c.json") && err.message.contains("a0"), "{}", err.message);
    }

    #[test]
    fn alpha_forms() {
        let c: CosmoConfig = parse(
            r#"{"alpha": "paper-default", "a0": 1, "rho0": 1, "t_end": 1, "grid": {"kind": "times", "times": []}}"#,
            "c",
        )
        .unwrap();
        assert!((c.alpha(UnitSystem::Natural).unwrap() - 1.0 / 45.0).abs() < 1e-15);
        let bad = CosmoConfig { alpha: AlphaSpec::Named("x".into()), ..c };
        assert!(bad.alpha(UnitSystem::Natural).is_err());
    }
}
