//! Report envelope emitted by every subcommand, with lossless JSON
//! round-tripping. Complex numbers appear as [re, im] pairs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

pub fn complex_pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Report {
    pub version: String,
    /// Seconds since the Unix epoch at emission time; the only field
    /// outside the determinism guarantee.
    pub timestamp: u64,
    pub command: String,
    pub seed: u64,
    pub passed: bool,
    pub config: RunConfig,
    pub results: CommandResults,
}

impl Report {
    pub fn new(command: &str, config: RunConfig, passed: bool, results: CommandResults) -> Report {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Report {
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
            command: command.to_string(),
            seed: config.seed(),
            passed,
            config,
            results,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CommandResults {
    Orbit(OrbitSummary),
    Infchar(InfcharSummary),
    Kappa(KappaSummary),
    Character(CharacterSummary),
    Verify(VerifySummary),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitSummary {
    pub algebra: String,
    pub dimension: usize,
    pub verdict: String,
    pub grading: Vec<GradingLevel>,
    pub l_basis: Vec<Vec<f64>>,
    pub u_basis: Vec<Vec<f64>>,
    pub uminus_basis: Vec<Vec<f64>>,
    pub delta: Vec<f64>,
    pub killing_normalization: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradingLevel {
    pub eigenvalue: f64,
    pub dim: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfcharSummary {
    pub element: String,
    pub strategy: String,
    pub central: bool,
    pub centrality_defect: f64,
    pub cartan_rank: usize,
    pub positive_roots: usize,
    pub polynomial: Vec<PolyTerm>,
    pub chi: [f64; 2],
    pub sweep: Option<SweepSummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyTerm {
    /// Exponents of the Cartan coordinates.
    pub exponents: Vec<u8>,
    pub coeff: [f64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSummary {
    pub samples: usize,
    pub max_deviation: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KappaSummary {
    pub kappa_direct: [f64; 2],
    pub kappa_ode: Option<[f64; 2]>,
    pub kappa_action: Option<[f64; 2]>,
    pub action_hat: Option<f64>,
    pub action_tilde: Option<f64>,
    pub unit_modulus_defect: f64,
    pub grid: [usize; 2],
    pub discrepancies: Vec<Discrepancy>,
    pub doubling: Option<DoublingSummary>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Discrepancy {
    pub routes: String,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DoublingSummary {
    pub coarse_error: f64,
    pub fine_error: f64,
    pub improvement: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacterSummary {
    pub value: [f64; 2],
    pub multiplicity: usize,
    pub conjugation_samples: usize,
    pub invariance_max_deviation: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySummary {
    pub all_passed: bool,
    pub runtime_seconds: f64,
    pub suites: Vec<SuiteResult>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteResult {
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn report_round_trips_losslessly() {
        let config = RunConfig::from_json(
            r#"{
                "algebra": {"builtin": {"family": "so", "p": 1, "q": 3}},
                "eta": [1.5, 0.0, 0.0, 0.0, 0.0, 0.0],
                "grid": {"n_s": 16, "n_t": 32},
                "seed": 11
            }"#,
        )
        .unwrap();
        let results = CommandResults::Kappa(KappaSummary {
            kappa_direct: [1.0, 0.0],
            kappa_ode: Some([1.0, -2.0e-12]),
            kappa_action: None,
            action_hat: None,
            action_tilde: None,
            unit_modulus_defect: 3.0e-13,
            grid: [16, 32],
            discrepancies: vec![Discrepancy { routes: "direct-ode".into(), value: 2.0e-12 }],
            doubling: None,
        });
        let report = Report::new("kappa", config, true, results);
        let json = report.to_json();
        let back: Report = serde_json::from_str(&json).unwrap();
        let json2 = back.to_json();
        assert_eq!(
            serde_json::from_str::<serde_json::Value>(&json).unwrap(),
            serde_json::from_str::<serde_json::Value>(&json2).unwrap()
        );
        assert_eq!(back.seed, 11);
        assert_eq!(back.command, "kappa");
    }

    #[test]
    fn verify_results_round_trip() {
        let results = CommandResults::Verify(VerifySummary {
            all_passed: false,
            runtime_seconds: 1.25,
            suites: vec![SuiteResult {
                name: "jacobi".into(),
                passed: false,
                residual: 2.0e-3,
                tolerance: 1.0e-9,
                detail: "so(1,3)".into(),
            }],
        });
        let report = Report::new("verify", RunConfig::default(), false, results);
        let back: Report = serde_json::from_str(&report.to_json()).unwrap();
        assert!(!back.passed);
        match back.results {
            CommandResults::Verify(v) => {
                assert_eq!(v.suites.len(), 1);
                assert!(!v.suites[0].passed);
            }
            _ => panic!("wrong variant"),
        }
    }

    #[test]
    fn complex_pairs() {
        assert_eq!(complex_pair(Complex64::new(0.75, 1.0)), [0.75, 1.0]);
    }
}
