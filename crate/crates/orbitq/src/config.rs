//! JSON run configuration: schema types with strict validation, plus
//! resolution of the schema into live algebra, orbit, and path objects.
//! Matrices are row-major; complex numbers are [re, im] pairs.

use serde::{Deserialize, Serialize};

use num_complex::Complex64;

use crate::error::{OrbitqError, Result};
use crate::flows::{PathSpec, DEFAULT_PATH_STEPS};
use crate::liealg::{
    builtin, parse_algebra_file, BuiltinName, Covector, GroupElement, MatrixLieAlgebra,
};
use crate::numerics::{CMat, RMat, RVec};
use crate::orbit::{build_orbit, DeltaConvention, HyperbolicOrbit, IntegralDatum};
use crate::uea::{UeaBasis, UEAElement};

fn config_err(msg: impl Into<String>) -> OrbitqError {
    OrbitqError::Config(msg.into())
}

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_GRID: (usize, usize) = (64, 64);

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub algebra: Option<AlgebraSpec>,
    #[serde(default)]
    pub eta: Option<Vec<f64>>,
    /// "full" or "half"; defaults to "full".
    #[serde(default)]
    pub delta_convention: Option<String>,
    #[serde(default)]
    pub datum: Option<DatumSpec>,
    #[serde(default)]
    pub path: Option<PathConfig>,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
    #[serde(default)]
    pub infchar: Option<InfcharConfig>,
    #[serde(default)]
    pub kappa: Option<KappaConfig>,
    #[serde(default)]
    pub character: Option<CharacterConfig>,
    #[serde(default)]
    pub verify: Option<VerifyConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    #[serde(default)]
    pub builtin: Option<BuiltinSpec>,
    /// Path to an algebra description file, relative to the working
    /// directory.
    #[serde(default)]
    pub file: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuiltinSpec {
    /// "so", "sl", or "sp".
    pub family: String,
    #[serde(default)]
    pub p: Option<usize>,
    #[serde(default)]
    pub q: Option<usize>,
    #[serde(default)]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatumSpec {
    /// Fiber dimension of the datum representation.
    pub dim: usize,
    #[serde(default)]
    pub components: Vec<ComponentSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentSpec {
    /// Group representative, row-major n x n.
    pub rep: Vec<Vec<f64>>,
    /// Datum value, row-major m x m of [re, im] pairs.
    pub value: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathConfig {
    /// "rotation-loop" or "levi-segment"; exclusive with segments.
    #[serde(default)]
    pub preset: Option<String>,
    #[serde(default)]
    pub segments: Option<Vec<SegmentConfig>>,
    #[serde(default)]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentConfig {
    pub duration: f64,
    /// Velocity coefficients in the algebra basis.
    pub velocity: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n_s: usize,
    pub n_t: usize,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Replaces every property-suite tolerance; values like 1e-15 force the
    /// documented expected-failure mode.
    #[serde(default)]
    pub suite: Option<f64>,
    #[serde(default)]
    pub route_agreement: Option<f64>,
    #[serde(default)]
    pub invariance: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InfcharConfig {
    /// "symmetrized" (default) or "normal-ordered".
    #[serde(default)]
    pub strategy: Option<String>,
    /// Number of random base points for the constancy sweep; 0 disables it.
    #[serde(default)]
    pub sweep: Option<usize>,
    /// Custom enveloping-algebra element; None means the Casimir.
    #[serde(default)]
    pub element: Option<Vec<TermConfig>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermConfig {
    /// Generator indices of the word, referring to the algebra basis.
    pub word: Vec<usize>,
    pub coeff: [f64; 2],
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KappaConfig {
    /// Connector direction coefficients; None selects automatically.
    #[serde(default)]
    pub connector: Option<Vec<f64>>,
    /// Re-run the action route on a doubled grid and report the improvement.
    #[serde(default)]
    pub doubling: Option<bool>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacterConfig {
    #[serde(default)]
    pub multiplicity: Option<usize>,
    /// Number of random conjugations for the invariance check.
    #[serde(default)]
    pub conjugations: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    /// Suite names to run; None means all.
    #[serde(default)]
    pub suites: Option<Vec<String>>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<RunConfig> {
        serde_json::from_str(text).map_err(|e| config_err(format!("invalid config: {e}")))
    }

    pub fn load(path: &std::path::Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::from_json(&text)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }

    pub fn grid(&self) -> (usize, usize) {
        self.grid.as_ref().map_or(DEFAULT_GRID, |g| (g.n_s, g.n_t))
    }

    pub fn delta_convention(&self) -> Result<DeltaConvention> {
        match self.delta_convention.as_deref() {
            None | Some("full") => Ok(DeltaConvention::FullTrace),
            Some("half") => Ok(DeltaConvention::HalfTrace),
            Some(other) => Err(config_err(format!(
                "delta_convention must be \"full\" or \"half\", got \"{other}\""
            ))),
        }
    }

    pub fn resolve_algebra(&self) -> Result<MatrixLieAlgebra> {
        let spec = self
            .algebra
            .as_ref()
            .ok_or_else(|| config_err("missing \"algebra\" section"))?;
        match (&spec.builtin, &spec.file) {
            (Some(b), None) => builtin(&b.to_name()?),
            (None, Some(path)) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| config_err(format!("cannot read algebra file {path}: {e}")))?;
                parse_algebra_file(&text)
            }
            _ => Err(config_err("algebra needs exactly one of \"builtin\" or \"file\"")),
        }
    }

    pub fn resolve_orbit(&self, algebra: &MatrixLieAlgebra) -> Result<HyperbolicOrbit> {
        let eta = self
            .eta
            .as_ref()
            .ok_or_else(|| config_err("missing \"eta\" coefficients"))?;
        if eta.len() != algebra.d {
            return Err(config_err(format!(
                "eta has {} coefficients but {} has dimension {}",
                eta.len(),
                algebra.name,
                algebra.d
            )));
        }
        let eta = Covector::new(RVec::from_iterator(eta.len(), eta.iter().copied()));
        let datum = match &self.datum {
            None => IntegralDatum::trivial(1),
            Some(spec) => spec.resolve(algebra)?,
        };
        build_orbit(algebra, &eta, datum, self.delta_convention()?)
    }

    pub fn resolve_path(&self, algebra: &MatrixLieAlgebra) -> Result<PathSpec> {
        let path = self
            .path
            .as_ref()
            .ok_or_else(|| config_err("missing \"path\" section"))?;
        path.resolve(algebra)
    }

    pub fn resolve_uea_element(&self, algebra: &MatrixLieAlgebra) -> Result<Option<UEAElement>> {
        let Some(terms) = self.infchar.as_ref().and_then(|c| c.element.as_ref()) else {
            return Ok(None);
        };
        let basis = UeaBasis::standard(algebra);
        let mut words = Vec::with_capacity(terms.len());
        for term in terms {
            for &i in &term.word {
                if i >= algebra.d {
                    return Err(config_err(format!(
                        "element word index {i} out of range for dimension {}",
                        algebra.d
                    )));
                }
            }
            let word: Vec<u8> = term.word.iter().map(|&i| i as u8).collect();
            words.push((word, Complex64::new(term.coeff[0], term.coeff[1])));
        }
        Ok(Some(UEAElement::from_terms(&basis, &words)))
    }
}

impl BuiltinSpec {
    pub fn to_name(&self) -> Result<BuiltinName> {
        match self.family.as_str() {
            "so" => {
                let (p, q) = match (self.p, self.q) {
                    (Some(p), Some(q)) => (p, q),
                    _ => return Err(config_err("so needs fields p and q")),
                };
                Ok(BuiltinName::So { p, q })
            }
            "sl" => {
                let n = self.n.ok_or_else(|| config_err("sl needs field n"))?;
                Ok(BuiltinName::Sl { n })
            }
            "sp" => {
                let n = self.n.ok_or_else(|| config_err("sp needs field n"))?;
                Ok(BuiltinName::Sp { dim: n })
            }
            other => Err(config_err(format!("unknown algebra family \"{other}\""))),
        }
    }
}

impl DatumSpec {
    pub fn resolve(&self, algebra: &MatrixLieAlgebra) -> Result<IntegralDatum> {
        let n = algebra.n;
        let mut table = Vec::with_capacity(self.components.len());
        for comp in &self.components {
            if comp.rep.len() != n || comp.rep.iter().any(|row| row.len() != n) {
                return Err(config_err(format!("datum rep must be {n} x {n} row-major")));
            }
            let matrix = RMat::from_fn(n, n, |i, j| comp.rep[i][j]);
            let m = self.dim;
            if comp.value.len() != m || comp.value.iter().any(|row| row.len() != m) {
                return Err(config_err(format!("datum value must be {m} x {m} row-major")));
            }
            let value = CMat::from_fn(m, m, |i, j| {
                Complex64::new(comp.value[i][j][0], comp.value[i][j][1])
            });
            table.push((GroupElement { matrix, group_tag: algebra.group_tag }, value));
        }
        IntegralDatum::new(self.dim, table)
    }
}

impl PathConfig {
    pub fn resolve(&self, algebra: &MatrixLieAlgebra) -> Result<PathSpec> {
        let steps = self.steps.unwrap_or(DEFAULT_PATH_STEPS);
        if steps == 0 {
            return Err(config_err("path steps must be positive"));
        }
        match (&self.preset, &self.segments) {
            (Some(name), None) => preset_path(algebra, name, steps),
            (None, Some(segments)) => {
                if segments.is_empty() {
                    return Err(config_err("path segments must be nonempty"));
                }
                let mut parts = Vec::with_capacity(segments.len());
                for seg in segments {
                    if seg.duration <= 0.0 {
                        return Err(config_err("segment durations must be positive"));
                    }
                    if seg.velocity.len() != algebra.d {
                        return Err(config_err(format!(
                            "segment velocity has {} coefficients, need {}",
                            seg.velocity.len(),
                            algebra.d
                        )));
                    }
                    let coeffs =
                        RVec::from_iterator(algebra.d, seg.velocity.iter().copied());
                    parts.push((seg.duration, algebra.element(coeffs)));
                }
                Ok(PathSpec::piecewise(parts, steps))
            }
            _ => Err(config_err("path needs exactly one of \"preset\" or \"segments\"")),
        }
    }
}

fn preset_path(algebra: &MatrixLieAlgebra, name: &str, steps: usize) -> Result<PathSpec> {
    let velocity = match (name, algebra.name.as_str()) {
        ("rotation-loop", "so(1,3)") => {
            algebra.basis_element(3).scale(2.0 * std::f64::consts::PI)
        }
        ("rotation-loop", "sl(2)") => algebra
            .basis_element(2)
            .add(&algebra.basis_element(1).scale(-1.0))
            .scale(std::f64::consts::PI),
        ("levi-segment", "so(1,3)") => algebra
            .basis_element(0)
            .scale(0.3)
            .add(&algebra.basis_element(3).scale(0.7)),
        ("levi-segment", "sl(2)") => algebra.basis_element(0).scale(0.3),
        ("rotation-loop" | "levi-segment", other) => {
            return Err(config_err(format!(
                "preset \"{name}\" is not defined for algebra {other}"
            )))
        }
        (other, _) => return Err(config_err(format!("unknown path preset \"{other}\""))),
    };
    Ok(PathSpec::constant(velocity).with_steps(steps))
}

pub fn parse_grid_flag(text: &str) -> std::result::Result<(usize, usize), String> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err("grid must be N,S".into());
    }
    let n = parts[0].trim().parse::<usize>().map_err(|e| e.to_string())?;
    let s = parts[1].trim().parse::<usize>().map_err(|e| e.to_string())?;
    if n == 0 || s == 0 {
        return Err("grid sizes must be positive".into());
    }
    Ok((n, s))
}
