use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use super::AppError;
use crate::classify::CanonicalParams;
use crate::ergodic::{Observable, DELTA_CONV, DELTA_OSC};
use crate::lyapunov::DEFAULT_MIN_DECADE_DROP;
use crate::qso::SkewMatrix;
use crate::simplex::{SimplexPoint, Tolerances};

/// Full skew array, the six canonical class-3 parameters, or the three
/// parameters of the m = 3 operator.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    Full(Vec<Vec<f64>>),
    Canonical(CanonicalParams),
    Volterra3(Volterra3Params),
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Volterra3Params {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl MatrixSpec {
    pub fn to_matrix(&self) -> Result<SkewMatrix, AppError> {
        let a = match self {
            MatrixSpec::Full(rows) => SkewMatrix::new(rows),
            MatrixSpec::Canonical(p) => p.to_matrix(),
            MatrixSpec::Volterra3(p) => SkewMatrix::volterra3(p.a, p.b, p.c),
        }
        .map_err(|e| AppError::Validation(format!("matrix: {e}")))?;
        if !(3..=4).contains(&a.dim()) {
            return Err(AppError::Validation(format!("matrix must be 3x3 or 4x4, got {0}x{0}", a.dim())));
        }
        Ok(a)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomStarts {
    pub count: usize,
    pub seed: u64,
    #[serde(default = "default_min_coord")]
    pub min_coord: f64,
}

fn default_min_coord() -> f64 {
    0.01
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartsSpec {
    #[serde(default)]
    pub points: Vec<Vec<f64>>,
    pub random: Option<RandomStarts>,
}

/// Observables with 1-based coordinate labels.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservablesSpec {
    #[serde(default)]
    pub coordinates: Vec<usize>,
    #[serde(default)]
    pub monomials: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub matrix: MatrixSpec,
    #[serde(default)]
    pub starts: StartsSpec,
    #[serde(default = "default_steps")]
    pub steps: u64,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    pub observables: Option<ObservablesSpec>,
    /// Defaults to `max(1, steps / 1000)`.
    pub record_stride: Option<u64>,
    /// Defaults to dyadic.
    pub checkpoints: Option<Vec<u64>>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_delta_conv")]
    pub delta_conv: f64,
    #[serde(default = "default_delta_osc")]
    pub delta_osc: f64,
    /// Worker threads for independent trajectories; 0 picks the default.
    #[serde(default)]
    pub threads: usize,
    #[serde(default = "default_violations")]
    pub growth_violations_per_ten: u32,
    #[serde(default = "default_min_drop")]
    pub min_decade_drop: f64,
    pub output_dir: Option<PathBuf>,
}

fn default_steps() -> u64 {
    10_000
}
fn default_epsilon() -> f64 {
    0.05
}
fn default_delta_conv() -> f64 {
    DELTA_CONV
}
fn default_delta_osc() -> f64 {
    DELTA_OSC
}
fn default_violations() -> u32 {
    1
}
fn default_min_drop() -> f64 {
    DEFAULT_MIN_DECADE_DROP
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, AppError> {
        serde_json::from_str(text).map_err(|e| AppError::Validation(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, AppError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| AppError::Validation(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn record_stride(&self) -> u64 {
        self.record_stride.unwrap_or((self.steps / 1000).max(1))
    }

    /// Explicit points first, then seeded random interior points.
    pub fn start_points(&self, m: usize) -> Result<Vec<SimplexPoint>, AppError> {
        let mut out = Vec::new();
        for (k, p) in self.starts.points.iter().enumerate() {
            if p.len() != m {
                return Err(AppError::Validation(format!(
                    "start {} has {} coordinates, matrix is {m}x{m}",
                    k + 1,
                    p.len()
                )));
            }
            let pt = SimplexPoint::validate_with(p, &self.tolerances)
                .map_err(|e| AppError::Validation(format!("start {}: {e}", k + 1)))?;
            out.push(pt);
        }
        if let Some(r) = &self.starts.random {
            if !(r.min_coord >= 0.0 && r.min_coord * (m as f64) < 1.0) {
                return Err(AppError::Validation(format!("min_coord {} infeasible for m = {m}", r.min_coord)));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(r.seed);
            out.extend((0..r.count).map(|_| SimplexPoint::random_interior(m, r.min_coord, &mut rng)));
        }
        Ok(out)
    }

    /// 0-based observables; every coordinate when none are configured.
    pub fn observables(&self, m: usize) -> Result<Vec<Observable>, AppError> {
        let Some(spec) = &self.observables else {
            return Ok((0..m).map(Observable::Coordinate).collect());
        };
        let mut out = Vec::new();
        for &c in &spec.coordinates {
            if c == 0 || c > m {
                return Err(AppError::Validation(format!("coordinate label {c} not in 1..={m}")));
            }
            out.push(Observable::Coordinate(c - 1));
        }
        for e in &spec.monomials {
            if e.len() != m || e.iter().any(|v| !v.is_finite()) {
                return Err(AppError::Validation(format!("monomial exponents must be {m} finite numbers")));
            }
            out.push(Observable::Monomial(e.clone()));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_forms() {
        let full = ExperimentConfig::from_json(r#"{"matrix": [[0, 0.5, -0.5], [-0.5, 0, 0.5], [0.5, -0.5, 0]]}"#).unwrap();
        assert_eq!(full.matrix.to_matrix().unwrap(), SkewMatrix::volterra3(0.5, 0.5, 0.5).unwrap());
        let v3 = ExperimentConfig::from_json(r#"{"matrix": {"a": 0.5, "b": 0.5, "c": 0.5}}"#).unwrap();
        assert_eq!(v3.matrix.to_matrix().unwrap(), SkewMatrix::volterra3(0.5, 0.5, 0.5).unwrap());
        let can = ExperimentConfig::from_json(
            r#"{"matrix": {"a12": 0.5, "a13": 0.5, "a14": 0.5, "a23": 0.5, "a24": 0.5, "a34": 0.5}}"#,
        )
        .unwrap();
        assert_eq!(can.matrix.to_matrix().unwrap(), CanonicalParams::uniform(0.5).to_matrix().unwrap());
        assert_eq!(can.steps, 10_000);
        assert_eq!(can.record_stride(), 10);
    }

    #[test]
    fn validation_errors() {
        let bad = ExperimentConfig::from_json(r#"{"matrix": [[0, 0.5], [0.5, 0]]}"#).unwrap();
        assert!(matches!(bad.matrix.to_matrix(), Err(AppError::Validation(_))));
        let two = ExperimentConfig::from_json(r#"{"matrix": [[0, 0.5], [-0.5, 0]]}"#).unwrap();
        assert!(matches!(two.matrix.to_matrix(), Err(AppError::Validation(_))));
        assert!(matches!(
            ExperimentConfig::from_json(r#"{"matrix": {"a": 1}, "bogus": 1}"#),
            Err(AppError::Validation(_))
        ));
        let c = ExperimentConfig::from_json(r#"{"matrix": {"a": 1, "b": 1, "c": 1}, "starts": {"points": [[0.5, 0.6, -0.1]]}}"#)
            .unwrap();
        assert!(matches!(c.start_points(3), Err(AppError::Validation(_))));
        let c = ExperimentConfig::from_json(r#"{"matrix": {"a": 1, "b": 1, "c": 1}, "observables": {"coordinates": [0]}}"#)
            .unwrap();
        assert!(matches!(c.observables(3), Err(AppError::Validation(_))));
    }

    #[test]
    fn random_starts_are_seeded() {
        let c = ExperimentConfig::from_json(
            r#"{"matrix": {"a": 1, "b": 1, "c": 1}, "starts": {"points": [[0.5, 0.3, 0.2]], "random": {"count": 3, "seed": 7}}}"#,
        )
        .unwrap();
        let a = c.start_points(3).unwrap();
        assert_eq!(a.len(), 4);
        assert_eq!(a, c.start_points(3).unwrap());
        assert!(a[1..].iter().all(|p| p.coords().iter().all(|&x| x >= 0.01)));
    }
}
