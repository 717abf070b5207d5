//! Points of the standard simplex `S^{m-1}` in linear and logarithmic form.
//!
//! Coordinates are indexed from zero throughout the crate. Human-facing
//! output (CSV, JSON, `Display`) labels vertices and faces from one.

use std::fmt;

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{compensated_sum, log_sum_exp, weighted_log};

/// Smallest supported number of coordinates.
pub const MIN_DIM: usize = 2;
/// Largest supported number of coordinates.
pub const MAX_DIM: usize = 4;

/// Negative entries down to `-NEGATIVE_CLAMP_TOL` are treated as rounding dust.
pub const NEGATIVE_CLAMP_TOL: f64 = 1e-12;
/// Accepted deviation of the coordinate sum from one in [`SimplexPoint::validate`].
pub const SUM_TOL: f64 = 1e-9;
/// Accepted deviation of the log-sum-exp of a [`LogSimplexPoint`] from zero.
pub const LOG_NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimplexError {
    #[error("coordinate {index} is negative ({value:e})")]
    NegativeCoordinate { index: usize, value: f64 },
    #[error("coordinates sum to {sum}, expected 1")]
    SumNotOne { sum: f64 },
    #[error("coordinate {index} is not finite")]
    NonFinite { index: usize },
    #[error("expected dimension {expected}, found {found}")]
    WrongDimension { expected: usize, found: usize },
    #[error("dimension {0} is outside the supported range {MIN_DIM}..={MAX_DIM}")]
    UnsupportedDimension(usize),
    #[error("log coordinates are not normalized (log-sum-exp = {0:e})")]
    NotNormalized(f64),
    #[error("indeterminate product 0^negative * 0^positive")]
    IndeterminateForm,
    #[error("invalid face: {0}")]
    InvalidFace(String),
}

/// Validation tolerances, overridable from experiment configs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub negative_clamp: f64,
    pub sum: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            negative_clamp: NEGATIVE_CLAMP_TOL,
            sum: SUM_TOL,
        }
    }
}

fn check_dim(m: usize) -> Result<(), SimplexError> {
    if (MIN_DIM..=MAX_DIM).contains(&m) {
        Ok(())
    } else {
        Err(SimplexError::UnsupportedDimension(m))
    }
}

/// A probability vector. The coordinates are nonnegative and sum to one up to
/// the rounding of a single renormalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct SimplexPoint {
    coords: Vec<f64>,
}

impl SimplexPoint {
    /// Validates a raw vector with the default [`Tolerances`].
    pub fn validate(raw: &[f64]) -> Result<Self, SimplexError> {
        Self::validate_with(raw, &Tolerances::default())
    }

    /// Clamps negative dust to zero and renormalizes; rejects anything else that
    /// is off the simplex.
    pub fn validate_with(raw: &[f64], tol: &Tolerances) -> Result<Self, SimplexError> {
        check_dim(raw.len())?;
        let mut coords = Vec::with_capacity(raw.len());
        for (index, &value) in raw.iter().enumerate() {
            if !value.is_finite() {
                return Err(SimplexError::NonFinite { index });
            }
            if value < -tol.negative_clamp {
                return Err(SimplexError::NegativeCoordinate { index, value });
            }
            coords.push(value.max(0.0));
        }
        let sum = compensated_sum(coords.iter().copied());
        if (sum - 1.0).abs() > tol.sum {
            return Err(SimplexError::SumNotOne { sum });
        }
        Ok(Self::renormalized(coords))
    }

    /// Divides nonnegative weights by their sum. The caller guarantees a
    /// positive finite sum.
    pub(crate) fn renormalized(mut coords: Vec<f64>) -> Self {
        let sum = compensated_sum(coords.iter().copied());
        debug_assert!(sum > 0.0 && sum.is_finite());
        for c in &mut coords {
            *c /= sum;
        }
        Self { coords }
    }

    /// Normalizes an arbitrary vector of nonnegative finite weights.
    pub fn from_weights(weights: &[f64]) -> Result<Self, SimplexError> {
        check_dim(weights.len())?;
        for (index, &w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(SimplexError::NonFinite { index });
            }
            if w < 0.0 {
                return Err(SimplexError::NegativeCoordinate { index, value: w });
            }
        }
        let sum = compensated_sum(weights.iter().copied());
        if sum <= 0.0 {
            return Err(SimplexError::SumNotOne { sum });
        }
        Ok(Self::renormalized(weights.to_vec()))
    }

    pub fn vertex(m: usize, index: usize) -> Result<Self, SimplexError> {
        check_dim(m)?;
        if index >= m {
            return Err(SimplexError::WrongDimension {
                expected: m,
                found: index + 1,
            });
        }
        let mut coords = vec![0.0; m];
        coords[index] = 1.0;
        Ok(Self { coords })
    }

    pub fn barycenter(m: usize) -> Result<Self, SimplexError> {
        check_dim(m)?;
        Ok(Self {
            coords: vec![1.0 / m as f64; m],
        })
    }

    /// Uniform sample from the sub-simplex `{x : x_i ≥ min_coord}`.
    ///
    /// # Panics
    /// If `m * min_coord >= 1`.
    pub fn random_interior<R: Rng + ?Sized>(m: usize, min_coord: f64, rng: &mut R) -> Self {
        assert!((MIN_DIM..=MAX_DIM).contains(&m));
        assert!(min_coord >= 0.0 && (m as f64) * min_coord < 1.0);
        let draws: Vec<f64> = (0..m).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = draws.iter().sum();
        let scale = 1.0 - m as f64 * min_coord;
        let coords = draws.iter().map(|d| min_coord + scale * d / total).collect();
        Self::renormalized(coords)
    }

    #[inline]
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Indices of the strictly positive coordinates.
    pub fn support(&self) -> FaceId {
        FaceId {
            support: (0..self.dim()).filter(|&i| self.coords[i] > 0.0).collect(),
        }
    }

    pub fn is_interior(&self) -> bool {
        self.coords.iter().all(|&c| c > 0.0)
    }

    pub fn to_log(&self) -> LogSimplexPoint {
        LogSimplexPoint {
            log_coords: self.coords.iter().map(|c| c.ln()).collect(),
        }
    }

    /// Largest absolute coordinate difference.
    pub fn max_abs_diff(&self, other: &SimplexPoint) -> f64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<f64>> for SimplexPoint {
    type Error = SimplexError;

    fn try_from(raw: Vec<f64>) -> Result<Self, Self::Error> {
        Self::validate(&raw)
    }
}

impl From<SimplexPoint> for Vec<f64> {
    fn from(p: SimplexPoint) -> Self {
        p.coords
    }
}

/// A simplex point stored as natural logarithms of its coordinates; `-inf`
/// encodes an exact zero.
///
/// Used by the trajectory engine, where coordinates of an orbit passing near
/// a vertex shrink far below the smallest normal `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogSimplexPoint {
    log_coords: Vec<f64>,
}

impl LogSimplexPoint {
    /// Accepts log coordinates that are already normalized.
    pub fn new(log_coords: Vec<f64>) -> Result<Self, SimplexError> {
        check_dim(log_coords.len())?;
        for (index, &l) in log_coords.iter().enumerate() {
            if l.is_nan() || l == f64::INFINITY {
                return Err(SimplexError::NonFinite { index });
            }
        }
        let norm = log_sum_exp(&log_coords);
        if !(norm.abs() <= LOG_NORM_TOL) {
            return Err(SimplexError::NotNormalized(norm));
        }
        Ok(Self { log_coords })
    }

    /// Normalizes arbitrary log weights (subtracts their log-sum-exp).
    pub fn from_log_weights(mut log_weights: Vec<f64>) -> Result<Self, SimplexError> {
        check_dim(log_weights.len())?;
        for (index, &l) in log_weights.iter().enumerate() {
            if l.is_nan() || l == f64::INFINITY {
                return Err(SimplexError::NonFinite { index });
            }
        }
        let norm = log_sum_exp(&log_weights);
        if norm == f64::NEG_INFINITY {
            return Err(SimplexError::SumNotOne { sum: 0.0 });
        }
        for l in &mut log_weights {
            *l -= norm;
        }
        Ok(Self {
            log_coords: log_weights,
        })
    }

    pub(crate) fn from_normalized_unchecked(log_coords: Vec<f64>) -> Self {
        Self { log_coords }
    }

    #[inline]
    pub fn log_coords(&self) -> &[f64] {
        &self.log_coords
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.log_coords.len()
    }

    /// Exponentiates relative to the largest log coordinate and renormalizes.
    pub fn to_linear(&self) -> SimplexPoint {
        let mut out = vec![0.0; self.dim()];
        exp_normalized(&self.log_coords, &mut out);
        SimplexPoint { coords: out }
    }
}

/// Writes `exp(l_i - max l) / Σ exp(l_j - max l)` into `out`.
pub(crate) fn exp_normalized(logs: &[f64], out: &mut [f64]) {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (o, &l) in out.iter_mut().zip(logs) {
        *o = (l - max).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

/// A face `Γ_S` of the simplex, identified by its (sorted, zero-based) support.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FaceId {
    support: Vec<usize>,
}

impl FaceId {
    pub fn new(indices: &[usize], m: usize) -> Result<Self, SimplexError> {
        let mut support = indices.to_vec();
        support.sort_unstable();
        support.dedup();
        if support.is_empty() {
            return Err(SimplexError::InvalidFace("empty support".into()));
        }
        if support.len() != indices.len() {
            return Err(SimplexError::InvalidFace("repeated index".into()));
        }
        if let Some(&i) = support.iter().find(|&&i| i >= m) {
            return Err(SimplexError::InvalidFace(format!(
                "index {i} out of range for dimension {m}"
            )));
        }
        Ok(Self { support })
    }

    /// The whole simplex of dimension `m`.
    pub fn full(m: usize) -> Self {
        Self {
            support: (0..m).collect(),
        }
    }

    pub fn indices(&self) -> &[usize] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.support.binary_search(&i).is_ok()
    }

    /// One-based labels, e.g. `[1, 3, 4]` for `Γ_134`.
    pub fn labels(&self) -> Vec<usize> {
        self.support.iter().map(|i| i + 1).collect()
    }

    /// All faces of dimension `m` with exactly `size` indices, in lexicographic order.
    pub fn all_of_size(m: usize, size: usize) -> Vec<FaceId> {
        fn rec(start: usize, m: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<FaceId>) {
            if cur.len() == size {
                out.push(FaceId {
                    support: cur.clone(),
                });
                return;
            }
            for i in start..m {
                cur.push(i);
                rec(i + 1, m, size, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(0, m, size, &mut Vec::new(), &mut out);
        out
    }
}

impl fmt::Display for FaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Γ")?;
        for l in self.labels() {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

/// `φ(x) = max{x1·x2·x4, x1·x3·x4}` on `S^3`.
pub fn phi(p: &SimplexPoint) -> Result<f64, SimplexError> {
    let x = p.coords();
    if x.len() != 4 {
        return Err(SimplexError::WrongDimension {
            expected: 4,
            found: x.len(),
        });
    }
    Ok((x[0] * x[1] * x[3]).max(x[0] * x[2] * x[3]))
}

/// `ln φ` computed from log coordinates, so it stays finite when `φ` underflows.
pub fn log_phi(p: &LogSimplexPoint) -> Result<f64, SimplexError> {
    let l = p.log_coords();
    if l.len() != 4 {
        return Err(SimplexError::WrongDimension {
            expected: 4,
            found: l.len(),
        });
    }
    Ok(log_phi_raw(l))
}

#[inline]
pub(crate) fn log_phi_raw(l: &[f64]) -> f64 {
    (l[0] + l[1] + l[3]).max(l[0] + l[2] + l[3])
}

/// `ln ∏ x_i^{λ_i}`. A zero coordinate contributes nothing when its exponent
/// is zero, `-inf` for a positive exponent and `+inf` for a negative one.
pub fn log_monomial_from_logs(log_coords: &[f64], exponents: &[f64]) -> Result<f64, SimplexError> {
    if log_coords.len() != exponents.len() {
        return Err(SimplexError::WrongDimension {
            expected: log_coords.len(),
            found: exponents.len(),
        });
    }
    if let Some(index) = exponents.iter().position(|e| e.is_nan()) {
        return Err(SimplexError::NonFinite { index });
    }
    let mut neg_inf = false;
    let mut pos_inf = false;
    let mut acc = crate::numeric::CompensatedSum::new();
    for (&l, &e) in log_coords.iter().zip(exponents) {
        let term = weighted_log(e, l);
        if term == f64::NEG_INFINITY {
            neg_inf = true;
        } else if term == f64::INFINITY {
            pos_inf = true;
        } else {
            acc.add(term);
        }
    }
    match (neg_inf, pos_inf) {
        (true, true) => Err(SimplexError::IndeterminateForm),
        (true, false) => Ok(f64::NEG_INFINITY),
        (false, true) => Ok(f64::INFINITY),
        (false, false) => Ok(acc.value()),
    }
}

/// `∏ x_i^{λ_i}` evaluated through logarithms.
pub fn monomial(p: &SimplexPoint, exponents: &[f64]) -> Result<f64, SimplexError> {
    log_monomial_from_logs(&p.to_log().log_coords, exponents).map(f64::exp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn validate_examples() {
        let p = SimplexPoint::validate(&[0.25; 4]).unwrap();
        assert_eq!(p.coords(), &[0.25; 4]);
        let v = SimplexPoint::validate(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(v.support().indices(), &[0]);
        assert!(matches!(
            SimplexPoint::validate(&[0.5, 0.6, 0.0, 0.0]),
            Err(SimplexError::SumNotOne { .. })
        ));
    }

    #[test]
    fn validate_clamps_dust_and_rejects_real_negatives() {
        let p = SimplexPoint::validate(&[0.5, 0.5, -1e-13]).unwrap();
        assert_eq!(p.coords()[2], 0.0);
        assert!(matches!(
            SimplexPoint::validate(&[0.5, 0.5 + 1e-6, -1e-6]),
            Err(SimplexError::NegativeCoordinate { index: 2, .. })
        ));
        assert!(matches!(
            SimplexPoint::validate(&[f64::NAN, 1.0]),
            Err(SimplexError::NonFinite { index: 0 })
        ));
        assert!(matches!(
            SimplexPoint::validate(&[1.0]),
            Err(SimplexError::UnsupportedDimension(1))
        ));
        assert!(matches!(
            SimplexPoint::validate(&[0.2; 5]),
            Err(SimplexError::UnsupportedDimension(5))
        ));
    }

    #[test]
    fn phi_examples() {
        let b = SimplexPoint::barycenter(4).unwrap();
        assert!((phi(&b).unwrap() - 1.0 / 64.0).abs() < 1e-17);
        assert_eq!(phi(&SimplexPoint::vertex(4, 0).unwrap()).unwrap(), 0.0);
        let p = SimplexPoint::validate(&[0.4, 0.3, 0.1, 0.2]).unwrap();
        // 0.4*0.3*0.2 = 0.024, 0.4*0.1*0.2 = 0.008
        assert!((phi(&p).unwrap() - 0.024).abs() < 1e-15);
        assert!(matches!(
            phi(&SimplexPoint::barycenter(3).unwrap()),
            Err(SimplexError::WrongDimension { expected: 4, found: 3 })
        ));
    }

    #[test]
    fn log_phi_matches_phi() {
        let p = SimplexPoint::validate(&[0.4, 0.3, 0.1, 0.2]).unwrap();
        assert!((log_phi(&p.to_log()).unwrap() - 0.024f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn monomial_examples() {
        let b = SimplexPoint::barycenter(4).unwrap();
        assert!((monomial(&b, &[1.0; 4]).unwrap() - 1.0 / 256.0).abs() < 1e-16);
        let v = SimplexPoint::vertex(4, 0).unwrap();
        assert_eq!(monomial(&v, &[1.0; 4]).unwrap(), 0.0);
        let p = SimplexPoint::validate(&[1.0 / 3.0, 0.0, 1.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert!((monomial(&p, &[1.0, 0.0, 1.0, 1.0]).unwrap() - 1.0 / 27.0).abs() < 1e-15);
    }

    #[test]
    fn monomial_infinities_and_errors() {
        let p = SimplexPoint::validate(&[0.5, 0.5, 0.0]).unwrap();
        assert_eq!(monomial(&p, &[1.0, 1.0, -1.0]).unwrap(), f64::INFINITY);
        assert_eq!(monomial(&p, &[1.0, 1.0, 0.0]).unwrap(), 0.25);
        let q = SimplexPoint::validate(&[0.5, 0.0, 0.0, 0.5]).unwrap();
        assert_eq!(
            monomial(&q, &[1.0, 1.0, -1.0, 0.0]),
            Err(SimplexError::IndeterminateForm)
        );
        assert!(matches!(
            monomial(&p, &[1.0, f64::NAN, 0.0]),
            Err(SimplexError::NonFinite { index: 1 })
        ));
        assert!(matches!(
            monomial(&p, &[1.0, 1.0]),
            Err(SimplexError::WrongDimension { .. })
        ));
    }

    #[test]
    fn log_point_validation() {
        assert!(LogSimplexPoint::new(vec![0.5f64.ln(), 0.5f64.ln()]).is_ok());
        assert!(matches!(
            LogSimplexPoint::new(vec![0.0, 0.0]),
            Err(SimplexError::NotNormalized(_))
        ));
        let p = LogSimplexPoint::from_log_weights(vec![-1000.0, -1000.0, f64::NEG_INFINITY]).unwrap();
        let lin = p.to_linear();
        assert!((lin.coords()[0] - 0.5).abs() < 1e-15);
        assert_eq!(lin.coords()[2], 0.0);
        assert!(LogSimplexPoint::from_log_weights(vec![f64::NEG_INFINITY; 3]).is_err());
    }

    #[test]
    fn faces() {
        let f = FaceId::new(&[3, 0, 2], 4).unwrap();
        assert_eq!(f.indices(), &[0, 2, 3]);
        assert_eq!(f.to_string(), "Γ134");
        assert!(FaceId::new(&[], 4).is_err());
        assert!(FaceId::new(&[0, 4], 4).is_err());
        assert!(FaceId::new(&[1, 1], 4).is_err());
        assert_eq!(FaceId::all_of_size(4, 3).len(), 4);
        assert_eq!(FaceId::all_of_size(4, 2).len(), 6);
    }

    #[test]
    fn random_interior_respects_floor() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let p = SimplexPoint::random_interior(4, 0.01, &mut rng);
            assert!(p.coords().iter().all(|&c| c >= 0.01 - 1e-15));
            assert!((p.coords().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    fn simplex_vec() -> impl Strategy<Value = Vec<f64>> {
        (2usize..=4).prop_flat_map(|m| proptest::collection::vec(0.0f64..1.0, m)).prop_filter_map(
            "positive mass",
            |w| {
                let s: f64 = w.iter().sum();
                (s > 1e-6).then(|| w.iter().map(|x| x / s).collect())
            },
        )
    }

    proptest! {
        #[test]
        fn validate_is_idempotent(raw in simplex_vec()) {
            let p = SimplexPoint::validate(&raw).unwrap();
            let q = SimplexPoint::validate(p.coords()).unwrap();
            prop_assert!(p.max_abs_diff(&q) <= 1e-15);
            prop_assert!((p.coords().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn log_round_trip(raw in simplex_vec(), shrink in 0u32..300) {
            // push one coordinate towards 1e-300 to exercise the tiny range
            let mut w = raw.clone();
            w[0] *= 10f64.powi(-(shrink as i32));
            let p = SimplexPoint::from_weights(&w).unwrap();
            let back = p.to_log().to_linear();
            for (a, b) in p.coords().iter().zip(back.coords()) {
                if *a >= 1e-300 {
                    prop_assert!(((a - b) / a).abs() <= 1e-12, "{a} vs {b}");
                }
            }
            prop_assert!(log_sum_exp(p.to_log().log_coords()).abs() <= 1e-12);
        }

        #[test]
        fn phi_is_bounded(w in proptest::collection::vec(0.0f64..1.0, 4)) {
            let s: f64 = w.iter().sum();
            prop_assume!(s > 1e-9);
            let p = SimplexPoint::from_weights(&w).unwrap();
            prop_assert!(phi(&p).unwrap() <= 1.0 / 27.0 + 1e-17);
        }
    }
}
