//! Three-way classification of 4×4 Volterra matrices.
//!
//! * Class 1: some row is entrywise nonnegative (that coordinate never decreases).
//! * Class 2: no such row, but some row is entrywise nonpositive.
//! * Class 3: everything else. A relabeling of the four types brings the
//!   matrix to the canonical sign pattern
//!
//! ```text
//!   0    a12   a13  -a14
//!  -a12   0    a23   a24
//!  -a13 -a23    0    a34
//!   a14 -a24  -a34    0
//! ```
//!
//! with all six parameters nonnegative.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qso::{QsoError, SkewMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClassifyError {
    #[error("classification requires a 4x4 matrix, got {0}x{0}")]
    WrongDimension(usize),
    #[error("no relabeling brings the matrix to the canonical class-3 sign pattern")]
    NoCanonicalForm,
    #[error(transparent)]
    Qso(#[from] QsoError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MatrixClass {
    Class1,
    Class2,
    Class3,
}

impl MatrixClass {
    pub fn number(self) -> u8 {
        match self {
            MatrixClass::Class1 => 1,
            MatrixClass::Class2 => 2,
            MatrixClass::Class3 => 3,
        }
    }
}

/// The six nonnegative parameters of the canonical class-3 form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CanonicalParams {
    pub a12: f64,
    pub a13: f64,
    pub a14: f64,
    pub a23: f64,
    pub a24: f64,
    pub a34: f64,
}

impl CanonicalParams {
    pub fn uniform(v: f64) -> Self {
        Self {
            a12: v,
            a13: v,
            a14: v,
            a23: v,
            a24: v,
            a34: v,
        }
    }

    pub fn from_array(v: [f64; 6]) -> Self {
        Self {
            a12: v[0],
            a13: v[1],
            a14: v[2],
            a23: v[3],
            a24: v[4],
            a34: v[5],
        }
    }

    pub fn to_array(self) -> [f64; 6] {
        [self.a12, self.a13, self.a14, self.a23, self.a24, self.a34]
    }

    /// The skew matrix with the canonical sign pattern.
    pub fn to_matrix(self) -> Result<SkewMatrix, QsoError> {
        let p = self;
        SkewMatrix::new(&[
            vec![0.0, p.a12, p.a13, -p.a14],
            vec![-p.a12, 0.0, p.a23, p.a24],
            vec![-p.a13, -p.a23, 0.0, p.a34],
            vec![p.a14, -p.a24, -p.a34, 0.0],
        ])
    }

    /// Every parameter strictly inside `(0, 1)`.
    pub fn is_strict(self) -> bool {
        self.to_array().iter().all(|&v| v > 0.0 && v < 1.0)
    }

    pub fn invariant_i(self) -> f64 {
        invariant_i(self)
    }
}

/// `I = -a12·a34 + a13·a24 + a14·a23`; equals minus the Pfaffian of the
/// canonical matrix.
pub fn invariant_i(p: CanonicalParams) -> f64 {
    -p.a12 * p.a34 + p.a13 * p.a24 + p.a14 * p.a23
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassReport {
    pub class: MatrixClass,
    /// The sign-definite row (class 1 and 2).
    pub witness_row: Option<usize>,
    /// `permutation[i]` is the original index placed at canonical position `i`,
    /// i.e. the canonical matrix is `A.permuted(&permutation)` (class 3).
    pub permutation: Option<[usize; 4]>,
    pub canonical_params: Option<CanonicalParams>,
    pub invariant_i: Option<f64>,
}

/// Lexicographically ordered permutations of `0..4`.
pub fn permutations4() -> Vec<[usize; 4]> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    let mut seen = [false; 4];
                    if p.iter().all(|&i| !std::mem::replace(&mut seen[i], true)) {
                        out.push(p);
                    }
                }
            }
        }
    }
    out
}

/// Reads the canonical parameters if `b` has the canonical sign pattern
/// (zeros match either sign).
fn canonical_params_of(b: &SkewMatrix) -> Option<CanonicalParams> {
    let p = CanonicalParams {
        a12: b.get(0, 1),
        a13: b.get(0, 2),
        a14: -b.get(0, 3),
        a23: b.get(1, 2),
        a24: b.get(1, 3),
        a34: b.get(2, 3),
    };
    p.to_array().iter().all(|&v| v >= 0.0).then_some(p)
}

pub fn classify(a: &SkewMatrix) -> Result<ClassReport, ClassifyError> {
    if a.dim() != 4 {
        return Err(ClassifyError::WrongDimension(a.dim()));
    }
    // a zero row counts as nonnegative, so it lands in class 1
    if let Some(row) = (0..4).find(|&i| a.row(i).iter().all(|&v| v >= 0.0)) {
        return Ok(ClassReport {
            class: MatrixClass::Class1,
            witness_row: Some(row),
            permutation: None,
            canonical_params: None,
            invariant_i: None,
        });
    }
    if let Some(row) = (0..4).find(|&i| a.row(i).iter().all(|&v| v <= 0.0)) {
        return Ok(ClassReport {
            class: MatrixClass::Class2,
            witness_row: Some(row),
            permutation: None,
            canonical_params: None,
            invariant_i: None,
        });
    }
    for perm in permutations4() {
        if let Some(params) = canonical_params_of(&a.permuted(&perm)) {
            return Ok(ClassReport {
                class: MatrixClass::Class3,
                witness_row: None,
                permutation: Some(perm),
                canonical_params: Some(params),
                invariant_i: Some(invariant_i(params)),
            });
        }
    }
    Err(ClassifyError::NoCanonicalForm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::pfaffian4;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn all_half() -> SkewMatrix {
        CanonicalParams::uniform(0.5).to_matrix().unwrap()
    }

    fn random_skew4(rng: &mut impl Rng) -> SkewMatrix {
        let v: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..=1.0)).collect();
        SkewMatrix::from_upper(4, |i, j| v[i * 4 + j]).unwrap()
    }

    #[test]
    fn all_half_is_canonical_class3() {
        let r = classify(&all_half()).unwrap();
        assert_eq!(r.class, MatrixClass::Class3);
        assert_eq!(r.permutation, Some([0, 1, 2, 3]));
        assert_eq!(r.canonical_params, Some(CanonicalParams::uniform(0.5)));
        assert!((r.invariant_i.unwrap() - 0.25).abs() <= 1e-15);
    }

    #[test]
    fn class1_and_class2_examples() {
        let a = SkewMatrix::new(&[
            vec![0.0, 0.5, 0.5, 0.5],
            vec![-0.5, 0.0, 0.3, -0.2],
            vec![-0.5, -0.3, 0.0, 0.7],
            vec![-0.5, 0.2, -0.7, 0.0],
        ])
        .unwrap();
        let r = classify(&a).unwrap();
        assert_eq!((r.class, r.witness_row), (MatrixClass::Class1, Some(0)));
        // negation: row 0 becomes nonpositive, the rest stay mixed
        let r = classify(&a.negated()).unwrap();
        assert_eq!((r.class, r.witness_row), (MatrixClass::Class2, Some(0)));
    }

    #[test]
    fn zero_matrix_is_class1() {
        let r = classify(&SkewMatrix::zero(4).unwrap()).unwrap();
        assert_eq!((r.class, r.witness_row), (MatrixClass::Class1, Some(0)));
    }

    #[test]
    fn wrong_dimension() {
        assert_eq!(
            classify(&SkewMatrix::zero(3).unwrap()),
            Err(ClassifyError::WrongDimension(3))
        );
    }

    #[test]
    fn invariant_examples() {
        assert!((invariant_i(CanonicalParams::uniform(0.5)) - 0.25).abs() <= 1e-15);
        let p = CanonicalParams::from_array([1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(invariant_i(p), -1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..1000 {
            let p = CanonicalParams::from_array(std::array::from_fn(|_| rng.random::<f64>()));
            let pf = pfaffian4(&p.to_matrix().unwrap());
            assert!((invariant_i(p) + pf).abs() <= 1e-14);
        }
    }

    #[test]
    fn every_random_matrix_gets_a_verdict() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let mut counts = [0usize; 3];
        for _ in 0..100_000 {
            let a = random_skew4(&mut rng);
            let r = classify(&a).expect("class 3 matrices always admit the canonical form");
            counts[r.class.number() as usize - 1] += 1;
            // brute-force row scans
            let nonneg = (0..4).any(|i| a.row(i).iter().all(|&v| v >= 0.0));
            let nonpos = (0..4).any(|i| a.row(i).iter().all(|&v| v <= 0.0));
            assert_eq!(r.class == MatrixClass::Class1, nonneg);
            assert_eq!(r.class == MatrixClass::Class2, !nonneg && nonpos);
            if let Some(perm) = r.permutation {
                let c = a.permuted(&perm);
                assert_eq!(r.canonical_params.unwrap().to_matrix().unwrap(), c);
                let again = classify(&c).unwrap();
                assert_eq!(again.permutation, Some([0, 1, 2, 3]));
            }
        }
        assert!(counts.iter().all(|&c| c > 0), "{counts:?}");
    }

    proptest! {
        #[test]
        fn relabeling_invariance(vals in proptest::collection::vec(-1.0f64..=1.0, 16), pi in 0usize..24) {
            let a = SkewMatrix::from_upper(4, |i, j| vals[i * 4 + j]).unwrap();
            let perm = permutations4()[pi];
            let b = a.permuted(&perm);
            let ra = classify(&a).unwrap();
            let rb = classify(&b).unwrap();
            prop_assert_eq!(ra.class, rb.class);
            if let Some(w) = rb.witness_row {
                // the witness of b is a valid witness row of a after relabeling
                let row = a.row(perm[w]);
                match rb.class {
                    MatrixClass::Class1 => prop_assert!(row.iter().all(|&v| v >= 0.0)),
                    _ => prop_assert!(row.iter().all(|&v| v <= 0.0)),
                }
            }
            if ra.class == MatrixClass::Class3 {
                // both land on a canonical form with the same invariant
                prop_assert!((ra.invariant_i.unwrap() - rb.invariant_i.unwrap()).abs() < 1e-14);
            }
        }
    }
}
