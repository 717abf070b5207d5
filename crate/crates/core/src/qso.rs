//! Quadratic stochastic operators: heredity tensors, the Volterra subclass
//! and its skew-symmetric matrix form `(Vx)_k = x_k (1 + (Ax)_k)`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{log_sum_exp, CompensatedSum};
use crate::simplex::{exp_normalized, FaceId, LogSimplexPoint, SimplexError, SimplexPoint};

/// Row-stochasticity tolerance of a heredity tensor.
pub const TENSOR_SUM_TOL: f64 = 1e-12;
/// Entries `p[i][j][k]` with `k ∉ {i, j}` below this count as zero.
pub const VOLTERRA_ZERO_TOL: f64 = 1e-15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QsoError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square")]
    NotSquare,
    #[error("entries ({i},{j}) and ({j},{i}) are not exact negatives")]
    NotSkew { i: usize, j: usize },
    #[error("entry ({i},{j}) = {value} is outside [-1, 1]")]
    EntryOutOfRange { i: usize, j: usize, value: f64 },
    #[error("invalid heredity tensor: {0}")]
    InvalidTensor(String),
    #[error("tensor is not Volterra: p[{i}][{j}][{k}] = {value:e}")]
    NotVolterra { i: usize, j: usize, k: usize, value: f64 },
    #[error("degenerate growth factor in coordinate {index}")]
    DegenerateFactor { index: usize },
    #[error(transparent)]
    Simplex(#[from] SimplexError),
}

/// Skew-symmetric matrix with entries in `[-1, 1]` defining a Volterra operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SkewMatrix {
    m: usize,
    a: Vec<f64>,
}

impl SkewMatrix {
    /// Validates exact skew-symmetry and the entry bound `|a_ij| ≤ 1`.
    pub fn new(rows: &[Vec<f64>]) -> Result<Self, QsoError> {
        let m = rows.len();
        if !(crate::simplex::MIN_DIM..=crate::simplex::MAX_DIM).contains(&m) {
            return Err(SimplexError::UnsupportedDimension(m).into());
        }
        if rows.iter().any(|r| r.len() != m) {
            return Err(QsoError::NotSquare);
        }
        for i in 0..m {
            for j in 0..m {
                let v = rows[i][j];
                if !(v.abs() <= 1.0) {
                    return Err(QsoError::EntryOutOfRange { i, j, value: v });
                }
                if v != -rows[j][i] {
                    return Err(QsoError::NotSkew { i, j });
                }
            }
        }
        Ok(Self {
            m,
            a: rows.iter().flatten().copied().collect(),
        })
    }

    /// Builds the matrix from its strict upper triangle `f(i, j)`, `i < j`.
    pub fn from_upper(m: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self, QsoError> {
        let mut rows = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in i + 1..m {
                rows[i][j] = f(i, j);
                rows[j][i] = -rows[i][j];
            }
        }
        Self::new(&rows)
    }

    pub fn zero(m: usize) -> Result<Self, QsoError> {
        Self::from_upper(m, |_, _| 0.0)
    }

    /// The three-parameter operator on `S^2`:
    /// `(x(1+ay-bz), y(1-ax+cz), z(1+bx-cy))`, i.e. `a12 = a`, `a13 = -b`, `a23 = c`.
    pub fn volterra3(a: f64, b: f64, c: f64) -> Result<Self, QsoError> {
        Self::new(&[vec![0.0, a, -b], vec![-a, 0.0, c], vec![b, -c, 0.0]])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.m + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.m..(i + 1) * self.m]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.a.chunks(self.m).map(|r| r.to_vec()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.a.iter().all(|&v| v == 0.0)
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.a.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn negated(&self) -> Self {
        Self {
            m: self.m,
            a: self.a.iter().map(|v| -v).collect(),
        }
    }

    /// `B[i][j] = A[perm[i]][perm[j]]`: relabels index `perm[i]` as `i`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.m);
        let m = self.m;
        let mut a = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                a[i * m + j] = self.get(perm[i], perm[j]);
            }
        }
        Self { m, a }
    }

    /// Principal submatrix on the face's support (in support order).
    pub fn restrict(&self, face: &FaceId) -> Self {
        let idx = face.indices();
        let m = idx.len();
        let mut a = vec![0.0; m * m];
        for (r, &i) in idx.iter().enumerate() {
            for (c, &j) in idx.iter().enumerate() {
                a[r * m + c] = self.get(i, j);
            }
        }
        Self { m, a }
    }

    /// `Ax` with compensated row sums.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.m).map(|k| self.row_dot(k, x)).collect()
    }

    #[inline]
    fn row_dot(&self, k: usize, x: &[f64]) -> f64 {
        let mut acc = CompensatedSum::new();
        for (a, xi) in self.row(k).iter().zip(x) {
            acc.add(a * xi);
        }
        acc.value()
    }

    /// The Volterra heredity tensor of this matrix.
    ///
    /// Expanding `Σ p_{ij,k} x_i x_j` for a Volterra tensor gives
    /// `x_k (1 + Σ_i (2 p_{ki,k} - 1) x_i)`, so `p_{ki,k} = (1 + a_ki) / 2`.
    pub fn to_tensor(&self) -> HeredityTensor {
        let m = self.m;
        let mut p = vec![0.0; m * m * m];
        for i in 0..m {
            p[(i * m + i) * m + i] = 1.0;
            for j in 0..m {
                if i == j {
                    continue;
                }
                // parents (i, j): offspring i with (1 + a_ij)/2, j with (1 + a_ji)/2
                p[(i * m + j) * m + i] = 0.5 * (1.0 + self.get(i, j));
                p[(i * m + j) * m + j] = 0.5 * (1.0 + self.get(j, i));
            }
        }
        HeredityTensor { m, p }
    }
}

impl TryFrom<Vec<Vec<f64>>> for SkewMatrix {
    type Error = QsoError;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self, Self::Error> {
        Self::new(&rows)
    }
}

impl From<SkewMatrix> for Vec<Vec<f64>> {
    fn from(a: SkewMatrix) -> Self {
        a.rows()
    }
}

/// Heredity coefficients `p[i][j][k]`: probability that parents of types `i`
/// and `j` produce an offspring of type `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct HeredityTensor {
    m: usize,
    p: Vec<f64>,
}

impl HeredityTensor {
    /// `data` is laid out as `p[(i * m + j) * m + k]`.
    pub fn new(m: usize, data: Vec<f64>) -> Result<Self, QsoError> {
        if !(crate::simplex::MIN_DIM..=crate::simplex::MAX_DIM).contains(&m) {
            return Err(SimplexError::UnsupportedDimension(m).into());
        }
        if data.len() != m * m * m {
            return Err(QsoError::DimensionMismatch {
                expected: m * m * m,
                found: data.len(),
            });
        }
        for i in 0..m {
            for j in 0..m {
                let row = &data[(i * m + j) * m..(i * m + j + 1) * m];
                if let Some(k) = row.iter().position(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(QsoError::InvalidTensor(format!(
                        "p[{i}][{j}][{k}] = {} is not a probability",
                        row[k]
                    )));
                }
                let s = crate::numeric::compensated_sum(row.iter().copied());
                if (s - 1.0).abs() > TENSOR_SUM_TOL {
                    return Err(QsoError::InvalidTensor(format!(
                        "Σ_k p[{i}][{j}][k] = {s}"
                    )));
                }
            }
        }
        Ok(Self { m, p: data })
    }

    pub fn from_nested(p: &[Vec<Vec<f64>>]) -> Result<Self, QsoError> {
        let m = p.len();
        let mut data = Vec::with_capacity(m * m * m);
        for plane in p {
            if plane.len() != m {
                return Err(QsoError::InvalidTensor("ragged tensor".into()));
            }
            for row in plane {
                if row.len() != m {
                    return Err(QsoError::InvalidTensor("ragged tensor".into()));
                }
                data.extend_from_slice(row);
            }
        }
        Self::new(m, data)
    }

    /// Tensor of the identity map (Volterra tensor of the zero matrix).
    pub fn identity(m: usize) -> Result<Self, QsoError> {
        Ok(SkewMatrix::zero(m)?.to_tensor())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.p[(i * self.m + j) * self.m + k]
    }

    /// `q_{ij,k} = (p_{ij,k} + p_{ji,k}) / 2`; the operator is unchanged.
    pub fn symmetrize(&self) -> Self {
        let m = self.m;
        let mut q = vec![0.0; m * m * m];
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    q[(i * m + j) * m + k] = 0.5 * (self.get(i, j, k) + self.get(j, i, k));
                }
            }
        }
        Self { m, p: q }
    }

    pub fn is_symmetric(&self) -> bool {
        let m = self.m;
        (0..m).all(|i| (0..m).all(|j| (0..m).all(|k| self.get(i, j, k) == self.get(j, i, k))))
    }

    /// `(Vx)_k = Σ_{i,j} p_{ij,k} x_i x_j`, renormalized.
    pub fn apply(&self, x: &SimplexPoint) -> Result<SimplexPoint, QsoError> {
        let m = self.m;
        if x.dim() != m {
            return Err(QsoError::DimensionMismatch {
                expected: m,
                found: x.dim(),
            });
        }
        let xs = x.coords();
        let image: Vec<f64> = (0..m)
            .map(|k| {
                let mut acc = CompensatedSum::new();
                for i in 0..m {
                    for j in 0..m {
                        acc.add(self.get(i, j, k) * xs[i] * xs[j]);
                    }
                }
                acc.value()
            })
            .collect();
        Ok(SimplexPoint::renormalized(image))
    }

    pub fn is_volterra(&self) -> bool {
        self.first_non_volterra_entry().is_none()
    }

    fn first_non_volterra_entry(&self) -> Option<(usize, usize, usize, f64)> {
        let m = self.m;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let v = self.get(i, j, k);
                    if k != i && k != j && v > VOLTERRA_ZERO_TOL {
                        return Some((i, j, k, v));
                    }
                }
            }
        }
        None
    }

    /// Skew matrix with `apply_volterra(A, x) == self.apply(x)`.
    ///
    /// The coefficient of `x_k x_i` in `(Vx)_k` is `p_{ki,k} + p_{ik,k}`, so
    /// `a_ki = p_{ki,k} + p_{ik,k} - 1` (twice the symmetrized entry, minus one).
    pub fn to_skew(&self) -> Result<SkewMatrix, QsoError> {
        if let Some((i, j, k, value)) = self.first_non_volterra_entry() {
            return Err(QsoError::NotVolterra { i, j, k, value });
        }
        SkewMatrix::from_upper(self.m, |k, i| {
            (self.get(k, i, k) + self.get(i, k, k) - 1.0).clamp(-1.0, 1.0)
        })
    }
}

/// Log-space Volterra stepper with preallocated scratch buffers.
#[derive(Debug, Clone)]
pub struct VolterraStepper {
    matrix: SkewMatrix,
    /// `ln(1 + a_ki)`, `-inf` where `a_ki = -1`.
    log_one_plus: Vec<f64>,
    lin: Vec<f64>,
    next: Vec<f64>,
    terms: Vec<f64>,
    /// `A = 0`: the operator is the identity and the state is left untouched.
    identity: bool,
}

impl VolterraStepper {
    pub fn new(matrix: SkewMatrix) -> Self {
        let m = matrix.dim();
        let log_one_plus = (0..m * m).map(|idx| matrix.a[idx].ln_1p()).collect();
        Self {
            identity: matrix.is_zero(),
            matrix,
            log_one_plus,
            lin: vec![0.0; m],
            next: vec![0.0; m],
            terms: vec![0.0; m],
        }
    }

    pub fn matrix(&self) -> &SkewMatrix {
        &self.matrix
    }

    /// Linear coordinates of the state passed to the last [`step`](Self::step).
    pub fn last_linear(&self) -> &[f64] {
        &self.lin
    }

    /// Advances normalized log coordinates in place by one application of the
    /// operator. Returns the log-sum-exp of the unnormalized image, which is
    /// zero in exact arithmetic.
    pub fn step(&mut self, logs: &mut [f64]) -> Result<f64, QsoError> {
        let m = self.matrix.dim();
        debug_assert_eq!(logs.len(), m);
        exp_normalized(logs, &mut self.lin);
        if self.identity {
            return Ok(0.0);
        }
        for k in 0..m {
            if logs[k] == f64::NEG_INFINITY {
                self.next[k] = f64::NEG_INFINITY;
                continue;
            }
            let d = self.matrix.row_dot(k, &self.lin);
            let growth = if d > -0.5 {
                d.ln_1p()
            } else {
                // 1 + (Ax)_k = Σ_i (1 + a_ki) x_i: all terms nonnegative, no cancellation
                for i in 0..m {
                    self.terms[i] = self.log_one_plus[k * m + i] + logs[i];
                }
                log_sum_exp(&self.terms)
            };
            let v = logs[k] + growth;
            if v.is_nan() || v == f64::NEG_INFINITY {
                return Err(QsoError::DegenerateFactor { index: k });
            }
            self.next[k] = v;
        }
        let norm = log_sum_exp(&self.next);
        if !norm.is_finite() {
            return Err(QsoError::DegenerateFactor { index: 0 });
        }
        for (l, n) in logs.iter_mut().zip(&self.next) {
            *l = n - norm;
        }
        Ok(norm)
    }
}

fn check_dims(a: &SkewMatrix, m: usize) -> Result<(), QsoError> {
    if a.dim() != m {
        Err(QsoError::DimensionMismatch {
            expected: a.dim(),
            found: m,
        })
    } else {
        Ok(())
    }
}

/// Unnormalized image `x_k (1 + (Ax)_k)`; sums to one in exact arithmetic.
pub fn volterra_image_unnormalized(a: &SkewMatrix, x: &SimplexPoint) -> Result<Vec<f64>, QsoError> {
    check_dims(a, x.dim())?;
    let xs = x.coords();
    let m = a.dim();
    Ok((0..m)
        .map(|k| {
            if xs[k] == 0.0 {
                return 0.0;
            }
            let d = a.row_dot(k, xs);
            let factor = if d > -0.5 {
                1.0 + d
            } else {
                let mut acc = CompensatedSum::new();
                for i in 0..m {
                    acc.add((1.0 + a.get(k, i)) * xs[i]);
                }
                acc.value()
            };
            xs[k] * factor
        })
        .collect())
}

/// `(Vx)_k = x_k (1 + (Ax)_k)`, renormalized. Zero coordinates stay exactly zero.
pub fn apply_volterra(a: &SkewMatrix, x: &SimplexPoint) -> Result<SimplexPoint, QsoError> {
    let image = volterra_image_unnormalized(a, x)?;
    Ok(SimplexPoint::renormalized(image))
}

/// Log-space counterpart of [`apply_volterra`].
pub fn apply_volterra_log(a: &SkewMatrix, x: &LogSimplexPoint) -> Result<LogSimplexPoint, QsoError> {
    check_dims(a, x.dim())?;
    let mut stepper = VolterraStepper::new(a.clone());
    let mut logs = x.log_coords().to_vec();
    stepper.step(&mut logs)?;
    Ok(LogSimplexPoint::from_normalized_unchecked(logs))
}

/// The three-parameter operator on `S^2`; see [`SkewMatrix::volterra3`].
pub fn volterra3(a: f64, b: f64, c: f64, x: &SimplexPoint) -> Result<SimplexPoint, QsoError> {
    if x.dim() != 3 {
        return Err(QsoError::DimensionMismatch {
            expected: 3,
            found: x.dim(),
        });
    }
    let xs = x.coords();
    let (p, q, r) = (xs[0], xs[1], xs[2]);
    let image = vec![
        p * (1.0 + a * q - b * r),
        q * (1.0 - a * p + c * r),
        r * (1.0 + b * p - c * q),
    ];
    Ok(SimplexPoint::renormalized(image))
}
