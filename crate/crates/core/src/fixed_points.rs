//! Fixed points of Volterra operators and their linear stability.
//!
//! A point `p` supported on a face `S` is fixed iff `(Ap)_i = 0` for every
//! `i ∈ S`. On a three-element face the restricted skew matrix has the
//! one-dimensional kernel `(w, -v, u)`, which yields at most one face-interior
//! fixed point. The Jacobian of `x ↦ x ∘ (1 + Ax)` is
//! `J_kl = δ_kl (1 + (Ap)_k) + p_k a_kl`; off-support rows are diagonal, so
//! the spectrum splits into in-face eigenvalues and transverse multipliers
//! `1 + (Ap)_k`.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{eigenvalues, pfaffian4, skew3_kernel, skew4_rank2_kernel, tangent_reduction, Matrix};
use crate::qso::{apply_volterra, QsoError, SkewMatrix};
use crate::simplex::{log_monomial_from_logs, FaceId, SimplexError, SimplexPoint};

/// Multiplier moduli this close to one are reported as non-hyperbolic.
pub const HYPERBOLIC_TOL: f64 = 1e-9;
/// Fixed-point residual tolerance `‖V(p) - p‖_∞`.
pub const FIXED_POINT_TOL: f64 = 1e-10;
/// `|Pf(A)|` below this is treated as a singular 4×4 matrix.
pub const PFAFFIAN_ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FixedPointError {
    #[error("point is not fixed (residual {residual:e})")]
    NotAFixedPoint { residual: f64 },
    #[error("fixed point is {0:?}, not repelling")]
    NotRepelling(FixedPointType),
    #[error("expected a face with 3 indices, got {0}")]
    WrongFaceSize(usize),
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error(transparent)]
    Qso(#[from] QsoError),
    #[error(transparent)]
    Simplex(#[from] SimplexError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum FixedPointType {
    Attracting,
    Repelling,
    Saddle,
    NonHyperbolic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointRecord {
    pub point: SimplexPoint,
    pub support: FaceId,
    /// `(k, 1 + (A p)_k)` for every index `k` off the support, in index order.
    pub transverse_multipliers: Vec<(usize, f64)>,
    /// Eigenvalues of the Jacobian restricted to the tangent space of the face.
    pub in_face_eigenvalues: Vec<Complex64>,
    pub kind: FixedPointType,
    /// The point lies in a continuum of fixed points (a representative is reported).
    pub continuum: bool,
}

impl FixedPointRecord {
    /// All multiplier moduli (in-face first, then transverse).
    pub fn moduli(&self) -> Vec<f64> {
        self.in_face_eigenvalues
            .iter()
            .map(|c| c.norm())
            .chain(self.transverse_multipliers.iter().map(|(_, m)| m.abs()))
            .collect()
    }

    pub fn transverse(&self, k: usize) -> Option<f64> {
        self.transverse_multipliers.iter().find(|(i, _)| *i == k).map(|(_, m)| *m)
    }
}

/// Hyperbolic type from multiplier moduli.
pub fn classify_moduli(moduli: &[f64]) -> FixedPointType {
    if moduli.iter().any(|m| (m - 1.0).abs() <= HYPERBOLIC_TOL) {
        FixedPointType::NonHyperbolic
    } else if moduli.iter().all(|&m| m > 1.0) {
        FixedPointType::Repelling
    } else if moduli.iter().all(|&m| m < 1.0) {
        FixedPointType::Attracting
    } else {
        FixedPointType::Saddle
    }
}

/// Full Jacobian of the (unnormalized) Volterra map at `p`.
pub fn jacobian(a: &SkewMatrix, p: &SimplexPoint) -> Matrix {
    let m = a.dim();
    let ap = a.mul_vec(p.coords());
    let x = p.coords();
    (0..m)
        .map(|k| {
            (0..m)
                .map(|l| if k == l { 1.0 + ap[k] } else { 0.0 } + x[k] * a.get(k, l))
                .collect()
        })
        .collect()
}

fn residual(a: &SkewMatrix, p: &SimplexPoint) -> Result<f64, QsoError> {
    Ok(apply_volterra(a, p)?.max_abs_diff(p))
}

/// Eigenvalues of the Jacobian on the tangent space `{Σ v_i = 0}` (the
/// eigenvalue `1` transverse to the simplex plane is excluded).
pub fn jacobian_spectrum(a: &SkewMatrix, p: &SimplexPoint) -> Result<Vec<Complex64>, FixedPointError> {
    let r = residual(a, p)?;
    if r > FIXED_POINT_TOL {
        return Err(FixedPointError::NotAFixedPoint { residual: r });
    }
    Ok(eigenvalues(&tangent_reduction(&jacobian(a, p))))
}

/// Builds the record for a fixed point supported on `support`.
fn analyze(a: &SkewMatrix, point: SimplexPoint, support: FaceId, continuum: bool) -> FixedPointRecord {
    let m = a.dim();
    let ap = a.mul_vec(point.coords());
    let transverse_multipliers: Vec<(usize, f64)> = (0..m)
        .filter(|k| !support.contains(*k))
        .map(|k| (k, 1.0 + ap[k]))
        .collect();
    let j = jacobian(a, &point);
    let idx = support.indices();
    let j_face: Matrix = idx.iter().map(|&r| idx.iter().map(|&c| j[r][c]).collect()).collect();
    let in_face_eigenvalues = eigenvalues(&tangent_reduction(&j_face));
    let moduli: Vec<f64> = in_face_eigenvalues
        .iter()
        .map(|c| c.norm())
        .chain(transverse_multipliers.iter().map(|(_, v)| v.abs()))
        .collect();
    FixedPointRecord {
        kind: classify_moduli(&moduli),
        point,
        support,
        transverse_multipliers,
        in_face_eigenvalues,
        continuum,
    }
}

/// Embeds weights given on a face's support into a point of `S^{m-1}`.
fn embed(m: usize, face: &FaceId, weights: &[f64]) -> Result<SimplexPoint, SimplexError> {
    let mut w = vec![0.0; m];
    for (&i, &v) in face.indices().iter().zip(weights) {
        w[i] = v;
    }
    SimplexPoint::from_weights(&w)
}

/// The fixed point in the relative interior of a three-element face, if any.
pub fn face_fixed_point(a: &SkewMatrix, face: &FaceId) -> Result<Option<FixedPointRecord>, FixedPointError> {
    if face.len() != 3 {
        return Err(FixedPointError::WrongFaceSize(face.len()));
    }
    if let Some(&i) = face.indices().iter().find(|&&i| i >= a.dim()) {
        return Err(SimplexError::InvalidFace(format!("index {i} out of range")).into());
    }
    let mut k = skew3_kernel(&a.restrict(face));
    if k.iter().all(|&v| v < 0.0) {
        k = k.map(|v| -v);
    }
    if !k.iter().all(|&v| v > 0.0) {
        return Ok(None);
    }
    let point = embed(a.dim(), face, &k)?;
    Ok(Some(analyze(a, point, face.clone(), false)))
}

/// Result of [`all_fixed_points`].
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointInventory {
    pub records: Vec<FixedPointRecord>,
    /// `A = 0`: every point is fixed; only the vertices are listed.
    pub everywhere_fixed: bool,
}

/// Vertices, edge-interior, face-interior and interior fixed points, in that
/// order. Continua of fixed points (zero edges or faces, singular `A` for
/// `m = 4`) are represented by one point each and flagged.
pub fn all_fixed_points(a: &SkewMatrix) -> Result<FixedPointInventory, FixedPointError> {
    let m = a.dim();
    if !(2..=4).contains(&m) {
        return Err(FixedPointError::UnsupportedDimension(m));
    }
    let mut records = Vec::new();
    for i in 0..m {
        let v = SimplexPoint::vertex(m, i)?;
        records.push(analyze(a, v, FaceId::new(&[i], m)?, false));
    }
    if a.is_zero() {
        return Ok(FixedPointInventory {
            records,
            everywhere_fixed: true,
        });
    }
    // the restriction to an edge vanishes iff a_ij = 0, and then the edge is fixed pointwise
    for edge in FaceId::all_of_size(m, 2) {
        let [i, j] = [edge.indices()[0], edge.indices()[1]];
        if a.get(i, j) == 0.0 {
            let p = embed(m, &edge, &[0.5, 0.5])?;
            records.push(analyze(a, p, edge, true));
        }
    }
    if m >= 3 {
        for face in FaceId::all_of_size(m, 3) {
            if a.restrict(&face).is_zero() {
                let p = embed(m, &face, &[1.0, 1.0, 1.0])?;
                records.push(analyze(a, p, face, true));
            } else if let Some(rec) = face_fixed_point(a, &face)? {
                records.push(rec);
            }
        }
    }
    if m == 4 && pfaffian4(a).abs() <= PFAFFIAN_ZERO_TOL {
        if let Some(p) = interior_kernel_point(a)? {
            records.push(analyze(a, p, FaceId::full(4), true));
        }
    }
    Ok(FixedPointInventory {
        records,
        everywhere_fixed: false,
    })
}

/// Midpoint of the segment `ker A ∩ int S^3` for a singular nonzero 4×4 `A`.
fn interior_kernel_point(a: &SkewMatrix) -> Result<Option<SimplexPoint>, FixedPointError> {
    let Some([k1, k2]) = skew4_rank2_kernel(a) else {
        return Ok(None);
    };
    let s1: f64 = k1.iter().sum();
    let s2: f64 = k2.iter().sum();
    if s1 == 0.0 && s2 == 0.0 {
        return Ok(None);
    }
    // base point with unit sum, direction inside the kernel with zero sum
    let base: [f64; 4] = if s1.abs() >= s2.abs() {
        k1.map(|v| v / s1)
    } else {
        k2.map(|v| v / s2)
    };
    let dir: [f64; 4] = std::array::from_fn(|i| s2 * k1[i] - s1 * k2[i]);
    let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for i in 0..4 {
        if dir[i] > 0.0 {
            lo = lo.max(-base[i] / dir[i]);
        } else if dir[i] < 0.0 {
            hi = hi.min(-base[i] / dir[i]);
        } else if base[i] <= 0.0 {
            return Ok(None);
        }
    }
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Ok(None);
    }
    let t = 0.5 * (lo + hi);
    let w: Vec<f64> = (0..4).map(|i| (base[i] + t * dir[i]).max(0.0)).collect();
    let p = SimplexPoint::from_weights(&w)?;
    Ok(p.is_interior().then_some(p))
}

/// Monomial `∏ x_i^{p_i}` whose exponents are the coordinates of a repelling
/// fixed point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixedPointLyapunov {
    pub exponents: Vec<f64>,
}

impl FixedPointLyapunov {
    pub fn log_value(&self, x: &SimplexPoint) -> Result<f64, SimplexError> {
        log_monomial_from_logs(x.to_log().log_coords(), &self.exponents)
    }

    pub fn value(&self, x: &SimplexPoint) -> Result<f64, SimplexError> {
        self.log_value(x).map(f64::exp)
    }
}

pub fn repelling_point_lyapunov(rec: &FixedPointRecord) -> Result<FixedPointLyapunov, FixedPointError> {
    if rec.kind != FixedPointType::Repelling {
        return Err(FixedPointError::NotRepelling(rec.kind));
    }
    Ok(FixedPointLyapunov {
        exponents: rec.point.coords().to_vec(),
    })
}
