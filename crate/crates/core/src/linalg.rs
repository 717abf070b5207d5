//! Dense linear algebra for matrices of size at most four.
//!
//! Eigenvalues come from the characteristic polynomial with closed-form
//! roots (quadratic formula, Cardano / trigonometric cubic) followed by a
//! Newton polish of the real cubic root.

use num_complex::Complex64;

use crate::qso::SkewMatrix;

pub type Matrix = Vec<Vec<f64>>;

/// Roots of `x² + b x + c`.
pub fn quadratic_roots(b: f64, c: f64) -> [Complex64; 2] {
    let mut disc = b * b - 4.0 * c;
    // a discriminant at rounding level is a double root
    if disc.abs() <= 64.0 * f64::EPSILON * (b * b).max(4.0 * c.abs()) {
        disc = 0.0;
    }
    if disc >= 0.0 {
        let s = disc.sqrt();
        let q = -0.5 * (b + if b >= 0.0 { s } else { -s });
        if q == 0.0 {
            return [Complex64::new(0.0, 0.0); 2];
        }
        let (r1, r2) = (q, c / q);
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        [Complex64::new(lo, 0.0), Complex64::new(hi, 0.0)]
    } else {
        let re = -0.5 * b;
        let im = 0.5 * (-disc).sqrt();
        [Complex64::new(re, -im), Complex64::new(re, im)]
    }
}

/// Roots of `x³ + b x² + c x + d`.
pub fn cubic_roots(b: f64, c: f64, d: f64) -> [Complex64; 3] {
    let r = cubic_real_root(b, c, d);
    // deflate: x³ + b x² + c x + d = (x - r)(x² + (b + r) x + (c + r (b + r)))
    let b2 = b + r;
    let c2 = c + r * b2;
    let [q1, q2] = quadratic_roots(b2, c2);
    [Complex64::new(r, 0.0), q1, q2]
}

fn cubic_real_root(b: f64, c: f64, d: f64) -> f64 {
    let shift = b / 3.0;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let half_q = 0.5 * q;
    let disc = half_q * half_q + (p / 3.0).powi(3);
    let t = if disc >= 0.0 {
        let s = disc.sqrt();
        let u = (-half_q - if half_q >= 0.0 { s } else { -s }).cbrt();
        if u == 0.0 {
            0.0
        } else {
            u - p / (3.0 * u)
        }
    } else {
        // three real roots; take the one of largest magnitude for a stable deflation
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = ((3.0 * q) / (p * m)).clamp(-1.0, 1.0);
        let theta = arg.acos() / 3.0;
        (0..3)
            .map(|k| m * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos())
            .max_by(|x, y| x.abs().total_cmp(&y.abs()))
            .unwrap()
    };
    let mut x = t - shift;
    for _ in 0..3 {
        let f = ((x + b) * x + c) * x + d;
        let df = (3.0 * x + 2.0 * b) * x + c;
        if df == 0.0 || f == 0.0 {
            break;
        }
        let nx = x - f / df;
        if !nx.is_finite() {
            break;
        }
        x = nx;
    }
    x
}

/// Monic characteristic polynomial coefficients `[c_{n-1}, …, c_0]` of a
/// matrix of size at most three.
fn char_poly(m: &Matrix) -> Vec<f64> {
    match m.len() {
        0 => vec![],
        1 => vec![-m[0][0]],
        2 => {
            let tr = m[0][0] + m[1][1];
            let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            vec![-tr, det]
        }
        3 => {
            let tr = m[0][0] + m[1][1] + m[2][2];
            let minors = (m[0][0] * m[1][1] - m[0][1] * m[1][0])
                + (m[0][0] * m[2][2] - m[0][2] * m[2][0])
                + (m[1][1] * m[2][2] - m[1][2] * m[2][1]);
            vec![-tr, minors, -det3(m)]
        }
        n => panic!("char_poly supports n <= 3, got {n}"),
    }
}

pub fn det3(m: &Matrix) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Eigenvalues of a real square matrix of size at most three, sorted by
/// real part then imaginary part.
///
/// # Panics
/// For larger matrices.
pub fn eigenvalues(m: &Matrix) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = match char_poly(m).as_slice() {
        [] => vec![],
        [c0] => vec![Complex64::new(-c0, 0.0)],
        [b, c] => quadratic_roots(*b, *c).to_vec(),
        [b, c, d] => cubic_roots(*b, *c, *d).to_vec(),
        _ => unreachable!(),
    };
    out.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    out
}

/// Restriction of a column-stochastic-sum map (`1ᵀ J = 1ᵀ`) to the tangent
/// space `{Σ v_i = 0}`, in the basis `e_i - e_{n-1}`.
///
/// The spectrum of the result is the spectrum of `J` with one eigenvalue `1`
/// (the one belonging to the left eigenvector `1`) removed.
pub fn tangent_reduction(j: &Matrix) -> Matrix {
    let n = j.len();
    if n == 0 {
        return vec![];
    }
    let last = n - 1;
    (0..last)
        .map(|r| (0..last).map(|c| j[r][c] - j[r][last]).collect())
        .collect()
}

/// Pfaffian of a 4×4 skew matrix: `a12 a34 - a13 a24 + a14 a23`.
pub fn pfaffian4(a: &SkewMatrix) -> f64 {
    assert_eq!(a.dim(), 4);
    a.get(0, 1) * a.get(2, 3) - a.get(0, 2) * a.get(1, 3) + a.get(0, 3) * a.get(1, 2)
}

/// Kernel direction `(w, -v, u)` of `[[0, u, v], [-u, 0, w], [-v, -w, 0]]`.
pub fn skew3_kernel(s: &SkewMatrix) -> [f64; 3] {
    assert_eq!(s.dim(), 3);
    let (u, v, w) = (s.get(0, 1), s.get(0, 2), s.get(1, 2));
    [w, -v, u]
}

/// Basis of the kernel of a 4×4 skew matrix of rank two.
///
/// Rows `p` and `q` of the largest entry `a_pq` span the row space, so the
/// kernel is solved from those two rows with the remaining indices free.
/// Returns `None` for the zero matrix.
pub fn skew4_rank2_kernel(a: &SkewMatrix) -> Option<[[f64; 4]; 2]> {
    assert_eq!(a.dim(), 4);
    let (mut p, mut q, mut best) = (0, 1, 0.0);
    for i in 0..4 {
        for j in i + 1..4 {
            if a.get(i, j).abs() > best {
                (p, q, best) = (i, j, a.get(i, j).abs());
            }
        }
    }
    if best == 0.0 {
        return None;
    }
    let free: Vec<usize> = (0..4).filter(|&k| k != p && k != q).collect();
    let mut basis = [[0.0; 4]; 2];
    for (b, &f) in basis.iter_mut().zip(&free) {
        b[f] = 1.0;
        // row p: a_pq x_q + a_pf x_f = 0 ; row q: a_qp x_p + a_qf x_f = 0
        b[q] = -a.get(p, f) / a.get(p, q);
        b[p] = -a.get(q, f) / a.get(q, p);
    }
    Some(basis)
}

pub fn mat_vec(m: &Matrix, x: &[f64]) -> Vec<f64> {
    m.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}
