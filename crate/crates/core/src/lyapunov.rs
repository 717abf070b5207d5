//! Monomial Lyapunov functions `F(x) = ∏ x_i^{λ_i}`.
//!
//! Along the Volterra map `F(Vx) = F(x) G(x)` with `G(x) = ∏ (1 + (Ax)_i)^{λ_i}`.
//! At a vertex `G(e_j) = ∏_i (1 + a_ij)^{λ_i}`, so `G < 1` at every vertex is
//! the linear system `Σ_i ln(1 + a_ij) λ_i < 0` for each `j`. It is solved as
//! the LP `max t` subject to `Σ_i ln(1 + a_ij) λ_i + t ≤ 0`, `-1 ≤ λ_i ≤ 1`.

use serde::Serialize;
use thiserror::Error;

use crate::ergodic::{run_trajectory, ErgodicError, TrajectoryConfig};
use crate::lp::{maximize, LpError, LpOutcome};
use crate::qso::SkewMatrix;
use crate::simplex::{SimplexError, SimplexPoint};

/// Default required decrease of `ln F` per decade of steps.
pub const DEFAULT_MIN_DECADE_DROP: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LyapunovError {
    #[error("entry a[{}][{}] = ±1 makes log(1 - a) singular", i + 1, j + 1)]
    SingularEntry { i: usize, j: usize },
    #[error("expected {expected} exponents, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("LP solution failed the direct vertex-gain recheck: {0}")]
    InfeasibleNumerics(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Ergodic(#[from] ErgodicError),
    #[error(transparent)]
    Simplex(#[from] SimplexError),
}

/// `b[i][j] = -ln(1 - a_ij)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogGainMatrix {
    pub b: Vec<Vec<f64>>,
}

fn check_entries(a: &SkewMatrix) -> Result<(), LyapunovError> {
    let m = a.dim();
    for i in 0..m {
        for j in 0..m {
            if a.get(i, j).abs() >= 1.0 {
                return Err(LyapunovError::SingularEntry { i, j });
            }
        }
    }
    Ok(())
}

pub fn build_b(a: &SkewMatrix) -> Result<LogGainMatrix, LyapunovError> {
    check_entries(a)?;
    let m = a.dim();
    Ok(LogGainMatrix {
        b: (0..m).map(|i| (0..m).map(|j| -(-a.get(i, j)).ln_1p()).collect()).collect(),
    })
}

/// `ln G(e_j) = Σ_i ln(1 + a_ij) λ_i` for each vertex `j`.
pub fn vertex_log_gains(a: &SkewMatrix, lambda: &[f64]) -> Result<Vec<f64>, LyapunovError> {
    let m = a.dim();
    if lambda.len() != m {
        return Err(LyapunovError::DimensionMismatch {
            expected: m,
            found: lambda.len(),
        });
    }
    check_entries(a)?;
    Ok((0..m)
        .map(|j| (0..m).map(|i| a.get(i, j).ln_1p() * lambda[i]).sum())
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LyapunovCandidate {
    pub lambda: Vec<f64>,
    /// `-max_j ln G(e_j)`, recomputed from `lambda`.
    pub margin: f64,
    /// `G(e_j)`.
    pub vertex_gains: Vec<f64>,
}

impl LyapunovCandidate {
    pub fn from_lambda(a: &SkewMatrix, lambda: Vec<f64>) -> Result<Self, LyapunovError> {
        let logs = vertex_log_gains(a, &lambda)?;
        let margin = -logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            lambda,
            margin,
            vertex_gains: logs.iter().map(|l| l.exp()).collect(),
        })
    }
}

/// Exponents in `[-1, 1]^m` maximizing the vertex-gain margin, or `None` when
/// no strictly feasible `λ` exists.
pub fn synthesize(a: &SkewMatrix) -> Result<Option<LyapunovCandidate>, LyapunovError> {
    check_entries(a)?;
    let m = a.dim();
    // c[j][i] = ln(1 + a_ij); shift μ = λ + 1 ∈ [0, 2] and s = t + shift so the origin is feasible
    let c: Vec<Vec<f64>> = (0..m).map(|j| (0..m).map(|i| a.get(i, j).ln_1p()).collect()).collect();
    let shift = c.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max) + 1.0;
    let mut rows = Vec::with_capacity(2 * m);
    let mut rhs = Vec::with_capacity(2 * m);
    for cj in &c {
        let mut row = cj.clone();
        row.push(1.0);
        rows.push(row);
        rhs.push(cj.iter().sum::<f64>() + shift);
    }
    for i in 0..m {
        let mut row = vec![0.0; m + 1];
        row[i] = 1.0;
        rows.push(row);
        rhs.push(2.0);
    }
    let mut objective = vec![0.0; m + 1];
    objective[m] = 1.0;
    let x = match maximize(&objective, &rows, &rhs)? {
        LpOutcome::Optimal { x, .. } => x,
        LpOutcome::Unbounded => return Err(LyapunovError::InfeasibleNumerics("LP reported unbounded".into())),
    };
    let t = x[m] - shift;
    // t is recovered from the shifted variable, so it is only known to a few ulp of the shift
    if t <= 64.0 * f64::EPSILON * shift {
        return Ok(None);
    }
    // pivoting leaves ulp-level noise on vertices of the box
    let lambda: Vec<f64> = x[..m]
        .iter()
        .map(|mu| {
            let l = (mu - 1.0).clamp(-1.0, 1.0);
            if (l - l.round()).abs() < 1e-12 { l.round() + 0.0 } else { l }
        })
        .collect();
    let cand = LyapunovCandidate::from_lambda(a, lambda)?;
    if !(cand.margin > 0.0) {
        return Err(LyapunovError::InfeasibleNumerics(format!(
            "LP margin {t:e}, recomputed {:e}",
            cand.margin
        )));
    }
    Ok(Some(cand))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DecayVerdict {
    Decaying,
    NotDecaying,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    /// `(n, ln F(V^n x))` at `n = 0, 1, 10, 100, …`.
    pub log_f: Vec<(u64, f64)>,
    /// Change of `ln F` over each decade `[10^k, 10^{k+1}]`.
    pub decade_drift: Vec<f64>,
    pub verdict: DecayVerdict,
}

/// Decaying iff `ln F` drops by at least `min_drop` over every decade after
/// the first (which is treated as transient), with at least two decades judged.
pub fn verify_along_trajectory(
    lambda: &[f64],
    a: &SkewMatrix,
    start: &SimplexPoint,
    steps: u64,
    min_drop: f64,
) -> Result<DecayReport, LyapunovError> {
    if lambda.len() != a.dim() {
        return Err(LyapunovError::DimensionMismatch {
            expected: a.dim(),
            found: lambda.len(),
        });
    }
    let mut cfg = TrajectoryConfig::new(a.clone(), start.clone(), steps);
    cfg.observables.clear();
    cfg.checkpoints.clear();
    cfg.sample_steps = std::iter::once(0)
        .chain(std::iter::successors(Some(1u64), |n| n.checked_mul(10)).take_while(|&n| n <= steps))
        .collect();
    let run = run_trajectory(&cfg)?;
    let log_f: Vec<(u64, f64)> = run
        .log_monomial_trace(lambda)?
        .into_iter()
        .filter(|(n, _)| cfg.sample_steps.contains(n))
        .collect();
    // decades start at n = 1
    let decades: Vec<f64> = log_f.iter().skip(1).map(|&(_, v)| v).collect();
    let decade_drift: Vec<f64> = decades.windows(2).map(|w| w[1] - w[0]).collect();
    let judged = decade_drift.get(1..).unwrap_or(&[]);
    let verdict = if judged.len() >= 2 && judged.iter().all(|&d| d <= -min_drop) {
        DecayVerdict::Decaying
    } else {
        DecayVerdict::NotDecaying
    };
    Ok(DecayReport {
        log_f,
        decade_drift,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::CanonicalParams;
    use crate::qso::apply_volterra;
    use crate::simplex::monomial;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn all_half() -> SkewMatrix {
        CanonicalParams::uniform(0.5).to_matrix().unwrap()
    }

    #[test]
    fn b_examples() {
        let z = build_b(&SkewMatrix::zero(4).unwrap()).unwrap();
        assert!(z.b.iter().flatten().all(|&v| v == 0.0));
        let b = build_b(&all_half()).unwrap();
        assert!((b.b[0][1] - 2f64.ln()).abs() < 1e-15);
        assert!((b.b[0][3] + 1.5f64.ln()).abs() < 1e-15);
        assert!((0..4).all(|i| b.b[i][i] == 0.0));
        let one = SkewMatrix::volterra3(1.0, 0.5, 0.5).unwrap();
        assert_eq!(build_b(&one), Err(LyapunovError::SingularEntry { i: 0, j: 1 }));
    }

    #[test]
    fn skew_link() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..1000 {
            let v: Vec<f64> = (0..16).map(|_| rng.random_range(-0.99..0.99)).collect();
            let a = SkewMatrix::from_upper(4, |i, j| v[i * 4 + j]).unwrap();
            let b = build_b(&a).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    assert!((a.get(i, j).ln_1p() + b.b[j][i]).abs() <= 1e-14);
                }
            }
        }
    }

    #[test]
    fn hand_lambda_is_feasible() {
        let logs = vertex_log_gains(&all_half(), &[1.0, 1.0, 0.5, 1.5]).unwrap();
        // three-decimal roundings
        let want = [-0.432, -0.981, -0.229, -0.085];
        for (g, w) in logs.iter().zip(want) {
            assert!(*g < 0.0);
            assert!((g - w).abs() < 5e-4, "{g} vs {w}");
        }
        let (l15, l05) = (1.5f64.ln(), 0.5f64.ln());
        let exact = [l05 + 0.5 * l05 + 1.5 * l15, l15 + 0.5 * l05 + 1.5 * l05, l15 + l15 + 1.5 * l05, l05 + l15 + 0.5 * l15];
        for (g, w) in logs.iter().zip(exact) {
            assert!((g - w).abs() < 1e-15);
        }
    }

    #[test]
    fn synthesize_examples() {
        let c = synthesize(&all_half()).unwrap().expect("feasible");
        assert!(c.margin > 0.0);
        assert!(c.vertex_gains.iter().all(|&g| g < 1.0));
        assert!(c.lambda.iter().all(|l| (-1.0..=1.0).contains(l)));
        assert_eq!(synthesize(&SkewMatrix::zero(4).unwrap()).unwrap(), None);
        assert!(matches!(
            synthesize(&SkewMatrix::volterra3(-1.0, 0.5, 0.5).unwrap()),
            Err(LyapunovError::SingularEntry { .. })
        ));
    }

    #[test]
    fn candidate_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..500 {
            let lambda: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();
            let p = CanonicalParams::from_array(std::array::from_fn(|_| rng.random_range(0.01..0.99)));
            let a = p.to_matrix().unwrap();
            let c = LyapunovCandidate::from_lambda(&a, lambda.clone()).unwrap();
            assert_eq!(c.margin > 0.0, c.vertex_gains.iter().all(|&g| g < 1.0));
            for j in 0..4 {
                let direct: f64 = (0..4).map(|i| (1.0 + a.get(i, j)).powf(lambda[i])).product();
                assert!((direct - c.vertex_gains[j]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn f_of_image_is_f_times_g() {
        let a = all_half();
        let lambda = [1.0, 1.0, 0.5, 1.5];
        let x = SimplexPoint::validate(&[0.4, 0.3, 0.2, 0.1]).unwrap();
        let ax = a.mul_vec(x.coords());
        let g: f64 = (0..4).map(|i| (1.0 + ax[i]).powf(lambda[i])).product();
        let fx = monomial(&x, &lambda).unwrap();
        let fvx = monomial(&apply_volterra(&a, &x).unwrap(), &lambda).unwrap();
        assert!((fvx - fx * g).abs() < 1e-15);
    }

    #[test]
    fn solver_soundness_and_grid_completeness() {
        let grid: Vec<f64> = (0..=20).map(|k| -1.0 + 0.1 * k as f64).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut feasible_seen = 0;
        for _ in 0..30 {
            let p = CanonicalParams::from_array(std::array::from_fn(|_| rng.random_range(0.01..0.99)));
            let a = p.to_matrix().unwrap();
            let c: Vec<[f64; 4]> = (0..4).map(|j| std::array::from_fn(|i| a.get(i, j).ln_1p())).collect();
            let mut grid_ok = false;
            'outer: for &l0 in &grid {
                for &l1 in &grid {
                    for &l2 in &grid {
                        for &l3 in &grid {
                            let l = [l0, l1, l2, l3];
                            if c.iter().all(|r| r.iter().zip(&l).map(|(x, y)| x * y).sum::<f64>() < 0.0) {
                                grid_ok = true;
                                break 'outer;
                            }
                        }
                    }
                }
            }
            let got = synthesize(&a).unwrap();
            if grid_ok {
                feasible_seen += 1;
                assert!(got.is_some());
            }
            if let Some(cand) = got {
                let logs = vertex_log_gains(&a, &cand.lambda).unwrap();
                assert!(logs.iter().all(|&v| v <= -cand.margin + 1e-9));
            }
        }
        assert!(feasible_seen > 0);
    }

    #[test]
    fn grid_completeness_on_general_matrices() {
        // every other matrix gets a neutral vertex (zero column), which makes G(e_j) = 1
        let grid: Vec<f64> = (0..=20).map(|k| -1.0 + 0.1 * k as f64).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (mut yes, mut no) = (0, 0);
        for k in 0..200 {
            let neutral = if k % 2 == 0 { Some(rng.random_range(0..4)) } else { None };
            let v: Vec<f64> = (0..16).map(|_| rng.random_range(-0.99..0.99)).collect();
            let a = SkewMatrix::from_upper(4, |i, j| {
                if Some(i) == neutral || Some(j) == neutral { 0.0 } else { v[i * 4 + j] }
            })
            .unwrap();
            let c: Vec<[f64; 4]> = (0..4).map(|j| std::array::from_fn(|i| a.get(i, j).ln_1p())).collect();
            let mut grid_ok = false;
            for &l0 in &grid {
                for &l1 in &grid {
                    for &l2 in &grid {
                        for &l3 in &grid {
                            let l = [l0, l1, l2, l3];
                            grid_ok |= c.iter().all(|r| r.iter().zip(&l).map(|(x, y)| x * y).sum::<f64>() < 0.0);
                        }
                    }
                }
            }
            let got = synthesize(&a).unwrap();
            if grid_ok {
                yes += 1;
                assert!(got.is_some());
            } else {
                no += 1;
            }
            assert_eq!(got.is_none(), neutral.is_some());
        }
        assert!(yes > 0 && no > 0, "{yes} feasible, {no} infeasible");
    }

    #[test]
    fn trajectory_verification() {
        let a = all_half();
        let start = SimplexPoint::validate(&[0.4, 0.3, 0.2, 0.1]).unwrap();
        let c = synthesize(&a).unwrap().unwrap();
        let r = verify_along_trajectory(&c.lambda, &a, &start, 100_000, DEFAULT_MIN_DECADE_DROP).unwrap();
        assert_eq!(r.verdict, DecayVerdict::Decaying);
        assert_eq!(r.log_f.iter().map(|p| p.0).collect::<Vec<_>>(), vec![0, 1, 10, 100, 1000, 10_000, 100_000]);

        let zero = verify_along_trajectory(&[0.0; 4], &a, &start, 100_000, DEFAULT_MIN_DECADE_DROP).unwrap();
        assert_eq!(zero.verdict, DecayVerdict::NotDecaying);
        assert!(zero.log_f.iter().all(|p| p.1 == 0.0));

        let flipped: Vec<f64> = c.lambda.iter().map(|l| -l).collect();
        let r = verify_along_trajectory(&flipped, &a, &start, 100_000, DEFAULT_MIN_DECADE_DROP).unwrap();
        assert_eq!(r.verdict, DecayVerdict::NotDecaying);
        assert!(r.log_f.last().unwrap().1 > r.log_f[1].1);
    }
}
