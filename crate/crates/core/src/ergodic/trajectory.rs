use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::cesaro::{dyadic_checkpoints, CesaroSeries};
use super::sojourn::{SojournEvent, SojournTable};
use super::ErgodicError;
use crate::numeric::CompensatedSum;
use crate::qso::{SkewMatrix, VolterraStepper};
use crate::simplex::{log_monomial_from_logs, log_phi_raw, LogSimplexPoint, SimplexPoint};

/// Largest tolerated `|ln Σ_k x_k (1 + (Ax)_k)|` per step.
pub const NORMALIZATION_DRIFT_TOL: f64 = 1e-6;

/// A function on the simplex whose Cesàro means are tracked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// `x_i` (0-based index).
    Coordinate(usize),
    /// `∏ x_i^{λ_i}`.
    Monomial(Vec<f64>),
}

impl Observable {
    fn check(&self, m: usize) -> Result<(), ErgodicError> {
        match self {
            Observable::Coordinate(i) if *i >= m => {
                Err(ErgodicError::InvalidConfig(format!("coordinate {} out of range", i + 1)))
            }
            Observable::Monomial(e) if e.len() != m || e.iter().any(|v| !v.is_finite()) => {
                Err(ErgodicError::InvalidConfig("monomial exponents must be finite, one per coordinate".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryConfig {
    pub matrix: SkewMatrix,
    pub start: SimplexPoint,
    /// Number of applications of the operator.
    pub steps: u64,
    /// Values of `n` at which `c_n` is recorded; each in `1..=steps`.
    pub checkpoints: Vec<u64>,
    /// Vertex-neighborhood radius in `(0, 1/4)`.
    pub epsilon: f64,
    /// Record the state every `record_stride` steps (`0` disables).
    pub record_stride: u64,
    /// Additional steps at which the state is recorded.
    pub sample_steps: Vec<u64>,
    pub observables: Vec<Observable>,
    /// Relabeling for `φ` when `m = 4`: `φ` is evaluated on `y_i = x_{perm[i]}`.
    pub phi_permutation: [usize; 4],
}

impl TrajectoryConfig {
    /// Dyadic checkpoints, ε = 0.05, coordinate observables, no samples.
    pub fn new(matrix: SkewMatrix, start: SimplexPoint, steps: u64) -> Self {
        let m = matrix.dim();
        Self {
            matrix,
            start,
            steps,
            checkpoints: dyadic_checkpoints(steps),
            epsilon: 0.05,
            record_stride: 0,
            sample_steps: Vec::new(),
            observables: (0..m).map(Observable::Coordinate).collect(),
            phi_permutation: [0, 1, 2, 3],
        }
    }

    pub fn validate(&self) -> Result<(), ErgodicError> {
        let m = self.matrix.dim();
        if self.start.dim() != m {
            return Err(ErgodicError::InvalidConfig(format!(
                "start has {} coordinates, matrix is {m}x{m}",
                self.start.dim()
            )));
        }
        if self.steps == 0 {
            return Err(ErgodicError::InvalidConfig("steps must be positive".into()));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 0.25) {
            return Err(ErgodicError::InvalidConfig(format!("epsilon {} not in (0, 1/4)", self.epsilon)));
        }
        if let Some(n) = self.checkpoints.iter().find(|&&n| n == 0 || n > self.steps) {
            return Err(ErgodicError::InvalidConfig(format!("checkpoint {n} outside 1..={}", self.steps)));
        }
        if let Some(n) = self.sample_steps.iter().find(|&&n| n > self.steps) {
            return Err(ErgodicError::InvalidConfig(format!("sample step {n} beyond {}", self.steps)));
        }
        let mut seen = [false; 4];
        if !self.phi_permutation.iter().all(|&i| i < 4 && !std::mem::replace(&mut seen[i], true)) {
            return Err(ErgodicError::InvalidConfig("phi_permutation is not a permutation of 0..4".into()));
        }
        self.observables.iter().try_for_each(|o| o.check(m))
    }
}

/// The state `V^step x` in log coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub step: u64,
    pub log_coords: Vec<f64>,
}

impl Sample {
    pub fn coords(&self) -> Vec<f64> {
        self.log_coords.iter().map(|l| l.exp()).collect()
    }

    /// `ln φ`; `None` unless `m = 4`.
    pub fn log_phi(&self) -> Option<f64> {
        self.log_phi_relabeled(&[0, 1, 2, 3])
    }

    pub fn log_phi_relabeled(&self, perm: &[usize; 4]) -> Option<f64> {
        (self.log_coords.len() == 4).then(|| log_phi_perm(&self.log_coords, perm))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryResult {
    pub steps: u64,
    pub cesaro: Vec<CesaroSeries>,
    pub sojourns: SojournTable,
    /// Recorded states in increasing step order.
    pub samples: Vec<Sample>,
    pub final_state: LogSimplexPoint,
    pub phi_permutation: [usize; 4],
}

impl TrajectoryResult {
    pub fn sample_at(&self, step: u64) -> Option<&Sample> {
        self.samples
            .binary_search_by_key(&step, |s| s.step)
            .ok()
            .map(|i| &self.samples[i])
    }

    /// `(step, ln φ)` for every sample (`m = 4`).
    pub fn log_phi_trace(&self) -> Vec<(u64, f64)> {
        self.samples
            .iter()
            .filter_map(|s| s.log_phi_relabeled(&self.phi_permutation).map(|v| (s.step, v)))
            .collect()
    }

    /// `(step, ln ∏ x_i^{λ_i})` for every sample.
    pub fn log_monomial_trace(&self, exponents: &[f64]) -> Result<Vec<(u64, f64)>, ErgodicError> {
        self.samples
            .iter()
            .map(|s| Ok((s.step, log_monomial_from_logs(&s.log_coords, exponents)?)))
            .collect()
    }
}

fn log_phi_perm(l: &[f64], p: &[usize; 4]) -> f64 {
    if *p == [0, 1, 2, 3] {
        log_phi_raw(l)
    } else {
        log_phi_raw(&[l[p[0]], l[p[1]], l[p[2]], l[p[3]]])
    }
}

enum Eval {
    Coordinate(usize),
    Monomial(Vec<f64>),
}

/// Iterates the operator in log space, accumulating Cesàro sums, sojourns and
/// samples in a single pass.
pub fn run_trajectory(cfg: &TrajectoryConfig) -> Result<TrajectoryResult, ErgodicError> {
    cfg.validate()?;
    let m = cfg.matrix.dim();
    let mut stepper = VolterraStepper::new(cfg.matrix.clone());
    let mut logs = cfg.start.to_log().log_coords().to_vec();

    let evals: Vec<Eval> = cfg
        .observables
        .iter()
        .map(|o| match o {
            Observable::Coordinate(i) => Eval::Coordinate(*i),
            Observable::Monomial(e) => Eval::Monomial(e.clone()),
        })
        .collect();
    let has_monomial = evals.iter().any(|e| matches!(e, Eval::Monomial(_)));
    let mut prev_logs = vec![0.0; m];
    let mut sums = vec![CompensatedSum::new(); evals.len()];
    let mut checkpoints = cfg.checkpoints.clone();
    checkpoints.sort_unstable();
    checkpoints.dedup();
    let mut next_cp = 0;
    let mut series: Vec<Vec<(u64, f64)>> = vec![Vec::with_capacity(checkpoints.len()); evals.len()];

    let mut sample_steps = cfg.sample_steps.clone();
    sample_steps.sort_unstable();
    sample_steps.dedup();
    let mut next_sample = 0;
    let mut samples = Vec::new();

    let log_eps = cfg.epsilon.ln();
    let mut events: Vec<SojournEvent> = Vec::new();
    let mut current: Option<usize> = None;
    let mut prev_log_phi: Option<f64> = None;

    for n in 0..=cfg.steps {
        let on_stride = cfg.record_stride > 0 && n % cfg.record_stride == 0;
        let explicit = next_sample < sample_steps.len() && sample_steps[next_sample] == n;
        if explicit {
            next_sample += 1;
        }
        if on_stride || explicit || n == cfg.steps {
            samples.push(Sample {
                step: n,
                log_coords: logs.clone(),
            });
        }
        if n == cfg.steps {
            break;
        }

        // sojourn bookkeeping on x_n; box neighborhood of vertex v: x_i ≤ ε for all i ≠ v
        let inside = (0..m).find(|&v| (0..m).all(|i| i == v || logs[i] <= log_eps));
        let log_phi = (m == 4).then(|| log_phi_perm(&logs, &cfg.phi_permutation));
        if inside != current {
            if let Some(ev) = events.last_mut().filter(|e| e.exit.is_none()) {
                ev.exit = Some(n);
            }
            if let Some(v) = inside {
                events.push(SojournEvent {
                    vertex: v,
                    entry: n,
                    exit: None,
                    log_phi_at_entry: log_phi,
                    log_phi_before_entry: if n == 0 { None } else { prev_log_phi },
                });
            }
            current = inside;
        }
        prev_log_phi = log_phi;

        if has_monomial {
            prev_logs.copy_from_slice(&logs);
        }
        let drift = stepper.step(&mut logs)?;
        if drift.abs() > NORMALIZATION_DRIFT_TOL {
            return Err(ErgodicError::NumericalBreakdown { step: n, drift });
        }
        let lin = stepper.last_linear();
        for (sum, e) in sums.iter_mut().zip(&evals) {
            let f = match e {
                Eval::Coordinate(i) => lin[*i],
                Eval::Monomial(exps) => log_monomial_from_logs(&prev_logs, exps)?.exp(),
            };
            sum.add(f);
        }
        let count = n + 1;
        if next_cp < checkpoints.len() && checkpoints[next_cp] == count {
            for (s, sum) in series.iter_mut().zip(&sums) {
                s.push((count, sum.value() / count as f64));
            }
            next_cp += 1;
        }
    }

    let cesaro = cfg
        .observables
        .iter()
        .cloned()
        .zip(series)
        .map(|(observable, checkpoints)| CesaroSeries { observable, checkpoints })
        .collect();
    Ok(TrajectoryResult {
        steps: cfg.steps,
        cesaro,
        sojourns: SojournTable::new(m, cfg.epsilon, cfg.steps, events),
        samples,
        final_state: LogSimplexPoint::from_normalized_unchecked(logs),
        phi_permutation: cfg.phi_permutation,
    })
}

/// Runs independent trajectories on a pool of `threads` workers (`0` uses
/// the rayon default). Results keep the order of `configs`.
pub fn run_ensemble(
    configs: &[TrajectoryConfig],
    threads: usize,
) -> Result<Vec<Result<TrajectoryResult, ErgodicError>>, ErgodicError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| ErgodicError::ThreadPool(e.to_string()))?;
    Ok(pool.install(|| configs.par_iter().map(run_trajectory).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::CanonicalParams;
    use crate::ergodic::{ergodic_verdict, Verdict, DELTA_CONV, DELTA_OSC};
    use crate::qso::apply_volterra;
    use crate::simplex::phi;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn all_half() -> SkewMatrix {
        CanonicalParams::uniform(0.5).to_matrix().unwrap()
    }

    fn pt(x: &[f64]) -> SimplexPoint {
        SimplexPoint::validate(x).unwrap()
    }

    #[test]
    fn zero_matrix_gives_constant_series() {
        let start = pt(&[0.4, 0.3, 0.2, 0.1]);
        let cfg = TrajectoryConfig::new(SkewMatrix::zero(4).unwrap(), start.clone(), 1024);
        let r = run_trajectory(&cfg).unwrap();
        for (s, want) in r.cesaro.iter().zip(start.coords()) {
            assert_eq!(s.checkpoints.len(), 11);
            for &(_, c) in &s.checkpoints {
                assert!((c - want).abs() < 1e-15);
            }
        }
        let v = ergodic_verdict(&r.cesaro, DELTA_CONV, DELTA_OSC).unwrap();
        assert_eq!(v.verdict, Verdict::ConvergedAtScale);
        assert_eq!(v.scale, 1024);
    }

    #[test]
    fn log_engine_matches_linear_map() {
        let a = all_half();
        let mut x = pt(&[0.4, 0.3, 0.2, 0.1]);
        let mut cfg = TrajectoryConfig::new(a.clone(), x.clone(), 500);
        cfg.record_stride = 1;
        let r = run_trajectory(&cfg).unwrap();
        assert_eq!(r.samples.len(), 501);
        for s in &r.samples {
            let got = s.coords();
            for (g, w) in got.iter().zip(x.coords()) {
                assert!((g - w).abs() < 1e-10, "step {}", s.step);
            }
            x = apply_volterra(&a, &x).unwrap();
        }
    }

    #[test]
    fn cesaro_matches_direct_average() {
        let a = all_half();
        let start = pt(&[0.4, 0.3, 0.2, 0.1]);
        let mut cfg = TrajectoryConfig::new(a.clone(), start.clone(), 300);
        cfg.checkpoints = vec![1, 7, 300];
        cfg.observables.push(Observable::Monomial(vec![1.0, 0.0, 2.0, 0.5]));
        let r = run_trajectory(&cfg).unwrap();
        let mut x = start;
        let mut sums = [0.0; 5];
        let mut want = Vec::new();
        for n in 1..=300u64 {
            for i in 0..4 {
                sums[i] += x.coords()[i];
            }
            let c = x.coords();
            sums[4] += c[0] * c[2] * c[2] * c[3].sqrt();
            if [1, 7, 300].contains(&n) {
                want.push(sums.map(|s| s / n as f64));
            }
            x = apply_volterra(&a, &x).unwrap();
        }
        for (k, s) in r.cesaro.iter().enumerate() {
            for (j, &(n, c)) in s.checkpoints.iter().enumerate() {
                assert_eq!(n, [1, 7, 300][j]);
                assert!((c - want[j][k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coordinate_means_stay_in_unit_interval() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let z = SkewMatrix::volterra3(1.0, 1.0, 1.0).unwrap();
        let start = SimplexPoint::random_interior(3, 0.01, &mut rng);
        let r = run_trajectory(&TrajectoryConfig::new(z, start, 1 << 14)).unwrap();
        for s in &r.cesaro {
            assert!(s.checkpoints.iter().all(|&(_, c)| (0.0..=1.0).contains(&c)));
        }
    }

    #[test]
    fn phi_shrinks_for_all_half() {
        let mut cfg = TrajectoryConfig::new(all_half(), pt(&[0.4, 0.3, 0.2, 0.1]), 100_000);
        cfg.sample_steps = vec![0, 100_000];
        let r = run_trajectory(&cfg).unwrap();
        let first = r.sample_at(0).unwrap().log_phi().unwrap();
        assert!((first - phi(&pt(&[0.4, 0.3, 0.2, 0.1])).unwrap().ln()).abs() < 1e-14);
        assert!(r.sample_at(100_000).unwrap().log_phi().unwrap() < 1e-6f64.ln());
    }

    #[test]
    fn invalid_configs() {
        let base = TrajectoryConfig::new(all_half(), pt(&[0.4, 0.3, 0.2, 0.1]), 10);
        let mut c = base.clone();
        c.epsilon = 0.25;
        assert!(matches!(run_trajectory(&c), Err(ErgodicError::InvalidConfig(_))));
        let mut c = base.clone();
        c.checkpoints = vec![11];
        assert!(matches!(run_trajectory(&c), Err(ErgodicError::InvalidConfig(_))));
        let mut c = base.clone();
        c.observables = vec![Observable::Coordinate(4)];
        assert!(matches!(run_trajectory(&c), Err(ErgodicError::InvalidConfig(_))));
        let mut c = base;
        c.start = SimplexPoint::barycenter(3).unwrap();
        assert!(matches!(run_trajectory(&c), Err(ErgodicError::InvalidConfig(_))));
    }

    #[test]
    fn ensemble_is_order_preserving_and_thread_independent() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cfgs: Vec<_> = (0..6)
            .map(|_| {
                let mut c = TrajectoryConfig::new(all_half(), SimplexPoint::random_interior(4, 0.01, &mut rng), 5000);
                c.record_stride = 100;
                c
            })
            .collect();
        let one = run_ensemble(&cfgs, 1).unwrap();
        let many = run_ensemble(&cfgs, 4).unwrap();
        assert_eq!(one, many);
        for (c, r) in cfgs.iter().zip(&one) {
            assert_eq!(r.as_ref().unwrap(), &run_trajectory(c).unwrap());
        }
    }
}
