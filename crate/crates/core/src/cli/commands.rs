use std::path::Path;

use log::{debug, info, warn};
use serde::Serialize;

use super::config::ExperimentConfig;
use super::output::{fmt_f64, fmt_opt, write_csv, write_json};
use super::AppError;
use crate::classify::{classify, CanonicalParams, ClassReport, MatrixClass};
use crate::ergodic::{
    decade_windows, ergodic_verdict, escape_bound_log, is_nonincreasing, outside_fraction_trend, route_check,
    run_ensemble, sojourn_growth, ErgodicError, ErgodicVerdict, Observable, TrajectoryConfig, TrajectoryResult,
    MIN_CHECKPOINTS,
};
use crate::fixed_points::{all_fixed_points, repelling_point_lyapunov, FixedPointRecord, FixedPointType};
use crate::lyapunov::{build_b, synthesize, verify_along_trajectory, DecayVerdict, LyapunovCandidate};
use crate::qso::SkewMatrix;

#[derive(Debug, Serialize)]
pub struct ClassifyJson {
    pub class: u8,
    pub witness_row: Option<usize>,
    /// `permutation[i]` is the input label placed at canonical position `i + 1`.
    pub permutation: Option<[usize; 4]>,
    pub canonical_params: Option<CanonicalParams>,
    pub invariant_i: Option<f64>,
}

impl From<&ClassReport> for ClassifyJson {
    fn from(r: &ClassReport) -> Self {
        Self {
            class: r.class.number(),
            witness_row: r.witness_row.map(|i| i + 1),
            permutation: r.permutation.map(|p| p.map(|i| i + 1)),
            canonical_params: r.canonical_params,
            invariant_i: r.invariant_i,
        }
    }
}

pub fn cmd_classify(cfg: &ExperimentConfig, out: &Path) -> Result<ClassifyJson, AppError> {
    let a = cfg.matrix.to_matrix()?;
    let report = classify(&a)?;
    info!("class {}", report.class.number());
    let json = ClassifyJson::from(&report);
    write_json(&out.join("classify.json"), &json)?;
    Ok(json)
}

#[derive(Debug, Serialize)]
pub struct TransverseJson {
    pub index: usize,
    pub value: f64,
}

#[derive(Debug, Serialize)]
pub struct ComplexJson {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Serialize)]
pub struct FixedPointJson {
    pub face: String,
    pub support: Vec<usize>,
    pub point: Vec<f64>,
    pub kind: FixedPointType,
    pub continuum: bool,
    pub transverse_multipliers: Vec<TransverseJson>,
    pub in_face_eigenvalues: Vec<ComplexJson>,
    /// Exponents of the monomial Lyapunov function of a repelling point.
    pub lyapunov_exponents: Option<Vec<f64>>,
}

impl From<&FixedPointRecord> for FixedPointJson {
    fn from(r: &FixedPointRecord) -> Self {
        Self {
            face: r.support.to_string(),
            support: r.support.labels(),
            point: r.point.coords().to_vec(),
            kind: r.kind,
            continuum: r.continuum,
            transverse_multipliers: r
                .transverse_multipliers
                .iter()
                .map(|&(k, value)| TransverseJson { index: k + 1, value })
                .collect(),
            in_face_eigenvalues: r.in_face_eigenvalues.iter().map(|c| ComplexJson { re: c.re, im: c.im }).collect(),
            lyapunov_exponents: repelling_point_lyapunov(r).ok().map(|f| f.exponents),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct FixedPointsJson {
    pub m: usize,
    pub everywhere_fixed: bool,
    pub records: Vec<FixedPointJson>,
}

pub fn cmd_fixed_points(cfg: &ExperimentConfig, out: &Path) -> Result<FixedPointsJson, AppError> {
    let a = cfg.matrix.to_matrix()?;
    let inv = all_fixed_points(&a)?;
    info!("{} fixed points", inv.records.len());
    let json = FixedPointsJson {
        m: a.dim(),
        everywhere_fixed: inv.everywhere_fixed,
        records: inv.records.iter().map(FixedPointJson::from).collect(),
    };
    write_json(&out.join("fixed_points.json"), &json)?;
    Ok(json)
}

#[derive(Debug, Serialize)]
pub struct DecayJson {
    pub start_index: usize,
    pub start: Vec<f64>,
    pub verdict: DecayVerdict,
    pub log_f: Vec<(u64, f64)>,
    pub decade_drift: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct LyapunovJson {
    pub b: Vec<Vec<f64>>,
    pub status: &'static str,
    pub candidate: Option<LyapunovCandidate>,
    pub trajectories: Vec<DecayJson>,
}

pub fn cmd_lyapunov(cfg: &ExperimentConfig, out: &Path) -> Result<LyapunovJson, AppError> {
    let a = cfg.matrix.to_matrix()?;
    let b = build_b(&a)?;
    let starts = cfg.start_points(a.dim())?;
    let candidate = synthesize(&a)?;
    let mut trajectories = Vec::new();
    if let Some(c) = &candidate {
        info!("feasible, margin {}", c.margin);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.threads)
            .build()
            .map_err(|e| AppError::Numerical(e.to_string()))?;
        let reports: Vec<_> = pool.install(|| {
            use rayon::prelude::*;
            starts
                .par_iter()
                .map(|s| verify_along_trajectory(&c.lambda, &a, s, cfg.steps, cfg.min_decade_drop))
                .collect()
        });
        for (k, (s, r)) in starts.iter().zip(reports).enumerate() {
            let r = r?;
            trajectories.push(DecayJson {
                start_index: k + 1,
                start: s.coords().to_vec(),
                verdict: r.verdict,
                log_f: r.log_f,
                decade_drift: r.decade_drift,
            });
        }
    } else {
        info!("no strictly feasible exponents");
    }
    let json = LyapunovJson {
        b: b.b,
        status: if candidate.is_some() { "feasible" } else { "infeasible" },
        candidate,
        trajectories,
    };
    write_json(&out.join("lyapunov.json"), &json)?;
    Ok(json)
}

#[derive(Debug, Serialize)]
pub struct StartSummary {
    pub index: usize,
    pub start: Vec<f64>,
    pub final_point: Vec<f64>,
    pub final_ln_phi: Option<f64>,
    pub ergodic: Option<ErgodicVerdict>,
    pub visits: Vec<usize>,
    pub sojourn_count: usize,
    /// Class-3 input only: routes, growth and escape bound in canonical labels.
    pub route_check: Option<bool>,
    pub sojourn_growth_vertex1: Option<bool>,
    pub escape_bound_checked: Option<usize>,
    pub escape_bound_violations: Option<usize>,
    pub outside_final_fraction: Option<f64>,
    pub outside_nonincreasing: bool,
}

#[derive(Debug, Serialize)]
pub struct SimulateSummary {
    pub m: usize,
    pub steps: u64,
    pub epsilon: f64,
    pub class: Option<u8>,
    pub permutation: Option<[usize; 4]>,
    pub starts: Vec<StartSummary>,
}

fn observable_label(o: &Observable, monomial_index: &mut usize) -> String {
    match o {
        Observable::Coordinate(i) => format!("x{}", i + 1),
        Observable::Monomial(_) => {
            *monomial_index += 1;
            format!("monomial{monomial_index}")
        }
    }
}

fn write_start_files(out: &Path, idx: usize, m: usize, r: &TrajectoryResult) -> Result<(), AppError> {
    let tag = format!("{idx:03}");
    let coord_header: Vec<String> = std::iter::once("step".to_string())
        .chain((1..=m).map(|i| format!("x{i}")))
        .collect();
    write_csv(
        &out.join(format!("trajectory_{tag}.csv")),
        &coord_header,
        r.samples.iter().map(|s| {
            std::iter::once(s.step.to_string())
                .chain(s.log_coords.iter().map(|l| fmt_f64(l.exp())))
                .collect()
        }),
    )?;

    let mut mono = 0;
    let header: Vec<String> = std::iter::once("n".to_string())
        .chain(r.cesaro.iter().map(|s| observable_label(&s.observable, &mut mono)))
        .collect();
    let rows = r.cesaro.first().map_or(0, |s| s.checkpoints.len());
    write_csv(
        &out.join(format!("cesaro_{tag}.csv")),
        &header,
        (0..rows).map(|k| {
            std::iter::once(r.cesaro[0].checkpoints[k].0.to_string())
                .chain(r.cesaro.iter().map(|s| fmt_f64(s.checkpoints[k].1)))
                .collect()
        }),
    )?;

    let header = ["vertex", "entry", "exit", "length", "complete", "ln_phi_at_entry", "ln_phi_before_entry"].map(String::from);
    write_csv(
        &out.join(format!("sojourn_{tag}.csv")),
        &header,
        r.sojourns.events.iter().map(|e| {
            vec![
                (e.vertex + 1).to_string(),
                e.entry.to_string(),
                e.exit.map(|x| x.to_string()).unwrap_or_default(),
                e.length(r.steps).to_string(),
                e.is_complete().to_string(),
                fmt_opt(e.log_phi_at_entry),
                fmt_opt(e.log_phi_before_entry),
            ]
        }),
    )?;

    let trend = outside_fraction_trend(&r.sojourns, &decade_windows(r.steps));
    write_csv(
        &out.join(format!("outside_{tag}.csv")),
        &["window_start", "window_end", "outside_fraction"].map(String::from),
        trend.iter().map(|&((a, b), f)| vec![a.to_string(), b.to_string(), fmt_f64(f)]),
    )?;

    if m == 4 {
        write_csv(
            &out.join(format!("phi_{tag}.csv")),
            &["step", "phi", "ln_phi"].map(String::from),
            r.log_phi_trace().iter().map(|&(n, l)| vec![n.to_string(), fmt_f64(l.exp()), fmt_f64(l)]),
        )?;
    }
    Ok(())
}

fn summarize(
    cfg: &ExperimentConfig,
    idx: usize,
    start: &[f64],
    r: &TrajectoryResult,
    class3: Option<(&[usize; 4], &CanonicalParams)>,
) -> Result<StartSummary, AppError> {
    let ergodic = if r.cesaro.is_empty() || r.cesaro.iter().any(|s| s.checkpoints.len() < MIN_CHECKPOINTS) {
        None
    } else {
        Some(ergodic_verdict(&r.cesaro, cfg.delta_conv, cfg.delta_osc)?)
    };
    let visits = r.sojourns.visits();
    let trend = outside_fraction_trend(&r.sojourns, &decade_windows(r.steps));
    let mut s = StartSummary {
        index: idx,
        start: start.to_vec(),
        final_point: r.final_state.to_linear().coords().to_vec(),
        final_ln_phi: r.log_phi_trace().last().map(|p| p.1),
        ergodic,
        visits: visits.iter().map(|v| v + 1).collect(),
        sojourn_count: r.sojourns.events.len(),
        route_check: None,
        sojourn_growth_vertex1: None,
        escape_bound_checked: None,
        escape_bound_violations: None,
        outside_final_fraction: trend.last().map(|t| t.1),
        outside_nonincreasing: is_nonincreasing(&trend),
    };
    if let Some((perm, params)) = class3 {
        let mut pos = [0usize; 4];
        for (i, &p) in perm.iter().enumerate() {
            pos[p] = i;
        }
        let canonical: Vec<usize> = visits.iter().map(|&v| pos[v]).collect();
        s.route_check = Some(route_check(&canonical));
        s.sojourn_growth_vertex1 = match sojourn_growth(&r.sojourns, perm[0], cfg.growth_violations_per_ten) {
            Ok(b) => Some(b),
            Err(ErgodicError::TooFewSojourns { .. }) => None,
            Err(e) => return Err(e.into()),
        };
        if params.is_strict() {
            match escape_bound_check(r, perm[0], params, cfg.epsilon) {
                Ok((checked, bad)) => {
                    s.escape_bound_checked = Some(checked);
                    s.escape_bound_violations = Some(bad);
                }
                Err(ErgodicError::EpsilonTooLarge { .. }) => warn!("epsilon too large for the escape bound"),
                Err(e) => return Err(e.into()),
            }
        }
    }
    Ok(s)
}

/// `(checked, violations)` over complete sojourns at the canonical vertex 1.
fn escape_bound_check(
    r: &TrajectoryResult,
    vertex: usize,
    params: &CanonicalParams,
    epsilon: f64,
) -> Result<(usize, usize), ErgodicError> {
    let mut checked = 0;
    let mut bad = 0;
    for e in r.sojourns.events.iter().filter(|e| e.vertex == vertex && e.is_complete()) {
        if let Some(lphi) = e.log_phi_at_entry {
            checked += 1;
            if (e.length(r.steps) as f64) < escape_bound_log(params, epsilon, lphi)? {
                bad += 1;
            }
        }
    }
    Ok((checked, bad))
}

pub fn cmd_simulate(cfg: &ExperimentConfig, out: &Path) -> Result<SimulateSummary, AppError> {
    let a: SkewMatrix = cfg.matrix.to_matrix()?;
    let m = a.dim();
    let starts = cfg.start_points(m)?;
    if starts.is_empty() {
        return Err(AppError::Validation("simulate needs at least one start".into()));
    }
    let observables = cfg.observables(m)?;
    let report = if m == 4 { Some(classify(&a)?) } else { None };
    let class3 = report
        .as_ref()
        .filter(|r| r.class == MatrixClass::Class3)
        .and_then(|r| Some((r.permutation?, r.canonical_params?)));

    let configs: Vec<TrajectoryConfig> = starts
        .iter()
        .map(|s| {
            let mut c = TrajectoryConfig::new(a.clone(), s.clone(), cfg.steps);
            if let Some(cp) = &cfg.checkpoints {
                c.checkpoints = cp.clone();
            }
            c.epsilon = cfg.epsilon;
            c.record_stride = cfg.record_stride();
            c.observables = observables.clone();
            if let Some((perm, _)) = class3 {
                c.phi_permutation = perm;
            }
            c
        })
        .collect();
    for c in &configs {
        c.validate()?;
    }
    debug!("{} trajectories on {} threads", configs.len(), cfg.threads);
    let results = run_ensemble(&configs, cfg.threads)?;

    let mut summaries = Vec::with_capacity(results.len());
    for (k, (res, s)) in results.into_iter().zip(&starts).enumerate() {
        let r = res?;
        let idx = k + 1;
        write_start_files(out, idx, m, &r)?;
        summaries.push(summarize(cfg, idx, s.coords(), &r, class3.as_ref().map(|(p, c)| (p, c)))?);
        info!("start {idx} done");
    }
    let summary = SimulateSummary {
        m,
        steps: cfg.steps,
        epsilon: cfg.epsilon,
        class: report.as_ref().map(|r| r.class.number()),
        permutation: class3.map(|(p, _)| p.map(|i| i + 1)),
        starts: summaries,
    };
    write_json(&out.join("summary.json"), &summary)?;
    Ok(summary)
}
