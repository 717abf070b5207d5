use serde::Serialize;

use super::trajectory::Observable;
use super::ErgodicError;

/// Default upper threshold for a converged verdict.
pub const DELTA_CONV: f64 = 1e-3;
/// Default lower threshold for an oscillating verdict.
pub const DELTA_OSC: f64 = 5e-2;
pub const MIN_CHECKPOINTS: usize = 8;

/// `c_n = (1/n) Σ_{k<n} f(V^k x)` at a list of checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CesaroSeries {
    pub observable: Observable,
    pub checkpoints: Vec<(u64, f64)>,
}

impl CesaroSeries {
    /// `max - min` of `c_n` over the trailing half of the checkpoints.
    pub fn trailing_oscillation(&self) -> f64 {
        let tail = &self.checkpoints[self.checkpoints.len() / 2..];
        let (lo, hi) = tail
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, c)| (lo.min(c), hi.max(c)));
        hi - lo
    }
}

/// `1, 2, 4, …` up to `steps`.
pub fn dyadic_checkpoints(steps: u64) -> Vec<u64> {
    std::iter::successors(Some(1u64), |&n| n.checked_mul(2))
        .take_while(|&n| n <= steps)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    ConvergedAtScale,
    OscillatingAtScale,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErgodicVerdict {
    /// One entry per series.
    pub oscillation: Vec<f64>,
    pub verdict: Verdict,
    /// Largest checkpoint.
    pub scale: u64,
}

/// Oscillating if any series oscillates by more than `delta_osc`, converged if
/// every series stays below `delta_conv`.
pub fn ergodic_verdict(series: &[CesaroSeries], delta_conv: f64, delta_osc: f64) -> Result<ErgodicVerdict, ErgodicError> {
    if !(delta_conv > 0.0 && delta_conv < delta_osc) {
        return Err(ErgodicError::InvalidConfig(format!(
            "need 0 < deltaConv < deltaOsc, got {delta_conv} and {delta_osc}"
        )));
    }
    if series.is_empty() {
        return Err(ErgodicError::InvalidConfig("no observables".into()));
    }
    if let Some(s) = series.iter().find(|s| s.checkpoints.len() < MIN_CHECKPOINTS) {
        return Err(ErgodicError::TooFewCheckpoints {
            needed: MIN_CHECKPOINTS,
            found: s.checkpoints.len(),
        });
    }
    let oscillation: Vec<f64> = series.iter().map(CesaroSeries::trailing_oscillation).collect();
    let worst = oscillation.iter().copied().fold(0.0, f64::max);
    let verdict = if worst > delta_osc {
        Verdict::OscillatingAtScale
    } else if worst < delta_conv {
        Verdict::ConvergedAtScale
    } else {
        Verdict::Inconclusive
    };
    let scale = series.iter().filter_map(|s| s.checkpoints.last().map(|c| c.0)).max().unwrap_or(0);
    Ok(ErgodicVerdict {
        oscillation,
        verdict,
        scale,
    })
}
