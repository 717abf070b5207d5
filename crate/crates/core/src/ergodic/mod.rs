//! Long-horizon trajectories and the diagnostics computed from them: Cesàro
//! means, φ-shrinkage, sojourns near vertices and the escape-time bound.

mod bounds;
mod cesaro;
mod sojourn;
mod trajectory;

pub use bounds::{c_abs, escape_bound, escape_bound_log};
pub use cesaro::{dyadic_checkpoints, ergodic_verdict, CesaroSeries, ErgodicVerdict, Verdict, DELTA_CONV, DELTA_OSC, MIN_CHECKPOINTS};
pub use sojourn::{
    decade_windows, is_nonincreasing, outside_fraction_trend, route_check, sojourn_growth, SojournEvent, SojournTable,
    CANONICAL_ROUTE_EDGES,
};
pub use trajectory::{run_ensemble, run_trajectory, Observable, Sample, TrajectoryConfig, TrajectoryResult, NORMALIZATION_DRIFT_TOL};

use thiserror::Error;

use crate::qso::QsoError;
use crate::simplex::SimplexError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ErgodicError {
    #[error("need at least {needed} checkpoints, got {found}")]
    TooFewCheckpoints { needed: usize, found: usize },
    #[error("need at least 3 complete sojourns at vertex {}, got {found}", vertex + 1)]
    TooFewSojourns { vertex: usize, found: usize },
    #[error("epsilon {epsilon} too large (1 - 3 C_abs epsilon = {slack})")]
    EpsilonTooLarge { epsilon: f64, slack: f64 },
    #[error("canonical parameters must lie strictly in (0, 1)")]
    ParamsOutOfRange,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("normalization drift {drift:e} at step {step}")]
    NumericalBreakdown { step: u64, drift: f64 },
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Qso(#[from] QsoError),
    #[error(transparent)]
    Simplex(#[from] SimplexError),
}
