use super::ErgodicError;
use crate::classify::CanonicalParams;

/// `max{1/(1-a12), 1/(1-max(a13,a23)), 1/(1-max(a24,a34))}`.
pub fn c_abs(p: &CanonicalParams) -> Result<f64, ErgodicError> {
    if !p.is_strict() {
        return Err(ErgodicError::ParamsOutOfRange);
    }
    Ok([p.a12, p.a13.max(p.a23), p.a24.max(p.a34)]
        .iter()
        .map(|a| 1.0 / (1.0 - a))
        .fold(0.0, f64::max))
}

/// Lower bound on the length of a sojourn at vertex 1 that starts at a point
/// with the given `ln φ`:
/// `max(0, (2 ln ε + ln(1 - 3 C_abs ε) - ln φ) / ln 2)`.
pub fn escape_bound_log(p: &CanonicalParams, epsilon: f64, log_phi: f64) -> Result<f64, ErgodicError> {
    let c = c_abs(p)?;
    let slack = 1.0 - 3.0 * c * epsilon;
    if !(epsilon > 0.0) || !(slack > 0.0) {
        return Err(ErgodicError::EpsilonTooLarge { epsilon, slack });
    }
    Ok(((2.0 * epsilon.ln() + slack.ln() - log_phi) / std::f64::consts::LN_2).max(0.0))
}

pub fn escape_bound(p: &CanonicalParams, epsilon: f64, phi: f64) -> Result<f64, ErgodicError> {
    escape_bound_log(p, epsilon, phi.ln())
}
