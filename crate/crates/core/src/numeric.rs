//! Small numerical helpers shared by the operator and trajectory code.

/// Neumaier (improved Kahan) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// Compensated sum of an iterator of values.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = CompensatedSum::new();
    for v in values {
        acc.add(v);
    }
    acc.value()
}

/// `ln(Σ exp(x_i))`, returning `-inf` when every entry is `-inf` (or the slice is empty).
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max.is_infinite() {
        return max;
    }
    let s: f64 = xs.iter().map(|&x| (x - max).exp()).sum();
    max + s.ln()
}

/// `λ · ln x` with the convention `0 · ln 0 = 0`.
#[inline]
pub(crate) fn weighted_log(exponent: f64, log_x: f64) -> f64 {
    if exponent == 0.0 {
        0.0
    } else {
        exponent * log_x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut acc = CompensatedSum::new();
        acc.add(1.0);
        for _ in 0..10_000 {
            acc.add(1e-16);
        }
        acc.add(-1.0);
        assert!((acc.value() - 1e-12).abs() < 1e-24);
    }

    #[test]
    fn log_sum_exp_edge_cases() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]), f64::NEG_INFINITY);
        let v = log_sum_exp(&[0.25f64.ln(), 0.75f64.ln(), f64::NEG_INFINITY]);
        assert!(v.abs() < 1e-15);
        // no overflow for large magnitudes
        let v = log_sum_exp(&[-1e6, -1e6]);
        assert!((v - (-1e6 + std::f64::consts::LN_2)).abs() < 1e-9);
    }

    #[test]
    fn zero_exponent_kills_infinite_log() {
        assert_eq!(weighted_log(0.0, f64::NEG_INFINITY), 0.0);
        assert_eq!(weighted_log(2.0, f64::NEG_INFINITY), f64::NEG_INFINITY);
    }
}
