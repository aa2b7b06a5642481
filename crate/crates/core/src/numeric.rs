//! Log-domain helpers shared by the exponential-family code.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// `1 / e^3`, the upper end of the accuracy range the approximation and
/// covering theorems are stated for.
pub const THEOREM_RANGE_MAX: f64 = 0.049_787_068_367_863_944;

/// Whether `0 < v < 1/e^3`.
pub fn in_theorem_range(v: f64) -> bool {
    v > 0.0 && v < THEOREM_RANGE_MAX
}

/// Accepts `0 < v < 1`. Every routine in this crate stays correct on that
/// range; the tighter theorem range is reported, not enforced.
pub(crate) fn check_accuracy(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange {
            name,
            value: v,
            range: "(0, 1)",
        })
    }
}

/// `log sum_i exp(v_i)`; `-inf` for an empty input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = values.iter().map(|&v| (v - max).exp()).sum();
    max + sum.ln()
}

/// `log E_mu exp(v)` under the uniform measure.
pub fn log_mean_exp(values: &[f64]) -> f64 {
    log_sum_exp(values) - (values.len() as f64).ln()
}

/// Normalizes `exp(log_weights)` to mean 1. Returns the density values and
/// `log E_mu exp(log_weights)`.
pub fn gibbs(log_weights: &[f64]) -> (Vec<f64>, f64) {
    let log_norm = log_mean_exp(log_weights);
    let values = log_weights.iter().map(|&w| (w - log_norm).exp()).collect();
    (values, log_norm)
}

/// `log p_m(x)` where `p_m(x) = sum_{j <= m} x^j / j!`, for `x >= 0`.
pub fn log_truncated_exp(x: f64, m: usize) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let lx = x.ln();
    let mut term = 0.0;
    let mut max = 0.0f64;
    let mut logs = Vec::with_capacity(m + 1);
    logs.push(0.0);
    for j in 1..=m {
        term += lx - (j as f64).ln();
        max = max.max(term);
        logs.push(term);
    }
    let sum: f64 = logs.iter().map(|&l| (l - max).exp()).sum();
    max + sum.ln()
}

/// `ln(j!)` for `j = 0..=n`.
pub fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for j in 1..=n {
        acc += (j as f64).ln();
        out.push(acc);
    }
    out
}
