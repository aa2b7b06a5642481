//! Densities with respect to the uniform probability measure on a finite set.
//!
//! A density is a non-negative function with `E_mu f = 1`. All logarithms are
//! natural, and `0 log 0 = 0`.

use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::numeric;

/// Tolerance on `E_mu f = 1` for densities supplied without rescaling.
pub const MEAN_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct Density {
    values: Vec<f64>,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

impl Density {
    /// Validates `values`; with `normalize` set, rescales so the mean is 1.
    pub fn new(values: Vec<f64>, normalize: bool) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::AllZero);
        }
        for (index, &value) in values.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { index });
            }
            if value < 0.0 {
                return Err(Error::NegativeEntry { index, value });
            }
        }
        if values.iter().all(|&v| v == 0.0) {
            return Err(Error::AllZero);
        }
        let m = mean(&values);
        if normalize {
            return Ok(Self::rescaled(values));
        }
        if (m - 1.0).abs() > MEAN_TOLERANCE {
            return Err(Error::NotNormalized { mean: m });
        }
        Ok(Self { values })
    }

    fn rescaled(mut values: Vec<f64>) -> Self {
        let m = mean(&values);
        values.iter_mut().for_each(|v| *v /= m);
        Self { values }
    }

    /// The constant density `1` on a space of `n` points.
    pub fn uniform(n: usize) -> Self {
        Self {
            values: alloc::vec![1.0; n],
        }
    }

    /// `(n / |S|) 1_S`.
    pub fn indicator(n: usize, members: &[usize]) -> Result<Self> {
        let mut values = alloc::vec![0.0; n];
        for &i in members {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, size: n });
            }
            values[i] = 1.0;
        }
        Self::new(values, true)
    }

    /// `exp(w) / E_mu exp(w)`.
    pub fn gibbs(log_weights: &[f64]) -> Self {
        let (values, _) = numeric::gibbs(log_weights);
        Self::rescaled(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }

    pub fn is_uniform(&self) -> bool {
        self.values.iter().all(|&v| v == 1.0)
    }

    /// `Ent_mu(f) = E_mu[f log f]` in nats.
    pub fn relative_entropy(&self) -> f64 {
        let s: f64 = self
            .values
            .iter()
            .filter(|&&v| v > 0.0)
            .map(|&v| v * v.ln())
            .sum();
        (s / self.values.len() as f64).max(0.0)
    }

    /// `D_mu(self || other) = E_mu[h log(h / h')]`, `+inf` when the support of
    /// `self` is not contained in the support of `other`.
    pub fn kl_divergence(&self, other: &Density) -> Result<f64> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                expected: self.len(),
                got: other.len(),
            });
        }
        let mut s = 0.0;
        for (&h, &q) in self.values.iter().zip(&other.values) {
            if h == 0.0 {
                continue;
            }
            if q == 0.0 {
                return Ok(f64::INFINITY);
            }
            s += h * (h / q).ln();
        }
        Ok((s / self.len() as f64).max(0.0))
    }

    /// `E_mu |self - other|`.
    pub fn l1_distance(&self, other: &[f64]) -> f64 {
        self.values
            .iter()
            .zip(other)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            / self.len() as f64
    }
}
