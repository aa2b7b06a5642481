//! Arithmetic used by `verify`, computed from residues and orders alone so it
//! does not share code paths with the library being checked.

use std::f64::consts::TAU;

/// Residue tuples of every element, in the same index order as density files.
pub struct Layout {
    pub orders: Vec<u64>,
    pub points: Vec<Vec<u64>>,
}

impl Layout {
    pub fn new(orders: &[u64]) -> Self {
        let mut points = vec![Vec::new()];
        for &n in orders {
            points = points
                .into_iter()
                .flat_map(|p| {
                    (0..n).map(move |r| {
                        let mut q = p.clone();
                        q.push(r);
                        q
                    })
                })
                .collect();
        }
        Layout {
            orders: orders.to_vec(),
            points,
        }
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    /// Position of a residue tuple, or `None` if it is not in the group.
    pub fn index(&self, residues: &[u64]) -> Option<usize> {
        if residues.len() != self.orders.len() {
            return None;
        }
        residues
            .iter()
            .zip(&self.orders)
            .try_fold(0usize, |acc, (&r, &n)| {
                (r < n).then(|| acc * n as usize + r as usize)
            })
    }

    /// `sum_i eps_i lambda_i`, reduced factor by factor.
    pub fn signed_sum(&self, lambda: &[Vec<u64>], eps: &[i64]) -> Vec<u64> {
        let mut acc = vec![0i128; self.orders.len()];
        for (l, &e) in lambda.iter().zip(eps) {
            for (a, &r) in acc.iter_mut().zip(l) {
                *a += e as i128 * r as i128;
            }
        }
        acc.iter()
            .zip(&self.orders)
            .map(|(&a, &n)| a.rem_euclid(n as i128) as u64)
            .collect()
    }

    /// Angle of `u_gamma(x)` as a fraction of a full turn.
    fn turn(&self, gamma: &[u64], x: &[u64]) -> f64 {
        gamma
            .iter()
            .zip(x)
            .zip(&self.orders)
            .map(|((&g, &x), &n)| ((g * x) % n) as f64 / n as f64)
            .sum::<f64>()
            .fract()
    }

    /// `E[h cos]` and `E[h sin]` against `u_gamma`.
    pub fn pairing(&self, h: &[f64], gamma: &[u64]) -> (f64, f64) {
        let (mut c, mut s) = (0.0, 0.0);
        for (x, &v) in self.points.iter().zip(h) {
            let a = TAU * self.turn(gamma, x);
            c += v * a.cos();
            s += v * a.sin();
        }
        let n = self.size() as f64;
        (c / n, s / n)
    }

    /// `|h^(gamma)|` for every gamma, in layout order.
    pub fn magnitudes(&self, h: &[f64]) -> Vec<f64> {
        self.points
            .iter()
            .map(|g| {
                let (c, s) = self.pairing(h, g);
                c.hypot(s)
            })
            .collect()
    }

    /// `max_gamma max(|E h Re u_gamma|, |E h Im u_gamma|)`.
    pub fn character_seminorm(&self, h: &[f64]) -> f64 {
        self.points
            .iter()
            .map(|g| {
                let (c, s) = self.pairing(h, g);
                c.abs().max(s.abs())
            })
            .fold(0.0, f64::max)
    }

    /// Value of `sign * Re/Im u_gamma` at every point.
    pub fn functional_values(&self, gamma: &[u64], imaginary: bool, sign: f64) -> Vec<f64> {
        self.points
            .iter()
            .map(|x| {
                let a = TAU * self.turn(gamma, x);
                sign * if imaginary { a.sin() } else { a.cos() }
            })
            .collect()
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn relative_entropy(values: &[f64]) -> f64 {
    mean(
        &values
            .iter()
            .map(|&v| if v > 0.0 { v * v.ln() } else { 0.0 })
            .collect::<Vec<_>>(),
    )
}

/// `log sum_{j <= m} x^j / j!` for `x >= 0`.
pub fn log_truncated_exp(x: f64, m: usize) -> f64 {
    if x <= 0.0 {
        return if x == 0.0 { 0.0 } else { f64::NAN };
    }
    let lx = x.ln();
    let mut terms = Vec::with_capacity(m + 1);
    let mut log_fact = 0.0;
    for j in 0..=m {
        if j > 0 {
            log_fact += (j as f64).ln();
        }
        terms.push(j as f64 * lx - log_fact);
    }
    log_sum_exp(&terms)
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// `B^(m+1) / (m+1)! <= eta / 2`, the tail condition a truncation degree must
/// satisfy.
pub fn tail_condition(bound: f64, m: usize, eta: f64) -> bool {
    if bound <= 0.0 {
        return true;
    }
    let k = m + 1;
    let log_fact: f64 = (1..=k).map(|j| (j as f64).ln()).sum();
    k as f64 * bound.ln() - log_fact <= (eta / 2.0).ln() + 1e-12
}

/// `ceil(ln(2 / eta) / ln(3 / e))`.
pub fn taylor_tail(eta: f64) -> f64 {
    ((2.0 / eta).ln() / (3.0f64.ln() - 1.0)).ceil()
}

/// Whether no non-trivial `{-1, 0, 1}` combination of `lambda` vanishes, by
/// counting patterns per reachable sum (capped at 2).
pub fn is_disassociated(layout: &Layout, lambda: &[Vec<u64>]) -> bool {
    use std::collections::HashMap;
    let zero = vec![0u64; layout.orders.len()];
    let mut counts: HashMap<Vec<u64>, u8> = HashMap::from([(zero.clone(), 1)]);
    for l in lambda {
        let mut next: HashMap<Vec<u64>, u8> = HashMap::new();
        for (sum, &c) in &counts {
            for e in [-1i64, 0, 1] {
                let s = layout.signed_sum(&[sum.clone(), l.clone()], &[1, e]);
                let entry = next.entry(s).or_insert(0);
                *entry = (*entry + c).min(2);
            }
        }
        counts = next;
        if counts.get(&zero).copied().unwrap_or(0) > 1 {
            return false;
        }
    }
    true
}
