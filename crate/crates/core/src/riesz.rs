//! Generalized Riesz products `prod_i (1 + eps_i phi_i)`, their Fourier
//! support, and the truncated exponential `p_m(psi) / E p_m(psi)` that turns
//! `exp(sum_phi c_phi (1 + phi))` into a non-negative combination of them.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::cover;
use crate::error::{Error, Result};
use crate::family::{Functional, Sign};
use crate::group::{DualElement, Element, GroupSpec};
use crate::numeric::{self, ln_factorials, log_truncated_exp};

/// Fourier coefficients below this fraction of `max |R^|` count as zero.
pub const SUPPORT_THRESHOLD: f64 = 1e-9;

/// Default cap on the number of materialized multinomial terms.
pub const DEFAULT_MAX_TERMS: u64 = 1_000_000;

/// One factor `1 + eps * phi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Factor {
    pub functional: Functional,
    pub eps: i8,
}

impl Factor {
    pub fn new(functional: Functional, eps: i8) -> Result<Self> {
        if !(-1..=1).contains(&eps) {
            return Err(Error::InvalidEps(eps));
        }
        Ok(Self { functional, eps })
    }

    pub fn plus(functional: Functional) -> Self {
        Self { functional, eps: 1 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RieszProduct {
    factors: Vec<Factor>,
}

/// Fourier support of a Riesz product and a set covering it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RieszSupport {
    pub spectrum: Vec<DualElement>,
    pub cover: Vec<DualElement>,
}

impl RieszProduct {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        for f in &factors {
            Factor::new(f.functional, f.eps)?;
        }
        Ok(Self { factors })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// `prod_b (1 + phi_b)^{a_b}` with every factor at `eps = +1`.
    pub fn from_multiplicities(basis: &[Functional], multiplicities: &[u32]) -> Self {
        let factors = basis
            .iter()
            .zip(multiplicities)
            .flat_map(|(&phi, &a)| core::iter::repeat_n(Factor::plus(phi), a as usize))
            .collect();
        Self { factors }
    }

    pub fn degree(&self) -> usize {
        self.factors.len()
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn eval(&self, group: &GroupSpec, x: Element) -> f64 {
        self.factors
            .iter()
            .map(|f| 1.0 + f.eps as f64 * f.functional.value_at(group, x))
            .product()
    }

    pub fn realize(&self, group: &GroupSpec) -> Vec<f64> {
        let mut out = vec![1.0; group.size()];
        for f in self.factors.iter().filter(|f| f.eps != 0) {
            let e = f.eps as f64;
            for (slot, v) in out.iter_mut().zip(f.functional.realize(group)) {
                *slot *= 1.0 + e * v;
            }
        }
        out
    }

    /// `R / max R` over `G`, computed in the log domain so that products of
    /// large degree do not overflow. Returns zeros when `R` vanishes.
    pub fn realize_scaled(&self, group: &GroupSpec) -> Vec<f64> {
        let mut logs = vec![0.0; group.size()];
        for f in self.factors.iter().filter(|f| f.eps != 0) {
            let e = f.eps as f64;
            for (slot, v) in logs.iter_mut().zip(f.functional.realize(group)) {
                *slot += (1.0 + e * v).max(0.0).ln();
            }
        }
        scale_logs(&logs)
    }

    /// `Spec_0(R)` and a cover `Lambda` with `|Lambda| <= degree(R)`.
    ///
    /// For each frequency class `{gamma, -gamma}` occurring `t` times among the
    /// factors, `Lambda` receives `gamma, 2 gamma, ..., t gamma` (zero dropped,
    /// a multiple already present is replaced by its negation). Distinct classes
    /// can still collide on a multiple, so the cover is checked and any element
    /// left uncovered is added directly while the degree budget allows.
    pub fn support(&self, group: &GroupSpec) -> Result<RieszSupport> {
        let spectrum = zero_spectrum(group, &self.realize_scaled(group))?;
        let mut classes: Vec<(DualElement, i64)> = Vec::new();
        for f in self.factors.iter().filter(|f| f.eps != 0) {
            let gamma = f.functional.gamma;
            if gamma.is_zero() {
                continue;
            }
            let neg = group.neg(gamma);
            match classes.iter_mut().find(|(b, _)| *b == gamma || *b == neg) {
                Some((_, t)) => *t += 1,
                None => classes.push((gamma, 1)),
            }
        }
        let budget: usize = classes.iter().map(|&(_, t)| t as usize).sum();
        let mut lambda: Vec<DualElement> = Vec::new();
        for &(base, t) in &classes {
            for j in 1..=t {
                let e = group.scale(base, j);
                if e.is_zero() {
                    continue;
                }
                if !lambda.contains(&e) {
                    lambda.push(e);
                } else {
                    let ne = group.neg(e);
                    if !lambda.contains(&ne) {
                        lambda.push(ne);
                    }
                }
            }
        }
        loop {
            match cover::is_covered(group, &spectrum, &lambda) {
                Ok(_) => break,
                Err(witness) => {
                    if lambda.len() >= budget {
                        return Err(Error::CoverConstruction { witness, budget });
                    }
                    lambda.push(witness);
                }
            }
        }
        lambda.sort();
        Ok(RieszSupport {
            spectrum,
            cover: lambda,
        })
    }
}

/// `exp(l - max l)`, or all zeros when every entry is `-inf`.
pub(crate) fn scale_logs(logs: &[f64]) -> Vec<f64> {
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return vec![0.0; logs.len()];
    }
    logs.iter().map(|&l| (l - max).exp()).collect()
}

/// `{gamma : |f^(gamma)| > SUPPORT_THRESHOLD * max |f^|}`.
pub fn zero_spectrum(group: &GroupSpec, values: &[f64]) -> Result<Vec<DualElement>> {
    let table = group.fourier_transform(values)?;
    let max = table
        .coefficients()
        .iter()
        .fold(0.0f64, |a, c| a.max(c.norm()));
    if max == 0.0 {
        return Ok(Vec::new());
    }
    Ok(table.spectrum(SUPPORT_THRESHOLD * max))
}

/// Smallest `m` with `B^{m+1} / (m+1)! <= eta / 2`, so that
/// `sup_{x in [0, B]} |e^x - p_m(x)| / e^x <= eta / 2`.
pub fn taylor_degree(bound: f64, eta: f64) -> Result<usize> {
    numeric::check_accuracy("eta", eta)?;
    if !(bound >= 0.0) || !bound.is_finite() {
        return Err(Error::ParameterOutOfRange {
            name: "B",
            value: bound,
            range: "[0, inf)",
        });
    }
    if bound == 0.0 {
        return Ok(0);
    }
    let target = (eta / 2.0).ln();
    let lb = bound.ln();
    // log(B^{m+1} / (m+1)!)
    let mut log_ratio = lb;
    let mut m = 0usize;
    while log_ratio > target {
        m += 1;
        log_ratio += lb - ((m + 1) as f64).ln();
    }
    Ok(m)
}

/// Additive tail `L(eta) = ceil(ln(2/eta) / ln(3/e))` with
/// `taylor_degree(B, eta) <= 3B + L(eta)` for every `B >= 0`.
///
/// With `M = m + 1 >= max(3B, L)`, Stirling gives
/// `B^M / M! <= (eB/M)^M <= (e/3)^M <= eta/2`.
pub fn taylor_tail(eta: f64) -> usize {
    let rate = (3.0 / core::f64::consts::E).ln();
    ((2.0 / eta).ln() / rate).ceil().max(0.0) as usize
}

/// Explicit form of `m <= 3B + O(log(1/eta) / log log(1/eta))`.
pub fn taylor_degree_bound(bound: f64, eta: f64) -> f64 {
    3.0 * bound + taylor_tail(eta) as f64
}

/// `C(k + m, m)`, saturating at `u128::MAX`.
pub fn multiset_count(k: usize, m: usize) -> u128 {
    let (small, large) = if k < m { (k, m) } else { (m, k) };
    let mut acc: u128 = 1;
    for i in 1..=small as u128 {
        acc = match acc.checked_mul(large as u128 + i) {
            Some(v) => v / i,
            None => return u128::MAX,
        };
    }
    acc
}

/// Multiplicity vectors `a` in `N^k` with `|a| <= max_degree`, by total degree
/// and then descending lexicographic order within a degree.
#[derive(Clone, Debug)]
pub struct Multisets {
    current: Vec<u32>,
    degree: usize,
    max_degree: usize,
    started: bool,
    done: bool,
}

impl Multisets {
    pub fn new(k: usize, max_degree: usize) -> Self {
        Self {
            current: vec![0; k],
            degree: 0,
            max_degree,
            started: false,
            done: false,
        }
    }
}

impl Iterator for Multisets {
    type Item = Vec<u32>;

    fn next(&mut self) -> Option<Vec<u32>> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(self.current.clone());
        }
        let k = self.current.len();
        if k == 0 {
            self.done = true;
            return None;
        }
        let last = self.current[k - 1];
        self.current[k - 1] = 0;
        match (0..k - 1).rev().find(|&i| self.current[i] > 0) {
            Some(i) => {
                self.current[i] -= 1;
                self.current[i + 1] = last + 1;
            }
            None => {
                self.degree += 1;
                if self.degree > self.max_degree {
                    self.done = true;
                    return None;
                }
                self.current[0] = self.degree as u32;
            }
        }
        Some(self.current.clone())
    }
}

/// One term `w(a) prod_b (1 + phi_b)^{a_b}` of an expanded truncated exponential.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionTerm {
    pub coefficient: f64,
    pub multiplicities: Vec<u32>,
}

impl ExpansionTerm {
    pub fn degree(&self) -> usize {
        self.multiplicities.iter().map(|&a| a as usize).sum()
    }
}

/// `h~ = p_m(psi) / E_mu p_m(psi)` with `psi = sum_b c_b (1 + phi_b)`.
///
/// Stored in factored form; the multinomial terms are produced lazily by
/// [`TruncatedExponential::terms`].
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedExponential {
    basis: Vec<Functional>,
    coefficients: Vec<f64>,
    degree: usize,
    eta: f64,
    log_normalizer: f64,
    ln_fact: Vec<f64>,
}

/// Truncates `h = exp(sum_phi c_phi (1 + phi))` to a density that is a
/// non-negative combination of Riesz products of degree at most
/// `m = taylor_degree(2 sum c, eta)`, with `||h / E h - h~||_1 <= eta`.
///
/// Entries for the same signed functional are summed, and `c_+ (1 + phi)` with
/// `c_- (1 - phi)` is folded into `|c_+ - c_-| (1 +- phi)`: the difference is a
/// constant factor of `h`, which normalization removes.
pub fn truncate_exponential(
    group: &GroupSpec,
    coefficients: &[(Functional, f64)],
    eta: f64,
) -> Result<TruncatedExponential> {
    numeric::check_accuracy("eta", eta)?;
    let mut merged: Vec<(Functional, f64)> = Vec::new();
    for &(phi, c) in coefficients {
        group.dual_at(phi.gamma.index())?;
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::ParameterOutOfRange {
                name: "coefficient",
                value: c,
                range: "[0, inf)",
            });
        }
        let key = phi.unsigned();
        let signed = c * phi.sign.value();
        match merged.iter_mut().find(|(p, _)| *p == key) {
            Some((_, acc)) => *acc += signed,
            None => merged.push((key, signed)),
        }
    }
    let mut pairs: Vec<(Functional, f64)> = merged
        .into_iter()
        .filter(|&(_, c)| c != 0.0)
        .map(|(phi, c)| (phi.with_sign(Sign::from_value(c)), c.abs()))
        .collect();
    pairs.sort_by_key(|a| a.0);
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    let degree = taylor_degree(2.0 * total, eta)?;
    let mut out = TruncatedExponential {
        basis: pairs.iter().map(|p| p.0).collect(),
        coefficients: pairs.iter().map(|p| p.1).collect(),
        degree,
        eta,
        log_normalizer: 0.0,
        ln_fact: ln_factorials(degree),
    };
    let logs: Vec<f64> = out
        .psi(group)
        .into_iter()
        .map(|p| log_truncated_exp(p, degree))
        .collect();
    out.log_normalizer = numeric::log_mean_exp(&logs);
    Ok(out)
}

impl TruncatedExponential {
    /// Signed functionals with positive coefficient, in canonical order.
    pub fn basis(&self) -> &[Functional] {
        &self.basis
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// `m`: the degree of every term.
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    /// `sum_b c_b`.
    pub fn total_weight(&self) -> f64 {
        self.coefficients.iter().sum()
    }

    /// `log E_mu p_m(psi)`.
    pub fn log_normalizer(&self) -> f64 {
        self.log_normalizer
    }

    /// Number of multinomial terms, `C(k + m, m)`.
    pub fn term_count(&self) -> u128 {
        multiset_count(self.basis.len(), self.degree)
    }

    pub fn is_expandable(&self, cap: u64) -> bool {
        self.term_count() <= cap as u128
    }

    fn basis_values(&self, group: &GroupSpec) -> Vec<Vec<f64>> {
        self.basis.iter().map(|phi| phi.realize(group)).collect()
    }

    /// `psi(x) = sum_b c_b (1 + phi_b(x))`.
    pub fn psi(&self, group: &GroupSpec) -> Vec<f64> {
        let mut psi = vec![0.0; group.size()];
        for (vals, &c) in self.basis_values(group).iter().zip(&self.coefficients) {
            for (p, v) in psi.iter_mut().zip(vals) {
                *p += c * (1.0 + v);
            }
        }
        psi
    }

    /// `h~` over `G`, evaluated through `p_m` in the log domain.
    pub fn realize(&self, group: &GroupSpec) -> Vec<f64> {
        self.psi(group)
            .into_iter()
            .map(|p| (log_truncated_exp(p, self.degree) - self.log_normalizer).exp())
            .collect()
    }

    /// `exp(psi) / E exp(psi)`, the function being approximated.
    pub fn target(&self, group: &GroupSpec) -> Vec<f64> {
        numeric::gibbs(&self.psi(group)).0
    }

    /// `||h / E h - h~||_1` by exact summation.
    pub fn l1_error(&self, group: &GroupSpec) -> f64 {
        let target = self.target(group);
        let approx = self.realize(group);
        target
            .iter()
            .zip(&approx)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            / group.size() as f64
    }

    /// `log w(a) = sum_b (a_b log c_b - log a_b!) - log E p_m(psi)`.
    pub fn log_weight(&self, multiplicities: &[u32]) -> f64 {
        self.coefficients
            .iter()
            .zip(multiplicities)
            .map(|(&c, &a)| a as f64 * c.ln() - self.ln_fact[a as usize])
            .sum::<f64>()
            - self.log_normalizer
    }

    /// Lazily enumerates all `C(k + m, m)` terms.
    pub fn terms(&self) -> impl Iterator<Item = ExpansionTerm> + '_ {
        Multisets::new(self.basis.len(), self.degree).map(move |a| ExpansionTerm {
            coefficient: self.log_weight(&a).exp(),
            multiplicities: a,
        })
    }

    pub fn product(&self, multiplicities: &[u32]) -> RieszProduct {
        RieszProduct::from_multiplicities(&self.basis, multiplicities)
    }

    /// Materializes every term, refusing when there are more than `cap`.
    pub fn expand(&self, cap: u64) -> Result<Vec<ExpansionTerm>> {
        let count = self.term_count();
        if count > cap as u128 {
            return Err(Error::TermCapExceeded { count, cap });
        }
        Ok(self.terms().collect())
    }

    /// `(1 + phi_b(x))^j` for every basis element, point and `j <= m`.
    pub(crate) fn power_tables(&self, group: &GroupSpec) -> Vec<Vec<f64>> {
        let n = group.size();
        let m = self.degree;
        self.basis_values(group)
            .into_iter()
            .map(|vals| {
                let mut table = vec![1.0; n * (m + 1)];
                for (x, v) in vals.into_iter().enumerate() {
                    let base = 1.0 + v;
                    for j in 1..=m {
                        table[x * (m + 1) + j] = table[x * (m + 1) + j - 1] * base;
                    }
                }
                table
            })
            .collect()
    }

    /// `h~` over `G` by summing the materialized multinomial terms.
    pub fn realize_expanded(&self, group: &GroupSpec, cap: u64) -> Result<Vec<f64>> {
        let terms = self.expand(cap)?;
        let n = group.size();
        let tables = self.power_tables(group);
        let stride = self.degree + 1;
        let mut out = vec![0.0; n];
        for term in &terms {
            for (x, slot) in out.iter_mut().enumerate() {
                let mut v = term.coefficient;
                for (t, &a) in tables.iter().zip(&term.multiplicities) {
                    v *= t[x * stride + a as usize];
                }
                *slot += v;
            }
        }
        Ok(out)
    }
}

/// A non-negative combination `sum_i c_i R_i` of Riesz products.
#[derive(Clone, Debug, PartialEq)]
pub enum RieszCombination {
    Terms(Vec<(f64, RieszProduct)>),
    Truncated(TruncatedExponential),
}

impl RieszCombination {
    pub fn from_terms(terms: Vec<(f64, RieszProduct)>) -> Result<Self> {
        for &(c, _) in &terms {
            if !(c >= 0.0) || !c.is_finite() {
                return Err(Error::ParameterOutOfRange {
                    name: "coefficient",
                    value: c,
                    range: "[0, inf)",
                });
            }
        }
        Ok(Self::Terms(terms))
    }

    /// The constant density `1`.
    pub fn constant() -> Self {
        Self::Terms(vec![(1.0, RieszProduct::empty())])
    }

    pub fn realize(&self, group: &GroupSpec) -> Vec<f64> {
        match self {
            Self::Terms(terms) => {
                let mut out = vec![0.0; group.size()];
                for (c, r) in terms {
                    if *c == 0.0 {
                        continue;
                    }
                    for (slot, v) in out.iter_mut().zip(r.realize(group)) {
                        *slot += c * v;
                    }
                }
                out
            }
            Self::Truncated(t) => t.realize(group),
        }
    }

    pub fn eval(&self, group: &GroupSpec, x: Element) -> f64 {
        match self {
            Self::Terms(terms) => terms.iter().map(|(c, r)| c * r.eval(group, x)).sum(),
            Self::Truncated(t) => t.realize(group)[x.index()],
        }
    }

    /// Largest degree of any term.
    pub fn degree(&self) -> usize {
        match self {
            Self::Terms(terms) => terms.iter().map(|(_, r)| r.degree()).max().unwrap_or(0),
            Self::Truncated(t) => t.degree(),
        }
    }

    /// Distinct unsigned functionals used by the terms.
    pub fn functionals(&self) -> Vec<Functional> {
        let mut out: Vec<Functional> = match self {
            Self::Terms(terms) => terms
                .iter()
                .flat_map(|(_, r)| r.factors().iter().filter(|f| f.eps != 0))
                .map(|f| f.functional.unsigned())
                .collect(),
            Self::Truncated(t) => t.basis().iter().map(|f| f.unsigned()).collect(),
        };
        out.sort();
        out.dedup();
        out
    }
}
