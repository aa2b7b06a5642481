//! Signed-sum covers of subsets of the dual group, disassociated sets, and the
//! covering constructions for the large spectrum.
//!
//! A set `S` is covered by `Lambda` when every element of `S` is a sum
//! `sum_lambda eps_lambda lambda` with `eps in {-1, 0, 1}`. Coverage and
//! disassociativity are decided by dynamic programming over the group, never by
//! enumerating the `3^|Lambda|` sign patterns.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::density::Density;
use crate::descent::{sparse_approximate, SparseReport};
use crate::error::{Error, Result};
use crate::family::{Family, Functional};
use crate::group::{DualElement, GroupSpec};
use crate::numeric::{self, check_accuracy, ln_factorials};
use crate::riesz::{self, Multisets, RieszProduct, SUPPORT_THRESHOLD};

/// Number of multinomial terms Bloom's selection examines before it falls
/// back to a partial scan.
pub const DEFAULT_SCAN_LIMIT: usize = 20_000;

/// `sum_i eps_i lambda_i`.
pub fn signed_sum(group: &GroupSpec, lambda: &[DualElement], eps: &[i8]) -> DualElement {
    lambda
        .iter()
        .zip(eps)
        .fold(DualElement::ZERO, |acc, (&l, &e)| {
            group.add(acc, group.scale(l, e as i64))
        })
}

/// Sign assignments proving that every listed element is a signed sum over
/// `lambda`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverCertificate {
    pub lambda: Vec<DualElement>,
    /// `(gamma, eps)` with one sign per element of `lambda`.
    pub assignments: Vec<(DualElement, Vec<i8>)>,
}

impl CoverCertificate {
    /// `d = |Lambda|`.
    pub fn d(&self) -> usize {
        self.lambda.len()
    }

    pub fn covered(&self) -> impl Iterator<Item = DualElement> + '_ {
        self.assignments.iter().map(|(g, _)| *g)
    }

    /// Re-sums every assignment; returns the first element that fails.
    pub fn verify(&self, group: &GroupSpec) -> core::result::Result<(), DualElement> {
        for (gamma, eps) in &self.assignments {
            let valid = eps.len() == self.lambda.len()
                && eps.iter().all(|e| (-1..=1).contains(e))
                && signed_sum(group, &self.lambda, eps) == *gamma;
            if !valid {
                return Err(*gamma);
            }
        }
        Ok(())
    }

    /// Checks that every element of `set` has a valid assignment.
    pub fn verify_covers(
        &self,
        group: &GroupSpec,
        set: &[DualElement],
    ) -> core::result::Result<(), DualElement> {
        self.verify(group)?;
        for gamma in set {
            if !self.assignments.iter().any(|(g, _)| g == gamma) {
                return Err(*gamma);
            }
        }
        Ok(())
    }
}

/// Decides whether `set` is covered by `lambda`. On success the certificate
/// lists the elements of `set` in their first-occurrence order; on failure the
/// first unreachable element is returned.
///
/// `R_0 = {0}`, `R_j = R_{j-1} + {-lambda_j, 0, lambda_j}`. Each element records
/// the layer where it first appears and its predecessor, so an assignment is
/// read off backwards through strictly decreasing layers.
pub fn is_covered(
    group: &GroupSpec,
    set: &[DualElement],
    lambda: &[DualElement],
) -> core::result::Result<CoverCertificate, DualElement> {
    const UNSEEN: usize = usize::MAX;
    let n = group.size();
    let mut layer = vec![UNSEEN; n];
    let mut back: Vec<(usize, i8)> = vec![(0, 0); n];
    let mut reached = vec![0usize];
    layer[0] = 0;
    for (j, &l) in lambda.iter().enumerate() {
        let before = reached.len();
        for r in 0..before {
            let from = reached[r];
            for eps in [1i8, -1] {
                let to = group
                    .add(DualElement::from_index(from), group.scale(l, eps as i64))
                    .index();
                if layer[to] == UNSEEN {
                    layer[to] = j + 1;
                    back[to] = (from, eps);
                    reached.push(to);
                }
            }
        }
    }
    let mut assignments: Vec<(DualElement, Vec<i8>)> = Vec::new();
    for &gamma in set {
        if layer[gamma.index()] == UNSEEN {
            return Err(gamma);
        }
        if assignments.iter().any(|(g, _)| *g == gamma) {
            continue;
        }
        let mut eps = vec![0i8; lambda.len()];
        let mut at = gamma.index();
        while layer[at] > 0 {
            let (from, e) = back[at];
            eps[layer[at] - 1] = e;
            at = from;
        }
        assignments.push((gamma, eps));
    }
    Ok(CoverCertificate {
        lambda: lambda.to_vec(),
        assignments,
    })
}

/// Number of sign patterns reaching each element, capped at 2.
fn pattern_counts(group: &GroupSpec, counts: &[u8], l: DualElement) -> Vec<u8> {
    group
        .duals()
        .map(|x| {
            let total = counts[x.index()] as u32
                + counts[group.sub(x, l).index()] as u32
                + counts[group.add(x, l).index()] as u32;
            total.min(2) as u8
        })
        .collect()
}

fn empty_counts(group: &GroupSpec) -> Vec<u8> {
    let mut counts = vec![0u8; group.size()];
    counts[0] = 1;
    counts
}

/// Whether the only `{-1, 0, 1}` pattern with `sum eps lambda = 0` is zero.
pub fn is_disassociated(group: &GroupSpec, lambda: &[DualElement]) -> bool {
    let mut counts = empty_counts(group);
    for &l in lambda {
        counts = pattern_counts(group, &counts, l);
        if counts[0] > 1 {
            return false;
        }
    }
    true
}

/// Each covered element is written as a signed tuple over `lambda` with
/// repetitions allowed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TupleCoverCertificate {
    pub lambda: Vec<DualElement>,
    /// `(gamma, [(index into lambda, sign)])`.
    pub tuples: Vec<(DualElement, Vec<(usize, i8)>)>,
    pub max_len: usize,
}

impl TupleCoverCertificate {
    pub fn verify(&self, group: &GroupSpec) -> core::result::Result<(), DualElement> {
        for (gamma, tuple) in &self.tuples {
            let mut sum = DualElement::ZERO;
            let mut ok = tuple.len() <= self.max_len;
            for &(i, s) in tuple {
                match self.lambda.get(i) {
                    Some(&l) if s == 1 || s == -1 => sum = group.add(sum, group.scale(l, s as i64)),
                    _ => ok = false,
                }
            }
            if !ok || sum != *gamma {
                return Err(*gamma);
            }
        }
        Ok(())
    }
}

/// Shortest signed tuples over `lambda` reaching each element of `set`, by
/// breadth-first search over the group with steps `+-lambda_i`.
pub fn shortest_tuples(
    group: &GroupSpec,
    set: &[DualElement],
    lambda: &[DualElement],
    max_len: usize,
) -> Result<TupleCoverCertificate> {
    const UNSEEN: usize = usize::MAX;
    let n = group.size();
    let mut dist = vec![UNSEEN; n];
    let mut back: Vec<(usize, usize, i8)> = vec![(0, 0, 0); n];
    let mut queue = VecDeque::from([0usize]);
    dist[0] = 0;
    while let Some(at) = queue.pop_front() {
        if dist[at] >= max_len {
            continue;
        }
        for (i, &l) in lambda.iter().enumerate() {
            for s in [1i8, -1] {
                let to = group
                    .add(DualElement::from_index(at), group.scale(l, s as i64))
                    .index();
                if dist[to] == UNSEEN {
                    dist[to] = dist[at] + 1;
                    back[to] = (at, i, s);
                    queue.push_back(to);
                }
            }
        }
    }
    let mut tuples: Vec<(DualElement, Vec<(usize, i8)>)> = Vec::new();
    for &gamma in set {
        if dist[gamma.index()] == UNSEEN {
            return Err(Error::TupleNotFound {
                witness: gamma,
                max_len,
            });
        }
        if tuples.iter().any(|(g, _)| *g == gamma) {
            continue;
        }
        let mut tuple = Vec::new();
        let mut at = gamma.index();
        while at != 0 {
            let (from, i, s) = back[at];
            tuple.push((i, s));
            at = from;
        }
        tuple.reverse();
        tuples.push((gamma, tuple));
    }
    Ok(TupleCoverCertificate {
        lambda: lambda.to_vec(),
        tuples,
        max_len,
    })
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::ParameterOutOfRange {
            name: "delta",
            value: delta,
            range: "(0, inf)",
        })
    }
}

fn bound_check(what: &'static str, value: f64, bound: f64) -> Result<()> {
    if value <= bound + 1e-9 * (1.0 + bound.abs()) {
        Ok(())
    } else {
        Err(Error::BoundViolated { what, value, bound })
    }
}

fn covered_or_fail(
    group: &GroupSpec,
    set: &[DualElement],
    lambda: &[DualElement],
) -> Result<CoverCertificate> {
    is_covered(group, set, lambda).map_err(|witness| Error::CoverConstruction {
        witness,
        budget: lambda.len(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChangCover {
    pub spectrum: Vec<DualElement>,
    pub lambda: Vec<DualElement>,
    pub certificate: CoverCertificate,
    pub entropy: f64,
    /// `4 Ent(f) / delta^2`.
    pub bound: f64,
}

/// Greedy maximal disassociated subset of `Spec_delta(f)` in canonical order.
/// Maximality makes it a cover: an element that cannot be added closes a
/// non-trivial zero sum, which expresses it over the set.
pub fn chang_cover(group: &GroupSpec, f: &Density, delta: f64) -> Result<ChangCover> {
    check_delta(delta)?;
    let spectrum = group.spectrum(f.values(), delta)?;
    let mut counts = empty_counts(group);
    let mut lambda = Vec::new();
    for &gamma in &spectrum {
        let next = pattern_counts(group, &counts, gamma);
        if next[0] == 1 {
            counts = next;
            lambda.push(gamma);
        }
    }
    let entropy = f.relative_entropy();
    let bound = 4.0 * entropy / (delta * delta);
    bound_check("|Lambda| <= 4 Ent / delta^2", lambda.len() as f64, bound)?;
    let certificate = covered_or_fail(group, &spectrum, &lambda)?;
    Ok(ChangCover {
        spectrum,
        lambda,
        certificate,
        entropy,
        bound,
    })
}

/// Distinct non-zero frequencies of the functionals, in canonical order.
fn frequencies(functionals: &[Functional]) -> Vec<DualElement> {
    let mut out: Vec<DualElement> = functionals
        .iter()
        .map(|phi| phi.gamma)
        .filter(|g| !g.is_zero())
        .collect();
    out.sort();
    out.dedup();
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct F2Cover {
    /// `Spec_eta(f)`.
    pub spectrum: Vec<DualElement>,
    pub lambda: Vec<DualElement>,
    pub certificate: CoverCertificate,
    /// `9 Ent(f) / eta^2`.
    pub bound: f64,
    pub approximation: SparseReport,
}

/// On `F_2^n` every character is real, so `||f - g||_F <= eta` over the real
/// parts gives `Spec_eta(f) within Spec_0(g)`, and `Spec_0(g)` lies in the
/// span of the frequencies used by `g`.
pub fn chang_cover_f2(group: &GroupSpec, f: &Density, eta: f64) -> Result<F2Cover> {
    if !group.is_elementary_2() {
        return Err(Error::NotElementaryAbelian);
    }
    check_accuracy("eta", eta)?;
    let all: Vec<DualElement> = group.duals().collect();
    let family = Family::real_parts(group, &all)?;
    let approx = sparse_approximate(f, &family, eta)?;
    let lambda = frequencies(approx.trace.functionals());
    let spectrum = group.spectrum(f.values(), eta)?;
    let bound = approx.report.sparsity_bound;
    bound_check("|Lambda| <= 9 Ent / eta^2", lambda.len() as f64, bound)?;
    let certificate = covered_or_fail(group, &spectrum, &lambda)?;
    Ok(F2Cover {
        spectrum,
        lambda,
        certificate,
        bound,
        approximation: approx.report,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeakChangCover {
    pub spectrum: Vec<DualElement>,
    pub lambda: Vec<DualElement>,
    pub certificate: TupleCoverCertificate,
    /// `18 Ent(f) / delta^2`.
    pub bound: f64,
    pub approximation: SparseReport,
}

/// Approximates `f` to `delta / sqrt 2` over all characters; every element of
/// `Spec_delta(f)` then lies in `Spec_0` of some term of degree at most `m`,
/// hence is a signed tuple of length at most `m` over the frequencies used.
pub fn weak_chang_cover(group: &GroupSpec, f: &Density, delta: f64) -> Result<WeakChangCover> {
    check_accuracy("delta", delta)?;
    let family = Family::characters(group)?;
    let approx = sparse_approximate(f, &family, delta / core::f64::consts::SQRT_2)?;
    let lambda = frequencies(approx.trace.functionals());
    let spectrum = group.spectrum(f.values(), delta)?;
    let bound = 18.0 * f.relative_entropy() / (delta * delta);
    bound_check("|Lambda| <= 18 Ent / delta^2", lambda.len() as f64, bound)?;
    let certificate = shortest_tuples(group, &spectrum, &lambda, approx.truncation.degree())?;
    Ok(WeakChangCover {
        spectrum,
        lambda,
        certificate,
        bound,
        approximation: approx.report,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BloomOptions {
    /// Terms examined before the scan is reported partial.
    pub scan_limit: usize,
}

impl Default for BloomOptions {
    fn default() -> Self {
        Self {
            scan_limit: DEFAULT_SCAN_LIMIT,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BloomCover {
    pub spectrum: Vec<DualElement>,
    /// `S = Spec_0(R) ∩ Spec_delta(f)` for the selected term `R`.
    pub selected: Vec<DualElement>,
    pub lambda: Vec<DualElement>,
    pub certificate: CoverCertificate,
    /// Multiplicity of each signed functional in `R`.
    pub term: Vec<(Functional, u32)>,
    pub term_degree: usize,
    /// `(delta / 2) |Spec_delta(f)|`.
    pub size_bound: f64,
    /// `36 sqrt 2 Ent / delta + L(eta / 3)` with `eta = delta / (2 sqrt 2)`.
    pub degree_bound: f64,
    /// Whether only part of the expansion was examined.
    pub partial: bool,
    pub scanned: usize,
    /// `sum_i c_i E R_i` summed level by level as `E[psi^j / j!] / E p_m(psi)`.
    pub z_mass: f64,
    /// `sum_i c_i E R_i` over the examined terms of the full expansion.
    pub enumerated_mass: f64,
    /// Largest disagreement between a fully examined degree level summed term
    /// by term and the same level in closed form.
    pub level_mismatch: f64,
    /// `E |Spec_0(R_Z) ∩ Spec_delta(f)|`, known when the scan is complete.
    pub average_intersection: Option<f64>,
    pub approximation: SparseReport,
    pub in_theorem_range: bool,
}

/// Scores multinomial terms of a truncated exponential without overflowing at
/// large degree.
struct TermScanner<'a> {
    n: usize,
    /// `log(1 + phi_b(x))`, row per basis element.
    logs: Vec<Vec<f64>>,
    /// Conjugate characters for each element of the spectrum.
    characters: Vec<Vec<Complex64>>,
    truncation: &'a riesz::TruncatedExponential,
}

struct TermScore {
    /// `c_a E R_a`.
    mass: f64,
    hits: usize,
}

impl<'a> TermScanner<'a> {
    fn new(
        group: &GroupSpec,
        truncation: &'a riesz::TruncatedExponential,
        spectrum: &[DualElement],
    ) -> Self {
        let logs = truncation
            .basis()
            .iter()
            .map(|phi| {
                phi.realize(group)
                    .into_iter()
                    .map(|v| (1.0 + v).max(0.0).ln())
                    .collect()
            })
            .collect();
        let characters = spectrum
            .iter()
            .map(|&g| {
                group
                    .character_values(g)
                    .into_iter()
                    .map(|c| c.conj())
                    .collect()
            })
            .collect();
        Self {
            n: group.size(),
            logs,
            characters,
            truncation,
        }
    }

    fn score(&self, a: &[u32]) -> TermScore {
        let mut log_r = vec![0.0; self.n];
        for (row, &k) in self.logs.iter().zip(a) {
            if k == 0 {
                continue;
            }
            for (slot, l) in log_r.iter_mut().zip(row) {
                *slot += k as f64 * l;
            }
        }
        let max = log_r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return TermScore { mass: 0.0, hits: 0 };
        }
        let r: Vec<f64> = log_r.iter().map(|l| (l - max).exp()).collect();
        let mean = r.iter().sum::<f64>() / self.n as f64;
        let hits = self
            .characters
            .iter()
            .filter(|row| {
                let c = row
                    .iter()
                    .zip(&r)
                    .fold(Complex64::new(0.0, 0.0), |acc, (u, v)| acc + u * v)
                    / self.n as f64;
                c.norm() > SUPPORT_THRESHOLD * mean
            })
            .count();
        TermScore {
            mass: (self.truncation.log_weight(a) + max).exp() * mean,
            hits,
        }
    }
}

/// `E[psi^j / j!] / E p_m(psi)` for `j = 0..=m`.
fn level_masses(group: &GroupSpec, t: &riesz::TruncatedExponential) -> Vec<f64> {
    let psi = t.psi(group);
    let lf = ln_factorials(t.degree());
    (0..=t.degree())
        .map(|j| {
            let logs: Vec<f64> = psi
                .iter()
                .map(|&p| {
                    if j == 0 {
                        0.0
                    } else {
                        j as f64 * p.ln() - lf[j]
                    }
                })
                .collect();
            (numeric::log_mean_exp(&logs) - t.log_normalizer()).exp()
        })
        .collect()
}

/// Approximates `f` to `eta = delta / (2 sqrt 2)` over all characters, picks
/// the term `R` of the expansion maximizing `|Spec_0(R) ∩ Spec_delta(f)|`
/// (ties to smaller degree, then enumeration order) and covers that
/// intersection with the support cover of `R`.
///
/// Terms are examined in graded order up to `scan_limit`, together with the
/// path that repeatedly raises the multiplicity of largest marginal weight up
/// to the full degree. When the limit cuts the expansion short the result is
/// flagged partial and the size bound is checked directly.
pub fn bloom_cover(
    group: &GroupSpec,
    f: &Density,
    delta: f64,
    options: BloomOptions,
) -> Result<BloomCover> {
    check_accuracy("delta", delta)?;
    let eta = delta / (2.0 * core::f64::consts::SQRT_2);
    let family = Family::characters(group)?;
    let approx = sparse_approximate(f, &family, eta)?;
    let t = &approx.truncation;
    let spectrum = group.spectrum(f.values(), delta)?;
    let scanner = TermScanner::new(group, t, &spectrum);
    let k = t.basis().len();
    let m = t.degree();

    let levels = level_masses(group, t);
    let z_mass: f64 = levels.iter().sum();
    let mut level_sums = vec![0.0; m + 1];
    let mut complete_levels = 0usize;
    let mut enumerated_mass = 0.0;
    let mut weighted_hits = 0.0;
    let mut best: Option<(usize, usize, Vec<u32>)> = None;
    let mut consider = |a: Vec<u32>, score: &TermScore| {
        if score.mass <= 0.0 {
            return;
        }
        let degree = a.iter().map(|&x| x as usize).sum::<usize>();
        let better = match &best {
            None => true,
            Some((hits, deg, _)) => score.hits > *hits || (score.hits == *hits && degree < *deg),
        };
        if better {
            best = Some((score.hits, degree, a));
        }
    };

    let mut scanned = 0usize;
    let mut terms = Multisets::new(k, m);
    let mut partial = false;
    let mut current_level = 0usize;
    loop {
        if scanned >= options.scan_limit {
            partial = terms.next().is_some();
            break;
        }
        let Some(a) = terms.next() else {
            complete_levels = m + 1;
            break;
        };
        let degree = a.iter().map(|&x| x as usize).sum::<usize>();
        if degree > current_level {
            complete_levels = degree;
            current_level = degree;
        }
        let score = scanner.score(&a);
        scanned += 1;
        enumerated_mass += score.mass;
        level_sums[degree] += score.mass;
        weighted_hits += score.mass * score.hits as f64;
        consider(a, &score);
    }
    if partial {
        let mut a = vec![0u32; k];
        for _ in 0..m {
            let b = (0..k)
                .max_by(|&i, &j| {
                    let wi = t.coefficients()[i] / (a[i] + 1) as f64;
                    let wj = t.coefficients()[j] / (a[j] + 1) as f64;
                    wi.partial_cmp(&wj).unwrap().then(j.cmp(&i))
                })
                .expect("non-empty basis when the scan is partial");
            a[b] += 1;
            let score = scanner.score(&a);
            consider(a.clone(), &score);
        }
    }
    let level_mismatch = (0..complete_levels)
        .map(|j| (level_sums[j] - levels[j]).abs())
        .fold(0.0, f64::max);

    let (_, term_degree, multiplicities) = best.unwrap_or((0, 0, vec![0; k]));
    let product = RieszProduct::from_multiplicities(t.basis(), &multiplicities);
    let support = product.support(group)?;
    let selected: Vec<DualElement> = spectrum
        .iter()
        .copied()
        .filter(|g| support.spectrum.binary_search(g).is_ok())
        .collect();
    let size_bound = 0.5 * delta * spectrum.len() as f64;
    if (selected.len() as f64) < size_bound {
        return Err(Error::BoundViolated {
            what: "(delta / 2) |Spec_delta(f)| <= |S|",
            value: size_bound,
            bound: selected.len() as f64,
        });
    }
    let degree_bound = 36.0 * core::f64::consts::SQRT_2 * f.relative_entropy() / delta
        + riesz::taylor_tail(eta / 3.0) as f64;
    bound_check(
        "d <= degree bound",
        support.cover.len() as f64,
        degree_bound,
    )?;
    let certificate = covered_or_fail(group, &selected, &support.cover)?;
    let term = t
        .basis()
        .iter()
        .zip(&multiplicities)
        .filter(|(_, &a)| a > 0)
        .map(|(&phi, &a)| (phi, a))
        .collect();
    Ok(BloomCover {
        spectrum,
        selected,
        lambda: support.cover,
        certificate,
        term,
        term_degree,
        size_bound,
        degree_bound,
        partial,
        scanned,
        z_mass,
        enumerated_mass,
        level_mismatch,
        average_intersection: (!partial).then_some(weighted_hits),
        approximation: approx.report,
        in_theorem_range: numeric::in_theorem_range(delta),
    })
}
