//! Relative-entropy minimization under moment constraints
//! `<g, phi> >= <f, phi> - delta` and its concave dual
//! `max_{lambda >= 0} -log E exp(sum lambda phi) + sum lambda (<f, phi> - delta)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::density::Density;
use crate::error::{Error, Result};
use crate::family::{Family, Functional};
use crate::numeric::{self, check_accuracy};
use crate::riesz::{self, truncate_exponential, TruncatedExponential};

pub const KKT_TOLERANCE: f64 = 1e-8;
pub const MAX_ITERATIONS: usize = 100_000;
/// A family is reported Laplace pseudorandom on a sample set when no sample
/// exceeds the Gaussian bound by more than this.
pub const LAPLACE_TOLERANCE: f64 = 1e-9;

const ARMIJO: f64 = 1e-4;

/// `min Ent(g)` subject to `<g, phi> >= <f, phi> - delta` for every member.
#[derive(Clone, Debug)]
pub struct MomentProgram<'g> {
    f: Density,
    family: Family<'g>,
    delta: f64,
    /// `<f, phi> - delta` per member.
    rhs: Vec<f64>,
}

struct Evaluation {
    objective: f64,
    gradient: Vec<f64>,
    log_weights: Vec<f64>,
}

impl<'g> MomentProgram<'g> {
    pub fn new(f: &Density, family: &Family<'g>, delta: f64) -> Result<Self> {
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(Error::ParameterOutOfRange {
                name: "delta",
                value: delta,
                range: "[0, inf)",
            });
        }
        let rhs = family
            .pairings(f.values())?
            .into_iter()
            .map(|a| a - delta)
            .collect();
        Ok(Self {
            f: f.clone(),
            family: family.clone(),
            delta,
            rhs,
        })
    }

    pub fn density(&self) -> &Density {
        &self.f
    }

    pub fn family(&self) -> &Family<'g> {
        &self.family
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    fn check_lambda(&self, lambda: &[f64]) -> Result<()> {
        if lambda.len() != self.family.len() {
            return Err(Error::LengthMismatch {
                expected: self.family.len(),
                got: lambda.len(),
            });
        }
        for &l in lambda {
            if !(l >= 0.0) || !l.is_finite() {
                return Err(Error::ParameterOutOfRange {
                    name: "lambda",
                    value: l,
                    range: "[0, inf)",
                });
            }
        }
        Ok(())
    }

    /// `sum_phi lambda_phi phi` over `G`.
    fn exponent(&self, lambda: &[f64]) -> Vec<f64> {
        let n = self.family.group().size();
        let mut by_row = vec![0.0; self.family.basis().len()];
        for (i, &l) in lambda.iter().enumerate() {
            let (row, s) = self.family.member_row(i);
            by_row[row] += s * l;
        }
        let mut out = vec![0.0; n];
        for (row, &c) in by_row.iter().enumerate() {
            if c != 0.0 {
                for (slot, v) in out.iter_mut().zip(self.family.basis_row(row)) {
                    *slot += c * v;
                }
            }
        }
        out
    }

    fn evaluate(&self, lambda: &[f64]) -> Evaluation {
        let log_weights = self.exponent(lambda);
        let (g, log_z) = numeric::gibbs(&log_weights);
        let basis = self.family.basis_pairings(&g);
        let gradient = (0..lambda.len())
            .map(|i| {
                let (row, s) = self.family.member_row(i);
                self.rhs[i] - s * basis[row]
            })
            .collect();
        let linear: f64 = lambda.iter().zip(&self.rhs).map(|(l, b)| l * b).sum();
        Evaluation {
            objective: linear - log_z,
            gradient,
            log_weights,
        }
    }

    /// The dual objective at `lambda >= 0`.
    pub fn dual_objective(&self, lambda: &[f64]) -> Result<f64> {
        self.check_lambda(lambda)?;
        Ok(self.evaluate(lambda).objective)
    }

    /// `(<f, phi> - delta) - <g_lambda, phi>` per member.
    pub fn gradient(&self, lambda: &[f64]) -> Result<Vec<f64>> {
        self.check_lambda(lambda)?;
        Ok(self.evaluate(lambda).gradient)
    }

    /// `g_lambda = exp(sum lambda phi) / E exp(sum lambda phi)`.
    pub fn gibbs(&self, lambda: &[f64]) -> Result<Density> {
        self.check_lambda(lambda)?;
        Ok(Density::gibbs(&self.exponent(lambda)))
    }

    /// Largest constraint violation `max(0, <f, phi> - delta - <g, phi>)`.
    pub fn infeasibility(&self, g: &[f64]) -> Result<f64> {
        let pairings = self.family.pairings(g)?;
        Ok(pairings
            .iter()
            .zip(&self.rhs)
            .fold(0.0f64, |m, (p, b)| m.max(b - p)))
    }
}

/// `max_phi |min(lambda_phi, -grad_phi)|`, zero exactly at a KKT point of the
/// non-negativity constrained maximization.
fn kkt_residual(lambda: &[f64], gradient: &[f64]) -> f64 {
    lambda
        .iter()
        .zip(gradient)
        .fold(0.0f64, |m, (&l, &g)| m.max(l.min(-g).abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DualSolution {
    /// One multiplier per family member, in enumeration order.
    pub lambda: Vec<f64>,
    pub members: Vec<Functional>,
    pub dual_value: f64,
    /// `Ent(g_star)`.
    pub primal_value: f64,
    pub g_star: Density,
    /// `primal_value - dual_value`.
    pub gap: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Largest `dual_objective - Ent(f)` over every point the solver evaluated.
    pub max_weak_duality_violation: f64,
    /// Accepted objective values in order.
    pub objective_history: Vec<f64>,
}

impl DualSolution {
    pub fn sum_lambda(&self) -> f64 {
        self.lambda.iter().sum()
    }

    /// Members with a positive multiplier.
    pub fn weights(&self) -> Vec<(Functional, f64)> {
        self.members
            .iter()
            .zip(&self.lambda)
            .filter(|(_, &l)| l > 0.0)
            .map(|(&m, &l)| (m, l))
            .collect()
    }
}

/// Projected gradient ascent on the dual with Armijo backtracking along the
/// projection arc and Barzilai-Borwein step proposals. Stops at KKT residual
/// `KKT_TOLERANCE` or after `MAX_ITERATIONS`; in the latter case the best
/// iterate is returned with `converged = false`.
pub fn solve_dual(program: &MomentProgram<'_>) -> Result<DualSolution> {
    if !(program.delta > 0.0) {
        return Err(Error::ParameterOutOfRange {
            name: "delta",
            value: program.delta,
            range: "(0, inf)",
        });
    }
    let k = program.family.len();
    let entropy = program.f.relative_entropy();
    let mut lambda = vec![0.0; k];
    let mut current = program.evaluate(&lambda);
    let mut max_violation = current.objective - entropy;
    let mut history = vec![current.objective];
    let mut step = 1.0;
    let mut iterations = 0;
    let mut residual = kkt_residual(&lambda, &current.gradient);
    'outer: while residual > KKT_TOLERANCE && iterations < MAX_ITERATIONS {
        iterations += 1;
        let (candidate, next) = loop {
            let candidate: Vec<f64> = lambda
                .iter()
                .zip(&current.gradient)
                .map(|(l, g)| (l + step * g).max(0.0))
                .collect();
            let d: Vec<f64> = candidate.iter().zip(&lambda).map(|(a, b)| a - b).collect();
            let slope = dot(&current.gradient, &d);
            let next = program.evaluate(&candidate);
            max_violation = max_violation.max(next.objective - entropy);
            // Allow rounding noise in the objective so that progress near the
            // optimum is not rejected forever.
            let noise = 4.0 * f64::EPSILON * (1.0 + current.objective.abs());
            if next.objective >= current.objective + ARMIJO * slope - noise {
                break (candidate, next);
            }
            step *= 0.5;
            if step < 1e-30 {
                break 'outer;
            }
        };
        let s: Vec<f64> = candidate.iter().zip(&lambda).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = next
            .gradient
            .iter()
            .zip(&current.gradient)
            .map(|(a, b)| a - b)
            .collect();
        let sy = dot(&s, &y);
        step = if sy < 0.0 {
            dot(&s, &s) / -sy
        } else {
            step * 2.0
        }
        .clamp(1e-12, 1e12);
        lambda = candidate;
        current = next;
        history.push(current.objective);
        residual = kkt_residual(&lambda, &current.gradient);
    }
    let g_star = Density::gibbs(&current.log_weights);
    let primal_value = g_star.relative_entropy();
    Ok(DualSolution {
        members: program.family.members().to_vec(),
        dual_value: current.objective,
        primal_value,
        gap: primal_value - current.objective,
        kkt_residual: residual,
        iterations,
        converged: residual <= KKT_TOLERANCE,
        max_weak_duality_violation: max_violation,
        objective_history: history,
        g_star,
        lambda,
    })
}

/// Both sides of `Ent(f) - D(f || g_lambda) = dual(lambda) + delta sum lambda`
/// together with the weak-duality and `sum lambda <= Ent / delta` margins.
#[derive(Clone, Debug, PartialEq)]
pub struct DualityReport {
    pub entropy: f64,
    pub divergence: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub identity_error: f64,
    /// `Ent(f) - dual_value`.
    pub weak_duality_margin: f64,
    /// `Ent(f) / delta - sum lambda`; infinite when `delta = 0`.
    pub bound_margin: f64,
    pub gap: f64,
    pub converged: bool,
}

impl DualityReport {
    pub fn holds(&self, tolerance: f64) -> bool {
        self.identity_error <= tolerance
            && self.weak_duality_margin >= -1e-9
            && self.bound_margin >= -tolerance
    }
}

/// The identity holds for every `lambda`, since `E f = 1` makes
/// `E[f log g_lambda] = sum lambda <f, phi> - log E exp(sum lambda phi)`.
pub fn duality_report(program: &MomentProgram<'_>, sol: &DualSolution) -> Result<DualityReport> {
    program.check_lambda(&sol.lambda)?;
    let entropy = program.f.relative_entropy();
    let g = program.gibbs(&sol.lambda)?;
    let divergence = program.f.kl_divergence(&g)?;
    let dual = program.dual_objective(&sol.lambda)?;
    let sum: f64 = sol.lambda.iter().sum();
    let lhs = entropy - divergence;
    let rhs = dual + program.delta * sum;
    let bound_margin = if program.delta > 0.0 {
        entropy / program.delta - sum
    } else {
        f64::INFINITY
    };
    Ok(DualityReport {
        entropy,
        divergence,
        lhs,
        rhs,
        identity_error: (lhs - rhs).abs(),
        weak_duality_margin: entropy - dual,
        bound_margin,
        gap: sol.gap,
        converged: sol.converged,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LaplaceReport {
    /// `max_samples log E exp(sum lambda phi) - sum lambda^2 / 2`.
    pub max_margin: f64,
    pub worst_sample: Option<usize>,
    pub pseudorandom: bool,
}

/// Checks `log E exp(sum lambda phi) <= sum lambda^2 / 2` on each sample.
/// Passing is evidence on the samples only, not a proof for all `lambda`.
pub fn laplace_check(family: &Family<'_>, samples: &[Vec<f64>]) -> Result<LaplaceReport> {
    let n = family.group().size();
    let mut max_margin = f64::NEG_INFINITY;
    let mut worst_sample = None;
    for (index, lambda) in samples.iter().enumerate() {
        if lambda.len() != family.len() {
            return Err(Error::LengthMismatch {
                expected: family.len(),
                got: lambda.len(),
            });
        }
        let mut exponent = vec![0.0; n];
        for (i, &l) in lambda.iter().enumerate() {
            for (slot, v) in exponent.iter_mut().zip(family.values(i)) {
                *slot += l * v;
            }
        }
        let margin =
            numeric::log_mean_exp(&exponent) - 0.5 * lambda.iter().map(|l| l * l).sum::<f64>();
        if margin > max_margin {
            max_margin = margin;
            worst_sample = Some(index);
        }
    }
    Ok(LaplaceReport {
        max_margin,
        worst_sample,
        pseudorandom: max_margin <= LAPLACE_TOLERANCE,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SumOfSquares {
    /// `sum_phi <f, phi>^2`.
    pub sum_squares: f64,
    /// `2 Ent(f)`.
    pub twice_entropy: f64,
    /// Dual objective at `lambda_phi = |<f, phi>|` over the sign-adjusted
    /// family with `delta = 0`; at most `Ent(f)` by weak duality.
    pub witness_dual_value: f64,
    /// `log E exp(sum <f, phi> phi) - sum_squares / 2`; non-positive for a
    /// Laplace pseudorandom family.
    pub laplace_margin: f64,
}

impl SumOfSquares {
    pub fn holds(&self) -> bool {
        self.sum_squares <= self.twice_entropy + LAPLACE_TOLERANCE
    }
}

/// `sum <f, phi>^2` against `2 Ent(f)`, with the explicit dual witness.
pub fn sum_of_squares_bound(f: &Density, family: &Family<'_>) -> Result<SumOfSquares> {
    let a = family.pairings(f.values())?;
    let n = family.group().size();
    let mut exponent = vec![0.0; n];
    for (i, &ai) in a.iter().enumerate() {
        for (slot, v) in exponent.iter_mut().zip(family.values(i)) {
            *slot += ai * v;
        }
    }
    let sum_squares: f64 = a.iter().map(|x| x * x).sum();
    let log_mgf = numeric::log_mean_exp(&exponent);
    Ok(SumOfSquares {
        sum_squares,
        twice_entropy: 2.0 * f.relative_entropy(),
        witness_dual_value: sum_squares - log_mgf,
        laplace_margin: log_mgf - 0.5 * sum_squares,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LowDegreeReport {
    pub eta: f64,
    pub entropy: f64,
    pub sum_lambda: f64,
    /// `2 Ent / eta`.
    pub sum_lambda_bound: f64,
    pub degree: usize,
    /// `12 Ent / eta + L(eta / 2)`.
    pub degree_bound: f64,
    pub term_count: u128,
    pub truncation_error: f64,
    pub seminorm_error: f64,
    pub in_theorem_range: bool,
}

impl LowDegreeReport {
    pub fn all_bounds_hold(&self) -> bool {
        let slack = |b: f64| b + 1e-6 * (1.0 + b);
        self.sum_lambda <= slack(self.sum_lambda_bound)
            && self.degree as f64 <= slack(self.degree_bound)
            && self.seminorm_error <= self.eta
    }
}

#[derive(Clone, Debug)]
pub struct LowDegreeApproximation {
    pub solution: DualSolution,
    pub truncation: TruncatedExponential,
    pub values: Vec<f64>,
    pub report: LowDegreeReport,
}

/// Solves the program with `delta = eta / 2` over the symmetrized family and
/// truncates `g_star` at `eta / 2`.
pub fn low_degree_approximate(
    f: &Density,
    family: &Family<'_>,
    eta: f64,
) -> Result<LowDegreeApproximation> {
    check_accuracy("eta", eta)?;
    let group = family.group();
    let symmetric = family.symmetrized()?;
    let program = MomentProgram::new(f, &symmetric, eta / 2.0)?;
    let solution = solve_dual(&program)?;
    if !solution.converged {
        return Err(Error::DualNotConverged {
            iterations: solution.iterations,
            residual: solution.kkt_residual,
        });
    }
    let truncation = truncate_exponential(group, &solution.weights(), eta / 2.0)?;
    let values = truncation.realize(group);
    let entropy = f.relative_entropy();
    let report = LowDegreeReport {
        eta,
        entropy,
        sum_lambda: solution.sum_lambda(),
        sum_lambda_bound: 2.0 * entropy / eta,
        degree: truncation.degree(),
        degree_bound: 12.0 * entropy / eta + riesz::taylor_tail(eta / 2.0) as f64,
        term_count: truncation.term_count(),
        truncation_error: solution.g_star.l1_distance(&values),
        seminorm_error: family.distance(f.values(), &values)?,
        in_theorem_range: numeric::in_theorem_range(eta),
    };
    Ok(LowDegreeApproximation {
        solution,
        truncation,
        values,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::Functional;
    use crate::group::GroupSpec;
    use proptest::prelude::*;

    fn two_point() -> GroupSpec {
        GroupSpec::new(&[2]).unwrap()
    }

    #[test]
    fn dual_objective_examples() {
        let g = two_point();
        let fam = Family::new(&g, vec![Functional::re(g.dual_at(1).unwrap())]).unwrap();
        let f = Density::new(vec![2.0, 0.0], false).unwrap();
        let p = MomentProgram::new(&f, &fam, 0.5).unwrap();
        assert_eq!(p.dual_objective(&[0.0]).unwrap(), 0.0);
        let l = 0.5f64.atanh();
        // -log cosh(l) + l (1 - 0.5)
        let closed = -l.cosh().ln() + 0.5 * l;
        assert!((p.dual_objective(&[l]).unwrap() - closed).abs() < 1e-15);
        assert!((closed - 0.130812).abs() < 1e-6);
        assert!(p.dual_objective(&[-1.0]).is_err());
        assert!(p.dual_objective(&[0.0, 1.0]).is_err());
    }

    #[test]
    fn solves_two_point_instance() {
        let g = two_point();
        let fam = Family::new(&g, vec![Functional::re(g.dual_at(1).unwrap())]).unwrap();
        let f = Density::new(vec![2.0, 0.0], false).unwrap();
        let p = MomentProgram::new(&f, &fam, 0.5).unwrap();
        let sol = solve_dual(&p).unwrap();
        assert!(sol.converged);
        assert!((sol.lambda[0] - 0.549306).abs() < 1e-5);
        assert!((sol.dual_value - 0.130812).abs() < 1e-6);
        assert!((sol.primal_value - 0.130812).abs() < 1e-6);
        assert!(sol.gap.abs() < 1e-6);
        assert!((sol.g_star.values()[0] - 1.5).abs() < 1e-6);
        assert!(sol.sum_lambda() <= 2.0 * core::f64::consts::LN_2 / 0.5);
        assert!(sol.max_weak_duality_violation <= 1e-9);
        let r = duality_report(&p, &sol).unwrap();
        assert!(r.holds(1e-6));
    }

    #[test]
    fn vacuous_constraints_give_uniform() {
        let g = GroupSpec::new(&[4]).unwrap();
        let fam = Family::characters(&g).unwrap();
        let f = Density::indicator(4, &[0, 2]).unwrap();
        let max = fam
            .pairings(f.values())
            .unwrap()
            .into_iter()
            .fold(0.0f64, f64::max);
        let p = MomentProgram::new(&f, &fam, max).unwrap();
        let sol = solve_dual(&p).unwrap();
        assert!(sol.lambda.iter().all(|&l| l == 0.0));
        assert!(sol.g_star.is_uniform());
        assert_eq!(sol.dual_value, 0.0);
        assert_eq!(sol.iterations, 0);
    }

    #[test]
    fn zero_delta_is_rejected_by_the_solver() {
        let g = two_point();
        let fam = Family::characters(&g).unwrap();
        let p = MomentProgram::new(&Density::uniform(2), &fam, 0.0).unwrap();
        assert!(solve_dual(&p).is_err());
        assert!(MomentProgram::new(&Density::uniform(2), &fam, -0.1).is_err());
    }

    #[test]
    fn identity_holds_away_from_optimum() {
        let g = GroupSpec::new(&[5]).unwrap();
        let fam = Family::characters(&g).unwrap();
        let f = Density::indicator(5, &[1, 2]).unwrap();
        let p = MomentProgram::new(&f, &fam, 0.1).unwrap();
        let lambda: Vec<f64> = (0..fam.len()).map(|i| 0.1 * i as f64).collect();
        let sol = DualSolution {
            lambda,
            members: fam.members().to_vec(),
            dual_value: 0.0,
            primal_value: 0.0,
            g_star: Density::uniform(5),
            gap: 0.0,
            kkt_residual: 1.0,
            iterations: 0,
            converged: false,
            max_weak_duality_violation: 0.0,
            objective_history: vec![],
        };
        let r = duality_report(&p, &sol).unwrap();
        assert!(r.identity_error < 1e-12);
    }

    #[test]
    fn uniform_identity() {
        let g = GroupSpec::new(&[3]).unwrap();
        let fam = Family::characters(&g).unwrap();
        let p = MomentProgram::new(&Density::uniform(3), &fam, 0.2).unwrap();
        let sol = solve_dual(&p).unwrap();
        let r = duality_report(&p, &sol).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs, 0.0);
    }

    #[test]
    fn laplace_examples() {
        let g = GroupSpec::new(&[8]).unwrap();
        let constant = Family::new(&g, vec![Functional::re(g.dual_at(0).unwrap())]).unwrap();
        let r = laplace_check(&constant, &[vec![0.1]]).unwrap();
        assert!(!r.pseudorandom);
        assert!((r.max_margin - (0.1 - 0.005)).abs() < 1e-12);
        let r = laplace_check(&constant, &[vec![0.0]]).unwrap();
        assert_eq!(r.max_margin, 0.0);
        assert!(r.pseudorandom);
        let fam = Family::real_parts(&g, &[g.dual_at(1).unwrap(), g.dual_at(2).unwrap()]).unwrap();
        let samples: Vec<Vec<f64>> = (0..9)
            .map(|i| vec![-2.0 + 0.5 * i as f64, 2.0 - 0.4 * i as f64])
            .collect();
        assert!(laplace_check(&fam, &samples).unwrap().pseudorandom);
        assert!(laplace_check(&fam, &[vec![1.0]]).is_err());
    }

    #[test]
    fn sum_of_squares_examples() {
        let g = GroupSpec::new(&[4]).unwrap();
        let f = Density::new(vec![2.0, 0.0, 2.0, 0.0], false).unwrap();
        let one = g.dual_at(1).unwrap();
        let fam = Family::new(&g, vec![Functional::re(one), Functional::im(one)]).unwrap();
        let s = sum_of_squares_bound(&f, &fam).unwrap();
        assert!(s.sum_squares.abs() < 1e-15);
        assert!((s.twice_entropy - 2.0 * core::f64::consts::LN_2).abs() < 1e-15);
        assert!(s.holds());
        let nonzero: Vec<_> = g.duals().skip(1).collect();
        let fam = Family::real_parts(&g, &nonzero).unwrap();
        let s = sum_of_squares_bound(&Density::uniform(4), &fam).unwrap();
        assert_eq!(s.sum_squares, 0.0);
        assert_eq!(s.twice_entropy, 0.0);
    }

    #[test]
    fn low_degree_examples() {
        let g = two_point();
        let fam = Family::characters(&g).unwrap();
        let u = low_degree_approximate(&Density::uniform(2), &fam, 0.3).unwrap();
        assert_eq!(u.values, vec![1.0, 1.0]);
        let f = Density::new(vec![2.0, 0.0], false).unwrap();
        let a = low_degree_approximate(&f, &fam, 0.3).unwrap();
        assert!(a.report.seminorm_error <= 0.3);
        assert!(a.report.sum_lambda <= 2.0 * core::f64::consts::LN_2 / 0.3);
        assert!(a.report.all_bounds_hold());
    }

    type Program = (Vec<u64>, Vec<f64>, Vec<(usize, bool, bool)>, f64);

    fn random_program() -> impl Strategy<Value = Program> {
        prop::sample::select(vec![vec![2u64], vec![3], vec![4], vec![2, 2], vec![5, 3]])
            .prop_flat_map(|o| {
                let n = o.iter().product::<u64>() as usize;
                (
                    Just(o),
                    prop::collection::vec(0.0f64..1.0, n)
                        .prop_filter("not all zero", |v| v.iter().any(|&x| x > 0.01)),
                    prop::collection::vec((0usize..16, any::<bool>(), any::<bool>()), 1..=4),
                    0.02f64..0.5,
                )
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn solver_invariants((orders, raw, picks, delta) in random_program()) {
            let g = GroupSpec::new(&orders).unwrap();
            let f = Density::new(raw, true).unwrap();
            let members: Vec<Functional> = picks
                .iter()
                .map(|&(i, re, neg)| {
                    let gamma = g.dual_at(i % g.size()).unwrap();
                    let phi = if re { Functional::re(gamma) } else { Functional::im(gamma) };
                    if neg { phi.negated() } else { phi }
                })
                .collect();
            let fam = Family::new(&g, members).unwrap();
            let p = MomentProgram::new(&f, &fam, delta).unwrap();
            let sol = solve_dual(&p).unwrap();
            prop_assert!(sol.converged);
            prop_assert!(sol.max_weak_duality_violation <= 1e-9);
            for w in sol.objective_history.windows(2) {
                prop_assert!(w[1] >= w[0] - 1e-14 * (1.0 + w[0].abs()));
            }
            prop_assert!((sol.g_star.mean() - 1.0).abs() < 1e-12);
            prop_assert!(sol.gap.abs() <= 1e-6);
            prop_assert!(p.infeasibility(sol.g_star.values()).unwrap() <= 1e-8);
            let r = duality_report(&p, &sol).unwrap();
            prop_assert!(r.holds(1e-6));
        }
    }
}
