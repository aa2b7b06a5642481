use riesz_spectrum::cover::{
    bloom_cover, chang_cover, chang_cover_f2, weak_chang_cover, BloomOptions, CoverCertificate,
    TupleCoverCertificate,
};
use riesz_spectrum::density::Density;
use riesz_spectrum::descent::{sparse_approximate, SparseReport};
use riesz_spectrum::duality::{
    duality_report, low_degree_approximate, solve_dual, DualSolution, MomentProgram,
};
use riesz_spectrum::family::{Family, Functional};
use riesz_spectrum::group::{DualElement, GroupSpec};
use riesz_spectrum::numeric::{in_theorem_range, THEOREM_RANGE_MAX};
use riesz_spectrum::riesz::TruncatedExponential;
use serde_json::{json, Map, Value};

use crate::cli::{Input, Method, Range};
use crate::error::{CliError, Result};
use crate::input::{parse_group, DensitySource};
use crate::json::{functional, residue_key, residue_list, residues, SCHEMA};

/// Tolerance for the duality identity and slackness checks.
pub const DUAL_TOLERANCE: f64 = 1e-6;

/// Allowed deviation of the Z-distribution mass from 1.
pub const MASS_TOLERANCE: f64 = 1e-10;

/// A finished run: the report and the checks that failed, if any.
pub struct Outcome {
    pub report: Value,
    pub failures: Vec<String>,
}

/// Group, density and the report fields describing them.
pub struct Loaded {
    pub group: GroupSpec,
    pub density: Density,
    pub header: Map<String, Value>,
}

pub fn load(command: &str, input: &Input) -> Result<Loaded> {
    let group = parse_group(&input.group, input.max_group_size)?;
    let source = DensitySource::parse(&input.density)?;
    let density = source.load(&group, input.normalize, input.seed)?;
    let mut header = Map::new();
    header.insert("schema".into(), json!(SCHEMA));
    header.insert("command".into(), json!(command));
    header.insert("group".into(), json!(group.to_string()));
    header.insert("orders".into(), json!(group.orders()));
    header.insert(
        "density".into(),
        source.describe(&input.density, input.seed),
    );
    header.insert("entropy".into(), json!(density.relative_entropy()));
    Ok(Loaded {
        group,
        density,
        header,
    })
}

fn finish(mut header: Map<String, Value>, body: Value, failures: Vec<String>) -> Outcome {
    if let Value::Object(fields) = body {
        header.extend(fields);
    }
    Outcome {
        report: Value::Object(header),
        failures,
    }
}

/// Accuracy parameters must lie in `(0, 1/e^3)`, or in `(0, 1)` with
/// `--wide-range`.
fn check_accuracy(name: &str, value: f64, range: Range) -> Result<()> {
    let (max, text) = if range.wide_range {
        (1.0, "(0, 1)")
    } else {
        (THEOREM_RANGE_MAX, "(0, 1/e^3)")
    };
    if value > 0.0 && value < max {
        Ok(())
    } else if range.wide_range {
        Err(CliError::Input(format!(
            "{name} = {value} is outside {text}"
        )))
    } else {
        Err(CliError::Input(format!(
            "{name} = {value} is outside {text}; pass --wide-range to allow (0, 1)"
        )))
    }
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(CliError::Input(format!(
            "{name} = {value} must be positive"
        )))
    }
}

fn require(failures: &mut Vec<String>, ok: bool, what: impl FnOnce() -> String) {
    if !ok {
        failures.push(what());
    }
}

pub fn spectrum(input: &Input, delta: f64) -> Result<Outcome> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(CliError::Input(format!(
            "delta = {delta} must be non-negative"
        )));
    }
    let Loaded {
        group,
        density,
        header,
    } = load("spectrum", input)?;
    let spec = group.spectrum(density.values(), delta)?;
    let coefficients = coefficient_list(&group, &density, &spec)?;
    let body = json!({
        "delta": delta,
        "spec": residue_list(&group, &spec),
        "coefficients": coefficients,
    });
    Ok(finish(header, body, Vec::new()))
}

/// `{gamma, re, im, abs}` for each listed element.
fn coefficient_list(group: &GroupSpec, f: &Density, set: &[DualElement]) -> Result<Value> {
    let table = group.fourier_transform(f.values())?;
    Ok(Value::Array(
        set.iter()
            .map(|&g| {
                let c = table.get(g);
                json!({"gamma": residues(group, g), "re": c.re, "im": c.im, "abs": c.norm()})
            })
            .collect(),
    ))
}

fn combination(group: &GroupSpec, t: &TruncatedExponential, max_terms: u64) -> Result<Value> {
    let terms = if t.is_expandable(max_terms) {
        let terms: Vec<Value> = t
            .expand(max_terms)?
            .into_iter()
            .map(|term| json!({"coefficient": term.coefficient, "multiplicities": term.multiplicities}))
            .collect();
        Value::Array(terms)
    } else {
        Value::Null
    };
    Ok(json!({
        "form": "normalized p_m(psi), psi = sum_b c_b (1 + phi_b)",
        "basis": t.basis().iter().map(|phi| functional(group, phi)).collect::<Vec<_>>(),
        "coefficients": t.coefficients(),
        "degree": t.degree(),
        "eta": t.eta(),
        "log_normalizer": t.log_normalizer(),
        "term_count": u64::try_from(t.term_count()).unwrap_or(u64::MAX),
        "terms": terms,
    }))
}

fn weights(group: &GroupSpec, pairs: &[(Functional, f64)]) -> Value {
    Value::Array(
        pairs
            .iter()
            .filter(|(_, w)| *w > 0.0)
            .map(|(phi, w)| json!({"functional": functional(group, phi), "weight": w}))
            .collect(),
    )
}

fn sparse_summary(r: &SparseReport) -> Value {
    json!({
        "eta": r.eta,
        "T": r.total_time,
        "intervals": r.intervals,
        "sparsity": r.sparsity,
        "degree": r.degree,
        "seminorm_error": r.seminorm_error,
        "bounds": {
            "T_bound": r.time_bound,
            "sparsity_bound": r.sparsity_bound,
            "degree_bound": r.degree_bound,
        },
        "all_bounds_hold": r.all_bounds_hold(),
    })
}

pub fn approximate(
    input: &Input,
    eta: f64,
    method: Method,
    max_terms: u64,
    range: Range,
) -> Result<Outcome> {
    check_accuracy("eta", eta, range)?;
    let Loaded {
        group,
        density,
        header,
    } = load("approximate", input)?;
    let family = Family::characters(&group)?;
    let mut failures = Vec::new();
    let body = match method {
        Method::Mirror => {
            let a = sparse_approximate(&density, &family, eta)?;
            let r = &a.report;
            require(&mut failures, r.time_bound_holds(), || "T bound".into());
            require(&mut failures, r.sparsity_bound_holds(), || {
                "sparsity bound".into()
            });
            require(&mut failures, r.degree_bound_holds(), || {
                "degree bound".into()
            });
            require(&mut failures, r.error_holds(), || {
                "seminorm error above eta".into()
            });
            let intervals: Vec<Value> = a
                .trace
                .intervals()
                .iter()
                .map(|iv| {
                    json!({"start": iv.start, "end": iv.end, "functional": functional(&group, &iv.driven())})
                })
                .collect();
            let mut body = sparse_summary(r);
            body["method"] = json!("mirror");
            body["term_count"] = json!(u64::try_from(r.term_count).unwrap_or(u64::MAX));
            body["descent_error"] = json!(r.descent_error);
            body["truncation_error"] = json!(r.truncation_error);
            body["in_theorem_range"] = json!(r.in_theorem_range);
            body["trace"] = json!({"intervals": intervals});
            body["combination"] = combination(&group, &a.truncation, max_terms)?;
            body["g"] = json!(a.values);
            body
        }
        Method::Dual => {
            let a = low_degree_approximate(&density, &family, eta)?;
            let r = &a.report;
            require(&mut failures, r.all_bounds_hold(), || {
                "sum lambda or degree bound".into()
            });
            require(&mut failures, r.seminorm_error <= eta, || {
                "seminorm error above eta".into()
            });
            json!({
                "method": "dual",
                "eta": eta,
                "sparsity": a.truncation.basis().len(),
                "degree": r.degree,
                "sum_lambda": r.sum_lambda,
                "term_count": u64::try_from(r.term_count).unwrap_or(u64::MAX),
                "truncation_error": r.truncation_error,
                "seminorm_error": r.seminorm_error,
                "bounds": {
                    "sum_lambda_bound": r.sum_lambda_bound,
                    "degree_bound": r.degree_bound,
                },
                "all_bounds_hold": failures.is_empty(),
                "in_theorem_range": r.in_theorem_range,
                "kkt_residual": a.solution.kkt_residual,
                "lambda": weights(&group, &a.solution.weights()),
                "combination": combination(&group, &a.truncation, max_terms)?,
                "g": a.values,
            })
        }
    };
    Ok(finish(header, body, failures))
}

fn cover_certificate(group: &GroupSpec, cert: &CoverCertificate, verified: bool) -> Value {
    let assignments: Map<String, Value> = cert
        .assignments
        .iter()
        .map(|(g, eps)| (residue_key(group, *g), json!(eps)))
        .collect();
    json!({
        "kind": "cover",
        "lambda": residue_list(group, &cert.lambda),
        "assignments": assignments,
        "verified": verified,
    })
}

fn tuple_certificate(group: &GroupSpec, cert: &TupleCoverCertificate, verified: bool) -> Value {
    let assignments: Map<String, Value> = cert
        .tuples
        .iter()
        .map(|(g, tuple)| {
            let pairs: Vec<Value> = tuple.iter().map(|&(i, s)| json!([i, s])).collect();
            (residue_key(group, *g), Value::Array(pairs))
        })
        .collect();
    json!({
        "kind": "tuple",
        "lambda": residue_list(group, &cert.lambda),
        "assignments": assignments,
        "max_len": cert.max_len,
        "verified": verified,
    })
}

fn cover_verifies(group: &GroupSpec, cert: &CoverCertificate, set: &[DualElement]) -> bool {
    cert.verify_covers(group, set).is_ok()
}

pub fn chang(input: &Input, delta: f64, f2: bool, range: Range) -> Result<Outcome> {
    let Loaded {
        group,
        density,
        header,
    } = load("chang", input)?;
    let mut failures = Vec::new();
    let body = if f2 {
        check_accuracy("delta", delta, range)?;
        let c = chang_cover_f2(&group, &density, delta)?;
        let verified = cover_verifies(&group, &c.certificate, &c.spectrum);
        require(&mut failures, verified, || "certificate".into());
        require(&mut failures, c.lambda.len() as f64 <= c.bound, || {
            "|Lambda| bound".into()
        });
        json!({
            "variant": "f2",
            "delta": delta,
            "spectrum": residue_list(&group, &c.spectrum),
            "coefficients": coefficient_list(&group, &density, &c.spectrum)?,
            "lambda": residue_list(&group, &c.lambda),
            "size": c.lambda.len(),
            "bounds": {"lambda_bound": c.bound},
            "certificate": cover_certificate(&group, &c.certificate, verified),
            "approximation": sparse_summary(&c.approximation),
        })
    } else {
        check_positive("delta", delta)?;
        let c = chang_cover(&group, &density, delta)?;
        let verified = cover_verifies(&group, &c.certificate, &c.spectrum);
        require(&mut failures, verified, || "certificate".into());
        require(&mut failures, c.lambda.len() as f64 <= c.bound, || {
            "|Lambda| bound".into()
        });
        json!({
            "variant": "greedy",
            "delta": delta,
            "spectrum": residue_list(&group, &c.spectrum),
            "coefficients": coefficient_list(&group, &density, &c.spectrum)?,
            "lambda": residue_list(&group, &c.lambda),
            "size": c.lambda.len(),
            "bounds": {"lambda_bound": c.bound},
            "certificate": cover_certificate(&group, &c.certificate, verified),
        })
    };
    Ok(finish(header, body, failures))
}

pub fn bloom(input: &Input, delta: f64, scan_limit: usize, range: Range) -> Result<Outcome> {
    check_accuracy("delta", delta, range)?;
    let Loaded {
        group,
        density,
        header,
    } = load("bloom", input)?;
    let b = bloom_cover(&group, &density, delta, BloomOptions { scan_limit })?;
    let mut failures = Vec::new();
    let verified = cover_verifies(&group, &b.certificate, &b.selected);
    require(&mut failures, verified, || "certificate".into());
    require(
        &mut failures,
        b.selected.len() as f64 >= b.size_bound,
        || "|S| bound".into(),
    );
    require(
        &mut failures,
        b.lambda.len() as f64 <= b.degree_bound,
        || "degree bound".into(),
    );
    require(
        &mut failures,
        (b.z_mass - 1.0).abs() <= MASS_TOLERANCE,
        || format!("Z mass {}", b.z_mass),
    );
    let term: Vec<Value> = b
        .term
        .iter()
        .map(|(phi, a)| json!({"functional": functional(&group, phi), "multiplicity": a}))
        .collect();
    let body = json!({
        "delta": delta,
        "spectrum": residue_list(&group, &b.spectrum),
        "coefficients": coefficient_list(&group, &density, &b.spectrum)?,
        "selected": residue_list(&group, &b.selected),
        "lambda": residue_list(&group, &b.lambda),
        "term": term,
        "term_degree": b.term_degree,
        "bounds": {"size_bound": b.size_bound, "degree_bound": b.degree_bound},
        "partial": b.partial,
        "scanned": b.scanned,
        "z_mass": b.z_mass,
        "enumerated_mass": b.enumerated_mass,
        "level_mismatch": b.level_mismatch,
        "average_intersection": b.average_intersection,
        "in_theorem_range": b.in_theorem_range,
        "certificate": cover_certificate(&group, &b.certificate, verified),
        "approximation": sparse_summary(&b.approximation),
    });
    Ok(finish(header, body, failures))
}

pub fn weak_chang(input: &Input, delta: f64, range: Range) -> Result<Outcome> {
    check_accuracy("delta", delta, range)?;
    let Loaded {
        group,
        density,
        header,
    } = load("weak-chang", input)?;
    let c = weak_chang_cover(&group, &density, delta)?;
    let mut failures = Vec::new();
    let verified = c.certificate.verify(&group).is_ok()
        && c.spectrum
            .iter()
            .all(|g| c.certificate.tuples.iter().any(|(x, _)| x == g));
    require(&mut failures, verified, || "certificate".into());
    require(&mut failures, c.lambda.len() as f64 <= c.bound, || {
        "|Lambda| bound".into()
    });
    require(
        &mut failures,
        c.certificate.max_len as f64 <= c.approximation.degree_bound,
        || "tuple length bound".into(),
    );
    let body = json!({
        "delta": delta,
        "spectrum": residue_list(&group, &c.spectrum),
        "coefficients": coefficient_list(&group, &density, &c.spectrum)?,
        "lambda": residue_list(&group, &c.lambda),
        "size": c.lambda.len(),
        "bounds": {
            "lambda_bound": c.bound,
            "length_bound": c.approximation.degree_bound,
        },
        "certificate": tuple_certificate(&group, &c.certificate, verified),
        "approximation": sparse_summary(&c.approximation),
    });
    Ok(finish(header, body, failures))
}

fn dual_body(group: &GroupSpec, f: &Density, sol: &DualSolution, delta: f64) -> Value {
    json!({
        "delta": delta,
        "dual_value": sol.dual_value,
        "primal_value": sol.primal_value,
        "gap": sol.gap,
        "kkt_residual": sol.kkt_residual,
        "iterations": sol.iterations,
        "converged": sol.converged,
        "sum_lambda": sol.sum_lambda(),
        "bounds": {"sum_lambda_bound": f.relative_entropy() / delta},
        "lambda": weights(group, &sol.weights()),
        "g_star": sol.g_star.values(),
    })
}

pub fn dual(input: &Input, delta: f64) -> Result<Outcome> {
    check_positive("delta", delta)?;
    let Loaded {
        group,
        density,
        header,
    } = load("dual", input)?;
    let family = Family::characters_signed(&group)?;
    let program = MomentProgram::new(&density, &family, delta)?;
    let sol = solve_dual(&program)?;
    let report = duality_report(&program, &sol)?;
    let mut failures = Vec::new();
    require(&mut failures, sol.converged, || {
        "solver did not converge".into()
    });
    require(&mut failures, report.holds(DUAL_TOLERANCE), || {
        format!(
            "duality identity or feasibility (identity error {}, weak duality margin {})",
            report.identity_error, report.weak_duality_margin
        )
    });
    require(
        &mut failures,
        sol.sum_lambda() <= density.relative_entropy() / delta + DUAL_TOLERANCE,
        || "sum lambda bound".into(),
    );
    let mut body = dual_body(&group, &density, &sol, delta);
    body["identity_error"] = json!(report.identity_error);
    body["weak_duality_margin"] = json!(report.weak_duality_margin);
    body["in_theorem_range"] = json!(in_theorem_range(delta));
    Ok(finish(header, body, failures))
}
