//! Independent re-checking of reports. Group sums, Fourier coefficients,
//! seminorms and bounds are recomputed from residues with [`crate::exact`];
//! the library is used only to load the group and density.

use std::collections::BTreeSet;
use std::f64::consts::SQRT_2;
use std::path::Path;

use serde_json::Value;

use crate::cli::Input;
use crate::commands::{load, DUAL_TOLERANCE, MASS_TOLERANCE};
use crate::error::{CliError, Result};
use crate::exact::{self, Layout};
use crate::input::read_json;
use crate::json::{parse_key, residues_from_value, SCHEMA};

/// Residue tuples, one per character.
type Residues = Vec<Vec<u64>>;

/// Slack on comparisons against values that were rounded to 12 digits.
const ROUNDING: f64 = 1e-9;

/// Elements with `| |f^| - delta | <=` this may fall on either side of the
/// strict threshold.
const THRESHOLD_BAND: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Default)]
struct Checks(Vec<Check>);

impl Checks {
    fn push(&mut self, name: &str, result: std::result::Result<String, String>) {
        let (ok, detail) = match result {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        self.0.push(Check {
            name: name.to_string(),
            ok,
            detail,
        });
    }

    fn bound(&mut self, name: &str, value: f64, bound: f64) {
        let ok = value <= bound + ROUNDING * (1.0 + bound.abs());
        let (v, b) = (brief(value), brief(bound));
        self.push(
            name,
            if ok {
                Ok(format!("{v} <= {b}"))
            } else {
                Err(format!("{v} > {b}"))
            },
        );
    }
}

/// Short rendering for check lines.
fn brief(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-4 || v.abs() >= 1e9) {
        format!("{v:.3e}")
    } else {
        format!("{}", (v * 1e9).round() / 1e9)
    }
}

fn field<'a>(report: &'a Value, key: &str) -> Result<&'a Value> {
    report
        .pointer(key)
        .ok_or_else(|| CliError::Input(format!("report has no `{key}`")))
}

fn number(report: &Value, key: &str) -> Result<f64> {
    field(report, key)?
        .as_f64()
        .ok_or_else(|| CliError::Input(format!("`{key}` is not a number")))
}

fn numbers(report: &Value, key: &str) -> Result<Vec<f64>> {
    field(report, key)?
        .as_array()
        .and_then(|a| a.iter().map(Value::as_f64).collect())
        .ok_or_else(|| CliError::Input(format!("`{key}` is not an array of numbers")))
}

fn residue_lists(report: &Value, key: &str) -> Result<Vec<Vec<u64>>> {
    field(report, key)?
        .as_array()
        .ok_or_else(|| CliError::Input(format!("`{key}` is not an array")))?
        .iter()
        .map(residues_from_value)
        .collect()
}

fn show(r: &[u64]) -> String {
    let parts: Vec<String> = r.iter().map(u64::to_string).collect();
    format!("({})", parts.join(","))
}

/// Reads a signed functional and returns its values over the layout.
fn functional_values(layout: &Layout, value: &Value) -> Result<Vec<f64>> {
    let bad = || CliError::Input(format!("malformed functional {value}"));
    let gamma = residues_from_value(value.get("gamma").ok_or_else(bad)?)?;
    if layout.index(&gamma).is_none() {
        return Err(bad());
    }
    let imaginary = match value.get("part").and_then(Value::as_str) {
        Some("re") => false,
        Some("im") => true,
        _ => return Err(bad()),
    };
    let sign = match value.get("sign").and_then(Value::as_i64) {
        Some(1) => 1.0,
        Some(-1) => -1.0,
        _ => return Err(bad()),
    };
    Ok(layout.functional_values(&gamma, imaginary, sign))
}

/// Compares a claimed `Spec_delta` with the magnitudes, allowing elements
/// within the threshold band to go either way.
fn spectrum_check(
    layout: &Layout,
    mags: &[f64],
    claimed: &[Vec<u64>],
    delta: f64,
) -> std::result::Result<String, String> {
    let mut seen = BTreeSet::new();
    for r in claimed {
        let i = layout
            .index(r)
            .ok_or_else(|| format!("{} is not a group element", show(r)))?;
        if !seen.insert(i) {
            return Err(format!("{} listed twice", show(r)));
        }
        if mags[i] <= delta - THRESHOLD_BAND {
            return Err(format!("{} has |f^| = {} <= {delta}", show(r), mags[i]));
        }
    }
    for (i, &m) in mags.iter().enumerate() {
        if m > delta + THRESHOLD_BAND && !seen.contains(&i) {
            return Err(format!(
                "spectrum mismatch: {} has |f^| = {m} > {delta} but is not listed",
                show(&layout.points[i])
            ));
        }
    }
    Ok(format!("{} elements", claimed.len()))
}

/// Checks a `kind: "cover"` certificate and returns the elements it covers.
fn cover_certificate(
    layout: &Layout,
    cert: &Value,
    checks: &mut Checks,
) -> Result<(Residues, Residues)> {
    let lambda = residue_lists(cert, "/lambda")?;
    let assignments = field(cert, "/assignments")?
        .as_object()
        .ok_or_else(|| CliError::Input("`assignments` is not an object".into()))?;
    let mut covered = Vec::new();
    let mut result = Ok(format!(
        "{} assignments over |Lambda| = {}",
        assignments.len(),
        lambda.len()
    ));
    for (key, eps) in assignments {
        let gamma = parse_key(key)?;
        covered.push(gamma.clone());
        let eps: Option<Vec<i64>> = eps
            .as_array()
            .and_then(|a| a.iter().map(Value::as_i64).collect());
        let outcome = match eps {
            Some(e) if e.len() == lambda.len() && e.iter().all(|v| (-1..=1).contains(v)) => {
                let sum = layout.signed_sum(&lambda, &e);
                (sum == gamma).then_some(()).ok_or_else(|| {
                    format!("assignment for {} sums to {}", show(&gamma), show(&sum))
                })
            }
            _ => Err(format!(
                "assignment for {} is not a sign vector of length {}",
                show(&gamma),
                lambda.len()
            )),
        };
        if let (Err(e), Ok(_)) = (outcome, &result) {
            result = Err(e);
        }
    }
    checks.push("certificate sums", result);
    Ok((lambda, covered))
}

/// Checks a `kind: "tuple"` certificate and returns `(lambda, covered)`.
fn tuple_certificate(
    layout: &Layout,
    cert: &Value,
    checks: &mut Checks,
) -> Result<(Residues, Residues, usize)> {
    let lambda = residue_lists(cert, "/lambda")?;
    let max_len = field(cert, "/max_len")?
        .as_u64()
        .ok_or_else(|| CliError::Input("`max_len` is not an integer".into()))?
        as usize;
    let assignments = field(cert, "/assignments")?
        .as_object()
        .ok_or_else(|| CliError::Input("`assignments` is not an object".into()))?;
    let mut covered = Vec::new();
    let mut result = Ok(format!(
        "{} tuples of length <= {max_len}",
        assignments.len()
    ));
    for (key, tuple) in assignments {
        let gamma = parse_key(key)?;
        covered.push(gamma.clone());
        let pairs: Option<Vec<(u64, i64)>> = tuple.as_array().and_then(|a| {
            a.iter()
                .map(|p| Some((p.get(0)?.as_u64()?, p.get(1)?.as_i64()?)))
                .collect()
        });
        let outcome = match pairs {
            Some(p)
                if p.len() <= max_len
                    && p.iter()
                        .all(|&(i, s)| (i as usize) < lambda.len() && (s == 1 || s == -1)) =>
            {
                let elems: Vec<Vec<u64>> =
                    p.iter().map(|&(i, _)| lambda[i as usize].clone()).collect();
                let signs: Vec<i64> = p.iter().map(|&(_, s)| s).collect();
                let sum = layout.signed_sum(&elems, &signs);
                (sum == gamma)
                    .then_some(())
                    .ok_or_else(|| format!("tuple for {} sums to {}", show(&gamma), show(&sum)))
            }
            _ => Err(format!(
                "tuple for {} is malformed or longer than {max_len}",
                show(&gamma)
            )),
        };
        if let (Err(e), Ok(_)) = (outcome, &result) {
            result = Err(e);
        }
    }
    checks.push("certificate sums", result);
    Ok((lambda, covered, max_len))
}

fn contains_all(
    set: &[Vec<u64>],
    needed: &[Vec<u64>],
    what: &str,
) -> std::result::Result<String, String> {
    match needed.iter().find(|g| !set.contains(g)) {
        Some(g) => Err(format!("{} is not in {what}", show(g))),
        None => Ok(format!("{} elements", needed.len())),
    }
}

/// Runs every check for the report at `path`.
pub fn verify(path: &Path, input: &Input, kind: Option<&str>) -> Result<Vec<Check>> {
    let report = read_json(path)?;
    match report.get("schema").and_then(Value::as_str) {
        Some(SCHEMA) => {}
        other => {
            return Err(CliError::Input(format!(
                "unsupported schema {other:?}, expected {SCHEMA}"
            )))
        }
    }
    let command = report
        .get("command")
        .and_then(Value::as_str)
        .ok_or_else(|| CliError::Input("report has no `command`".into()))?
        .to_string();
    let mut checks = Checks::default();
    if let Some(k) = kind {
        checks.push(
            "kind",
            if k == command {
                Ok(command.clone())
            } else {
                Err(format!("report is `{command}`, expected `{k}`"))
            },
        );
    }
    let loaded = load(&command, input)?;
    let orders: Vec<u64> = loaded.group.orders().to_vec();
    let claimed_orders = residues_from_value(field(&report, "/orders")?)?;
    checks.push(
        "group",
        if claimed_orders == orders {
            Ok(loaded.group.to_string())
        } else {
            Err(format!(
                "report is for orders {claimed_orders:?}, not {orders:?}"
            ))
        },
    );
    if claimed_orders != orders {
        return Ok(checks.0);
    }
    let layout = Layout::new(&orders);
    let f = loaded.density.values().to_vec();
    let ent = exact::relative_entropy(&f);
    let claimed_ent = number(&report, "/entropy")?;
    checks.push(
        "entropy",
        if (claimed_ent - ent).abs() <= ROUNDING * (1.0 + ent) {
            Ok(format!("{ent}"))
        } else {
            Err(format!("report has {claimed_ent}, density has {ent}"))
        },
    );
    match command.as_str() {
        "spectrum" => spectrum(&report, &layout, &f, &mut checks)?,
        "approximate" => approximate(&report, &layout, &f, ent, &mut checks)?,
        "chang" => chang(&report, &layout, &f, ent, &mut checks)?,
        "bloom" => bloom(&report, &layout, &f, ent, &mut checks)?,
        "weak-chang" => weak_chang(&report, &layout, &f, ent, &mut checks)?,
        "dual" => dual(&report, &layout, &f, ent, &mut checks)?,
        other => {
            return Err(CliError::Input(format!(
                "unknown command `{other}` in report"
            )))
        }
    }
    Ok(checks.0)
}

fn spectrum(report: &Value, layout: &Layout, f: &[f64], checks: &mut Checks) -> Result<()> {
    let delta = number(report, "/delta")?;
    let mags = layout.magnitudes(f);
    let spec = residue_lists(report, "/spec")?;
    checks.push("spectrum", spectrum_check(layout, &mags, &spec, delta));
    checks.push("coefficients", coefficients_check(report, layout, &mags)?);
    Ok(())
}

/// Compares the reported `|f^(gamma)|` with the recomputed magnitudes.
fn coefficients_check(
    report: &Value,
    layout: &Layout,
    mags: &[f64],
) -> Result<std::result::Result<String, String>> {
    let coefficients = field(report, "/coefficients")?
        .as_array()
        .ok_or_else(|| CliError::Input("`coefficients` is not an array".into()))?;
    for c in coefficients {
        let gamma = residues_from_value(field(c, "/gamma")?)?;
        let i = layout
            .index(&gamma)
            .ok_or_else(|| CliError::Input(format!("{} is not a group element", show(&gamma))))?;
        let abs = number(c, "/abs")?;
        if (abs - mags[i]).abs() > ROUNDING {
            return Ok(Err(format!(
                "spectrum mismatch: |f^{}| is {}, report has {abs}",
                show(&gamma),
                mags[i]
            )));
        }
    }
    Ok(Ok(format!("{} coefficients", coefficients.len())))
}

fn approximate(
    report: &Value,
    layout: &Layout,
    f: &[f64],
    ent: f64,
    checks: &mut Checks,
) -> Result<()> {
    let eta = number(report, "/eta")?;
    if !(eta > 0.0 && eta < 1.0) {
        return Err(CliError::Input(format!("eta = {eta} is outside (0, 1)")));
    }
    let method = field(report, "/method")?
        .as_str()
        .unwrap_or_default()
        .to_string();
    let g = numbers(report, "/g")?;
    if g.len() != layout.size() {
        return Err(CliError::Input(format!(
            "g has {} values, group has {}",
            g.len(),
            layout.size()
        )));
    }
    let min = g.iter().copied().fold(f64::INFINITY, f64::min);
    checks.push(
        "non-negative",
        if min >= -1e-12 {
            Ok(format!("min {min}"))
        } else {
            Err(format!("min {min}"))
        },
    );
    let mean = exact::mean(&g);
    checks.push(
        "mean",
        if (mean - 1.0).abs() <= 1e-9 {
            Ok(format!("{mean}"))
        } else {
            Err(format!("mean {mean}"))
        },
    );
    let diff: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a - b).collect();
    let err = layout.character_seminorm(&diff);
    checks.bound("seminorm error", err, eta);
    let claimed = number(report, "/seminorm_error")?;
    checks.push(
        "reported error",
        if (claimed - err).abs() <= ROUNDING {
            Ok(format!("{claimed}"))
        } else {
            Err(format!("report has {claimed}, measured {err}"))
        },
    );

    // Rebuild g from the truncated exponential.
    let basis = field(report, "/combination/basis")?
        .as_array()
        .ok_or_else(|| CliError::Input("`combination.basis` is not an array".into()))?
        .iter()
        .map(|phi| functional_values(layout, phi))
        .collect::<Result<Vec<_>>>()?;
    let coefficients = numbers(report, "/combination/coefficients")?;
    let degree = number(report, "/combination/degree")? as usize;
    let eta_t = number(report, "/combination/eta")?;
    if coefficients.len() != basis.len() || coefficients.iter().any(|&c| !(c >= 0.0)) {
        return Err(CliError::Input(
            "combination coefficients do not match its basis".into(),
        ));
    }
    let psi: Vec<f64> = (0..layout.size())
        .map(|x| {
            basis
                .iter()
                .zip(&coefficients)
                .map(|(phi, c)| c * (1.0 + phi[x]))
                .sum()
        })
        .collect();
    let logs: Vec<f64> = psi
        .iter()
        .map(|&p| exact::log_truncated_exp(p, degree))
        .collect();
    let log_z = exact::log_sum_exp(&logs) - (layout.size() as f64).ln();
    let rebuilt: Vec<f64> = logs.iter().map(|l| (l - log_z).exp()).collect();
    let worst = rebuilt
        .iter()
        .zip(&g)
        .map(|(a, b)| (a - b).abs() / (1.0 + b.abs()))
        .fold(0.0, f64::max);
    checks.push(
        "combination reproduces g",
        if worst <= ROUNDING {
            Ok(format!("max deviation {worst:e}"))
        } else {
            Err(format!("max deviation {worst:e}"))
        },
    );
    let total: f64 = coefficients.iter().sum();
    checks.push(
        "truncation degree",
        if exact::tail_condition(2.0 * total, degree, eta_t) {
            Ok(format!("m = {degree} meets the tail condition at {eta_t}"))
        } else {
            Err(format!(
                "m = {degree} is too small for weight {total} at {eta_t}"
            ))
        },
    );
    if let Some(terms) = report
        .pointer("/combination/terms")
        .and_then(Value::as_array)
    {
        let mut sum = vec![0.0; layout.size()];
        for t in terms {
            let c = number(t, "/coefficient")?;
            let a = field(t, "/multiplicities")?
                .as_array()
                .and_then(|a| a.iter().map(Value::as_u64).collect::<Option<Vec<u64>>>())
                .ok_or_else(|| CliError::Input("malformed multiplicities".into()))?;
            for (x, s) in sum.iter_mut().enumerate() {
                let r: f64 = basis
                    .iter()
                    .zip(&a)
                    .map(|(phi, &k)| (1.0 + phi[x]).powi(k as i32))
                    .product();
                *s += c * r;
            }
        }
        let worst = sum
            .iter()
            .zip(&g)
            .map(|(a, b)| (a - b).abs() / (1.0 + b.abs()))
            .fold(0.0, f64::max);
        checks.push(
            "expansion reproduces g",
            if worst <= 1e-8 {
                Ok(format!("{} terms, max deviation {worst:e}", terms.len()))
            } else {
                Err(format!("max deviation {worst:e}"))
            },
        );
    }

    match method.as_str() {
        "mirror" => {
            checks.push(
                "truncation accuracy",
                if (eta_t - eta / 3.0).abs() <= ROUNDING * eta {
                    Ok(format!("{eta_t}"))
                } else {
                    Err(format!("{eta_t}, expected eta / 3"))
                },
            );
            let t = number(report, "/T")?;
            checks.bound("T <= 3 Ent / eta", t, 3.0 * ent / eta);
            let intervals = field(report, "/trace/intervals")?
                .as_array()
                .ok_or_else(|| CliError::Input("`trace.intervals` is not an array".into()))?;
            let mut clock = 0.0;
            let mut contiguous = true;
            for iv in intervals {
                let (s, e) = (number(iv, "/start")?, number(iv, "/end")?);
                contiguous &= (s - clock).abs() <= ROUNDING * (1.0 + clock) && e >= s;
                clock = e;
            }
            contiguous &= (clock - t).abs() <= ROUNDING * (1.0 + t);
            checks.push(
                "trace",
                if contiguous {
                    Ok(format!("{} intervals", intervals.len()))
                } else {
                    Err("intervals do not tile [0, T]".into())
                },
            );
            let sparsity_bound = 9.0 * ent / (eta * eta);
            checks.bound(
                "intervals <= 9 Ent / eta^2",
                intervals.len() as f64,
                sparsity_bound,
            );
            checks.bound("|F'| <= 9 Ent / eta^2", basis.len() as f64, sparsity_bound);
            checks.bound(
                "degree <= 18 Ent / eta + tail",
                degree as f64,
                18.0 * ent / eta + exact::taylor_tail(eta / 3.0),
            );
        }
        "dual" => {
            checks.push(
                "truncation accuracy",
                if (eta_t - eta / 2.0).abs() <= ROUNDING * eta {
                    Ok(format!("{eta_t}"))
                } else {
                    Err(format!("{eta_t}, expected eta / 2"))
                },
            );
            let lambda = field(report, "/lambda")?
                .as_array()
                .ok_or_else(|| CliError::Input("`lambda` is not an array".into()))?;
            let mut sum = 0.0;
            for entry in lambda {
                sum += number(entry, "/weight")?;
            }
            checks.bound("sum lambda <= 2 Ent / eta", sum, 2.0 * ent / eta);
            checks.bound(
                "degree <= 12 Ent / eta + tail",
                degree as f64,
                12.0 * ent / eta + exact::taylor_tail(eta / 2.0),
            );
        }
        other => return Err(CliError::Input(format!("unknown method `{other}`"))),
    }
    Ok(())
}

fn chang(report: &Value, layout: &Layout, f: &[f64], ent: f64, checks: &mut Checks) -> Result<()> {
    let delta = number(report, "/delta")?;
    let mags = layout.magnitudes(f);
    let spec = residue_lists(report, "/spectrum")?;
    checks.push("spectrum", spectrum_check(layout, &mags, &spec, delta));
    checks.push("coefficients", coefficients_check(report, layout, &mags)?);
    let (lambda, covered) = cover_certificate(layout, field(report, "/certificate")?, checks)?;
    checks.push(
        "covers spectrum",
        contains_all(&covered, &spec, "the certificate"),
    );
    let variant = field(report, "/variant")?.as_str().unwrap_or_default();
    if variant == "f2" {
        if layout.orders.iter().any(|&n| n != 2) {
            return Err(CliError::Input("the f2 variant needs a group Z_2^n".into()));
        }
        checks.bound(
            "|Lambda| <= 9 Ent / delta^2",
            lambda.len() as f64,
            9.0 * ent / (delta * delta),
        );
    } else {
        checks.push(
            "Lambda within spectrum",
            contains_all(&spec, &lambda, "the spectrum"),
        );
        checks.push(
            "disassociated",
            if exact::is_disassociated(layout, &lambda) {
                Ok(format!("|Lambda| = {}", lambda.len()))
            } else {
                Err("Lambda has a non-trivial signed sum equal to 0".into())
            },
        );
        checks.bound(
            "|Lambda| <= 4 Ent / delta^2",
            lambda.len() as f64,
            4.0 * ent / (delta * delta),
        );
    }
    Ok(())
}

fn bloom(report: &Value, layout: &Layout, f: &[f64], ent: f64, checks: &mut Checks) -> Result<()> {
    let delta = number(report, "/delta")?;
    let mags = layout.magnitudes(f);
    let spec = residue_lists(report, "/spectrum")?;
    checks.push("spectrum", spectrum_check(layout, &mags, &spec, delta));
    checks.push("coefficients", coefficients_check(report, layout, &mags)?);
    let selected = residue_lists(report, "/selected")?;
    checks.push(
        "S within spectrum",
        contains_all(&spec, &selected, "the spectrum"),
    );
    let size_bound = 0.5 * delta * spec.len() as f64;
    checks.push(
        "|S| >= (delta / 2) |Spec|",
        if selected.len() as f64 >= size_bound {
            Ok(format!("{} >= {size_bound}", selected.len()))
        } else {
            Err(format!("{} < {size_bound}", selected.len()))
        },
    );
    let (lambda, covered) = cover_certificate(layout, field(report, "/certificate")?, checks)?;
    checks.push(
        "covers S",
        contains_all(&covered, &selected, "the certificate"),
    );
    let eta = delta / (2.0 * SQRT_2);
    checks.bound(
        "|Lambda| <= degree bound",
        lambda.len() as f64,
        36.0 * SQRT_2 * ent / delta + exact::taylor_tail(eta / 3.0),
    );
    let z = number(report, "/z_mass")?;
    checks.push(
        "Z mass",
        if (z - 1.0).abs() <= MASS_TOLERANCE {
            Ok(format!("{z}"))
        } else {
            Err(format!("{z}"))
        },
    );

    // S must lie in the Fourier support of the selected Riesz term.
    let term = field(report, "/term")?
        .as_array()
        .ok_or_else(|| CliError::Input("`term` is not an array".into()))?;
    let mut r = vec![1.0; layout.size()];
    let mut degree = 0;
    for factor in term {
        let phi = functional_values(layout, field(factor, "/functional")?)?;
        let k = field(factor, "/multiplicity")?
            .as_u64()
            .ok_or_else(|| CliError::Input("malformed multiplicity".into()))?;
        degree += k;
        for (v, p) in r.iter_mut().zip(&phi) {
            *v *= (1.0 + p).powi(k as i32);
        }
    }
    let r_mags = layout.magnitudes(&r);
    let cutoff = 1e-9 * r_mags.iter().copied().fold(0.0, f64::max);
    let outside = selected
        .iter()
        .find(|s| layout.index(s).is_none_or(|i| r_mags[i] <= cutoff));
    checks.push(
        "S within the term's support",
        match outside {
            None => Ok(format!("term of degree {degree}")),
            Some(s) => Err(format!("{} is not in the support of the term", show(s))),
        },
    );
    Ok(())
}

fn weak_chang(
    report: &Value,
    layout: &Layout,
    f: &[f64],
    ent: f64,
    checks: &mut Checks,
) -> Result<()> {
    let delta = number(report, "/delta")?;
    let mags = layout.magnitudes(f);
    let spec = residue_lists(report, "/spectrum")?;
    checks.push("spectrum", spectrum_check(layout, &mags, &spec, delta));
    checks.push("coefficients", coefficients_check(report, layout, &mags)?);
    let (lambda, covered, max_len) =
        tuple_certificate(layout, field(report, "/certificate")?, checks)?;
    checks.push(
        "covers spectrum",
        contains_all(&covered, &spec, "the certificate"),
    );
    checks.bound(
        "|Lambda| <= 18 Ent / delta^2",
        lambda.len() as f64,
        18.0 * ent / (delta * delta),
    );
    let eta = delta / SQRT_2;
    checks.bound(
        "tuple length <= degree bound",
        max_len as f64,
        18.0 * ent / eta + exact::taylor_tail(eta / 3.0),
    );
    Ok(())
}

fn dual(report: &Value, layout: &Layout, f: &[f64], ent: f64, checks: &mut Checks) -> Result<()> {
    let delta = number(report, "/delta")?;
    let entries = field(report, "/lambda")?
        .as_array()
        .ok_or_else(|| CliError::Input("`lambda` is not an array".into()))?;
    let n = layout.size();
    let mut exponent = vec![0.0; n];
    let mut linear = 0.0;
    let mut sum = 0.0;
    let mut slackness: f64 = 0.0;
    let mut members = Vec::new();
    let mut negative = false;
    for e in entries {
        let w = number(e, "/weight")?;
        negative |= !(w >= 0.0);
        let phi = functional_values(layout, field(e, "/functional")?)?;
        let pairing = exact::mean(&f.iter().zip(&phi).map(|(a, b)| a * b).collect::<Vec<_>>());
        linear += w * (pairing - delta);
        sum += w;
        for (s, p) in exponent.iter_mut().zip(&phi) {
            *s += w * p;
        }
        members.push((w, phi, pairing));
    }
    checks.push(
        "lambda >= 0",
        if negative {
            Err("negative multiplier".into())
        } else {
            Ok(format!("{} positive", entries.len()))
        },
    );
    let log_z = exact::log_sum_exp(&exponent) - (n as f64).ln();
    let g: Vec<f64> = exponent.iter().map(|s| (s - log_z).exp()).collect();
    let claimed_g = numbers(report, "/g_star")?;
    let worst = g
        .iter()
        .zip(&claimed_g)
        .map(|(a, b)| (a - b).abs() / (1.0 + b.abs()))
        .fold(
            if claimed_g.len() == n {
                0.0
            } else {
                f64::INFINITY
            },
            f64::max,
        );
    checks.push(
        "g_star is the Gibbs density",
        if worst <= ROUNDING {
            Ok(format!("max deviation {worst:e}"))
        } else {
            Err(format!("max deviation {worst:e}"))
        },
    );
    for (w, phi, pairing) in &members {
        let g_pairing = exact::mean(&g.iter().zip(phi).map(|(a, b)| a * b).collect::<Vec<_>>());
        slackness = slackness.max((w * (g_pairing - pairing + delta)).abs());
    }
    checks.bound("complementary slackness", slackness, DUAL_TOLERANCE);
    let diff: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a - b).collect();
    checks.bound(
        "feasibility ||f - g||_F <= delta",
        layout.character_seminorm(&diff),
        delta + DUAL_TOLERANCE,
    );
    let dual_value = linear - log_z;
    let primal_value = exact::relative_entropy(&g);
    for (name, claimed, actual) in [
        ("dual value", number(report, "/dual_value")?, dual_value),
        (
            "primal value",
            number(report, "/primal_value")?,
            primal_value,
        ),
    ] {
        checks.push(
            name,
            if (claimed - actual).abs() <= ROUNDING * (1.0 + actual.abs()) {
                Ok(format!("{actual}"))
            } else {
                Err(format!("report has {claimed}, recomputed {actual}"))
            },
        );
    }
    checks.bound("duality gap", primal_value - dual_value, DUAL_TOLERANCE);
    // Ent(f) - D(f || g) = E[f log g] = dual + delta sum lambda.
    let cross: f64 = exact::mean(
        &f.iter()
            .zip(&g)
            .map(|(a, b)| if *a > 0.0 { a * b.ln() } else { 0.0 })
            .collect::<Vec<_>>(),
    );
    checks.bound(
        "duality identity",
        (cross - (dual_value + delta * sum)).abs(),
        DUAL_TOLERANCE,
    );
    checks.bound(
        "sum lambda <= Ent / delta",
        sum,
        ent / delta + DUAL_TOLERANCE,
    );
    Ok(())
}
