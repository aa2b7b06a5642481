//! Group and density inputs.
//!
//! A density is given as a file path or a generator:
//!
//! * `uniform`
//! * `indicator:<members>` with members separated by commas, each an element
//!   index or a `/`-separated residue tuple (`indicator:0/1,2/3`)
//! * `indicator:<ratio>` with a ratio in `(0, 1]` written with a decimal point;
//!   a seeded uniformly random subset of that density
//! * `random:<seed>`, independent uniform `[0, 1)` weights, normalized
//!
//! Files hold either a JSON array, a JSON object with a `values` array, or
//! numbers separated by whitespace or commas.

use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use riesz_spectrum::density::Density;
use riesz_spectrum::group::GroupSpec;
use serde_json::{json, Value};

use crate::error::{CliError, Result};

/// Recorded in reports next to every seed.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng::seed_from_u64 (rand_chacha 0.9)";

pub fn parse_group(text: &str, max_size: usize) -> Result<GroupSpec> {
    let parsed = GroupSpec::parse(text)?;
    Ok(GroupSpec::with_max_size(parsed.orders(), max_size)?)
}

#[derive(Clone, Debug, PartialEq)]
pub enum DensitySource {
    Uniform,
    Members(Vec<Member>),
    Ratio(f64),
    Random(u64),
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Member {
    Index(usize),
    Residues(Vec<u64>),
}

impl DensitySource {
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if text == "uniform" {
            return Ok(DensitySource::Uniform);
        }
        if let Some(seed) = text.strip_prefix("random:") {
            let seed = seed
                .trim()
                .parse()
                .map_err(|_| CliError::Input(format!("bad seed in `{text}`")))?;
            return Ok(DensitySource::Random(seed));
        }
        if let Some(body) = text.strip_prefix("indicator:") {
            return parse_indicator(body.trim());
        }
        Ok(DensitySource::File(PathBuf::from(text)))
    }

    /// Builds the density; `seed` drives ratio indicators.
    pub fn load(&self, group: &GroupSpec, normalize: bool, seed: u64) -> Result<Density> {
        let n = group.size();
        match self {
            DensitySource::Uniform => Ok(Density::uniform(n)),
            DensitySource::Members(members) => {
                let mut indices = Vec::with_capacity(members.len());
                for m in members {
                    indices.push(match m {
                        Member::Index(i) => group.element_at(*i)?.index(),
                        Member::Residues(r) => group.element(r)?.index(),
                    });
                }
                Ok(Density::indicator(n, &indices)?)
            }
            DensitySource::Ratio(ratio) => {
                let size = ((ratio * n as f64).round() as usize).clamp(1, n);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let members = sample(&mut rng, n, size).into_vec();
                Ok(Density::indicator(n, &members)?)
            }
            DensitySource::Random(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let values = (0..n).map(|_| rng.random::<f64>()).collect();
                Ok(Density::new(values, true)?)
            }
            DensitySource::File(path) => {
                let values = read_values(path)?;
                Ok(Density::new(values, normalize)?)
            }
        }
    }

    /// Provenance fields for reports.
    pub fn describe(&self, text: &str, seed: u64) -> Value {
        match self {
            DensitySource::Ratio(_) => json!({"source": text, "rng": RNG_ALGORITHM, "seed": seed}),
            DensitySource::Random(s) => json!({"source": text, "rng": RNG_ALGORITHM, "seed": s}),
            _ => json!({"source": text}),
        }
    }
}

fn parse_indicator(body: &str) -> Result<DensitySource> {
    let bad = || CliError::Input(format!("bad indicator `{body}`"));
    if body.contains('.') {
        let ratio: f64 = body.parse().map_err(|_| bad())?;
        if !(ratio > 0.0 && ratio <= 1.0) {
            return Err(CliError::Input(format!(
                "indicator ratio {ratio} is outside (0, 1]"
            )));
        }
        return Ok(DensitySource::Ratio(ratio));
    }
    let mut members = Vec::new();
    for item in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if item.contains('/') {
            let residues = item
                .split('/')
                .map(|r| r.trim().parse::<u64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| bad())?;
            members.push(Member::Residues(residues));
        } else {
            members.push(Member::Index(item.parse().map_err(|_| bad())?));
        }
    }
    if members.is_empty() {
        return Err(bad());
    }
    Ok(DensitySource::Members(members))
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_json(path: &Path) -> Result<Value> {
    serde_json::from_str(&read_text(path)?).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn read_values(path: &Path) -> Result<Vec<f64>> {
    let text = read_text(path)?;
    let trimmed = text.trim_start();
    if trimmed.starts_with('[') || trimmed.starts_with('{') {
        let value: Value = serde_json::from_str(&text).map_err(|source| CliError::Json {
            path: path.to_path_buf(),
            source,
        })?;
        let array = match &value {
            Value::Object(map) => map.get("values"),
            other => Some(other),
        };
        return array
            .and_then(Value::as_array)
            .and_then(|a| a.iter().map(Value::as_f64).collect::<Option<Vec<f64>>>())
            .ok_or_else(|| {
                CliError::Input(format!("{}: expected an array of numbers", path.display()))
            });
    }
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| CliError::Input(format!("{}: `{s}` is not a number", path.display())))
        })
        .collect()
}
