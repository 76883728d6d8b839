// SPDX-License-Identifier: Apache-2.0

//! One-parameter sweeps over a base scenario.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use pulsed_qubit::floquet::quasienergy;

use crate::error::{CliError, CliResult};
use crate::scenario::{Mode, Output, Scenario};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Reduction {
    #[serde(rename = "max_p2")]
    MaxP2,
    #[serde(rename = "final_p2")]
    FinalP2,
    #[serde(rename = "quasienergy")]
    Quasienergy,
    #[serde(rename = "full-trace")]
    FullTrace,
}

impl Reduction {
    pub fn column(&self) -> &'static str {
        match self {
            Reduction::MaxP2 => "max_p2",
            Reduction::FinalP2 => "final_p2",
            Reduction::Quasienergy => "quasienergy",
            Reduction::FullTrace => "trace",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Linspace {
    pub start: f64,
    pub stop: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepValues {
    List(Vec<f64>),
    Linspace { linspace: Linspace },
}

impl SweepValues {
    pub fn values(&self) -> Vec<f64> {
        match self {
            SweepValues::List(v) => v.clone(),
            SweepValues::Linspace { linspace: l } => match l.n {
                0 => Vec::new(),
                1 => vec![l.start],
                n => (0..n)
                    .map(|i| {
                        if i + 1 == n {
                            l.stop
                        } else {
                            l.start + (l.stop - l.start) * (i as f64 / (n - 1) as f64)
                        }
                    })
                    .collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: Scenario,
    /// Dotted path into the base scenario, e.g. `drive.pulses[0].amplitude`.
    pub parameter: String,
    pub values: SweepValues,
    pub reduction: Reduction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<Output>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Outcome of one sweep point; exactly one of `result` and `error` is set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointResult {
    pub index: usize,
    pub value: f64,
    pub result: Option<String>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
enum Segment {
    Key(String),
    Index(usize),
}

fn parse_path(path: &str) -> CliResult<Vec<Segment>> {
    let bad = || CliError::invalid("parameter", format!("cannot parse path `{path}`"));
    let mut out = Vec::new();
    for part in path.split('.') {
        let (key, mut rest) = match part.find('[') {
            Some(i) => (&part[..i], &part[i..]),
            None => (part, ""),
        };
        if key.is_empty() {
            return Err(bad());
        }
        out.push(Segment::Key(key.to_string()));
        while !rest.is_empty() {
            let close = rest.find(']').ok_or_else(bad)?;
            if !rest.starts_with('[') {
                return Err(bad());
            }
            out.push(Segment::Index(rest[1..close].parse().map_err(|_| bad())?));
            rest = &rest[close + 1..];
        }
    }
    Ok(out)
}

/// Writes `x` at `path`. Every step must exist except a missing final object key.
pub fn set_parameter(target: &mut Value, path: &str, x: f64) -> CliResult<()> {
    let segments = parse_path(path)?;
    let missing = |what: &str| CliError::invalid("parameter", format!("`{path}`: {what} not found in base scenario"));
    let mut node = target;
    for (i, seg) in segments.iter().enumerate() {
        let last = i + 1 == segments.len();
        node = match seg {
            Segment::Key(k) => {
                let obj = node.as_object_mut().ok_or_else(|| missing(k))?;
                if last {
                    obj.entry(k.clone()).or_insert(Value::Null)
                } else {
                    obj.get_mut(k).ok_or_else(|| missing(k))?
                }
            }
            Segment::Index(j) => node
                .as_array_mut()
                .and_then(|a| a.get_mut(*j))
                .ok_or_else(|| missing(&format!("index {j}")))?,
        };
    }
    if node.is_object() || node.is_array() {
        return Err(CliError::invalid("parameter", format!("`{path}` does not name a number")));
    }
    *node = serde_json::json!(x);
    Ok(())
}

impl SweepSpec {
    pub fn from_path(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| CliError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn validate(&self) -> CliResult<()> {
        let values = self.values.values();
        if values.is_empty() {
            return Err(CliError::invalid("values", "must not be empty"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(CliError::invalid("values", "must be finite"));
        }
        if self.reduction == Reduction::Quasienergy && self.base.mode != Mode::Floquet {
            return Err(CliError::invalid("reduction", "quasienergy needs a floquet base scenario"));
        }
        let mut probe = serde_json::to_value(&self.base).expect("scenarios serialize");
        set_parameter(&mut probe, &self.parameter, values[0])?;
        Ok(())
    }

    /// The base scenario with the swept parameter set to `x`.
    pub fn point(&self, x: f64) -> CliResult<Scenario> {
        let mut v = serde_json::to_value(&self.base).expect("scenarios serialize");
        set_parameter(&mut v, &self.parameter, x)?;
        serde_json::from_value(v).map_err(|e| CliError::invalid(self.parameter.clone(), e.to_string()))
    }

    /// Reduces one point. `trace_path` receives the CSV for `full-trace`.
    pub fn evaluate(&self, x: f64, tolerance_scale: f64, trace_path: Option<&Path>) -> CliResult<String> {
        let s = self.point(x)?.resolved(tolerance_scale)?;
        let fmt = crate::output::format_real;
        match self.reduction {
            Reduction::Quasienergy => {
                let e = quasienergy(
                    s.train.as_ref().unwrap(),
                    s.qubit.as_ref().unwrap(),
                    s.omega.unwrap(),
                    &s.quadrature.unwrap_or_default(),
                )?;
                Ok(fmt(e.energy))
            }
            Reduction::MaxP2 => Ok(fmt(s.execute()?.max_p2())),
            Reduction::FinalP2 => Ok(fmt(s.execute()?.final_p2())),
            Reduction::FullTrace => {
                let trace = s.execute()?;
                let path = trace_path.expect("full-trace needs a trace path");
                crate::output::write_trace_csv(path, &trace)?;
                Ok(path.file_name().unwrap().to_string_lossy().into_owned())
            }
        }
    }
}
