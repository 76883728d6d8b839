// SPDX-License-Identifier: Apache-2.0

//! Declarative single-run scenarios.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::json;

use pulsed_qubit::floquet::{quasienergy, rotation_angle, TrainSpec};
use pulsed_qubit::multiqubit::{propagate_2q_magnus1, propagate_oracle_2q, FourState, TwoQubitConfig};
use pulsed_qubit::numerics::{OdeMethod, OdeSpec, QuadratureSpec};
use pulsed_qubit::propagator::{propagate_magnus, propagate_oracle, GVector, MagnusOptions, QubitState, TimeSeries};
use pulsed_qubit::pulses::{lambda_adiabatic, DriveField, QubitConfig};
use pulsed_qubit::resonance::{p2_train_trace, p2_two_pulse, JIntegralCache, ResonanceOrder};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Oracle,
    Magnus,
    RwaSingle,
    RwaTwoPulse,
    RwaTrain,
    Floquet,
    TwoQubit,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::Oracle => "oracle",
            Mode::Magnus => "magnus",
            Mode::RwaSingle => "rwa-single",
            Mode::RwaTwoPulse => "rwa-two-pulse",
            Mode::RwaTrain => "rwa-train",
            Mode::Floquet => "floquet",
            Mode::TwoQubit => "two-qubit",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TwoQubitMethod {
    #[default]
    Magnus1,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub t_start: f64,
    pub t_end: f64,
    pub n_points: usize,
}

impl Grid {
    pub fn validate(&self) -> CliResult<()> {
        if self.n_points < 2 {
            return Err(CliError::invalid("grid.n_points", "must be at least 2"));
        }
        if !(self.t_start.is_finite() && self.t_start >= 0.0) {
            return Err(CliError::invalid("grid.t_start", "must be finite and non-negative"));
        }
        if !(self.t_end.is_finite() && self.t_end > self.t_start) {
            return Err(CliError::invalid("grid.t_end", "must be finite and greater than t_start"));
        }
        Ok(())
    }

    pub fn times(&self) -> Vec<f64> {
        let last = (self.n_points - 1) as f64;
        (0..self.n_points)
            .map(|i| {
                if i + 1 == self.n_points {
                    self.t_end
                } else {
                    self.t_start + (self.t_end - self.t_start) * (i as f64 / last)
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub path: String,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub mode: Mode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubit: Option<QubitConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive: Option<DriveField>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<TrainSpec>,
    /// Carrier frequency of the train in `floquet` mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub two_qubit: Option<TwoQubitConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub two_qubit_method: Option<TwoQubitMethod>,
    /// Photon number `N` for the closed-form modes other than `floquet`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resonance_order: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub magnus: Option<MagnusOptions>,
    pub grid: Grid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quadrature: Option<QuadratureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ode: Option<OdeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<Output>,
    /// Free-form remarks copied into the sidecar.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

fn require<'a, T>(block: &'a Option<T>, field: &str, mode: Mode) -> CliResult<&'a T> {
    block
        .as_ref()
        .ok_or_else(|| CliError::invalid(field, format!("block is required for mode {}", mode.name())))
}

/// Columns and rows of a computed trace plus scalar results for the sidecar.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
    pub summary: BTreeMap<String, serde_json::Value>,
}

impl Trace {
    /// The `p2` column; for two qubits this is qubit 1.
    pub fn p2(&self) -> impl Iterator<Item = f64> + '_ {
        self.rows.iter().map(|r| r[1])
    }

    pub fn max_p2(&self) -> f64 {
        self.p2().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn final_p2(&self) -> f64 {
        self.p2().last().unwrap_or(f64::NAN)
    }
}

pub const SINGLE_COLUMNS: [&str; 6] = ["t", "p2", "re_c1", "im_c1", "re_c2", "im_c2"];
pub const MAGNUS_COLUMNS: [&str; 8] = ["t", "p2", "re_c1", "im_c1", "re_c2", "im_c2", "gz", "rho_z"];
pub const TWO_QUBIT_COLUMNS: [&str; 11] = [
    "t", "p2", "p2_second", "re_c11", "im_c11", "re_c12", "im_c12", "re_c21", "im_c21", "re_c22", "im_c22",
];

impl Scenario {
    pub fn from_path(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|source| CliError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn validate(&self) -> CliResult<()> {
        self.grid.validate()?;
        let mode = self.mode;
        match mode {
            Mode::Oracle | Mode::Magnus | Mode::RwaSingle | Mode::RwaTwoPulse | Mode::RwaTrain => {
                require(&self.qubit, "qubit", mode)?.validate()?;
                require(&self.drive, "drive", mode)?.validate()?;
            }
            Mode::Floquet => {
                require(&self.qubit, "qubit", mode)?.validate()?;
                require(&self.train, "train", mode)?.validate()?;
                let omega = *require(&self.omega, "omega", mode)?;
                if !(omega > 0.0 && omega.is_finite()) {
                    return Err(CliError::invalid("omega", "must be finite and positive"));
                }
            }
            Mode::TwoQubit => require(&self.two_qubit, "two_qubit", mode)?.validate()?,
        }
        if let Some(m) = &self.magnus {
            m.validate()?;
        }
        if let Some(q) = &self.quadrature {
            q.validate().map_err(pulsed_qubit::Error::from)?;
        }
        if let Some(o) = &self.ode {
            o.validate().map_err(pulsed_qubit::Error::from)?;
            if o.dimension != self.ode_dimension() {
                return Err(CliError::invalid("ode.dimension", format!("mode {} needs {}", mode.name(), self.ode_dimension())));
            }
        }
        if self.resonance_order == Some(0) {
            return Err(CliError::invalid("resonance_order", "must be at least 1"));
        }
        if let Some(out) = &self.output {
            if out.path.is_empty() {
                return Err(CliError::invalid("output.path", "must not be empty"));
            }
        }
        Ok(())
    }

    fn ode_dimension(&self) -> usize {
        if self.mode == Mode::TwoQubit {
            4
        } else {
            2
        }
    }

    /// Validated copy with every default made explicit and tolerances scaled.
    pub fn resolved(&self, tolerance_scale: f64) -> CliResult<Scenario> {
        if !(tolerance_scale > 0.0 && tolerance_scale.is_finite()) {
            return Err(CliError::invalid("tolerance-scale", "must be finite and positive"));
        }
        self.validate()?;
        let mut s = self.clone();
        s.quadrature = Some(s.quadrature.unwrap_or_default().scaled(tolerance_scale));
        let mut ode = s.ode.unwrap_or_else(|| OdeSpec::adaptive(self.ode_dimension()));
        if let OdeMethod::Rk45Adaptive { rel_tol, abs_tol } = ode.method {
            ode.method = OdeMethod::Rk45Adaptive {
                rel_tol: rel_tol * tolerance_scale,
                abs_tol: abs_tol * tolerance_scale,
            };
        }
        s.ode = Some(ode);
        match s.mode {
            Mode::Magnus => s.magnus = Some(s.magnus.unwrap_or_default()),
            Mode::RwaSingle | Mode::RwaTwoPulse | Mode::RwaTrain => {
                s.resonance_order = Some(s.resonance_order.unwrap_or(1))
            }
            Mode::TwoQubit => s.two_qubit_method = Some(s.two_qubit_method.unwrap_or_default()),
            _ => {}
        }
        Ok(s)
    }

    /// Runs a scenario returned by [`Scenario::resolved`].
    pub fn execute(&self) -> CliResult<Trace> {
        let times = self.grid.times();
        let quad = self.quadrature.unwrap_or_default();
        let ode = self.ode.unwrap_or_else(|| OdeSpec::adaptive(self.ode_dimension()));
        let mut summary = BTreeMap::new();
        let (columns, rows) = match self.mode {
            Mode::Oracle => {
                let (q, d) = (self.qubit.unwrap(), self.drive.as_ref().unwrap());
                let ts = propagate_oracle(&q, d, &times, QubitState::GROUND, &ode)?;
                summary.insert("max_norm_drift".into(), json!(ts.max_norm_drift()));
                (SINGLE_COLUMNS.to_vec(), single_rows(&ts, false))
            }
            Mode::Magnus => {
                let (q, d) = (self.qubit.unwrap(), self.drive.as_ref().unwrap());
                let opts = self.magnus.unwrap_or_default();
                let ts = propagate_magnus(&q, d, &times, &opts, QubitState::GROUND, &quad)?;
                summary.insert("max_norm_drift".into(), json!(ts.max_norm_drift()));
                (MAGNUS_COLUMNS.to_vec(), single_rows(&ts, true))
            }
            Mode::RwaSingle | Mode::RwaTwoPulse | Mode::RwaTrain => {
                let (q, d) = (self.qubit.unwrap(), self.drive.as_ref().unwrap());
                let order = ResonanceOrder::new(self.resonance_order.unwrap_or(1), q.epsilon0, d.omega)?;
                match (self.mode, d.pulses.len()) {
                    (Mode::RwaSingle, n) if n != 1 => {
                        return Err(CliError::invalid("drive.pulses", "rwa-single needs exactly one pulse"))
                    }
                    (Mode::RwaTwoPulse, _) => {
                        p2_two_pulse(&q, d, order, times[0], &quad)?;
                    }
                    _ => {}
                }
                let cache = JIntegralCache::new();
                let g = p2_train_trace(&q, d, order, &times, &quad, &cache)?;
                let rows = times
                    .iter()
                    .zip(&g)
                    .map(|(&t, g)| closed_form_row(t, *g, lambda_adiabatic(&q, d, t)))
                    .collect();
                (SINGLE_COLUMNS.to_vec(), rows)
            }
            Mode::Floquet => {
                let (q, train, omega) = (self.qubit.unwrap(), self.train.unwrap(), self.omega.unwrap());
                let e = quasienergy(&train, &q, omega, &quad)?;
                summary.insert("quasienergy".into(), serde_json::to_value(e).unwrap());
                summary.insert("anchor".into(), json!(train.anchor()));
                let n = train.order as f64;
                let sign = if train.order % 2 == 1 { -1.0 } else { 1.0 };
                let axis = [sign * (n * train.pulse.phase).cos(), -sign * (n * train.pulse.phase).sin()];
                let count = ((self.grid.t_end - train.anchor()) / train.period).ceil().max(0.0) as usize + 1;
                let d = train.truncated_drive(omega, count)?;
                let rows = times
                    .iter()
                    .map(|&t| {
                        let angle = rotation_angle(&train, &q, omega, t, &quad)?;
                        let g = GVector::new(angle * axis[0], angle * axis[1], 0.0);
                        Ok(closed_form_row(t, g, lambda_adiabatic(&q, &d, t)))
                    })
                    .collect::<CliResult<Vec<_>>>()?;
                (SINGLE_COLUMNS.to_vec(), rows)
            }
            Mode::TwoQubit => {
                let cfg = self.two_qubit.as_ref().unwrap();
                let series = match self.two_qubit_method.unwrap_or_default() {
                    TwoQubitMethod::Magnus1 => propagate_2q_magnus1(cfg, &times, FourState::GROUND, &quad)?,
                    TwoQubitMethod::Oracle => propagate_oracle_2q(cfg, &times, FourState::GROUND, &ode)?,
                };
                summary.insert("max_norm_drift".into(), json!(series.max_norm_drift()));
                let rows = times
                    .iter()
                    .zip(&series.states)
                    .map(|(&t, s)| {
                        let mut row = vec![t, s.p2_first(), s.p2_second()];
                        for a in s.amplitudes {
                            row.extend([a.re, a.im]);
                        }
                        row
                    })
                    .collect();
                (TWO_QUBIT_COLUMNS.to_vec(), rows)
            }
        };
        Ok(Trace { columns, rows, summary })
    }
}

fn single_rows(ts: &TimeSeries, with_rotation: bool) -> Vec<Vec<f64>> {
    ts.times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let s = ts.states[i];
            let mut row = vec![t, ts.p2[i], s.c1.re, s.c1.im, s.c2.re, s.c2.im];
            if with_rotation {
                let g = ts.rotation.as_ref().map_or(GVector::new(0.0, 0.0, 0.0), |r| r[i]);
                row.extend([g.gz, g.rho_z()]);
            }
            row
        })
        .collect()
}

/// Lab amplitudes `diag(e^{iΛ}, e^{-iΛ}) exp(-iG·σ) |1⟩` with `P₂ = sin²|G|`.
fn closed_form_row(t: f64, g: GVector, lambda: f64) -> Vec<f64> {
    let s = g.propagator();
    let c1 = Complex64::from_polar(1.0, lambda) * s[0];
    let c2 = Complex64::from_polar(1.0, -lambda) * s[2];
    vec![t, g.magnitude().sin().powi(2), c1.re, c1.im, c2.re, c2.im]
}
