// SPDX-License-Identifier: Apache-2.0

//! Drive fields `g(t) = ε₀/2 + Σ_k A_k(t) cos(ωt + θ_k)` and the accumulated
//! phase `Λ(t) = ∫₀ᵗ g`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{integrate_panels, QuadratureSpec};

/// Quadrature panels per carrier period for oscillatory drive integrals.
pub const PANELS_PER_PERIOD: f64 = 20.0;

pub const DEFAULT_SUPPORT_CUTOFF: f64 = 6.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvelopeShape {
    /// `A₀ exp(-(t - t_k)²/T²)`, truncated at `support_cutoff · T`.
    #[default]
    Gaussian,
    /// `A₀` on `[t_k - T, t_k + T]`, zero elsewhere. Used as a test envelope.
    Rectangular,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseEnvelope {
    pub amplitude: f64,
    pub center: f64,
    pub width: f64,
    /// Carrier phase `θ_k` in radians.
    #[serde(default)]
    pub phase: f64,
    #[serde(default)]
    pub shape: EnvelopeShape,
}

impl PulseEnvelope {
    pub fn gaussian(amplitude: f64, center: f64, width: f64, phase: f64) -> Self {
        Self {
            amplitude,
            center,
            width,
            phase,
            shape: EnvelopeShape::Gaussian,
        }
    }

    pub fn rectangular(amplitude: f64, center: f64, half_width: f64, phase: f64) -> Self {
        Self {
            shape: EnvelopeShape::Rectangular,
            ..Self::gaussian(amplitude, center, half_width, phase)
        }
    }

    fn validate(&self, field: &str) -> Result<()> {
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::invalid(format!("{field}.amplitude"), "must be finite and non-negative"));
        }
        if !(self.width > 0.0 && self.width.is_finite()) {
            return Err(Error::invalid(format!("{field}.width"), "must be finite and positive"));
        }
        if !self.center.is_finite() {
            return Err(Error::invalid(format!("{field}.center"), "must be finite"));
        }
        if !self.phase.is_finite() {
            return Err(Error::invalid(format!("{field}.phase"), "must be finite"));
        }
        Ok(())
    }

    /// Half-length of the interval outside which the envelope is exactly zero.
    pub fn support_half_width(&self, cutoff: f64) -> f64 {
        match self.shape {
            EnvelopeShape::Gaussian => cutoff * self.width,
            EnvelopeShape::Rectangular => self.width,
        }
    }

    pub fn support(&self, cutoff: f64) -> (f64, f64) {
        let h = self.support_half_width(cutoff);
        (self.center - h, self.center + h)
    }

    /// `A_k(t)`.
    pub fn envelope(&self, t: f64, cutoff: f64) -> f64 {
        let x = t - self.center;
        if x.abs() > self.support_half_width(cutoff) {
            return 0.0;
        }
        match self.shape {
            EnvelopeShape::Gaussian => {
                let u = x / self.width;
                self.amplitude * (-u * u).exp()
            }
            EnvelopeShape::Rectangular => self.amplitude,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveField {
    pub omega: f64,
    #[serde(default)]
    pub pulses: Vec<PulseEnvelope>,
    /// Gaussian envelopes are zero beyond this many widths from their center.
    #[serde(default = "default_cutoff")]
    pub support_cutoff: f64,
}

fn default_cutoff() -> f64 {
    DEFAULT_SUPPORT_CUTOFF
}

impl DriveField {
    pub fn new(omega: f64, pulses: Vec<PulseEnvelope>) -> Result<Self> {
        let d = Self {
            omega,
            pulses,
            support_cutoff: DEFAULT_SUPPORT_CUTOFF,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn free(omega: f64) -> Self {
        Self {
            omega,
            pulses: Vec::new(),
            support_cutoff: DEFAULT_SUPPORT_CUTOFF,
        }
    }

    pub fn with_cutoff(mut self, cutoff: f64) -> Self {
        self.support_cutoff = cutoff;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::invalid("drive.omega", "must be finite and positive"));
        }
        if !(self.support_cutoff > 0.0 && self.support_cutoff.is_finite()) {
            return Err(Error::invalid("drive.support_cutoff", "must be finite and positive"));
        }
        for (k, p) in self.pulses.iter().enumerate() {
            p.validate(&format!("drive.pulses[{k}]"))?;
        }
        if self.pulses.windows(2).any(|w| w[1].center < w[0].center) {
            return Err(Error::invalid("drive.pulses", "must be sorted by center"));
        }
        Ok(())
    }

    /// `Σ_k A_k(t) cos(ωt + θ_k)`, the oscillating part of `g`.
    pub fn field(&self, t: f64) -> f64 {
        self.pulses
            .iter()
            .map(|p| p.envelope(t, self.support_cutoff) * (self.omega * t + p.phase).cos())
            .sum()
    }

    /// Sum of the peak amplitudes; bounds `|g(t) - ε₀/2|`.
    pub fn peak_sum(&self) -> f64 {
        self.pulses.iter().map(|p| p.amplitude).sum()
    }

    /// Support edges and centers of every pulse, ascending and deduplicated.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut bps: Vec<f64> = self
            .pulses
            .iter()
            .flat_map(|p| {
                let (lo, hi) = p.support(self.support_cutoff);
                [lo, p.center, hi]
            })
            .collect();
        bps.sort_by(f64::total_cmp);
        bps.dedup();
        bps
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QubitConfigFields", into = "QubitConfigFields")]
pub struct QubitConfig {
    pub epsilon0: f64,
    pub delta: f64,
    pub epsilon1: f64,
    pub epsilon2: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QubitConfigFields {
    epsilon0: f64,
    delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    epsilon1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    epsilon2: Option<f64>,
}

impl TryFrom<QubitConfigFields> for QubitConfig {
    type Error = Error;

    fn try_from(f: QubitConfigFields) -> Result<Self> {
        let epsilon1 = match (f.epsilon1, f.epsilon2) {
            (Some(e1), _) => e1,
            (None, Some(e2)) => e2 - f.epsilon0,
            (None, None) => -0.5 * f.epsilon0,
        };
        let q = QubitConfig {
            epsilon0: f.epsilon0,
            delta: f.delta,
            epsilon1,
            epsilon2: f.epsilon2.unwrap_or(epsilon1 + f.epsilon0),
        };
        q.validate()?;
        Ok(q)
    }
}

impl From<QubitConfig> for QubitConfigFields {
    fn from(q: QubitConfig) -> Self {
        Self {
            epsilon0: q.epsilon0,
            delta: q.delta,
            epsilon1: Some(q.epsilon1),
            epsilon2: Some(q.epsilon2),
        }
    }
}

impl QubitConfig {
    /// Levels placed symmetrically: `ε₁ = -ε₀/2`, `ε₂ = ε₀/2`.
    pub fn new(epsilon0: f64, delta: f64) -> Self {
        Self {
            epsilon0,
            delta,
            epsilon1: -0.5 * epsilon0,
            epsilon2: 0.5 * epsilon0,
        }
    }

    pub fn with_epsilon1(mut self, epsilon1: f64) -> Self {
        self.epsilon1 = epsilon1;
        self.epsilon2 = epsilon1 + self.epsilon0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon0 > 0.0 && self.epsilon0.is_finite()) {
            return Err(Error::invalid("qubit.epsilon0", "must be finite and positive"));
        }
        if !self.delta.is_finite() {
            return Err(Error::invalid("qubit.delta", "must be finite"));
        }
        if !(self.epsilon1.is_finite() && self.epsilon2.is_finite()) {
            return Err(Error::invalid("qubit.epsilon1", "level energies must be finite"));
        }
        let gap = self.epsilon2 - self.epsilon1;
        if (gap - self.epsilon0).abs() > 1e-12 * self.epsilon0.max(self.epsilon1.abs()) {
            return Err(Error::invalid("qubit.epsilon2", "epsilon2 - epsilon1 must equal epsilon0"));
        }
        Ok(())
    }
}

/// `g(t) = ε₀/2 + Σ_k A_k(t) cos(ωt + θ_k)`.
pub fn g_of_t(q: &QubitConfig, d: &DriveField, t: f64) -> f64 {
    0.5 * q.epsilon0 + d.field(t)
}

/// `Λ(t) = ∫₀ᵗ g` by quadrature. Each pulse is integrated only over its
/// support, with at least [`PANELS_PER_PERIOD`] panels per carrier period.
pub fn lambda_exact(q: &QubitConfig, d: &DriveField, t: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::invalid("t", "must be non-negative"));
    }
    let mut lambda = 0.5 * q.epsilon0 * t;
    for p in &d.pulses {
        let (lo, hi) = p.support(d.support_cutoff);
        let (a, b) = (lo.max(0.0), hi.min(t));
        if a >= b || p.amplitude == 0.0 {
            continue;
        }
        let periods = (b - a) * d.omega / std::f64::consts::TAU;
        let panels = (periods * PANELS_PER_PERIOD).ceil().max(1.0) as usize;
        let f = |s: f64| p.envelope(s, d.support_cutoff) * (d.omega * s + p.phase).cos();
        lambda += integrate_panels(f, a, b, panels, spec)?;
    }
    Ok(lambda)
}

/// Slowly varying envelope approximation
/// `Λ(t) ≈ ε₀t/2 + Σ_k [A_k(t) sin(ωt + θ_k) - A_k(0) sin θ_k]/ω`.
/// The `t = 0` term keeps `Λ(0) = 0`; it vanishes when envelopes are zero at the origin.
pub fn lambda_adiabatic(q: &QubitConfig, d: &DriveField, t: f64) -> f64 {
    let c = d.support_cutoff;
    let oscillating: f64 = d
        .pulses
        .iter()
        .map(|p| p.envelope(t, c) * (d.omega * t + p.phase).sin() - p.envelope(0.0, c) * p.phase.sin())
        .sum();
    0.5 * q.epsilon0 * t + oscillating / d.omega
}

/// Emits a warning for every pulse too short for the adiabatic approximation (`ωT < 2π`).
pub fn warn_if_not_adiabatic(d: &DriveField) -> bool {
    let mut ok = true;
    for (k, p) in d.pulses.iter().enumerate() {
        if d.omega * p.width < std::f64::consts::TAU {
            log::warn!(
                "pulse {k}: ωT = {:.3} < 2π; the adiabatic phase approximation is marginal",
                d.omega * p.width
            );
            ok = false;
        }
    }
    ok
}

/// True when consecutive pulse centers are at least `T_k + T_{k+1}` apart,
/// i.e. the `1/e` half-widths of neighbouring envelopes are disjoint.
pub fn overlap_check(d: &DriveField) -> bool {
    first_overlap(d).is_none()
}

/// Index of the first pulse that overlaps its successor.
pub fn first_overlap(d: &DriveField) -> Option<usize> {
    d.pulses
        .windows(2)
        .position(|w| w[1].center - w[0].center < w[0].width + w[1].width)
}
