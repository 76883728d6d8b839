// SPDX-License-Identifier: Apache-2.0

//! Quasienergies of an infinite train of identical pulses at `N`-photon resonance.
//!
//! Within the rotating-wave approximation the rotation angle splits into a
//! linear and a `τ`-periodic part, `G(t) = E_N (t - t₀) + φ_N(t)`, with
//! `E_N = Δ γ_N` and `γ_N = (1/τ) ∫ J_N(2A(t)/ω) dt` over one envelope. The
//! anchor `t₀` sits midway between the base pulse and its predecessor.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::QuadratureSpec;
use crate::pulses::{DriveField, PulseEnvelope, QubitConfig, DEFAULT_SUPPORT_CUTOFF};
use crate::resonance::{bessel_area, ResonanceOrder};

/// Stopping threshold for `|E_N τ - πm|` in [`tune_to_regular`].
pub const REGULARITY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSpec {
    /// Pulse centered at the start of the base period; all pulses share its shape and phase.
    pub pulse: PulseEnvelope,
    pub period: f64,
    pub order: u32,
    #[serde(default = "default_cutoff")]
    pub support_cutoff: f64,
}

fn default_cutoff() -> f64 {
    DEFAULT_SUPPORT_CUTOFF
}

impl TrainSpec {
    pub fn new(pulse: PulseEnvelope, period: f64, order: u32) -> Result<Self> {
        let train = Self {
            pulse,
            period,
            order,
            support_cutoff: DEFAULT_SUPPORT_CUTOFF,
        };
        train.validate()?;
        Ok(train)
    }

    /// Consecutive envelopes must not overlap: `τ ≥ 2T`.
    pub fn validate(&self) -> Result<()> {
        DriveField::new(1.0, vec![self.pulse]).map_err(|e| match e {
            Error::Invalid { field, reason } => {
                Error::invalid(field.replace("drive.pulses[0]", "train.pulse"), reason)
            }
            other => other,
        })?;
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::invalid("train.period", "must be finite and positive"));
        }
        if self.period < 2.0 * self.pulse.width {
            return Err(Error::invalid("train.period", "pulses overlap: period must be at least twice the width"));
        }
        if self.order == 0 {
            return Err(Error::invalid("train.order", "resonance order must be at least 1"));
        }
        if !(self.support_cutoff > 0.0 && self.support_cutoff.is_finite()) {
            return Err(Error::invalid("train.support_cutoff", "must be finite and positive"));
        }
        Ok(())
    }

    /// Start `t₀` of the base period.
    pub fn anchor(&self) -> f64 {
        self.pulse.center - 0.5 * self.period
    }

    /// Center of pulse `k` (any integer).
    pub fn center(&self, k: i64) -> f64 {
        self.pulse.center + k as f64 * self.period
    }

    fn pulse_k(&self, k: i64) -> PulseEnvelope {
        PulseEnvelope {
            center: self.center(k),
            ..self.pulse
        }
    }

    /// The first `count` pulses as an ordinary drive.
    pub fn truncated_drive(&self, omega: f64, count: usize) -> Result<DriveField> {
        let pulses = (0..count as i64).map(|k| self.pulse_k(k)).collect();
        let mut d = DriveField::new(omega, pulses)?;
        d.support_cutoff = self.support_cutoff;
        Ok(d)
    }

    fn check_resonance(&self, q: &QubitConfig, omega: f64) -> Result<ResonanceOrder> {
        ResonanceOrder::new(self.order, q.epsilon0, omega)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasienergyResult {
    pub gamma: f64,
    pub energy: f64,
    pub e_plus: f64,
    pub e_minus: f64,
    /// `(ε₁ + E_N, ε₂ - E_N)`.
    pub real_energies: (f64, f64),
}

/// `γ_N = (1/τ) ∫ J_N(2A(t)/ω) dt` over one envelope, truncated at the support cutoff.
pub fn gamma_n(train: &TrainSpec, omega: f64, spec: &QuadratureSpec) -> Result<f64> {
    train.validate()?;
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::invalid("omega", "must be finite and positive"));
    }
    let (lo, hi) = train.pulse.support(train.support_cutoff);
    let area = bessel_area(&train.pulse, omega, train.support_cutoff, train.order as i32, lo, hi, spec)?;
    Ok(area / train.period)
}

pub fn quasienergy(train: &TrainSpec, q: &QubitConfig, omega: f64, spec: &QuadratureSpec) -> Result<QuasienergyResult> {
    q.validate()?;
    train.check_resonance(q, omega)?;
    let gamma = gamma_n(train, omega, spec)?;
    let energy = q.delta * gamma;
    Ok(QuasienergyResult {
        gamma,
        energy,
        e_plus: energy,
        e_minus: -energy,
        real_energies: (q.epsilon1 + energy, q.epsilon2 - energy),
    })
}

/// `φ_N(t) = Δ ∫_{t₀}^{t} (Σ_k J_N(2A_k(t')/ω) - γ_N) dt'`, reduced to the base
/// period. Each pulse contributes its own Bessel term, so the period average
/// is exactly `γ_N` and `φ_N` is exactly periodic.
pub fn phi_n(train: &TrainSpec, q: &QubitConfig, omega: f64, t: f64, spec: &QuadratureSpec) -> Result<f64> {
    q.validate()?;
    train.check_resonance(q, omega)?;
    let gamma = gamma_n(train, omega, spec)?;
    phi_with_gamma(train, q, omega, gamma, t, spec)
}

fn phi_with_gamma(
    train: &TrainSpec,
    q: &QubitConfig,
    omega: f64,
    gamma: f64,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if !t.is_finite() {
        return Err(Error::invalid("t", "must be finite"));
    }
    let t0 = train.anchor();
    let s = t0 + (t - t0).rem_euclid(train.period);
    let reach = train.pulse.support_half_width(train.support_cutoff);
    let k_lo = ((t0 - reach - train.pulse.center) / train.period).floor() as i64;
    let k_hi = ((t0 + train.period + reach - train.pulse.center) / train.period).ceil() as i64;
    let mut area = 0.0;
    for k in k_lo..=k_hi {
        let p = train.pulse_k(k);
        area += bessel_area(&p, omega, train.support_cutoff, train.order as i32, t0, s, spec)?;
    }
    Ok(q.delta * (area - gamma * (s - t0)))
}

/// `G(t) = E_N (t - t₀) + φ_N(t)` for the ground-state start at `t₀`.
pub fn rotation_angle(train: &TrainSpec, q: &QubitConfig, omega: f64, t: f64, spec: &QuadratureSpec) -> Result<f64> {
    q.validate()?;
    train.check_resonance(q, omega)?;
    let gamma = gamma_n(train, omega, spec)?;
    let phi = phi_with_gamma(train, q, omega, gamma, t, spec)?;
    Ok(q.delta * gamma * (t - train.anchor()) + phi)
}

/// `P₂(t) = sin²(E_N (t - t₀) + φ_N(t))`.
pub fn p2_train_identical(
    train: &TrainSpec,
    q: &QubitConfig,
    omega: f64,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    Ok(rotation_angle(train, q, omega, t, spec)?.sin().powi(2))
}

/// Quasienergetic states in the Furry picture and their `τ`-periodic factors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QesPair {
    pub plus: [Complex64; 2],
    pub minus: [Complex64; 2],
    /// `e^{iφ_N(t)}` multiplying `plus` on top of `e^{iE_N(t - t₀)}`.
    pub periodic_plus: Complex64,
    /// `e^{-iφ_N(t)}`.
    pub periodic_minus: Complex64,
}

/// `|Φ^±(t)⟩ = e^{±iG(t)} |χ^±⟩`, where `|χ^±⟩ = (|1⟩ ∓ e^{iβ}|2⟩)/√2` are the
/// eigenvectors of the rotation axis `ρ·σ` with eigenvalues `∓1` and
/// `β = arg((-1)^N e^{-iNθ})`. For odd `N` and `θ = 0`, `|χ^±⟩ = (|1⟩ ± |2⟩)/√2`.
pub fn qes_states(train: &TrainSpec, q: &QubitConfig, omega: f64, t: f64, spec: &QuadratureSpec) -> Result<QesPair> {
    q.validate()?;
    let order = train.check_resonance(q, omega)?;
    let gamma = gamma_n(train, omega, spec)?;
    let phi = phi_with_gamma(train, q, omega, gamma, t, spec)?;
    let g = q.delta * gamma * (t - train.anchor()) + phi;
    let axis = Complex64::from_polar(order.sign(), -(train.order as f64) * train.pulse.phase);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let chi_plus = [Complex64::new(h, 0.0), -axis * h];
    let chi_minus = [Complex64::new(h, 0.0), axis * h];
    let up = Complex64::from_polar(1.0, g);
    Ok(QesPair {
        plus: [up * chi_plus[0], up * chi_plus[1]],
        minus: [up.conj() * chi_minus[0], up.conj() * chi_minus[1]],
        periodic_plus: Complex64::from_polar(1.0, phi),
        periodic_minus: Complex64::from_polar(1.0, -phi),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FreeParam {
    Amplitude,
    Period,
    Width,
}

impl TrainSpec {
    fn with_param(&self, free: FreeParam, x: f64) -> Self {
        let mut t = *self;
        match free {
            FreeParam::Amplitude => t.pulse.amplitude = x,
            FreeParam::Period => t.period = x,
            FreeParam::Width => t.pulse.width = x,
        }
        t
    }
}

/// Bisects `free` within `bracket` until `|E_N τ - πm| ≤ 1e-8`.
pub fn tune_to_regular(
    template: &TrainSpec,
    q: &QubitConfig,
    omega: f64,
    m: u32,
    free: FreeParam,
    bracket: (f64, f64),
    spec: &QuadratureSpec,
) -> Result<TrainSpec> {
    q.validate()?;
    template.check_resonance(q, omega)?;
    if m == 0 {
        return Err(Error::invalid("m", "must be at least 1"));
    }
    let (mut lo, mut hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::invalid("bracket", "must be finite with lo < hi"));
    }
    // The residual has to sit well below the stopping threshold.
    let tight = QuadratureSpec {
        abs_tol: spec.abs_tol.min(1e-13),
        rel_tol: spec.rel_tol.min(1e-12),
        ..*spec
    };
    let target = std::f64::consts::PI * m as f64;
    let residual = |x: f64| -> Result<f64> {
        let train = template.with_param(free, x);
        Ok(q.delta * gamma_n(&train, omega, &tight)? * train.period - target)
    };
    let (mut f_lo, f_hi) = (residual(lo)?, residual(hi)?);
    if f_lo == 0.0 {
        return Ok(template.with_param(free, lo));
    }
    if f_hi == 0.0 {
        return Ok(template.with_param(free, hi));
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::NoRootInBracket { lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = residual(mid)?;
        if f_mid.abs() <= REGULARITY_TOLERANCE || hi - lo <= 4.0 * f64::EPSILON * mid.abs() {
            return Ok(template.with_param(free, mid));
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    Ok(template.with_param(free, 0.5 * (lo + hi)))
}
