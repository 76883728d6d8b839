// SPDX-License-Identifier: Apache-2.0

//! Rotating-wave closed forms at exact `N`-photon resonance `ε₀ = Nω`.
//!
//! Near resonance only the `n = -N` Bessel term of
//! `e^{2iΛ} = e^{iε₀t} Σ_n J_n(2A/ω) e^{in(ωt+θ)}` survives, so a pulse `k`
//! rotates the qubit about a fixed axis by `Δ j_k` with
//! `j_k(t) = ∫₀ᵗ J_N(2A_k(t')/ω) dt'`.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{bessel_j, integrate, QuadratureSpec};
use crate::propagator::GVector;
use crate::pulses::{first_overlap, warn_if_not_adiabatic, DriveField, PulseEnvelope, QubitConfig};

pub const DEFAULT_RESONANCE_TOLERANCE: f64 = 1e-9;

/// Resonance order `N`, checked against `|ε₀ - Nω|/ε₀ ≤ tolerance` on construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResonanceOrder(u32);

impl ResonanceOrder {
    pub fn new(n: u32, epsilon0: f64, omega: f64) -> Result<Self> {
        Self::with_tolerance(n, epsilon0, omega, DEFAULT_RESONANCE_TOLERANCE)
    }

    pub fn with_tolerance(n: u32, epsilon0: f64, omega: f64, tolerance: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("order", "resonance order must be at least 1"));
        }
        if !(epsilon0 > 0.0 && omega > 0.0) {
            return Err(Error::invalid("order", "epsilon0 and omega must be positive"));
        }
        let mismatch = (epsilon0 - n as f64 * omega).abs() / epsilon0;
        if mismatch > tolerance {
            return Err(Error::OffResonance { mismatch, tolerance });
        }
        Ok(Self(n))
    }

    pub fn get(&self) -> u32 {
        self.0
    }

    fn n(&self) -> i32 {
        self.0 as i32
    }

    /// `(-1)^N`.
    pub fn sign(&self) -> f64 {
        if self.0 % 2 == 1 {
            -1.0
        } else {
            1.0
        }
    }

    fn check(&self, q: &QubitConfig, d: &DriveField) -> Result<()> {
        Self::new(self.0, q.epsilon0, d.omega).map(|_| ())
    }
}

/// `j_k = ∫ J_N(2A_k(t')/ω) dt'` over a stated window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseAreaIntegral {
    pub value: f64,
}

/// `J_N(2A(t)/ω)` for one envelope.
pub fn bessel_envelope(p: &PulseEnvelope, omega: f64, cutoff: f64, n: i32, t: f64) -> f64 {
    let a = p.envelope(t, cutoff);
    if a == 0.0 {
        return 0.0;
    }
    // The argument is finite for validated envelopes.
    bessel_j(n, 2.0 * a / omega).unwrap_or(f64::NAN)
}

/// `∫_a^b J_N(2A(t)/ω) dt`, restricted to the envelope support.
pub fn bessel_area(
    p: &PulseEnvelope,
    omega: f64,
    cutoff: f64,
    n: i32,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let (lo, hi) = p.support(cutoff);
    let (a, b) = (a.max(lo), b.min(hi));
    if a >= b || p.amplitude == 0.0 {
        return Ok(0.0);
    }
    let v = integrate(|t| bessel_envelope(p, omega, cutoff, n, t), a, b, spec)?;
    if !v.is_finite() {
        return Err(Error::invalid("drive", "Bessel integrand is not finite"));
    }
    Ok(v)
}

/// `j_k(t) = ∫₀ᵗ J_N(2A_k(t')/ω) dt'` for pulse `k` of `d`.
pub fn j_integral(
    d: &DriveField,
    k: usize,
    order: ResonanceOrder,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<PulseAreaIntegral> {
    let p = d
        .pulses
        .get(k)
        .ok_or_else(|| Error::invalid("pulse", format!("index {k} out of range")))?;
    let value = bessel_area(p, d.omega, d.support_cutoff, order.n(), 0.0, t, spec)?;
    Ok(PulseAreaIntegral { value })
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid("t", "must be finite and non-negative"));
    }
    Ok(())
}

/// `P₂(t) = sin²(Δ j(t))` for a single pulse. Independent of the carrier phase.
pub fn p2_single_pulse(
    q: &QubitConfig,
    d: &DriveField,
    order: ResonanceOrder,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if d.pulses.len() != 1 {
        return Err(Error::invalid("drive.pulses", "single-pulse form needs exactly one pulse"));
    }
    order.check(q, d)?;
    check_time(t)?;
    warn_if_not_adiabatic(d);
    let j = j_integral(d, 0, order, t, spec)?.value;
    Ok((q.delta * j).sin().powi(2))
}

/// `P₂(t) = sin²(Δ√w)` with `w = j₁² + j₂² + 2 cos(N(θ₂ - θ₁)) j₁ j₂`.
pub fn p2_two_pulse(
    q: &QubitConfig,
    d: &DriveField,
    order: ResonanceOrder,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    if d.pulses.len() != 2 {
        return Err(Error::invalid("drive.pulses", "two-pulse form needs exactly two pulses"));
    }
    order.check(q, d)?;
    check_time(t)?;
    if let Some(k) = first_overlap(d) {
        return Err(Error::OverlappingPulses { first: k, second: k + 1 });
    }
    let j1 = j_integral(d, 0, order, t, spec)?.value;
    let j2 = j_integral(d, 1, order, t, spec)?.value;
    let dtheta = d.pulses[1].phase - d.pulses[0].phase;
    let w = two_pulse_w(j1, j2, order.get() as f64 * dtheta);
    Ok((q.delta * w.sqrt()).sin().powi(2))
}

/// `j₁² + j₂² + 2 cos(phase) j₁ j₂`, clamped at zero against rounding.
pub fn two_pulse_w(j1: f64, j2: f64, phase: f64) -> f64 {
    (j1 * j1 + j2 * j2 + 2.0 * phase.cos() * j1 * j2).max(0.0)
}

/// Single tone equivalent to two simultaneous tones of the same frequency:
/// `Ā e^{iθ̄} = A₁ e^{iθ₁} + A₂ e^{iθ₂}`. The phase is 0 when the tones cancel.
pub fn combined_tone_reduction(a1: f64, a2: f64, theta1: f64, theta2: f64) -> Result<(f64, f64)> {
    if !(a1 >= 0.0 && a2 >= 0.0) {
        return Err(Error::invalid("amplitude", "must be non-negative"));
    }
    let z = Complex64::from_polar(a1, theta1) + Complex64::from_polar(a2, theta2);
    let amp = z.norm();
    if amp <= 1e-15 * (a1 + a2) {
        return Ok((0.0, 0.0));
    }
    Ok((amp, z.arg()))
}

/// RWA exponential of the combined tone, `(-1)^N J_N(2Ā/ω) e^{-iNθ̄}`.
pub fn combined_tone_exponential(
    a1: f64,
    a2: f64,
    theta1: f64,
    theta2: f64,
    omega: f64,
    n: u32,
) -> Result<Complex64> {
    let (amp, phase) = combined_tone_reduction(a1, a2, theta1, theta2)?;
    let sign = if n % 2 == 1 { -1.0 } else { 1.0 };
    let j = bessel_j(n as i32, 2.0 * amp / omega)?;
    Ok(Complex64::from_polar(sign * j, -(n as f64) * phase))
}

/// Graf addition form of the same exponential,
/// `(-1)^N e^{-iNθ₂} J_N(w) ((Z - z e^{-iφ})/(Z - z e^{iφ}))^{N/2}` with
/// `z = 2A₁/ω`, `Z = 2A₂/ω`, `φ = θ₁ - θ₂ + π`, `w = |Z - z e^{iφ}|`.
/// Valid for `z < Z`; the half-integer power uses the principal branch.
pub fn graf_exponential(
    a1: f64,
    a2: f64,
    theta1: f64,
    theta2: f64,
    omega: f64,
    n: u32,
) -> Result<Complex64> {
    let (z, big_z) = (2.0 * a1 / omega, 2.0 * a2 / omega);
    if !(z >= 0.0 && z < big_z) {
        return Err(Error::invalid("amplitude", "Graf form needs 0 <= A1 < A2"));
    }
    let phi = theta1 - theta2 + std::f64::consts::PI;
    let num = Complex64::new(big_z, 0.0) - Complex64::from_polar(z, -phi);
    let den = Complex64::new(big_z, 0.0) - Complex64::from_polar(z, phi);
    let w = den.norm();
    let ratio = (num / den).powf(0.5 * n as f64);
    let sign = if n % 2 == 1 { -1.0 } else { 1.0 };
    let j = bessel_j(n as i32, w)?;
    Ok(Complex64::from_polar(sign * j, -(n as f64) * theta2) * ratio)
}

/// RWA rotation vector of a train of separated pulses:
/// `G_x + iG_y = (-1)^N Δ Σ_k j_k e^{-iNθ_k}`, `G_z = 0`.
pub fn rwa_train_vector(
    q: &QubitConfig,
    d: &DriveField,
    order: ResonanceOrder,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<GVector> {
    order.check(q, d)?;
    check_time(t)?;
    if let Some(k) = first_overlap(d) {
        return Err(Error::OverlappingPulses { first: k, second: k + 1 });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..d.pulses.len() {
        let j = j_integral(d, k, order, t, spec)?.value;
        acc += Complex64::from_polar(j, -(order.get() as f64) * d.pulses[k].phase);
    }
    let g = acc * (order.sign() * q.delta);
    Ok(GVector::new(g.re, g.im, 0.0))
}

/// `P₂(t) = sin²|G|` for a train of separated pulses.
pub fn p2_train(
    q: &QubitConfig,
    d: &DriveField,
    order: ResonanceOrder,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<f64> {
    Ok(rwa_train_vector(q, d, order, t, spec)?.magnitude().sin().powi(2))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct CacheKey {
    pulse: [u64; 4],
    omega: u64,
    cutoff: u64,
    order: u32,
    grid: Vec<u64>,
    tolerances: [u64; 2],
}

/// Running `j_k` values on a time grid, shared across threads. Entries are
/// inserted whole, so readers never observe partial traces.
#[derive(Debug, Default)]
pub struct JIntegralCache {
    entries: RwLock<HashMap<CacheKey, Arc<Vec<f64>>>>,
}

impl JIntegralCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.read().map(|m| m.len()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `j_k(t)` at every time of the ascending `grid`.
    pub fn running(
        &self,
        d: &DriveField,
        k: usize,
        order: ResonanceOrder,
        grid: &[f64],
        spec: &QuadratureSpec,
    ) -> Result<Arc<Vec<f64>>> {
        let p = *d
            .pulses
            .get(k)
            .ok_or_else(|| Error::invalid("pulse", format!("index {k} out of range")))?;
        let key = CacheKey {
            pulse: [
                p.amplitude.to_bits(),
                p.center.to_bits(),
                p.width.to_bits(),
                p.shape as u64,
            ],
            omega: d.omega.to_bits(),
            cutoff: d.support_cutoff.to_bits(),
            order: order.get(),
            grid: grid.iter().map(|t| t.to_bits()).collect(),
            tolerances: [spec.abs_tol.to_bits(), spec.rel_tol.to_bits()],
        };
        if let Some(hit) = self.entries.read().ok().and_then(|m| m.get(&key).cloned()) {
            return Ok(hit);
        }
        let mut values = Vec::with_capacity(grid.len());
        let (mut acc, mut last) = (0.0, 0.0);
        for &t in grid {
            check_time(t)?;
            if t < last {
                return Err(Error::invalid("grid", "times must be ascending"));
            }
            acc += bessel_area(&p, d.omega, d.support_cutoff, order.n(), last, t, spec)?;
            last = t;
            values.push(acc);
        }
        let values = Arc::new(values);
        if let Ok(mut m) = self.entries.write() {
            m.entry(key).or_insert_with(|| values.clone());
        }
        Ok(values)
    }
}

/// `P₂` of a train of separated pulses on a whole grid, reusing cached `j_k`.
pub fn p2_train_trace(
    q: &QubitConfig,
    d: &DriveField,
    order: ResonanceOrder,
    grid: &[f64],
    spec: &QuadratureSpec,
    cache: &JIntegralCache,
) -> Result<Vec<GVector>> {
    order.check(q, d)?;
    if let Some(k) = first_overlap(d) {
        return Err(Error::OverlappingPulses { first: k, second: k + 1 });
    }
    let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (k, p) in d.pulses.iter().enumerate() {
        let j = cache.running(d, k, order, grid, spec)?;
        let rot = Complex64::from_polar(1.0, -(order.get() as f64) * p.phase);
        for (a, v) in acc.iter_mut().zip(j.iter()) {
            *a += rot * v;
        }
    }
    let scale = order.sign() * q.delta;
    Ok(acc.into_iter().map(|g| GVector::new(scale * g.re, scale * g.im, 0.0)).collect())
}
