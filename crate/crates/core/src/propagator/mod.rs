// SPDX-License-Identifier: Apache-2.0

//! Single-qubit evolution in the Furry picture (Magnus orders 1–3) and in the
//! lab frame (direct ODE integration, used as ground truth).
//!
//! Basis ordering is `|1⟩ = (1, 0)` (ground, `σ_z = +1`) and `|2⟩ = (0, 1)`.
//! The lab Hamiltonian is `H = -g(t)σ_z + Δσ_x`. Removing the `σ_z` part with
//! `Ψ = exp(iΛσ_z) Φ` leaves `h(t) = Δ[cos 2Λ σ_x + sin 2Λ σ_y]`, whose
//! evolution operator is written `S = exp(-i G·σ)`.

mod engine;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    bessel_j, integrate_ode_grid, ComplexMatrix, NumericsError, OdeSpec, PanelGrid, QuadratureSpec,
};
use crate::pulses::{g_of_t, lambda_adiabatic, DriveField, QubitConfig, PANELS_PER_PERIOD};

pub(crate) use engine::{dot, Su2, V3};
use engine::{edge_indices, EdgeSample, RULE_ORDER};

/// Windows longer than this trigger a cost warning for third-order evaluations.
pub const THIRD_ORDER_WARN_WINDOW: f64 = 1.0e4;

/// At most this many grid refinements are tried before giving up.
const MAX_REFINEMENTS: usize = 8;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GVector {
    pub gx: f64,
    pub gy: f64,
    pub gz: f64,
}

impl GVector {
    pub fn new(gx: f64, gy: f64, gz: f64) -> Self {
        Self { gx, gy, gz }
    }

    pub(crate) fn from_array(v: V3) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.gx, self.gy, self.gz]
    }

    /// `G = |G|`.
    pub fn magnitude(&self) -> f64 {
        dot(self.as_array(), self.as_array()).sqrt()
    }

    /// Unit rotation axis; `None` at `G = 0`, where the propagator is the identity.
    pub fn rho(&self) -> Option<[f64; 3]> {
        let g = self.magnitude();
        (g > 0.0).then(|| [self.gx / g, self.gy / g, self.gz / g])
    }

    /// `ρ_z`, taken as 0 at `G = 0`.
    pub fn rho_z(&self) -> f64 {
        self.rho().map_or(0.0, |r| r[2])
    }

    /// Row-major entries of `exp(-i G·σ)`.
    pub fn propagator(&self) -> [Complex64; 4] {
        Su2::from_rotation(self.as_array()).matrix()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitState {
    pub c1: Complex64,
    pub c2: Complex64,
}

impl QubitState {
    pub const GROUND: QubitState = QubitState {
        c1: Complex64::new(1.0, 0.0),
        c2: Complex64::new(0.0, 0.0),
    };

    pub const EXCITED: QubitState = QubitState {
        c1: Complex64::new(0.0, 0.0),
        c2: Complex64::new(1.0, 0.0),
    };

    pub fn new(c1: Complex64, c2: Complex64) -> Self {
        Self { c1, c2 }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c1.norm_sqr() + self.c2.norm_sqr()
    }

    pub fn p2(&self) -> f64 {
        self.c2.norm_sqr()
    }

    pub fn validate(&self) -> Result<()> {
        if (self.norm_sqr() - 1.0).abs() > 1e-10 {
            return Err(Error::invalid("initial", "state must be normalized"));
        }
        Ok(())
    }

    fn to_vec(self) -> Vec<Complex64> {
        vec![self.c1, self.c2]
    }
}

impl Default for QubitState {
    fn default() -> Self {
        Self::GROUND
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub states: Vec<QubitState>,
    pub p2: Vec<f64>,
    /// Rotation vector of the Furry-picture propagator, present for Magnus runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<Vec<GVector>>,
}

impl TimeSeries {
    fn from_states(times: &[f64], states: Vec<QubitState>, rotation: Option<Vec<GVector>>) -> Self {
        let p2 = states.iter().map(|s| s.p2().clamp(0.0, 1.0)).collect();
        Self {
            times: times.to_vec(),
            states,
            p2,
            rotation,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_p2(&self) -> f64 {
        self.p2.iter().copied().fold(0.0, f64::max)
    }

    pub fn final_p2(&self) -> f64 {
        self.p2.last().copied().unwrap_or(0.0)
    }

    /// Largest `| |ψ|² - 1 |` over the series.
    pub fn max_norm_drift(&self) -> f64 {
        self.states.iter().map(|s| (s.norm_sqr().sqrt() - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// How the Furry-picture coupling `w(t) = Δ e^{2iΛ(t)}` is evaluated.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CouplingModel {
    /// `Λ` by quadrature of `g`.
    #[default]
    Exact,
    /// `Λ` from the slowly varying envelope formula.
    Adiabatic,
    /// Only the `N`-photon resonant Bessel term of `e^{2iΛ}`:
    /// `w = (-1)^N Δ Σ_k J_N(2A_k/ω) e^{-iNθ_k} e^{i(ε₀-Nω)t}`.
    Rwa { order: u32 },
}

/// How the Magnus series is applied over the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MagnusSchedule {
    /// One exponential from `t = 0` to each output time.
    Global,
    /// Consecutive exponentials over segments on which `∫|h| ≤ max_rotation`,
    /// composed in time order. Segment boundaries do not depend on the output grid.
    Segmented { max_rotation: f64 },
}

impl Default for MagnusSchedule {
    fn default() -> Self {
        MagnusSchedule::Segmented { max_rotation: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MagnusOptions {
    pub order: u8,
    #[serde(default)]
    pub model: CouplingModel,
    #[serde(default)]
    pub schedule: MagnusSchedule,
}

impl Default for MagnusOptions {
    fn default() -> Self {
        Self {
            order: 2,
            model: CouplingModel::Exact,
            schedule: MagnusSchedule::default(),
        }
    }
}

impl MagnusOptions {
    pub fn global(order: u8, model: CouplingModel) -> Self {
        Self {
            order,
            model,
            schedule: MagnusSchedule::Global,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.order) {
            return Err(Error::invalid("magnus.order", "must be 1, 2 or 3"));
        }
        if let CouplingModel::Rwa { order } = self.model {
            if order == 0 {
                return Err(Error::invalid("magnus.model.order", "resonance order must be at least 1"));
            }
        }
        if let MagnusSchedule::Segmented { max_rotation } = self.schedule {
            if !(max_rotation > 0.0 && max_rotation.is_finite()) {
                return Err(Error::invalid("magnus.schedule.max_rotation", "must be finite and positive"));
            }
        }
        Ok(())
    }
}

/// `h = Δ(e^{-2iΛ}σ₊ + e^{2iΛ}σ₋)`.
pub fn furry_hamiltonian(q: &QubitConfig, lam: f64) -> ComplexMatrix {
    let w = Complex64::from_polar(q.delta, 2.0 * lam);
    let zero = Complex64::new(0.0, 0.0);
    ComplexMatrix::from_rows(2, &[zero, w.conj(), w, zero])
}

pub(crate) fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("grid", "must contain at least one time"));
    }
    if grid.iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::invalid("grid", "times must be finite and non-negative"));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::invalid("grid", "times must be ascending"));
    }
    Ok(())
}

/// Largest panel width that resolves the carrier, the fastest Furry phase and the envelopes.
pub(crate) fn base_panel_width(q: &QubitConfig, d: &DriveField) -> f64 {
    let tau = std::f64::consts::TAU;
    let fastest = d.omega.max(q.epsilon0 + 2.0 * d.peak_sum());
    let mut width = tau / (PANELS_PER_PERIOD * fastest);
    for p in &d.pulses {
        width = width.min(0.25 * p.width);
    }
    width
}

/// `Λ` at every node and edge of `grid`.
pub(crate) fn lambda_samples(
    q: &QubitConfig,
    d: &DriveField,
    grid: &PanelGrid,
    adiabatic: bool,
) -> (Vec<f64>, Vec<f64>) {
    if adiabatic {
        let f = |t: &f64| lambda_adiabatic(q, d, *t);
        return (grid.nodes().iter().map(f).collect(), grid.edges().iter().map(f).collect());
    }
    let field: Vec<f64> = grid.nodes().iter().map(|&t| d.field(t)).collect();
    let (mut nodes, mut edges) = grid.cumulative(&field);
    for (l, t) in nodes.iter_mut().zip(grid.nodes()) {
        *l += 0.5 * q.epsilon0 * t;
    }
    for (l, t) in edges.iter_mut().zip(grid.edges()) {
        *l += 0.5 * q.epsilon0 * t;
    }
    (nodes, edges)
}

/// `(-1)^N Σ_k J_N(2A_k(t)/ω) e^{-iNθ_k}`, the resonant component of `e^{2iΛ - iε₀t}`.
pub(crate) fn resonant_bessel_sum(d: &DriveField, order: u32, t: f64) -> Result<Complex64> {
    let n = order as i32;
    let sign = if order % 2 == 1 { -1.0 } else { 1.0 };
    let mut acc = Complex64::new(0.0, 0.0);
    for p in &d.pulses {
        let a = p.envelope(t, d.support_cutoff);
        if a == 0.0 {
            continue;
        }
        let j = bessel_j(n, 2.0 * a / d.omega)?;
        acc += Complex64::from_polar(j, -(n as f64) * p.phase);
    }
    Ok(acc * sign)
}

struct Resolved {
    samples: Vec<EdgeSample>,
    lambda: Vec<f64>,
}

/// Runs the engine on successively halved panel widths until two consecutive
/// resolutions agree to the quadrature tolerance.
fn resolve(
    q: &QubitConfig,
    d: &DriveField,
    times: &[f64],
    opts: &MagnusOptions,
    spec: &QuadratureSpec,
) -> Result<Resolved> {
    spec.validate()?;
    let t_end = *times.last().unwrap();

    let mut segment_bounds = Vec::new();
    if let MagnusSchedule::Segmented { max_rotation } = opts.schedule {
        if q.delta != 0.0 {
            let len = max_rotation / q.delta.abs();
            let count = (t_end / len).floor() as usize;
            segment_bounds.extend((1..=count).map(|k| k as f64 * len).filter(|&t| t < t_end));
        }
    }
    let mut breakpoints: Vec<f64> = d
        .breakpoints()
        .into_iter()
        .filter(|&t| t > 0.0 && t < t_end)
        .chain(segment_bounds.iter().copied())
        .chain(times.iter().copied().filter(|&t| t > 0.0))
        .collect();
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();

    let mut width = base_panel_width(q, d);
    let mut previous: Option<Resolved> = None;
    for _ in 0..=MAX_REFINEMENTS {
        let grid = PanelGrid::new(0.0, &breakpoints, width, RULE_ORDER);
        if grid.panel_count() > spec.max_subdivisions {
            break;
        }
        let current = run_once(q, d, &grid, times, &segment_bounds, opts)?;
        if let Some(prev) = &previous {
            let diff = prev
                .samples
                .iter()
                .zip(&current.samples)
                .map(|(a, b)| a.propagator.max_abs_diff(&b.propagator))
                .chain(prev.lambda.iter().zip(&current.lambda).map(|(a, b)| (a - b).abs()))
                .fold(0.0, f64::max);
            let scale = current
                .samples
                .iter()
                .map(|s| dot(s.terms.first, s.terms.first).sqrt())
                .fold(1.0, f64::max);
            if diff <= spec.abs_tol.max(spec.rel_tol * scale) {
                return Ok(current);
            }
        }
        previous = Some(current);
        width *= 0.5;
    }
    Err(NumericsError::SubdivisionLimit {
        estimate: previous.map_or(f64::NAN, |p| p.samples.last().map_or(f64::NAN, |s| s.propagator.a0)),
    }
    .into())
}

fn run_once(
    q: &QubitConfig,
    d: &DriveField,
    grid: &PanelGrid,
    times: &[f64],
    segment_bounds: &[f64],
    opts: &MagnusOptions,
) -> Result<Resolved> {
    let (lambda_nodes, lambda_edges) = lambda_samples(q, d, grid, !matches!(opts.model, CouplingModel::Exact));
    let coupling: Vec<V3> = match opts.model {
        CouplingModel::Exact | CouplingModel::Adiabatic => lambda_nodes
            .iter()
            .map(|&l| {
                let (s, c) = (2.0 * l).sin_cos();
                [q.delta * c, q.delta * s, 0.0]
            })
            .collect(),
        CouplingModel::Rwa { order } => {
            let detuning = q.epsilon0 - order as f64 * d.omega;
            grid.nodes()
                .iter()
                .map(|&t| {
                    let w = resonant_bessel_sum(d, order, t)? * Complex64::from_polar(q.delta, detuning * t);
                    Ok([w.re, w.im, 0.0])
                })
                .collect::<Result<_>>()?
        }
    };
    let outputs = edge_indices(grid, times)?;
    let starts = edge_indices(grid, segment_bounds)?;
    let samples = engine::run(grid, &coupling, opts.order, &starts, &outputs);
    let lambda = outputs.iter().map(|&e| lambda_edges[e]).collect();
    Ok(Resolved { samples, lambda })
}

/// Evolves `initial` with the Magnus propagator and reports amplitudes
/// `C = diag(e^{iΛ}, e^{-iΛ}) S C(0)` on `grid`.
pub fn propagate_magnus(
    q: &QubitConfig,
    d: &DriveField,
    grid: &[f64],
    opts: &MagnusOptions,
    initial: QubitState,
    spec: &QuadratureSpec,
) -> Result<TimeSeries> {
    q.validate()?;
    d.validate()?;
    opts.validate()?;
    validate_grid(grid)?;
    initial.validate()?;
    if opts.model == CouplingModel::Adiabatic {
        crate::pulses::warn_if_not_adiabatic(d);
    }
    let resolved = resolve(q, d, grid, opts, spec)?;

    let mut states = Vec::with_capacity(grid.len());
    let mut rotation = Vec::with_capacity(grid.len());
    for (sample, &lam) in resolved.samples.iter().zip(&resolved.lambda) {
        let s = sample.propagator.matrix();
        let phi1 = s[0] * initial.c1 + s[1] * initial.c2;
        let phi2 = s[2] * initial.c1 + s[3] * initial.c2;
        let phase = Complex64::from_polar(1.0, lam);
        states.push(QubitState::new(phase * phi1, phase.conj() * phi2));
        let g = match opts.schedule {
            MagnusSchedule::Global => sample.terms.total(opts.order),
            MagnusSchedule::Segmented { .. } => sample.propagator.rotation(),
        };
        rotation.push(GVector::from_array(g));
    }
    Ok(TimeSeries::from_states(grid, states, Some(rotation)))
}

/// Magnus rotation vector from `0` to `t` as a single exponential
/// (order 1: `Δ∫(cos 2Λ, sin 2Λ, 0)`; order 2 adds `gz = Δ²∬ sin[2(Λ'' - Λ')]`).
pub fn g_vector(
    q: &QubitConfig,
    d: &DriveField,
    t: f64,
    order: u8,
    model: CouplingModel,
    spec: &QuadratureSpec,
) -> Result<GVector> {
    if !(1..=2).contains(&order) {
        return Err(Error::invalid("order", "must be 1 or 2"));
    }
    let terms = global_terms(q, d, t, order, model, spec)?;
    Ok(GVector::from_array(terms.total(order)))
}

/// Third-order additive correction to the single-exponential rotation vector.
pub fn magnus_third_correction(
    q: &QubitConfig,
    d: &DriveField,
    t: f64,
    spec: &QuadratureSpec,
) -> Result<GVector> {
    if t > THIRD_ORDER_WARN_WINDOW {
        log::warn!("third-order Magnus over a window of {t}; cost grows linearly with the window");
    }
    let terms = global_terms(q, d, t, 3, CouplingModel::Exact, spec)?;
    Ok(GVector::from_array(terms.third))
}

fn global_terms(
    q: &QubitConfig,
    d: &DriveField,
    t: f64,
    order: u8,
    model: CouplingModel,
    spec: &QuadratureSpec,
) -> Result<engine::Terms> {
    q.validate()?;
    d.validate()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid("t", "must be finite and non-negative"));
    }
    let opts = MagnusOptions::global(order, model);
    opts.validate()?;
    let resolved = resolve(q, d, &[t], &opts, spec)?;
    Ok(resolved.samples[0].terms)
}

/// Lab-frame Hamiltonian `-g(t)σ_z + Δσ_x`.
pub fn lab_hamiltonian(q: &QubitConfig, d: &DriveField, t: f64) -> ComplexMatrix {
    let g = g_of_t(q, d, t);
    let c = |x: f64| Complex64::new(x, 0.0);
    ComplexMatrix::from_rows(2, &[c(-g), c(q.delta), c(q.delta), c(g)])
}

/// Integrates the lab-frame Schrödinger equation from `t = 0` through `grid`.
pub fn propagate_oracle(
    q: &QubitConfig,
    d: &DriveField,
    grid: &[f64],
    initial: QubitState,
    spec: &OdeSpec,
) -> Result<TimeSeries> {
    q.validate()?;
    d.validate()?;
    validate_grid(grid)?;
    initial.validate()?;
    if spec.dimension != 2 {
        return Err(Error::invalid("ode.dimension", "single-qubit oracle needs dimension 2"));
    }
    let psi0 = initial.to_vec();
    let norm = psi0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let psi0: Vec<Complex64> = psi0.iter().map(|z| z / norm).collect();
    let out = integrate_ode_grid(|t| lab_hamiltonian(q, d, t), &psi0, 0.0, grid, spec)?;
    let states = out.into_iter().map(|v| QubitState::new(v[0], v[1])).collect();
    Ok(TimeSeries::from_states(grid, states, None))
}

#[cfg(test)]
mod tests;
