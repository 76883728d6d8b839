// SPDX-License-Identifier: Apache-2.0

//! Two coupled qubits, each with its own drive.
//!
//! Lab frame: `H = -g₁σz⁽¹⁾ - g₂σz⁽²⁾ + J σz⁽¹⁾σz⁽²⁾ + c (Δ₁σx⁽¹⁾ + Δ₂σx⁽²⁾)`
//! with `c = TRANSVERSE_PREFACTOR`. The Furry frame removes the diagonal part
//! through `R(t) = exp[iΛ₁σz⁽¹⁾ + iΛ₂σz⁽²⁾ - iJt σz⁽¹⁾σz⁽²⁾]`. The product basis
//! is ordered `|11⟩, |12⟩, |21⟩, |22⟩` with qubit 1 as the left factor.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{integrate_ode_grid, ComplexMatrix, OdeSpec, PanelGrid, QuadratureSpec};
use crate::propagator::{base_panel_width, lambda_samples, validate_grid};
use crate::pulses::{g_of_t, lambda_exact, DriveField, QubitConfig};

/// Factor multiplying `Δ_a σx⁽ᵃ⁾` in the two-qubit Hamiltonian.
pub const TRANSVERSE_PREFACTOR: f64 = 1.0;

const RULE_ORDER: usize = 12;
const MAX_REFINEMENTS: usize = 8;

/// `σz` eigenvalues of qubits 1 and 2 for each basis index.
const SIGNS: [(f64, f64); 4] = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoQubitConfig {
    pub qubit1: QubitConfig,
    pub drive1: DriveField,
    pub qubit2: QubitConfig,
    pub drive2: DriveField,
    /// `J`, the `σz⁽¹⁾σz⁽²⁾` coupling.
    pub coupling: f64,
}

impl TwoQubitConfig {
    pub fn validate(&self) -> Result<()> {
        self.qubit1.validate()?;
        self.qubit2.validate()?;
        self.drive1.validate()?;
        self.drive2.validate()?;
        if !self.coupling.is_finite() {
            return Err(Error::invalid("coupling", "must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourState {
    pub amplitudes: [Complex64; 4],
}

impl FourState {
    pub const GROUND: FourState = FourState::basis(0);

    pub const fn basis(index: usize) -> Self {
        let mut amplitudes = [Complex64::new(0.0, 0.0); 4];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    /// `|ψ₁⟩ ⊗ |ψ₂⟩`.
    pub fn product(first: [Complex64; 2], second: [Complex64; 2]) -> Self {
        Self {
            amplitudes: [
                first[0] * second[0],
                first[0] * second[1],
                first[1] * second[0],
                first[1] * second[1],
            ],
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn populations(&self) -> [f64; 4] {
        self.amplitudes.map(|z| z.norm_sqr())
    }

    /// Probability that qubit 1 is in state 2.
    pub fn p2_first(&self) -> f64 {
        self.amplitudes[2].norm_sqr() + self.amplitudes[3].norm_sqr()
    }

    /// Probability that qubit 2 is in state 2.
    pub fn p2_second(&self) -> f64 {
        self.amplitudes[1].norm_sqr() + self.amplitudes[3].norm_sqr()
    }

    pub fn validate(&self) -> Result<()> {
        if (self.norm_sqr() - 1.0).abs() > 1e-10 {
            return Err(Error::invalid("initial", "state must be normalized"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TwoQubitSeries {
    pub times: Vec<f64>,
    pub states: Vec<FourState>,
}

impl TwoQubitSeries {
    pub fn max_norm_drift(&self) -> f64 {
        self.states.iter().map(|s| (s.norm_sqr().sqrt() - 1.0).abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PauliAxis {
    X,
    Y,
}

/// `e^{iασz} σ e^{-iασz}`: `cos2α σx - sin2α σy` for `x`, `cos2α σy + sin2α σx` for `y`.
pub fn pauli_conjugation(alpha: f64, axis: PauliAxis) -> ComplexMatrix {
    let (s, c) = (2.0 * alpha).sin_cos();
    let (sx, sy) = (ComplexMatrix::sigma_x(), ComplexMatrix::sigma_y());
    match axis {
        PauliAxis::X => &sx.scale_real(c) - &sy.scale_real(s),
        PauliAxis::Y => &sy.scale_real(c) + &sx.scale_real(s),
    }
}

/// Furry-frame Hamiltonian for given phases `Λ₁`, `Λ₂` at time `t`.
pub fn furry_hamiltonian_2q_from_phases(
    delta1: f64,
    delta2: f64,
    coupling: f64,
    lambda1: f64,
    lambda2: f64,
    t: f64,
) -> ComplexMatrix {
    let w1 = Complex64::from_polar(TRANSVERSE_PREFACTOR * delta1, 2.0 * lambda1);
    let w2 = Complex64::from_polar(TRANSVERSE_PREFACTOR * delta2, 2.0 * lambda2);
    let e = Complex64::from_polar(1.0, 2.0 * coupling * t);
    let mut h = ComplexMatrix::zeros(4);
    let upper = upper_entries(w1, w2, e);
    for ((r, c), v) in UPPER.iter().zip(upper) {
        h[(*r, *c)] = v;
        h[(*c, *r)] = v.conj();
    }
    h
}

/// Positions of the nonzero upper-triangle entries.
const UPPER: [(usize, usize); 4] = [(0, 1), (0, 2), (1, 3), (2, 3)];

/// Upper entries from `w_a = cΔ_a e^{2iΛ_a}` and `e = e^{2iJt}`.
fn upper_entries(w1: Complex64, w2: Complex64, e: Complex64) -> [Complex64; 4] {
    [e * w2.conj(), e * w1.conj(), (e * w1).conj(), (e * w2).conj()]
}

/// Furry-frame Hamiltonian at `t ≥ 0`, with `Λ_a = ∫₀ᵗ g_a`.
pub fn furry_hamiltonian_2q(cfg: &TwoQubitConfig, t: f64, spec: &QuadratureSpec) -> Result<ComplexMatrix> {
    cfg.validate()?;
    let l1 = lambda_exact(&cfg.qubit1, &cfg.drive1, t, spec)?;
    let l2 = lambda_exact(&cfg.qubit2, &cfg.drive2, t, spec)?;
    Ok(furry_hamiltonian_2q_from_phases(
        cfg.qubit1.delta,
        cfg.qubit2.delta,
        cfg.coupling,
        l1,
        l2,
        t,
    ))
}

/// Diagonal of `R(t)`.
fn frame_phases(coupling: f64, lambda1: f64, lambda2: f64, t: f64) -> [Complex64; 4] {
    SIGNS.map(|(s1, s2)| Complex64::from_polar(1.0, lambda1 * s1 + lambda2 * s2 - coupling * t * s1 * s2))
}

pub fn lab_hamiltonian_2q(cfg: &TwoQubitConfig, t: f64) -> ComplexMatrix {
    let g1 = g_of_t(&cfg.qubit1, &cfg.drive1, t);
    let g2 = g_of_t(&cfg.qubit2, &cfg.drive2, t);
    let mut h = ComplexMatrix::zeros(4);
    for (i, (s1, s2)) in SIGNS.iter().enumerate() {
        h[(i, i)] = Complex64::new(-g1 * s1 - g2 * s2 + cfg.coupling * s1 * s2, 0.0);
    }
    let x1 = Complex64::new(TRANSVERSE_PREFACTOR * cfg.qubit1.delta, 0.0);
    let x2 = Complex64::new(TRANSVERSE_PREFACTOR * cfg.qubit2.delta, 0.0);
    for (r, c) in UPPER {
        // Indices differing in bit 0 flip qubit 2.
        let v = if (r ^ c) == 1 { x2 } else { x1 };
        h[(r, c)] = v;
        h[(c, r)] = v;
    }
    h
}

/// First-order Magnus evolution from `t = 0`, one exponential per grid step.
///
/// Each step applies `exp(-i ∫ h dt)` over that step in the Furry frame; the
/// result is mapped back to the lab frame through `R(t)`.
pub fn propagate_2q_magnus1(
    cfg: &TwoQubitConfig,
    grid: &[f64],
    initial: FourState,
    spec: &QuadratureSpec,
) -> Result<TwoQubitSeries> {
    cfg.validate()?;
    validate_grid(grid)?;
    initial.validate()?;
    spec.validate()?;

    let mut breakpoints: Vec<f64> = cfg
        .drive1
        .breakpoints()
        .into_iter()
        .chain(cfg.drive2.breakpoints())
        .filter(|&t| t > 0.0 && t < *grid.last().unwrap())
        .chain(grid.iter().copied().filter(|&t| t > 0.0))
        .collect();
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();

    let mut width = base_panel_width(&cfg.qubit1, &cfg.drive1).min(base_panel_width(&cfg.qubit2, &cfg.drive2));
    if cfg.coupling != 0.0 {
        width = width.min(std::f64::consts::TAU / (20.0 * 2.0 * cfg.coupling.abs()));
    }
    let mut previous: Option<Vec<FourState>> = None;
    for _ in 0..=MAX_REFINEMENTS {
        let panels = PanelGrid::new(0.0, &breakpoints, width, RULE_ORDER);
        if panels.panel_count() > spec.max_subdivisions {
            break;
        }
        let current = magnus1_once(cfg, &panels, grid, initial)?;
        if let Some(prev) = &previous {
            let diff = prev
                .iter()
                .zip(&current)
                .flat_map(|(a, b)| a.amplitudes.iter().zip(b.amplitudes).map(|(x, y)| (x - y).norm()))
                .fold(0.0, f64::max);
            if diff <= spec.abs_tol.max(spec.rel_tol) {
                return Ok(TwoQubitSeries {
                    times: grid.to_vec(),
                    states: current,
                });
            }
        }
        previous = Some(current);
        width *= 0.5;
    }
    Err(crate::numerics::NumericsError::SubdivisionLimit {
        estimate: previous.map_or(f64::NAN, |p| p.last().map_or(f64::NAN, |s| s.norm_sqr())),
    }
    .into())
}

fn magnus1_once(
    cfg: &TwoQubitConfig,
    panels: &PanelGrid,
    grid: &[f64],
    initial: FourState,
) -> Result<Vec<FourState>> {
    let (l1_nodes, l1_edges) = lambda_samples(&cfg.qubit1, &cfg.drive1, panels, false);
    let (l2_nodes, l2_edges) = lambda_samples(&cfg.qubit2, &cfg.drive2, panels, false);
    let samples: Vec<[Complex64; 4]> = panels
        .nodes()
        .iter()
        .zip(l1_nodes.iter().zip(&l2_nodes))
        .map(|(&t, (&l1, &l2))| {
            let w1 = Complex64::from_polar(TRANSVERSE_PREFACTOR * cfg.qubit1.delta, 2.0 * l1);
            let w2 = Complex64::from_polar(TRANSVERSE_PREFACTOR * cfg.qubit2.delta, 2.0 * l2);
            upper_entries(w1, w2, Complex64::from_polar(1.0, 2.0 * cfg.coupling * t))
        })
        .collect();
    let edges = panels.edges();

    let mut phi = initial.amplitudes.to_vec();
    let mut out = Vec::with_capacity(grid.len());
    let mut edge = 0;
    for &target in grid {
        let mut integral = [Complex64::new(0.0, 0.0); 4];
        while edges[edge] < target {
            let p = edge;
            let half = panels.panel_half_width(p);
            let m = panels.order();
            for (s, w) in samples[p * m..(p + 1) * m].iter().zip(panels.rule().weights()) {
                for k in 0..4 {
                    integral[k] += s[k] * (half * w);
                }
            }
            edge += 1;
        }
        if integral.iter().any(|z| *z != Complex64::new(0.0, 0.0)) {
            let mut generator = ComplexMatrix::zeros(4);
            let minus_i = Complex64::new(0.0, -1.0);
            for ((r, c), v) in UPPER.iter().zip(integral) {
                generator[(*r, *c)] = minus_i * v;
                generator[(*c, *r)] = minus_i * v.conj();
            }
            phi = generator.expm()?.apply(&phi);
        }
        let frame = frame_phases(cfg.coupling, l1_edges[edge], l2_edges[edge], target);
        let mut amplitudes = [Complex64::new(0.0, 0.0); 4];
        for k in 0..4 {
            amplitudes[k] = frame[k] * phi[k];
        }
        out.push(FourState { amplitudes });
    }
    Ok(out)
}

/// Integrates the lab-frame two-qubit Schrödinger equation from `t = 0`.
pub fn propagate_oracle_2q(
    cfg: &TwoQubitConfig,
    grid: &[f64],
    initial: FourState,
    spec: &OdeSpec,
) -> Result<TwoQubitSeries> {
    cfg.validate()?;
    validate_grid(grid)?;
    initial.validate()?;
    if spec.dimension != 4 {
        return Err(Error::invalid("ode.dimension", "two-qubit oracle needs dimension 4"));
    }
    let n = initial.norm_sqr().sqrt();
    let psi0: Vec<Complex64> = initial.amplitudes.iter().map(|z| z / n).collect();
    let out = integrate_ode_grid(|t| lab_hamiltonian_2q(cfg, t), &psi0, 0.0, grid, spec)?;
    Ok(TwoQubitSeries {
        times: grid.to_vec(),
        states: out
            .into_iter()
            .map(|v| FourState {
                amplitudes: [v[0], v[1], v[2], v[3]],
            })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagator::{propagate_magnus, MagnusOptions, MagnusSchedule, QubitState};
    use crate::pulses::PulseEnvelope;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn sz_phase(alpha: f64) -> ComplexMatrix {
        ComplexMatrix::from_diagonal(&[Complex64::from_polar(1.0, alpha), Complex64::from_polar(1.0, -alpha)])
    }

    fn driven_pair(delta1: f64, delta2: f64, coupling: f64) -> TwoQubitConfig {
        let pulse = PulseEnvelope::gaussian(0.3, 40.0, 10.0, 0.0);
        TwoQubitConfig {
            qubit1: QubitConfig::new(1.0, delta1),
            drive1: DriveField::new(1.0, vec![pulse]).unwrap(),
            qubit2: QubitConfig::new(1.2, delta2),
            drive2: DriveField::new(1.2, vec![PulseEnvelope { center: 45.0, ..pulse }]).unwrap(),
            coupling,
        }
    }

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn conjugation_special_angles() {
        assert!(pauli_conjugation(0.0, PauliAxis::X).max_abs_diff(&ComplexMatrix::sigma_x()) < 1e-15);
        let minus_sy = -&ComplexMatrix::sigma_y();
        assert!(pauli_conjugation(PI / 4.0, PauliAxis::X).max_abs_diff(&minus_sy) < 1e-15);
    }

    #[test]
    fn conjugation_matches_dense_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let alpha = rng.gen_range(-10.0..10.0);
            let (u, ui) = (sz_phase(alpha), sz_phase(-alpha));
            for (axis, s) in [(PauliAxis::X, ComplexMatrix::sigma_x()), (PauliAxis::Y, ComplexMatrix::sigma_y())] {
                let dense = &(&u * &s) * &ui;
                assert!(pauli_conjugation(alpha, axis).max_abs_diff(&dense) < 1e-13);
            }
        }
    }

    #[test]
    fn hamiltonian_at_origin_is_bare_transverse() {
        let h = furry_hamiltonian_2q_from_phases(0.3, 0.7, 0.2, 0.0, 0.0, 0.0);
        let expected = [
            [0.0, 0.7, 0.3, 0.0],
            [0.7, 0.0, 0.0, 0.3],
            [0.3, 0.0, 0.0, 0.7],
            [0.0, 0.3, 0.7, 0.0],
        ];
        for r in 0..4 {
            for k in 0..4 {
                assert_eq!(h[(r, k)], c(expected[r][k]));
            }
        }
    }

    #[test]
    fn decoupled_single_drive_is_conjugated_sigma_x() {
        let lam = 0.83;
        let h = furry_hamiltonian_2q_from_phases(0.4, 0.0, 0.0, lam, 1.7, 5.0);
        let block = pauli_conjugation(-lam, PauliAxis::X).scale_real(0.4);
        let expected = block.kron(&ComplexMatrix::identity(2));
        assert!(h.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn hamiltonian_matches_frame_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let id = ComplexMatrix::identity(2);
        for _ in 0..100 {
            let (t, j) = (rng.gen_range(0.0..100.0), rng.gen_range(-1.0..1.0));
            let (l1, l2) = (rng.gen_range(-50.0..50.0), rng.gen_range(-50.0..50.0));
            let (d1, d2) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let r = ComplexMatrix::from_diagonal(&frame_phases(j, l1, l2, t));
            let x = &ComplexMatrix::sigma_x().scale_real(d1).kron(&id) + &id.kron(&ComplexMatrix::sigma_x().scale_real(d2));
            let dense = &(&r.adjoint() * &x) * &r;
            let h = furry_hamiltonian_2q_from_phases(d1, d2, j, l1, l2, t);
            assert!(h.max_abs_diff(&dense) < 1e-12);
        }
    }

    #[test]
    fn hamiltonian_is_hermitian_with_fixed_sparsity() {
        let cfg = driven_pair(0.2, 0.3, 0.05);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let t = rng.gen_range(0.0..90.0);
            let h = furry_hamiltonian_2q(&cfg, t, &QuadratureSpec::default()).unwrap();
            assert!(h.max_abs_diff(&h.adjoint()) < 1e-13);
            let nonzero = h.entries().iter().filter(|z| **z != c(0.0)).count();
            assert_eq!(nonzero, 8);
            for i in 0..4 {
                assert_eq!(h[(i, i)], c(0.0));
                assert_eq!(h[(i, 3 - i)], c(0.0));
            }
        }
    }

    #[test]
    fn no_tunneling_keeps_populations() {
        let cfg = driven_pair(0.0, 0.0, 0.3);
        let init = FourState::product([c(0.6), c(0.8)], [c(0.8), Complex64::new(0.0, 0.6)]);
        let grid = linspace(0.0, 80.0, 41);
        let s = propagate_2q_magnus1(&cfg, &grid, init, &QuadratureSpec::default()).unwrap();
        for st in &s.states {
            for (a, b) in st.populations().iter().zip(init.populations()) {
                assert!((a - b).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn spectator_qubit_reduces_to_single_qubit() {
        let step = 0.5;
        let grid = linspace(0.0, 80.0, 161);
        let opts = |delta: f64| MagnusOptions {
            order: 1,
            schedule: MagnusSchedule::Segmented {
                max_rotation: step * delta,
            },
            ..MagnusOptions::default()
        };
        for &delta in &[0.1, 0.25, 0.4] {
            let cfg = driven_pair(delta, 0.0, 0.0);
            let s = propagate_2q_magnus1(&cfg, &grid, FourState::GROUND, &QuadratureSpec::default()).unwrap();
            let single = propagate_magnus(
                &cfg.qubit1,
                &cfg.drive1,
                &grid,
                &opts(delta),
                QubitState::GROUND,
                &QuadratureSpec::default(),
            )
            .unwrap();
            for (a, b) in s.states.iter().zip(&single.p2) {
                assert!((a.p2_first() - b).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn magnus_follows_oracle_over_one_pulse() {
        let cfg = driven_pair(0.05, 0.06, 0.02);
        let grid = linspace(0.0, 80.0, 801);
        let magnus = propagate_2q_magnus1(&cfg, &grid, FourState::GROUND, &QuadratureSpec::default()).unwrap();
        let oracle = propagate_oracle_2q(&cfg, &grid, FourState::GROUND, &OdeSpec::adaptive(4)).unwrap();
        let worst = magnus
            .states
            .iter()
            .zip(&oracle.states)
            .flat_map(|(a, b)| a.populations().into_iter().zip(b.populations()).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max);
        assert!(worst <= 0.02, "{worst}");
    }

    #[test]
    fn magnus_conserves_norm_over_many_steps() {
        let cfg = driven_pair(0.2, 0.3, 0.1);
        let grid = linspace(0.0, 90.0, 1001);
        let s = propagate_2q_magnus1(&cfg, &grid, FourState::GROUND, &QuadratureSpec::default()).unwrap();
        assert!(s.max_norm_drift() <= 1e-8);
    }

    #[test]
    fn oracle_without_couplings_only_adds_phases() {
        let mut cfg = driven_pair(0.0, 0.0, 0.0);
        cfg.drive1 = DriveField::free(1.0);
        cfg.drive2 = DriveField::free(1.0);
        let init = FourState::product([c(0.6), c(0.8)], [c(0.8), c(0.6)]);
        let grid = linspace(0.0, 30.0, 7);
        let s = propagate_oracle_2q(&cfg, &grid, init, &OdeSpec::adaptive(4)).unwrap();
        for (t, st) in grid.iter().zip(&s.states) {
            let frame = frame_phases(0.0, 0.5 * t, 0.6 * t, *t);
            for k in 0..4 {
                assert!((st.amplitudes[k] - frame[k] * init.amplitudes[k]).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn oracle_with_strong_coupling_freezes_populations() {
        let mut cfg = driven_pair(0.0, 0.0, 2.0);
        cfg.drive1 = DriveField::free(1.0);
        cfg.drive2 = DriveField::free(1.0);
        let init = FourState::product([c(0.6), c(0.8)], [c(0.8), c(0.6)]);
        let grid = linspace(0.0, 10.0, 11);
        let s = propagate_oracle_2q(&cfg, &grid, init, &OdeSpec::adaptive(4)).unwrap();
        for (t, st) in grid.iter().zip(&s.states) {
            let frame = frame_phases(2.0, 0.5 * t, 0.6 * t, *t);
            for k in 0..4 {
                assert!((st.populations()[k] - init.populations()[k]).abs() < 1e-10);
                assert!((st.amplitudes[k] - frame[k] * init.amplitudes[k]).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn oracle_golden_trace_is_resolution_stable() {
        let cfg = driven_pair(0.1, 0.15, 0.05);
        let grid = linspace(0.0, 80.0, 81);
        let coarse = propagate_oracle_2q(&cfg, &grid, FourState::GROUND, &OdeSpec::adaptive(4)).unwrap();
        let mut tight = OdeSpec::adaptive(4);
        tight.method = crate::numerics::OdeMethod::Rk45Adaptive {
            rel_tol: 1e-13,
            abs_tol: 1e-15,
        };
        let fine = propagate_oracle_2q(&cfg, &grid, FourState::GROUND, &tight).unwrap();
        for (a, b) in coarse.states.iter().zip(&fine.states) {
            for k in 0..4 {
                assert!((a.amplitudes[k] - b.amplitudes[k]).norm() < 1e-6);
            }
        }
    }

    #[test]
    fn rejects_invalid_input() {
        let cfg = driven_pair(0.1, 0.1, 0.0);
        let bad = FourState {
            amplitudes: [c(1.0), c(1.0), c(0.0), c(0.0)],
        };
        assert!(propagate_2q_magnus1(&cfg, &[1.0], bad, &QuadratureSpec::default()).is_err());
        assert!(propagate_oracle_2q(&cfg, &[1.0], FourState::GROUND, &OdeSpec::adaptive(2)).is_err());
        let mut nan = cfg.clone();
        nan.coupling = f64::NAN;
        assert!(furry_hamiltonian_2q(&nan, 1.0, &QuadratureSpec::default()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn hamiltonian_hermitian_for_any_phases(
            d1 in -2.0f64..2.0, d2 in -2.0f64..2.0, j in -2.0f64..2.0,
            l1 in -100.0f64..100.0, l2 in -100.0f64..100.0, t in 0.0f64..100.0,
        ) {
            let h = furry_hamiltonian_2q_from_phases(d1, d2, j, l1, l2, t);
            prop_assert!(h.max_abs_diff(&h.adjoint()) < 1e-13);
            for i in 0..4 {
                prop_assert_eq!(h[(i, i)], c(0.0));
                prop_assert_eq!(h[(i, 3 - i)], c(0.0));
            }
        }

        #[test]
        fn spectator_reduction_over_parameters(delta in 0.05f64..0.4, a0 in 0.0f64..0.5) {
            let mut cfg = driven_pair(delta, 0.0, 0.0);
            cfg.drive1.pulses[0].amplitude = a0;
            let grid = linspace(0.0, 60.0, 61);
            let s = propagate_2q_magnus1(&cfg, &grid, FourState::GROUND, &QuadratureSpec::default()).unwrap();
            let opts = MagnusOptions {
                order: 1,
                schedule: MagnusSchedule::Segmented { max_rotation: delta },
                ..MagnusOptions::default()
            };
            let single = propagate_magnus(&cfg.qubit1, &cfg.drive1, &grid, &opts, QubitState::GROUND, &QuadratureSpec::default()).unwrap();
            for (a, b) in s.states.iter().zip(&single.p2) {
                prop_assert!((a.p2_first() - b).abs() < 1e-8);
            }
        }
    }
}
