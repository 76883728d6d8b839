// SPDX-License-Identifier: Apache-2.0

use super::*;
use crate::pulses::{lambda_exact, PulseEnvelope};
use proptest::prelude::*;
use std::f64::consts::PI;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn fig3(omega: f64) -> (QubitConfig, DriveField) {
    let q = QubitConfig::new(1.0, 0.45);
    let d = DriveField::new(omega, vec![PulseEnvelope::gaussian(0.4, 21.0, 3.5, 0.0)]).unwrap();
    (q, d)
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

/// Runs the engine on a constant coupling `h = (hx, hy, 0)` over `[0, t]`.
fn constant_coupling_terms(hx: f64, hy: f64, t: f64, order: u8) -> engine::Terms {
    let grid = PanelGrid::new(0.0, &[t], 0.3, RULE_ORDER);
    let coupling = vec![[hx, hy, 0.0]; grid.nodes().len()];
    let out = engine::run(&grid, &coupling, order, &[], &[grid.panel_count()]);
    out[0].terms
}

#[test]
fn furry_hamiltonian_at_zero_and_quarter_pi() {
    let q = QubitConfig::new(1.0, 0.7);
    let h0 = furry_hamiltonian(&q, 0.0);
    assert!(h0.max_abs_diff(&ComplexMatrix::sigma_x().scale_real(0.7)) < 1e-15);
    let h1 = furry_hamiltonian(&q, PI / 4.0);
    assert!(h1.max_abs_diff(&ComplexMatrix::sigma_y().scale_real(0.7)) < 1e-15);
}

#[test]
fn furry_hamiltonian_squares_to_delta_squared() {
    let q = QubitConfig::new(1.0, -0.37);
    for &lam in &[0.0, 0.3, 1.7, -4.2, 100.0] {
        let h = furry_hamiltonian(&q, lam);
        assert!(h.is_hermitian(0.0));
        assert_eq!(h[(0, 0)], c(0.0, 0.0));
        let sq = &h * &h;
        assert!(sq.max_abs_diff(&ComplexMatrix::identity(2).scale_real(0.37 * 0.37)) < 1e-15);
    }
}

#[test]
fn furry_hamiltonian_is_conjugated_sigma_x() {
    let q = QubitConfig::new(1.0, 0.5);
    let lam: f64 = 0.83;
    let u = ComplexMatrix::from_diagonal(&[Complex64::from_polar(1.0, -lam), Complex64::from_polar(1.0, lam)]);
    let direct = &(&u * &ComplexMatrix::sigma_x().scale_real(0.5)) * &u.adjoint();
    assert!(furry_hamiltonian(&q, lam).max_abs_diff(&direct) < 1e-15);
}

#[test]
fn g_vector_vanishes_without_tunneling() {
    let (q, d) = fig3(0.5);
    let q = QubitConfig { delta: 0.0, ..q };
    let g = g_vector(&q, &d, 42.0, 2, CouplingModel::Exact, &QuadratureSpec::default()).unwrap();
    assert_eq!(g, GVector::default());
    assert!(g.rho().is_none());
}

#[test]
fn constant_coupling_is_a_pure_rotation() {
    let (delta, t) = (0.37, 9.0);
    let terms = constant_coupling_terms(delta, 0.0, t, 3);
    assert!((terms.first[0] - delta * t).abs() < 1e-13);
    assert!(terms.first[1].abs() < 1e-15);
    for v in [terms.second, terms.third] {
        assert!(v.iter().all(|x| x.abs() < 1e-12), "{v:?}");
    }
    let s = Su2::from_rotation(terms.total(3)).matrix();
    assert!((s[2].norm_sqr() - (delta * t).sin().powi(2)).abs() < 1e-13);
}

/// Brute-force second-order term on a uniform grid: `Λ` by composite Simpson
/// steps and the ordered double integral by midpoint prefix sums.
fn gz_double_riemann(q: &QubitConfig, d: &DriveField, t: f64, n: usize) -> f64 {
    let h = t / n as f64;
    let mut lam = 0.0;
    let mut prev_g = g_of_t(q, d, 0.0);
    let (mut inner_cos, mut inner_sin, mut gz) = (0.0, 0.0, 0.0);
    // Midpoint values of Λ: integrate g to each midpoint with Simpson on the half cell.
    for i in 0..n {
        let (a, m) = (i as f64 * h, (i as f64 + 0.5) * h);
        let g_mid = g_of_t(q, d, m);
        let lam_mid = lam + h / 12.0 * (prev_g + 4.0 * g_of_t(q, d, a + 0.25 * h) + g_mid);
        let (s, co) = (2.0 * lam_mid).sin_cos();
        // Inner integral up to the midpoint of cell i; the diagonal cell contributes sin 0 = 0.
        gz += h * (co * inner_sin - s * inner_cos);
        inner_cos += h * co;
        inner_sin += h * s;
        let g_end = g_of_t(q, d, a + h);
        lam += h / 6.0 * (prev_g + 4.0 * g_mid + g_end);
        prev_g = g_end;
    }
    q.delta * q.delta * gz
}

#[test]
fn second_order_matches_double_riemann_oracle() {
    let (q, d) = fig3(0.5);
    let t = 42.0;
    let g = g_vector(&q, &d, t, 2, CouplingModel::Exact, &QuadratureSpec::default()).unwrap();
    let coarse = gz_double_riemann(&q, &d, t, 100_000);
    let fine = gz_double_riemann(&q, &d, t, 200_000);
    let oracle = (4.0 * fine - coarse) / 3.0;
    assert!(g.gz.abs() > 1e-3);
    assert!((g.gz - oracle).abs() < 1e-6, "{} vs {oracle}", g.gz);
    let first = g_vector(&q, &d, t, 1, CouplingModel::Exact, &QuadratureSpec::default()).unwrap();
    assert_eq!(first.gz, 0.0);
    assert!((first.gx - g.gx).abs() < 1e-15);
}

/// Third-order term from the nested-commutator definition with dense 2×2
/// matrices and trapezoid running integrals on a uniform grid.
fn third_order_matrix_oracle(q: &QubitConfig, d: &DriveField, t: f64, n: usize) -> [f64; 3] {
    let h = t / n as f64;
    let ts: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
    let mut lam = vec![0.0; n + 1];
    for i in 1..=n {
        let (a, b) = (ts[i - 1], ts[i]);
        lam[i] = lam[i - 1]
            + h / 6.0 * (g_of_t(q, d, a) + 4.0 * g_of_t(q, d, 0.5 * (a + b)) + g_of_t(q, d, b));
    }
    let hs: Vec<ComplexMatrix> = lam.iter().map(|&l| furry_hamiltonian(q, l)).collect();
    let cumtrapz = |f: &[ComplexMatrix]| {
        let mut out = vec![ComplexMatrix::zeros(2)];
        for i in 1..f.len() {
            let step = (&f[i - 1] + &f[i]).scale_real(0.5 * h);
            out.push(&out[i - 1] + &step);
        }
        out
    };
    let k = cumtrapz(&hs);
    let hk: Vec<ComplexMatrix> = (0..=n).map(|i| hs[i].commutator(&k[i])).collect();
    let m = cumtrapz(&hk);
    let mut integrand = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut b = ComplexMatrix::zeros(2);
        for j in (0..=i).filter(|_| i > 0) {
            let wj = if j == 0 || j == i { 0.5 * h } else { h };
            b += &k[j].commutator(&hs[j].commutator(&hs[i])).scale_real(wj);
        }
        integrand.push(&hs[i].commutator(&m[i]) + &b);
    }
    let total = cumtrapz(&integrand).pop().unwrap();
    let omega3 = total.scale(c(0.0, 1.0 / 6.0));
    let comps = crate::numerics::pauli_components(&omega3);
    // Ω = -i G·σ, so G_k = i tr(Ω σ_k)/2.
    [(comps[0] * c(0.0, 1.0)).re, (comps[1] * c(0.0, 1.0)).re, (comps[2] * c(0.0, 1.0)).re]
}

#[test]
fn third_order_matches_nested_commutator_oracle() {
    let q = QubitConfig::new(1.0, 0.2);
    let d = DriveField::new(0.8, vec![PulseEnvelope::gaussian(0.5, 6.0, 2.0, 0.4)]).unwrap();
    let t = 9.0;
    let v = magnus_third_correction(&q, &d, t, &QuadratureSpec::default()).unwrap();
    let coarse = third_order_matrix_oracle(&q, &d, t, 1000);
    let fine = third_order_matrix_oracle(&q, &d, t, 2000);
    let scale = v.magnitude();
    assert!(scale > 1e-5);
    for (k, got) in v.as_array().iter().enumerate() {
        let oracle = (4.0 * fine[k] - coarse[k]) / 3.0;
        assert!((got - oracle).abs() < 1e-6 * scale.max(1.0), "component {k}: {got} vs {oracle}");
    }
}

#[test]
fn third_order_vanishes_for_constant_coupling_and_zero_tunneling() {
    let terms = constant_coupling_terms(0.3, -0.2, 5.0, 3);
    assert!(terms.third.iter().all(|x| x.abs() < 1e-12));
    let (q, d) = fig3(1.1);
    let q = QubitConfig { delta: 0.0, ..q };
    let v = magnus_third_correction(&q, &d, 42.0, &QuadratureSpec::default()).unwrap();
    assert_eq!(v, GVector::default());
}

#[test]
fn third_order_shrinks_with_tunneling() {
    let d = DriveField::new(1.1, vec![PulseEnvelope::gaussian(0.4, 21.0, 3.5, 0.0)]).unwrap();
    let spec = QuadratureSpec::default();
    let big = magnus_third_correction(&QubitConfig::new(1.0, 0.2), &d, 42.0, &spec).unwrap();
    let small = magnus_third_correction(&QubitConfig::new(1.0, 0.1), &d, 42.0, &spec).unwrap();
    assert!(small.magnitude() < big.magnitude());
}

#[test]
fn rwa_coupling_has_no_second_order_term() {
    let q = QubitConfig::new(1.0, 0.3);
    let d = DriveField::new(1.0, vec![PulseEnvelope::gaussian(0.19, 60.0, 10.0, 0.7)]).unwrap();
    let g = g_vector(&q, &d, 120.0, 2, CouplingModel::Rwa { order: 1 }, &QuadratureSpec::default()).unwrap();
    assert!(g.gz.abs() < 1e-12);
    assert!(g.magnitude() > 0.1);
}

#[test]
fn no_tunneling_means_no_transfer() {
    let (q, d) = fig3(0.5);
    let q = QubitConfig { delta: 0.0, ..q };
    let grid = linspace(0.0, 42.0, 50);
    let ts = propagate_magnus(&q, &d, &grid, &MagnusOptions::default(), QubitState::GROUND, &QuadratureSpec::default())
        .unwrap();
    assert!(ts.p2.iter().all(|&p| p == 0.0));
    let oracle = propagate_oracle(&q, &d, &grid, QubitState::GROUND, &OdeSpec::default()).unwrap();
    assert!(oracle.p2.iter().all(|&p| p < 1e-20));
    for (s, &t) in oracle.states.iter().zip(&grid) {
        let lam = lambda_exact(&q, &d, t, &QuadratureSpec::default()).unwrap();
        assert!((s.c1 - Complex64::from_polar(1.0, lam)).norm() < 1e-8, "t={t}");
    }
}

#[test]
fn static_qubit_oracle_is_rabi_with_generalized_frequency() {
    let q = QubitConfig::new(1.0, 0.2);
    let d = DriveField::free(1.0);
    let grid = linspace(0.0, 30.0, 61);
    let ts = propagate_oracle(&q, &d, &grid, QubitState::GROUND, &OdeSpec::default()).unwrap();
    let omega_r = (0.04f64 + 0.25).sqrt();
    for (&t, &p) in grid.iter().zip(&ts.p2) {
        let exact = 0.04 / (0.04 + 0.25) * (omega_r * t).sin().powi(2);
        assert!((p - exact).abs() < 1e-9);
    }
}

#[test]
fn magnus_agrees_with_oracle_on_weak_resonant_drive() {
    let q = QubitConfig::new(1.0, 0.1);
    let d = DriveField::new(1.0, vec![PulseEnvelope::gaussian(0.3, 60.0, 10.0, 0.0)]).unwrap();
    let grid = linspace(0.0, 120.0, 601);
    let magnus = propagate_magnus(&q, &d, &grid, &MagnusOptions::default(), QubitState::GROUND, &QuadratureSpec::default())
        .unwrap();
    let oracle = propagate_oracle(&q, &d, &grid, QubitState::GROUND, &OdeSpec::default()).unwrap();
    let dev = magnus.p2.iter().zip(&oracle.p2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(oracle.max_p2() > 0.1);
    assert!(dev <= 0.01, "max deviation {dev}");
}

#[test]
fn population_formula_matches_amplitude() {
    let (q, d) = fig3(1.5);
    let grid = linspace(0.0, 42.0, 85);
    for schedule in [MagnusSchedule::Global, MagnusSchedule::default()] {
        let opts = MagnusOptions { schedule, ..MagnusOptions::default() };
        let ts = propagate_magnus(&q, &d, &grid, &opts, QubitState::GROUND, &QuadratureSpec::default()).unwrap();
        for (g, &p) in ts.rotation.as_ref().unwrap().iter().zip(&ts.p2) {
            let formula = (1.0 - g.rho_z().powi(2)) * g.magnitude().sin().powi(2);
            assert!((formula - p).abs() < 1e-12);
        }
    }
}

#[test]
fn refinement_is_stable_under_tighter_tolerance() {
    let (q, d) = fig3(1.1);
    let grid = linspace(0.0, 42.0, 43);
    let spec = QuadratureSpec::default();
    let a = propagate_magnus(&q, &d, &grid, &MagnusOptions::default(), QubitState::GROUND, &spec).unwrap();
    let b = propagate_magnus(&q, &d, &grid, &MagnusOptions::default(), QubitState::GROUND, &spec.scaled(0.5))
        .unwrap();
    let dev = a.p2.iter().zip(&b.p2).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(dev < 1e-9);
}

#[test]
fn rejects_bad_inputs() {
    let (q, d) = fig3(0.5);
    let spec = QuadratureSpec::default();
    let opts = MagnusOptions::default();
    assert!(propagate_magnus(&q, &d, &[2.0, 1.0], &opts, QubitState::GROUND, &spec).is_err());
    assert!(propagate_magnus(&q, &d, &[-1.0], &opts, QubitState::GROUND, &spec).is_err());
    let bad_state = QubitState::new(c(1.0, 0.0), c(1.0, 0.0));
    assert!(propagate_magnus(&q, &d, &[1.0], &opts, bad_state, &spec).is_err());
    let bad_order = MagnusOptions { order: 4, ..opts };
    assert!(propagate_magnus(&q, &d, &[1.0], &bad_order, QubitState::GROUND, &spec).is_err());
    assert!(g_vector(&q, &d, 1.0, 3, CouplingModel::Exact, &spec).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn propagator_is_unitary(gx in -10.0f64..10.0, gy in -10.0f64..10.0, gz in -10.0f64..10.0) {
        let s = GVector::new(gx, gy, gz).propagator();
        // S S† = I
        let e00 = s[0] * s[0].conj() + s[1] * s[1].conj();
        let e01 = s[0] * s[2].conj() + s[1] * s[3].conj();
        let e11 = s[2] * s[2].conj() + s[3] * s[3].conj();
        prop_assert!((e00 - c(1.0, 0.0)).norm() < 1e-12);
        prop_assert!(e01.norm() < 1e-12);
        prop_assert!((e11 - c(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn magnus_preserves_normalization(
        delta in 0.0f64..0.6, a0 in 0.0f64..0.6, width in 1.0f64..6.0, omega in 0.3f64..2.0,
        phase in -3.0f64..3.0, order in 1u8..=3, theta in 0.0f64..PI,
    ) {
        let q = QubitConfig::new(1.0, delta);
        let d = DriveField::new(omega, vec![PulseEnvelope::gaussian(a0, 6.0 * width, width, phase)]).unwrap();
        let initial = QubitState::new(c(theta.cos(), 0.0), Complex64::from_polar(theta.sin(), 0.3));
        let grid = linspace(0.0, 12.0 * width, 40);
        let opts = MagnusOptions { order, ..MagnusOptions::default() };
        let ts = propagate_magnus(&q, &d, &grid, &opts, initial, &QuadratureSpec::default()).unwrap();
        prop_assert!(ts.max_norm_drift() < 1e-10);
        for (s, p) in ts.states.iter().zip(&ts.p2) {
            prop_assert!((s.p2() - p).abs() < 1e-12);
        }
    }
}
