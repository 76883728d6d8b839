// SPDX-License-Identifier: Apache-2.0

//! One-dimensional quadrature: adaptive Simpson, composite Gauss-Legendre, and
//! cumulative (running) integrals on panel grids.

use serde::{Deserialize, Serialize};

use super::NumericsError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadratureMethod {
    AdaptiveSimpson,
    GaussLegendreComposite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub method: QuadratureMethod,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            method: QuadratureMethod::AdaptiveSimpson,
            abs_tol: 1e-10,
            rel_tol: 1e-9,
            max_subdivisions: 1 << 20,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), NumericsError> {
        if !(self.abs_tol > 0.0) {
            return Err(NumericsError::InvalidSpec("abs_tol must be positive"));
        }
        if !(self.rel_tol > 0.0) {
            return Err(NumericsError::InvalidSpec("rel_tol must be positive"));
        }
        if self.max_subdivisions < 1 {
            return Err(NumericsError::InvalidSpec("max_subdivisions must be at least 1"));
        }
        Ok(())
    }

    /// Same spec with both tolerances multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            abs_tol: self.abs_tol * factor,
            rel_tol: self.rel_tol * factor,
            ..*self
        }
    }
}

/// Integrates `f` over `[a, b]` to `max(abs_tol, rel_tol·|result|)`.
pub fn integrate<F>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64, NumericsError>
where
    F: Fn(f64) -> f64,
{
    integrate_panels(f, a, b, 1, spec)
}

/// Like [`integrate`], but first splits `[a, b]` into at least `min_panels`
/// equal panels. Oscillatory integrands use this to guarantee a minimum
/// sampling density per period.
pub fn integrate_panels<F>(
    f: F,
    a: f64,
    b: f64,
    min_panels: usize,
    spec: &QuadratureSpec,
) -> Result<f64, NumericsError>
where
    F: Fn(f64) -> f64,
{
    spec.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(NumericsError::Domain("integration limits must be finite"));
    }
    if a > b {
        return Err(NumericsError::Domain("integration requires a <= b"));
    }
    if a == b {
        return Ok(0.0);
    }
    match spec.method {
        QuadratureMethod::AdaptiveSimpson => simpson_panels(&f, a, b, min_panels.max(1), spec),
        QuadratureMethod::GaussLegendreComposite => gauss_composite(&f, a, b, min_panels.max(1), spec),
    }
}

fn simpson_panels<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    panels: usize,
    spec: &QuadratureSpec,
) -> Result<f64, NumericsError> {
    // A coarse estimate fixes the relative part of the tolerance up front so
    // the budget can be split across panels by length.
    let coarse = gauss_fixed(f, a, b, panels.max(4), &GaussRule::new(10));
    let tol = spec.abs_tol.max(spec.rel_tol * coarse.abs());
    let width = (b - a) / panels as f64;
    let mut budget = Budget {
        used: 0,
        limit: spec.max_subdivisions,
    };
    let mut total = 0.0;
    let mut failed = false;
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let hi = if p + 1 == panels { b } else { lo + width };
        let (flo, fmid, fhi) = (f(lo), f(0.5 * (lo + hi)), f(hi));
        let whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
        let local_tol = tol * (hi - lo) / (b - a);
        let (value, ok) = simpson_step(f, lo, hi, flo, fmid, fhi, whole, local_tol, 60, &mut budget);
        total += value;
        failed |= !ok;
    }
    if failed {
        return Err(NumericsError::SubdivisionLimit { estimate: total });
    }
    Ok(total)
}

struct Budget {
    used: usize,
    limit: usize,
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    budget: &mut Budget,
) -> (f64, bool) {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return (left + right + delta / 15.0, true);
    }
    if depth == 0 || budget.used >= budget.limit {
        return (left + right + delta / 15.0, false);
    }
    budget.used += 1;
    let (lv, lok) = simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, budget);
    let (rv, rok) = simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, budget);
    (lv + rv, lok && rok)
}

fn gauss_composite<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    min_panels: usize,
    spec: &QuadratureSpec,
) -> Result<f64, NumericsError> {
    let rule = GaussRule::new(10);
    let mut panels = min_panels;
    let mut prev = gauss_fixed(f, a, b, panels, &rule);
    loop {
        if 2 * panels > spec.max_subdivisions.max(min_panels) {
            return Err(NumericsError::SubdivisionLimit { estimate: prev });
        }
        panels *= 2;
        let next = gauss_fixed(f, a, b, panels, &rule);
        if (next - prev).abs() <= spec.abs_tol.max(spec.rel_tol * next.abs()) {
            return Ok(next);
        }
        prev = next;
    }
}

fn gauss_fixed<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panels: usize, rule: &GaussRule) -> f64 {
    let width = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let lo = a + p as f64 * width;
            rule.integrate(f, lo, lo + width)
        })
        .sum()
}

/// Gauss-Legendre rule on `[-1, 1]` together with its spectral integration
/// matrix, which gives running integrals from the left endpoint to each node.
#[derive(Debug, Clone)]
pub struct GaussRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    /// `cumulative[i][j] = ∫_{-1}^{x_i} ℓ_j(s) ds` for the Lagrange basis `ℓ_j`.
    cumulative: Vec<Vec<f64>>,
}

impl GaussRule {
    pub fn new(order: usize) -> Self {
        assert!(order >= 2);
        let mut nodes = Vec::with_capacity(order);
        let mut weights = Vec::with_capacity(order);
        for i in 0..order {
            // Chebyshev-like initial guess, then Newton on P_n.
            let mut x = -(std::f64::consts::PI * (i as f64 + 0.75) / (order as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(order, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(order, x);
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * dp * dp));
        }

        let cumulative = nodes
            .iter()
            .map(|&xi| {
                let p_at_xi = legendre_all(order, xi);
                nodes
                    .iter()
                    .zip(&weights)
                    .map(|(&xj, &wj)| {
                        let p_at_xj = legendre_all(order, xj);
                        // ℓ_j(s) = w_j Σ_k (2k+1)/2 P_k(x_j) P_k(s), exact for k < order.
                        let mut acc = 0.5 * (xi + 1.0);
                        for k in 1..order {
                            let int_pk = (p_at_xi[k + 1] - p_at_xi[k - 1]) / (2 * k + 1) as f64;
                            acc += 0.5 * (2 * k + 1) as f64 * p_at_xj[k] * int_pk;
                        }
                        wj * acc
                    })
                    .collect()
            })
            .collect();

        Self {
            nodes,
            weights,
            cumulative,
        }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
    }

    /// Row `i` of the integration matrix.
    pub fn cumulative_row(&self, i: usize) -> &[f64] {
        &self.cumulative[i]
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// `P_0(x) ..= P_{n}(x)`.
fn legendre_all(n: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; n + 1];
    p[0] = 1.0;
    if n >= 1 {
        p[1] = x;
    }
    for k in 2..=n {
        p[k] = ((2 * k - 1) as f64 * x * p[k - 1] - (k - 1) as f64 * p[k - 2]) / k as f64;
    }
    p
}

/// A partition of `[t_start, t_end]` into Gauss-Legendre panels whose
/// boundaries include every requested breakpoint. Running integrals of sampled
/// values are spectrally accurate at every node and at every boundary.
#[derive(Debug, Clone)]
pub struct PanelGrid {
    rule: GaussRule,
    /// Panel boundaries, ascending; panel `p` spans `edges[p]..edges[p+1]`.
    edges: Vec<f64>,
    nodes: Vec<f64>,
}

impl PanelGrid {
    /// Builds panels no wider than `max_width` with each breakpoint on an edge.
    /// Breakpoints must be ascending and at least `t_start`.
    pub fn new(t_start: f64, breakpoints: &[f64], max_width: f64, order: usize) -> Self {
        assert!(max_width > 0.0);
        let rule = GaussRule::new(order);
        let mut edges = vec![t_start];
        for &bp in breakpoints {
            let last = *edges.last().unwrap();
            debug_assert!(bp >= last, "breakpoints must be ascending");
            if bp <= last {
                continue;
            }
            let pieces = ((bp - last) / max_width).ceil().max(1.0) as usize;
            let width = (bp - last) / pieces as f64;
            for k in 1..pieces {
                edges.push(last + k as f64 * width);
            }
            edges.push(bp);
        }
        let mut nodes = Vec::with_capacity((edges.len() - 1) * order);
        for w in edges.windows(2) {
            let (half, mid) = (0.5 * (w[1] - w[0]), 0.5 * (w[1] + w[0]));
            nodes.extend(rule.nodes().iter().map(|x| mid + half * x));
        }
        Self { rule, edges, nodes }
    }

    pub fn order(&self) -> usize {
        self.rule.order()
    }

    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn panel_count(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn panel_half_width(&self, p: usize) -> f64 {
        0.5 * (self.edges[p + 1] - self.edges[p])
    }

    pub fn rule(&self) -> &GaussRule {
        &self.rule
    }

    /// Running integral of node samples. Returns the values at every node and
    /// at every panel edge (the first edge is zero).
    pub fn cumulative<T>(&self, samples: &[T]) -> (Vec<T>, Vec<T>)
    where
        T: Copy + Default + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
    {
        assert_eq!(samples.len(), self.nodes.len());
        let m = self.order();
        let mut at_nodes = Vec::with_capacity(samples.len());
        let mut at_edges = Vec::with_capacity(self.edges.len());
        let mut running = T::default();
        at_edges.push(running);
        for p in 0..self.panel_count() {
            let half = self.panel_half_width(p);
            let s = &samples[p * m..(p + 1) * m];
            for i in 0..m {
                let row = self.rule.cumulative_row(i);
                let mut acc = T::default();
                for j in 0..m {
                    acc = acc + s[j] * row[j];
                }
                at_nodes.push(running + acc * half);
            }
            let mut total = T::default();
            for j in 0..m {
                total = total + s[j] * self.rule.weights()[j];
            }
            running = running + total * half;
            at_edges.push(running);
        }
        (at_nodes, at_edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    /// erf via its Maclaurin series, summed in long form. Used as an
    /// independent oracle for Gaussian integrals.
    fn erf_series(x: f64) -> f64 {
        let mut sum = 0.0f64;
        let mut term = x;
        let mut n = 0;
        while term.abs() > 1e-18 * sum.abs().max(1e-300) || n < 5 {
            sum += term / (2 * n + 1) as f64;
            n += 1;
            term *= -x * x / n as f64;
            if n > 400 {
                break;
            }
        }
        2.0 / PI.sqrt() * sum
    }

    #[test]
    fn sine_closed_form() {
        for method in [QuadratureMethod::AdaptiveSimpson, QuadratureMethod::GaussLegendreComposite] {
            let s = QuadratureSpec { method, ..spec() };
            let v = integrate(f64::sin, 0.0, 1.0, &s).unwrap();
            assert!((v - (1.0 - 1f64.cos())).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_integrand() {
        assert_eq!(integrate(|_| 0.0, 0.0, 10.0, &spec()).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_against_erf_oracle() {
        // erfc(6) < 2.2e-17, so the full-line value is exact to double precision.
        let oracle = PI.sqrt();
        let v = integrate(|x| (-x * x).exp(), -6.0, 6.0, &spec()).unwrap();
        assert!((v - oracle).abs() <= 1e-10f64.max(1e-9 * oracle));
        let v = integrate(|x| (-x * x).exp(), 0.0, 1.3, &spec()).unwrap();
        assert!((v - 0.5 * PI.sqrt() * erf_series(1.3)).abs() < 1e-10);
    }

    #[test]
    fn subdivision_limit_reports_partial_estimate() {
        let s = QuadratureSpec {
            max_subdivisions: 3,
            abs_tol: 1e-14,
            rel_tol: 1e-14,
            ..spec()
        };
        match integrate(|x| (40.0 * x).sin() * x.exp(), 0.0, 10.0, &s) {
            Err(NumericsError::SubdivisionLimit { estimate }) => assert!(estimate.is_finite()),
            other => panic!("expected subdivision failure, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(integrate(|x| x, 1.0, 0.0, &spec()).is_err());
        let bad = QuadratureSpec { abs_tol: 0.0, ..spec() };
        assert!(integrate(|x| x, 0.0, 1.0, &bad).is_err());
    }

    #[test]
    fn halving_tolerance_is_stable() {
        let f = |t: f64| (-(t - 5.0f64).powi(2) / 4.0).exp() * (3.0 * t).cos();
        let coarse = integrate(f, 0.0, 10.0, &spec()).unwrap();
        let fine = integrate(f, 0.0, 10.0, &spec().scaled(0.5)).unwrap();
        assert!((coarse - fine).abs() < spec().abs_tol.max(spec().rel_tol * coarse.abs()));
    }

    #[test]
    fn gauss_rule_integration_matrix() {
        let rule = GaussRule::new(8);
        // Exact for polynomials of degree < 8: ∫_{-1}^{x} s^5 ds = (x^6 - 1)/6.
        for i in 0..8 {
            let xi = rule.nodes()[i];
            let v: f64 = rule
                .cumulative_row(i)
                .iter()
                .zip(rule.nodes())
                .map(|(r, x)| r * x.powi(5))
                .sum();
            assert!((v - (xi.powi(6) - 1.0) / 6.0).abs() < 1e-14);
        }
        let total: f64 = rule.weights().iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn panel_grid_running_integral_of_cosine() {
        let bps = [0.37, 1.0, 2.5, 7.0];
        let grid = PanelGrid::new(0.0, &bps, 0.3, 8);
        for bp in bps {
            assert!(grid.edges().iter().any(|&e| e == bp));
        }
        let samples: Vec<f64> = grid.nodes().iter().map(|t| (3.0 * t).cos()).collect();
        let (at_nodes, at_edges) = grid.cumulative(&samples);
        // Interior nodes carry the degree-7 interpolation error; edges get full Gauss accuracy.
        for (t, v) in grid.nodes().iter().zip(&at_nodes) {
            assert!((v - (3.0 * t).sin() / 3.0).abs() < 1e-8);
        }
        for (t, v) in grid.edges().iter().zip(&at_edges) {
            assert!((v - (3.0 * t).sin() / 3.0).abs() < 1e-13);
        }
    }
}
