// SPDX-License-Identifier: Apache-2.0

//! Magnus evolution on Gauss-Legendre panels.
//!
//! Every Furry-picture operator here is traceless 2×2, so it is carried as the
//! real 3-vector of its Pauli coefficients. With `[a·σ, b·σ] = 2i (a×b)·σ` the
//! nested commutator integrals reduce to running integrals of cross products:
//!
//! * `K(t) = ∫ h` (first order),
//! * `m(t) = ∫ h × K` (second order, `Ω₂ = -i m·σ`),
//! * `(2/3) ∫ [h × m + P h - ½|K|² h]` with `P(t) = ∫ h Kᵀ` (third order).
//!
//! All running integrals restart at each segment start.

use num_complex::Complex64;

use crate::numerics::{GaussRule, NumericsError, PanelGrid};

pub(crate) type V3 = [f64; 3];

pub(crate) const RULE_ORDER: usize = 12;

pub(crate) fn cross(a: V3, b: V3) -> V3 {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

pub(crate) fn dot(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn axpy(acc: &mut V3, s: f64, x: V3) {
    for k in 0..3 {
        acc[k] += s * x[k];
    }
}

/// `S = a0·I - i a·σ` with `a0² + |a|² = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Su2 {
    pub a0: f64,
    pub a: V3,
}

impl Su2 {
    pub const IDENTITY: Su2 = Su2 { a0: 1.0, a: [0.0; 3] };

    /// `exp(-i G·σ)`.
    pub fn from_rotation(g: V3) -> Self {
        let mag = dot(g, g).sqrt();
        if mag == 0.0 {
            return Self::IDENTITY;
        }
        let s = mag.sin() / mag;
        Su2 {
            a0: mag.cos(),
            a: [s * g[0], s * g[1], s * g[2]],
        }
    }

    /// `self · rhs`.
    pub fn then_after(&self, rhs: &Su2) -> Su2 {
        let c = cross(self.a, rhs.a);
        Su2 {
            a0: self.a0 * rhs.a0 - dot(self.a, rhs.a),
            a: [
                self.a0 * rhs.a[0] + rhs.a0 * self.a[0] + c[0],
                self.a0 * rhs.a[1] + rhs.a0 * self.a[1] + c[1],
                self.a0 * rhs.a[2] + rhs.a0 * self.a[2] + c[2],
            ],
        }
    }

    /// The rotation vector `G` with `|G| ∈ [0, π]` and `exp(-i G·σ) = self`.
    pub fn rotation(&self) -> V3 {
        let s = dot(self.a, self.a).sqrt();
        if s == 0.0 {
            return [0.0; 3];
        }
        let g = s.atan2(self.a0);
        [g * self.a[0] / s, g * self.a[1] / s, g * self.a[2] / s]
    }

    /// Row-major entries.
    pub fn matrix(&self) -> [Complex64; 4] {
        let [x, y, z] = self.a;
        [
            Complex64::new(self.a0, -z),
            Complex64::new(-y, -x),
            Complex64::new(y, -x),
            Complex64::new(self.a0, z),
        ]
    }

    pub fn max_abs_diff(&self, other: &Su2) -> f64 {
        let mut d = (self.a0 - other.a0).abs();
        for k in 0..3 {
            d = d.max((self.a[k] - other.a[k]).abs());
        }
        d
    }
}

/// Magnus terms of one segment, accumulated from the segment start.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct Terms {
    pub first: V3,
    pub second: V3,
    pub third: V3,
}

impl Terms {
    pub fn total(&self, order: u8) -> V3 {
        let mut g = self.first;
        if order >= 2 {
            axpy(&mut g, 1.0, self.second);
        }
        if order >= 3 {
            axpy(&mut g, 1.0, self.third);
        }
        g
    }
}

/// Output of the engine at one requested edge.
#[derive(Debug, Clone, Copy)]
pub(crate) struct EdgeSample {
    /// Full propagator from `t = 0`.
    pub propagator: Su2,
    /// Terms of the segment that contains this edge.
    pub terms: Terms,
}

#[derive(Debug, Clone, Copy, Default)]
struct Running {
    k: V3,
    m: V3,
    p: [V3; 3],
    third: V3,
}

/// Runs the Magnus recursion over `grid`.
///
/// `coupling[n]` is the Pauli vector of `h` at node `n`. Segments restart at
/// every edge index in `segment_starts` (ascending, excluding 0); samples are
/// produced for every edge index in `outputs` (ascending).
pub(crate) fn run(
    grid: &PanelGrid,
    coupling: &[V3],
    order: u8,
    segment_starts: &[usize],
    outputs: &[usize],
) -> Vec<EdgeSample> {
    let rule: &GaussRule = grid.rule();
    let m = rule.order();
    let mut out = Vec::with_capacity(outputs.len());
    let mut out_iter = outputs.iter().peekable();
    let mut seg_iter = segment_starts.iter().peekable();

    let mut composed = Su2::IDENTITY;
    let mut run = Running::default();

    let mut k_nodes = vec![[0.0; 3]; m];
    let mut m_nodes = vec![[0.0; 3]; m];
    let mut f = vec![[0.0; 3]; m];

    let emit = |run: &Running, composed: &Su2| {
        let terms = Terms {
            first: run.k,
            second: run.m,
            third: run.third,
        };
        EdgeSample {
            propagator: Su2::from_rotation(terms.total(order)).then_after(composed),
            terms,
        }
    };

    for edge in 0..=grid.panel_count() {
        if edge > 0 {
            let p = edge - 1;
            let half = grid.panel_half_width(p);
            let h = &coupling[p * m..(p + 1) * m];
            panel_step(rule, half, h, order, &mut run, &mut k_nodes, &mut m_nodes, &mut f);
        }
        while out_iter.peek().is_some_and(|&&o| o == edge) {
            out_iter.next();
            out.push(emit(&run, &composed));
        }
        if seg_iter.peek().is_some_and(|&&s| s == edge) {
            seg_iter.next();
            composed = emit(&run, &composed).propagator;
            run = Running::default();
        }
    }
    debug_assert_eq!(out.len(), outputs.len());
    out
}

#[allow(clippy::too_many_arguments)]
fn panel_step(
    rule: &GaussRule,
    half: f64,
    h: &[V3],
    order: u8,
    run: &mut Running,
    k_nodes: &mut [V3],
    m_nodes: &mut [V3],
    f: &mut [V3],
) {
    let m = rule.order();
    let w = rule.weights();

    // K at nodes and at the panel end.
    for i in 0..m {
        let row = rule.cumulative_row(i);
        let mut acc = run.k;
        for j in 0..m {
            axpy(&mut acc, half * row[j], h[j]);
        }
        k_nodes[i] = acc;
    }
    for j in 0..m {
        axpy(&mut run.k, half * w[j], h[j]);
    }
    if order < 2 {
        return;
    }

    for j in 0..m {
        f[j] = cross(h[j], k_nodes[j]);
    }
    let m_start = run.m;
    for i in 0..m {
        let row = rule.cumulative_row(i);
        let mut acc = m_start;
        for j in 0..m {
            axpy(&mut acc, half * row[j], f[j]);
        }
        m_nodes[i] = acc;
    }
    for j in 0..m {
        axpy(&mut run.m, half * w[j], f[j]);
    }
    if order < 3 {
        return;
    }

    // P at each node applied to the local h, then the third-order integrand.
    for i in 0..m {
        let row = rule.cumulative_row(i);
        // P_i h_i = P_start h_i + half Σ_l row[l] h_l (K_l · h_i)
        let mut ph = [0.0; 3];
        for r in 0..3 {
            ph[r] = dot(run.p[r], h[i]);
        }
        for l in 0..m {
            axpy(&mut ph, half * row[l] * dot(k_nodes[l], h[i]), h[l]);
        }
        let mut integrand = cross(h[i], m_nodes[i]);
        axpy(&mut integrand, 1.0, ph);
        axpy(&mut integrand, -0.5 * dot(k_nodes[i], k_nodes[i]), h[i]);
        axpy(&mut run.third, (2.0 / 3.0) * half * w[i], integrand);
    }
    for l in 0..m {
        for r in 0..3 {
            axpy(&mut run.p[r], half * w[l] * h[l][r], k_nodes[l]);
        }
    }
}

/// Edge index of every time in `times`, which must all be edges of `grid`.
pub(crate) fn edge_indices(grid: &PanelGrid, times: &[f64]) -> Result<Vec<usize>, NumericsError> {
    times
        .iter()
        .map(|&t| {
            grid.edges()
                .binary_search_by(|e| e.total_cmp(&t))
                .map_err(|_| NumericsError::Domain("output time is not a panel edge"))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn su2_product_matches_matrix_product() {
        let a = Su2::from_rotation([0.3, -1.1, 0.4]);
        let b = Su2::from_rotation([-0.7, 0.2, 2.5]);
        let ab = a.then_after(&b);
        let (ma, mb, mab) = (a.matrix(), b.matrix(), ab.matrix());
        for r in 0..2 {
            for c in 0..2 {
                let v = ma[2 * r] * mb[c] + ma[2 * r + 1] * mb[2 + c];
                assert!((v - mab[2 * r + c]).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn rotation_round_trip() {
        let g = [0.4, 0.9, -1.2];
        let back = Su2::from_rotation(g).rotation();
        for k in 0..3 {
            assert!((back[k] - g[k]).abs() < 1e-14);
        }
    }
}
