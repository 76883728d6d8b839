// SPDX-License-Identifier: Apache-2.0

//! Bessel functions of the first kind for integer order.
//!
//! Small arguments are summed from the ascending power series. Everything else
//! goes through Miller's downward recurrence, normalized with
//! `J0 + 2 Σ J_2k = 1`. Downward recurrence is stable for every order once it
//! starts well above the argument, so one routine covers `n < x` and `n > x`.

use super::NumericsError;

/// Below this argument the power series loses at most a couple of bits.
const SERIES_LIMIT: f64 = 2.0;

/// `J_n(x)` for any integer order, using `J_{-n} = (-1)^n J_n` and
/// `J_n(-x) = (-1)^n J_n(x)`.
pub fn bessel_j(n: i32, x: f64) -> Result<f64, NumericsError> {
    if !x.is_finite() {
        return Err(NumericsError::Domain("bessel_j argument must be finite"));
    }
    let order = n.unsigned_abs();
    let mut sign = if n < 0 && order % 2 == 1 { -1.0 } else { 1.0 };
    if x < 0.0 && order % 2 == 1 {
        sign = -sign;
    }
    Ok(sign * bessel_j_nonneg(order, x.abs()))
}

fn bessel_j_nonneg(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x < SERIES_LIMIT {
        return ascending_series(n, x);
    }
    miller(n, x)
}

fn ascending_series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    // (x/2)^n / n!
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / k as f64;
    }
    let q = -half * half;
    let mut sum = term;
    let mut k = 0u32;
    loop {
        k += 1;
        term *= q / (k as f64 * (n + k) as f64);
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() || k > 200 {
            break;
        }
    }
    sum
}

fn miller(n: u32, x: f64) -> f64 {
    // Start comfortably above both the order and the argument; the seed error
    // decays like (x / 2m)^m over the descent.
    let top = n.max(x as u32) + 40 + (x.sqrt() * 6.0) as u32;
    let start = top + (top % 2);

    let mut j_next = 0.0; // J_{k+1}
    let mut j_curr = 1e-300; // J_k, arbitrary seed
    let mut norm = 0.0;
    let mut wanted = 0.0;
    let two_over_x = 2.0 / x;

    for k in (1..=start).rev() {
        let j_prev = k as f64 * two_over_x * j_curr - j_next; // J_{k-1}
        j_next = j_curr;
        j_curr = j_prev;
        if j_curr.abs() > 1e250 {
            j_curr *= 1e-250;
            j_next *= 1e-250;
            norm *= 1e-250;
            wanted *= 1e-250;
        }
        let order = k - 1;
        if order == n {
            wanted = j_curr;
        }
        if order > 0 && order % 2 == 0 {
            norm += 2.0 * j_curr;
        }
    }
    norm += j_curr; // J_0
    wanted / norm
}
