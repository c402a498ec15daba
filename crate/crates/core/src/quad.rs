//! One-dimensional quadrature.
//!
//! Two independent routes are kept on purpose: [`romberg`] (trapezoid rule
//! refined by Richardson extrapolation) backs the numerical no-time-ordering
//! evolutions, while [`adaptive`] (double-exponential, split at caller-given
//! breakpoints) backs the closed-form correction integrals.

use crate::error::{Error, Result};

const ROMBERG_MAX_LEVEL: usize = 22;
const ROMBERG_MIN_LEVEL: usize = 4;

/// Romberg integration of `f` over `[a, b]` to absolute tolerance `tol`.
pub fn romberg<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput(format!("non-finite quadrature bounds [{a}, {b}]")));
    }
    let h0 = b - a;
    let mut prev: Vec<f64> = vec![0.5 * h0 * (f(a) + f(b))];
    for level in 1..=ROMBERG_MAX_LEVEL {
        let n_new = 1usize << (level - 1);
        let h = h0 / (1usize << level) as f64;
        let mid: f64 = (0..n_new).map(|k| f(a + (2 * k + 1) as f64 * h)).sum();
        let mut row = Vec::with_capacity(level + 1);
        row.push(0.5 * prev[0] + h * mid);
        let mut factor = 1.0;
        for j in 1..=level {
            factor *= 4.0;
            let r = row[j - 1] + (row[j - 1] - prev[j - 1]) / (factor - 1.0);
            row.push(r);
        }
        let diff = (row[level] - prev[level - 1]).abs();
        if level >= ROMBERG_MIN_LEVEL && diff <= tol {
            return Ok(row[level]);
        }
        prev = row;
    }
    Err(Error::Numerical(format!("Romberg quadrature on [{a}, {b}] did not reach tolerance {tol:e}")))
}

/// Double-exponential quadrature over `[a, b]`, split at every breakpoint
/// that falls strictly inside the interval.
pub fn adaptive<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breakpoints: &[f64], tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> =
        breakpoints.iter().copied().filter(|&x| x > lo && x < hi && x.is_finite()).collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let pieces = (cuts.len() - 1) as f64;
    let total: f64 = cuts
        .windows(2)
        .map(|w| {
            let whole = de(&f, w[0], w[1], tol / pieces);
            bisect(&f, w[0], w[1], whole, tol / pieces, BISECT_DEPTH)
        })
        .sum();
    sign * total
}

const BISECT_DEPTH: u32 = 10;

fn de<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    quadrature::double_exponential::integrate(f, a, b, tol).integral
}

// The double-exponential error estimate can be optimistic on smooth but
// slowly varying integrands, so each piece is accepted only once its halves
// agree with it.
fn bisect<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let left = de(f, a, m, 0.5 * tol);
    let right = de(f, m, b, 0.5 * tol);
    let split = left + right;
    let floor = 4.0 * f64::EPSILON * (left.abs() + right.abs());
    if depth == 0 || (split - whole).abs() <= tol.max(floor) {
        return split;
    }
    bisect(f, a, m, left, 0.5 * tol, depth - 1) + bisect(f, m, b, right, 0.5 * tol, depth - 1)
}
