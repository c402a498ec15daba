#![allow(dead_code)]

use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;
use kicked_qubit::Mat2;
use nalgebra::Matrix2;
use num_complex::Complex64 as C;

pub type M = Matrix2<C>;

pub fn na(m: &Mat2) -> M {
    M::new(m.m11, m.m12, m.m21, m.m22)
}

pub fn sx() -> M {
    M::new(C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 0.0))
}

pub fn sy() -> M {
    M::new(C::new(0.0, 0.0), C::new(0.0, -1.0), C::new(0.0, 1.0), C::new(0.0, 0.0))
}

pub fn sz() -> M {
    M::new(C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(-1.0, 0.0))
}

/// `exp(−i h t)` by nalgebra's matrix exponential.
pub fn evolve(h: &M, t: f64) -> M {
    (h * C::new(0.0, -t)).exp()
}

/// Hamiltonian `−γσz + vσx`.
pub fn ham(gamma: f64, v: f64) -> M {
    sz() * C::from(-gamma) + sx() * C::from(v)
}

pub fn free(gamma: f64, t: f64) -> M {
    evolve(&ham(gamma, 0.0), t)
}

pub fn kick(alpha: f64) -> M {
    (sx() * C::new(0.0, -alpha)).exp()
}

pub fn max_diff(a: &M, b: &Mat2) -> f64 {
    (a - na(b)).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_diff_na(a: &M, b: &M) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Composite Gauss–Legendre rule: `panels` equal panels of 24 nodes.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let rule = GaussLegendre::new(NonZeroUsize::new(24).unwrap());
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let lo = a + h * k as f64;
            rule.integrate(lo, lo + h, &f)
        })
        .sum()
}

pub fn gauss_v(alpha: f64, tau: f64, center: f64, t: f64) -> f64 {
    let u = (t - center) / tau;
    alpha / (std::f64::consts::PI.sqrt() * tau) * (-u * u).exp()
}
