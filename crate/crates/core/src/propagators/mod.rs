//! Closed-form time-evolution matrices.
//!
//! Sign conventions: `H = −γσz + Vσx` (ħ = 1), so free evolution is
//! `e^{iγtσz}` and a kick of strength α is `e^{−iασx}`. Interaction-picture
//! matrices are `e^{iH₀t} U(t)` with `H₀ = −γσz`.

mod adiabatic;
mod corrections;
mod floquet;

pub use adiabatic::{adiabatic_propagator, AdiabaticEvolution, AdiabaticPhase};
pub use corrections::{
    g_gaussian, g_rectangular, kick_correction_expansion, kick_correction_leading, leading_to_commutator,
    shape_factor,
};
pub use floquet::{floquet_eigenphases, floquet_period_matrix, FloquetResult};

use crate::error::{Error, Result};
use crate::pulse::{DoubleKickParams, PulseSequence, PulseShape, SystemParams};
use crate::su2::{exp_i_pauli, sinc, Complex, Mat2};

fn phase(theta: f64) -> Complex {
    Complex::from_polar(1.0, theta)
}

/// Free evolution over a duration with phase `γt`: `diag(e^{iγt}, e^{−iγt})`.
pub fn free_evolution(gamma_t: f64) -> Mat2 {
    Mat2::diag(phase(gamma_t), phase(-gamma_t))
}

/// `U(t)` with V ≡ 0.
pub fn free_propagator(params: &SystemParams, t: f64) -> Mat2 {
    free_evolution(params.gamma * t)
}

/// `e^{−iH₀t}†`: maps Schrödinger-picture propagators into the interaction
/// picture when multiplied from the left.
pub fn to_interaction_picture(gamma: f64, t: f64, u: &Mat2) -> Mat2 {
    free_evolution(-gamma * t) * *u
}

/// Degenerate qubit (ΔE = 0): `e^{−iασx}`.
pub fn degenerate_propagator(alpha: f64) -> Mat2 {
    let (s, c) = alpha.sin_cos();
    Mat2::new(c.into(), Complex::new(0.0, -s), Complex::new(0.0, -s), c.into())
}

/// Schrödinger-picture evolution without time ordering,
/// `e^{iγtσz − iασx}`, with `alpha_running = ∫₀ᵗ V dt'`.
pub fn no_to_schrodinger(alpha_running: f64, gamma_t: f64) -> Mat2 {
    exp_i_pauli([-alpha_running, 0.0, gamma_t])
}

/// Interaction-picture evolution without time ordering after one complete
/// gaussian pulse (β = 0 gives the ideal kick).
pub fn no_to_interaction_single(alpha: f64, beta: f64, gamma_tk: f64) -> Mat2 {
    let theta = alpha * (-beta * beta).exp();
    let (s, c) = theta.sin_cos();
    let off = Complex::new(0.0, -s);
    Mat2::new(c.into(), off * phase(-2.0 * gamma_tk), off * phase(2.0 * gamma_tk), c.into())
}

/// Interaction-picture evolution without time ordering after a
/// pulse–antipulse pair.
pub fn no_to_interaction_double(alpha: f64, beta: f64, gamma: f64, dk: &DoubleKickParams) -> Mat2 {
    let r = 2.0 * alpha * (-beta * beta).exp() * (gamma * dk.ts()).sin();
    let (s, c) = r.sin_cos();
    let w = 2.0 * gamma * dk.tbar();
    Mat2::new(c.into(), phase(-w) * s, -phase(w) * s, c.into())
}

/// Exact propagator for an ideal kick of strength α at `tk`, for `t > tk`.
pub fn kicked_propagator(alpha: f64, gamma: f64, tk: f64, t: f64) -> Result<Mat2> {
    if !(t > tk) {
        return Err(Error::Domain(format!("kicked propagator needs t > T_k ({t} <= {tk})")));
    }
    let (s, c) = alpha.sin_cos();
    let w = gamma * (t - 2.0 * tk);
    Ok(Mat2::new(
        phase(gamma * t) * c,
        Complex::new(0.0, -s) * phase(w),
        Complex::new(0.0, -s) * phase(-w),
        phase(-gamma * t) * c,
    ))
}

/// Exact propagator for `+α` at `T₁` and `−α` at `T₂`, for `t > T₂`.
pub fn kick_antikick_propagator(alpha: f64, gamma: f64, dk: &DoubleKickParams, t: f64) -> Result<Mat2> {
    if !(t > dk.t2) {
        return Err(Error::Domain(format!("kick–antikick propagator needs t > T_2 ({t} <= {})", dk.t2)));
    }
    let (ss, cs) = (gamma * dk.ts()).sin_cos();
    let (s2a, c2a) = (2.0 * alpha).sin_cos();
    let zeta = dk.zeta(gamma, t);
    let w = gamma * (t - 2.0 * dk.tbar());
    Ok(Mat2::new(
        phase(zeta) * Complex::new(cs, ss * c2a),
        phase(w) * (ss * s2a),
        -phase(-w) * (ss * s2a),
        phase(-zeta) * Complex::new(cs, -ss * c2a),
    ))
}

/// Exact propagator for a rectangular pulse of width τ = β/γ centred at
/// `tk`, evaluated after the pulse has ended.
pub fn rectangular_exact(alpha: f64, beta: f64, gamma: f64, tk: f64, t: f64) -> Mat2 {
    let ap = alpha.hypot(beta);
    let sa = sinc(ap);
    let ca = ap.cos();
    let w = gamma * (t - 2.0 * tk);
    let d = gamma * t - beta;
    Mat2::new(
        phase(d) * Complex::new(ca, beta * sa),
        Complex::new(0.0, -alpha * sa) * phase(w),
        Complex::new(0.0, -alpha * sa) * phase(-w),
        phase(-d) * Complex::new(ca, -beta * sa),
    )
}

/// Product of free evolutions and exact kick factors for a sequence made
/// only of ideal kicks, from `t0` to `t`.
pub fn kick_train_propagator(seq: &PulseSequence, params: &SystemParams, t0: f64, t: f64) -> Result<Mat2> {
    if seq.pulses.iter().any(|p| p.shape != PulseShape::IdealKick) {
        return Err(Error::InvalidInput("kick train propagator accepts ideal kicks only".into()));
    }
    if t < t0 {
        return Err(Error::InvalidInput(format!("need t >= t0 ({t} < {t0})")));
    }
    let mut kicks: Vec<_> = seq.kicks().filter(|k| k.center >= t0 && k.center <= t).collect();
    kicks.sort_by(|a, b| a.center.total_cmp(&b.center));
    let mut u = Mat2::identity();
    let mut now = t0;
    for k in kicks {
        u = degenerate_propagator(k.alpha) * free_propagator(params, k.center - now) * u;
        now = k.center;
    }
    Ok(free_propagator(params, t - now) * u)
}
