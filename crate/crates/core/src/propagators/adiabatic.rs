use crate::error::{Error, Result};
use crate::pulse::{PulseSequence, PulseShape, SystemParams};
use crate::quad;
use crate::su2::{Complex, Mat2};

const VALIDITY_SAMPLES: usize = 4000;

/// Phase bookkeeping for the adiabatic propagator at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticPhase {
    /// Ω(t) = √(ΔE² + 4V²(t)).
    pub omega: f64,
    /// θ = ∫₀ᵗ Ω dt′/2.
    pub theta: f64,
    pub phi_t: f64,
    pub phi_0: f64,
    pub phi_plus: f64,
    pub phi_minus: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdiabaticEvolution {
    pub propagator: Mat2,
    pub phase: AdiabaticPhase,
    /// max over sampled t′ of `|V̇| ΔE / Ω³`; the approximation needs ≪ 1.
    pub validity_ratio: f64,
}

fn mixing_angle(v: f64, de: f64) -> f64 {
    (2.0 * v).atan2(de)
}

/// Adiabatic-following propagator from 0 to `t` built from the
/// instantaneous splitting Ω(t) and mixing angle φ(t) = tan⁻¹(2V/ΔE).
pub fn adiabatic_propagator(
    seq: &PulseSequence,
    params: &SystemParams,
    t: f64,
) -> Result<AdiabaticEvolution> {
    seq.validate()?;
    if seq.has_ideal_kicks() {
        return Err(Error::UnsupportedEvaluation("adiabatic propagator needs a smooth coupling".into()));
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("need t >= 0, got {t}")));
    }
    let gamma = params.gamma;
    let de = params.delta_e();
    let half_omega = |s: f64| gamma.hypot(seq.smooth_v(s));

    let scale = gamma * t + seq.pulses.iter().map(|p| p.alpha.abs()).sum::<f64>();
    let theta = quad::adaptive(half_omega, 0.0, t, &seq.breakpoints(), 1e-10 * scale.max(1e-300));

    let v0 = seq.smooth_v(0.0);
    let vt = seq.smooth_v(t);
    let phi_0 = mixing_angle(v0, de);
    let phi_t = mixing_angle(vt, de);
    let phi_plus = 0.5 * (phi_t + phi_0);
    let phi_minus = 0.5 * (phi_t - phi_0);

    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi_plus.sin_cos();
    let (sm, cm) = phi_minus.sin_cos();
    let propagator = Mat2::new(
        Complex::new(ct * cm, st * cp),
        Complex::new(ct * sm, -st * sp),
        Complex::new(-ct * sm, -st * sp),
        Complex::new(ct * cm, -st * cp),
    );

    let phase = AdiabaticPhase { omega: 2.0 * half_omega(t), theta, phi_t, phi_0, phi_plus, phi_minus };
    Ok(AdiabaticEvolution { propagator, phase, validity_ratio: validity_ratio(seq, params, t) })
}

fn validity_ratio(seq: &PulseSequence, params: &SystemParams, t: f64) -> f64 {
    let de = params.delta_e();
    if de == 0.0 {
        return 0.0;
    }
    // a rectangular edge is a step in V
    let edge_inside = seq.pulses.iter().any(|p| {
        p.shape == PulseShape::Rectangular && {
            let (lo, hi) = p.support();
            (lo > 0.0 && lo < t) || (hi > 0.0 && hi < t)
        }
    });
    if edge_inside {
        return f64::INFINITY;
    }
    let ratio = |s: f64| {
        let v = seq.smooth_v(s);
        let omega = (de * de + 4.0 * v * v).sqrt();
        seq.smooth_dv(s).abs() * de / omega.powi(3)
    };
    let grid = (0..=VALIDITY_SAMPLES).map(|k| t * k as f64 / VALIDITY_SAMPLES as f64);
    // |V̇| peaks at T_k ± τ/√2 for a gaussian
    let peaks = seq.finite_pulses().flat_map(|p| {
        let d = p.tau * std::f64::consts::FRAC_1_SQRT_2;
        [p.center - d, p.center + d]
    });
    grid.chain(peaks.filter(|&s| s >= 0.0 && s <= t)).map(ratio).fold(0.0, f64::max)
}
