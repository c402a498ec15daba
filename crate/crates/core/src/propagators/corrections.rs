//! Finite-width corrections to the kicked propagator and the leading
//! time-ordering commutator term.

use crate::error::{Error, Result};
use crate::pulse::{Pulse, PulseShape, SystemParams};
use crate::quad;
use crate::su2::{Complex, Mat2};

const SHAPE_QUAD_TOL: f64 = 1e-14;

/// Far-tail cutoff, in widths, for integrals over gaussian tails.
const TAIL_SIGMA: f64 = 40.0;

/// `sin α/α − cos α`, the rectangular-pulse shape factor.
pub fn g_rectangular(alpha: f64) -> f64 {
    if alpha.abs() < 0.05 {
        let a2 = alpha * alpha;
        a2 * (1.0 / 3.0 + a2 * (-1.0 / 30.0 + a2 * (1.0 / 840.0 - a2 / 45360.0)))
    } else {
        alpha.sin() / alpha - alpha.cos()
    }
}

/// Gaussian shape factor `(2/τ) ∫ [cos²(∫_{T_k}^t V) − cos²(α/2)] dt`.
///
/// With `u = (t − T_k)/τ` the running integral is `(α/2) erf u`; the
/// difference of squares is written as `sin(α/2 (1 + erf u)) sin(α/2 erfc u)`
/// and the even integrand folded onto `u ≥ 0`.
pub fn g_gaussian(alpha: f64) -> f64 {
    let h = 0.5 * alpha;
    let f = |u: f64| (h * (1.0 + libm::erf(u))).sin() * (h * libm::erfc(u)).sin();
    4.0 * quad::adaptive(f, 0.0, 7.0, &[1.0, 3.0], SHAPE_QUAD_TOL)
}

/// Shape factor g(α) for the leading O(β) correction.
pub fn shape_factor(shape: PulseShape, alpha: f64) -> Result<f64> {
    match shape {
        PulseShape::Rectangular => Ok(g_rectangular(alpha)),
        PulseShape::Gaussian => Ok(g_gaussian(alpha)),
        PulseShape::IdealKick => {
            Err(Error::InvalidInput("an ideal kick has no finite-width correction".into()))
        }
    }
}

fn correction_diag(gamma_t: f64) -> Mat2 {
    Mat2::diag(Complex::from_polar(1.0, gamma_t), -Complex::from_polar(1.0, -gamma_t))
}

/// Leading finite-width correction `iβ g(α) diag(e^{iγt}, −e^{−iγt})` to the
/// kicked propagator.
pub fn kick_correction_leading(alpha: f64, beta: f64, gamma: f64, t: f64, shape: PulseShape) -> Result<Mat2> {
    let g = shape_factor(shape, alpha)?;
    Ok(correction_diag(gamma * t).scale(Complex::new(0.0, beta * g)))
}

/// Two leading terms of `U − U^K` in a joint expansion in α and β:
/// a diagonal `βα²`-type term and an off-diagonal `β²α`-type term, both
/// evaluated by quadrature over the pulse.
pub fn kick_correction_expansion(pulse: &Pulse, params: &SystemParams, t: f64) -> Result<Mat2> {
    pulse.validate()?;
    if pulse.shape == PulseShape::IdealKick || pulse.alpha == 0.0 {
        return Ok(Mat2::zero());
    }
    let de = params.delta_e();
    let tk = pulse.center;
    let (lo, hi) = pulse.support();
    let far_lo = tk - TAIL_SIGMA * pulse.tau;
    let far_hi = tk + TAIL_SIGMA * pulse.tau;
    let scale = pulse.alpha.abs() * pulse.tau;

    // (α/2)² − A(s)² with A(s) = ∫_{T_k}^s V, factored as head(s)·tail(s)
    let first = quad::adaptive(
        |s| pulse.integral(far_lo, s) * pulse.integral(s, far_hi),
        lo,
        hi,
        &[tk],
        SHAPE_QUAD_TOL * scale * pulse.alpha.abs(),
    );
    let second = quad::adaptive(
        |s| pulse.smooth_value(s) * (s - tk) * (s - tk),
        lo,
        hi,
        &[tk],
        SHAPE_QUAD_TOL * scale * pulse.tau,
    );

    let diag_term = correction_diag(params.gamma * t).scale(Complex::new(0.0, de * first));
    let w = params.gamma * (t - 2.0 * tk);
    let off = Complex::new(0.0, 0.5 * de * de * second);
    let off_term = Mat2::new(
        Complex::new(0.0, 0.0),
        off * Complex::from_polar(1.0, w),
        off * Complex::from_polar(1.0, -w),
        Complex::new(0.0, 0.0),
    );
    Ok(diag_term + off_term)
}

/// Leading time-ordering effect in the Schrödinger picture,
/// `−½[H₀, V₀] ∫₀ᵗ (t − 2t′) f(t′) dt′ = iγ J σy` with
/// `J = ∫₀ᵗ (t − 2t′) V(t′) dt′`.
pub fn leading_to_commutator(pulse: &Pulse, params: &SystemParams, t: f64) -> Result<Mat2> {
    pulse.validate()?;
    let j = match pulse.shape {
        PulseShape::IdealKick => {
            if pulse.center >= 0.0 && pulse.center <= t {
                pulse.alpha * (t - 2.0 * pulse.center)
            } else {
                0.0
            }
        }
        _ => {
            let (lo, hi) = pulse.support();
            let (a, b) = (lo.max(0.0), hi.min(t));
            if b <= a {
                0.0
            } else {
                let tol = 1e-15 * pulse.alpha.abs() * t.abs().max(pulse.tau);
                quad::adaptive(|s| (t - 2.0 * s) * pulse.smooth_value(s), a, b, &[pulse.center], tol)
            }
        }
    };
    let c = params.gamma * j;
    Ok(Mat2::new(Complex::new(0.0, 0.0), Complex::new(c, 0.0), Complex::new(-c, 0.0), Complex::new(0.0, 0.0)))
}
