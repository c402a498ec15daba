//! Pulse shapes, sequences, system parameters and the interaction-picture
//! transforms of the coupling.
//!
//! Units: ħ = 1, time in picoseconds, energies in rad/ps. The Hamiltonian is
//! `H(t) = −γ σz + V(t) σx` with `γ = ΔE/2ħ`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::su2::PauliVector;

/// ħ in eV·ps, used only to convert a splitting given in eV.
pub const HBAR_EV_PS: f64 = 6.582119569e-4;

/// Gaussian pulses are treated as vanishing beyond this many widths from
/// their centre.
pub const GAUSSIAN_WINDOW_SIGMA: f64 = 6.0;

/// Rabi time of the hydrogen 2s–2p preset, in ps.
pub const HYDROGEN_RABI_TIME_PS: f64 = 972.0;

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    /// γ = ΔE/2ħ in rad/ps.
    pub gamma: f64,
    /// T_ΔE = π/γ in ps (infinite when degenerate).
    pub rabi_time: f64,
}

impl SystemParams {
    pub fn from_gamma(gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidInput(format!("gamma must be finite and >= 0, got {gamma}")));
        }
        let rabi_time = if gamma == 0.0 { f64::INFINITY } else { PI / gamma };
        Ok(Self { gamma, rabi_time })
    }

    pub fn from_rabi_time(rabi_time: f64) -> Result<Self> {
        if !(rabi_time > 0.0) {
            return Err(Error::InvalidInput(format!("Rabi time must be > 0, got {rabi_time}")));
        }
        Ok(Self { gamma: PI / rabi_time, rabi_time })
    }

    /// Splitting ΔE given in eV.
    pub fn from_splitting_ev(delta_e_ev: f64) -> Result<Self> {
        Self::from_gamma(delta_e_ev / (2.0 * HBAR_EV_PS))
    }

    /// Hydrogen 2s–2p with T_ΔE = 972 ps.
    pub fn hydrogen_2s2p() -> Self {
        Self { gamma: PI / HYDROGEN_RABI_TIME_PS, rabi_time: HYDROGEN_RABI_TIME_PS }
    }

    /// γ = 1 rad per time unit.
    pub fn unit() -> Self {
        Self { gamma: 1.0, rabi_time: PI }
    }

    /// ΔE in rad/ps (= 2γ with ħ = 1).
    pub fn delta_e(&self) -> f64 {
        2.0 * self.gamma
    }

    pub fn delta_e_ev(&self) -> f64 {
        self.delta_e() * HBAR_EV_PS
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PulseShape {
    IdealKick,
    Gaussian,
    Rectangular,
}

impl PulseShape {
    pub fn name(&self) -> &'static str {
        match self {
            PulseShape::IdealKick => "kick",
            PulseShape::Gaussian => "gaussian",
            PulseShape::Rectangular => "rectangular",
        }
    }
}

impl fmt::Display for PulseShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PulseShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "kick" | "ideal_kick" | "ideal-kick" | "delta" => Ok(PulseShape::IdealKick),
            "gaussian" | "gauss" => Ok(PulseShape::Gaussian),
            "rectangular" | "rect" | "square" => Ok(PulseShape::Rectangular),
            other => Err(Error::InvalidInput(format!("unknown pulse shape `{other}`"))),
        }
    }
}

/// One pulse of signed integrated strength `alpha` (rad) centred at `center`.
///
/// Gaussian: `V(t) = α/(√π τ) · exp(−(t − T_k)²/τ²)`.
/// Rectangular: `V(t) = α/τ` on `[T_k − τ/2, T_k + τ/2]`.
/// Ideal kick: `V(t) = α δ(t − T_k)`; `tau` is ignored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub shape: PulseShape,
    pub alpha: f64,
    pub tau: f64,
    pub center: f64,
}

impl Pulse {
    pub fn new(shape: PulseShape, alpha: f64, tau: f64, center: f64) -> Result<Self> {
        let p = Self { shape, alpha, tau, center };
        p.validate()?;
        Ok(p)
    }

    pub fn kick(alpha: f64, center: f64) -> Self {
        Self { shape: PulseShape::IdealKick, alpha, tau: 0.0, center }
    }

    pub fn gaussian(alpha: f64, tau: f64, center: f64) -> Self {
        Self { shape: PulseShape::Gaussian, alpha, tau, center }
    }

    pub fn rectangular(alpha: f64, tau: f64, center: f64) -> Self {
        Self { shape: PulseShape::Rectangular, alpha, tau, center }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() || !self.center.is_finite() {
            return Err(Error::InvalidInput(format!("pulse parameters must be finite: {self:?}")));
        }
        if self.shape != PulseShape::IdealKick && !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidInput(format!("{} pulse needs tau > 0, got {}", self.shape, self.tau)));
        }
        Ok(())
    }

    /// Interval outside which the pulse is zero (or negligible).
    pub fn support(&self) -> (f64, f64) {
        match self.shape {
            PulseShape::IdealKick => (self.center, self.center),
            PulseShape::Gaussian => {
                let w = GAUSSIAN_WINDOW_SIGMA * self.tau;
                (self.center - w, self.center + w)
            }
            PulseShape::Rectangular => (self.center - 0.5 * self.tau, self.center + 0.5 * self.tau),
        }
    }

    pub fn value(&self, t: f64) -> Result<f64> {
        match self.shape {
            PulseShape::IdealKick => {
                Err(Error::UnsupportedEvaluation(format!("kick at t = {} ps", self.center)))
            }
            PulseShape::Gaussian => Ok(self.gaussian_value(t)),
            PulseShape::Rectangular => Ok(self.rectangular_value(t)),
        }
    }

    /// Pointwise value for finite shapes; zero for ideal kicks.
    pub(crate) fn smooth_value(&self, t: f64) -> f64 {
        match self.shape {
            PulseShape::IdealKick => 0.0,
            PulseShape::Gaussian => self.gaussian_value(t),
            PulseShape::Rectangular => self.rectangular_value(t),
        }
    }

    /// V(t) assuming `t` lies inside the pulse; rectangular edges are not
    /// tested.
    pub(crate) fn interior_value(&self, t: f64) -> f64 {
        match self.shape {
            PulseShape::IdealKick => 0.0,
            PulseShape::Gaussian => self.gaussian_value(t),
            PulseShape::Rectangular => self.alpha / self.tau,
        }
    }

    fn gaussian_value(&self, t: f64) -> f64 {
        let x = (t - self.center) / self.tau;
        self.alpha * FRAC_1_SQRT_PI / self.tau * (-x * x).exp()
    }

    fn rectangular_value(&self, t: f64) -> f64 {
        let (lo, hi) = self.support();
        if t >= lo && t <= hi {
            self.alpha / self.tau
        } else {
            0.0
        }
    }

    /// dV/dt for finite shapes; the rectangular edges are not included.
    pub(crate) fn derivative(&self, t: f64) -> f64 {
        match self.shape {
            PulseShape::Gaussian => -2.0 * (t - self.center) / (self.tau * self.tau) * self.gaussian_value(t),
            _ => 0.0,
        }
    }

    /// ∫_{t0}^{t1} V dt (signed, closed form).
    pub fn integral(&self, t0: f64, t1: f64) -> f64 {
        if t1 < t0 {
            return -self.integral(t1, t0);
        }
        match self.shape {
            PulseShape::IdealKick => {
                if self.center >= t0 && self.center <= t1 {
                    self.alpha
                } else {
                    0.0
                }
            }
            PulseShape::Gaussian => {
                let a = (t0 - self.center) / self.tau;
                let b = (t1 - self.center) / self.tau;
                0.5 * self.alpha * erf_difference(a, b)
            }
            PulseShape::Rectangular => {
                let (lo, hi) = self.support();
                let overlap = (t1.min(hi) - t0.max(lo)).max(0.0);
                self.alpha * overlap / self.tau
            }
        }
    }
}

/// erf(b) − erf(a), using erfc on the tails to avoid cancellation.
fn erf_difference(a: f64, b: f64) -> f64 {
    if a >= 0.0 {
        libm::erfc(a) - libm::erfc(b)
    } else if b <= 0.0 {
        libm::erfc(-b) - libm::erfc(-a)
    } else {
        libm::erf(b) - libm::erf(a)
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PulseSequence {
    pub pulses: Vec<Pulse>,
}

impl PulseSequence {
    pub fn new(pulses: Vec<Pulse>) -> Self {
        Self { pulses }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn single(pulse: Pulse) -> Self {
        Self { pulses: vec![pulse] }
    }

    /// `+α` at `t1` followed by `−α` at `t2`, both of the given shape.
    pub fn kick_antikick(shape: PulseShape, alpha: f64, tau: f64, t1: f64, t2: f64) -> Self {
        let tau = if shape == PulseShape::IdealKick { 0.0 } else { tau };
        Self {
            pulses: vec![
                Pulse { shape, alpha, tau, center: t1 },
                Pulse { shape, alpha: -alpha, tau, center: t2 },
            ],
        }
    }

    pub fn push(&mut self, pulse: Pulse) {
        self.pulses.push(pulse);
    }

    pub fn validate(&self) -> Result<()> {
        self.pulses.iter().try_for_each(Pulse::validate)
    }

    pub fn has_ideal_kicks(&self) -> bool {
        self.pulses.iter().any(|p| p.shape == PulseShape::IdealKick)
    }

    pub fn finite_pulses(&self) -> impl Iterator<Item = &Pulse> {
        self.pulses.iter().filter(|p| p.shape != PulseShape::IdealKick)
    }

    pub fn kicks(&self) -> impl Iterator<Item = &Pulse> {
        self.pulses.iter().filter(|p| p.shape == PulseShape::IdealKick)
    }

    /// Narrowest finite width in the sequence.
    pub fn min_tau(&self) -> Option<f64> {
        self.finite_pulses().map(|p| p.tau).reduce(f64::min)
    }

    /// Total signed strength Σα.
    pub fn total_alpha(&self) -> f64 {
        self.pulses.iter().map(|p| p.alpha).sum()
    }

    /// Support edges and centres of every pulse, sorted.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .pulses
            .iter()
            .flat_map(|p| {
                let (lo, hi) = p.support();
                [lo, p.center, hi]
            })
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Whether any finite pulse is switched on somewhere in `(a, b)`.
    pub fn active_in(&self, a: f64, b: f64) -> bool {
        self.finite_pulses().any(|p| {
            let (lo, hi) = p.support();
            lo < b && hi > a
        })
    }

    /// Instantaneous coupling V(t).
    pub fn v_of_t(&self, t: f64) -> Result<f64> {
        self.pulses.iter().map(|p| p.value(t)).sum()
    }

    /// V(t) from finite pulses only; kicks contribute nothing.
    pub(crate) fn smooth_v(&self, t: f64) -> f64 {
        self.pulses.iter().map(|p| p.smooth_value(t)).sum()
    }

    pub(crate) fn smooth_dv(&self, t: f64) -> f64 {
        self.pulses.iter().map(|p| p.derivative(t)).sum()
    }

    /// ∫_{t0}^{t1} V dt / ħ.
    pub fn integrated_strength(&self, t0: f64, t1: f64) -> f64 {
        self.pulses.iter().map(|p| p.integral(t0, t1)).sum()
    }
}

pub fn v_of_t(seq: &PulseSequence, t: f64) -> Result<f64> {
    seq.v_of_t(t)
}

pub fn integrated_strength(seq: &PulseSequence, t0: f64, t1: f64) -> f64 {
    seq.integrated_strength(t0, t1)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseAngles {
    pub alpha: f64,
    /// β = γτ.
    pub beta: f64,
    /// γt.
    pub gamma_t: f64,
}

impl PhaseAngles {
    /// ξ = √(α² + (γt)²).
    pub fn xi(&self) -> f64 {
        self.alpha.hypot(self.gamma_t)
    }

    /// α′ = √(α² + β²).
    pub fn alpha_prime(&self) -> f64 {
        self.alpha.hypot(self.beta)
    }
}

pub fn phase_angles(params: &SystemParams, pulse: &Pulse, t: f64) -> PhaseAngles {
    let tau = if pulse.shape == PulseShape::IdealKick { 0.0 } else { pulse.tau };
    PhaseAngles { alpha: pulse.alpha, beta: params.gamma * tau, gamma_t: params.gamma * t }
}

/// Kick times of a two-pulse sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleKickParams {
    pub t1: f64,
    pub t2: f64,
}

impl DoubleKickParams {
    pub fn new(t1: f64, t2: f64) -> Result<Self> {
        if !(t2 >= t1) {
            return Err(Error::InvalidInput(format!("need t2 >= t1, got t1 = {t1}, t2 = {t2}")));
        }
        Ok(Self { t1, t2 })
    }

    /// T_s = T₂ − T₁.
    pub fn ts(&self) -> f64 {
        self.t2 - self.t1
    }

    /// T̄ = (T₁ + T₂)/2.
    pub fn tbar(&self) -> f64 {
        0.5 * (self.t1 + self.t2)
    }

    /// ζ = γ(t − T_s).
    pub fn zeta(&self, gamma: f64, t: f64) -> f64 {
        gamma * (t - self.ts())
    }
}

/// `V_I(t) = e^{iH₀t} V(t) σx e^{−iH₀t} = V(t)(cos 2γt σx + sin 2γt σy)`.
pub fn v_interaction_picture(params: &SystemParams, seq: &PulseSequence, t: f64) -> Result<PauliVector> {
    let v = seq.v_of_t(t)?;
    Ok(interaction_frame(params.gamma, v, t))
}

pub(crate) fn interaction_frame(gamma: f64, v: f64, t: f64) -> PauliVector {
    let (s, c) = (2.0 * gamma * t).sin_cos();
    PauliVector::real(v * c, v * s, 0.0)
}

/// Closed form of `∫₀ᵗ V_I dt'` for one complete gaussian pulse or kick:
/// `α e^{−β²} (cos 2γT_k σx + sin 2γT_k σy)`.
pub fn averaged_interaction_single(params: &SystemParams, pulse: &Pulse, t: f64) -> Result<PauliVector> {
    let beta = match pulse.shape {
        PulseShape::Gaussian => {
            let (lo, hi) = pulse.support();
            if lo < 0.0 || t < hi {
                return Err(Error::Domain(format!(
                    "gaussian at {} ps with tau {} ps is not contained in [0, {t}]",
                    pulse.center, pulse.tau
                )));
            }
            params.gamma * pulse.tau
        }
        PulseShape::IdealKick => {
            if pulse.center < 0.0 || t < pulse.center {
                return Err(Error::Domain(format!("kick at {} ps is outside [0, {t}]", pulse.center)));
            }
            0.0
        }
        PulseShape::Rectangular => {
            return Err(Error::InvalidInput(
                "closed-form interaction average is defined for gaussian pulses and kicks".into(),
            ))
        }
    };
    let mag = pulse.alpha * (-beta * beta).exp();
    let (s, c) = (2.0 * params.gamma * pulse.center).sin_cos();
    Ok(PauliVector::real(mag * c, mag * s, 0.0))
}

/// Closed form of `∫₀ᵗ V_I dt'` for a gaussian pulse–antipulse pair:
/// `2α e^{−β²} sin γT_s (sin 2γT̄ σx − cos 2γT̄ σy)`.
pub fn averaged_interaction_double(
    params: &SystemParams,
    dk: &DoubleKickParams,
    alpha: f64,
    beta: f64,
) -> PauliVector {
    let r = 2.0 * alpha * (-beta * beta).exp() * (params.gamma * dk.ts()).sin();
    let (s, c) = (2.0 * params.gamma * dk.tbar()).sin_cos();
    PauliVector::real(r * s, -r * c, 0.0)
}

/// `∫₀ᵗ V dt' σx` in the Schrödinger picture.
pub fn averaged_interaction_schrodinger(seq: &PulseSequence, t: f64) -> PauliVector {
    PauliVector::real(seq.integrated_strength(0.0, t), 0.0, 0.0)
}
