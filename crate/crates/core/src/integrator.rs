//! Fixed-step fourth-order Runge–Kutta integration of
//! `i d/dt (a1, a2) = H(t) (a1, a2)` with `H = −γσz + V(t)σx`, and the
//! numerically assembled evolutions without time ordering.
//!
//! The time axis is cut at every pulse-window edge, ideal-kick time and
//! requested sample time. Segments with no pulse switched on are advanced
//! by the exact free propagator; ideal kicks are applied as exact
//! `e^{−iασx}` factors between segments.

use crate::error::{Error, Result};
use crate::propagators::{degenerate_propagator, free_evolution};
use crate::pulse::{Pulse, PulseSequence, PulseShape, SystemParams};
use crate::quad;
use crate::su2::{pauli_exponential, Complex, Mat2, QubitState};

/// Absolute tolerance of the Romberg integrals behind the no-time-ordering
/// evolutions.
const NO_TO_QUAD_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Fixed step in ps.
    pub dt: f64,
    /// Gaussian pulses are integrated over `center ± window_sigma·τ`.
    pub window_sigma: f64,
    /// Largest tolerated `‖U†U − I‖_max` at the end of a run.
    pub unitarity_tolerance: f64,
    /// Record on a uniform grid with this spacing instead of every step.
    pub sample_interval: Option<f64>,
}

impl IntegratorConfig {
    pub fn with_dt(dt: f64) -> Self {
        Self { dt, window_sigma: 6.0, unitarity_tolerance: 1e-8, sample_interval: None }
    }

    /// `dt = min(τ_min/50, T_ΔE/2000)`, falling back to span/2000.
    pub fn default_for(seq: &PulseSequence, params: &SystemParams, span: f64) -> Self {
        Self::with_dt(default_dt(seq, params, span))
    }

    pub fn sampled(mut self, interval: f64) -> Self {
        self.sample_interval = Some(interval);
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidInput(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.window_sigma > 0.0) {
            return Err(Error::InvalidInput("window_sigma must be > 0".into()));
        }
        if let Some(s) = self.sample_interval {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidInput(format!("sample interval must be > 0, got {s}")));
            }
        }
        Ok(())
    }
}

pub fn default_dt(seq: &PulseSequence, params: &SystemParams, span: f64) -> f64 {
    let by_pulse = seq.min_tau().map_or(f64::INFINITY, |tau| tau / 50.0);
    let by_rabi = params.rabi_time / 2000.0;
    let dt = by_pulse.min(by_rabi);
    if dt.is_finite() {
        dt
    } else if span > 0.0 {
        span / 2000.0
    } else {
        1.0
    }
}

/// Sampled trajectory of the amplitudes.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub states: Vec<QubitState>,
    pub p1: Vec<f64>,
    pub p2: Vec<f64>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_p2(&self) -> Option<f64> {
        self.p2.last().copied()
    }

    pub fn final_state(&self) -> Option<QubitState> {
        self.states.last().copied()
    }

    /// Largest `|P1 + P2 − 1|` along the trajectory.
    pub fn max_norm_defect(&self) -> f64 {
        self.p1.iter().zip(&self.p2).map(|(a, b)| (a + b - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Sampled propagators `U(t, t0)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PropagatorSeries {
    pub times: Vec<f64>,
    pub propagators: Vec<Mat2>,
}

fn window(p: &Pulse, sigma: f64) -> (f64, f64) {
    match p.shape {
        PulseShape::Gaussian => (p.center - sigma * p.tau, p.center + sigma * p.tau),
        _ => p.support(),
    }
}

/// `−iH(t)U` for `H = [[−γ, V], [V, γ]]`.
fn derivative(gamma: f64, v: f64, u: &Mat2) -> Mat2 {
    let mi = Complex::new(0.0, -1.0);
    Mat2::new(
        mi * (-gamma * u.m11 + v * u.m21),
        mi * (-gamma * u.m12 + v * u.m22),
        mi * (v * u.m11 + gamma * u.m21),
        mi * (v * u.m12 + gamma * u.m22),
    )
}

fn axpy(u: &Mat2, h: f64, k: &Mat2) -> Mat2 {
    *u + k.scale(h.into())
}

struct Plan<'a> {
    seq: &'a PulseSequence,
    gamma: f64,
    windows: Vec<(f64, f64)>,
}

impl<'a> Plan<'a> {
    /// Pulses switched on over the segment `[a, b]`. Segments never straddle
    /// a window edge, so the midpoint decides.
    fn active(&self, a: f64, b: f64) -> Vec<&'a Pulse> {
        let mid = 0.5 * (a + b);
        self.seq
            .finite_pulses()
            .zip(&self.windows)
            .filter(|(_, &(lo, hi))| lo < mid && mid < hi)
            .map(|(p, _)| p)
            .collect()
    }

    fn rk4_step(&self, on: &[&Pulse], t: f64, t_next: f64, u: &Mat2) -> Mat2 {
        let v = |s: f64| on.iter().map(|p| p.interior_value(s)).sum::<f64>();
        let g = self.gamma;
        let h = t_next - t;
        let vm = v(t + 0.5 * h);
        let k1 = derivative(g, v(t), u);
        let k2 = derivative(g, vm, &axpy(u, 0.5 * h, &k1));
        let k3 = derivative(g, vm, &axpy(u, 0.5 * h, &k2));
        let k4 = derivative(g, v(t_next), &axpy(u, h, &k3));
        let sum = k1 + k2.scale(2.0.into()) + k3.scale(2.0.into()) + k4;
        axpy(u, h / 6.0, &sum)
    }
}

/// Core driver: evolves `U` from `t0` to `t1`, calling `record` at `t0`,
/// after every step (or at every sample time) and at `t1`.
fn drive(
    seq: &PulseSequence,
    params: &SystemParams,
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
    mut record: impl FnMut(f64, &Mat2),
) -> Result<Mat2> {
    seq.validate()?;
    cfg.validate()?;
    if !(t1 >= t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidInput(format!("need finite t1 >= t0, got [{t0}, {t1}]")));
    }
    let plan = Plan {
        seq,
        gamma: params.gamma,
        windows: seq.finite_pulses().map(|p| window(p, cfg.window_sigma)).collect(),
    };

    let span = t1 - t0;
    let eps = 1e-12 * span.max(1.0);
    let mut cuts: Vec<f64> = plan
        .windows
        .iter()
        .flat_map(|&(lo, hi)| [lo, hi])
        .chain(seq.kicks().map(|k| k.center))
        .filter(|&x| x > t0 && x < t1)
        .collect();
    let mut samples: Vec<f64> = Vec::new();
    if let Some(step) = cfg.sample_interval {
        let n = (span / step + 1e-9).floor() as usize;
        samples = (1..=n).map(|k| t0 + k as f64 * step).filter(|&x| x < t1 - eps).collect();
        cuts.extend(samples.iter().copied());
    }
    cuts.push(t0);
    cuts.push(t1);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() <= eps);
    if let Some(last) = cuts.last_mut() {
        *last = t1;
    }

    let every_step = cfg.sample_interval.is_none();
    let is_sample = |x: f64| {
        let i = samples.partition_point(|&s| s < x - eps);
        i < samples.len() && (samples[i] - x).abs() <= eps
    };
    let apply_kicks = |at: f64, u: Mat2| {
        seq.kicks()
            .filter(|k| (k.center - at).abs() <= eps)
            .fold(u, |u, k| degenerate_propagator(k.alpha) * u)
    };

    let mut u = apply_kicks(t0, Mat2::identity());
    record(t0, &u);
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let on = plan.active(a, b);
        let active = !on.is_empty();
        let n = if active || every_step { ((b - a) / cfg.dt).ceil().max(1.0) as usize } else { 1 };
        let h = (b - a) / n as f64;
        let free_step = free_evolution(params.gamma * h);
        for k in 0..n {
            let t = a + k as f64 * h;
            let t_next = if k + 1 == n { b } else { t + h };
            u = if active { plan.rk4_step(&on, t, t_next, &u) } else { free_step * u };
            if every_step && k + 1 < n {
                record(t_next, &u);
            }
        }
        u = apply_kicks(b, u);
        if every_step || b == t1 || is_sample(b) {
            record(b, &u);
        }
    }

    let defect = u.unitarity_defect();
    if !(defect <= cfg.unitarity_tolerance) {
        return Err(Error::Numerical(format!(
            "unitarity defect {defect:e} exceeds {:e}; reduce dt (currently {} ps)",
            cfg.unitarity_tolerance, cfg.dt
        )));
    }
    Ok(u)
}

/// Amplitude trajectory from `initial` over `[t0, t1]`.
pub fn rk4_evolve(
    seq: &PulseSequence,
    params: &SystemParams,
    initial: &QubitState,
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<TimeSeries> {
    let mut ts = TimeSeries::default();
    drive(seq, params, t0, t1, cfg, |t, u| {
        let s = u.apply(initial);
        ts.times.push(t);
        ts.p1.push(s.p1());
        ts.p2.push(s.p2());
        ts.states.push(s);
    })?;
    Ok(ts)
}

/// `U(t1, t0)`, built column-by-column from the evolution of `(1,0)` and
/// `(0,1)`.
pub fn rk4_propagator(
    seq: &PulseSequence,
    params: &SystemParams,
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<Mat2> {
    let mut sampled = *cfg;
    sampled.sample_interval = Some(f64::MAX);
    drive(seq, params, t0, t1, &sampled, |_, _| {})
}

/// Propagators recorded along the run.
pub fn rk4_propagator_series(
    seq: &PulseSequence,
    params: &SystemParams,
    t0: f64,
    t1: f64,
    cfg: &IntegratorConfig,
) -> Result<PropagatorSeries> {
    let mut out = PropagatorSeries::default();
    drive(seq, params, t0, t1, cfg, |t, u| {
        out.times.push(t);
        out.propagators.push(*u);
    })?;
    Ok(out)
}

/// Propagators at each requested time (ascending, all ≥ `t0`).
pub fn rk4_propagators_at(
    seq: &PulseSequence,
    params: &SystemParams,
    t0: f64,
    times: &[f64],
    cfg: &IntegratorConfig,
) -> Result<Vec<Mat2>> {
    let mut out = Vec::with_capacity(times.len());
    let mut start = t0;
    let mut u = Mat2::identity();
    for &t in times {
        if t < start {
            return Err(Error::InvalidInput("sample times must be ascending and >= t0".into()));
        }
        // kicks exactly at a previous sample were already applied
        let rest = shifted_kicks(seq, start, out.is_empty());
        u = rk4_propagator(&rest, params, start, t, cfg)? * u;
        out.push(u);
        start = t;
    }
    Ok(out)
}

fn shifted_kicks(seq: &PulseSequence, start: f64, first: bool) -> PulseSequence {
    if first {
        return seq.clone();
    }
    PulseSequence::new(
        seq.pulses
            .iter()
            .copied()
            .filter(|p| !(p.shape == PulseShape::IdealKick && p.center <= start))
            .collect(),
    )
}

/// Largest element difference between runs at `dt` and `dt/2`. The
/// unitarity guard is lifted so coarse steps report a defect rather than
/// fail.
pub fn convergence_check(
    seq: &PulseSequence,
    params: &SystemParams,
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    let mut coarse = *cfg;
    coarse.unitarity_tolerance = f64::INFINITY;
    let mut fine = coarse;
    fine.dt = 0.5 * cfg.dt;
    let a = rk4_propagator(seq, params, 0.0, t, &coarse)?;
    let b = rk4_propagator(seq, params, 0.0, t, &fine)?;
    Ok(a.max_diff(&b))
}

fn romberg_over_windows(seq: &PulseSequence, t: f64, sigma: f64, weight: impl Fn(f64) -> f64) -> Result<f64> {
    let mut total = 0.0;
    for p in seq.finite_pulses() {
        let (lo, hi) = window(p, sigma);
        let (a, b) = (lo.max(0.0), hi.min(t));
        if b > a {
            let tol = NO_TO_QUAD_TOL * p.alpha.abs().max(1e-300);
            total += quad::romberg(|s| p.smooth_value(s) * weight(s), a, b, tol)?;
        }
    }
    Ok(total)
}

/// `∫₀ᵗ V dt'` assembled numerically: kicks exactly, finite pulses by
/// Romberg quadrature over their windows.
pub fn numeric_integrated_strength(seq: &PulseSequence, t: f64, cfg: &IntegratorConfig) -> Result<f64> {
    let kicks: f64 = seq.kicks().filter(|k| k.center >= 0.0 && k.center <= t).map(|k| k.alpha).sum();
    Ok(kicks + romberg_over_windows(seq, t, cfg.window_sigma, |_| 1.0)?)
}

/// `(∫₀ᵗ V_I · σx, ∫₀ᵗ V_I · σy)` assembled numerically.
pub fn numeric_interaction_average(
    seq: &PulseSequence,
    params: &SystemParams,
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<(f64, f64)> {
    let g2 = 2.0 * params.gamma;
    let (mut cx, mut cy) = (0.0, 0.0);
    for k in seq.kicks().filter(|k| k.center >= 0.0 && k.center <= t) {
        cx += k.alpha * (g2 * k.center).cos();
        cy += k.alpha * (g2 * k.center).sin();
    }
    cx += romberg_over_windows(seq, t, cfg.window_sigma, |s| (g2 * s).cos())?;
    cy += romberg_over_windows(seq, t, cfg.window_sigma, |s| (g2 * s).sin())?;
    Ok((cx, cy))
}

/// `exp(i φ n·σ)` for a possibly zero real vector `φ n`.
fn rotation(v: [f64; 3]) -> Result<Mat2> {
    let phi = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if phi == 0.0 {
        return Ok(Mat2::identity());
    }
    pauli_exponential(phi, [v[0] / phi, v[1] / phi, v[2] / phi])
}

/// `exp(−i(H₀ + V̄σx)t)` with `V̄t = ∫₀ᵗ V dt'` evaluated numerically.
pub fn evolve_no_to_schrodinger_numeric(
    seq: &PulseSequence,
    params: &SystemParams,
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<Mat2> {
    seq.validate()?;
    let alpha = numeric_integrated_strength(seq, t, cfg)?;
    // −i(−γσz + V̄σx)t = i(γt σz − α σx)
    rotation([-alpha, 0.0, params.gamma * t])
}

/// `exp(−i ∫₀ᵗ V_I dt')` with the integral evaluated numerically.
pub fn evolve_no_to_interaction_numeric(
    seq: &PulseSequence,
    params: &SystemParams,
    t: f64,
    cfg: &IntegratorConfig,
) -> Result<Mat2> {
    seq.validate()?;
    let (cx, cy) = numeric_interaction_average(seq, params, t, cfg)?;
    rotation([-cx, -cy, 0.0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propagators::{free_propagator, kicked_propagator};
    use std::f64::consts::FRAC_PI_2;

    fn hydrogen() -> SystemParams {
        SystemParams::hydrogen_2s2p()
    }

    #[test]
    fn free_evolution_trajectory() {
        let p = hydrogen();
        let seq = PulseSequence::empty();
        let cfg = IntegratorConfig::default_for(&seq, &p, 300.0);
        let ts = rk4_evolve(&seq, &p, &QubitState::ground(), 0.0, 300.0, &cfg).unwrap();
        for (t, s) in ts.times.iter().zip(&ts.states) {
            assert!((s.a1 - Complex::from_polar(1.0, p.gamma * t)).norm() < 1e-12);
        }
        assert!(ts.p1.iter().all(|&x| (x - 1.0).abs() < 1e-12));
        let u = rk4_propagator(&seq, &p, 0.0, 300.0, &cfg).unwrap();
        assert!(u.max_diff(&free_propagator(&p, 300.0)) < 1e-10);
    }

    #[test]
    fn default_dt_rule() {
        let p = hydrogen();
        let seq = PulseSequence::single(Pulse::gaussian(1.0, 10.0, 150.0));
        assert!((default_dt(&seq, &p, 300.0) - 0.2).abs() < 1e-15);
        let wide = PulseSequence::single(Pulse::gaussian(1.0, 100.0, 150.0));
        assert!((default_dt(&wide, &p, 300.0) - 972.0 / 2000.0).abs() < 1e-15);
        let flat = SystemParams::from_gamma(0.0).unwrap();
        assert_eq!(default_dt(&PulseSequence::empty(), &flat, 10.0), 10.0 / 2000.0);
    }

    #[test]
    fn sampling_grid_and_every_step() {
        let p = hydrogen();
        let seq = PulseSequence::single(Pulse::gaussian(FRAC_PI_2, 10.0, 150.0));
        let cfg = IntegratorConfig::default_for(&seq, &p, 300.0).sampled(1.0);
        let ts = rk4_evolve(&seq, &p, &QubitState::ground(), 0.0, 300.0, &cfg).unwrap();
        assert_eq!(ts.len(), 301);
        for (k, t) in ts.times.iter().enumerate() {
            assert!((t - k as f64).abs() < 1e-9);
        }
        let all =
            rk4_evolve(&seq, &p, &QubitState::ground(), 0.0, 300.0, &IntegratorConfig::with_dt(0.5)).unwrap();
        assert!(all.len() > 600);
        assert!(all.times.windows(2).all(|w| w[1] > w[0]));
        assert!((all.final_p2().unwrap() - ts.final_p2().unwrap()).abs() < 1e-6);
    }

    #[test]
    fn degenerate_kick_jumps_at_kick_time() {
        let p = SystemParams::from_gamma(0.0).unwrap();
        let seq = PulseSequence::single(Pulse::kick(FRAC_PI_2, 5.0));
        let cfg = IntegratorConfig::with_dt(0.1).sampled(1.0);
        let ts = rk4_evolve(&seq, &p, &QubitState::ground(), 0.0, 10.0, &cfg).unwrap();
        for (t, p2) in ts.times.iter().zip(&ts.p2) {
            let want = if *t < 5.0 { 0.0 } else { 1.0 };
            assert!((p2 - want).abs() < 1e-15, "t = {t}");
        }
    }

    #[test]
    fn kicks_are_exact_factors() {
        let p = hydrogen();
        let seq = PulseSequence::single(Pulse::kick(0.7, 123.0));
        let u = rk4_propagator(&seq, &p, 0.0, 400.0, &IntegratorConfig::with_dt(1.0)).unwrap();
        assert!(u.max_diff(&kicked_propagator(0.7, p.gamma, 123.0, 400.0).unwrap()) < 1e-13);
    }

    #[test]
    fn linearity_of_propagator() {
        let p = hydrogen();
        let seq = PulseSequence::kick_antikick(PulseShape::Gaussian, 1.0, 10.0, 100.0, 300.0);
        let cfg = IntegratorConfig::default_for(&seq, &p, 400.0);
        let u = rk4_propagator(&seq, &p, 0.0, 400.0, &cfg).unwrap();
        let v = QubitState::new(Complex::new(0.6, 0.0), Complex::new(0.0, 0.8));
        let ts = rk4_evolve(&seq, &p, &v, 0.0, 400.0, &cfg).unwrap();
        let end = ts.final_state().unwrap();
        let want = u.apply(&v);
        assert!((end.a1 - want.a1).norm() < 1e-10 && (end.a2 - want.a2).norm() < 1e-10);
    }

    #[test]
    fn propagators_at_times_compose() {
        let p = hydrogen();
        let seq = PulseSequence::new(vec![Pulse::gaussian(1.0, 10.0, 100.0), Pulse::kick(0.5, 200.0)]);
        let cfg = IntegratorConfig::default_for(&seq, &p, 400.0);
        let at = rk4_propagators_at(&seq, &p, 0.0, &[50.0, 200.0, 400.0], &cfg).unwrap();
        let direct = rk4_propagator(&seq, &p, 0.0, 400.0, &cfg).unwrap();
        assert!(at[2].max_diff(&direct) < 1e-12);
        let to200 = rk4_propagator(&seq, &p, 0.0, 200.0, &cfg).unwrap();
        assert!(at[1].max_diff(&to200) < 1e-12);
    }

    #[test]
    fn rejects_bad_config() {
        let p = hydrogen();
        let seq = PulseSequence::empty();
        assert!(rk4_propagator(&seq, &p, 0.0, 1.0, &IntegratorConfig::with_dt(0.0)).is_err());
        assert!(rk4_propagator(&seq, &p, 1.0, 0.0, &IntegratorConfig::with_dt(0.1)).is_err());
        let bad = PulseSequence::single(Pulse::gaussian(1.0, -1.0, 0.0));
        assert!(rk4_propagator(&bad, &p, 0.0, 1.0, &IntegratorConfig::with_dt(0.1)).is_err());
    }

    #[test]
    fn coarse_step_trips_unitarity_guard() {
        let p = SystemParams::unit();
        let seq = PulseSequence::single(Pulse::gaussian(40.0, 1.0, 5.0));
        let err = rk4_propagator(&seq, &p, 0.0, 10.0, &IntegratorConfig::with_dt(1.0)).unwrap_err();
        assert!(matches!(err, Error::Numerical(_)));
        // and the convergence check reports instead of failing
        let d = convergence_check(&seq, &p, 10.0, &IntegratorConfig::with_dt(1.0)).unwrap();
        assert!(d > 1e-2);
    }

    #[test]
    fn convergence_check_examples() {
        let p = hydrogen();
        let d =
            convergence_check(&PulseSequence::empty(), &p, 300.0, &IntegratorConfig::with_dt(0.5)).unwrap();
        assert!(d <= 1e-14);
        let seq = PulseSequence::single(Pulse::gaussian(FRAC_PI_2, 10.0, 150.0));
        let cfg = IntegratorConfig::default_for(&seq, &p, 300.0);
        assert!(convergence_check(&seq, &p, 300.0, &cfg).unwrap() <= 1e-9);
        let coarse = IntegratorConfig::with_dt(10.0);
        assert!(convergence_check(&seq, &p, 300.0, &coarse).unwrap() > 1e-4);
    }

    #[test]
    fn numeric_strength_matches_closed_form() {
        let seq = PulseSequence::new(vec![
            Pulse::gaussian(0.9, 7.0, 60.0),
            Pulse::rectangular(-0.3, 5.0, 90.0),
            Pulse::kick(0.2, 100.0),
        ]);
        let cfg = IntegratorConfig::with_dt(0.1);
        for t in [0.0, 40.0, 60.0, 91.0, 100.0, 200.0] {
            let n = numeric_integrated_strength(&seq, t, &cfg).unwrap();
            assert!((n - seq.integrated_strength(0.0, t)).abs() < 1e-11, "t = {t}");
        }
    }
}
