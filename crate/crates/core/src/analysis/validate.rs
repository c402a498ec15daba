use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    fit_log_log, logspace, p2_closed_forms_double, p2_closed_forms_single, scenario, Overrides, ScenarioName,
};
use crate::error::Result;
use crate::integrator::{
    evolve_no_to_interaction_numeric, evolve_no_to_schrodinger_numeric, rk4_evolve, rk4_propagator,
    IntegratorConfig,
};
use crate::propagators::{
    adiabatic_propagator, degenerate_propagator, floquet_eigenphases, floquet_period_matrix, free_evolution,
    free_propagator, kick_antikick_propagator, kick_correction_leading, kicked_propagator,
    no_to_interaction_double, no_to_interaction_single, no_to_schrodinger, rectangular_exact,
    to_interaction_picture,
};
use crate::pulse::{DoubleKickParams, Pulse, PulseSequence, PulseShape, SystemParams};
use crate::su2::{Mat2, QubitState};

/// Deliberate defects used to confirm that the suite catches them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Flip the sign of α in the single-pulse interaction-picture form.
    TamperU0iSign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ValidationOptions {
    pub quick: bool,
    pub seed: u64,
    pub fault: Option<Fault>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub metric: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            writeln!(f, "{tag}  {:width$}  {:>12.4e}  {}", c.name, c.metric, c.detail)?;
        }
        let failed = self.failures().count();
        write!(f, "{} checks, {} failed", self.checks.len(), failed)
    }
}

fn bounded(name: &'static str, metric: f64, tol: f64, what: &str) -> CheckResult {
    CheckResult { name, passed: metric <= tol, metric, detail: format!("{what} <= {tol:e}") }
}

fn failed(name: &'static str, err: crate::error::Error) -> CheckResult {
    CheckResult { name, passed: false, metric: f64::NAN, detail: err.to_string() }
}

fn from_result(name: &'static str, r: Result<CheckResult>) -> CheckResult {
    r.unwrap_or_else(|e| failed(name, e))
}

struct Ctx {
    rng: ChaCha8Rng,
    quick: bool,
    fault: Option<Fault>,
}

impl Ctx {
    fn samples(&self, full: usize, quick: usize) -> usize {
        if self.quick {
            quick
        } else {
            full
        }
    }

    fn u0i_single(&self, alpha: f64, beta: f64, gamma_tk: f64) -> Mat2 {
        match self.fault {
            Some(Fault::TamperU0iSign) => no_to_interaction_single(-alpha, beta, gamma_tk),
            None => no_to_interaction_single(alpha, beta, gamma_tk),
        }
    }
}

/// Random kick configuration `(α, γ, T_k, t)` with `t > T_k`.
fn random_kick(rng: &mut ChaCha8Rng) -> (f64, f64, f64, f64) {
    let alpha = rng.gen_range(-PI..PI);
    let gamma = rng.gen_range(0.0..0.05);
    let tk = rng.gen_range(0.0..500.0);
    let t = tk + rng.gen_range(1e-3..500.0);
    (alpha, gamma, tk, t)
}

fn random_double(rng: &mut ChaCha8Rng) -> (f64, f64, DoubleKickParams, f64) {
    let alpha = rng.gen_range(-PI..PI);
    let gamma = rng.gen_range(0.0..0.05);
    let t1 = rng.gen_range(0.0..300.0);
    let t2 = t1 + rng.gen_range(0.0..600.0);
    let t = t2 + rng.gen_range(1e-3..300.0);
    (alpha, gamma, DoubleKickParams { t1, t2 }, t)
}

fn p2(u: &Mat2) -> f64 {
    u.m21.norm_sqr()
}

fn unitarity(ctx: &mut Ctx) -> CheckResult {
    let n = ctx.samples(10_000, 1_000);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let (a, g, tk, t) = random_kick(&mut ctx.rng);
        let (a2, g2, dk, t2) = random_double(&mut ctx.rng);
        let beta = ctx.rng.gen_range(0.0..1.0);
        let ms = [
            kicked_propagator(a, g, tk, t).unwrap_or_default(),
            kick_antikick_propagator(a2, g2, &dk, t2).unwrap_or_default(),
            rectangular_exact(a, beta, g, tk, t),
            no_to_schrodinger(a, g * t),
            no_to_interaction_single(a, beta, g * tk),
            no_to_interaction_double(a2, beta, g2, &dk),
            free_evolution(g * t),
            degenerate_propagator(a),
        ];
        worst = ms.iter().map(Mat2::unitarity_defect).fold(worst, f64::max);
    }
    bounded("unitarity", worst, 1e-10, &format!("max |U'U - I| over {n} samples"))
}

fn limit_web(ctx: &Ctx) -> Result<CheckResult> {
    let eps = 1e-6;
    let (alpha, gamma, tk, t) = (0.9, PI / 972.0, 150.0, 400.0);
    let mut errs = vec![
        no_to_schrodinger(alpha, eps).max_diff(&degenerate_propagator(alpha)),
        no_to_schrodinger(eps, gamma * t).max_diff(&free_evolution(gamma * t)),
        kick_antikick_propagator(alpha, gamma, &DoubleKickParams::new(tk, tk + eps)?, t)?
            .max_diff(&free_evolution(gamma * t)),
        rectangular_exact(alpha, eps, gamma, tk, t).max_diff(&kicked_propagator(alpha, gamma, tk, t)?),
    ];
    // degenerate limit: flat coupling across the whole window
    let flat = PulseSequence::single(Pulse::rectangular(2.0 * alpha, 2.0 * t, 0.5 * t));
    let near_degenerate = SystemParams::from_gamma(eps / t)?;
    let ad = adiabatic_propagator(&flat, &near_degenerate, t)?;
    errs.push(ad.propagator.max_diff(&degenerate_propagator(flat.integrated_strength(0.0, t))));
    let weak = PulseSequence::single(Pulse::gaussian(eps, 20.0, tk));
    let params = SystemParams::from_gamma(gamma)?;
    let ad = adiabatic_propagator(&weak, &params, t)?;
    errs.push(ad.propagator.max_diff(&free_propagator(&params, t)));
    // single ideal kick seen from the interaction frame
    let framed = to_interaction_picture(gamma, t, &kicked_propagator(alpha, gamma, tk, t)?);
    errs.push(framed.max_diff(&ctx.u0i_single(alpha, 0.0, gamma * tk)));
    let worst = errs.iter().copied().fold(0.0, f64::max);
    Ok(bounded("limit_web", worst, 1e-5, "largest element error over 7 limits at offset 1e-6"))
}

fn kick_identity(ctx: &mut Ctx) -> Result<CheckResult> {
    let n = ctx.samples(1_000, 200);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let (a, g, tk, t) = random_kick(&mut ctx.rng);
        let framed = to_interaction_picture(g, t, &kicked_propagator(a, g, tk, t)?);
        worst = worst.max(framed.max_diff(&ctx.u0i_single(a, 0.0, g * tk)));
    }
    Ok(bounded("kick_interaction_identity", worst, 1e-12, &format!("{n} random kicks")))
}

fn closed_forms(ctx: &mut Ctx) -> Result<CheckResult> {
    let n = ctx.samples(1_000, 200);
    let ground = QubitState::ground();
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let (a, g, tk, t) = random_kick(&mut ctx.rng);
        let beta = ctx.rng.gen_range(0.0..1.0);
        let (p, ps, pi) = p2_closed_forms_single(a, beta, g * t);
        let u = kicked_propagator(a, g, tk, t)?;
        worst = worst
            .max((p - u.apply(&ground).a2.norm_sqr()).abs())
            .max((ps - p2(&no_to_schrodinger(a, g * t))).abs())
            .max((pi - p2(&ctx.u0i_single(a, beta, g * tk))).abs());
        let (a, g, dk, t) = random_double(&mut ctx.rng);
        let (p, pi, ps) = p2_closed_forms_double(a, beta, g * dk.ts());
        worst = worst
            .max((p - p2(&kick_antikick_propagator(a, g, &dk, t)?)).abs())
            .max((pi - p2(&no_to_interaction_double(a, beta, g, &dk))).abs())
            .max((ps - p2(&no_to_schrodinger(0.0, g * t))).abs());
    }
    Ok(bounded("closed_form_consistency", worst, 1e-12, &format!("{n} single and {n} double points")))
}

fn time_reversal(ctx: &mut Ctx) -> Result<CheckResult> {
    let n = ctx.samples(1_000, 200);
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let (a, g, tk, t) = random_kick(&mut ctx.rng);
        let fwd = kicked_propagator(a, g, tk, t)?;
        let back = kicked_propagator(-a, -g, t - tk, t)?;
        worst = worst.max((back * fwd).max_diff(&Mat2::identity()));
        let beta = ctx.rng.gen_range(0.0..1.0);
        let r = rectangular_exact(-a, -beta, -g, t - tk, t) * rectangular_exact(a, beta, g, tk, t);
        worst = worst.max(r.max_diff(&Mat2::identity()));
        let (a, g, dk, t) = random_double(&mut ctx.rng);
        let rev = DoubleKickParams::new(t - dk.t2, t - dk.t1)?;
        let r = kick_antikick_propagator(a, -g, &rev, t)? * kick_antikick_propagator(a, g, &dk, t)?;
        worst = worst.max(r.max_diff(&Mat2::identity()));
    }
    Ok(bounded("time_reversal", worst, 1e-10, "forward then reversed evolution vs I"))
}

fn floquet(ctx: &Ctx) -> CheckResult {
    let k = ctx.samples(50, 10);
    let mut worst: f64 = 0.0;
    for i in 0..k {
        for j in 0..k {
            let alpha = PI * i as f64 / (k - 1) as f64;
            let gt = 2.0 * PI * j as f64 / (k - 1) as f64;
            let m = floquet_period_matrix(alpha, gt);
            let r = floquet_eigenphases(alpha, gt);
            for (lam, v) in r.eigenvalues.iter().zip(&r.eigenvectors) {
                let mv = m.apply(v);
                let res = (mv.a1 - lam * v.a1).norm().max((mv.a2 - lam * v.a2).norm());
                worst = worst.max(res);
            }
        }
    }
    bounded("floquet_eigenpairs", worst, 1e-10, &format!("|Mv - lambda v| on a {k}x{k} grid"))
}

fn rk4_free() -> Result<CheckResult> {
    let params = SystemParams::hydrogen_2s2p();
    let seq = PulseSequence::empty();
    let u = rk4_propagator(&seq, &params, 0.0, 700.0, &IntegratorConfig::default_for(&seq, &params, 700.0))?;
    Ok(bounded("rk4_free", u.max_diff(&free_propagator(&params, 700.0)), 1e-10, "V = 0 vs free propagator"))
}

fn rk4_rectangular(ctx: &mut Ctx) -> Result<CheckResult> {
    let n = ctx.samples(20, 3);
    let gamma = PI / 972.0;
    let params = SystemParams::from_gamma(gamma)?;
    let mut worst: f64 = 0.0;
    for _ in 0..n {
        let alpha = ctx.rng.gen_range(-PI..PI);
        let beta = ctx.rng.gen_range(1e-3..1.0);
        let tau = beta / gamma;
        let tk = 0.5 * tau + ctx.rng.gen_range(0.0..100.0);
        let t = tk + 0.5 * tau + ctx.rng.gen_range(0.0..100.0);
        let seq = PulseSequence::single(Pulse::rectangular(alpha, tau, tk));
        let u = rk4_propagator(&seq, &params, 0.0, t, &IntegratorConfig::with_dt(tau / 1e4))?;
        worst = worst.max(u.max_diff(&rectangular_exact(alpha, beta, gamma, tk, t)));
    }
    Ok(bounded("rk4_vs_rectangular", worst, 1e-8, &format!("{n} random pulses, dt = tau/1e4")))
}

fn no_to_numeric() -> Result<CheckResult> {
    let params = SystemParams::hydrogen_2s2p();
    let g = params.gamma;
    let mut worst: f64 = 0.0;
    for (alpha, tau) in [(FRAC_PI_2, 1.0), (1.1, 3.0), (-0.6, 2.0)] {
        let (tk, t) = (150.0, 300.0);
        let seq = PulseSequence::single(Pulse::gaussian(alpha, tau, tk));
        let cfg = IntegratorConfig::default_for(&seq, &params, t);
        let s = evolve_no_to_schrodinger_numeric(&seq, &params, t, &cfg)?;
        worst = worst.max(s.max_diff(&no_to_schrodinger(alpha, g * t)));
        let i = evolve_no_to_interaction_numeric(&seq, &params, t, &cfg)?;
        worst = worst.max(i.max_diff(&no_to_interaction_single(alpha, g * tau, g * tk)));
        let dk = DoubleKickParams::new(100.0, 400.0)?;
        let pair = PulseSequence::kick_antikick(PulseShape::Gaussian, alpha, tau, dk.t1, dk.t2);
        let i = evolve_no_to_interaction_numeric(&pair, &params, 500.0, &cfg)?;
        worst = worst.max(i.max_diff(&no_to_interaction_double(alpha, g * tau, g, &dk)));
        let s = evolve_no_to_schrodinger_numeric(&pair, &params, 500.0, &cfg)?;
        worst = worst.max(p2(&s));
    }
    Ok(bounded("no_to_numeric_vs_closed", worst, 1e-8, "narrow gaussians, both pictures"))
}

fn kicked_error_scaling() -> Result<CheckResult> {
    let params = SystemParams::hydrogen_2s2p();
    let ratios = logspace(1e-3, 3e-2, 8);
    let mut errs = Vec::new();
    for r in &ratios {
        let seq = PulseSequence::single(Pulse::gaussian(FRAC_PI_2, r * params.rabi_time, 150.0));
        let u =
            rk4_propagator(&seq, &params, 0.0, 300.0, &IntegratorConfig::default_for(&seq, &params, 300.0))?;
        errs.push(p2(&u) - 1.0);
    }
    let fit = fit_log_log(&ratios, &errs, 2.0)?;
    Ok(CheckResult {
        name: "kicked_error_scaling",
        passed: fit.within(0.1),
        metric: fit.slope,
        detail: "slope of |P2 - sin^2 alpha| vs tau/T_dE, expected 2 +- 0.1".into(),
    })
}

fn rk4_order() -> Result<CheckResult> {
    let params = SystemParams::hydrogen_2s2p();
    let seq = PulseSequence::single(Pulse::gaussian(FRAC_PI_2, 10.0, 150.0));
    let state = |dt: f64| -> Result<QubitState> {
        // coarse steps are the point here, so the unitarity guard is lifted
        let mut cfg = IntegratorConfig::with_dt(dt).sampled(300.0);
        cfg.unitarity_tolerance = f64::INFINITY;
        let ts = rk4_evolve(&seq, &params, &QubitState::ground(), 0.0, 300.0, &cfg)?;
        Ok(ts.final_state().unwrap_or_default())
    };
    let reference = state(0.05)?;
    let dts = [2.0, 1.0, 0.5, 0.25];
    let mut errs = Vec::new();
    for dt in dts {
        let s = state(dt)?;
        errs.push((s.a1 - reference.a1).norm().max((s.a2 - reference.a2).norm()));
    }
    let fit = fit_log_log(&dts, &errs, 4.0)?;
    Ok(CheckResult {
        name: "rk4_order",
        passed: fit.within(0.2),
        metric: fit.slope,
        detail: "global error slope under dt halving, expected 4 +- 0.2".into(),
    })
}

fn rectangular_correction_scaling() -> Result<CheckResult> {
    let (alpha, gamma, tk, t) = (FRAC_PI_2, 0.01, 20.0, 60.0);
    let betas = logspace(1e-3, 3e-2, 6);
    let mut resid = Vec::new();
    for &b in &betas {
        let exact = rectangular_exact(alpha, b, gamma, tk, t);
        let lead = kicked_propagator(alpha, gamma, tk, t)?
            + kick_correction_leading(alpha, b, gamma, t, PulseShape::Rectangular)?;
        resid.push(exact.max_diff(&lead));
    }
    let fit = fit_log_log(&betas, &resid, 2.0)?;
    Ok(CheckResult {
        name: "rectangular_correction_scaling",
        passed: fit.within(0.2),
        metric: fit.slope,
        detail: "slope of residual after the leading correction, expected 2 +- 0.2".into(),
    })
}

fn perturbative_onset() -> Result<CheckResult> {
    let gamma = PI / 972.0;
    let dk = DoubleKickParams::new(100.0, 350.0)?;
    let t = 700.0;
    let alphas = logspace(1e-3, 3e-2, 6);
    let (mut full, mut off) = (Vec::new(), Vec::new());
    for &a in &alphas {
        let ui = to_interaction_picture(gamma, t, &kick_antikick_propagator(a, gamma, &dk, t)?);
        let d = ui - no_to_interaction_double(a, 0.0, gamma, &dk);
        full.push(d.max_norm());
        off.push(d.m12.norm().max(d.m21.norm()));
    }
    let f2 = fit_log_log(&alphas, &full, 2.0)?;
    let f3 = fit_log_log(&alphas, &off, 3.0)?;
    Ok(CheckResult {
        name: "perturbative_onset",
        passed: f2.within(0.1) && f3.within(0.1),
        metric: f2.slope,
        detail: format!(
            "kick-antikick |U_I - U_I0| vs alpha: slope {:.4} (expect 2 +- 0.1), off-diagonal {:.4} (expect 3 +- 0.1)",
            f2.slope, f3.slope
        ),
    })
}

fn scenario_norms(quick: bool) -> Result<CheckResult> {
    let names: &[ScenarioName] = if quick { &[ScenarioName::Fig1] } else { &ScenarioName::ALL };
    let mut worst: f64 = 0.0;
    for &n in names {
        worst = worst.max(scenario(n, &Overrides::default())?.max_norm_defect);
    }
    Ok(bounded(
        "scenario_norm_defect",
        worst,
        1e-8,
        &format!("{} shipped scenarios at default dt", names.len()),
    ))
}

/// Runs the invariant suite. `quick` trims sample counts and skips the
/// integrator-heavy checks.
pub fn run_validation(opts: &ValidationOptions) -> ValidationReport {
    let mut ctx = Ctx { rng: ChaCha8Rng::seed_from_u64(opts.seed), quick: opts.quick, fault: opts.fault };
    let mut checks = vec![
        unitarity(&mut ctx),
        from_result("limit_web", limit_web(&ctx)),
        from_result("kick_interaction_identity", kick_identity(&mut ctx)),
        from_result("closed_form_consistency", closed_forms(&mut ctx)),
        from_result("time_reversal", time_reversal(&mut ctx)),
        floquet(&ctx),
        from_result("rk4_free", rk4_free()),
        from_result("rk4_vs_rectangular", rk4_rectangular(&mut ctx)),
        from_result("no_to_numeric_vs_closed", no_to_numeric()),
        from_result("rectangular_correction_scaling", rectangular_correction_scaling()),
        from_result("perturbative_onset", perturbative_onset()),
        from_result("scenario_norm_defect", scenario_norms(opts.quick)),
    ];
    if !opts.quick {
        checks.push(from_result("kicked_error_scaling", kicked_error_scaling()));
        checks.push(from_result("rk4_order", rk4_order()));
    }
    ValidationReport { checks }
}
