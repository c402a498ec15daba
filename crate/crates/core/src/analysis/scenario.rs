use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::{linspace, logspace, p2_closed_forms_double, p2_closed_forms_single, SweepSeries};
use crate::error::{Error, Result};
use crate::integrator::{
    evolve_no_to_interaction_numeric, evolve_no_to_schrodinger_numeric, rk4_evolve, rk4_propagator,
    rk4_propagators_at, IntegratorConfig, TimeSeries,
};
use crate::pulse::{Pulse, PulseSequence, PulseShape, SystemParams, GAUSSIAN_WINDOW_SIGMA};
use crate::su2::{Mat2, QubitState};

/// Observation times of the pulse-width sweep, in ps.
pub const FIG4_OBSERVATION_TIMES: [f64; 3] = [200.0, 300.0, 500.0];

const TIME_POINTS: usize = 400;
const WIDTH_POINTS: usize = 200;
const FIG4_WIDTH_RANGE: (f64, f64) = (1e-3, 0.3);
const FIG4_RIGHT_END: f64 = 1500.0;
const SINGLE_TK: f64 = 150.0;
const SINGLE_TF: f64 = 300.0;
const DOUBLE_T1: f64 = 100.0;
const DOUBLE_T2: f64 = 586.0;
const DOUBLE_TF: f64 = 700.0;
const TAU_SET: [f64; 3] = [1.0, 10.0, 100.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioName {
    Fig1,
    Fig2,
    Fig3,
    Fig4Left,
    Fig4Right,
    Fig5Left,
    Fig5Right,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 7] = [
        ScenarioName::Fig1,
        ScenarioName::Fig2,
        ScenarioName::Fig3,
        ScenarioName::Fig4Left,
        ScenarioName::Fig4Right,
        ScenarioName::Fig5Left,
        ScenarioName::Fig5Right,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ScenarioName::Fig1 => "fig1",
            ScenarioName::Fig2 => "fig2",
            ScenarioName::Fig3 => "fig3",
            ScenarioName::Fig4Left => "fig4_left",
            ScenarioName::Fig4Right => "fig4_right",
            ScenarioName::Fig5Left => "fig5_left",
            ScenarioName::Fig5Right => "fig5_right",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Self::ALL.into_iter().find(|n| n.name() == key).ok_or_else(|| Error::UnknownScenario(s.to_string()))
    }
}

/// Optional replacements for the declared scenario parameters. Times in ps,
/// `alpha` in rad.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Overrides {
    pub tau: Option<f64>,
    pub alpha: Option<f64>,
    pub tk: Option<f64>,
    pub t1: Option<f64>,
    pub t2: Option<f64>,
    pub tf: Option<f64>,
    pub rabi_time: Option<f64>,
}

impl Overrides {
    fn validate(&self) -> Result<()> {
        let times = [("tk", self.tk), ("t1", self.t1), ("t2", self.t2), ("tf", self.tf)];
        for (name, v) in times {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::InvalidInput(format!("{name} must be finite and >= 0, got {v}")));
                }
            }
        }
        for (name, v) in [("tau", self.tau), ("rabi_time", self.rabi_time)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(Error::InvalidInput(format!("{name} must be finite and > 0, got {v}")));
                }
            }
        }
        if let Some(a) = self.alpha {
            if !a.is_finite() {
                return Err(Error::InvalidInput(format!("alpha must be finite, got {a}")));
            }
        }
        Ok(())
    }

    fn reject(&self, scenario: ScenarioName, names: &[&str]) -> Result<()> {
        let set = |n: &str| match n {
            "tau" => self.tau.is_some(),
            "tk" => self.tk.is_some(),
            "t1" => self.t1.is_some(),
            "t2" => self.t2.is_some(),
            "tf" => self.tf.is_some(),
            _ => false,
        };
        match names.iter().find(|n| set(n)) {
            Some(n) => Err(Error::InvalidInput(format!("{n} is not a parameter of {scenario}"))),
            None => Ok(()),
        }
    }

    fn params(&self) -> Result<SystemParams> {
        match self.rabi_time {
            Some(t) => SystemParams::from_rabi_time(t),
            None => Ok(SystemParams::hydrogen_2s2p()),
        }
    }

    fn taus(&self) -> Vec<f64> {
        self.tau.map_or_else(|| TAU_SET.to_vec(), |t| vec![t])
    }
}

/// A P₂(t) curve from the integrator.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub label: String,
    pub tau: f64,
    pub alpha: f64,
    pub series: TimeSeries,
}

/// One table of output: a sweep plus `#` metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub name: String,
    pub metadata: Vec<(String, String)>,
    pub data: SweepSeries,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutput {
    pub name: ScenarioName,
    pub panels: Vec<Panel>,
    pub trajectories: Vec<Trajectory>,
    /// Largest final unitarity defect of all integrator runs.
    pub max_norm_defect: f64,
}

impl ScenarioOutput {
    pub fn trajectory(&self, tau: f64) -> Option<&Trajectory> {
        self.trajectories.iter().find(|t| t.tau == tau)
    }
}

pub fn scenario(name: ScenarioName, overrides: &Overrides) -> Result<ScenarioOutput> {
    overrides.validate()?;
    match name {
        ScenarioName::Fig1 => fig1(overrides),
        ScenarioName::Fig2 => double_trajectories(name, FRAC_PI_2, overrides),
        ScenarioName::Fig3 => double_trajectories(name, FRAC_PI_4, overrides),
        ScenarioName::Fig4Left => fig4_left(overrides),
        ScenarioName::Fig4Right => fig4_right(overrides),
        ScenarioName::Fig5Left => fig5(name, 10.0, overrides),
        ScenarioName::Fig5Right => fig5(name, 100.0, overrides),
    }
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

fn alpha_label(a: f64) -> String {
    for (k, s) in [(4.0, "pi/2"), (3.0, "3pi/8"), (2.0, "pi/4")] {
        if (a - k * PI / 8.0).abs() < 1e-15 {
            return s.to_string();
        }
    }
    fmt_num(a)
}

fn base_metadata(name: ScenarioName, params: &SystemParams) -> Vec<(String, String)> {
    vec![
        ("scenario".into(), name.to_string()),
        ("T_dE_ps".into(), fmt_num(params.rabi_time)),
        ("gamma_rad_per_ps".into(), fmt_num(params.gamma)),
        ("pulse_shape".into(), "gaussian".into()),
        ("window_sigma".into(), fmt_num(GAUSSIAN_WINDOW_SIGMA)),
        ("initial_state".into(), "(1,0)".into()),
    ]
}

fn trajectory(
    seq: &PulseSequence,
    params: &SystemParams,
    tf: f64,
) -> Result<(TimeSeries, IntegratorConfig, f64)> {
    let cfg = IntegratorConfig::default_for(seq, params, tf).sampled(tf / (TIME_POINTS - 1) as f64);
    let series = rk4_evolve(seq, params, &QubitState::ground(), 0.0, tf, &cfg)?;
    let u = rk4_propagator(seq, params, 0.0, tf, &cfg)?;
    Ok((series, cfg, u.unitarity_defect()))
}

fn trajectories_panel(
    name: ScenarioName,
    params: &SystemParams,
    tf: f64,
    alpha: f64,
    runs: Vec<(f64, PulseSequence)>,
    mut metadata: Vec<(String, String)>,
) -> Result<ScenarioOutput> {
    let results: Vec<_> = runs
        .par_iter()
        .map(|(tau, seq)| trajectory(seq, params, tf).map(|r| (*tau, r)))
        .collect::<Result<_>>()?;
    let mut trajectories = Vec::new();
    let mut data = SweepSeries::new("t_ps", results[0].1 .0.times.clone());
    let mut defect: f64 = 0.0;
    for (tau, (series, cfg, d)) in results {
        metadata.push((format!("dt_ps[tau={}]", fmt_num(tau)), fmt_num(cfg.dt)));
        data.push_column(format!("P2_tau={}", fmt_num(tau)), series.p2.clone())?;
        defect = defect.max(d);
        trajectories.push(Trajectory { label: format!("tau={}", fmt_num(tau)), tau, alpha, series });
    }
    metadata.push(("time_grid".into(), format!("{TIME_POINTS} linear points on [0, {}] ps", fmt_num(tf))));
    let panel = Panel { name: name.to_string(), metadata, data };
    Ok(ScenarioOutput { name, panels: vec![panel], trajectories, max_norm_defect: defect })
}

fn fig1(o: &Overrides) -> Result<ScenarioOutput> {
    o.reject(ScenarioName::Fig1, &["t1", "t2"])?;
    let params = o.params()?;
    let alpha = o.alpha.unwrap_or(FRAC_PI_2);
    let tk = o.tk.unwrap_or(SINGLE_TK);
    let tf = o.tf.unwrap_or(SINGLE_TF);
    let runs = o
        .taus()
        .into_iter()
        .map(|tau| (tau, PulseSequence::single(Pulse::gaussian(alpha, tau, tk))))
        .collect();
    let mut meta = base_metadata(ScenarioName::Fig1, &params);
    meta.extend([
        ("alpha".into(), alpha_label(alpha)),
        ("T_k_ps".into(), fmt_num(tk)),
        ("T_f_ps".into(), fmt_num(tf)),
    ]);
    trajectories_panel(ScenarioName::Fig1, &params, tf, alpha, runs, meta)
}

fn double_trajectories(name: ScenarioName, default_alpha: f64, o: &Overrides) -> Result<ScenarioOutput> {
    o.reject(name, &["tk"])?;
    let params = o.params()?;
    let alpha = o.alpha.unwrap_or(default_alpha);
    let t1 = o.t1.unwrap_or(DOUBLE_T1);
    let t2 = o.t2.unwrap_or(DOUBLE_T2);
    let tf = o.tf.unwrap_or(DOUBLE_TF);
    if t2 < t1 {
        return Err(Error::InvalidInput(format!("need t2 >= t1, got t1 = {t1}, t2 = {t2}")));
    }
    let runs = o
        .taus()
        .into_iter()
        .map(|tau| (tau, PulseSequence::kick_antikick(PulseShape::Gaussian, alpha, tau, t1, t2)))
        .collect();
    let mut meta = base_metadata(name, &params);
    meta.extend([
        ("alpha".into(), alpha_label(alpha)),
        ("T_1_ps".into(), fmt_num(t1)),
        ("T_2_ps".into(), fmt_num(t2)),
        ("T_f_ps".into(), fmt_num(tf)),
        ("second_pulse".into(), "-alpha".into()),
    ]);
    trajectories_panel(name, &params, tf, alpha, runs, meta)
}

struct SinglePoint {
    p2: f64,
    p2_s: f64,
    p2_i: f64,
    defect: f64,
}

fn p2_of(u: &Mat2) -> f64 {
    u.m21.norm_sqr()
}

fn single_point(seq: &PulseSequence, params: &SystemParams, tf: f64) -> Result<SinglePoint> {
    let cfg = IntegratorConfig::default_for(seq, params, tf);
    let u = rk4_propagator(seq, params, 0.0, tf, &cfg)?;
    let s = evolve_no_to_schrodinger_numeric(seq, params, tf, &cfg)?;
    let i = evolve_no_to_interaction_numeric(seq, params, tf, &cfg)?;
    Ok(SinglePoint { p2: p2_of(&u), p2_s: p2_of(&s), p2_i: p2_of(&i), defect: u.unitarity_defect() })
}

fn fig4_left(o: &Overrides) -> Result<ScenarioOutput> {
    let name = ScenarioName::Fig4Left;
    o.reject(name, &["tau", "t1", "t2"])?;
    let params = o.params()?;
    let alpha = o.alpha.unwrap_or(FRAC_PI_2);
    let tk = o.tk.unwrap_or(SINGLE_TK);
    let tfs: Vec<f64> = o.tf.map_or_else(|| FIG4_OBSERVATION_TIMES.to_vec(), |t| vec![t]);
    let ratios = logspace(FIG4_WIDTH_RANGE.0, FIG4_WIDTH_RANGE.1, WIDTH_POINTS);
    let taus: Vec<f64> = ratios.iter().map(|r| r * params.rabi_time).collect();

    let mut data = SweepSeries::new("tau_over_T_dE", ratios.clone());
    data.push_column("tau_ps", taus.clone())?;
    let mut defect: f64 = 0.0;
    for &tf in &tfs {
        let pts: Vec<SinglePoint> = taus
            .par_iter()
            .map(|&tau| single_point(&PulseSequence::single(Pulse::gaussian(alpha, tau, tk)), &params, tf))
            .collect::<Result<_>>()?;
        defect = pts.iter().map(|p| p.defect).fold(defect, f64::max);
        let closed: Vec<_> = taus
            .iter()
            .map(|&tau| p2_closed_forms_single(alpha, params.gamma * tau, params.gamma * tf))
            .collect();
        let tag = fmt_num(tf);
        data.push_column(format!("P2_Tf={tag}"), pts.iter().map(|p| p.p2).collect())?;
        data.push_column(format!("P2_noTO_schrodinger_Tf={tag}"), pts.iter().map(|p| p.p2_s).collect())?;
        data.push_column(format!("P2_noTO_interaction_Tf={tag}"), pts.iter().map(|p| p.p2_i).collect())?;
        data.push_column(format!("P2_closed_Tf={tag}"), closed.iter().map(|c| c.0).collect())?;
        data.push_column(
            format!("P2_noTO_schrodinger_closed_Tf={tag}"),
            closed.iter().map(|c| c.1).collect(),
        )?;
        data.push_column(
            format!("P2_noTO_interaction_closed_Tf={tag}"),
            closed.iter().map(|c| c.2).collect(),
        )?;
    }

    let mut meta = base_metadata(name, &params);
    meta.extend([
        ("alpha".into(), alpha_label(alpha)),
        ("T_k_ps".into(), fmt_num(tk)),
        ("T_f_ps".into(), tfs.iter().map(|t| fmt_num(*t)).collect::<Vec<_>>().join(" ")),
        ("T_f_choice".into(), "observation times chosen here; not stated with the figure".into()),
        (
            "width_grid".into(),
            format!(
                "{WIDTH_POINTS} log-spaced points of tau/T_dE on [{}, {}]",
                FIG4_WIDTH_RANGE.0, FIG4_WIDTH_RANGE.1
            ),
        ),
        ("evolution_window".into(), "[0, T_f]; pulse tails outside are cut off".into()),
    ]);
    let panel = Panel { name: name.to_string(), metadata: meta, data };
    Ok(ScenarioOutput { name, panels: vec![panel], trajectories: Vec::new(), max_norm_defect: defect })
}

fn fig4_right(o: &Overrides) -> Result<ScenarioOutput> {
    let name = ScenarioName::Fig4Right;
    o.reject(name, &["t1", "t2"])?;
    let params = o.params()?;
    let alpha = o.alpha.unwrap_or(FRAC_PI_2);
    let tk = o.tk.unwrap_or(SINGLE_TK);
    let end = o.tf.unwrap_or(FIG4_RIGHT_END);
    if !(end > tk) {
        return Err(Error::InvalidInput(format!("need tf > tk, got tf = {end}, tk = {tk}")));
    }
    let tfs = linspace(tk, end, TIME_POINTS);
    let mut data = SweepSeries::new("T_f_ps", tfs.clone());
    let mut defect: f64 = 0.0;
    for tau in o.taus() {
        let seq = PulseSequence::single(Pulse::gaussian(alpha, tau, tk));
        let cfg = IntegratorConfig::default_for(&seq, &params, end);
        let us = rk4_propagators_at(&seq, &params, 0.0, &tfs, &cfg)?;
        defect = us.iter().map(Mat2::unitarity_defect).fold(defect, f64::max);
        let no_to: Vec<(f64, f64)> = tfs
            .par_iter()
            .map(|&tf| {
                let s = evolve_no_to_schrodinger_numeric(&seq, &params, tf, &cfg)?;
                let i = evolve_no_to_interaction_numeric(&seq, &params, tf, &cfg)?;
                Ok((p2_of(&s), p2_of(&i)))
            })
            .collect::<Result<_>>()?;
        let beta = params.gamma * tau;
        let closed: Vec<_> =
            tfs.iter().map(|&tf| p2_closed_forms_single(alpha, beta, params.gamma * tf)).collect();
        let tag = fmt_num(tau);
        data.push_column(format!("P2_tau={tag}"), us.iter().map(p2_of).collect())?;
        data.push_column(format!("P2_noTO_schrodinger_tau={tag}"), no_to.iter().map(|p| p.0).collect())?;
        data.push_column(format!("P2_noTO_interaction_tau={tag}"), no_to.iter().map(|p| p.1).collect())?;
        data.push_column(
            format!("P2_noTO_schrodinger_closed_tau={tag}"),
            closed.iter().map(|c| c.1).collect(),
        )?;
        data.push_column(
            format!("P2_noTO_interaction_closed_tau={tag}"),
            closed.iter().map(|c| c.2).collect(),
        )?;
    }
    let mut meta = base_metadata(name, &params);
    meta.extend([
        ("alpha".into(), alpha_label(alpha)),
        ("T_k_ps".into(), fmt_num(tk)),
        ("T_f_grid".into(), format!("{TIME_POINTS} linear points on [{}, {}] ps", fmt_num(tk), fmt_num(end))),
        ("T_f_end_choice".into(), "upper end of the T_f axis chosen here".into()),
    ]);
    let panel = Panel { name: name.to_string(), metadata: meta, data };
    Ok(ScenarioOutput { name, panels: vec![panel], trajectories: Vec::new(), max_norm_defect: defect })
}

struct DoublePoint {
    p2: f64,
    p2_s: f64,
    p2_i: f64,
    defect: f64,
}

fn double_point(
    params: &SystemParams,
    alpha: f64,
    tau: f64,
    t1: f64,
    ts: f64,
    margin: f64,
) -> Result<DoublePoint> {
    let t2 = t1 + ts;
    let tf = t2 + margin;
    let seq = PulseSequence::kick_antikick(PulseShape::Gaussian, alpha, tau, t1, t2);
    let cfg = IntegratorConfig::default_for(&seq, params, tf);
    let u = rk4_propagator(&seq, params, 0.0, tf, &cfg)?;
    let s = evolve_no_to_schrodinger_numeric(&seq, params, tf, &cfg)?;
    let i = evolve_no_to_interaction_numeric(&seq, params, tf, &cfg)?;
    Ok(DoublePoint { p2: p2_of(&u), p2_s: p2_of(&s), p2_i: p2_of(&i), defect: u.unitarity_defect() })
}

fn fig5(name: ScenarioName, default_tau: f64, o: &Overrides) -> Result<ScenarioOutput> {
    o.reject(name, &["tk", "t2", "tf"])?;
    let params = o.params()?;
    let tau = o.tau.unwrap_or(default_tau);
    let alphas: Vec<f64> = o.alpha.map_or_else(|| vec![FRAC_PI_2, 3.0 * PI / 8.0, FRAC_PI_4], |a| vec![a]);
    let margin = GAUSSIAN_WINDOW_SIGMA * tau;
    let t1 = o.t1.unwrap_or(DOUBLE_T1.max(margin));
    let tss = linspace(0.0, params.rabi_time, TIME_POINTS);
    let beta = params.gamma * tau;

    let mut data = SweepSeries::new("T_s_ps", tss.clone());
    data.push_column("gamma_T_s", tss.iter().map(|t| params.gamma * t).collect())?;
    let mut defect: f64 = 0.0;
    for &alpha in &alphas {
        let pts: Vec<DoublePoint> = tss
            .par_iter()
            .map(|&ts| double_point(&params, alpha, tau, t1, ts, margin))
            .collect::<Result<_>>()?;
        defect = pts.iter().map(|p| p.defect).fold(defect, f64::max);
        let closed: Vec<_> =
            tss.iter().map(|&ts| p2_closed_forms_double(alpha, beta, params.gamma * ts)).collect();
        let tag = alpha_label(alpha);
        data.push_column(format!("P2_alpha={tag}"), pts.iter().map(|p| p.p2).collect())?;
        data.push_column(format!("P2_noTO_interaction_alpha={tag}"), pts.iter().map(|p| p.p2_i).collect())?;
        data.push_column(format!("P2_noTO_schrodinger_alpha={tag}"), pts.iter().map(|p| p.p2_s).collect())?;
        data.push_column(format!("P2_closed_alpha={tag}"), closed.iter().map(|c| c.0).collect())?;
        data.push_column(
            format!("P2_noTO_interaction_closed_alpha={tag}"),
            closed.iter().map(|c| c.1).collect(),
        )?;
    }
    let mut meta = base_metadata(name, &params);
    meta.extend([
        ("tau_ps".into(), fmt_num(tau)),
        ("alpha".into(), alphas.iter().map(|a| alpha_label(*a)).collect::<Vec<_>>().join(" ")),
        ("T_1_ps".into(), fmt_num(t1)),
        ("T_f".into(), format!("T_2 + {} ps", fmt_num(margin))),
        ("second_pulse".into(), "-alpha".into()),
        ("T_s_grid".into(), format!("{TIME_POINTS} linear points on [0, T_dE]")),
        ("grid_choice".into(), "T_s grid, T_1 and T_f chosen here; not stated with the figure".into()),
    ]);
    let panel = Panel { name: name.to_string(), metadata: meta, data };
    Ok(ScenarioOutput { name, panels: vec![panel], trajectories: Vec::new(), max_norm_defect: defect })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for n in ScenarioName::ALL {
            assert_eq!(n.name().parse::<ScenarioName>().unwrap(), n);
        }
        assert_eq!("FIG4-LEFT".parse::<ScenarioName>().unwrap(), ScenarioName::Fig4Left);
        assert!(matches!("fig6".parse::<ScenarioName>(), Err(Error::UnknownScenario(_))));
    }

    #[test]
    fn overrides_are_checked() {
        let bad = Overrides { tau: Some(-1.0), ..Default::default() };
        assert!(scenario(ScenarioName::Fig1, &bad).is_err());
        let foreign = Overrides { t2: Some(10.0), ..Default::default() };
        assert!(scenario(ScenarioName::Fig1, &foreign).is_err());
        let swept = Overrides { tau: Some(10.0), ..Default::default() };
        assert!(scenario(ScenarioName::Fig4Left, &swept).is_err());
    }

    #[test]
    fn fig1_single_width() {
        let o = Overrides { tau: Some(10.0), ..Default::default() };
        let out = scenario(ScenarioName::Fig1, &o).unwrap();
        let t = out.trajectory(10.0).unwrap();
        assert_eq!(t.series.len(), TIME_POINTS);
        assert_eq!(*t.series.times.last().unwrap(), 300.0);
        assert!((t.series.final_p2().unwrap() - 0.9977).abs() < 2e-4);
        assert!(out.max_norm_defect < 1e-8);
        assert_eq!(out.panels[0].data.columns.len(), 1);
    }

    #[test]
    fn alpha_labels() {
        assert_eq!(alpha_label(FRAC_PI_2), "pi/2");
        assert_eq!(alpha_label(3.0 * PI / 8.0), "3pi/8");
        assert_eq!(alpha_label(0.5), "0.5");
    }
}
