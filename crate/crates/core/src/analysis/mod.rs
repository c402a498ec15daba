//! Time-ordering metrics, closed-form probability comparisons, scaling-law
//! fits, figure scenarios and the validation suite.

mod scenario;
mod validate;

pub use scenario::{
    scenario, Overrides, Panel, ScenarioName, ScenarioOutput, Trajectory, FIG4_OBSERVATION_TIMES,
};
pub use validate::{run_validation, CheckResult, Fault, ValidationOptions, ValidationReport};

use std::fmt;

use crate::error::{Error, Result};
use crate::su2::{probabilities, Mat2, QubitState, PROBABILITY_UNITARITY_TOLERANCE};

/// `(P₂, P₂⁰, P_I2⁰)` after one pulse observed at `T_f`:
/// `sin²α`, `α²/ξ² sin²ξ` with `ξ² = α² + (γT_f)²`, and `sin²(αe^{−β²})`.
pub fn p2_closed_forms_single(alpha: f64, beta: f64, gamma_tf: f64) -> (f64, f64, f64) {
    let p2 = alpha.sin().powi(2);
    let xi = alpha.hypot(gamma_tf);
    let p2_s = if xi == 0.0 { 0.0 } else { (alpha * xi.sin() / xi).powi(2) };
    let p2_i = (alpha * (-beta * beta).exp()).sin().powi(2);
    (p2, p2_s, p2_i)
}

/// `(P₂, P_I2⁰, P₂⁰)` after a pulse–antipulse pair separated by `T_s`:
/// `sin²γT_s sin²2α`, `sin²(2αe^{−β²} sin γT_s)` and 0.
pub fn p2_closed_forms_double(alpha: f64, beta: f64, gamma_ts: f64) -> (f64, f64, f64) {
    let s = gamma_ts.sin();
    let p2 = (s * (2.0 * alpha).sin()).powi(2);
    let p2_i = (2.0 * alpha * (-beta * beta).exp() * s).sin().powi(2);
    (p2, p2_i, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Picture {
    Schrodinger,
    Interaction,
}

impl fmt::Display for Picture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Picture::Schrodinger => "schrodinger",
            Picture::Interaction => "interaction",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeOrderingReport {
    /// ‖U − U⁰‖_max.
    pub norm_diff: f64,
    /// P₂(U) − P₂(U⁰).
    pub delta_p2: f64,
    pub picture: Picture,
}

/// Difference between an evolution with time ordering `u` and one without,
/// `u0`, both expressed in `picture`.
pub fn time_ordering_report(
    u: &Mat2,
    u0: &Mat2,
    initial: &QubitState,
    picture: Picture,
) -> Result<TimeOrderingReport> {
    for (name, m) in [("U", u), ("U0", u0)] {
        let d = m.unitarity_defect();
        if !(d <= PROBABILITY_UNITARITY_TOLERANCE) {
            return Err(Error::InvalidInput(format!("{name} is not unitary (defect {d:e})")));
        }
    }
    let (_, p2) = probabilities(u, initial)?;
    let (_, p2_0) = probabilities(u0, initial)?;
    Ok(TimeOrderingReport { norm_diff: u.max_diff(u0), delta_p2: p2 - p2_0, picture })
}

/// Observables tabulated against one swept parameter.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepSeries {
    pub parameter: String,
    pub values: Vec<f64>,
    pub columns: Vec<(String, Vec<f64>)>,
}

impl SweepSeries {
    pub fn new(parameter: impl Into<String>, values: Vec<f64>) -> Self {
        Self { parameter: parameter.into(), values, columns: Vec::new() }
    }

    pub fn push_column(&mut self, name: impl Into<String>, data: Vec<f64>) -> Result<()> {
        let name = name.into();
        if data.len() != self.values.len() {
            return Err(Error::InvalidInput(format!(
                "column `{name}` has {} rows, expected {}",
                data.len(),
                self.values.len()
            )));
        }
        self.columns.push((name, data));
        Ok(())
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|(n, _)| n == name).map(|(_, d)| d.as_slice())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    /// RMS residual of the straight-line fit in log-log space.
    pub residual: f64,
    pub expected_slope: f64,
}

impl ScalingFit {
    pub fn within(&self, tol: f64) -> bool {
        (self.slope - self.expected_slope).abs() <= tol
    }
}

/// Least-squares line through `(ln x, ln |y|)`.
pub fn fit_log_log(x: &[f64], y: &[f64], expected_slope: f64) -> Result<ScalingFit> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput("x and y differ in length".into()));
    }
    if x.len() < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 points, got {}", x.len())));
    }
    if let Some(bad) = x.iter().chain(y).find(|v| !(v.abs() > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidInput(format!("log-log fit needs nonzero finite values, got {bad}")));
    }
    if x.iter().any(|&v| v <= 0.0) {
        return Err(Error::InvalidInput("swept parameter must be positive".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("swept parameter has no spread".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual =
        (lx.iter().zip(&ly).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum::<f64>() / n).sqrt();
    Ok(ScalingFit { slope, intercept, residual, expected_slope })
}

/// Fits `column` of `series` against its swept parameter.
pub fn error_scaling_fit(series: &SweepSeries, column: &str, expected_slope: f64) -> Result<ScalingFit> {
    let y = series.column(column).ok_or_else(|| Error::InvalidInput(format!("no column `{column}`")))?;
    fit_log_log(&series.values, y, expected_slope)
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    linspace(a.ln(), b.ln(), n).into_iter().map(f64::exp).collect()
}
