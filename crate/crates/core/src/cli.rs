//! Command-line front end: ad-hoc propagation, figure scenarios, the
//! validation suite and Floquet tables, all written as CSV.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{error::ErrorKind, Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::analysis::{run_validation, scenario, Fault, Overrides, Panel, ScenarioName, ValidationOptions};
use crate::error::{Error, Result};
use crate::integrator::{
    evolve_no_to_interaction_numeric, evolve_no_to_schrodinger_numeric, rk4_propagator_series,
    IntegratorConfig,
};
use crate::propagators::floquet_eigenphases;
use crate::pulse::{Pulse, PulseSequence, PulseShape, SystemParams};

/// Simulated time beyond which the hydrogen 2p state has decayed.
const HYDROGEN_LIFETIME_PS: f64 = 1600.0;
/// Widths below this couple hydrogen 2s to 3p.
const MIN_SAFE_TAU_PS: f64 = 1e-3;
const DEFAULT_SAMPLES: usize = 400;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "kicked-qubit",
    version,
    about = "Pulsed two-level system propagators and time-ordering diagnostics"
)]
pub struct Cli {
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,

    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate a pulse sequence and tabulate P1, P2 and the no-time-ordering probabilities.
    Propagate(PropagateArgs),
    /// Regenerate the data behind one figure.
    Figure(FigureArgs),
    /// Run the invariant suite.
    Validate(ValidateArgs),
    /// Floquet eigenphases of a periodically kicked qubit.
    Floquet(FloquetArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    #[value(name = "hydrogen-2s2p")]
    Hydrogen2s2p,
    Unit,
}

#[derive(Debug, Clone, Args)]
#[group(id = "system", required = true, multiple = false)]
pub struct SystemArgs {
    /// Named parameter set.
    #[arg(long, value_enum)]
    pub preset: Option<Preset>,
    /// γ = ΔE/2ħ in rad/ps.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Rabi time T_ΔE in ps.
    #[arg(long)]
    pub rabi_time: Option<f64>,
    /// Level splitting in eV.
    #[arg(long)]
    pub delta_e_ev: Option<f64>,
}

impl SystemArgs {
    fn params(&self) -> Result<SystemParams> {
        match (self.preset, self.gamma, self.rabi_time, self.delta_e_ev) {
            (Some(Preset::Hydrogen2s2p), ..) => Ok(SystemParams::hydrogen_2s2p()),
            (Some(Preset::Unit), ..) => Ok(SystemParams::unit()),
            (_, Some(g), ..) => SystemParams::from_gamma(g),
            (_, _, Some(t), _) => SystemParams::from_rabi_time(t),
            (_, _, _, Some(e)) => SystemParams::from_splitting_ev(e),
            _ => Err(Error::InvalidInput("no system specified".into())),
        }
    }

    fn describe(&self) -> String {
        match (self.preset, self.gamma, self.rabi_time, self.delta_e_ev) {
            (Some(Preset::Hydrogen2s2p), ..) => "preset hydrogen-2s2p".into(),
            (Some(Preset::Unit), ..) => "preset unit".into(),
            (_, Some(g), ..) => format!("gamma {g}"),
            (_, _, Some(t), _) => format!("rabi-time {t}"),
            (_, _, _, Some(e)) => format!("delta-e-ev {e}"),
            _ => String::new(),
        }
    }

    fn is_hydrogen(&self) -> bool {
        self.preset == Some(Preset::Hydrogen2s2p)
    }
}

#[derive(Debug, Args)]
pub struct PropagateArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// shape:alpha=<rad>,tau=<ps>,center=<ps>; repeatable. alpha accepts pi fractions such as pi/2.
    #[arg(long = "pulse", value_parser = parse_pulse)]
    pub pulses: Vec<Pulse>,
    /// End of the time window in ps; the window starts at 0.
    #[arg(long)]
    pub t_end: f64,
    /// Integrator step in ps (default min(tau/50, T_dE/2000)).
    #[arg(long)]
    pub dt: Option<f64>,
    /// Row spacing in ps (default: 400 rows).
    #[arg(long)]
    pub sample_interval: Option<f64>,
    /// Gaussian truncation in widths.
    #[arg(long, default_value_t = 6.0)]
    pub window_sigma: f64,
    /// Output file (default: stdout).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    /// fig1, fig2, fig3, fig4_left, fig4_right, fig5_left or fig5_right.
    pub name: String,
    /// Pulse width in ps (replaces the figure's width set).
    #[arg(long)]
    pub tau: Option<f64>,
    /// Pulse strength in rad.
    #[arg(long, value_parser = parse_angle)]
    pub alpha: Option<f64>,
    /// Single-pulse centre in ps.
    #[arg(long)]
    pub tk: Option<f64>,
    /// First pulse centre in ps.
    #[arg(long)]
    pub t1: Option<f64>,
    /// Second pulse centre in ps.
    #[arg(long)]
    pub t2: Option<f64>,
    /// Observation time in ps.
    #[arg(long)]
    pub tf: Option<f64>,
    /// Rabi time T_ΔE in ps (default 972).
    #[arg(long)]
    pub rabi_time: Option<f64>,
    /// Directory receiving one CSV per panel.
    #[arg(long, short, default_value = ".")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FaultArg {
    U0iSign,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Reduced sample counts; skips the integrator-heavy checks.
    #[arg(long)]
    pub quick: bool,
    /// Deliberately break one formula to confirm the suite notices.
    #[arg(long, value_enum)]
    pub inject_fault: Option<FaultArg>,
}

#[derive(Debug, Args)]
pub struct FloquetArgs {
    #[command(flatten)]
    pub system: SystemArgs,
    /// Kick strength per period (rad, pi fractions allowed).
    #[arg(long, value_parser = parse_angle)]
    pub alpha: f64,
    /// Kick period in ps.
    #[arg(long, conflicts_with = "period_range")]
    pub period: Option<f64>,
    /// start,end,count sweep of the period in ps.
    #[arg(long, value_parser = parse_range)]
    pub period_range: Option<(f64, f64, usize)>,
    /// Output file (default: stdout).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

/// Angle such as `1.2`, `pi`, `-pi/4`, `3pi/8` or `3*pi/8`.
pub fn parse_angle(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim().to_ascii_lowercase();
    let Some(pos) = t.find("pi") else {
        return t.parse::<f64>().map_err(|e| format!("bad angle `{s}`: {e}"));
    };
    let head = t[..pos].trim().trim_end_matches('*').trim();
    let coef = match head {
        "" | "+" => 1.0,
        "-" => -1.0,
        h => h.parse::<f64>().map_err(|e| format!("bad angle `{s}`: {e}"))?,
    };
    let tail = t[pos + 2..].trim();
    let div = if tail.is_empty() {
        1.0
    } else {
        let d =
            tail.strip_prefix('/').ok_or_else(|| format!("bad angle `{s}`: expected /<number> after pi"))?;
        d.trim().parse::<f64>().map_err(|e| format!("bad angle `{s}`: {e}"))?
    };
    let v = coef * std::f64::consts::PI / div;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("bad angle `{s}`"))
    }
}

/// `shape:alpha=<rad>,tau=<ps>,center=<ps>`.
pub fn parse_pulse(s: &str) -> std::result::Result<Pulse, String> {
    let (shape, rest) =
        s.split_once(':').ok_or_else(|| format!("bad pulse `{s}`: expected shape:key=value,..."))?;
    let shape: PulseShape = shape.parse().map_err(|e: Error| e.to_string())?;
    let (mut alpha, mut tau, mut center) = (None, None, None);
    for kv in rest.split(',').filter(|kv| !kv.trim().is_empty()) {
        let (k, v) = kv.split_once('=').ok_or_else(|| format!("bad pulse field `{kv}`"))?;
        let num = || v.trim().parse::<f64>().map_err(|e| format!("bad value for {k}: {e}"));
        match k.trim() {
            "alpha" => alpha = Some(parse_angle(v)?),
            "tau" => tau = Some(num()?),
            "center" | "centre" | "tk" => center = Some(num()?),
            other => return Err(format!("unknown pulse field `{other}`")),
        }
    }
    let alpha = alpha.ok_or("pulse needs alpha")?;
    let center = center.ok_or("pulse needs center")?;
    let tau = match (shape, tau) {
        (PulseShape::IdealKick, t) => t.unwrap_or(0.0),
        (_, Some(t)) => t,
        (_, None) => return Err("finite pulses need tau".into()),
    };
    if center < 0.0 {
        return Err(format!("pulse center must be >= 0, got {center}"));
    }
    Pulse::new(shape, alpha, tau, center).map_err(|e| e.to_string())
}

fn parse_range(s: &str) -> std::result::Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [a, b, n] = parts.as_slice() else {
        return Err(format!("bad range `{s}`: expected start,end,count"));
    };
    let a: f64 = a.parse().map_err(|e| format!("bad start: {e}"))?;
    let b: f64 = b.parse().map_err(|e| format!("bad end: {e}"))?;
    let n: usize = n.parse().map_err(|e| format!("bad count: {e}"))?;
    if n < 1 {
        return Err("count must be >= 1".into());
    }
    Ok((a, b, n))
}

/// Fixed 17-significant-digit rendering.
pub fn fmt_value(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `#` metadata lines, a header row and the data rows.
pub fn write_csv<W: Write>(
    out: W,
    metadata: &[(String, String)],
    header: &[String],
    rows: &[Vec<f64>],
) -> io::Result<()> {
    let mut out = out;
    for (k, v) in metadata {
        writeln!(out, "# {k}: {v}")?;
    }
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|v| fmt_value(*v)))?;
    }
    w.flush()
}

fn panel_rows(panel: &Panel) -> (Vec<String>, Vec<Vec<f64>>) {
    let d = &panel.data;
    let mut header = vec![d.parameter.clone()];
    header.extend(d.columns.iter().map(|(n, _)| n.clone()));
    let rows = (0..d.len())
        .map(|i| std::iter::once(d.values[i]).chain(d.columns.iter().map(|(_, c)| c[i])).collect())
        .collect();
    (header, rows)
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Numerical(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(format!("i/o error: {e}"))
    }
}

type CmdResult = std::result::Result<(), Failure>;

fn open_output<'a>(
    path: &Option<PathBuf>,
    stdout: &'a mut (dyn Write + Send),
) -> io::Result<Box<dyn Write + 'a>> {
    Ok(match path {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(stdout),
    })
}

fn cmd_propagate(
    args: &PropagateArgs,
    stdout: &mut (dyn Write + Send),
    stderr: &mut (dyn Write + Send),
) -> CmdResult {
    let params = args.system.params()?;
    if !(args.t_end > 0.0 && args.t_end.is_finite()) {
        return Err(Failure::Usage(format!("--t-end must be > 0, got {}", args.t_end)));
    }
    let seq = PulseSequence::new(args.pulses.clone());
    seq.validate()?;
    if args.system.is_hydrogen() && args.t_end > HYDROGEN_LIFETIME_PS {
        writeln!(
            stderr,
            "warning: {} ps exceeds the 2p lifetime ({HYDROGEN_LIFETIME_PS} ps); decay is not modelled",
            args.t_end
        )?;
    }
    if seq.finite_pulses().any(|p| p.tau < MIN_SAFE_TAU_PS) {
        writeln!(stderr, "warning: pulses shorter than {MIN_SAFE_TAU_PS} ps would also drive the 3p level")?;
    }

    let mut cfg = IntegratorConfig::default_for(&seq, &params, args.t_end);
    if let Some(dt) = args.dt {
        cfg.dt = dt;
    }
    cfg.window_sigma = args.window_sigma;
    let interval = args.sample_interval.unwrap_or(args.t_end / (DEFAULT_SAMPLES - 1) as f64);
    let cfg = cfg.sampled(interval);
    let series = rk4_propagator_series(&seq, &params, 0.0, args.t_end, &cfg)?;

    let rows: Vec<Vec<f64>> = series
        .times
        .par_iter()
        .zip(&series.propagators)
        .map(|(&t, u)| -> Result<Vec<f64>> {
            let s = evolve_no_to_schrodinger_numeric(&seq, &params, t, &cfg)?;
            let i = evolve_no_to_interaction_numeric(&seq, &params, t, &cfg)?;
            Ok(vec![
                t,
                u.m11.norm_sqr(),
                u.m21.norm_sqr(),
                s.m21.norm_sqr(),
                i.m21.norm_sqr(),
                u.m11.re,
                u.m11.im,
                u.m12.re,
                u.m12.im,
            ])
        })
        .collect::<Result<_>>()?;

    let header: Vec<String> = [
        "t_ps",
        "P1",
        "P2",
        "P2_noTO_schrodinger",
        "P2_noTO_interaction",
        "Re_U11",
        "Im_U11",
        "Re_U12",
        "Im_U12",
    ]
    .map(String::from)
    .to_vec();
    let mut meta = vec![
        ("system".to_string(), args.system.describe()),
        ("gamma_rad_per_ps".into(), format!("{}", params.gamma)),
        ("T_dE_ps".into(), format!("{}", params.rabi_time)),
        ("dt_ps".into(), format!("{}", cfg.dt)),
        ("window_sigma".into(), format!("{}", cfg.window_sigma)),
        ("initial_state".into(), "(1,0)".into()),
    ];
    for p in &seq.pulses {
        meta.push((
            "pulse".into(),
            format!("{}:alpha={},tau={},center={}", p.shape, p.alpha, p.tau, p.center),
        ));
    }
    let out = open_output(&args.output, stdout)?;
    write_csv(out, &meta, &header, &rows)?;
    Ok(())
}

fn cmd_figure(args: &FigureArgs, stdout: &mut (dyn Write + Send)) -> CmdResult {
    let name: ScenarioName = args.name.parse()?;
    let overrides = Overrides {
        tau: args.tau,
        alpha: args.alpha,
        tk: args.tk,
        t1: args.t1,
        t2: args.t2,
        tf: args.tf,
        rabi_time: args.rabi_time,
    };
    let out = scenario(name, &overrides)?;
    std::fs::create_dir_all(&args.output_dir)?;
    for panel in &out.panels {
        let path = args.output_dir.join(format!("{}.csv", panel.name));
        let (header, rows) = panel_rows(panel);
        let mut meta = panel.metadata.clone();
        meta.push(("max_unitarity_defect".into(), format!("{:e}", out.max_norm_defect)));
        write_csv(io::BufWriter::new(File::create(&path)?), &meta, &header, &rows)?;
        writeln!(stdout, "{}", path.display())?;
    }
    Ok(())
}

fn cmd_validate(args: &ValidateArgs, seed: u64, stdout: &mut (dyn Write + Send)) -> CmdResult {
    let opts = ValidationOptions {
        quick: args.quick,
        seed,
        fault: args.inject_fault.map(|FaultArg::U0iSign| Fault::TamperU0iSign),
    };
    let report = run_validation(&opts);
    writeln!(stdout, "{report}")?;
    if report.all_passed() {
        Ok(())
    } else {
        Err(Failure::Runtime(format!("{} validation checks failed", report.failures().count())))
    }
}

fn cmd_floquet(args: &FloquetArgs, stdout: &mut (dyn Write + Send)) -> CmdResult {
    let params = args.system.params()?;
    let periods: Vec<f64> = match (args.period, args.period_range) {
        (Some(p), None) => vec![p],
        (None, Some((a, b, n))) => crate::analysis::linspace(a, b, n),
        _ => return Err(Failure::Usage("give --period or --period-range".into())),
    };
    if let Some(bad) = periods.iter().find(|p| !(**p >= 0.0 && p.is_finite())) {
        return Err(Failure::Usage(format!("periods must be finite and >= 0, got {bad}")));
    }
    let rows: Vec<Vec<f64>> = periods
        .iter()
        .map(|&period| {
            let gt = params.gamma * period;
            let r = floquet_eigenphases(args.alpha, gt);
            let [v, w] = r.eigenvectors;
            vec![period, gt, r.chi, v.a1.re, v.a1.im, v.a2.re, v.a2.im, w.a1.re, w.a1.im, w.a2.re, w.a2.im]
        })
        .collect();
    let header: Vec<String> = [
        "period_ps",
        "gamma_T",
        "chi",
        "Re_v1_1",
        "Im_v1_1",
        "Re_v1_2",
        "Im_v1_2",
        "Re_v2_1",
        "Im_v2_1",
        "Re_v2_2",
        "Im_v2_2",
    ]
    .map(String::from)
    .to_vec();
    let meta = vec![
        ("system".to_string(), args.system.describe()),
        ("alpha".into(), format!("{}", args.alpha)),
        ("eigenvalues".into(), "v1 <-> exp(+i chi), v2 <-> exp(-i chi)".into()),
        ("period_matrix".into(), "kick then free evolution".into()),
    ];
    let out = open_output(&args.output, stdout)?;
    write_csv(out, &meta, &header, &rows)?;
    Ok(())
}

fn dispatch(cli: &Cli, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> CmdResult {
    match &cli.command {
        Command::Propagate(a) => cmd_propagate(a, stdout, stderr),
        Command::Figure(a) => cmd_figure(a, stdout),
        Command::Validate(a) => cmd_validate(a, cli.seed, stdout),
        Command::Floquet(a) => cmd_floquet(a, stdout),
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I, stdout: &mut (dyn Write + Send), stderr: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return code;
        }
    };
    if cli.jobs == Some(0) {
        let _ = writeln!(stderr, "error: --jobs must be >= 1");
        return EXIT_USAGE;
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        builder = builder.num_threads(j);
    }
    let result = match builder.build() {
        Ok(pool) => pool.install(|| dispatch(&cli, stdout, stderr)),
        Err(e) => Err(Failure::Runtime(format!("cannot start worker pool: {e}"))),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            EXIT_FAILURE
        }
    }
}
