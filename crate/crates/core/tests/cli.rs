use std::f64::consts::{FRAC_PI_2, PI};
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kicked-qubit"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn parse(text: &str) -> Table {
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        let header = lines.next().expect("header row").split(',').map(str::to_owned).collect();
        let rows = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
        Table { header, rows }
    }

    fn read(path: &Path) -> Table {
        Table::parse(&std::fs::read_to_string(path).unwrap())
    }

    fn col(&self, name: &str) -> Vec<f64> {
        let i = self.header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
        self.rows.iter().map(|r| r[i]).collect()
    }
}

fn stdout_table(out: &Output) -> Table {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    Table::parse(&String::from_utf8(out.stdout.clone()).unwrap())
}

const FIG1_PULSE: &str = "gaussian:alpha=pi/2,tau=10,center=150";

#[test]
fn propagate_fig1_pulse_endpoint() {
    let t = stdout_table(&run(&[
        "propagate",
        "--preset",
        "hydrogen-2s2p",
        "--pulse",
        FIG1_PULSE,
        "--t-end",
        "300",
    ]));
    assert_eq!(
        t.header,
        [
            "t_ps",
            "P1",
            "P2",
            "P2_noTO_schrodinger",
            "P2_noTO_interaction",
            "Re_U11",
            "Im_U11",
            "Re_U12",
            "Im_U12"
        ]
    );
    assert_eq!(t.rows.len(), 400);
    let p2 = *t.col("P2").last().unwrap();
    assert!((p2 - 0.9977).abs() <= 2e-4, "P2(300) = {p2}");
    assert_eq!(*t.col("t_ps").last().unwrap(), 300.0);
    for r in &t.rows {
        assert!((r[1] + r[2] - 1.0).abs() < 1e-8);
    }
}

#[test]
fn output_is_byte_identical_across_runs_and_pools() {
    let args = ["propagate", "--preset", "hydrogen-2s2p", "--pulse", FIG1_PULSE, "--t-end", "300"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let dir = tempfile::tempdir().unwrap();
    let (d1, d4) = (dir.path().join("one"), dir.path().join("four"));
    for (jobs, d) in [("1", &d1), ("4", &d4)] {
        let out = run(&["--jobs", jobs, "figure", "fig4_left", "-o", d.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let read = |d: &Path| std::fs::read(d.join("fig4_left.csv")).unwrap();
    assert_eq!(read(&d1), read(&d4));
}

#[test]
fn number_format_and_line_endings() {
    let out = run(&["propagate", "--preset", "unit", "--pulse", "kick:alpha=0.3,center=1", "--t-end", "2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(!text.contains('\r'));
    let row = text.lines().filter(|l| !l.starts_with('#')).nth(1).unwrap();
    for field in row.split(',') {
        let mantissa = field.trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{field}");
    }
}

#[test]
fn degenerate_kick_jumps_population() {
    let t = stdout_table(&run(&[
        "propagate",
        "--gamma",
        "0",
        "--pulse",
        "kick:alpha=pi/2,center=50",
        "--t-end",
        "100",
        "--sample-interval",
        "1",
    ]));
    for (time, p2) in t.col("t_ps").into_iter().zip(t.col("P2")) {
        let want = if time < 50.0 { 0.0 } else { 1.0 };
        assert!((p2 - want).abs() < 1e-12, "t = {time}: P2 = {p2}");
    }
}

#[test]
fn zero_strength_leaves_ground_state() {
    let t = stdout_table(&run(&[
        "propagate",
        "--preset",
        "hydrogen-2s2p",
        "--pulse",
        "gaussian:alpha=0,tau=10,center=150",
        "--t-end",
        "300",
    ]));
    for c in ["P2", "P2_noTO_schrodinger", "P2_noTO_interaction"] {
        assert!(t.col(c).iter().all(|&p| p == 0.0), "{c}");
    }
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["propagate", "--t-end", "10"][..],
        &["propagate", "--preset", "unit", "--gamma", "1", "--t-end", "10"],
        &["propagate", "--preset", "unit", "--pulse", "blob:alpha=1", "--t-end", "10"],
        &["propagate", "--preset", "unit", "--pulse", "gaussian:alpha=1,tau=-1,center=3", "--t-end", "10"],
        &["propagate", "--preset", "unit", "--t-end", "-1"],
        &["figure", "fig9"],
        &["floquet", "--preset", "unit", "--alpha", "1"],
        &["--jobs", "0", "validate", "--quick"],
        &["no-such-command"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(out.stdout.is_empty() || args[0] == "no-such-command");
    }
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn numerical_failure_exits_two() {
    let out = run(&[
        "propagate",
        "--preset",
        "hydrogen-2s2p",
        "--pulse",
        FIG1_PULSE,
        "--t-end",
        "300",
        "--dt",
        "40",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dt"));
}

#[test]
fn physical_warnings_go_to_stderr() {
    let long = run(&["propagate", "--preset", "hydrogen-2s2p", "--t-end", "2000"]);
    assert!(long.status.success());
    assert!(String::from_utf8_lossy(&long.stderr).contains("warning"));

    let narrow = run(&[
        "propagate",
        "--preset",
        "hydrogen-2s2p",
        "--pulse",
        "gaussian:alpha=0.1,tau=0.0005,center=1",
        "--t-end",
        "2",
    ]);
    assert!(narrow.status.success());
    assert!(String::from_utf8_lossy(&narrow.stderr).contains("warning"));

    let quiet = run(&["propagate", "--preset", "unit", "--t-end", "2000"]);
    assert!(quiet.status.success() && quiet.stderr.is_empty());
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.csv");
    let out = run(&["propagate", "--preset", "unit", "--t-end", "1", "-o", path.to_str().unwrap()]);
    assert!(out.status.success() && out.stdout.is_empty());
    assert_eq!(Table::read(&path).rows.len(), 400);
}

#[test]
fn figure_writes_panel_csv_with_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["figure", "fig1", "-o", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let path = dir.path().join("fig1.csv");
    assert!(String::from_utf8_lossy(&out.stdout).contains("fig1.csv"));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.lines().any(|l| l.starts_with("# T_dE_ps")));
    let t = Table::parse(&text);
    assert_eq!(t.header[0], "t_ps");
    let p2 = *t.col("P2_tau=10").last().unwrap();
    assert!((p2 - 0.9977).abs() <= 2e-4);
}

#[test]
fn figure_override_outside_scenario_is_rejected() {
    let out = run(&["figure", "fig1", "--t2", "500", "-o", "/nonexistent"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn fig5_left_quarter_pi_reaches_full_transfer() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&["figure", "fig5_left", "-o", dir.path().to_str().unwrap()]).status.success());
    let t = Table::read(&dir.path().join("fig5_left.csv"));
    let g = t.col("gamma_T_s");
    let p = t.col("P2_alpha=pi/4");
    let i =
        (0..g.len()).min_by(|&a, &b| (g[a] - FRAC_PI_2).abs().total_cmp(&(g[b] - FRAC_PI_2).abs())).unwrap();
    let peak = p[i.saturating_sub(1)..=(i + 1).min(g.len() - 1)].iter().copied().fold(0.0, f64::max);
    assert!((peak - 1.0).abs() <= 1e-3, "peak {peak} at gamma T_s = {}", g[i]);
}

#[test]
fn floquet_examples() {
    let t =
        stdout_table(&run(&["floquet", "--preset", "unit", "--alpha", "pi/2", "--period-range", "0,6,25"]));
    assert_eq!(t.rows.len(), 25);
    assert!(t.col("chi").iter().all(|c| (c - FRAC_PI_2).abs() < 1e-12));

    let t = stdout_table(&run(&["floquet", "--preset", "unit", "--alpha", "0", "--period-range", "0,3,13"]));
    for (gt, chi) in t.col("gamma_T").into_iter().zip(t.col("chi")) {
        assert!((chi - gt).abs() < 1e-7, "{gt} {chi}");
    }

    let period = format!("{}", PI / 4.0);
    let t = stdout_table(&run(&["floquet", "--preset", "unit", "--alpha", "pi/3", "--period", &period]));
    assert!((t.col("chi")[0] - 1.209429).abs() < 1e-6);
}

#[test]
fn validate_quick_and_fault_injection() {
    let ok = run(&["validate", "--quick"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stdout));
    let report = String::from_utf8_lossy(&ok.stdout);
    assert!(report.contains("PASS") && report.contains("0 failed"));

    let bad = run(&["validate", "--quick", "--inject-fault", "u0i-sign"]);
    assert_eq!(bad.status.code(), Some(2));
    let report = String::from_utf8_lossy(&bad.stdout);
    assert!(report.lines().any(|l| l.starts_with("FAIL") && l.contains("limit_web")));
}
