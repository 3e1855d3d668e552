use std::path::PathBuf;
use std::process::{Command, Output};

fn ringmod(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ringmod"))
        .args(args)
        .output()
        .expect("ringmod runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn scratch(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(format!("cli-{}-{name}", std::process::id()))
}

/// Column header plus data rows of a CSV written by `run` or `repro`.
fn table(csv: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = csv.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn fmmr_frequency_sweep_writes_hundred_rows() {
    let o = ringmod(&["run", "--device", "fmmr", "--preset", "paper", "--sweep", "frequency", "1e9..100e9", "points=100"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = stdout(&o);
    let (header, rows) = table(&csv);
    assert_eq!(rows.len(), 100);
    assert!(rows.iter().all(|r| r.len() == header.len()));
    assert!(csv.starts_with("# ringmod run: fmmr sweep frequency"));
    assert!(stderr(&o).contains("100 rows"));
}

#[test]
fn fmmr_frequency_sweep_peaks_near_five_gigahertz() {
    let o = ringmod(&["run", "--device", "fmmr", "--preset", "paper", "--sweep", "frequency", "1e9..100e9", "points=100"]);
    let (header, rows) = table(&stdout(&o));
    let f = column(&header, &rows, "sweep_value");
    let h1 = column(&header, &rows, "level_db_h1");
    let peak = (0..h1.len()).max_by(|&a, &b| h1[a].total_cmp(&h1[b])).unwrap();
    assert!((f[peak] - 5e9).abs() <= 1e9, "fundamental peaks at {} GHz", f[peak] / 1e9);
}

#[test]
fn mzi_fundamental_independent_of_frequency() {
    let o = ringmod(&["run", "--device", "mzi", "--sweep", "frequency", "1e8..1e11", "points=7", "spacing=log"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = table(&stdout(&o));
    let h1 = column(&header, &rows, "level_db_h1");
    assert!(h1.iter().all(|v| *v == h1[0]), "{h1:?}");
    let h2 = column(&header, &rows, "level_db_h2");
    assert!(h2.iter().all(|v| *v < -200.0), "{h2:?}");
}

#[test]
fn run_is_deterministic_and_reproducible_from_its_own_csv() {
    let args = ["run", "--device", "cmmr", "--sweep", "bias 0.05..0.3 points=41", "--frequency", "50G"];
    let first = ringmod(&args);
    let second = ringmod(&args);
    assert_eq!(first.status.code(), Some(0), "{}", stderr(&first));
    assert_eq!(first.stdout, second.stdout);

    let path = scratch("cmmr.csv");
    std::fs::write(&path, &first.stdout).unwrap();
    let again = ringmod(&["run", "--config", path.to_str().unwrap()]);
    assert_eq!(again.status.code(), Some(0), "{}", stderr(&again));
    assert_eq!(again.stdout, first.stdout);
}

#[test]
fn json_config_and_output_file() {
    let config = scratch("run.json");
    let output = scratch("run.csv");
    std::fs::write(
        &config,
        format!(
            r#"{{"device": "dcmmr", "preset": "paper", "sweep": "frequency 5e9..50e9 points=4", "output": "{}"}}"#,
            output.display()
        ),
    )
    .unwrap();
    let o = ringmod(&["run", "--config", config.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let (_, rows) = table(&std::fs::read_to_string(&output).unwrap());
    assert_eq!(rows.len(), 4);
}

#[test]
fn oracle_check_reported_in_header() {
    let o = ringmod(&["run", "--device", "fmmr", "--sweep", "frequency", "5e9..6e9", "points=2", "--oracle-check"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).lines().any(|l| l.starts_with("# oracle")));
}

#[test]
fn configuration_errors_exit_2() {
    for args in [
        vec!["run", "--device", "fmmr", "--sweep", "frequency", "1e9..2e9", "--t-d", "2e-12", "--fsr", "500e9"],
        vec!["run", "--sweep", "frequency", "1e9..2e9"],
        vec!["run", "--device", "mzi", "--sweep", "bias", "0..1"],
        vec!["run", "--device", "cmmr", "--sweep", "frequency", "1e9..2e9", "--rho", "0.9"],
        vec!["run", "--device", "fmmr", "--sweep", "sideways", "1..2"],
        vec!["repro", "fig9"],
        vec!["beta-from-voltage", "--voltage", "1", "--vpi-l", "0", "--length", "1"],
    ] {
        let o = ringmod(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
        assert!(stderr(&o).starts_with("error: "), "{args:?}");
    }
}

#[test]
fn unknown_config_key_exits_2() {
    let config = scratch("typo.json");
    std::fs::write(&config, r#"{"device": "fmmr", "sweep": "frequency 1e9..2e9", "frequncy": 1}"#).unwrap();
    let o = ringmod(&["run", "--config", config.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("frequncy"));
}

#[test]
fn singular_lossless_resonance_exits_3() {
    let o = ringmod(&[
        "run", "--device", "fmmr", "--alpha", "1", "--rho", "1", "--bias", "0", "--frequency", "10e9", "--sweep", "drive",
        "0..0", "points=1",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn strict_unconverged_run_exits_4() {
    let args = [
        "run", "--device", "fmmr", "--alpha", "1", "--rho", "0.9999", "--bias", "0", "--frequency", "1e9", "--sweep", "drive",
        "1..1.5", "points=2",
    ];
    let lenient = ringmod(&args);
    assert_eq!(lenient.status.code(), Some(0));
    assert!(stderr(&lenient).contains("warning: truncation did not converge"));
    assert!(stdout(&lenient).lines().last().unwrap().ends_with(",0"));

    let strict = ringmod(&[&args[..], &["--strict"]].concat());
    assert_eq!(strict.status.code(), Some(4), "{}", stderr(&strict));
}

#[test]
fn verify_passes_fmmr_and_fails_dcmmr_cancellation() {
    let ok = ringmod(&["verify", "--device", "fmmr"]);
    assert_eq!(ok.status.code(), Some(0), "{}", stdout(&ok));
    assert!(stdout(&ok).contains("all checks passed"));

    let dcmmr = ringmod(&["verify", "--device", "dcmmr"]);
    let out = stdout(&dcmmr);
    assert!(out.lines().any(|l| l.starts_with("PASS oracle@5GHz")), "{out}");
    assert!(out.lines().any(|l| l.starts_with("FAIL field-h2-cancellation")), "{out}");
    assert_eq!(dcmmr.status.code(), Some(5));
    assert!(stderr(&dcmmr).contains("field-h2-cancellation"));
}

#[test]
fn verify_cmmr_reports_ip3_sensitivity() {
    let o = ringmod(&["verify", "--device", "cmmr"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.starts_with("NOTE ip3 improvement")).count(), 4);
}

#[test]
fn repro_fig3_single_series() {
    let o = ringmod(&["repro", "fig3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = stdout(&o);
    assert!(csv.starts_with("# ringmod repro fig3"));
    let (header, rows) = table(&csv);
    assert_eq!(header[0], "series");
    assert_eq!(rows.len(), 100);
}

#[test]
fn repro_fig5_two_biases() {
    let o = ringmod(&["repro", "fig5"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = stdout(&o);
    assert!(csv.lines().any(|l| l.starts_with("#") && l.contains("assumption")));
    let (_, rows) = table(&csv);
    assert_eq!(rows.iter().filter(|r| r[0] == "bias=0.15").count(), 100);
    assert_eq!(rows.iter().filter(|r| r[0] == "bias=0.4").count(), 100);
}

#[test]
fn repro_fig8_three_devices_to_file() {
    let path = scratch("fig8.csv");
    let o = ringmod(&["repro", "fig8", "--output", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = table(&std::fs::read_to_string(&path).unwrap());
    for device in ["cmmr", "dcmmr", "mzi"] {
        assert_eq!(rows.iter().filter(|r| r[0] == device).count(), 61, "{device}");
    }
    let mzi: Vec<Vec<String>> = rows.into_iter().filter(|r| r[0] == "mzi").collect();
    let h1 = column(&header, &mzi, "level_db_h1");
    // fundamental rises with drive in the small-signal region
    assert!(h1.windows(2).take(40).all(|w| w[1] > w[0]));
}

#[test]
fn beta_from_voltage_conventions() {
    let o = ringmod(&["beta-from-voltage", "--voltage", "2.1", "--vpi-l", "2", "--length", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let beta: f64 = out.lines().next().unwrap().trim_start_matches("beta = ").parse().unwrap();
    assert!((beta - std::f64::consts::PI * 1.05).abs() < 1e-12);
    assert!(out.contains("(selected)"));

    let literal = ringmod(&["beta-from-voltage", "--voltage", "2.1", "--vpi-l", "2", "--length", "1", "--paper-beta-convention"]);
    assert!(stdout(&literal).starts_with("beta = 1.05\n"));
}
