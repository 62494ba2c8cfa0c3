use std::process::{Command, Output};

const HEADER: &str = "n,L,lengths,model,axis,trials,measured_rounds,bound_B,ratio,l_n_term,log2n_sq,mismatches";

fn busmesh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_busmesh"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Column `name` of every data line.
fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let idx = lines.next().unwrap().split(',').position(|c| c == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().to_string()).collect()
}

#[test]
fn verify_passes_on_small_arrays() {
    let o = busmesh(&["verify", "--n", "16", "--L", "1", "--trials", "100"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert_eq!(out.lines().next(), Some(HEADER));
    assert_eq!(column(&out, "mismatches"), ["0"]);
    assert_eq!(column(&out, "trials"), ["100"]);
}

#[test]
fn verify_log_levels_bit_model() {
    let o = busmesh(&[
        "verify",
        "--n",
        "64",
        "--L-policy",
        "log",
        "--model",
        "bit",
        "--trials",
        "50",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(column(&out, "L"), ["6"]);
    assert_eq!(column(&out, "model"), ["bit"]);
    assert_eq!(column(&out, "mismatches"), ["0"]);
}

#[test]
fn corrupted_kernel_exits_one() {
    let o = busmesh(&[
        "verify",
        "--n",
        "16",
        "--trials",
        "10",
        "--inject-fault",
        "skip-distribute",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert_ne!(column(&stdout(&o), "mismatches"), ["0"]);
}

#[test]
fn configuration_errors_exit_two() {
    for args in [
        &["verify", "--n", "12"][..],
        &["verify", "--n", "2048"],
        &["scale", "--n", "4"],
        &["verify", "--lengths", "16:3"],
        &["verify", "--lengths", "4:8"],
        &["verify", "--L", "2", "--lengths", "16"],
        &["verify", "--p-closed", "1.5"],
        &["verify", "--L", "9"],
        &["verify", "--model", "analog"],
        &["verify", "--L", "2", "--L-policy", "log"],
    ] {
        let o = busmesh(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(o.stdout.is_empty(), "{args:?}");
    }
}

#[test]
fn csv_is_byte_stable_and_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("scale.csv");
    let args = ["scale", "--n", "64,16,256", "--L", "2", "--trials", "3", "--seed", "9"];
    let a = busmesh(&args);
    let b = busmesh(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    let c = busmesh(&with_out);
    assert_eq!(c.status.code(), Some(0));
    assert!(c.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), a.stdout);
    // Rows come sorted by side.
    assert_eq!(column(&stdout(&a), "n"), ["16", "64", "256"]);
}

#[test]
fn bound_table_covers_every_level_count() {
    let o = busmesh(&["bound-table", "--n", "16,64"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert_eq!(out.lines().next(), Some(HEADER));
    assert_eq!(column(&out, "L"), ["1", "2", "3", "4", "1", "2", "3", "4", "5", "6"]);
    for r in column(&out, "ratio") {
        let r: f64 = r.parse().unwrap();
        assert!(r.is_finite() && r > 0.0);
    }
}

#[test]
fn demo_round_trips_scenario_files() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.json");
    let p = path.to_str().unwrap();
    let first = busmesh(&["demo", "--n", "8", "--L", "2", "--seed", "4", "--save-scenario", p]);
    assert_eq!(first.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.contains("busmesh-scenario-v1"));
    let again = busmesh(&["demo", "--L", "2", "--scenario", p]);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(first.stdout, again.stdout);
    assert!(stdout(&again).contains("port mismatches against the oracle: 0"));

    std::fs::write(&path, text.replace("busmesh-scenario-v1", "v0")).unwrap();
    assert_eq!(busmesh(&["demo", "--scenario", p]).status.code(), Some(2));
}
