use std::path::Path;
use std::process::{Command, Output};

use fruittouch::config::KEYS;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fruittouch"))
}

fn run(args: &[&str], dir: &Path) -> Output {
    bin().args(args).current_dir(dir).output().expect("binary runs")
}

fn ok(args: &[&str], dir: &Path) -> String {
    let o = run(args, dir);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

fn value(out: &str, key: &str) -> f64 {
    out.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("no {key} in {out}"))
        .parse()
        .unwrap()
}

fn success_rate(csv: &str, fruit: &str) -> f64 {
    let row = csv.lines().find(|l| l.starts_with(fruit)).expect("summary row");
    row.split(',').nth(3).unwrap().parse().unwrap()
}

#[test]
fn help_lists_every_config_key() {
    let o = bin().arg("--help").output().unwrap();
    let text = String::from_utf8(o.stdout).unwrap();
    for (k, d, _) in KEYS {
        assert!(text.contains(k), "{k}");
        assert!(text.contains(&format!("= {d}")), "{k} default");
    }
}

#[test]
fn calibrate_then_reconstruct_pyramid() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(&["sim", "--scene", "calibration", "--out", "cal"], d);
    ok(&["calibrate", "--dir", "cal", "--out", "rgb.txt"], d);
    ok(&["sim", "--scene", "pyramid", "--out", "pyr", "--seed", "5"], d);
    let out = ok(&["reconstruct", "--model", "rgb.txt", "--dir", "pyr", "--out", "h.csv"], d);
    assert!(value(&out, "mse_mm2") <= 0.201, "{out}");
    assert!(d.join("h.csv").exists());
}

#[test]
fn slip_threshold_controls_detections() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(&["sim", "--scene", "calibration", "--out", "cal"], d);
    ok(&["calibrate", "--dir", "cal", "--out", "rgb.txt"], d);
    ok(&["sim", "--scene", "slip", "--out", "seq", "--frames", "40", "--load-g", "50"], d);
    let count = |csv: &str| csv.lines().skip(1).filter(|l| l.ends_with(",1")).count();
    let base = ok(&["slip", "--normals", "rgb.txt", "--dir", "seq"], d);
    let never = ok(&["slip", "--normals", "rgb.txt", "--dir", "seq", "--threshold", "1e9"], d);
    let always = ok(&["slip", "--normals", "rgb.txt", "--dir", "seq", "--threshold", "0"], d);
    assert_eq!(count(&never), 0);
    assert!(count(&base) > 0);
    assert!(count(&always) >= count(&base));
    assert_eq!(base.lines().count(), 41);

    let cal = ok(&["calibrate", "--target", "force", "--out", "force.txt"], d);
    assert!(cal.contains("normal_slope="));
    let forces = ok(&["force", "--model", "force.txt", "--normals", "rgb.txt", "--dir", "seq"], d);
    let first: Vec<&str> = forces.lines().nth(1).unwrap().split(',').collect();
    let fn_: f64 = first[1].parse().unwrap();
    assert!((fn_ - 8.0).abs() < 1.5, "{fn_}");
    assert!(first[2].parse::<f64>().is_ok());
}

#[test]
fn harvest_ordering_and_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let args = |s: &'static str| ["harvest-sim", "--strategy", s, "--trials", "50", "--seed", "2"];
    let open = ok(&args("open_loop"), d);
    let full = ok(&args("slip_force"), d);
    for fruit in ["cherry_tomato", "strawberry"] {
        assert!(success_rate(&full, fruit) >= success_rate(&open, fruit), "{fruit}");
    }
    assert_eq!(ok(&args("open_loop"), d), open);
    ok(&["harvest-sim", "--trials", "10", "--fruit", "strawberry", "--out", "t.csv"], d);
    let trials = std::fs::read_to_string(d.join("t.csv")).unwrap();
    assert_eq!(trials.lines().count(), 1 + 3 * 10);
}

#[test]
fn errors_are_one_line_and_nonzero() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    std::fs::write(d.join("bad.cfg"), "force.grid = 32\nslip.threshold_px = abc\n").unwrap();
    let o = run(&["--config", "bad.cfg", "harvest-sim", "--trials", "10"], d);
    assert!(!o.status.success());
    let err = String::from_utf8(o.stderr).unwrap();
    assert_eq!(err.trim_end().lines().count(), 1, "{err}");
    assert!(err.contains("line 2") && err.contains("slip.threshold_px"), "{err}");

    let o = run(&["harvest-sim", "--strategy", "grab"], d);
    assert!(!o.status.success());
    let o = run(&["reconstruct", "--model", "missing.txt", "--dir", "."], d);
    assert!(!o.status.success());
    assert!(String::from_utf8(o.stderr).unwrap().contains("missing.txt"));
    let o = run(&["slip", "--dir", "seq"], d);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_file_is_applied() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    std::fs::write(d.join("c.cfg"), "# fewer retries\nharvest.max_retries = 1\n").unwrap();
    let base = ok(&["harvest-sim", "--strategy", "slip", "--trials", "30"], d);
    let capped = ok(&["--config", "c.cfg", "harvest-sim", "--strategy", "slip", "--trials", "30"], d);
    assert_ne!(base, capped);
}
