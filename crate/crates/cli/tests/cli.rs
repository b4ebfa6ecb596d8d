use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

fn willmore(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_willmore"))
        .args(args)
        .env_remove("WILLMORE_SEED")
        .env_remove("WILLMORE_OUT")
        .env_remove("WILLMORE_CONFIG")
        .env_remove("WILLMORE_GRID")
        .env_remove("WILLMORE_TOL")
        .env_remove("WILLMORE_FORMAT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn write_corpus(dir: &Path, extra: &[&str]) {
    let mut args = vec!["--out", p(dir)];
    if !extra.contains(&"--grid") {
        args.extend(["--grid", "513"]);
    }
    args.extend_from_slice(extra);
    args.push("corpus");
    let o = willmore(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn energy_of_bundled_curves() {
    let tmp = tempfile::tempdir().unwrap();
    write_corpus(tmp.path(), &[]);
    let w = |name: &str| {
        let o = willmore(&["energy", p(&tmp.path().join(name))]);
        assert!(o.status.success());
        json(&o)["W"].as_f64().unwrap()
    };
    assert!((w("sphere.csv") - 4.0 * PI).abs() < 1e-6);
    assert!(w("catenary.csv").abs() < 1e-8);
    assert!(w("j_model.csv") > 8.0 * PI);
}

#[test]
fn energy_csv_format() {
    let tmp = tempfile::tempdir().unwrap();
    write_corpus(tmp.path(), &[]);
    let o = willmore(&["--format", "csv", "energy", p(&tmp.path().join("sphere.csv"))]);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("quantity,value,error"));
    let w: f64 = lines.next().unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((w - 4.0 * PI).abs() < 1e-6);
}

#[test]
fn parse_errors_name_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let f = tmp.path().join("bad.csv");
    std::fs::write(&f, "s,r,h\n0,0,-1\n0.5,oops,0\n1,0,1\n").unwrap();
    let o = willmore(&["energy", p(&f)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn missing_file_is_invalid_input() {
    let o = willmore(&["energy", "/nonexistent/curve.csv"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn empty_sweep_is_header_only() {
    let o = willmore(&["sweep", "--lambdas", ""]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "lambda,R,delta,kind,W_cap,W_glue,W_neck,W_total,err,status\n");
}

fn sweep_totals(args: &[&str]) -> Vec<f64> {
    let o = willmore(args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rd = csv_rows(&stdout(&o));
    rd.remove(0);
    rd.iter().map(|r| r[7].parse().unwrap()).collect()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn beta_sweep_increases_in_lambda() {
    let w = sweep_totals(&["sweep", "--kind", "beta", "--lambdas", "20:200:10", "--deltas", "0.1"]);
    assert_eq!(w.len(), 19);
    assert!(w.windows(2).all(|p| p[1] > p[0]), "{w:?}");
}

#[test]
fn alpha_sweep_stays_above_one_sphere() {
    let w = sweep_totals(&["sweep", "--kind", "alpha", "--lambdas", "10,100,1000", "--deltas", "0.05,0.1"]);
    assert_eq!(w.len(), 6);
    assert!(w.iter().all(|&v| v > 4.0 * PI));
}

#[test]
fn sweep_records_bad_cells_and_fails() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("s.csv");
    let o = willmore(&["--out", p(&out), "sweep", "--lambdas", "1.5,20", "--deltas", "0.5"]);
    assert_eq!(o.status.code(), Some(1));
    let rows = csv_rows(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(rows.len(), 3);
    assert_ne!(rows[1][9], "ok");
    assert_eq!(rows[2][9], "ok");
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let o = willmore(&["verify", "nonsense"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn turning_suite_on_the_bundled_j_curve() {
    let tmp = tempfile::tempdir().unwrap();
    let svg = tmp.path().join("turn.svg");
    let o = willmore(&["verify", "turning", "--svg", p(&svg)]);
    assert!(o.status.success());
    let r = json(&o);
    assert_eq!(r["passed"], true);
    assert!((r["bound"].as_f64().unwrap() - 8.0 * PI).abs() < 1e-12);
    assert!((r["tau"].as_f64().unwrap() - 1.5).abs() < 1e-9);
    assert!(std::fs::read_to_string(svg).unwrap().contains("<polyline"));
}

#[test]
fn turning_suite_rejects_open_curves() {
    let tmp = tempfile::tempdir().unwrap();
    write_corpus(tmp.path(), &[]);
    let o = willmore(&["verify", "turning", "--curve", p(&tmp.path().join("catenary.csv"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn table_suite_passes() {
    let o = willmore(&["verify", "table"]);
    assert!(o.status.success());
    assert_eq!(json(&o)["passed"], true);
}

#[test]
fn impossible_tolerance_fails_the_check() {
    let o = willmore(&["--tol", "1e-30", "verify", "table"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(json(&o)["passed"], false);
}

#[test]
fn nonpositive_tolerance_is_rejected() {
    let o = willmore(&["--tol", "0", "verify", "table"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn liyau_report_is_byte_identical_across_runs() {
    let a = willmore(&["verify", "liyau", "--seed", "11"]);
    let b = willmore(&["verify", "liyau", "--seed", "11"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["seed"], 11);
}

#[test]
fn corpus_is_reproducible_and_seeded() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    write_corpus(&a, &["--seed", "3"]);
    write_corpus(&b, &["--seed", "3"]);
    write_corpus(&c, &["--seed", "4"]);
    for e in std::fs::read_dir(&a).unwrap() {
        let name = e.unwrap().file_name();
        assert_eq!(std::fs::read(a.join(&name)).unwrap(), std::fs::read(b.join(&name)).unwrap());
    }
    let f = "random_sphere_0.csv";
    assert_ne!(std::fs::read(a.join(f)).unwrap(), std::fs::read(c.join(f)).unwrap());
    assert_eq!(std::fs::read(a.join("sphere.csv")).unwrap(), std::fs::read(c.join("sphere.csv")).unwrap());
}

#[test]
fn flag_beats_environment_beats_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.json");
    std::fs::write(&cfg, r#"{"seed": 1}"#).unwrap();
    let seed = |env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_willmore"));
        cmd.args(["--config", p(&cfg), "verify", "liyau"]).env_remove("WILLMORE_SEED");
        if let Some(v) = env {
            cmd.env("WILLMORE_SEED", v);
        }
        if let Some(v) = flag {
            cmd.args(["--seed", v]);
        }
        let o = cmd.output().unwrap();
        json(&o)["seed"].as_u64().unwrap()
    };
    assert_eq!(seed(None, None), 1);
    assert_eq!(seed(Some("2"), None), 2);
    assert_eq!(seed(Some("2"), Some("3")), 3);
}

#[test]
fn bad_config_is_invalid_input() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.json");
    std::fs::write(&cfg, r#"{"sed": 1}"#).unwrap();
    let o = willmore(&["--config", p(&cfg), "verify", "table"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn flow_writes_logs_checkpoints_and_plots() {
    let tmp = tempfile::tempdir().unwrap();
    write_corpus(tmp.path(), &["--grid", "41"]);
    let run = |out: &Path| {
        let o = willmore(&[
            "--out",
            p(out),
            "flow",
            p(&tmp.path().join("random_sphere_0.csv")),
            "--steps",
            "30",
            "--checkpoint-every",
            "10",
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    };
    let (a, b) = (tmp.path().join("fa"), tmp.path().join("fb"));
    run(&a);
    run(&b);
    let traj = std::fs::read_to_string(a.join("trajectory.csv")).unwrap();
    assert!(traj.starts_with("step,t,W,r_min,residual\n"));
    let w: Vec<f64> = traj.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert!(w.last().unwrap() < &w[0]);
    assert!(a.join("checkpoints/step_0000010.json").exists());
    assert!(a.join("energy.svg").exists());
    let fin: serde_json::Value = serde_json::from_slice(&std::fs::read(a.join("final.json")).unwrap()).unwrap();
    assert_eq!(fin["tau_changes"], 0);
    for f in ["trajectory.csv", "final.json", "final_profile.csv", "checkpoints/step_0000020.json"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn homotopy_default_trace_and_frames() {
    let tmp = tempfile::tempdir().unwrap();
    let o = willmore(&["--out", p(tmp.path()), "--grid", "257", "homotopy"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&std::fs::read_to_string(tmp.path().join("trace.csv")).unwrap());
    assert_eq!(rows[0], ["t", "lambda_t", "W"]);
    let w: Vec<f64> = rows[1..].iter().map(|r| r[2].parse().unwrap()).collect();
    assert!(w.windows(2).all(|p| p[1] <= p[0]));
    let frames = std::fs::read_to_string(tmp.path().join("frames.svg")).unwrap();
    assert_eq!(frames.matches("<polyline").count(), 6);
    for l in ["λ = 8", "λ = 5", "λ = 2"] {
        assert!(frames.contains(l), "{l}");
    }
}

#[test]
fn homotopy_with_equal_ends_draws_one_frame() {
    let tmp = tempfile::tempdir().unwrap();
    let o = willmore(&["--out", p(tmp.path()), "--grid", "129", "homotopy", "--lambda-start", "5", "--lambda-end", "5"]);
    assert!(o.status.success());
    let frames = std::fs::read_to_string(tmp.path().join("frames.svg")).unwrap();
    assert_eq!(frames.matches("<polyline").count(), 2);
}

#[test]
fn homotopy_rejects_out_of_domain_delta() {
    let tmp = tempfile::tempdir().unwrap();
    let o = willmore(&["--out", p(tmp.path()), "homotopy", "--delta", "0.9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(!tmp.path().join("trace.csv").exists());
}
