use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use neurofield::ScenarioFile;
use neurofield_core::sim::run_scenario;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_neurofield"))
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(str::to_string).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(str::to_string).collect()).collect();
    (header, rows)
}

fn field(line: &str, key: &str) -> f64 {
    line.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no `{key}` in {line}"))
        .split_whitespace()
        .next()
        .unwrap()
        .parse()
        .unwrap()
}

const SHORT: [&str; 4] = ["--set", "sim.t_end=0.5", "--set", "sim.dt=1e-3"];

#[test]
fn missing_scenario_is_a_config_error_naming_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let o = run(&["simulate", "does/not/exist.toml", "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("does/not/exist.toml"), "{}", stderr(&o));
}

#[test]
fn unknown_keys_are_rejected_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let sc = scenario("figure.toml");
    let o = run(&["simulate", sc.to_str().unwrap(), "-o", out.to_str().unwrap(), "--set", "model.gian=2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("gian"), "{}", stderr(&o));

    let bad = dir.path().join("bad.toml");
    let text = std::fs::read_to_string(&sc).unwrap().replace("[sim]", "[sim]\nsteps = 3");
    std::fs::write(&bad, text).unwrap();
    let o = run(&["simulate", bad.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("steps"), "{}", stderr(&o));
}

#[test]
fn plant_only_csv_has_blank_observer_columns() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("plant.csv");
    let sc = scenario("figure.toml");
    let mut args = vec!["simulate", sc.to_str().unwrap(), "-o", out.to_str().unwrap(), "--stride", "1"];
    args.extend(SHORT);
    let o = run(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&out);
    assert_eq!(header.join(","), "t,v0,v1,v2,y,vhat0,vhat1,vhat2,zhat0,zhat1,zhat2,zhat3,mode,err");
    assert_eq!(rows.len(), 501);
    for r in &rows {
        assert_eq!(r.len(), 14);
        assert!(r[5..].iter().all(String::is_empty));
        assert_eq!(r[1], r[4], "y must equal v0");
    }
}

#[test]
fn override_equals_editing_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario("figure.toml");
    let edited = dir.path().join("edited.toml");
    let text = std::fs::read_to_string(&sc).unwrap().replace("j0 = -1.0", "j0 = -2.0");
    std::fs::write(&edited, text).unwrap();

    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let mut args = vec!["simulate", sc.to_str().unwrap(), "-o", a.to_str().unwrap(), "--set", "model.j0=-2"];
    args.extend(SHORT);
    assert!(run(&args).status.success());
    let mut args = vec!["simulate", edited.to_str().unwrap(), "-o", b.to_str().unwrap()];
    args.extend(SHORT);
    assert!(run(&args).status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn stride_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario("figure.toml");
    let paths: Vec<PathBuf> = ["s1.csv", "s7.csv", "s7b.csv", "full.csv"].iter().map(|n| dir.path().join(n)).collect();
    for (p, extra) in paths.iter().zip([&["--stride", "1"][..], &["--stride", "7"], &["--stride", "7"], &["--full-resolution"]]) {
        let mut args = vec!["observe", sc.to_str().unwrap(), "-o", p.to_str().unwrap()];
        args.extend(extra);
        args.extend(SHORT);
        let o = run(&args);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let (_, every) = read_csv(&paths[0]);
    let (_, seventh) = read_csv(&paths[1]);
    assert_eq!(every.len(), 501);
    // Rows 0, 7, ..., 497 and the last one.
    assert_eq!(seventh.len(), 72 + 1);
    assert_eq!(seventh[1], every[7]);
    assert_eq!(seventh.last(), every.last());
    assert_eq!(std::fs::read(&paths[1]).unwrap(), std::fs::read(&paths[2]).unwrap());
    assert_eq!(std::fs::read(&paths[0]).unwrap(), std::fs::read(&paths[3]).unwrap());
}

#[test]
fn written_values_parse_back_to_the_record() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario("figure.toml");
    let out = dir.path().join("o.csv");
    let mut args = vec!["observe", sc.to_str().unwrap(), "-o", out.to_str().unwrap(), "--stride", "1"];
    args.extend(SHORT);
    assert!(run(&args).status.success());

    let overrides: Vec<String> = vec!["sim.t_end=0.5".into(), "sim.dt=1e-3".into()];
    let built = ScenarioFile::load(&sc, &overrides).unwrap().build().unwrap();
    let rec = run_scenario(&built.scenario);
    let (_, rows) = read_csv(&out);
    assert_eq!(rows.len(), rec.rows.len());
    let close = |s: &str, x: f64| {
        let y: f64 = s.parse().unwrap();
        y == x || (y - x).abs() <= 1e-12 * x.abs()
    };
    for (r, row) in rows.iter().zip(&rec.rows) {
        assert!(close(&r[0], row.t));
        for i in 0..3 {
            assert!(close(&r[1 + i], row.v[i]));
            assert!(close(&r[5 + i], row.v_hat.unwrap()[i]));
        }
        assert!(close(&r[13], row.err.unwrap()));
        assert_eq!(r[12], "z");
    }
}

#[test]
fn observe_reports_summary_and_gain_monotonicity() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario("tunability.toml");
    let terminal = |l: &str| {
        let out = dir.path().join(format!("l{l}.csv"));
        let set = format!("observer.l={l}");
        let o = run(&["observe", sc.to_str().unwrap(), "-o", out.to_str().unwrap(), "--set", &set]);
        assert!(o.status.success(), "{}", stderr(&o));
        let s = stdout(&o);
        assert!(s.contains("switches: 0"), "{s}");
        field(&s, "max_error");
        field(&s, "terminal_error")
    };
    let e15 = terminal("15");
    let e30 = terminal("30");
    assert!(e30 < e15, "l=30: {e30}, l=15: {e15}");
}

#[test]
fn delta_above_delta_star_warns() {
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario("figure.toml");
    let out = dir.path().join("o.csv");
    // J0 = 1, I0 = 0.09: δ* = 0.09 / 11.
    let o = run(&[
        "observe",
        sc.to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
        "--set",
        "model.j0=1",
        "--set",
        "model.sigmoid.h0=0",
        "--set",
        "observer.delta=0.01",
        "--set",
        "sim.t_end=0.01",
        "--set",
        "sim.dt=1e-3",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("warning: delta = 0.01 is not below delta_star"), "{}", stderr(&o));

    let o = run(&[
        "observe",
        sc.to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
        "--set",
        "model.j0=1",
        "--set",
        "model.sigmoid.h0=0",
        "--set",
        "observer.delta=0.005",
        "--set",
        "sim.t_end=0.01",
        "--set",
        "sim.dt=1e-3",
    ]);
    assert!(!stderr(&o).contains("warning"), "{}", stderr(&o));
}

#[test]
fn numeric_failure_exits_with_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let sc = scenario("figure.toml");
    // RK4 is unstable for dt k = 200; the state overflows within 40 steps.
    let o = run(&["simulate", sc.to_str().unwrap(), "-o", out.to_str().unwrap(), "--set", "sim.dt=1000", "--set", "sim.t_end=100000"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("non-finite"));
    // The partial record is still written.
    assert!(read_csv(&out).1.len() > 1);
}

fn gamma_rows(args: &[&str]) -> Vec<Vec<String>> {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.csv");
    let mut all = vec!["gamma-table", "-o", out.to_str().unwrap()];
    all.extend(args);
    let o = run(&all);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&out);
    assert_eq!(header.join(","), "p,j,v0,rho,gamma,convention");
    rows
}

#[test]
fn gamma_table_values_and_conventions() {
    let rows = gamma_rows(&["--p", "0", "--j", "0", "--v0", "0", "--rho", "1.0"]);
    assert!(rows[0][4].parse::<f64>().unwrap().abs() < 1e-12);

    let odd = gamma_rows(&["--p", "0", "--j", "0", "--v0", "0.5", "--rho", "0"]);
    assert!((odd[0][4].parse::<f64>().unwrap() - 5.0f64.tanh()).abs() < 1e-15);
    assert_eq!(odd[0][5], "tanh(mu*x)");
    let thr = gamma_rows(&["--p", "0", "--j", "0", "--v0", "0.5", "--rho", "0", "--convention", "threshold"]);
    assert!((thr[0][4].parse::<f64>().unwrap() - 4.0f64.tanh()).abs() < 1e-15);
    assert_eq!(thr[0][5], "tanh(mu*x-1)");
}

#[test]
fn gamma_table_refinement() {
    let grid = ["--v0", "-1:1:5", "--rho", "0,0.1,0.25,0.5"];
    let coarse = gamma_rows(&grid);
    let mut fine_args = grid.to_vec();
    fine_args.extend(["--set", "model.theta_nodes=256"]);
    let fine = gamma_rows(&fine_args);
    assert_eq!(coarse.len(), 4 * 4 * 5 * 4);
    for (a, b) in coarse.iter().zip(&fine) {
        let (x, y): (f64, f64) = (a[4].parse().unwrap(), b[4].parse().unwrap());
        assert!((x - y).abs() <= 1e-10 * x.abs().max(1.0), "{a:?} vs {b:?}");
    }
}

#[test]
fn gamma_table_range_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("g.csv");
    let o = run(&["gamma-table", "-o", out.to_str().unwrap(), "--p", "7"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["gamma-table", "-o", out.to_str().unwrap(), "--rho", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("rho"));
    let o = run(&["gamma-table", "-o", out.to_str().unwrap(), "--v0", "a:b"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_input_reference_values() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("ci.csv");
    let sc = scenario("figure.toml");
    let o = run(&["check-input", sc.to_str().unwrap(), "--out", grid.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    // ε(1-β) and (βε)² ω.
    assert!((field(&s, "c_input") - 0.09).abs() < 1e-12);
    assert!((field(&s, "c_effective") - 1.09).abs() < 1e-12);
    let w = 0.01f64.powi(2) * 2.0 * std::f64::consts::PI / 10.0;
    assert!((field(&s, "min_wedge") - w).abs() < 1e-15);
    assert!((field(&s, "delta_star") - 1.09 / 11.0).abs() < 1e-12);
    let (header, rows) = read_csv(&grid);
    assert_eq!(header.join(","), "t,I0,wedge,det_G,delta_star");
    assert_eq!(rows.len(), 10_001);
}

#[test]
fn check_input_passage_time() {
    let sc = scenario("figure.toml");
    // J0 = 1, h0 = 0: c = 0.09, δ* = 0.09/11, δ = δ*/2 gives t_δ = τ (δ*/c) 2.
    let ds = 0.09 / 11.0;
    let d = format!("{}", ds / 2.0);
    let o = run(&["check-input", sc.to_str().unwrap(), "--set", "model.j0=1", "--set", "model.sigmoid.h0=0", "--delta", &d]);
    assert!(o.status.success(), "{}", stderr(&o));
    let td = field(&stdout(&o), "t_delta");
    assert!((td - 5.0 * ds / 0.09 * 2.0).abs() < 1e-9, "{td}");
}

#[test]
fn check_input_violations_exit_3() {
    let sc = scenario("figure.toml");
    let o = run(&["check-input", sc.to_str().unwrap(), "--set", "input={type=\"constant\", value=[0.1, 0.0, 0.0]}"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("excitation"), "{}", stderr(&o));

    // I0 = 0.09 + 1.5 sin t becomes negative just after t = π.
    let o = run(&[
        "check-input",
        sc.to_str().unwrap(),
        "--set",
        "model.sigmoid.h0=0",
        "--set",
        "input.i0_amp=1.5",
        "--set",
        "input.i0_omega=1",
    ]);
    assert_eq!(o.status.code(), Some(3));
    let msg = stderr(&o);
    let t: f64 = msg.rsplit("t = ").next().unwrap().trim().parse().unwrap();
    let first = std::f64::consts::PI + (0.09f64 / 1.5).asin();
    assert!(t >= first && t < first + 1e-3, "{msg}");
}

#[test]
fn invert_csv_and_random_audit() {
    use neurofield_core::observability::t_map;
    let dir = tempfile::tempdir().unwrap();
    let sc = scenario("figure.toml");
    let built = ScenarioFile::load(&sc, &[]).unwrap().build().unwrap();
    let p = &built.scenario.params;
    let states = [([0.5, 0.3, -0.4], 0.7), ([-0.6, -0.8, 0.2], 2.5)];
    let input = dir.path().join("z.csv");
    let mut w = csv::Writer::from_path(&input).unwrap();
    w.write_record(["t", "sign", "z0", "z1", "z2", "z3"]).unwrap();
    for (v, t) in states {
        let z = t_map(p, built.input(), v, t);
        let sign = if v[0] > 0.0 { "+" } else { "-" };
        let rec: Vec<String> = [t.to_string(), sign.to_string()].into_iter().chain(z.iter().map(f64::to_string)).collect();
        w.write_record(rec).unwrap();
    }
    w.flush().unwrap();
    let out = dir.path().join("v.csv");
    let o = run(&["invert", sc.to_str().unwrap(), "--input", input.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (header, rows) = read_csv(&out);
    assert_eq!(header.join(","), "t,sign,v0,v1,v2");
    for (r, (v, _)) in rows.iter().zip(states) {
        for i in 0..3 {
            assert!((r[2 + i].parse::<f64>().unwrap() - v[i]).abs() < 1e-8, "{r:?}");
        }
    }

    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let o = run(&["invert", sc.to_str().unwrap(), "--random", "20", "--seed", "4", "-o", path.to_str().unwrap()]);
        assert!(o.status.success());
        assert_eq!(field(&stdout(&o), "samples"), 20.0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(read_csv(&a).1.len(), 20);

    let o = run(&["invert", sc.to_str().unwrap(), "-o", a.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reproduce_figure_writes_the_figure_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["reproduce-figure", "--out-dir", dir.path().to_str().unwrap(), "--set", "sim.dt=1e-3", "--stride", "10"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (_, traj) = read_csv(&dir.path().join("figure_traj.csv"));
    let (header, log) = read_csv(&dir.path().join("figure_logerr.csv"));
    assert_eq!(header.join(","), "t,err,log10_err,mode");
    assert_eq!(traj.len(), 401);
    assert_eq!(log.len(), 401);
    for r in &log {
        let e: f64 = r[1].parse().unwrap();
        assert_eq!(r[2].parse::<f64>().unwrap(), e.max(1e-16).log10());
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("figure_summary.json")).unwrap()).unwrap();
    assert!(summary["switches"].is_array());
    assert!(summary["terminal_error"].is_number());
}
