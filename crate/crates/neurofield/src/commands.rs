//! Subcommands of the `neurofield` binary.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use neurofield_core::inverse::{pseudo_inverse, Sign};
use neurofield_core::model::{gamma, InputSignal, SigmoidSpec};
use neurofield_core::observability::{delta_star, diagnostics, scan_input, t_delta, t_map};
use neurofield_core::sim::{run_scenario, TrajectoryRecord};
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::config::{Built, ScenarioFile};
use crate::error::{CliError, CliResult};
use crate::output::{warning_text, write_logerr, write_csv, Summary, DEFAULT_STRIDE};

#[derive(Debug, Parser)]
#[command(name = "neurofield", version, about = "Simulate the reduced V1 neural-field model and its hybrid observer")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the plant alone and write its trajectory.
    Simulate(RunArgs),
    /// Co-simulate plant and observer; print a summary.
    Observe(ObserveArgs),
    /// Check the input excitation and passage assumptions.
    CheckInput(CheckInputArgs),
    /// Tabulate Γ_p^j over a grid.
    GammaTable(GammaTableArgs),
    /// Apply the pseudo-inverse to embedded states, or audit it on random states.
    Invert(InvertArgs),
    /// Run the reference experiment and write the figure data.
    ReproduceFigure(FigureArgs),
}

#[derive(Debug, Args)]
pub struct Overrides {
    /// Override a scenario value, e.g. `--set observer.l=30`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Args)]
pub struct StrideArgs {
    /// Write every n-th row (the last row is always written).
    #[arg(long, default_value_t = DEFAULT_STRIDE)]
    pub stride: usize,
    /// Write every row.
    #[arg(long, conflicts_with = "stride")]
    pub full_resolution: bool,
}

impl StrideArgs {
    fn value(&self) -> usize {
        if self.full_resolution {
            1
        } else {
            self.stride.max(1)
        }
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub scenario: PathBuf,
    #[arg(long, short)]
    pub out: PathBuf,
    #[command(flatten)]
    pub stride: StrideArgs,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct ObserveArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Also write the summary as JSON.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Also write `t, err, log10_err, mode`.
    #[arg(long)]
    pub logerr: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CheckInputArgs {
    pub scenario: PathBuf,
    /// δ for the passage time; defaults to `observer.delta`.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Grid intervals over `[0, sim.t_end]`.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    /// Write `t, I0, wedge, det_G, delta_star` over the grid.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Convention {
    /// `σ(x) = tanh(μx)`.
    Odd,
    /// `σ(x) = tanh(μx - h0)`.
    Threshold,
}

#[derive(Debug, Args)]
pub struct GammaTableArgs {
    /// Scenario providing μ, the distribution and the θ nodes; the reference
    /// scenario when omitted.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Derivative orders, comma separated.
    #[arg(long, default_value = "0,1,2,3")]
    pub p: String,
    /// Moment orders, comma separated.
    #[arg(long, default_value = "0,1,2,3")]
    pub j: String,
    /// `a,b,c` or `start:stop:count`.
    #[arg(long, default_value = "-1:1:9", allow_hyphen_values = true)]
    pub v0: String,
    /// Grid of `ρ ≥ 0`, same syntax as `--v0`.
    #[arg(long, default_value = "0:2:5", allow_hyphen_values = true)]
    pub rho: String,
    #[arg(long, value_enum, default_value_t = Convention::Odd)]
    pub convention: Convention,
    /// Threshold for the threshold convention; defaults to `model.sigmoid.h0`.
    #[arg(long, allow_hyphen_values = true)]
    pub h0: Option<f64>,
    #[arg(long, short)]
    pub out: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct InvertArgs {
    pub scenario: PathBuf,
    /// CSV with columns `t, sign, z0, z1, z2, z3`.
    #[arg(long, conflicts_with = "random", required_unless_present = "random")]
    pub input: Option<PathBuf>,
    /// Round-trip audit on this many random states.
    #[arg(long)]
    pub random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub out: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    #[arg(long, short)]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub stride: StrideArgs,
    #[command(flatten)]
    pub overrides: Overrides,
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Simulate(a) => simulate(&a, out),
        Command::Observe(a) => observe(&a, out, err),
        Command::CheckInput(a) => check_input(&a, out),
        Command::GammaTable(a) => gamma_table(&a, out),
        Command::Invert(a) => invert(&a, out),
        Command::ReproduceFigure(a) => reproduce_figure(&a, out, err),
    }
}

fn stdout_io(e: std::io::Error) -> CliError {
    CliError::io("<stdout>", e)
}

fn failure(rec: &TrajectoryRecord) -> CliResult<()> {
    match &rec.failure {
        Some(e) => Err(e.clone().into()),
        None => Ok(()),
    }
}

fn simulate(a: &RunArgs, out: &mut dyn Write) -> CliResult<()> {
    let mut file = ScenarioFile::load(&a.scenario, &a.overrides.set)?;
    file.observer = None;
    let built = file.build()?;
    let rec = run_scenario(&built.scenario);
    write_csv(&rec, &a.out, a.stride.value())?;
    writeln!(out, "rows: {}", rec.rows.len()).map_err(stdout_io)?;
    failure(&rec)
}

/// Run a scenario with its observer, write the artifacts and report.
fn observe_built(
    built: &Built,
    traj: &Path,
    logerr: Option<&Path>,
    summary: Option<&Path>,
    stride: usize,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult<TrajectoryRecord> {
    let rec = run_scenario(&built.scenario);
    for w in &rec.warnings {
        writeln!(err, "warning: {}", warning_text(w)).map_err(stdout_io)?;
    }
    write_csv(&rec, traj, stride)?;
    if let Some(p) = logerr {
        write_logerr(&rec, p, stride)?;
    }
    let s = Summary::of(&rec);
    if let Some(p) = summary {
        s.write_json(p)?;
    }
    s.write_text(out).map_err(stdout_io)?;
    Ok(rec)
}

fn observe(a: &ObserveArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    let file = ScenarioFile::load(&a.run.scenario, &a.run.overrides.set)?;
    if file.observer.is_none() {
        return Err(CliError::Config(format!("{}: missing [observer] section", a.run.scenario.display())));
    }
    let built = file.build()?;
    let rec = observe_built(
        &built,
        &a.run.out,
        a.logerr.as_deref(),
        a.summary.as_deref(),
        a.run.stride.value(),
        out,
        err,
    )?;
    failure(&rec)
}

fn reproduce_figure(a: &FigureArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<()> {
    std::fs::create_dir_all(&a.out_dir).map_err(|e| CliError::io(&a.out_dir, e))?;
    let built = ScenarioFile::reference(&a.overrides.set)?.build()?;
    let rec = observe_built(
        &built,
        &a.out_dir.join("figure_traj.csv"),
        Some(&a.out_dir.join("figure_logerr.csv")),
        Some(&a.out_dir.join("figure_summary.json")),
        a.stride.value(),
        out,
        err,
    )?;
    failure(&rec)
}

fn check_input(a: &CheckInputArgs, out: &mut dyn Write) -> CliResult<()> {
    let file = ScenarioFile::load(&a.scenario, &a.overrides.set)?;
    let built = file.build()?;
    let params = &built.scenario.params;
    let input = built.input();
    let t_end = built.scenario.t_end;
    let scan = scan_input(input, 0.0, t_end, a.samples);
    let bounds = input.bounds();
    let c = bounds.c.min(scan.c_min);
    let ds = delta_star(c, params.j0, params.sigmoid().slope_at_zero());

    if let Some(path) = &a.out {
        let mut w = csv::Writer::from_path(path).map_err(|e| CliError::csv(path, e))?;
        w.write_record(["t", "I0", "wedge", "det_G", "delta_star"]).map_err(|e| CliError::csv(path, e))?;
        let n = a.samples.max(1);
        for i in 0..=n {
            let t = t_end * i as f64 / n as f64;
            let d = diagnostics(params, input, t);
            let rec = [t, input.jet(t).d[0][0], d.wedge, d.det_g, d.delta_star].map(|x| x.to_string());
            w.write_record(rec).map_err(|e| CliError::csv(path, e))?;
        }
        w.flush().map_err(|e| CliError::io(path, e))?;
    }

    let o = &mut *out;
    let line = |o: &mut dyn Write, s: String| writeln!(o, "{s}").map_err(stdout_io);
    line(o, format!("c_input: {}", built.raw_input.bounds().c))?;
    line(o, format!("c_effective: {}", bounds.c))?;
    line(o, format!("min_I0: {} at t = {}", scan.c_min, scan.t_c_min))?;
    line(o, format!("min_wedge: {:e} at t = {}", scan.wedge_min, scan.t_wedge_min))?;
    line(o, format!("delta_star: {ds}"))?;
    let delta = a.delta.or(file.observer.as_ref().map(|o| o.delta));
    if let Some(delta) = delta {
        line(o, format!("delta: {delta}"))?;
        match t_delta(delta, ds, c) {
            Ok(td) => line(o, format!("t_delta: {}", td * params.tau))?,
            Err(_) => line(o, "t_delta: n/a (delta is not in (0, delta_star))".to_string())?,
        }
    }
    if !(c > 0.0) {
        let n = a.samples.max(1);
        let first = (0..=n).map(|i| t_end * i as f64 / n as f64).find(|&t| input.jet(t).d[0][0] <= 0.0);
        return Err(CliError::Assumption(match first {
            Some(t) => format!("I0 = {} <= 0 at t = {t}", input.jet(t).d[0][0]),
            None => format!("the certified lower bound of I0 is {} <= 0", bounds.c),
        }));
    }
    if !(bounds.mu_wedge.min(scan.wedge_min) > 0.0) {
        return Err(CliError::Assumption(format!(
            "input excitation vanishes: |I12 ^ dI12| = {:e} at t = {}",
            scan.wedge_min, scan.t_wedge_min
        )));
    }
    Ok(())
}

/// `a,b,c` or `start:stop:count`.
pub fn parse_grid(spec: &str, name: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Config(format!("--{name}: cannot parse `{spec}`"));
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [a, b, n] => {
            let a: f64 = a.trim().parse().map_err(|_| bad())?;
            let b: f64 = b.trim().parse().map_err(|_| bad())?;
            let n: usize = n.trim().parse().map_err(|_| bad())?;
            Ok(match n {
                0 => Vec::new(),
                1 => vec![a],
                _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
            })
        }
        [list] => list.split(',').map(|s| s.trim().parse().map_err(|_| bad())).collect(),
        _ => Err(bad()),
    }
}

fn parse_orders(spec: &str, name: &str) -> CliResult<Vec<usize>> {
    spec.split(',')
        .map(|s| s.trim().parse().map_err(|_| CliError::Config(format!("--{name}: cannot parse `{spec}`"))))
        .collect()
}

fn gamma_table(a: &GammaTableArgs, out: &mut dyn Write) -> CliResult<()> {
    let file = match &a.scenario {
        Some(p) => ScenarioFile::load(p, &a.overrides.set)?,
        None => ScenarioFile::reference(&a.overrides.set)?,
    };
    let raw = file.model_params()?;
    let mu = raw.mu();
    let params = raw.with_sigmoid(SigmoidSpec::tanh(mu)?);
    let (shift, label) = match a.convention {
        Convention::Odd => (0.0, "tanh(mu*x)".to_string()),
        Convention::Threshold => {
            let h0 = a.h0.unwrap_or(file.model.sigmoid.h0);
            (h0 / mu, format!("tanh(mu*x-{h0})"))
        }
    };
    let ps = parse_orders(&a.p, "p")?;
    let js = parse_orders(&a.j, "j")?;
    let v0s = parse_grid(&a.v0, "v0")?;
    let rhos = parse_grid(&a.rho, "rho")?;
    if let Some(r) = rhos.iter().find(|r| !(**r >= 0.0)) {
        return Err(CliError::Config(format!("--rho: {r} is negative")));
    }
    let path = &a.out;
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::csv(path, e))?;
    w.write_record(["p", "j", "v0", "rho", "gamma", "convention"]).map_err(|e| CliError::csv(path, e))?;
    let mut n = 0usize;
    for &p in &ps {
        for &j in &js {
            for &v0 in &v0s {
                for &rho in &rhos {
                    let g = gamma(&params, p, j, v0 - shift, rho)?;
                    let rec = [p.to_string(), j.to_string(), v0.to_string(), rho.to_string(), g.to_string(), label.clone()];
                    w.write_record(rec).map_err(|e| CliError::csv(path, e))?;
                    n += 1;
                }
            }
        }
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    writeln!(out, "rows: {n}").map_err(stdout_io)
}

#[derive(Debug, Deserialize)]
struct InvertRow {
    t: f64,
    sign: String,
    z0: f64,
    z1: f64,
    z2: f64,
    z3: f64,
}

#[derive(Debug, Serialize)]
struct InvertedRow {
    t: f64,
    sign: &'static str,
    v0: f64,
    v1: f64,
    v2: f64,
}

#[derive(Debug, Serialize)]
struct AuditRow {
    t: f64,
    sign: &'static str,
    v0: f64,
    v1: f64,
    v2: f64,
    u0: f64,
    u1: f64,
    u2: f64,
    err: f64,
}

fn parse_sign(s: &str) -> Option<Sign> {
    match s.trim() {
        "+" | "1" | "+1" | "pos" => Some(Sign::Pos),
        "-" | "-1" | "neg" => Some(Sign::Neg),
        _ => None,
    }
}

fn sign_label(s: Sign) -> &'static str {
    match s {
        Sign::Pos => "+",
        Sign::Neg => "-",
    }
}

/// Tolerance reported by the round-trip audit.
pub const ROUND_TRIP_TOL: f64 = 1e-8;

fn invert(a: &InvertArgs, out: &mut dyn Write) -> CliResult<()> {
    let file = ScenarioFile::load(&a.scenario, &a.overrides.set)?;
    let built = file.build()?;
    let cfg = built
        .scenario
        .observer
        .ok_or_else(|| CliError::Config(format!("{}: missing [observer] section", a.scenario.display())))?
        .inverse;
    let params = &built.scenario.params;
    let input: &dyn InputSignal = built.input();
    let path = &a.out;
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::csv(path, e))?;

    if let Some(src) = &a.input {
        let mut r = csv::Reader::from_path(src).map_err(|e| CliError::csv(src, e))?;
        let mut n = 0usize;
        for row in r.deserialize::<InvertRow>() {
            let row = row.map_err(|e| CliError::csv(src, e))?;
            let sign = parse_sign(&row.sign).ok_or_else(|| {
                CliError::Config(format!("{}: sign `{}` is not one of +, -", src.display(), row.sign))
            })?;
            let u = pseudo_inverse(&cfg, params, input, [row.z0, row.z1, row.z2, row.z3], sign, row.t)?;
            let rec = InvertedRow { t: row.t, sign: sign_label(sign), v0: u[0], v1: u[1], v2: u[2] };
            w.serialize(rec).map_err(|e| CliError::csv(path, e))?;
            n += 1;
        }
        w.flush().map_err(|e| CliError::io(path, e))?;
        return writeln!(out, "rows: {n}").map_err(stdout_io);
    }

    let count = a.random.unwrap_or(0);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(a.seed);
    let t_end = built.scenario.t_end;
    let (mut worst, mut above) = (0.0f64, 0usize);
    for _ in 0..count {
        let sign = if rng.gen_bool(0.5) { Sign::Pos } else { Sign::Neg };
        let m = rng.gen_range(cfg.delta..=cfg.r);
        let v0 = if sign == Sign::Pos { m } else { -m };
        let rho = rng.gen_range(cfg.eta..=cfg.r);
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        let t = rng.gen_range(0.0..=t_end);
        let v = [v0, rho * phase.cos(), rho * phase.sin()];
        let u = pseudo_inverse(&cfg, params, input, t_map(params, input, v, t), sign, t)?;
        let e = ((u[0] - v[0]).powi(2) + (u[1] - v[1]).powi(2) + (u[2] - v[2]).powi(2)).sqrt();
        worst = worst.max(e);
        above += usize::from(!(e <= ROUND_TRIP_TOL));
        let rec = AuditRow { t, sign: sign_label(sign), v0: v[0], v1: v[1], v2: v[2], u0: u[0], u1: u[1], u2: u[2], err: e };
        w.serialize(rec).map_err(|e| CliError::csv(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    writeln!(out, "samples: {count}\nmax_error: {worst:e}\nabove_{ROUND_TRIP_TOL:e}: {above}").map_err(stdout_io)
}
