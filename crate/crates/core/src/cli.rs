//! Command-line front end.
//!
//! Exit codes: 0 success, 1 bad input (parse, validation, options),
//! 2 runtime failure (non-interior point, non-concurrent walls, ...),
//! 3 integration budget exhausted.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::catalog::{self, ChamberModel};
use crate::chamber::{self, StratumId};
use crate::error::Error;
use crate::flow::{self, FlowOptions, FlowStatus, Trajectory, TypeOneReport};
use crate::spectrum;

pub const EXIT_INPUT: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "chamberflow", version, about = "Radial mean curvature flow on chambers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate the flow from an interior point.
    Simulate(SimulateArgs),
    /// Integrate the flow restricted to a boundary stratum.
    StratumFlow(StratumFlowArgs),
    /// Complex principal curvatures and the regularized trace.
    Spectrum(SpectrumArgs),
    /// Walls, concurrent point and reflection group.
    Chamber(ChamberArgs),
    /// Trace the curve of interior points that collapse onto a target.
    Basin(BasinArgs),
    /// List or emit builtin scenarios.
    Catalog(CatalogArgs),
}

#[derive(Args, Debug)]
struct ScenarioArgs {
    /// Scenario document (JSON).
    #[arg(long, conflicts_with = "builtin", required_unless_present = "builtin")]
    scenario: Option<PathBuf>,
    /// Use a builtin scenario instead of a file.
    #[arg(long)]
    builtin: Option<String>,
    /// Positional parameters of the builtin.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "builtin")]
    params: Vec<f64>,
}

#[derive(Args, Debug)]
struct FlowArgs {
    #[arg(long, default_value_t = FlowOptions::default().rtol)]
    rtol: f64,
    #[arg(long, default_value_t = FlowOptions::default().max_step_frac)]
    max_step_frac: f64,
    #[arg(long, default_value_t = FlowOptions::default().wall_eps)]
    wall_eps: f64,
    #[arg(long, default_value_t = FlowOptions::default().t_max)]
    t_max: f64,
    #[arg(long, default_value_t = FlowOptions::default().max_steps)]
    max_steps: usize,
    #[arg(long, default_value_t = FlowOptions::default().seed)]
    seed: u64,
}

impl FlowArgs {
    fn options(&self) -> FlowOptions {
        FlowOptions {
            rtol: self.rtol,
            max_step_frac: self.max_step_frac,
            wall_eps: self.wall_eps,
            t_max: self.t_max,
            max_steps: self.max_steps,
            seed: self.seed,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Jsonl,
    Csv,
}

#[derive(Args, Debug)]
struct TrajectoryOut {
    /// Trajectory file; without it the trajectory goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Jsonl)]
    format: Format,
    /// Also write the run summary to this file.
    #[arg(long)]
    summary: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Start point, comma separated; defaults to the origin.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    w0: Option<Vec<f64>>,
    #[command(flatten)]
    flow: FlowArgs,
    #[command(flatten)]
    output: TrajectoryOut,
}

#[derive(Args, Debug)]
struct StratumFlowArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Active wall indices, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    stratum: Vec<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    w0: Vec<f64>,
    #[command(flatten)]
    flow: FlowArgs,
    #[command(flatten)]
    output: TrajectoryOut,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Chamber point; defaults to the origin.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    w: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    v: Vec<f64>,
    #[arg(long, default_value_t = spectrum::DEFAULT_J_MAX)]
    jmax: i64,
    /// Compare the symmetric series truncated at this N with the closed form.
    #[arg(long = "trace-n")]
    trace_n: Option<u64>,
}

#[derive(Args, Debug)]
struct ChamberArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Enumerate the reflection group.
    #[arg(long)]
    coxeter: bool,
    #[arg(long, default_value_t = 1000)]
    max_order: usize,
    /// Include complex focal hyperplanes with |j| up to this bound.
    #[arg(long)]
    complex_jmax: Option<i64>,
}

#[derive(Args, Debug)]
struct BasinArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Boundary point whose basin is traced.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    target: Vec<f64>,
    /// Drop of the potential along the traced curve.
    #[arg(long, default_value_t = flow::DEFAULT_BASIN_SPAN)]
    span: f64,
    /// Forward-flow points of the curve back to the target.
    #[arg(long)]
    verify: bool,
    #[arg(long, default_value_t = 10)]
    checks: usize,
    /// Also flow points displaced off the curve by this distance.
    #[arg(long)]
    transversal: Option<f64>,
    #[command(flatten)]
    flow: FlowArgs,
}

#[derive(Args, Debug)]
#[command(group = clap::ArgGroup::new("action").required(true).args(["list", "emit"]))]
struct CatalogArgs {
    #[arg(long)]
    list: bool,
    /// Write the scenario document of a builtin or a table template.
    #[arg(long)]
    emit: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "emit")]
    params: Vec<f64>,
}

/// Summary of one flow run. Everything but `duration_s` is a deterministic
/// function of the arguments.
#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub scenario: String,
    pub command: String,
    pub options: Value,
    pub status: String,
    #[serde(rename = "T")]
    pub t_collapse: Option<f64>,
    pub w_limit: Option<Vec<f64>>,
    pub stratum: Option<StratumId>,
    pub type_one: Option<TypeOneReport>,
    pub type_one_skipped: Option<String>,
    pub convexity_warning: bool,
    pub anomaly: Option<String>,
    pub samples: usize,
    pub steps: usize,
    pub rejected_steps: usize,
    pub duration_s: f64,
}

enum Failure {
    Input(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Runtime(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(format!("i/o error: {e}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Runtime(format!("serialization error: {e}"))
    }
}

type CliResult = std::result::Result<i32, Failure>;

/// Runs the CLI on `argv` (program name first) against the process streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Same as [`run`] with explicit output and diagnostic streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a, out, err),
        Command::StratumFlow(a) => stratum_flow(a, out, err),
        Command::Spectrum(a) => spectrum_cmd(a, out),
        Command::Chamber(a) => chamber_cmd(a, out),
        Command::Basin(a) => basin_cmd(a, out),
        Command::Catalog(a) => catalog_cmd(a, out),
    };
    let result = result.and_then(|code| out.flush().map(|_| code).map_err(Failure::from));
    match result {
        Ok(code) => code,
        Err(Failure::Input(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_INPUT
        }
        Err(Failure::Runtime(m)) => {
            let _ = writeln!(err, "error: {m}");
            EXIT_RUNTIME
        }
    }
}

fn load(args: &ScenarioArgs) -> std::result::Result<ChamberModel, Failure> {
    match (&args.scenario, &args.builtin) {
        (Some(path), _) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
            Ok(catalog::load_scenario(&text)?)
        }
        (None, Some(name)) => Ok(catalog::builtin(name, &args.params)?),
        (None, None) => Err(Failure::Input("no scenario given".into())),
    }
}

fn scenario_label(args: &ScenarioArgs, model: &ChamberModel) -> String {
    match &args.scenario {
        Some(p) => p.display().to_string(),
        None => model.name().to_string(),
    }
}

fn write_json(out: &mut dyn Write, value: &impl Serialize) -> std::result::Result<(), Failure> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> std::result::Result<(), Failure> {
    fs::write(path, bytes).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn csv_number(x: f64) -> String {
    format!("{x:?}")
}

fn trajectory_bytes(traj: &Trajectory, summary: &RunSummary, format: Format) -> std::result::Result<Vec<u8>, Failure> {
    let mut buf = Vec::new();
    match format {
        Format::Jsonl => {
            for s in &traj.samples {
                serde_json::to_writer(&mut buf, s)?;
                buf.push(b'\n');
            }
            serde_json::to_writer(&mut buf, summary)?;
            buf.push(b'\n');
        }
        Format::Csv => {
            let rank = traj.samples.first().map_or(0, |s| s.w.len());
            let mut header = vec!["t".to_string()];
            header.extend((0..rank).map(|k| format!("w{k}")));
            header.push("rho".into());
            header.push("grad_norm".into());
            writeln!(buf, "{}", header.join(","))?;
            for s in &traj.samples {
                let mut row = vec![csv_number(s.t)];
                row.extend(s.w.iter().map(|&x| csv_number(x)));
                row.push(csv_number(s.rho));
                row.push(csv_number(s.grad_norm));
                writeln!(buf, "{}", row.join(","))?;
            }
        }
    }
    Ok(buf)
}

fn summarize(
    model: &ChamberModel,
    scenario: String,
    command: &str,
    options: Value,
    traj: &Trajectory,
    started: Instant,
) -> RunSummary {
    let mut type_one = None;
    let mut type_one_skipped = None;
    if let FlowStatus::Collapsed { .. } = traj.status {
        match flow::type_one_estimate(model, traj) {
            Ok(r) => type_one = Some(r),
            Err(e) => type_one_skipped = Some(e.to_string()),
        }
    }
    let (w_limit, stratum) = match &traj.status {
        FlowStatus::Collapsed { w_limit, stratum, .. } => (Some(w_limit.clone()), Some(stratum.clone())),
        FlowStatus::Stationary { w } => (Some(w.clone()), Some(traj.stratum.clone())),
        _ => (None, None),
    };
    let anomaly = match traj.status {
        FlowStatus::Stationary { .. } if model.theorem_a() => {
            Some("stationary point in a scenario that claims the collapse hypotheses".to_string())
        }
        _ => None,
    };
    RunSummary {
        scenario,
        command: command.to_string(),
        options,
        status: traj.status.label().to_string(),
        t_collapse: traj.status.collapse_time(),
        w_limit,
        stratum,
        type_one,
        type_one_skipped,
        convexity_warning: traj.convexity_warning,
        anomaly,
        samples: traj.samples.len(),
        steps: traj.steps,
        rejected_steps: traj.rejected_steps,
        duration_s: started.elapsed().as_secs_f64(),
    }
}

fn emit_run(
    traj: &Trajectory,
    summary: &RunSummary,
    output: &TrajectoryOut,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult {
    let bytes = trajectory_bytes(traj, summary, output.format)?;
    match &output.out {
        Some(path) => {
            write_file(path, &bytes)?;
            write_json(out, summary)?;
        }
        None => out.write_all(&bytes)?,
    }
    if let Some(path) = &output.summary {
        let mut text = serde_json::to_vec_pretty(summary)?;
        text.push(b'\n');
        write_file(path, &text)?;
    }
    if let Some(a) = &summary.anomaly {
        writeln!(err, "warning: {a}")?;
    }
    if summary.convexity_warning {
        writeln!(err, "warning: stratum potential need not be convex when minus radials are present")?;
    }
    if matches!(traj.status, FlowStatus::Budget) {
        writeln!(err, "error: integration budget exhausted")?;
        return Ok(EXIT_BUDGET);
    }
    Ok(0)
}

fn simulate(a: SimulateArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let started = Instant::now();
    let model = load(&a.scenario)?;
    let opts = a.flow.options();
    opts.check()?;
    let w0 = a.w0.clone().unwrap_or_else(|| vec![0.0; model.rank()]);
    let traj = flow::integrate(&model, &w0, &opts)?;
    let options = json!({
        "w0": w0,
        "flow": opts,
        "format": a.output.format,
        "builtin_params": a.scenario.params,
    });
    let summary = summarize(&model, scenario_label(&a.scenario, &model), "simulate", options, &traj, started);
    emit_run(&traj, &summary, &a.output, out, err)
}

fn stratum_flow(a: StratumFlowArgs, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    let started = Instant::now();
    let model = load(&a.scenario)?;
    let opts = a.flow.options();
    opts.check()?;
    let s = StratumId::new(a.stratum.clone());
    let traj = flow::stratum_integrate(&model, &s, &a.w0, &opts)?;
    let options = json!({
        "w0": a.w0,
        "stratum": s,
        "flow": opts,
        "format": a.output.format,
        "builtin_params": a.scenario.params,
    });
    let summary = summarize(&model, scenario_label(&a.scenario, &model), "stratum-flow", options, &traj, started);
    emit_run(&traj, &summary, &a.output, out, err)
}

fn spectrum_cmd(a: SpectrumArgs, out: &mut dyn Write) -> CliResult {
    let model = load(&a.scenario)?;
    let w = a.w.clone().unwrap_or_else(|| vec![0.0; model.rank()]);
    let slice = spectrum::lifted_spectrum(&model, &w, &a.v, a.jmax)?;
    let trace = match a.trace_n {
        Some(n) => {
            let series = spectrum::regularized_trace_series(&model, &w, &a.v, n)?;
            let closed = spectrum::regularized_trace_closed(&model, &w, &a.v, &StratumId::open())?;
            json!({ "n": n, "series": series, "closed": closed, "abs_error": (series - closed).abs() })
        }
        None => Value::Null,
    };
    write_json(
        out,
        &json!({
            "scenario": scenario_label(&a.scenario, &model),
            "jmax": a.jmax,
            "slice": slice,
            "trace": trace,
        }),
    )?;
    Ok(0)
}

fn rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

fn chamber_cmd(a: ChamberArgs, out: &mut dyn Write) -> CliResult {
    let model = load(&a.scenario)?;
    let walls: Vec<Value> = model
        .walls()
        .map(|r| json!({ "id": r.id, "root": r.root, "m_plus": r.m_plus, "d_plus": r.d_plus, "c_plus": r.c_plus() }))
        .collect();
    let minus: Vec<Value> = model
        .minus_radials()
        .map(|r| json!({ "id": r.id, "root": r.root, "m_minus": r.m_minus, "d_minus": r.d_minus, "c_minus": r.c_minus() }))
        .collect();
    let mut doc = json!({
        "scenario": scenario_label(&a.scenario, &model),
        "rank": model.rank(),
        "theorem_a": model.theorem_a(),
        "walls": walls,
        "minus_radials": minus,
        "concurrent_point": model.concurrent_point(),
        "real_arrangement": spectrum::real_focal_arrangement(&model),
    });
    if let Some(j) = a.complex_jmax {
        doc["complex_arrangement"] = serde_json::to_value(spectrum::complex_focal_arrangement(&model, j))?;
    }
    if a.coxeter {
        let g = chamber::coxeter_group(&model, a.max_order)?;
        doc["coxeter"] = json!({
            "order": g.order(),
            "generators": g.generators.iter().map(rows).collect::<Vec<_>>(),
            "elements": g.elements.iter().map(rows).collect::<Vec<_>>(),
        });
    }
    write_json(out, &doc)?;
    Ok(0)
}

fn basin_cmd(a: BasinArgs, out: &mut dyn Write) -> CliResult {
    let model = load(&a.scenario)?;
    let opts = a.flow.options();
    opts.check()?;
    let curve = flow::basin_curve(&model, &a.target, &opts, a.span)?;
    let checks = a.verify.then(|| flow::verify_basin(&model, &curve, &opts, a.checks));
    let transversal = a
        .transversal
        .map(|offset| flow::transversal_checks(&model, &curve, &opts, a.checks, offset));
    let doc = json!({
        "scenario": scenario_label(&a.scenario, &model),
        "options": { "span": a.span, "flow": opts },
        "curve": curve,
        "verified": checks.as_ref().map(|c| c.iter().all(|b| b.reached)),
        "checks": checks,
        "transversal": transversal,
    });
    write_json(out, &doc)?;
    Ok(0)
}

fn catalog_cmd(a: CatalogArgs, out: &mut dyn Write) -> CliResult {
    if a.list {
        for (name, params) in catalog::BUILTINS {
            writeln!(out, "{name}\t{params}")?;
        }
        for row in catalog::TABLE1 {
            writeln!(out, "{}\ttemplate: {}", row.key, row.label())?;
        }
        return Ok(0);
    }
    let name = a.emit.as_deref().unwrap_or_default();
    if let Some(row) = catalog::table1_row(name) {
        write_json(out, &row.skeleton())?;
        return Ok(0);
    }
    let model = catalog::builtin(name, &a.params)?;
    writeln!(out, "{}", model.to_json())?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("chamberflow").chain(args.iter().copied());
        let code = run_with(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn list_names_builtins() {
        let (code, out, _) = call(&["catalog", "--list"]);
        assert_eq!(code, 0);
        for name in ["rank1", "slab", "a2", "b2"] {
            assert!(out.lines().any(|l| l.starts_with(name)), "{out}");
        }
    }

    #[test]
    fn simulate_builtin_reports_collapse() {
        let (code, out, _) = call(&["simulate", "--builtin", "rank1"]);
        assert_eq!(code, 0);
        let last: Value = serde_json::from_str(out.lines().last().unwrap()).unwrap();
        assert_eq!(last["status"], "Collapsed");
        assert!((last["T"].as_f64().unwrap() - 1f64.cosh().ln()).abs() < 1e-8);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(call(&["simulate"]).0, EXIT_INPUT);
        assert_eq!(call(&["simulate", "--builtin", "nope"]).0, EXIT_INPUT);
        assert_eq!(call(&["simulate", "--builtin", "rank1", "--w0", "2"]).0, EXIT_RUNTIME);
        assert_eq!(call(&["chamber", "--builtin", "slab", "--coxeter"]).0, EXIT_RUNTIME);
        assert_eq!(call(&["simulate", "--builtin", "rank1", "--max-steps", "3"]).0, EXIT_BUDGET);
        assert_eq!(call(&["simulate", "--builtin", "rank1", "--rtol", "-1"]).0, EXIT_INPUT);
    }
}
