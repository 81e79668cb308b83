//! Command-line front end.
//!
//! One subcommand per analysis: `simulate`, `analyze`, `continue`,
//! `codim2`, `normal-form`, `verify`, and `reproduce` (scripted benchmark
//! pipelines with golden-value manifests).
//!
//! Parameters are resolved in precedence order: a JSON `--config` file is
//! read first, `--preset` replaces the base table, and each `--set
//! NAME=VALUE` is applied last.  Data files land in `--out` (default
//! `out/`); `--format svg` adds plots and `--format json` adds
//! machine-readable summaries next to the CSVs.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 golden-value mismatch in `reproduce`.  Diagnostics go to stderr, the
//! human summary to stdout.  Identical invocations produce byte-identical
//! data files: there is no randomness and no timestamping anywhere.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::codim2::{region_map, trace_locus, Codim2Config, Codim2Curve, CurveId, RegionCell};
use crate::continuation::{
    continue_equilibrium_both, ContinuationConfig, SpecialKind, SpecialPoint,
    StopReason,
};
use crate::equilibria::{all_equilibria, existence_report, interior_equilibria, EquilibriumKind};
use crate::io;
use crate::model::{jacobian, ParamId, Params, State};
use crate::normalform::{
    hopf_normal_form, hopf_normal_form_with_transversality, transcritical_a2, verify_saddle_node,
    verify_transcritical,
};
use crate::reproduce;
use crate::simulate::{cycle_metrics, detect_attractor, integrate, Attractor, IntegratorConfig};
use crate::stability::{classify, classify_prey_only, StabilityReport, StabilityVerdict};

/// Internal failure channel; the variant picks the process exit code.
#[derive(Debug)]
pub(crate) enum Failure {
    /// Bad flags, bad config file, bad parameter names: exit 2.
    Config(String),
    /// A solver or detector could not produce a result: exit 3.
    Numerical(String),
    /// A `reproduce` manifest comparison failed: exit 4.
    Golden(String),
}

pub(crate) type CliResult<T> = Result<T, Failure>;

impl Failure {
    fn config(msg: impl Into<String>) -> Failure {
        Failure::Config(msg.into())
    }

    fn numerical(msg: impl Into<String>) -> Failure {
        Failure::Numerical(msg.into())
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "stagehunt",
    version,
    about = "Stage-structured predator-prey model: simulation, equilibria, bifurcation analysis",
    after_help = "Exit codes: 0 ok, 2 configuration error, 3 numerical failure, 4 manifest mismatch."
)]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// JSON config file: top-level `preset`, `params`, and per-command
    /// blocks (lowest precedence)
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Parameter preset `table1` (bistable regime, the default base) or
    /// `table2` (oscillatory regime)
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,

    /// Override one parameter, e.g. `--set c=0.037` (repeatable, applied
    /// last)
    #[arg(long = "set", global = true, value_name = "NAME=VALUE")]
    set: Vec<String>,

    /// Output directory for data files (created if missing; default
    /// `out/`)
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// `csv` data files only (default); `svg` adds plots; `json` adds
    /// machine-readable summaries
    #[arg(long, global = true, value_enum, value_name = "FMT")]
    format: Option<Format>,

    /// Worker threads for region grids (default 1; outputs are identical
    /// for any value)
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
}

#[derive(ValueEnum, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
    Svg,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Integrate from an initial state and report the attractor
    Simulate(SimulateArgs),
    /// Equilibria, existence report, eigenvalues, stability verdicts
    Analyze,
    /// Trace an equilibrium branch in one parameter (LP / H / BP)
    Continue(ContinueArgs),
    /// Trace a fold or Hopf locus in two parameters, or classify a region
    /// grid
    Codim2(Codim2Args),
    /// Hopf normal form at a parameter point
    NormalForm(NormalFormArgs),
    /// Closed-form bifurcation certificates (transversality and
    /// nondegeneracy projections)
    Verify(VerifyArgs),
    /// Regenerate a benchmark figure: data CSVs, plots, and a golden-value
    /// manifest (fig1..fig10; two-panel figures accept e.g. fig7a/fig7b).
    /// Always runs on the built-in benchmark tables.
    Reproduce(ReproduceArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Initial state `x,y1,y2,y3`, an equilibrium name `E1`..`E4`, or
    /// `near-E3`/`near-E4` (equilibrium with the prey level scaled by
    /// 1.15)
    #[arg(long, value_name = "STATE")]
    init: Option<String>,

    /// Integration horizon (default 50000)
    #[arg(long, value_name = "T")]
    tmax: Option<f64>,

    /// Output grid spacing (default 0.5; `0` records every accepted step)
    #[arg(long, value_name = "DT")]
    stride: Option<f64>,
}

#[derive(Args, Debug)]
struct ContinueArgs {
    /// Free parameter name
    #[arg(long, value_name = "PARAM")]
    free: Option<String>,

    /// Parameter window `LO:HI` (must contain the current value; the
    /// branch is traced in both senses)
    #[arg(long, value_name = "LO:HI")]
    range: Option<String>,

    /// Equilibrium the branch starts from: `E4` (default), `E3`, or `E2`
    #[arg(long, value_name = "EQ")]
    branch: Option<String>,
}

#[derive(Args, Debug)]
struct Codim2Args {
    /// Locus to trace: `fold` or `hopf`
    #[arg(long, value_name = "KIND")]
    curve: Option<String>,

    /// The two free parameters, e.g. `--free c,b`
    #[arg(long, value_name = "P1,P2")]
    free: Option<String>,

    /// Window for the first free parameter
    #[arg(long, value_name = "LO:HI")]
    range: Option<String>,

    /// Window for the second free parameter
    #[arg(long, value_name = "LO:HI")]
    range2: Option<String>,

    /// Classify attractor regimes on a grid instead of tracing a locus
    #[arg(long)]
    region: bool,

    /// Region grid resolution `N` or `N1xN2` (default 40)
    #[arg(long, value_name = "N")]
    grid: Option<String>,

    /// Branch seeding a Hopf locus search (default `E4`)
    #[arg(long, value_name = "EQ")]
    branch: Option<String>,
}

#[derive(Args, Debug)]
struct NormalFormArgs {
    /// Place the evaluation point, e.g. `--at c=0.03598345` (repeatable;
    /// applied after `--set`)
    #[arg(long, value_name = "NAME=VALUE")]
    at: Vec<String>,

    /// Also compute the crossing speed and bifurcation-direction
    /// indicator with respect to this parameter
    #[arg(long, value_name = "PARAM")]
    free: Option<String>,

    /// Equilibrium carrying the critical pair: `E4` (default) or `E3`
    #[arg(long, value_name = "EQ")]
    branch: Option<String>,
}

#[derive(Args, Debug)]
#[command(group = ArgGroup::new("certificate").required(true).args(["transcritical", "saddle_node"]))]
struct VerifyArgs {
    /// Check the prey-only transcritical certificate at the critical
    /// adult predation rate `a2 = a2t`
    #[arg(long)]
    transcritical: bool,

    /// Locate a fold of the interior pair over `--free`/`--range` and
    /// check the saddle-node certificate there
    #[arg(long = "saddle-node")]
    saddle_node: bool,

    /// Free parameter for the fold search
    #[arg(long, value_name = "PARAM")]
    free: Option<String>,

    /// Search window `LO:HI` for the fold
    #[arg(long, value_name = "LO:HI")]
    range: Option<String>,

    /// Branch seeding the fold search (default `E4`)
    #[arg(long, value_name = "EQ")]
    branch: Option<String>,
}

#[derive(Args, Debug)]
struct ReproduceArgs {
    /// Figure id: `fig1`..`fig10`, or a panel such as `fig7b`
    figure: String,
}

/// JSON config file shape.  Unknown keys are rejected so typos surface
/// as configuration errors instead of silently doing nothing.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    preset: Option<String>,
    params: Option<BTreeMap<String, f64>>,
    out: Option<PathBuf>,
    format: Option<Format>,
    jobs: Option<usize>,
    simulate: Option<SimulateBlock>,
    #[serde(rename = "continue")]
    continuation: Option<ContinueBlock>,
    codim2: Option<Codim2Block>,
    #[serde(rename = "normal-form")]
    normal_form: Option<NormalFormBlock>,
    verify: Option<VerifyBlock>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct SimulateBlock {
    init: Option<String>,
    tmax: Option<f64>,
    stride: Option<f64>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct ContinueBlock {
    free: Option<String>,
    range: Option<String>,
    branch: Option<String>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct Codim2Block {
    curve: Option<String>,
    free: Option<String>,
    range: Option<String>,
    range2: Option<String>,
    region: Option<bool>,
    grid: Option<String>,
    branch: Option<String>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct NormalFormBlock {
    at: Option<Vec<String>>,
    free: Option<String>,
    branch: Option<String>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct VerifyBlock {
    free: Option<String>,
    range: Option<String>,
    branch: Option<String>,
}

/// Everything a command handler needs beyond its own flags.
pub(crate) struct Ctx {
    pub params: Params,
    pub out: PathBuf,
    pub jobs: usize,
    svg: bool,
    json: bool,
}

/// Entry point used by the `stagehunt` binary.
pub fn run() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help / --version arrive here as non-error "errors".
            let code = if e.use_stderr() { 2u8 } else { 0u8 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let (code, msg) = match failure {
                Failure::Config(m) => (2, m),
                Failure::Numerical(m) => (3, m),
                Failure::Golden(m) => (4, m),
            };
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let file = load_config(&cli.common)?;
    let ctx = resolve(&cli.common, &file)?;
    match &cli.cmd {
        Cmd::Simulate(args) => cmd_simulate(&ctx, args, file.simulate.unwrap_or_default()),
        Cmd::Analyze => cmd_analyze(&ctx),
        Cmd::Continue(args) => cmd_continue(&ctx, args, file.continuation.unwrap_or_default()),
        Cmd::Codim2(args) => cmd_codim2(&ctx, args, file.codim2.unwrap_or_default()),
        Cmd::NormalForm(args) => cmd_normal_form(&ctx, args, file.normal_form.unwrap_or_default()),
        Cmd::Verify(args) => cmd_verify(&ctx, args, file.verify.unwrap_or_default()),
        Cmd::Reproduce(args) => reproduce::run(&args.figure, &ctx),
    }
}

fn load_config(common: &Common) -> CliResult<FileConfig> {
    match &common.config {
        None => Ok(FileConfig::default()),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                Failure::config(format!("cannot read config {}: {e}", path.display()))
            })?;
            serde_json::from_str(&text)
                .map_err(|e| Failure::config(format!("invalid config {}: {e}", path.display())))
        }
    }
}

fn resolve(common: &Common, file: &FileConfig) -> CliResult<Ctx> {
    let mut params = Params::table1();
    if let Some(name) = &file.preset {
        params = preset(name)?;
    }
    if let Some(overrides) = &file.params {
        for (name, value) in overrides {
            let id = param_from_name(name)
                .ok_or_else(|| Failure::config(format!("unknown parameter `{name}` in config")))?;
            params.set(id, *value);
        }
    }
    if let Some(name) = &common.preset {
        params = preset(name)?;
    }
    for assignment in &common.set {
        let (id, value) = parse_assignment(assignment)?;
        params.set(id, value);
    }
    params
        .validate()
        .map_err(|e| Failure::config(format!("invalid parameters: {e}")))?;

    let out = common
        .out
        .clone()
        .or_else(|| file.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let format = common.format.or(file.format).unwrap_or(Format::Csv);
    let jobs = common.jobs.or(file.jobs).unwrap_or(1).max(1);
    Ok(Ctx {
        params,
        out,
        jobs,
        svg: format == Format::Svg,
        json: format == Format::Json,
    })
}

fn preset(name: &str) -> CliResult<Params> {
    match name {
        "table1" => Ok(Params::table1()),
        "table2" => Ok(Params::table2()),
        other => Err(Failure::config(format!(
            "unknown preset `{other}` (expected `table1` or `table2`)"
        ))),
    }
}

// ---------------------------------------------------------------------
// Flag parsing helpers (shared with the reproduce pipelines).

pub(crate) fn param_from_name(name: &str) -> Option<ParamId> {
    ParamId::ALL.into_iter().find(|id| id.name() == name)
}

fn parse_assignment(text: &str) -> CliResult<(ParamId, f64)> {
    let (name, value) = text
        .split_once('=')
        .ok_or_else(|| Failure::config(format!("expected NAME=VALUE, got `{text}`")))?;
    let id = param_from_name(name.trim())
        .ok_or_else(|| Failure::config(format!("unknown parameter `{}`", name.trim())))?;
    let value: f64 = value
        .trim()
        .parse()
        .map_err(|_| Failure::config(format!("`{text}`: value is not a number")))?;
    Ok((id, value))
}

fn parse_param(name: &str) -> CliResult<ParamId> {
    param_from_name(name).ok_or_else(|| Failure::config(format!("unknown parameter `{name}`")))
}

fn parse_range(text: &str) -> CliResult<(f64, f64)> {
    let parsed = text.split_once(':').and_then(|(lo, hi)| {
        let lo: f64 = lo.trim().parse().ok()?;
        let hi: f64 = hi.trim().parse().ok()?;
        Some((lo, hi))
    });
    match parsed {
        Some((lo, hi)) if lo < hi => Ok((lo, hi)),
        _ => Err(Failure::config(format!(
            "expected a range LO:HI with LO < HI, got `{text}`"
        ))),
    }
}

/// `E1`..`E4`, `interior-low`/`interior-high`/`prey-only`/`extinction`.
fn parse_equilibrium_name(name: &str) -> CliResult<EquilibriumKind> {
    match name.to_ascii_lowercase().as_str() {
        "e1" | "extinction" => Ok(EquilibriumKind::Extinction),
        "e2" | "prey-only" => Ok(EquilibriumKind::PreyOnly),
        "e3" | "interior-high" => Ok(EquilibriumKind::InteriorHigh),
        "e4" | "interior-low" => Ok(EquilibriumKind::InteriorLow),
        other => Err(Failure::config(format!(
            "unknown equilibrium `{other}` (expected E1..E4)"
        ))),
    }
}

pub(crate) fn e_label(kind: EquilibriumKind) -> &'static str {
    match kind {
        EquilibriumKind::Extinction => "E1",
        EquilibriumKind::PreyOnly => "E2",
        EquilibriumKind::InteriorHigh => "E3",
        EquilibriumKind::InteriorLow => "E4",
    }
}

/// Looks the equilibrium up at the given parameters, failing when it is
/// not feasible there.
pub(crate) fn equilibrium_state(p: &Params, kind: EquilibriumKind) -> CliResult<State> {
    all_equilibria(p)
        .into_iter()
        .find(|eq| eq.kind == kind)
        .map(|eq| eq.state)
        .ok_or_else(|| {
            Failure::numerical(format!(
                "equilibrium {} is not feasible at these parameters",
                e_label(kind)
            ))
        })
}

fn parse_init(text: &str, p: &Params) -> CliResult<State> {
    let lowered = text.to_ascii_lowercase();
    if let Some(name) = lowered.strip_prefix("near-") {
        let kind = parse_equilibrium_name(name)?;
        let eq = equilibrium_state(p, kind)?;
        return Ok(State::new(eq.x * 1.15, eq.y1, eq.y2, eq.y3));
    }
    if lowered.starts_with('e') && lowered.len() == 2 {
        let kind = parse_equilibrium_name(&lowered)?;
        return equilibrium_state(p, kind);
    }
    let fields: Vec<&str> = text.split(',').collect();
    if fields.len() != 4 {
        return Err(Failure::config(format!(
            "expected an initial state `x,y1,y2,y3` (or E1..E4 / near-E4), got `{text}`"
        )));
    }
    let mut values = [0.0_f64; 4];
    for (slot, field) in values.iter_mut().zip(&fields) {
        *slot = field
            .trim()
            .parse()
            .map_err(|_| Failure::config(format!("`{text}`: `{field}` is not a number")))?;
    }
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Failure::config(
            "initial populations must be finite and nonnegative".to_string(),
        ));
    }
    Ok(State::new(values[0], values[1], values[2], values[3]))
}

/// Fixed-precision float with trailing zeros trimmed, for summary lines.
pub(crate) fn trim_float(value: f64, precision: usize) -> String {
    let mut s = format!("{value:.precision$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    s
}

fn params_line(p: &Params) -> String {
    ParamId::ALL
        .into_iter()
        .map(|id| format!("{}={}", id.name(), p.get(id)))
        .collect::<Vec<_>>()
        .join(" ")
}

// ---------------------------------------------------------------------
// File emission.

pub(crate) fn write_file(dir: &Path, name: &str, text: &str) -> CliResult<PathBuf> {
    fs::create_dir_all(dir)
        .map_err(|e| Failure::config(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, text)
        .map_err(|e| Failure::config(format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(path)
}

// ---------------------------------------------------------------------
// simulate

fn cmd_simulate(ctx: &Ctx, args: &SimulateArgs, block: SimulateBlock) -> CliResult<()> {
    let init_text = args
        .init
        .clone()
        .or(block.init)
        .ok_or_else(|| {
            Failure::config(
                "missing required --init\nusage: stagehunt simulate --init x,y1,y2,y3 [--tmax T] [--stride DT]"
                    .to_string(),
            )
        })?;
    let init = parse_init(&init_text, &ctx.params)?;
    let tmax = args.tmax.or(block.tmax).unwrap_or(50000.0);
    if !(tmax > 0.0 && tmax.is_finite()) {
        return Err(Failure::config(format!("--tmax must be positive, got {tmax}")));
    }
    let stride = args.stride.or(block.stride).unwrap_or(0.5);
    if !(stride >= 0.0 && stride.is_finite()) {
        return Err(Failure::config(format!(
            "--stride must be nonnegative, got {stride}"
        )));
    }

    let cfg = IntegratorConfig {
        tmax,
        dense_stride: (stride > 0.0).then_some(stride),
        ..IntegratorConfig::default()
    };
    let traj = integrate(&ctx.params, &init, &cfg)
        .map_err(|e| Failure::numerical(format!("integration failed: {e}")))?;
    let attractor = detect_attractor(&ctx.params, &traj);
    let (t_end, s_end) = traj.last();

    println!("parameters: {}", params_line(&ctx.params));
    println!(
        "init: ({}, {}, {}, {})",
        init.x, init.y1, init.y2, init.y3
    );
    println!(
        "integrated to t = {} ({} samples, {} accepted / {} rejected steps)",
        t_end,
        traj.len(),
        traj.steps_accepted,
        traj.steps_rejected
    );
    println!(
        "final: x={:.6e} y1={:.6e} y2={:.6e} y3={:.6e}",
        s_end.x, s_end.y1, s_end.y2, s_end.y3
    );
    let verdict = match attractor {
        Attractor::Equilibrium { kind, distance } => {
            format!("equilibrium {} (sup distance {distance:.2e})", e_label(kind))
        }
        Attractor::LimitCycle { amplitude } => match cycle_metrics(&traj, 0.2) {
            Ok(m) => format!(
                "limit_cycle (prey amplitude {amplitude:.4e}, period {:.4})",
                m.period
            ),
            Err(_) => format!("limit_cycle (prey amplitude {amplitude:.4e})"),
        },
        Attractor::Undecided => {
            "undecided (not settled within tmax; raise --tmax)".to_string()
        }
    };
    println!("verdict: {verdict}");

    write_file(&ctx.out, "trajectory.csv", &io::trajectory_csv(&traj))?;
    if ctx.svg {
        let plot = io::trajectory_plot("time series", &traj);
        write_file(&ctx.out, "trajectory.svg", &io::render_svg(&plot))?;
    }
    if ctx.json {
        let summary = serde_json::json!({
            "params": ctx.params,
            "init": [init.x, init.y1, init.y2, init.y3],
            "tmax": tmax,
            "samples": traj.len(),
            "final": [s_end.x, s_end.y1, s_end.y2, s_end.y3],
            "verdict": verdict,
        });
        write_file(
            &ctx.out,
            "simulate.json",
            &format!("{:#}\n", summary),
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------------
// analyze

fn verdict_name(v: StabilityVerdict) -> &'static str {
    match v {
        StabilityVerdict::Stable => "stable",
        StabilityVerdict::Saddle => "saddle",
        StabilityVerdict::CenterCandidate => "center candidate",
        StabilityVerdict::Unstable => "unstable",
    }
}

fn equilibrium_section(label: &str, name: &str, state: &State, report: &StabilityReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{label} {name}: state ({:.6}, {:.6}, {:.6}, {:.6})",
        state.x, state.y1, state.y2, state.y3
    );
    let eigen = report
        .spectrum
        .values
        .iter()
        .map(|z| {
            if z.im == 0.0 {
                format!("{:.6}", z.re)
            } else {
                format!("{:.6}{:+.6}i", z.re, z.im)
            }
        })
        .collect::<Vec<_>>()
        .join(", ");
    let _ = writeln!(s, "  eigenvalues: {eigen}");
    let c = &report.coeffs;
    let _ = writeln!(
        s,
        "  eps: eps1={:.6} eps2={:.6} eps3={:.6} eps4={:.6}",
        c.eps1, c.eps2, c.eps3, c.eps4
    );
    let t = &report.rh.tests;
    let _ = writeln!(
        s,
        "  tests [eps1, eps4, eps1*eps2-eps3, Delta]: [{:.6}, {:.6}, {:.6}, {:.6}]",
        t[0], t[1], t[2], t[3]
    );
    let _ = writeln!(s, "  verdict: {}", verdict_name(report.verdict));
    s
}

fn cmd_analyze(ctx: &Ctx) -> CliResult<()> {
    let p = &ctx.params;
    let existence = existence_report(p);
    let derivation = interior_equilibria(p);
    let equilibria = all_equilibria(p);

    println!("parameters: {}", params_line(p));
    println!(
        "interior quadratic: {:.6e} x^2 {:+.6e} x {:+.6e} = 0, mu^2 = {:.6e}",
        derivation.quadratic[0],
        derivation.quadratic[1],
        derivation.quadratic[2],
        derivation.mu_squared
    );
    println!(
        "existence: d2 < {:.6} {}; case1={} case2={} case3={}; {} interior equilibria",
        existence.d2_limit,
        if existence.d2_bound_ok { "holds" } else { "fails" },
        existence.case1,
        existence.case2,
        existence.case3,
        existence.interior_count
    );
    if existence.interior_count == 0 {
        println!("no interior equilibria at these parameters");
    }
    println!();

    let mut json_equilibria = Vec::new();
    for eq in &equilibria {
        let report = classify(&jacobian(&eq.state, p))
            .map_err(|e| Failure::numerical(format!("eigenvalue solve failed: {e}")))?;
        print!(
            "{}",
            equilibrium_section(e_label(eq.kind), eq.kind.label(), &eq.state, &report)
        );
        if eq.kind == EquilibriumKind::PreyOnly {
            let prey = classify_prey_only(p);
            match (prey.threshold, prey.case) {
                (Some(a2t), Some(case)) => println!(
                    "  closed form: case {case}, threshold a2t = {}",
                    trim_float(a2t, 6)
                ),
                (Some(a2t), None) => println!(
                    "  closed form: no stability case holds (threshold a2t = {})",
                    trim_float(a2t, 6)
                ),
                (None, _) => println!("  closed form: threshold undefined (a3 = c)"),
            }
        }
        println!();
        json_equilibria.push(serde_json::json!({
            "label": e_label(eq.kind),
            "kind": eq.kind.label(),
            "state": [eq.state.x, eq.state.y1, eq.state.y2, eq.state.y3],
            "eigenvalues": report.spectrum.values.iter()
                .map(|z| serde_json::json!({"re": z.re, "im": z.im}))
                .collect::<Vec<_>>(),
            "eps": [report.coeffs.eps1, report.coeffs.eps2, report.coeffs.eps3, report.coeffs.eps4],
            "tests": report.rh.tests,
            "stable": report.rh.stable,
            "verdict": verdict_name(report.verdict),
        }));
    }

    if ctx.json {
        let prey = classify_prey_only(p);
        let summary = serde_json::json!({
            "params": p,
            "existence": {
                "quadratic": derivation.quadratic,
                "mu_squared": derivation.mu_squared,
                "d2_limit": existence.d2_limit,
                "cases": [existence.case1, existence.case2, existence.case3],
                "interior_count": existence.interior_count,
            },
            "prey_only_case": prey.case,
            "prey_only_threshold": prey.threshold,
            "equilibria": json_equilibria,
        });
        write_file(&ctx.out, "analyze.json", &format!("{:#}\n", summary))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------
// continue

/// `kind param=value [l1=...]` — the one-line form used for every located
/// special point.
fn special_line(free: ParamId, s: &SpecialPoint) -> String {
    let mut line = format!("{} {}={:.9}", s.kind.label(), free.name(), s.param);
    if s.kind == SpecialKind::Hopf {
        match s.l1 {
            Some(l1) => {
                let _ = write!(line, " l1={l1:.6e}");
            }
            None => line.push_str(" l1=n/a"),
        }
    }
    line
}

fn stop_name(stop: StopReason) -> &'static str {
    match stop {
        StopReason::RangeBoundary => "range boundary",
        StopReason::MaxSteps => "step budget",
        StopReason::StepUnderflow => "step underflow",
    }
}

fn cmd_continue(ctx: &Ctx, args: &ContinueArgs, block: ContinueBlock) -> CliResult<()> {
    let free_name = args
        .free
        .clone()
        .or(block.free)
        .ok_or_else(|| Failure::config("missing required --free PARAM".to_string()))?;
    let free = parse_param(&free_name)?;
    let range_text = args
        .range
        .clone()
        .or(block.range)
        .ok_or_else(|| Failure::config("missing required --range LO:HI".to_string()))?;
    let range = parse_range(&range_text)?;
    let branch_name = args.branch.clone().or(block.branch);
    let kind = match &branch_name {
        Some(name) => parse_equilibrium_name(name)?,
        None => EquilibriumKind::InteriorLow,
    };

    let value = ctx.params.get(free);
    if !(range.0 <= value && value <= range.1) {
        return Err(Failure::config(format!(
            "current {} = {} lies outside --range {}:{}",
            free.name(),
            value,
            range.0,
            range.1
        )));
    }
    let seed = equilibrium_state(&ctx.params, kind)?;
    let cfg = ContinuationConfig::default();
    let curve = continue_equilibrium_both(&ctx.params, free, &seed, range, &cfg)
        .map_err(|e| Failure::numerical(format!("continuation failed: {e}")))?;

    println!("parameters: {}", params_line(&ctx.params));
    println!(
        "traced {} points of the {} branch over {} in [{}, {}] (stop: {})",
        curve.points.len(),
        e_label(kind),
        free.name(),
        range.0,
        range.1,
        stop_name(curve.stop)
    );
    if curve.specials.is_empty() {
        println!("no special points located");
    }
    for s in &curve.specials {
        println!("{}", special_line(free, s));
    }

    write_file(&ctx.out, "curve.csv", &io::curve_csv(&curve))?;
    write_file(&ctx.out, "specials.csv", &io::specials_csv(&curve.specials))?;
    if ctx.svg {
        let title = format!("equilibrium branch in {}", free.name());
        let plot = io::branch_plot(&title, free.name(), &curve);
        write_file(&ctx.out, "curve.svg", &io::render_svg(&plot))?;
    }
    Ok(())
}

// ---------------------------------------------------------------------
// codim2

/// Stitches the two half-traces of a locus into one curve ordered along
/// its arclength, mirroring [`continue_equilibrium_both`].
pub(crate) fn trace_locus_both(
    id: CurveId,
    p: &Params,
    free: (ParamId, ParamId),
    seed: &State,
    range1: (f64, f64),
    range2: (f64, f64),
    cfg: &Codim2Config,
) -> CliResult<Codim2Curve> {
    let down = trace_locus(id, p, free, seed, range1, range2, -1.0, cfg)
        .map_err(|e| Failure::numerical(format!("locus trace failed: {e}")))?;
    let up = trace_locus(id, p, free, seed, range1, range2, 1.0, cfg)
        .map_err(|e| Failure::numerical(format!("locus trace failed: {e}")))?;
    let mut curve = down;
    curve.points.reverse();
    curve.points.extend(up.points.into_iter().skip(1));
    curve.specials.reverse();
    curve.specials.extend(up.specials);
    curve.stop = up.stop;
    Ok(curve)
}

/// Locates a fold of the interior pair in `free2` by bisecting the
/// closed-form discriminant over `range2`, returning the parameter value
/// and the (double-root) fold state as a Newton seed.
pub(crate) fn seed_fold_in(
    p: &Params,
    free2: ParamId,
    range2: (f64, f64),
) -> CliResult<(f64, State)> {
    let mu2_at = |value: f64| interior_equilibria(&p.with(free2, value)).mu_squared;
    let n = 256;
    let (lo, hi) = range2;
    let mut prev_t = lo;
    let mut prev_f = mu2_at(lo);
    let mut bracket = None;
    for k in 1..=n {
        let t = lo + (hi - lo) * (k as f64) / (n as f64);
        let f_t = mu2_at(t);
        if prev_f.signum() != f_t.signum() {
            bracket = Some((prev_t, t, prev_f));
            break;
        }
        prev_t = t;
        prev_f = f_t;
    }
    let (mut a, mut b, mut f_a) = bracket.ok_or_else(|| {
        Failure::numerical(format!(
            "no fold of the interior pair in {} over [{}, {}] (discriminant does not change sign)",
            free2.name(),
            range2.0,
            range2.1
        ))
    })?;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let f_mid = mu2_at(mid);
        if f_mid.signum() == f_a.signum() {
            a = mid;
            f_a = f_mid;
        } else {
            b = mid;
        }
        if (b - a).abs() < 1e-14 * b.abs().max(1.0) {
            break;
        }
    }
    // State from the side where the pair still exists.
    let value = if mu2_at(a) >= 0.0 { a } else { b };
    let derivation = interior_equilibria(&p.with(free2, value));
    let candidate = derivation
        .high
        .or(derivation.low)
        .ok_or_else(|| Failure::numerical("fold bracketing lost the interior pair".to_string()))?;
    Ok((0.5 * (a + b), candidate.state))
}

/// Locates a Hopf point in `free2` by tracing the equilibrium branch over
/// `range2` and picking the Hopf special nearest the baseline value.
pub(crate) fn seed_hopf_in(
    p: &Params,
    free2: ParamId,
    range2: (f64, f64),
    kind: EquilibriumKind,
) -> CliResult<(f64, State)> {
    let seed = equilibrium_state(p, kind)?;
    let cfg = ContinuationConfig::default();
    let curve = continue_equilibrium_both(p, free2, &seed, range2, &cfg)
        .map_err(|e| Failure::numerical(format!("Hopf search failed: {e}")))?;
    let baseline = p.get(free2);
    curve
        .specials
        .iter()
        .filter(|s| s.kind == SpecialKind::Hopf)
        .min_by(|a, b| {
            (a.param - baseline)
                .abs()
                .total_cmp(&(b.param - baseline).abs())
        })
        .map(|s| (s.param, s.state))
        .ok_or_else(|| {
            Failure::numerical(format!(
                "no Hopf point of the {} branch in {} over [{}, {}]",
                e_label(kind),
                free2.name(),
                range2.0,
                range2.1
            ))
        })
}

fn parse_free_pair(text: &str) -> CliResult<(ParamId, ParamId)> {
    let (p1, p2) = text
        .split_once(',')
        .ok_or_else(|| Failure::config(format!("expected --free P1,P2, got `{text}`")))?;
    let p1 = parse_param(p1.trim())?;
    let p2 = parse_param(p2.trim())?;
    if p1 == p2 {
        return Err(Failure::config(
            "the two free parameters must differ".to_string(),
        ));
    }
    Ok((p1, p2))
}

fn parse_grid(text: &str) -> CliResult<(usize, usize)> {
    let parse_n = |s: &str| -> CliResult<usize> {
        match s.trim().parse::<usize>() {
            Ok(n) if n >= 2 => Ok(n),
            _ => Err(Failure::config(format!("grid size `{s}` must be >= 2"))),
        }
    };
    match text.split_once('x') {
        Some((n1, n2)) => Ok((parse_n(n1)?, parse_n(n2)?)),
        None => {
            let n = parse_n(text)?;
            Ok((n, n))
        }
    }
}

/// Polyline plot of a two-parameter locus with its special points.
pub(crate) fn codim2_plot(title: &str, curve: &Codim2Curve) -> io::Plot {
    io::Plot {
        title: title.to_string(),
        x_label: curve.free.0.name().to_string(),
        y_label: curve.free.1.name().to_string(),
        series: vec![io::Series {
            label: match curve.id {
                CurveId::Fold => "fold locus".to_string(),
                CurveId::Hopf => "Hopf locus".to_string(),
            },
            color: match curve.id {
                CurveId::Fold => io::PALETTE[0],
                CurveId::Hopf => io::PALETTE[1],
            },
            dashed: false,
            points: curve.points.iter().map(|q| (q.p1, q.p2)).collect(),
        }],
        markers: curve
            .specials
            .iter()
            .map(|s| io::Marker {
                x: s.p1,
                y: s.p2,
                color: "#222222",
                label: s.kind.label().to_string(),
            })
            .collect(),
        cells: Vec::new(),
    }
}

fn region_counts(cells: &[RegionCell]) -> String {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for cell in cells {
        *counts.entry(cell.label).or_default() += 1;
    }
    counts
        .into_iter()
        .map(|(label, n)| format!("{label}={n}"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn cmd_codim2(ctx: &Ctx, args: &Codim2Args, block: Codim2Block) -> CliResult<()> {
    let free_text = args
        .free
        .clone()
        .or(block.free)
        .ok_or_else(|| Failure::config("missing required --free P1,P2".to_string()))?;
    let free = parse_free_pair(&free_text)?;
    let range1 = parse_range(
        &args
            .range
            .clone()
            .or(block.range)
            .ok_or_else(|| Failure::config("missing required --range LO:HI".to_string()))?,
    )?;
    let range2 = parse_range(
        &args
            .range2
            .clone()
            .or(block.range2)
            .ok_or_else(|| Failure::config("missing required --range2 LO:HI".to_string()))?,
    )?;
    let region = args.region || block.region.unwrap_or(false);

    println!("parameters: {}", params_line(&ctx.params));

    if region {
        let (n1, n2) = parse_grid(&args.grid.clone().or(block.grid).unwrap_or_else(|| "40".into()))?;
        let cells = region_map(&ctx.params, free, range1, range2, n1, n2, ctx.jobs);
        println!(
            "region map {}x{} over {} in [{}, {}] x {} in [{}, {}]",
            n1,
            n2,
            free.0.name(),
            range1.0,
            range1.1,
            free.1.name(),
            range2.0,
            range2.1
        );
        println!("{}", region_counts(&cells));
        write_file(&ctx.out, "region.csv", &io::region_csv(&cells))?;
        if ctx.svg {
            let title = format!("attractor regimes in ({}, {})", free.0.name(), free.1.name());
            let plot = io::region_plot(
                &title,
                free.0.name(),
                free.1.name(),
                &cells,
                (range1.1 - range1.0) / n1 as f64,
                (range2.1 - range2.0) / n2 as f64,
            );
            write_file(&ctx.out, "region.svg", &io::render_svg(&plot))?;
        }
        return Ok(());
    }

    let curve_name = args
        .curve
        .clone()
        .or(block.curve)
        .ok_or_else(|| Failure::config("missing required --curve fold|hopf".to_string()))?;
    let id = match curve_name.to_ascii_lowercase().as_str() {
        "fold" => CurveId::Fold,
        "hopf" => CurveId::Hopf,
        other => {
            return Err(Failure::config(format!(
                "unknown curve `{other}` (expected `fold` or `hopf`)"
            )))
        }
    };
    let kind = match args.branch.clone().or(block.branch) {
        Some(name) => parse_equilibrium_name(&name)?,
        None => EquilibriumKind::InteriorLow,
    };

    // Land on the locus at the baseline value of the first parameter by
    // solving in the second, then trace in both senses.
    let (p2_on, state_on) = match id {
        CurveId::Fold => seed_fold_in(&ctx.params, free.1, range2)?,
        CurveId::Hopf => seed_hopf_in(&ctx.params, free.1, range2, kind)?,
    };
    let p_on = ctx.params.with(free.1, p2_on);
    let cfg = Codim2Config::default();
    let curve = trace_locus_both(id, &p_on, free, &state_on, range1, range2, &cfg)?;

    println!(
        "seeded at {}={:.9}, {}={:.9}",
        free.0.name(),
        ctx.params.get(free.0),
        free.1.name(),
        p2_on
    );
    println!(
        "traced {} points of the {} locus over ({}, {})",
        curve.points.len(),
        match id {
            CurveId::Fold => "fold",
            CurveId::Hopf => "Hopf",
        },
        free.0.name(),
        free.1.name()
    );
    if curve.specials.is_empty() {
        println!("no codimension-two points located");
    }
    for s in &curve.specials {
        println!(
            "{} {}={:.9} {}={:.9}",
            s.kind.label(),
            free.0.name(),
            s.p1,
            free.1.name(),
            s.p2
        );
    }

    write_file(&ctx.out, "codim2_curve.csv", &io::codim2_curve_csv(&curve))?;
    write_file(
        &ctx.out,
        "codim2_specials.csv",
        &io::codim2_specials_csv(&curve.specials),
    )?;
    if ctx.svg {
        let title = format!(
            "{} locus in ({}, {})",
            match id {
                CurveId::Fold => "fold",
                CurveId::Hopf => "Hopf",
            },
            free.0.name(),
            free.1.name()
        );
        write_file(
            &ctx.out,
            "codim2_curve.svg",
            &io::render_svg(&codim2_plot(&title, &curve)),
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------------
// normal-form

fn cmd_normal_form(ctx: &Ctx, args: &NormalFormArgs, block: NormalFormBlock) -> CliResult<()> {
    let mut p = ctx.params;
    let assignments = if args.at.is_empty() {
        block.at.unwrap_or_default()
    } else {
        args.at.clone()
    };
    for assignment in &assignments {
        let (id, value) = parse_assignment(assignment)?;
        p.set(id, value);
    }
    p.validate()
        .map_err(|e| Failure::config(format!("invalid parameters: {e}")))?;

    let kind = match args.branch.clone().or(block.branch) {
        Some(name) => parse_equilibrium_name(&name)?,
        None => EquilibriumKind::InteriorLow,
    };
    let eq = equilibrium_state(&p, kind)?;
    let free = match args.free.clone().or(block.free) {
        Some(name) => Some(parse_param(&name)?),
        None => None,
    };

    let nf = match free {
        Some(id) => hopf_normal_form_with_transversality(&p, &eq, id),
        None => hopf_normal_form(&p, &eq),
    }
    .map_err(|e| Failure::numerical(format!("normal form failed: {e}")))?;

    println!("parameters: {}", params_line(&p));
    println!(
        "equilibrium {}: ({:.9}, {:.9}, {:.9}, {:.9})",
        e_label(kind),
        eq.x,
        eq.y1,
        eq.y2,
        eq.y3
    );
    print!("{}", io::hopf_normal_form_text(&nf));

    let json = io::hopf_normal_form_json(&nf);
    write_file(&ctx.out, "normal_form.json", &format!("{json:#}\n"))?;
    if ctx.json {
        println!("{json:#}");
    }
    Ok(())
}

// ---------------------------------------------------------------------
// verify

fn cmd_verify(ctx: &Ctx, args: &VerifyArgs, block: VerifyBlock) -> CliResult<()> {
    if args.transcritical {
        return verify_transcritical_cmd(ctx);
    }
    // clap's argument group guarantees exactly one of the two flags.
    let free_name = args
        .free
        .clone()
        .or(block.free)
        .ok_or_else(|| Failure::config("--saddle-node requires --free PARAM".to_string()))?;
    let free = parse_param(&free_name)?;
    let range = parse_range(&args.range.clone().or(block.range).ok_or_else(|| {
        Failure::config("--saddle-node requires --range LO:HI".to_string())
    })?)?;
    let kind = match args.branch.clone().or(block.branch) {
        Some(name) => parse_equilibrium_name(&name)?,
        None => EquilibriumKind::InteriorLow,
    };
    verify_saddle_node_cmd(ctx, free, range, kind)
}

fn verify_transcritical_cmd(ctx: &Ctx) -> CliResult<()> {
    let a2t = transcritical_a2(&ctx.params)
        .map_err(|e| Failure::numerical(format!("threshold undefined: {e}")))?;
    if !(a2t.is_finite() && a2t > 0.0) {
        return Err(Failure::numerical(format!(
            "critical adult predation rate a2t = {a2t} is not a positive rate; no transcritical \
             point on this slice"
        )));
    }
    let at_bp = ctx.params.with(ParamId::A2, a2t);
    let check = verify_transcritical(&at_bp)
        .map_err(|e| Failure::numerical(format!("certificate failed: {e}")))?;

    println!("parameters: {}", params_line(&ctx.params));
    println!("transcritical certificate at the prey-only state, a2 = a2t");
    println!(
        "null residuals: |J l| = {:.2e}, |J^T m| = {:.2e}",
        check.residual_l, check.residual_m
    );
    println!("q0 = {:.6e} (parameter direction; must vanish)", check.q0);
    println!("q1 = {:.6e} (transversality projection)", check.q1);
    println!(
        "q2 = {:.6e} (quadratic projection; closed form {:.6e})",
        check.q2, check.q2_closed
    );
    let pass = check.residual_l < 1e-8
        && check.residual_m < 1e-8
        && check.q0.abs() < 1e-10
        && check.q1.abs() > 1e-12
        && check.q2.abs() > 1e-12
        && (check.q2 - check.q2_closed).abs() <= 1e-8 * check.q2.abs().max(1.0);
    println!(
        "a2t={} {}",
        trim_float(a2t, 6),
        if pass { "PASS" } else { "FAIL" }
    );
    if pass {
        Ok(())
    } else {
        Err(Failure::numerical(
            "transcritical certificate did not meet its thresholds (see stdout)".to_string(),
        ))
    }
}

fn verify_saddle_node_cmd(
    ctx: &Ctx,
    free: ParamId,
    range: (f64, f64),
    kind: EquilibriumKind,
) -> CliResult<()> {
    let value = ctx.params.get(free);
    if !(range.0 <= value && value <= range.1) {
        return Err(Failure::config(format!(
            "current {} = {} lies outside --range {}:{}",
            free.name(),
            value,
            range.0,
            range.1
        )));
    }
    let seed = equilibrium_state(&ctx.params, kind)?;
    let cfg = ContinuationConfig::default();
    let curve = continue_equilibrium_both(&ctx.params, free, &seed, range, &cfg)
        .map_err(|e| Failure::numerical(format!("fold search failed: {e}")))?;
    let folds: Vec<&SpecialPoint> = curve
        .specials
        .iter()
        .filter(|s| s.kind == SpecialKind::Fold)
        .collect();
    if folds.is_empty() {
        return Err(Failure::numerical(format!(
            "no fold located on the {} branch in {} over [{}, {}]",
            e_label(kind),
            free.name(),
            range.0,
            range.1
        )));
    }

    println!("parameters: {}", params_line(&ctx.params));
    let mut all_pass = true;
    for lp in folds {
        let at_fold = ctx.params.with(free, lp.param);
        let check = verify_saddle_node(&at_fold, &lp.state, free)
            .map_err(|e| Failure::numerical(format!("certificate failed: {e}")))?;
        println!("saddle-node certificate at LP {}={:.9}", free.name(), lp.param);
        println!(
            "  eps4 = {:.6e} (closed-form degeneracy match |diff| = {:.2e})",
            check.eps4,
            (check.eps4 - check.degeneracy).abs()
        );
        println!(
            "  null residuals: |J chi1| = {:.2e}, |J^T chi2| = {:.2e}",
            check.residual_chi1, check.residual_chi2
        );
        println!(
            "  s0 = {:.6e} (parameter projection), s1 = {:.6e} (quadratic projection)",
            check.s0, check.s1
        );
        let pass = check.eps4.abs() < 1e-6
            && check.residual_chi1 < 1e-6
            && check.residual_chi2 < 1e-6
            && check.s0.abs() > 1e-12
            && check.s1.abs() > 1e-12;
        println!(
            "LP {}={} {}",
            free.name(),
            trim_float(lp.param, 6),
            if pass { "PASS" } else { "FAIL" }
        );
        all_pass &= pass;
    }
    if all_pass {
        Ok(())
    } else {
        Err(Failure::numerical(
            "saddle-node certificate did not meet its thresholds (see stdout)".to_string(),
        ))
    }
}
