//! JSON run configurations and the `setnewton` command set.
//!
//! `solve` runs one configuration and writes `history.csv`, `summary.json`
//! and `settrace.csv`. `compare` runs two methods on the same problem and
//! writes aligned convergence curves (`compare.csv`) plus both summaries
//! (`compare.json`). `sweep` runs every method over a list of grid sizes and
//! writes one `sweep.csv` row per (size, method).
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 numerical
//! non-convergence. The output directory is `--out`, else `$SETNEWTON_OUT`,
//! else the config's `output_dir`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::driver::{plain_newton, solve_with_sets, SetSolveConfig, SetSolveResult, Variant};
use crate::krylov::GmresConfig;
use crate::newton::{ForcingConfig, NewtonConfig, NewtonStatus};
use crate::problems::{NonlinearPoisson2D, SpikeBvp1D};
use crate::setrules::{RuleConfig, RuleKind};
use crate::NonlinearProblem;

pub const OUT_ENV: &str = "SETNEWTON_OUT";

#[derive(Debug, Parser)]
#[command(
    name = "setnewton",
    version,
    about = "Newton-GMRES with runtime active-set reduction"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Solve,
    Compare,
    Sweep,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a single configuration.
    Solve(CommonArgs),
    /// Run two methods on the same problem and compare convergence.
    Compare(CommonArgs),
    /// Run every method over a list of grid sizes.
    Sweep(CommonArgs),
}

#[derive(Debug, clap::Args)]
pub struct CommonArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, overrides the environment and the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl Command {
    pub fn kind(&self) -> CommandKind {
        match self {
            Command::Solve(_) => CommandKind::Solve,
            Command::Compare(_) => CommandKind::Compare,
            Command::Sweep(_) => CommandKind::Sweep,
        }
    }

    pub fn args(&self) -> &CommonArgs {
        match self {
            Command::Solve(a) | Command::Compare(a) | Command::Sweep(a) => a,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Solver(#[from] crate::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solver(e) if !matches!(e, crate::Error::InvalidConfig(_)) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Newton,
    Set,
    SetVariant,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Newton => "newton",
            Method::Set => "set",
            Method::SetVariant => "set_variant",
        }
    }
}

/// Everything one run needs. Missing keys take the defaults below; unknown
/// keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// `spike1d` or `demo2d`.
    pub problem: String,
    /// Interior nodes (spike1d) or nodes per side (demo2d).
    pub n: usize,
    pub method: Method,
    pub rule: RuleKind,
    pub alpha: f64,
    pub min_set_size: usize,
    pub tau_abs: f64,
    pub tau_rel: f64,
    pub max_newton_iters: usize,
    pub eta0: f64,
    pub eta_max: f64,
    pub eta_min: f64,
    pub gamma: f64,
    pub gmres_restart: usize,
    pub gmres_max_iters: usize,
    pub gmres_rtol: f64,
    pub global_budget: usize,
    pub inner_max_iters: usize,
    pub max_outer_cycles: usize,
    pub global_eta: f64,
    pub output_dir: PathBuf,
    /// Grid sizes for `sweep`.
    pub sizes: Vec<usize>,
    /// Methods for `sweep` (all of them) and `compare` (the first two).
    pub methods: Vec<Method>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let newton = NewtonConfig::default();
        let set = SetSolveConfig::default();
        Self {
            problem: "spike1d".into(),
            n: 100,
            method: Method::Newton,
            rule: set.rule.kind,
            alpha: set.rule.alpha,
            min_set_size: 0,
            tau_abs: newton.tau_abs,
            tau_rel: newton.tau_rel,
            max_newton_iters: newton.max_iters,
            eta0: newton.forcing.eta0,
            eta_max: newton.forcing.eta_max,
            eta_min: newton.forcing.eta_min,
            gamma: newton.forcing.gamma,
            gmres_restart: newton.gmres.restart,
            gmres_max_iters: newton.gmres.max_total_iters,
            gmres_rtol: newton.gmres.rtol,
            global_budget: set.global_budget,
            inner_max_iters: set.inner_max_iters,
            max_outer_cycles: set.max_outer_cycles,
            global_eta: set.global_eta,
            output_dir: PathBuf::from("out"),
            sizes: Vec::new(),
            methods: vec![Method::Newton, Method::Set],
        }
    }
}

impl RunConfig {
    /// Parses a config, reporting errors as `path:line:column: message`.
    pub fn from_json(text: &str, origin: &Path) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| {
            CliError::Config(format!(
                "{}:{}:{}: {}",
                origin.display(),
                e.line(),
                e.column(),
                e
            ))
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text, path)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if !matches!(self.problem.as_str(), "spike1d" | "demo2d") {
            return Err(CliError::Config(format!(
                "unknown problem `{}` (expected spike1d or demo2d)",
                self.problem
            )));
        }
        if self.n < 2 {
            return Err(CliError::Config(format!(
                "n must be at least 2, got {}",
                self.n
            )));
        }
        self.set_config(self.method).validate()?;
        Ok(())
    }

    pub fn newton_config(&self) -> NewtonConfig {
        let base = NewtonConfig::default();
        NewtonConfig {
            tau_abs: self.tau_abs,
            tau_rel: self.tau_rel,
            max_iters: self.max_newton_iters,
            forcing: ForcingConfig {
                eta0: self.eta0,
                gamma: self.gamma,
                eta_max: self.eta_max,
                eta_min: self.eta_min,
                ..base.forcing
            },
            linesearch: base.linesearch,
            gmres: GmresConfig {
                restart: self.gmres_restart,
                max_total_iters: self.gmres_max_iters,
                rtol: self.gmres_rtol,
            },
        }
    }

    pub fn set_config(&self, method: Method) -> SetSolveConfig {
        SetSolveConfig {
            rule: RuleConfig {
                kind: self.rule,
                alpha: self.alpha,
                min_set_size: self.min_set_size,
            },
            variant: if method == Method::SetVariant {
                Variant::SingleSeries
            } else {
                Variant::InnerSolve
            },
            global_budget: self.global_budget,
            inner_max_iters: self.inner_max_iters,
            newton: self.newton_config(),
            max_outer_cycles: self.max_outer_cycles,
            global_eta: self.global_eta,
        }
    }

    pub fn build_problem(&self, n: usize) -> Result<Box<dyn NonlinearProblem>, CliError> {
        Ok(match self.problem.as_str() {
            "spike1d" => Box::new(SpikeBvp1D::new(n)?),
            "demo2d" => Box::new(NonlinearPoisson2D::square(n)?),
            other => return Err(CliError::Config(format!("unknown problem `{other}`"))),
        })
    }

    /// `--out`, then `$SETNEWTON_OUT`, then `output_dir`.
    pub fn resolve_output_dir(&self, cli_out: Option<&Path>) -> PathBuf {
        if let Some(p) = cli_out {
            return p.to_path_buf();
        }
        match std::env::var_os(OUT_ENV) {
            Some(v) if !v.is_empty() => PathBuf::from(v),
            _ => self.output_dir.clone(),
        }
    }
}

/// Runs `method` from a zero initial guess.
pub fn run_method(
    cfg: &RunConfig,
    problem: &dyn NonlinearProblem,
    method: Method,
) -> Result<SetSolveResult, CliError> {
    let x0 = vec![0.0; problem.dim()];
    let result = match method {
        Method::Newton => plain_newton(problem, &x0, &cfg.newton_config())?,
        Method::Set | Method::SetVariant => solve_with_sets(problem, &x0, &cfg.set_config(method))?,
    };
    log::info!(
        "{} n={}: {:?} after {} nonlinear / {} linear iterations",
        method.as_str(),
        problem.dim(),
        result.status,
        result.total_nonlinear_iters,
        result.total_linear_iters
    );
    Ok(result)
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub method: Method,
    pub problem: String,
    pub n: usize,
    pub status: NewtonStatus,
    pub outer_cycles: usize,
    pub total_nonlinear_iters: usize,
    pub total_linear_iters: usize,
    pub reduced_work: usize,
    pub initial_norm: f64,
    pub final_global_norm: f64,
    pub max_error_vs_exact: Option<f64>,
    pub wall_time_ms: f64,
    pub set_size_trace: Vec<usize>,
}

impl Summary {
    pub fn new(
        cfg: &RunConfig,
        problem: &dyn NonlinearProblem,
        method: Method,
        r: &SetSolveResult,
    ) -> Self {
        Self {
            method,
            problem: cfg.problem.clone(),
            n: problem.dim(),
            status: r.status,
            outer_cycles: r.outer_cycles,
            total_nonlinear_iters: r.total_nonlinear_iters,
            total_linear_iters: r.total_linear_iters,
            reduced_work: r.reduced_work(),
            initial_norm: r.initial_norm,
            final_global_norm: r.final_global_norm,
            max_error_vs_exact: r.max_error_vs(problem),
            wall_time_ms: r.wall_time.as_secs_f64() * 1e3,
            set_size_trace: r.set_size_trace.clone(),
        }
    }
}

#[derive(Debug, Serialize)]
struct HistoryRow {
    iter: usize,
    phase: &'static str,
    set_size: usize,
    residual_norm: f64,
    global_residual_norm: Option<f64>,
    eta: Option<f64>,
    linear_iters: usize,
    lambda: Option<f64>,
}

fn history_rows(r: &SetSolveResult, dim: usize) -> Vec<HistoryRow> {
    let mut rows = vec![HistoryRow {
        iter: 0,
        phase: "initial",
        set_size: dim,
        residual_norm: r.initial_norm,
        global_residual_norm: Some(r.initial_norm),
        eta: None,
        linear_iters: 0,
        lambda: None,
    }];
    rows.extend(r.history.iter().map(|h| HistoryRow {
        iter: h.k,
        phase: h.phase.as_str(),
        set_size: h.set_size,
        residual_norm: h.residual_norm,
        global_residual_norm: h.global_residual_norm,
        eta: Some(h.eta),
        linear_iters: h.linear_iters,
        lambda: Some(h.lambda),
    }));
    rows
}

/// Writes to a sibling temp file and renames it into place.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    let tmp = path.with_extension("tmp");
    let mut f = fs::File::create(&tmp).map_err(io)?;
    f.write_all(bytes).map_err(io)?;
    f.sync_all().map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Config(format!("csv buffer: {e}")))
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("summaries serialize");
    s.push('\n');
    s.into_bytes()
}

fn settrace_bytes(r: &SetSolveResult) -> Vec<u8> {
    let mut s = String::from("iter,set_size,min_abs_index,max_abs_index,members\n");
    for f in &r.sets {
        s.push_str(&f.set.trace_line(f.iter));
        s.push('\n');
    }
    s.into_bytes()
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn status_code(all_converged: bool) -> i32 {
    if all_converged {
        0
    } else {
        2
    }
}

pub fn cmd_solve(cfg: &RunConfig, out: &Path) -> Result<i32, CliError> {
    let problem = cfg.build_problem(cfg.n)?;
    let r = run_method(cfg, problem.as_ref(), cfg.method)?;
    create_dir(out)?;
    write_atomic(
        &out.join("history.csv"),
        &csv_bytes(&history_rows(&r, problem.dim()))?,
    )?;
    let summary = Summary::new(cfg, problem.as_ref(), cfg.method, &r);
    write_atomic(&out.join("summary.json"), &json_bytes(&summary))?;
    write_atomic(&out.join("settrace.csv"), &settrace_bytes(&r))?;
    Ok(status_code(r.status.is_converged()))
}

#[derive(Debug, Serialize)]
struct CompareRow {
    iter: usize,
    a_residual_norm: Option<f64>,
    a_global_residual_norm: Option<f64>,
    b_residual_norm: Option<f64>,
    b_global_residual_norm: Option<f64>,
}

#[derive(Debug, Serialize)]
struct CompareReport {
    a: Summary,
    b: Summary,
    linear_iters: [usize; 2],
    reduced_work: [usize; 2],
}

/// Runs `methods[0]` (column prefix `a_`) against `methods[1]` (`b_`).
pub fn cmd_compare(cfg: &RunConfig, out: &Path) -> Result<i32, CliError> {
    let [ma, mb] = match cfg.methods.as_slice() {
        [a, b, ..] => [*a, *b],
        _ => {
            return Err(CliError::Config(
                "compare needs at least two entries in `methods`".into(),
            ))
        }
    };
    let problem = cfg.build_problem(cfg.n)?;
    let ra = run_method(cfg, problem.as_ref(), ma)?;
    let rb = run_method(cfg, problem.as_ref(), mb)?;
    let ha = history_rows(&ra, problem.dim());
    let hb = history_rows(&rb, problem.dim());

    let rows: Vec<CompareRow> = (0..ha.len().max(hb.len()))
        .map(|k| CompareRow {
            iter: k,
            a_residual_norm: ha.get(k).map(|h| h.residual_norm),
            a_global_residual_norm: ha.get(k).and_then(|h| h.global_residual_norm),
            b_residual_norm: hb.get(k).map(|h| h.residual_norm),
            b_global_residual_norm: hb.get(k).and_then(|h| h.global_residual_norm),
        })
        .collect();
    let report = CompareReport {
        linear_iters: [ra.total_linear_iters, rb.total_linear_iters],
        reduced_work: [ra.reduced_work(), rb.reduced_work()],
        a: Summary::new(cfg, problem.as_ref(), ma, &ra),
        b: Summary::new(cfg, problem.as_ref(), mb, &rb),
    };
    create_dir(out)?;
    write_atomic(&out.join("compare.csv"), &csv_bytes(&rows)?)?;
    write_atomic(&out.join("compare.json"), &json_bytes(&report))?;
    Ok(status_code(
        ra.status.is_converged() && rb.status.is_converged(),
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub size: usize,
    pub method: Method,
    pub status: String,
    pub nonlinear_iters: usize,
    pub outer_cycles: usize,
    pub linear_iters: usize,
    pub reduced_work: usize,
    pub wall_time_ms: f64,
    /// Semicolon-joined set sizes.
    pub set_sizes: String,
}

pub fn cmd_sweep(cfg: &RunConfig, out: &Path) -> Result<i32, CliError> {
    if cfg.sizes.is_empty() {
        return Err(CliError::Config(
            "sweep needs a non-empty `sizes` list".into(),
        ));
    }
    if cfg.methods.is_empty() {
        return Err(CliError::Config(
            "sweep needs a non-empty `methods` list".into(),
        ));
    }
    if let Some(&bad) = cfg.sizes.iter().find(|&&n| n < 2) {
        return Err(CliError::Config(format!("sweep size {bad} is below 2")));
    }
    let mut rows = Vec::new();
    let mut ok = true;
    for &size in &cfg.sizes {
        let problem = cfg.build_problem(size)?;
        for &method in &cfg.methods {
            let row = match run_method(cfg, problem.as_ref(), method) {
                Ok(r) => SweepRow {
                    size,
                    method,
                    status: serde_json::to_value(r.status)
                        .ok()
                        .and_then(|v| v.as_str().map(str::to_owned))
                        .unwrap_or_default(),
                    nonlinear_iters: r.total_nonlinear_iters,
                    outer_cycles: r.outer_cycles,
                    linear_iters: r.total_linear_iters,
                    reduced_work: r.reduced_work(),
                    wall_time_ms: r.wall_time.as_secs_f64() * 1e3,
                    set_sizes: r
                        .set_size_trace
                        .iter()
                        .map(|s| s.to_string())
                        .collect::<Vec<_>>()
                        .join(";"),
                },
                Err(e) => {
                    log::warn!("{} n={size}: {e}", method.as_str());
                    SweepRow {
                        size,
                        method,
                        status: format!("error: {e}"),
                        nonlinear_iters: 0,
                        outer_cycles: 0,
                        linear_iters: 0,
                        reduced_work: 0,
                        wall_time_ms: 0.0,
                        set_sizes: String::new(),
                    }
                }
            };
            ok &= row.status == "converged";
            rows.push(row);
        }
    }
    create_dir(out)?;
    write_atomic(&out.join("sweep.csv"), &csv_bytes(&rows)?)?;
    Ok(status_code(ok))
}

/// Loads, validates and dispatches. Returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let args = cli.command.args();
    let result = RunConfig::load(&args.config).and_then(|cfg| {
        cfg.validate()?;
        let out = cfg.resolve_output_dir(args.out.as_deref());
        match cli.command.kind() {
            CommandKind::Solve => cmd_solve(&cfg, &out),
            CommandKind::Compare => cmd_compare(&cfg, &out),
            CommandKind::Sweep => cmd_sweep(&cfg, &out),
        }
    });
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("setnewton: {e}");
            e.exit_code()
        }
    }
}
