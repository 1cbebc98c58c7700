//! Experiment harness behind the `ndi` binary: build a matrix, run one
//! iteration, write `trace.csv` and `summary.txt`, and optionally a gnuplot
//! script. [`reproduce_all`] runs the whole gallery suite and writes
//! `report.csv`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::gallery::{self, GallerySpec};
use crate::linalg::{self, Matrix};
use crate::polar::{self, PolarOptions};
use crate::sqrt::{self, SqrtOptions};
use crate::trace::{self, IterationTrace};

pub const DEFAULT_OUT_DIR: &str = "ndi-out";
pub const TRACE_HEADER: &str = "k,step_distance,error,bound";

/// Sharpness comparisons stop once the error drops below these floors.
pub const POLAR_SHARPNESS_FLOOR: f64 = 1e-10;
pub const SQRT_SHARPNESS_FLOOR: f64 = 1e-8;
/// Floor for the `error <= bound` check on every run.
pub const UPPER_BOUND_FLOOR: f64 = 1e-8;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),
    #[error("malformed trace csv: {0}")]
    MalformedCsv(String),
    #[error("start is infeasible (sigma_min(X0) = {sigma_min:.4} < 2 t0 = {two_t0:.4}) but bounds were required")]
    Infeasible { sigma_min: f64, two_t0: f64 },
    #[error("io error on {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(Error::NoConvergence { .. }) => 2,
            CliError::Infeasible { .. } => 3,
            _ => 1,
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| {
        if source.kind() == std::io::ErrorKind::NotFound {
            CliError::FileNotFound(path.to_path_buf())
        } else {
            CliError::Io { path: path.to_path_buf(), source }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MatrixSource {
    Gallery(GallerySpec),
    File(PathBuf),
}

impl MatrixSource {
    /// An existing path is read as a matrix file; anything else must be a
    /// gallery spec.
    pub fn parse(s: &str) -> Result<Self, CliError> {
        if Path::new(s).is_file() {
            return Ok(MatrixSource::File(s.into()));
        }
        s.parse().map(MatrixSource::Gallery).map_err(|e| CliError::Input(format!("{e} (and no such file)")))
    }

    pub fn load(&self) -> Result<Matrix, CliError> {
        match self {
            MatrixSource::Gallery(spec) => Ok(gallery::build(spec)?),
            MatrixSource::File(path) => read_matrix_file(path),
        }
    }

    fn label(&self) -> String {
        match self {
            MatrixSource::Gallery(spec) => spec.to_string(),
            MatrixSource::File(path) => path.display().to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum IterationKind {
    Polar,
    Sqrt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum X0Mode {
    /// `X0 = alpha_j I`.
    #[default]
    AlphaIdentity,
    /// `X0 = A / ||A||^(1/2)`.
    AlphaA,
    /// `X0` read from `--x0-file`.
    CustomFile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub matrix: MatrixSource,
    pub iteration: IterationKind,
    pub alpha_j: Option<u32>,
    pub x0_mode: X0Mode,
    pub x0_file: Option<PathBuf>,
    pub tol: f64,
    pub maxit: usize,
    pub output_dir: PathBuf,
    pub emit_plot: bool,
    pub force_fiedler_sqrt: bool,
    /// Fail with exit code 3 when the start is infeasible.
    pub require_bounds: bool,
}

impl RunConfig {
    pub fn new(matrix: MatrixSource, iteration: IterationKind, output_dir: impl Into<PathBuf>) -> Self {
        Self {
            matrix,
            iteration,
            alpha_j: None,
            x0_mode: X0Mode::AlphaIdentity,
            x0_file: None,
            tol: 1e-14,
            maxit: 100,
            output_dir: output_dir.into(),
            emit_plot: false,
            force_fiedler_sqrt: false,
            require_bounds: false,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let needs_alpha = self.iteration == IterationKind::Sqrt && self.x0_mode == X0Mode::AlphaIdentity;
        match (needs_alpha, self.alpha_j) {
            (true, None) => return Err(CliError::Input("--alpha-j is required for sqrt with alpha_identity".into())),
            (false, Some(_)) => {
                return Err(CliError::Input("--alpha-j only applies to sqrt with alpha_identity".into()))
            }
            (true, Some(0)) => return Err(CliError::Input("--alpha-j starts at 1".into())),
            _ => {}
        }
        if self.iteration == IterationKind::Sqrt && self.x0_mode == X0Mode::CustomFile && self.x0_file.is_none() {
            return Err(CliError::Input("--x0-mode custom_file needs --x0-file".into()));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(CliError::Input(format!("--tol must be positive, got {}", self.tol)));
        }
        if self.maxit == 0 {
            return Err(CliError::Input("--maxit must be >= 1".into()));
        }
        let fiedler = matches!(self.matrix, MatrixSource::Gallery(GallerySpec::Fiedler(_)));
        if fiedler && needs_alpha && !self.force_fiedler_sqrt {
            return Err(CliError::Input(
                "the square-root iteration does not converge on fiedler from alpha_j I; pass --force-fiedler-sqrt to run it anyway"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// Dense matrix text format: the dimension on the first line, then `n` rows
/// of whitespace-separated numbers.
pub fn parse_matrix_text(text: &str) -> Result<Matrix, CliError> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    let header = lines.next().ok_or_else(|| CliError::Input("empty matrix file".into()))?;
    let n: usize = header.parse().map_err(|_| CliError::Input(format!("bad dimension line {header:?}")))?;
    let mut data = Vec::with_capacity(n * n);
    let mut rows = 0;
    for line in lines {
        rows += 1;
        let row = line
            .split_whitespace()
            .map(|v| v.parse::<f64>().map_err(|_| CliError::Input(format!("bad number {v:?} in row {rows}"))))
            .collect::<Result<Vec<_>, _>>()?;
        if row.len() != n {
            return Err(CliError::Input(format!("row {rows} has {} entries, expected {n}", row.len())));
        }
        data.extend(row);
    }
    if rows != n {
        return Err(CliError::Input(format!("expected {n} rows, found {rows}")));
    }
    Ok(Matrix::new(n, data)?)
}

pub fn read_matrix_file(path: &Path) -> Result<Matrix, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    parse_matrix_text(&text)
}

/// `x` in scientific notation with `digits` significant digits and a signed
/// two-digit exponent, e.g. `2.3861e+08`.
pub fn sci(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let s = format!("{:.*e}", digits.saturating_sub(1), x);
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

fn opt_sci(x: Option<f64>) -> String {
    x.map(|v| sci(v, 10)).unwrap_or_default()
}

pub fn trace_csv(trace: &IterationTrace) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for s in &trace.steps {
        let _ = writeln!(out, "{},{},{},{}", s.k, opt_sci(s.step_distance), sci(s.error, 10), opt_sci(s.bound));
    }
    out
}

/// What a single run produced.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub matrix: String,
    pub iteration: IterationKind,
    pub t0: f64,
    pub gamma: Option<f64>,
    pub sigma_min_x0: Option<f64>,
    pub two_t0: Option<f64>,
    pub feasible: bool,
    pub iterations: usize,
    pub residual: f64,
    /// Largest error/bound gap above the sharpness floor, if any bounds.
    pub max_sharpness_gap: Option<f64>,
    pub trace: IterationTrace,
}

impl RunSummary {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "matrix={}", self.matrix);
        let iteration = match self.iteration {
            IterationKind::Polar => "polar",
            IterationKind::Sqrt => "sqrt",
        };
        let _ = writeln!(out, "iteration={iteration}");
        let _ = writeln!(out, "t0={}", sci(self.t0, 5));
        if let Some(s) = self.sigma_min_x0 {
            let _ = writeln!(out, "sigma_min_x0={s:.4}");
        }
        if let Some(v) = self.two_t0 {
            let _ = writeln!(out, "two_t0={v:.4}");
        }
        let key = if self.iteration == IterationKind::Polar { "gamma" } else { "gamma0" };
        match self.gamma {
            Some(g) => {
                let _ = writeln!(out, "{key}={}", sci(g, 5));
            }
            None => {
                let _ = writeln!(out, "{key}=NA");
            }
        }
        let _ = writeln!(out, "feasible={}", self.feasible);
        let _ = writeln!(out, "iterations={}", self.iterations);
        let _ = writeln!(out, "final_residual={}", sci(self.residual, 5));
        match self.max_sharpness_gap {
            Some(g) => {
                let _ = writeln!(out, "max_sharpness_gap={}", sci(g, 5));
            }
            None => {
                let _ = writeln!(out, "max_sharpness_gap=NA");
            }
        }
        out
    }
}

fn sqrt_start(cfg: &RunConfig, a: &Matrix) -> Result<Matrix, CliError> {
    match cfg.x0_mode {
        X0Mode::AlphaIdentity => {
            let alpha = sqrt::alpha_schedule(a, cfg.alpha_j.expect("validated"))?;
            Ok(Matrix::scaled_identity(a.n(), alpha))
        }
        X0Mode::AlphaA => Ok(a.scale(1.0 / linalg::spectral_norm(a)?.sqrt())),
        X0Mode::CustomFile => read_matrix_file(cfg.x0_file.as_deref().expect("validated")),
    }
}

/// Runs one experiment without touching the file system.
pub fn compute(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    cfg.validate()?;
    let a = cfg.matrix.load()?;
    let matrix = cfg.matrix.label();
    match cfg.iteration {
        IterationKind::Polar => {
            let r = polar::newton_polar(&a, PolarOptions { tol: cfg.tol, maxit: cfg.maxit, on_sigma: true })?;
            let residual = linalg::spectral_norm(&a.sub(&r.u.matmul(&r.h)?)?)?;
            let gap = trace::sharpness_from(&r.trace, 1, POLAR_SHARPNESS_FLOOR)?;
            Ok(RunSummary {
                matrix,
                iteration: cfg.iteration,
                t0: r.t0,
                gamma: Some(r.gamma),
                sigma_min_x0: None,
                two_t0: None,
                feasible: true,
                iterations: r.trace.iterations,
                residual,
                max_sharpness_gap: (gap.compared > 0).then_some(gap.max_gap),
                trace: r.trace,
            })
        }
        IterationKind::Sqrt => {
            let x0 = sqrt_start(cfg, &a)?;
            let r = sqrt::newton_sqrt(&a, &x0, SqrtOptions { tol: cfg.tol, maxit: cfg.maxit, ..Default::default() })?;
            let gap = if r.bound_available {
                let rep = trace::sharpness_from(&r.trace, 0, SQRT_SHARPNESS_FLOOR)?;
                (rep.compared > 0).then_some(rep.max_gap)
            } else {
                None
            };
            Ok(RunSummary {
                matrix,
                iteration: cfg.iteration,
                t0: r.report.t0,
                gamma: r.report.gamma0,
                sigma_min_x0: Some(r.report.sigma_min_x0),
                two_t0: Some(r.report.two_t0),
                feasible: r.report.feasible,
                iterations: r.trace.iterations,
                residual: r.residual,
                max_sharpness_gap: gap,
                trace: r.trace,
            })
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(io_err(path))
}

/// Runs one experiment and writes `trace.csv`, `summary.txt` and, if asked,
/// `plot.gp` into `cfg.output_dir`.
pub fn run_experiment(cfg: &RunConfig) -> Result<RunSummary, CliError> {
    let summary = compute(cfg)?;
    fs::create_dir_all(&cfg.output_dir).map_err(io_err(&cfg.output_dir))?;
    let trace_path = cfg.output_dir.join("trace.csv");
    write_file(&trace_path, &trace_csv(&summary.trace))?;
    write_file(&cfg.output_dir.join("summary.txt"), &summary.render())?;
    if cfg.emit_plot {
        emit_plot(&trace_path, &cfg.output_dir.join("plot.gp"))?;
    }
    if cfg.require_bounds && !summary.feasible {
        return Err(CliError::Infeasible {
            sigma_min: summary.sigma_min_x0.unwrap_or(f64::NAN),
            two_t0: summary.two_t0.unwrap_or(f64::NAN),
        });
    }
    Ok(summary)
}

/// Writes a gnuplot script for `trace_path`: `log10(error)` as a line,
/// `log10(bound)` as `+` markers when the trace has any bound values.
pub fn emit_plot(trace_path: &Path, out_path: &Path) -> Result<(), CliError> {
    let text = fs::read_to_string(trace_path).map_err(io_err(trace_path))?;
    let mut reader = csv::ReaderBuilder::new().flexible(false).from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| CliError::MalformedCsv(e.to_string()))?.clone();
    let cols: Vec<&str> = headers.iter().collect();
    if cols.len() < 3 || cols[..3] != ["k", "step_distance", "error"] || (cols.len() == 4 && cols[3] != "bound") || cols.len() > 4 {
        return Err(CliError::MalformedCsv(format!("unexpected header {:?}", cols.join(","))));
    }
    let mut rows = 0;
    let mut any_bound = false;
    for rec in reader.records() {
        let rec = rec.map_err(|e| CliError::MalformedCsv(e.to_string()))?;
        let num = |i: usize| -> Result<(), CliError> {
            let v = &rec[i];
            if i != 2 && v.is_empty() {
                return Ok(());
            }
            v.parse::<f64>().map(|_| ()).map_err(|_| CliError::MalformedCsv(format!("bad value {v:?} in row {}", rows + 1)))
        };
        rec[0].parse::<usize>().map_err(|_| CliError::MalformedCsv(format!("bad k {:?}", &rec[0])))?;
        for i in 1..rec.len() {
            num(i)?;
        }
        any_bound |= rec.len() == 4 && !rec[3].is_empty();
        rows += 1;
    }
    if rows == 0 {
        return Err(CliError::MalformedCsv("trace has no rows".into()));
    }
    // relative to the script when both live in the same directory
    let data = if trace_path.parent() == out_path.parent() {
        trace_path.file_name().map(PathBuf::from).unwrap_or_else(|| trace_path.to_path_buf())
    } else {
        trace_path.to_path_buf()
    };
    let data = data.display().to_string().replace('\'', "''");
    let mut script = String::new();
    let _ = writeln!(script, "set datafile separator ','");
    let _ = writeln!(script, "set key autotitle columnhead top right");
    let _ = writeln!(script, "set xlabel 'k'");
    let _ = writeln!(script, "set ylabel 'log10 of distance'");
    let _ = write!(script, "plot '{data}' using 1:(log10($3)) with lines lw 2 title 'error'");
    if any_bound {
        let _ = write!(script, ", \\\n     '{data}' using 1:(log10($4)) with points pt 1 title 'bound'");
    }
    script.push('\n');
    write_file(out_path, &script)
}

/// One line of `report.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub experiment: String,
    pub check: String,
    pub value: String,
    pub expected: String,
    pub pass: bool,
}

impl ReportRow {
    fn new(experiment: &str, check: &str, value: String, expected: &str, pass: bool) -> Self {
        Self { experiment: experiment.into(), check: check.into(), value, expected: expected.into(), pass }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReproduceOptions {
    pub tol: f64,
    pub maxit: usize,
    pub force_fiedler_sqrt: bool,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        Self { tol: 1e-14, maxit: 100, force_fiedler_sqrt: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Job {
    Polar(&'static str, f64),
    Sqrt(&'static str, u32),
    FrankNorm,
    FiedlerSqrt,
}

const POLAR_T0: [(&str, f64); 4] =
    [("moler:16", 2.3861e8), ("fiedler:88", 1.3450e3), ("jordan:50x1.5,50x2.5", 1.6064), ("frank:12", 4.4698e7)];
const FRANK_TABLE: [(f64, f64); 3] = [(9.7710, 10.1148), (19.5420, 19.7128), (39.0839, 39.1692)];
const SQRT_MATRICES: [&str; 5] = ["moler:16", "singdiag:40", "jordan:50x1.5,50x2.5", "jordan:50x1,50x2.5", "frank:12"];

fn jobs(opts: ReproduceOptions) -> Vec<Job> {
    let mut jobs: Vec<Job> = POLAR_T0.iter().map(|&(m, t0)| Job::Polar(m, t0)).collect();
    for m in SQRT_MATRICES {
        for j in 1..=3 {
            jobs.push(Job::Sqrt(m, j));
        }
    }
    jobs.push(Job::FrankNorm);
    if opts.force_fiedler_sqrt {
        jobs.push(Job::FiedlerSqrt);
    }
    jobs
}

fn failed_run(name: &str, e: &CliError) -> ReportRow {
    ReportRow::new(name, "run", e.to_string(), "converged", false)
}

fn upper_bound_row(name: &str, t: &IterationTrace) -> Result<ReportRow, CliError> {
    let r = trace::check_upper_bound(t, UPPER_BOUND_FLOOR)?;
    Ok(ReportRow::new(
        name,
        "upper_bound",
        format!("max_excess={} decreasing={}", sci(r.max_excess, 3), r.bounds_decreasing),
        "error <= bound (1+1e-8)",
        r.pass,
    ))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn run_job(job: Job, opts: ReproduceOptions, root: &Path) -> Vec<ReportRow> {
    let mut rows = Vec::new();
    let base = |matrix: &str, iteration: IterationKind, dir: String| {
        let mut cfg = RunConfig::new(MatrixSource::Gallery(matrix.parse().expect("suite spec")), iteration, root.join(dir));
        cfg.tol = opts.tol;
        cfg.maxit = opts.maxit;
        cfg
    };
    match job {
        Job::Polar(m, expected_t0) => {
            let cfg = base(m, IterationKind::Polar, format!("polar_{}", slug(m)));
            let name = format!("polar {m}");
            match run_experiment(&cfg) {
                Ok(s) => {
                    rows.push(ReportRow::new(
                        &name,
                        "t0",
                        sci(s.t0, 5),
                        &format!("{} rel 1e-4", sci(expected_t0, 5)),
                        rel(s.t0, expected_t0) <= 1e-4,
                    ));
                    let push = |rows: &mut Vec<ReportRow>| -> Result<(), CliError> {
                        let sh = trace::sharpness_from(&s.trace, 1, POLAR_SHARPNESS_FLOOR)?;
                        rows.push(ReportRow::new(&name, "sharpness", sci(sh.max_gap, 3), "<= 1e-6", sh.pass));
                        rows.push(upper_bound_row(&name, &s.trace)?);
                        Ok(())
                    };
                    if let Err(e) = push(&mut rows) {
                        rows.push(failed_run(&name, &e));
                    }
                }
                Err(e) => rows.push(failed_run(&name, &e)),
            }
        }
        Job::Sqrt(m, j) => {
            let mut cfg = base(m, IterationKind::Sqrt, format!("sqrt_{}_j{j}", slug(m)));
            cfg.alpha_j = Some(j);
            let name = format!("sqrt {m} j={j}");
            match run_experiment(&cfg) {
                Ok(s) => {
                    if let Err(e) = sqrt_checks(m, j, &s, &mut rows, &name) {
                        rows.push(failed_run(&name, &e));
                    }
                }
                Err(e) => rows.push(failed_run(&name, &e)),
            }
        }
        Job::FrankNorm => {
            let a = gallery::build(&GallerySpec::Frank(12)).expect("valid spec");
            match linalg::spectral_norm(&a) {
                Ok(norm) => {
                    rows.push(ReportRow::new("frank:12", "spectral_norm", format!("{norm:.4}"), "79.7 +- 1%", rel(norm, 79.7) <= 0.01))
                }
                Err(e) => rows.push(failed_run("frank:12", &e.into())),
            }
        }
        Job::FiedlerSqrt => {
            let mut cfg = base("fiedler:88", IterationKind::Sqrt, "sqrt_fiedler_88_j1".into());
            cfg.alpha_j = Some(1);
            cfg.force_fiedler_sqrt = true;
            let name = "sqrt fiedler:88 j=1";
            let (value, pass) = match run_experiment(&cfg) {
                Ok(s) => (format!("converged in {}", s.iterations), false),
                Err(CliError::Core(e @ (Error::NoConvergence { .. } | Error::SingularMatrix { .. }))) => {
                    (e.to_string(), true)
                }
                Err(e) => (e.to_string(), false),
            };
            rows.push(ReportRow::new(name, "expected_divergence", value, "NoConvergence", pass));
        }
    }
    rows
}

fn sqrt_checks(m: &str, j: u32, s: &RunSummary, rows: &mut Vec<ReportRow>, name: &str) -> Result<(), CliError> {
    let sigma_min = s.sigma_min_x0.unwrap_or(f64::NAN);
    let two_t0 = s.two_t0.unwrap_or(f64::NAN);
    let a = gallery::build(&m.parse().expect("suite spec"))?;
    let norm_a = linalg::spectral_norm(&a)?;
    let residual_row = |rows: &mut Vec<ReportRow>| {
        let limit = 1e-12 * norm_a.max(1.0);
        rows.push(ReportRow::new(name, "residual", sci(s.residual, 3), &format!("<= {}", sci(limit, 3)), s.residual <= limit));
    };
    match m {
        "frank:12" => {
            let (es, et) = FRANK_TABLE[j as usize - 1];
            let four = |x: f64| (x * 1e4).round() / 1e4;
            rows.push(ReportRow::new(name, "sigma_min_x0", format!("{sigma_min:.4}"), &format!("{es:.4}"), four(sigma_min) == es));
            rows.push(ReportRow::new(name, "two_t0", format!("{two_t0:.4}"), &format!("{et:.4}"), four(two_t0) == et));
            rows.push(ReportRow::new(name, "feasible", s.feasible.to_string(), "false", !s.feasible));
        }
        "moler:16" => {
            let sh = trace::sharpness_from(&s.trace, 0, SQRT_SHARPNESS_FLOOR)?;
            rows.push(ReportRow::new(name, "sharpness", sci(sh.max_gap, 3), "<= 1e-6", sh.pass && sh.compared > 0));
            residual_row(rows);
            rows.push(upper_bound_row(name, &s.trace)?);
        }
        "singdiag:40" => {
            let g0 = s.gamma.unwrap_or(f64::NAN);
            rows.push(ReportRow::new(name, "gamma0", sci(g0, 3), "<= 1e-8", g0 <= 1e-8));
            let worst = s
                .trace
                .steps
                .iter()
                .filter_map(|st| st.bound.map(|b| rel(b, s.t0 / 2f64.powi(st.k as i32 - 1))))
                .fold(0.0f64, f64::max);
            rows.push(ReportRow::new(name, "bound_formula", sci(worst, 3), "t0/2^(k-1) rel 1e-10", worst <= 1e-10));
            if j == 1 {
                let e = s.trace.errors();
                let (value, pass) = if e.len() > 21 {
                    let worst = (2..=20).map(|k| (e[k + 1] / e[k] - 0.5).abs()).fold(0.0f64, f64::max);
                    (sci(worst, 3), worst <= 1e-3)
                } else {
                    (format!("only {} iterates", e.len()), false)
                };
                rows.push(ReportRow::new(name, "error_ratio", value, "|ratio - 0.5| <= 1e-3 for 2 <= k <= 20", pass));
            }
            rows.push(upper_bound_row(name, &s.trace)?);
        }
        _ => {
            // jordan blocks and the modified variant
            if m == "jordan:50x1.5,50x2.5" {
                residual_row(rows);
            }
            rows.push(ReportRow::new(name, "feasible", s.feasible.to_string(), "true", s.feasible));
            rows.push(upper_bound_row(name, &s.trace)?);
        }
    }
    Ok(())
}

fn slug(m: &str) -> String {
    m.replace([':', ',', '.'], "_")
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from("experiment,check,value,expected,status\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            csv_field(&r.experiment),
            csv_field(&r.check),
            csv_field(&r.value),
            csv_field(&r.expected),
            if r.pass { "pass" } else { "fail" }
        );
    }
    out
}

/// Runs the full gallery suite in parallel, one directory per experiment,
/// and writes `report.csv` under `root`. Rows come back in suite order.
pub fn reproduce_all(root: &Path, opts: ReproduceOptions) -> Result<Vec<ReportRow>, CliError> {
    fs::create_dir_all(root).map_err(io_err(root))?;
    let jobs = jobs(opts);
    let rows: Vec<ReportRow> = std::thread::scope(|scope| {
        let handles: Vec<_> = jobs.iter().map(|&job| scope.spawn(move || run_job(job, opts, root))).collect();
        handles.into_iter().flat_map(|h| h.join().expect("experiment thread panicked")).collect()
    });
    write_file(&root.join("report.csv"), &report_csv(&rows))?;
    Ok(rows)
}

#[derive(Debug, Parser)]
#[command(name = "ndi", version, about = "Newton iterations for the polar factor and the matrix square root, with a-priori error bounds")]
#[command(args_conflicts_with_subcommands = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    #[command(flatten)]
    pub run: RunArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the whole gallery suite and write report.csv.
    Reproduce {
        #[arg(long, env = "NDI_OUT_DIR", default_value = DEFAULT_OUT_DIR)]
        out: PathBuf,
        #[arg(long, default_value_t = 1e-14)]
        tol: f64,
        #[arg(long, default_value_t = 100)]
        maxit: usize,
        /// Also run the square-root iteration on fiedler:88 (expected to diverge).
        #[arg(long)]
        force_fiedler_sqrt: bool,
    },
    /// Write a gnuplot script for an existing trace.csv.
    Plot {
        trace: PathBuf,
        #[arg(long, default_value = "plot.gp")]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Gallery spec (moler:16, fiedler:88, frank:12, jordan:50x1.5,50x2.5, singdiag:40) or a matrix file.
    #[arg(long)]
    pub matrix: Option<String>,
    #[arg(long, value_enum)]
    pub iteration: Option<IterationKind>,
    /// Start X0 = alpha_j I with alpha_j = 2^j (||A||/2)^(1/2).
    #[arg(long)]
    pub alpha_j: Option<u32>,
    #[arg(long, value_enum, default_value_t = X0Mode::AlphaIdentity)]
    pub x0_mode: X0Mode,
    #[arg(long)]
    pub x0_file: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-14)]
    pub tol: f64,
    #[arg(long, default_value_t = 100)]
    pub maxit: usize,
    #[arg(long, env = "NDI_OUT_DIR", default_value = DEFAULT_OUT_DIR)]
    pub out: PathBuf,
    /// Also write plot.gp.
    #[arg(long)]
    pub plot: bool,
    #[arg(long)]
    pub force_fiedler_sqrt: bool,
    /// Exit with status 3 when the square-root start is infeasible.
    #[arg(long)]
    pub require_bounds: bool,
}

impl RunArgs {
    pub fn into_config(self) -> Result<RunConfig, CliError> {
        let matrix = self.matrix.ok_or_else(|| CliError::Input("--matrix is required".into()))?;
        let iteration = self.iteration.ok_or_else(|| CliError::Input("--iteration is required".into()))?;
        let mut cfg = RunConfig::new(MatrixSource::parse(&matrix)?, iteration, self.out);
        cfg.alpha_j = self.alpha_j;
        cfg.x0_mode = self.x0_mode;
        cfg.x0_file = self.x0_file;
        cfg.tol = self.tol;
        cfg.maxit = self.maxit;
        cfg.emit_plot = self.plot;
        cfg.force_fiedler_sqrt = self.force_fiedler_sqrt;
        cfg.require_bounds = self.require_bounds;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Entry point of the binary; returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    let result = match cli.command {
        Some(Command::Reproduce { out, tol, maxit, force_fiedler_sqrt }) => {
            reproduce_all(&out, ReproduceOptions { tol, maxit, force_fiedler_sqrt }).map(|rows| {
                for r in &rows {
                    println!("{} {} {}: {} (expected {})", if r.pass { "PASS" } else { "FAIL" }, r.experiment, r.check, r.value, r.expected);
                }
                let failed = rows.iter().filter(|r| !r.pass).count();
                println!("{} checks, {failed} failed; report in {}", rows.len(), out.join("report.csv").display());
                i32::from(failed > 0)
            })
        }
        Some(Command::Plot { trace, out }) => emit_plot(&trace, &out).map(|_| 0),
        None => cli.run.into_config().and_then(|cfg| run_experiment(&cfg)).map(|s| {
            print!("{}", s.render());
            0
        }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("ndi: {e}");
            e.exit_code()
        }
    }
}
