//! Command-line front end.
//!
//! Every subcommand reads a graph (`--graph`) and writes its main artifact to
//! `--out` (`-` for stdout). The human-readable summary goes to stdout, or to
//! stderr when the artifact itself is on stdout.
//!
//! Exit codes: 0 success, 1 input or usage error, 2 numeric or budget error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::bands::{compute_bands_with, BandOptions, KGrid, DEFAULT_FLAT_TOL, DEFAULT_GRID};
use crate::error::Error;
use crate::format::fmt_sig;
use crate::graph::{load_graph_file, FundamentalGraph};
use crate::sweep::{fmt_complex, sweep_with, SweepOptions, DEFAULT_SAMPLES, MIN_SAMPLES};
use crate::trace::{
    exact_grid_resolution, flat_spectrum_verdict, fourier_cross_check, parseval_check,
    trace_fourier, Verdict, DEFAULT_COEFF_TOL,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NUMERIC: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "flatband",
    version,
    about = "Band structure and flat-spectrum checks for magnetic Schrödinger operators on periodic graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample band functions on a uniform k-grid
    Bands(BandsArgs),
    /// Decide exactly whether every band is flat
    FlatCheck(FlatCheckArgs),
    /// Export the Fourier coefficients of Tr H^n(k)
    TraceCoeffs(TraceCoeffsArgs),
    /// Locate couplings t where H_{t alpha} may have flat spectrum
    Sweep(SweepArgs),
    /// Cross-check trace coefficients against the fiber matrices
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct IoArgs {
    /// Graph file (JSON)
    #[arg(long)]
    pub graph: PathBuf,
    /// Output path, or `-` for stdout
    #[arg(long)]
    pub out: Option<String>,
}

#[derive(Debug, Args)]
pub struct BandsArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[arg(long, default_value_t = DEFAULT_GRID, value_parser = positive_usize)]
    pub grid: usize,
    #[arg(long, default_value_t = DEFAULT_FLAT_TOL, value_parser = positive_f64)]
    pub flat_tol: f64,
}

#[derive(Debug, Args)]
pub struct FlatCheckArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[arg(long, default_value_t = DEFAULT_COEFF_TOL, value_parser = positive_f64)]
    pub tol: f64,
    /// Grid for the Parseval table
    #[arg(long, default_value_t = DEFAULT_GRID, value_parser = positive_usize)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct TraceCoeffsArgs {
    #[command(flatten)]
    pub io: IoArgs,
    /// Highest power (default: number of vertices)
    #[arg(long, value_parser = positive_usize)]
    pub n_max: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub t_min: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub t_max: f64,
    #[arg(long, default_value_t = DEFAULT_SAMPLES, value_parser = sample_count)]
    pub samples: usize,
    #[arg(long, default_value_t = DEFAULT_COEFF_TOL, value_parser = positive_f64)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub io: IoArgs,
    /// Grid resolution (default: the larger of 64 and the exact-quadrature size)
    #[arg(long, value_parser = positive_usize)]
    pub grid: Option<usize>,
    #[arg(long, value_parser = positive_usize)]
    pub n_max: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_COEFF_TOL, value_parser = positive_f64)]
    pub tol: f64,
}

fn positive_usize(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        Ok(_) => Err("must be at least 1".into()),
        Err(e) => Err(e.to_string()),
    }
}

fn sample_count(s: &str) -> Result<usize, String> {
    let n = positive_usize(s)?;
    if n < MIN_SAMPLES {
        return Err(format!("must be at least {MIN_SAMPLES}"));
    }
    Ok(n)
}

fn positive_f64(s: &str) -> Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(format!("must be a positive number, got {s}"))
    }
}

/// Failure of a subcommand, already classified by exit code.
struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_input_error() {
                EXIT_INPUT
            } else {
                EXIT_NUMERIC
            },
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: EXIT_INPUT,
            message: format!("io error: {e}"),
        }
    }
}

type CmdResult = Result<i32, Failure>;

/// Where the artifact and the summary are written.
struct Outputs<'a> {
    artifact: Option<Box<dyn Write + 'a>>,
    summary: &'a mut dyn Write,
}

fn open_outputs<'a>(
    out: &Option<String>,
    default_stdout: bool,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
) -> Result<Outputs<'a>, Failure> {
    match out.as_deref() {
        Some("-") => Ok(Outputs {
            artifact: Some(Box::new(stdout)),
            summary: stderr,
        }),
        None if default_stdout => Ok(Outputs {
            artifact: Some(Box::new(stdout)),
            summary: stderr,
        }),
        None => Ok(Outputs {
            artifact: None,
            summary: stdout,
        }),
        Some(path) => {
            let file = File::create(path).map_err(|e| Failure {
                code: EXIT_INPUT,
                message: format!("cannot create {path}: {e}"),
            })?;
            Ok(Outputs {
                artifact: Some(Box::new(BufWriter::new(file))),
                summary: stdout,
            })
        }
    }
}

fn load(io: &IoArgs) -> Result<FundamentalGraph, Failure> {
    load_graph_file(&io.graph).map_err(|e| Failure {
        code: EXIT_INPUT,
        message: format!("{}: {e}", io.graph.display()),
    })
}

/// Parses `args` (program name first) and runs the subcommand.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match &cli.command {
        Command::Bands(a) => cmd_bands(a, stdout, stderr),
        Command::FlatCheck(a) => cmd_flat_check(a, stdout, stderr),
        Command::TraceCoeffs(a) => cmd_trace_coeffs(a, stdout, stderr),
        Command::Sweep(a) => cmd_sweep(a, stdout, stderr),
        Command::Verify(a) => cmd_verify(a, stdout, stderr),
    }
}

pub fn cmd_bands(a: &BandsArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    finish(bands(a, stdout, stderr), stderr)
}

pub fn cmd_flat_check(a: &FlatCheckArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    finish(flat_check(a, stdout, stderr), stderr)
}

pub fn cmd_trace_coeffs(
    a: &TraceCoeffsArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    finish(trace_coeffs(a, stdout, stderr), stderr)
}

pub fn cmd_sweep(a: &SweepArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    finish(sweep_cmd(a, stdout, stderr), stderr)
}

pub fn cmd_verify(a: &VerifyArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    finish(verify(a, stdout, stderr), stderr)
}

fn finish(r: CmdResult, stderr: &mut dyn Write) -> i32 {
    match r {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn bands(a: &BandsArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let g = load(&a.io)?;
    let grid = KGrid::new(a.grid, g.dimension())?;
    let bs = compute_bands_with(
        &g,
        &grid,
        &BandOptions {
            flat_tol: a.flat_tol,
            ..BandOptions::default()
        },
    )?;
    let out = open_outputs(&a.io.out, false, stdout, stderr)?;
    if let Some(mut w) = out.artifact {
        bs.write_csv(&mut w)?;
        w.flush()?;
    }
    let s = out.summary;
    for (j, (b, flat)) in bs.bands.iter().zip(&bs.flat_flags).enumerate() {
        writeln!(
            s,
            "band {}: [{}, {}]{}",
            j + 1,
            fmt_sig(b.lower, 6),
            fmt_sig(b.upper, 6),
            if *flat { " FLAT" } else { "" }
        )?;
    }
    if !bs.flat_eigenvalues.is_empty() {
        let list: Vec<String> = bs.flat_eigenvalues.iter().map(|&x| fmt_sig(x, 6)).collect();
        writeln!(s, "eigenvalues present at every k: {}", list.join(", "))?;
    }
    writeln!(
        s,
        "grid: {}^{} points; band endpoints are grid samples (error O(1/N^2))",
        a.grid,
        g.dimension()
    )?;
    Ok(EXIT_OK)
}

fn flat_check(a: &FlatCheckArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let g = load(&a.io)?;
    let nu = g.num_vertices();
    let series = trace_fourier(&g, nu)?;
    let verdict = flat_spectrum_verdict(&series, nu, a.tol)?;
    let grid = KGrid::new(a.grid, g.dimension())?;
    let parseval = parseval_check(&g, &series, &grid)?;

    let out = open_outputs(&a.io.out, true, stdout, stderr)?;
    let mut w = out.artifact.expect("report destination");
    writeln!(w, "verdict: {}", verdict.label())?;
    match &verdict {
        Verdict::Flat => writeln!(
            w,
            "all coefficients with n <= {nu} and gamma != 0 are below {}",
            fmt_sig(a.tol, 3)
        )?,
        Verdict::AcNonempty(c) => {
            let gamma: Vec<String> = c.gamma.iter().map(|x| x.to_string()).collect();
            writeln!(
                w,
                "certificate: ({}, [{}], {})",
                c.n,
                gamma.join(", "),
                fmt_complex(c.value)
            )?;
        }
    }
    writeln!(w, "parseval (grid {}^{}):", a.grid, g.dimension())?;
    writeln!(
        w,
        "n,grid_mean_square,coefficient_energy,zero_mode_energy,residual"
    )?;
    for r in &parseval.rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            r.n,
            fmt_sig(r.grid_mean_square, 6),
            fmt_sig(r.coefficient_energy, 6),
            fmt_sig(r.zero_mode_energy, 6),
            fmt_sig(r.residual(), 3)
        )?;
    }
    for warning in &parseval.warnings {
        writeln!(w, "warning: {warning}")?;
    }
    w.flush()?;
    Ok(EXIT_OK)
}

fn trace_coeffs(a: &TraceCoeffsArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let g = load(&a.io)?;
    let n_max = a.n_max.unwrap_or(g.num_vertices());
    let series = trace_fourier(&g, n_max)?;
    let out = open_outputs(&a.io.out, true, stdout, stderr)?;
    let mut w = out.artifact.expect("csv destination");
    series.write_csv(&mut w)?;
    w.flush()?;
    Ok(EXIT_OK)
}

fn sweep_cmd(a: &SweepArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let g = load(&a.io)?;
    if a.t_max.is_nan() || a.t_min.is_nan() || a.t_max <= a.t_min {
        return Err(Failure {
            code: EXIT_INPUT,
            message: format!("--t-max ({}) must exceed --t-min ({})", a.t_max, a.t_min),
        });
    }
    let report = sweep_with(
        &g,
        &SweepOptions {
            t_min: a.t_min,
            t_max: a.t_max,
            samples: a.samples,
            coeff_tol: a.tol,
            ..SweepOptions::default()
        },
    )?;
    let out = open_outputs(&a.io.out, false, stdout, stderr)?;
    if let Some(mut w) = out.artifact {
        report.write_csv(&mut w)?;
        w.flush()?;
    }
    report.write_summary(out.summary)?;
    Ok(EXIT_OK)
}

fn verify(a: &VerifyArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> CmdResult {
    let g = load(&a.io)?;
    let n_max = a.n_max.unwrap_or(g.num_vertices());
    let series = trace_fourier(&g, n_max)?;
    let resolution = a
        .grid
        .unwrap_or_else(|| DEFAULT_GRID.max(exact_grid_resolution(&g, n_max)));
    let grid = KGrid::new(resolution, g.dimension())?;
    let cross = fourier_cross_check(&g, &series, &grid)?;
    let parseval = parseval_check(&g, &series, &grid)?;

    let out = open_outputs(&a.io.out, true, stdout, stderr)?;
    let mut w = out.artifact.expect("report destination");
    let mut pass = true;
    writeln!(w, "grid: {resolution}^{} points", g.dimension())?;
    for (i, dev) in cross.iter().enumerate() {
        let ok = *dev <= a.tol;
        pass &= ok;
        writeln!(
            w,
            "fourier n={}: max relative deviation {} {}",
            i + 1,
            fmt_sig(*dev, 3),
            if ok { "ok" } else { "FAIL" }
        )?;
    }
    for r in &parseval.rows {
        let ok = r.residual() <= a.tol * r.coefficient_energy.max(1.0);
        pass &= ok;
        writeln!(
            w,
            "parseval n={}: residual {} {}",
            r.n,
            fmt_sig(r.residual(), 3),
            if ok { "ok" } else { "FAIL" }
        )?;
    }
    for warning in &parseval.warnings {
        writeln!(w, "warning: {warning}")?;
    }
    writeln!(w, "result: {}", if pass { "PASS" } else { "FAIL" })?;
    w.flush()?;
    Ok(if pass { EXIT_OK } else { EXIT_NUMERIC })
}
