//! Command-line front end. [`run`] does the work; the `qgraph` binary is a
//! thin wrapper around it.
//!
//! Exit codes: 0 success, 1 usage error, 2 validation or precondition
//! failure, 3 numerical failure (pole proximity, singular solve).

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::bands::{band_sweep, certify_gap_near, GapOptions};
use crate::decoration::{decorate, decorate_periodic};
use crate::dtn::{decade_deltas, dirichlet_spectrum_g, dtn_matrix, pole_scaling, solvable_at, DtnOptions};
use crate::eigensolve::{scan_spectrum, ScanOptions, SpectrumResult};
use crate::error::{Error, Result};
use crate::io::{fmt12, read_attachment, read_decoration, read_graph, to_json_string, write_csv, write_graph};
use crate::reduction::reduced_spectrum_check;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "qgraph", version, about = "Spectra of metric graphs and decorated lattices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// Output format (each subcommand has its own default).
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write results here instead of stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true)]
    tol_root: Option<f64>,
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    /// Golden-section stopping width.
    #[arg(long, global = true)]
    x_tol: Option<f64>,
    /// Scan grid density multiplier.
    #[arg(long, global = true)]
    grid_factor: Option<f64>,
    #[arg(long, global = true)]
    pole_guard: Option<f64>,
    #[arg(long, global = true)]
    min_rcond: Option<f64>,
    #[arg(long, global = true)]
    rank_tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Structural checks of a graph file.
    Validate { graph: PathBuf },
    /// Eigenvalues of a finite graph in a window `lo:hi`.
    Spectrum {
        graph: PathBuf,
        #[arg(long, value_parser = parse_window)]
        window: (f64, f64),
    },
    /// Dirichlet-to-Neumann matrix of a decoration.
    Dtn {
        decoration: PathBuf,
        #[arg(long)]
        lambda: f64,
    },
    /// Spectrum of the decoration with Dirichlet conditions on its boundary.
    DirichletSpectrum {
        decoration: PathBuf,
        #[arg(long)]
        max: f64,
    },
    /// σ_min of the DtN matrix at λ₀ ± δ for δ = 10^-j ... 10^-k.
    PoleScan {
        decoration: PathBuf,
        #[arg(long)]
        lambda0: f64,
        #[arg(long, value_parser = parse_decades)]
        decades: (u32, u32),
        #[arg(long, default_value_t = 1)]
        per_decade: usize,
    },
    /// Boundary data for which the boundary value problem is solvable at λ₀.
    Solvable {
        decoration: PathBuf,
        #[arg(long)]
        lambda0: f64,
    },
    /// Replaces every vertex of a regular graph by the decoration.
    Decorate {
        graph: PathBuf,
        decoration: PathBuf,
        #[arg(long)]
        attach: Option<PathBuf>,
    },
    /// Bloch spectra of a periodic graph on a uniform quasimomentum grid.
    Bands {
        graph: PathBuf,
        #[arg(long, value_parser = parse_window)]
        window: (f64, f64),
        /// Grid points per quasimomentum axis.
        #[arg(long)]
        grid: usize,
    },
    /// Decorates a periodic graph and measures the gap around (nπ/l0)².
    CertifyGap {
        graph: PathBuf,
        decoration: PathBuf,
        #[arg(long)]
        l0: f64,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        attach: Option<PathBuf>,
        #[arg(long, default_value_t = 17)]
        grid: usize,
        #[arg(long)]
        flat_tol: Option<f64>,
        /// Locally minimize over θ around the closest samples.
        #[arg(long)]
        refine: bool,
    },
    /// Compares the reduced and the direct spectrum of a decorated graph.
    ReducedCheck {
        graph: PathBuf,
        decoration: PathBuf,
        #[arg(long, value_parser = parse_window)]
        window: (f64, f64),
        #[arg(long)]
        attach: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-4)]
        exclusion: f64,
    },
}

fn parse_pair<T: std::str::FromStr>(s: &str) -> std::result::Result<(T, T), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected a:b, got {s:?}"))?;
    let a = a.trim().parse().map_err(|_| format!("bad number {a:?}"))?;
    let b = b.trim().parse().map_err(|_| format!("bad number {b:?}"))?;
    Ok((a, b))
}

fn parse_window(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi): (f64, f64) = parse_pair(s)?;
    if !(lo > 0.0 && hi > lo) {
        return Err(format!("window needs 0 < lo < hi, got {s:?}"));
    }
    Ok((lo, hi))
}

fn parse_decades(s: &str) -> std::result::Result<(u32, u32), String> {
    let (j, k): (u32, u32) = parse_pair(s)?;
    if j >= k {
        return Err(format!("decades need j < k, got {s:?}"));
    }
    Ok((j, k))
}

impl Common {
    fn scan(&self) -> Result<ScanOptions> {
        let mut o = ScanOptions::default();
        set(&mut o.tol_root, self.tol_root);
        set(&mut o.tol_rank, self.tol_rank);
        set(&mut o.x_tol, self.x_tol);
        set(&mut o.grid_factor, self.grid_factor);
        o.check()?;
        Ok(o)
    }

    fn dtn(&self) -> Result<DtnOptions> {
        let mut o = DtnOptions { scan: self.scan()?, ..DtnOptions::default() };
        set(&mut o.pole_guard, self.pole_guard);
        set(&mut o.min_rcond, self.min_rcond);
        set(&mut o.rank_tol, self.rank_tol);
        if [o.pole_guard, o.min_rcond, o.rank_tol].iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Precondition("tolerances must be positive".into()));
        }
        Ok(o)
    }

    fn emit(&self, text: &str) -> Result<()> {
        match &self.output {
            Some(path) => std::fs::write(path, text)?,
            None => std::io::stdout().write_all(text.as_bytes())?,
        }
        Ok(())
    }

    fn emit_json<T: Serialize>(&self, value: &T) -> Result<()> {
        self.emit(&(to_json_string(value)? + "\n"))
    }

    fn emit_csv(&self, header: &[&str], rows: &[Vec<f64>]) -> Result<()> {
        let mut buf = Vec::new();
        write_csv(&mut buf, header, rows)?;
        self.emit(&String::from_utf8_lossy(&buf))
    }

    fn format(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

fn set(slot: &mut f64, value: Option<f64>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn spectrum_out(common: &Common, result: &SpectrumResult) -> Result<()> {
    match common.format(Format::Csv) {
        Format::Json => common.emit_json(result),
        Format::Csv => {
            let rows: Vec<Vec<f64>> =
                result.entries.iter().map(|e| vec![e.lambda, e.multiplicity as f64]).collect();
            common.emit_csv(&["lambda", "multiplicity"], &rows)
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let common = &cli.common;
    match &cli.command {
        Command::Validate { graph } => {
            let report = read_graph(graph)?.validate();
            common.emit_json(&report)?;
            return Ok(if report.is_valid() { 0 } else { 2 });
        }
        Command::Spectrum { graph, window } => {
            let g = read_graph(graph)?;
            spectrum_out(common, &scan_spectrum(&g, window.0, window.1, &common.scan()?)?)?;
        }
        Command::Dtn { decoration, lambda } => {
            let m = dtn_matrix(&read_decoration(decoration)?, *lambda, &common.dtn()?)?;
            match common.format(Format::Json) {
                Format::Json => common.emit_json(&m)?,
                Format::Csv => {
                    let header: Vec<String> = (0..m.entries.ncols()).map(|j| format!("col{j}")).collect();
                    let header: Vec<&str> = header.iter().map(String::as_str).collect();
                    common.emit_csv(&header, &m.rows())?;
                }
            }
        }
        Command::DirichletSpectrum { decoration, max } => {
            let r = dirichlet_spectrum_g(&read_decoration(decoration)?, *max, &common.scan()?)?;
            spectrum_out(common, &r)?;
        }
        Command::PoleScan { decoration, lambda0, decades, per_decade } => {
            let deltas = decade_deltas(decades.0, decades.1, *per_decade);
            let report = pole_scaling(&read_decoration(decoration)?, *lambda0, &deltas, &common.dtn()?)?;
            match common.format(Format::Csv) {
                Format::Json => common.emit_json(&report)?,
                Format::Csv => {
                    let rows: Vec<Vec<f64>> = report.samples.iter().map(|s| vec![s.delta, s.sigma_min]).collect();
                    common.emit_csv(&["delta", "sigma_min"], &rows)?;
                }
            }
            eprintln!("slope {} C {}", fmt12(report.fitted_slope), fmt12(report.fitted_c));
            for (delta, reason) in &report.skipped {
                eprintln!("skipped delta {}: {reason}", fmt12(*delta));
            }
        }
        Command::Solvable { decoration, lambda0 } => {
            let report = solvable_at(&read_decoration(decoration)?, *lambda0, &common.dtn()?)?;
            match common.format(Format::Json) {
                Format::Json => common.emit_json(&report)?,
                Format::Csv => {
                    let d = report.basis.first().map_or(0, Vec::len);
                    let header: Vec<String> = (0..d).map(|j| format!("phi{j}")).collect();
                    let header: Vec<&str> = header.iter().map(String::as_str).collect();
                    common.emit_csv(&header, &report.basis)?;
                }
            }
        }
        Command::Decorate { graph, decoration, attach } => {
            let base = read_graph(graph)?;
            let dec = read_decoration(decoration)?;
            let map = attach.as_ref().map(|p| read_attachment(p, &base, &dec)).transpose()?;
            let out = if base.is_periodic() {
                decorate_periodic(&base, &dec, map.as_ref())?
            } else {
                decorate(&base, &dec, map.as_ref())?
            };
            match &common.output {
                Some(path) => write_graph(path, &out)?,
                None => common.emit_json(&crate::io::GraphFile::from_graph(&out))?,
            }
        }
        Command::Bands { graph, window, grid } => {
            let sweep = band_sweep(&read_graph(graph)?, window.0, window.1, *grid, &common.scan()?)?;
            match common.format(Format::Csv) {
                Format::Json => common.emit_json(&sweep)?,
                Format::Csv => {
                    let p = sweep.theta_grid.first().map_or(0, Vec::len);
                    let mut header: Vec<String> = (1..=p).map(|i| format!("theta_{i}")).collect();
                    header.push("lambda".into());
                    let header: Vec<&str> = header.iter().map(String::as_str).collect();
                    let rows: Vec<Vec<f64>> = sweep
                        .rows()
                        .into_iter()
                        .map(|(mut t, l)| {
                            t.push(l);
                            t
                        })
                        .collect();
                    common.emit_csv(&header, &rows)?;
                }
            }
        }
        Command::CertifyGap { graph, decoration, l0, n, attach, grid, flat_tol, refine } => {
            let base = read_graph(graph)?;
            let dec = read_decoration(decoration)?;
            let map = attach.as_ref().map(|p| read_attachment(p, &base, &dec)).transpose()?;
            let mut opts = GapOptions { n_theta: *grid, scan: common.scan()?, refine: *refine, ..GapOptions::default() };
            set(&mut opts.flat_tol, *flat_tol);
            let report = certify_gap_near(&base, &dec, map.as_ref(), *l0, *n, &opts)?;
            common.emit_json(&report)?;
        }
        Command::ReducedCheck { graph, decoration, window, attach, exclusion } => {
            let base = read_graph(graph)?;
            let dec = read_decoration(decoration)?;
            let map = attach.as_ref().map(|p| read_attachment(p, &base, &dec)).transpose()?;
            let report =
                reduced_spectrum_check(&base, &dec, map.as_ref(), window.0, window.1, *exclusion, &common.dtn()?)?;
            common.emit_json(&report)?;
            if !report.counts_match() {
                return Ok(2);
            }
        }
    }
    Ok(0)
}

/// Runs the command line `argv` (including the program name) and returns
/// the process exit code. `QGRAPH_THREADS` caps the worker threads.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let threads = std::env::var("QGRAPH_THREADS").ok().and_then(|s| s.parse::<usize>().ok());
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match pool.install(|| execute(&cli)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                3
            } else {
                2
            }
        }
    }
}
