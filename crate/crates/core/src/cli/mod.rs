//! The `finsler` command line: `verify`, `sweep` and `phi`.
//!
//! Exit codes: 0 success (all checks pass), 1 at least one check failed,
//! 2 configuration, schema or I/O error. Standard output carries only the
//! human-readable summary; reports go to the files named by the flags.

mod scenario_file;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::family::{FamilyParams, Sign};
use crate::verify::{serialize_report, sweep, sweep_csv, theorem1_suite, ReportFormat, Scenario, Verdict};

pub use scenario_file::{
    parse_scenario, DomainSpec, ExclusionSpec, ParamsSpec, SamplingSpec, ScenarioFile, StructureSpec,
    SCENARIO_SCHEMA_VERSION,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "finsler", version, about = "Curvature verification for two-dimensional Einstein (α, β)-metrics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the verification suite of a scenario file.
    Verify {
        /// Scenario JSON file.
        scenario: PathBuf,
        /// Write the JSON report here.
        #[arg(long)]
        json_out: Option<PathBuf>,
        /// Write the CSV summary here.
        #[arg(long)]
        csv_out: Option<PathBuf>,
        /// Override the scenario's sampling seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Tabulate the curvature field of a scenario on a grid over its box.
    Sweep {
        /// Scenario JSON file.
        scenario: PathBuf,
        /// Grid size as `nx,ny`.
        #[arg(long, value_parser = parse_grid, default_value = "50,50")]
        grid: (usize, usize),
        /// Write the CSV table here (standard output gets a summary only).
        #[arg(long)]
        out: PathBuf,
    },
    /// Print φ, φ′, φ″ and τ of the profile.
    Phi(PhiArgs),
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("at").required(true).args(["s", "table"]))]
pub struct PhiArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub k1: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub k2: f64,
    /// `+1` or `-1`.
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    pub eps: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub s: Option<f64>,
    /// `smin smax n`: n equally spaced values.
    #[arg(long, num_args = 3, value_names = ["SMIN", "SMAX", "N"], allow_negative_numbers = true)]
    pub table: Option<Vec<f64>>,
}

fn parse_grid(s: &str) -> std::result::Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `nx,ny`, got `{s}`"))?;
    let n = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"));
    let (nx, ny) = (n(a)?, n(b)?);
    if nx == 0 || ny == 0 {
        return Err("grid dimensions must be positive".into());
    }
    Ok((nx, ny))
}

/// Writes `bytes` to `path` through a temporary file in the same directory
/// followed by a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn write_out(path: &Path, bytes: &[u8]) -> Result<()> {
    write_atomic(path, bytes).map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display())))
}

/// Reads and validates a scenario file; the file stem is the default name.
pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    let stem = path.file_stem().map_or("scenario".into(), |s| s.to_string_lossy().into_owned());
    parse_scenario(&text, &stem)
}

fn cmd_verify(
    path: &Path,
    json_out: Option<&Path>,
    csv_out: Option<&Path>,
    seed: Option<u64>,
    out: &mut dyn Write,
) -> Result<i32> {
    let mut sc = load_scenario(path)?;
    if let Some(seed) = seed {
        sc.sampling.seed = seed;
    }
    let report = theorem1_suite(&sc)?;
    if let Some(p) = json_out {
        write_out(p, &serialize_report(&report, ReportFormat::Json))?;
    }
    if let Some(p) = csv_out {
        write_out(p, &serialize_report(&report, ReportFormat::CsvSummary))?;
    }
    let e = &report.environment;
    let _ = writeln!(
        out,
        "scenario {} (k1={}, k2={}, eps={:+}), seed {}, {} points × {} directions",
        e.scenario, e.k1, e.k2, e.eps, e.seed, e.points, e.directions
    );
    for c in &report.checks {
        let mark = if c.verdict == Verdict::Pass { "pass" } else { "FAIL" };
        let _ = write!(out, "  {mark}  {:<42} max {:<10.3e} tol {:.0e}", c.name, c.max, c.tolerance);
        if c.skipped > 0 {
            let _ = write!(out, "  ({} skipped)", c.skipped);
        }
        if let (Verdict::Fail, Some(w)) = (c.verdict, c.worst) {
            let _ = write!(out, "  worst at ({:.6}, {:.6})", w[0], w[1]);
        }
        let _ = writeln!(out);
    }
    if let Some(s) = report.summary {
        let _ = writeln!(out, "|K| ranges over [{:.7}, {:.7}]", s.k_min_abs, s.k_max_abs);
    }
    let failed = report.failed().count();
    if failed == 0 {
        let _ = writeln!(out, "all {} checks passed", report.checks.len());
        Ok(EXIT_OK)
    } else {
        let _ = writeln!(out, "{failed} of {} checks failed", report.checks.len());
        Ok(EXIT_FAILED)
    }
}

fn cmd_sweep(path: &Path, grid: (usize, usize), csv: &Path, out: &mut dyn Write) -> Result<i32> {
    let sc = load_scenario(path)?;
    let rows = sweep(&sc, grid.0, grid.1)?;
    write_out(csv, &sweep_csv(&rows))?;
    let admitted = rows.iter().filter(|r| r.values.is_some()).count();
    let _ = writeln!(
        out,
        "wrote {} rows ({admitted} admissible, {} excluded) to {}",
        rows.len(),
        rows.len() - admitted,
        csv.display()
    );
    Ok(EXIT_OK)
}

fn cmd_phi(a: &PhiArgs, out: &mut dyn Write) -> Result<i32> {
    let p = FamilyParams::new(a.k1, a.k2, Sign::from_f64(a.eps)?)?;
    let values: Vec<f64> = match (&a.table, a.s) {
        (Some(t), _) => {
            let (lo, hi, n) = (t[0], t[1], t[2]);
            if !(n >= 1.0 && n.fract() == 0.0) {
                return Err(Error::Config(format!("table size must be a positive integer, got {n}")));
            }
            let n = n as usize;
            (0..n).map(|i| if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
        }
        (None, Some(s)) => vec![s],
        (None, None) => unreachable!("clap requires --s or --table"),
    };
    let rows = values
        .iter()
        .map(|&s| {
            let [phi, d1, d2] = p.phi_derivatives(s)?;
            Ok([s, phi, d1, d2, p.tau(s)?])
        })
        .collect::<Result<Vec<_>>>()?;
    let _ = writeln!(out, "{:>24} {:>24} {:>24} {:>24} {:>24}", "s", "phi", "phi'", "phi''", "tau");
    for r in rows {
        let _ = writeln!(out, "{:>24.16e} {:>24.16e} {:>24.16e} {:>24.16e} {:>24.16e}", r[0], r[1], r[2], r[3], r[4]);
    }
    Ok(EXIT_OK)
}

/// Runs the command line and returns the exit code. Diagnostics go to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{e}");
                    EXIT_ERROR
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Verify { scenario, json_out, csv_out, seed } => {
            cmd_verify(scenario, json_out.as_deref(), csv_out.as_deref(), *seed, out)
        }
        Command::Sweep { scenario, grid, out: csv } => cmd_sweep(scenario, *grid, csv, out),
        Command::Phi(a) => cmd_phi(a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_ERROR
        }
    }
}
