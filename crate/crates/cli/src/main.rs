use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use qshess::io::{write_hessenberg, Problem};
use qshess::reduction::ReduceOptions;
use qshess_cli::*;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

#[derive(Parser)]
#[command(name = "qshess", version, about = "Hessenberg reduction of diagonal plus low rank matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a random problem D + U·V* with standard normal entries.
    Generate {
        n: usize,
        k: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Give U and V imaginary parts.
        #[arg(long)]
        complex: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduce a problem file and write the Hessenberg form.
    Reduce {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Re-orthogonalize the rotations every this many steps (0 disables).
        #[arg(long)]
        reorth_every: Option<usize>,
        /// Write the rotation log to this CSV file.
        #[arg(long, value_name = "FILE")]
        log_rotations: Option<PathBuf>,
        /// Skip the dense comparison that otherwise runs for n <= 512.
        #[arg(long)]
        no_verify: bool,
        /// Largest accepted relative residual; defaults to 1e-11·n.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Reduce a problem and compare against the dense similarity.
    Verify {
        input: PathBuf,
        #[arg(long)]
        reorth_every: Option<usize>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Time reductions over a grid of sizes or ranks; writes CSV.
    Bench {
        #[arg(long, default_value = "size")]
        mode: String,
        /// Comma separated n (size mode) or k (rank mode).
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<usize>>,
        /// Fixed k in size mode.
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Fixed n in rank mode.
        #[arg(long, default_value_t = 400)]
        n: usize,
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Eigenvalue errors of the reduction against the dense pipeline; writes CSV.
    Eigerr {
        #[arg(long, value_delimiter = ',', default_values_t = [40, 80, 160, 320])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 30)]
        k: usize,
        /// First seed; trial t uses seed + t.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        trials: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Eigenvalues by Ehrlich-Aberth iteration on the reduced form; writes CSV.
    Roots {
        input: PathBuf,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Seed for the starting points.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(io::stdout().lock()),
    })
}

fn read_problem(path: &Path) -> Result<Problem> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Problem::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn check_residual(n: usize, v: &Verification, tol: Option<f64>) -> Result<()> {
    let tol = tol.unwrap_or(1e-11 * n as f64);
    eprintln!("residual={:e} below_subdiagonal={:e} upper_rank={}", v.residual, v.below_subdiagonal, v.upper_rank);
    if !(v.residual <= tol) {
        bail!("similarity residual {:e} exceeds {:e}", v.residual, tol);
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Generate { n, k, seed, complex, out } => {
            let p = Problem::generate(n, k, seed, complex)?;
            output(out.as_deref())?.write_all(p.to_text().as_bytes())?;
        }
        Command::Reduce { input, out, reorth_every, log_rotations, no_verify, tol } => {
            let p = read_problem(&input)?;
            let verify_now = !no_verify && p.n() <= VERIFY_MAX_N;
            if !no_verify && !verify_now {
                eprintln!("n = {} is above {VERIFY_MAX_N}; skipping verification", p.n());
            }
            let opts = ReduceOptions { reorth_every, log_rotations: verify_now || log_rotations.is_some(), ..Default::default() };
            let r = reduce(&p, opts)?;
            eprintln!("n={} k={} steps={} rotations={} time_s={:.6}", p.n(), p.k(), r.stats.steps, r.stats.operations, r.seconds);
            output(out.as_deref())?.write_all(write_hessenberg(&r.form).as_bytes())?;
            if let Some(path) = log_rotations {
                write_rotation_log(&r.form, output(Some(&path))?)?;
            }
            if verify_now {
                check_residual(p.n(), &verify(&p, &r.form)?, tol)?;
            }
        }
        Command::Verify { input, reorth_every, tol } => {
            let p = read_problem(&input)?;
            let r = reduce(&p, ReduceOptions { reorth_every, log_rotations: true, ..Default::default() })?;
            check_residual(p.n(), &verify(&p, &r.form)?, tol)?;
        }
        Command::Bench { mode, grid, k, n, repeats, seed, out } => {
            let mode = BenchMode::parse(&mode)?;
            let points: Vec<(usize, usize)> = match (grid, mode) {
                (None, BenchMode::Size) => BenchMode::Size.default_grid().into_iter().map(|(n, _)| (n, k)).collect(),
                (None, BenchMode::Rank) => BenchMode::Rank.default_grid().into_iter().map(|(_, k)| (n, k)).collect(),
                (Some(g), BenchMode::Size) => g.into_iter().map(|n| (n, k)).collect(),
                (Some(g), BenchMode::Rank) => g.into_iter().map(|k| (n, k)).collect(),
            };
            let mut rows = Vec::new();
            for (n, k) in points {
                rows.push(bench_point(mode, n, k, seed, repeats)?);
            }
            write_bench_csv(&rows, output(out.as_deref())?)?;
            if rows.len() > 1 {
                let x: Vec<f64> = rows.iter().map(|r| if mode == BenchMode::Size { r.n } else { r.k } as f64).collect();
                let t: Vec<f64> = rows.iter().map(|r| r.mean_time_s).collect();
                let c: Vec<f64> = rows.iter().map(|r| r.rotations as f64).collect();
                eprintln!("log-log slope: time {:.3}, rotations {:.3}", loglog_slope(&x, &t), loglog_slope(&x, &c));
            }
        }
        Command::Eigerr { sizes, k, seed, trials, out } => {
            let mut rows = Vec::new();
            for &n in &sizes {
                for t in 0..trials {
                    rows.push(eigerr_trial(n, k, seed + t)?);
                }
            }
            write_eigerr_csv(&rows, output(out.as_deref())?)?;
        }
        Command::Roots { input, tol, seed, out } => {
            let p = read_problem(&input)?;
            let r = roots(&p, tol, seed)?;
            if !r.converged {
                eprintln!("warning: Ehrlich-Aberth iteration did not converge; roots are approximate");
            }
            write_roots_csv(&r, output(out.as_deref())?)?;
        }
    }
    Ok(())
}
