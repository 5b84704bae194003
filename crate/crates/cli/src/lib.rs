//! Experiment harness behind the `qshess` binary: reduction with dense
//! verification, timing sweeps, eigenvalue accuracy runs and root finding.

use anyhow::{bail, ensure, Context, Result};
use qshess::charpoly::{aberth_roots, AberthOptions};
use qshess::io::Problem;
use qshess::oracle::{dense_hessenberg, hessenberg_eigs, match_eigenvalues, numerical_rank, spectral_norm, RANK_TOL};
use qshess::reduction::{hessenberg_reduce, hessenberg_to_dense, HessenbergForm, ReduceOptions, ReductionStats};
use qshess::C64;
use std::io::Write;
use std::time::Instant;

/// Dense verification is cubic; refuse it above this size.
pub const VERIFY_MAX_N: usize = 512;

pub const BENCH_HEADER: [&str; 7] = ["mode", "n", "k", "seed", "repeats", "mean_time_s", "rotations"];
pub const EIGERR_HEADER: [&str; 9] = ["n", "k", "seed", "mean_abs", "min_abs", "max_abs", "mean_rel", "min_rel", "max_rel"];
pub const ROOTS_HEADER: [&str; 4] = ["index", "re", "im", "newton_residual"];
pub const ROTATIONS_HEADER: [&str; 6] = ["index", "row", "c_re", "c_im", "s_re", "s_im"];

pub struct Reduced {
    pub form: HessenbergForm,
    pub stats: ReductionStats,
    pub seconds: f64,
}

pub fn reduce(p: &Problem, opts: ReduceOptions) -> Result<Reduced> {
    let start = Instant::now();
    let (form, stats) = hessenberg_reduce(&p.d, &p.u, &p.v, opts)?;
    Ok(Reduced { form, stats, seconds: start.elapsed().as_secs_f64() })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Verification {
    /// `‖Q·A·Q* − H‖_F / ‖A‖_F`.
    pub residual: f64,
    /// Largest entry of `H` below the subdiagonal.
    pub below_subdiagonal: f64,
    /// Largest numerical rank of the blocks strictly above the diagonal,
    /// sampled at a few splits.
    pub upper_rank: usize,
}

/// Compares `H` with `Q·A·Q*` for `Q` rebuilt from the rotation log.
pub fn verify(p: &Problem, form: &HessenbergForm) -> Result<Verification> {
    ensure!(p.n() <= VERIFY_MAX_N, "dense verification is limited to n <= {VERIFY_MAX_N}, got {}", p.n());
    let q = form.q_from_log().context("verification needs the rotation log")?;
    let a = p.dense();
    let h = hessenberg_to_dense(form);
    let qaq = q.matmul(&a).matmul(&q.adjoint());
    Ok(Verification {
        residual: qaq.sub(&h).frobenius() / a.frobenius(),
        below_subdiagonal: h.below_subdiagonal_max(),
        upper_rank: sampled_upper_rank(&h),
    })
}

/// Every split costs an SVD, so only eight evenly spaced ones are checked.
fn sampled_upper_rank(h: &qshess::DenseMatrix) -> usize {
    let n = h.rows();
    let tol = RANK_TOL * spectral_norm(h);
    let mut splits: Vec<usize> = (1..=8).map(|j| j * (n - 1) / 9).collect();
    splits.dedup();
    splits.into_iter().map(|i| numerical_rank(&h.block(0, i + 1, i + 1, n), tol)).max().unwrap_or(0)
}

pub fn write_rotation_log(form: &HessenbergForm, w: impl Write) -> Result<()> {
    let log = form.rotations.as_ref().context("no rotation log was recorded")?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(ROTATIONS_HEADER)?;
    for (i, (row, g)) in log.iter().enumerate() {
        out.write_record([i.to_string(), row.to_string(), g.c.re.to_string(), g.c.im.to_string(), g.s.re.to_string(), g.s.im.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BenchMode {
    /// Vary `n` at fixed `k`.
    Size,
    /// Vary `k` at fixed `n`.
    Rank,
}

impl BenchMode {
    pub fn name(self) -> &'static str {
        match self {
            BenchMode::Size => "size",
            BenchMode::Rank => "rank",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "size" => Ok(BenchMode::Size),
            "rank" => Ok(BenchMode::Rank),
            _ => bail!("unknown bench mode `{s}`, expected size or rank"),
        }
    }

    /// Default sweep: `n = 100..1000` at `k = 10`, or `k = 5..160` at `n = 400`.
    pub fn default_grid(self) -> Vec<(usize, usize)> {
        match self {
            BenchMode::Size => (1..=10).map(|i| (100 * i, 10)).collect(),
            BenchMode::Rank => [5, 10, 20, 40, 80, 160].iter().map(|&k| (400, k)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub mode: BenchMode,
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub repeats: usize,
    pub mean_time_s: f64,
    pub rotations: u64,
}

/// Mean wall time over `repeats` reductions of one generated problem. The
/// rotation count is deterministic, so it is taken from the first run.
pub fn bench_point(mode: BenchMode, n: usize, k: usize, seed: u64, repeats: usize) -> Result<BenchRow> {
    ensure!(repeats >= 1, "need at least one repeat");
    let p = Problem::generate(n, k, seed, false)?;
    let mut total = 0.0;
    let mut rotations = 0;
    for _ in 0..repeats {
        let r = reduce(&p, ReduceOptions::default())?;
        total += r.seconds;
        rotations = r.stats.operations;
    }
    Ok(BenchRow { mode, n, k, seed, repeats, mean_time_s: total / repeats as f64, rotations })
}

pub fn write_bench_csv(rows: &[BenchRow], w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(BENCH_HEADER)?;
    for r in rows {
        out.write_record([
            r.mode.name().to_string(),
            r.n.to_string(),
            r.k.to_string(),
            r.seed.to_string(),
            r.repeats.to_string(),
            r.mean_time_s.to_string(),
            r.rotations.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigErrRow {
    pub n: usize,
    pub k: usize,
    pub seed: u64,
    pub mean_abs: f64,
    pub min_abs: f64,
    pub max_abs: f64,
    pub mean_rel: f64,
    pub min_rel: f64,
    pub max_rel: f64,
}

impl EigErrRow {
    pub fn is_valid(&self) -> bool {
        let e = [self.mean_abs, self.min_abs, self.max_abs, self.mean_rel, self.min_rel, self.max_rel];
        e.iter().all(|x| x.is_finite() && *x >= 0.0) && self.min_abs <= self.mean_abs && self.mean_abs <= self.max_abs
    }
}

/// Eigenvalues of the structured reduction against those of the dense Givens
/// reduction of the same matrix, both by the same QR eigensolver.
pub fn eigerr_trial(n: usize, k: usize, seed: u64) -> Result<EigErrRow> {
    let p = Problem::generate(n, k, seed, false)?;
    let r = reduce(&p, ReduceOptions::default())?;
    let got = hessenberg_eigs(&hessenberg_to_dense(&r.form))?;
    let want = hessenberg_eigs(&dense_hessenberg(&p.dense()).h)?;
    let abs = match_eigenvalues(&want, &got);
    let rel: Vec<f64> = abs.iter().zip(&want).map(|(e, w)| if w.norm() > 0.0 { e / w.norm() } else { *e }).collect();
    let (mean_abs, min_abs, max_abs) = summary(&abs);
    let (mean_rel, min_rel, max_rel) = summary(&rel);
    Ok(EigErrRow { n, k, seed, mean_abs, min_abs, max_abs, mean_rel, min_rel, max_rel })
}

fn summary(x: &[f64]) -> (f64, f64, f64) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let min = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = x.iter().cloned().fold(0.0, f64::max);
    (mean, min, max)
}

pub fn write_eigerr_csv(rows: &[EigErrRow], w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(EIGERR_HEADER)?;
    for r in rows {
        let mut rec = vec![r.n.to_string(), r.k.to_string(), r.seed.to_string()];
        rec.extend([r.mean_abs, r.min_abs, r.max_abs, r.mean_rel, r.min_rel, r.max_rel].iter().map(|x| format!("{x:e}")));
        out.write_record(rec)?;
    }
    out.flush()?;
    Ok(())
}

pub struct Roots {
    pub roots: Vec<C64>,
    /// `|p/p'|` at each root.
    pub newton: Vec<f64>,
    pub converged: bool,
}

pub fn roots(p: &Problem, tol: f64, seed: u64) -> Result<Roots> {
    let r = reduce(p, ReduceOptions::default())?;
    let res = aberth_roots(&r.form, AberthOptions { tol, seed, ..Default::default() });
    Ok(Roots { roots: res.roots, newton: res.newton, converged: res.converged })
}

pub fn write_roots_csv(r: &Roots, w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(ROOTS_HEADER)?;
    for (i, (z, nw)) in r.roots.iter().zip(&r.newton).enumerate() {
        out.write_record([i.to_string(), z.re.to_string(), z.im.to_string(), format!("{nw:e}")])?;
    }
    out.flush()?;
    Ok(())
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
