//! Characteristic polynomial of a structured Hessenberg form by Hyman's
//! method, and an Ehrlich-Aberth root finder built on it.
//!
//! With `(x·I - H)·v = α·e_0` and `v_{n-1} = 1`, back substitution gives `v`
//! and `α` in `O(nk)`, and Cramer's rule gives `det(x·I - H) = α·∏ s_i`. The
//! derivative recurrences run alongside, so `p/p' = α/α'`.

use crate::counter;
use crate::matrix::{C64, ZERO};
use crate::oracle::spectral_norm;
use crate::reduction::HessenbergForm;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Subdiagonal entries at or below this modulus split the matrix.
pub const DEFLATION_TOL: f64 = 1e-300;

/// Rescale the recurrences once the iterates leave `[1/BIG, BIG]`.
const BIG: f64 = 1e100;

const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalResult {
    /// `det(x·I - H)`; may overflow to infinity where `log_abs_det` does not.
    pub det: C64,
    pub log_abs_det: f64,
    /// Newton correction `p(x)/p'(x)`.
    pub newton: C64,
    /// `α` of the last diagonal block, scaled to the block's own `v`.
    pub alpha: C64,
    /// Whether a vanishing subdiagonal split the evaluation into blocks.
    pub breakdown: bool,
}

/// Hyman recurrence on one irreducible block `lo..hi`.
struct Block {
    alpha: C64,
    dalpha: C64,
    /// `ln` of the factor the iterates were divided by.
    log_scale: f64,
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn hyman_block(hf: &HessenbergForm, lo: usize, hi: usize, x: C64) -> Block {
    let k = hf.k();
    // sig_u = Σ_{j>i} conj(U_f[j,:])·v_j, likewise sig_v, and their derivatives.
    let mut sig_u = vec![ZERO; k];
    let mut sig_v = vec![ZERO; k];
    let mut dsig_u = vec![ZERO; k];
    let mut dsig_v = vec![ZERO; k];
    let (mut v, mut dv) = (ONE, ZERO);
    let (mut v_next, mut dv_next) = (ZERO, ZERO);
    let mut log_scale = 0.0;
    let mut i = hi - 1;
    loop {
        let (ui, wi) = (hf.u_f.row(i), hf.v_f.row(i));
        let sup = if i + 1 < hi { hf.s[i].conj() } else { ZERO };
        // Row i of (x·I - H)·v, without the subdiagonal term.
        let upper = dot(ui, &sig_v) - dot(wi, &sig_u) + sup * v_next;
        let dupper = dot(ui, &dsig_v) - dot(wi, &dsig_u) + sup * dv_next;
        let row = (x - hf.d[i]) * v - upper;
        let drow = v + (x - hf.d[i]) * dv - dupper;
        counter::add(4);
        if i == lo {
            return Block { alpha: row, dalpha: drow, log_scale };
        }
        for t in 0..k {
            sig_u[t] += ui[t].conj() * v;
            sig_v[t] += wi[t].conj() * v;
            dsig_u[t] += ui[t].conj() * dv;
            dsig_v[t] += wi[t].conj() * dv;
        }
        counter::add(4);
        let s = hf.s[i - 1];
        (v_next, dv_next) = (v, dv);
        (v, dv) = (row / s, drow / s);
        let size = v.norm().max(v_next.norm());
        if size > BIG || (size < 1.0 / BIG && size > 0.0) {
            let f = 1.0 / size;
            log_scale += size.ln();
            for z in [&mut v, &mut dv, &mut v_next, &mut dv_next] {
                *z *= f;
            }
            for z in sig_u.iter_mut().chain(&mut sig_v).chain(&mut dsig_u).chain(&mut dsig_v) {
                *z *= f;
            }
        }
        i -= 1;
    }
}

/// Maximal ranges `lo..hi` with no vanishing subdiagonal inside.
pub fn irreducible_blocks(hf: &HessenbergForm) -> Vec<(usize, usize)> {
    let n = hf.n();
    let mut out = Vec::new();
    let mut lo = 0;
    for i in 0..n.saturating_sub(1) {
        if hf.s[i].norm() <= DEFLATION_TOL {
            out.push((lo, i + 1));
            lo = i + 1;
        }
    }
    if lo < n {
        out.push((lo, n));
    }
    out
}

/// `det(x·I - H)` and the Newton correction in `O(nk)`.
pub fn hyman_eval(hf: &HessenbergForm, x: C64) -> EvalResult {
    let blocks = irreducible_blocks(hf);
    let mut log_abs = 0.0;
    let mut phase = ONE;
    // p'/p is the sum of the blocks' α'/α.
    let mut inv_newton = ZERO;
    let mut zero = false;
    let mut alpha = ZERO;
    for &(lo, hi) in &blocks {
        let b = hyman_block(hf, lo, hi, x);
        alpha = b.alpha;
        if b.alpha == ZERO {
            zero = true;
            continue;
        }
        // det = α·∏ s_i with α recovered by undoing the scaling.
        log_abs += b.alpha.norm().ln() + b.log_scale;
        phase *= b.alpha / b.alpha.norm();
        for s in &hf.s[lo..hi - 1] {
            log_abs += s.norm().ln();
            phase *= s / s.norm();
        }
        inv_newton += b.dalpha / b.alpha;
    }
    let (det, log_abs_det, newton) = if zero {
        (ZERO, f64::NEG_INFINITY, ZERO)
    } else {
        (phase * log_abs.exp(), log_abs, ONE / inv_newton)
    };
    EvalResult { det, log_abs_det, newton, alpha, breakdown: blocks.len() > 1 }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AberthOptions {
    pub max_iter: usize,
    pub tol: f64,
    /// Seed for the phase jitter of the starting points.
    pub seed: u64,
}

impl Default for AberthOptions {
    fn default() -> Self {
        Self { max_iter: 100, tol: 1e-12, seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AberthResult {
    pub roots: Vec<C64>,
    /// `|p/p'|` at each root at the last sweep.
    pub newton: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Eigenvalues of `H` by Ehrlich-Aberth iteration on each irreducible block.
/// One-by-one blocks give their diagonal entry exactly. On non-convergence the
/// current approximations are returned with `converged = false`.
pub fn aberth_roots(hf: &HessenbergForm, opts: AberthOptions) -> AberthResult {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut out = AberthResult { roots: Vec::with_capacity(hf.n()), newton: Vec::new(), iterations: 0, converged: true };
    for (lo, hi) in irreducible_blocks(hf) {
        if hi - lo == 1 {
            out.roots.push(hf.d[lo]);
            out.newton.push(0.0);
            continue;
        }
        let block = hf.block(lo, hi);
        let (roots, newton, iters, ok) = aberth_block(&block, opts, &mut rng);
        out.roots.extend(roots);
        out.newton.extend(newton);
        out.iterations = out.iterations.max(iters);
        out.converged &= ok;
    }
    out
}

fn aberth_block(hf: &HessenbergForm, opts: AberthOptions, rng: &mut ChaCha8Rng) -> (Vec<C64>, Vec<f64>, usize, bool) {
    let n = hf.n();
    let center = hf.d.iter().sum::<C64>() / n as f64;
    // Start on the circle whose radius is the geometric mean of |λ - center|,
    // read off |p(center)|. Starting far outside the roots costs O(n) sweeps.
    let log_p = hyman_eval(hf, center).log_abs_det;
    let radius = if log_p.is_finite() {
        (log_p / n as f64).exp()
    } else {
        hf.d.iter().map(|d| d.norm()).fold(0.0, f64::max) + spectral_norm(&hf.u_f) * spectral_norm(&hf.v_f)
    };
    let radius = if radius > 0.0 { radius } else { 1.0 };
    let mut z: Vec<C64> = (0..n)
        .map(|j| {
            let theta = 2.0 * std::f64::consts::PI * (j as f64 + 0.25) / n as f64 + rng.random_range(-0.1..0.1);
            center + C64::from_polar(radius, theta)
        })
        .collect();
    let mut newton = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    for iter in 1..=opts.max_iter {
        for i in 0..n {
            if done[i] {
                continue;
            }
            let nwt = hyman_eval(hf, z[i]).newton;
            newton[i] = nwt.norm();
            if !nwt.is_finite() {
                continue;
            }
            let sum: C64 = (0..n).filter(|&j| j != i).map(|j| ONE / (z[i] - z[j])).sum();
            let step = nwt / (ONE - nwt * sum);
            if step.is_finite() {
                z[i] -= step;
            }
            if nwt.norm() <= opts.tol * (1.0 + z[i].norm()) {
                done[i] = true;
            }
        }
        if done.iter().all(|&d| d) {
            return (z, newton, iter, true);
        }
    }
    (z, newton, opts.max_iter, false)
}
