//! Dense reference implementations. Cubic or worse; meant for verification.

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, C64, ONE, ZERO};
use crate::rotations::{make_rotation, Rotation, RotationSequence1};

/// Default relative tolerance for numerical rank decisions.
pub const RANK_TOL: f64 = 1e-8;

/// `tril(A, -1) + triu(A*, 1)`.
pub fn t_op(a: &DenseMatrix) -> DenseMatrix {
    assert!(a.is_square());
    let n = a.rows();
    DenseMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Greater => a[(i, j)],
        std::cmp::Ordering::Less => a[(j, i)].conj(),
        std::cmp::Ordering::Equal => ZERO,
    })
}

/// Result of the dense Givens reduction `H = Q·A·Q*`.
#[derive(Clone, Debug)]
pub struct DenseReduction {
    pub h: DenseMatrix,
    pub q: DenseMatrix,
    /// Rotations in application order, with the row they act on.
    pub rotations: Vec<(usize, Rotation)>,
}

/// Reduces `A` to upper Hessenberg form by Givens rotations, column by column,
/// annihilating each column from the bottom up.
pub fn dense_hessenberg(a: &DenseMatrix) -> DenseReduction {
    assert!(a.is_square());
    let n = a.rows();
    let mut h = a.clone();
    let mut q = DenseMatrix::identity(n);
    let mut rotations = Vec::new();
    for j in 0..n.saturating_sub(2) {
        for i in (j + 2..n).rev() {
            let (g, alpha) = make_rotation(h[(i - 1, j)], h[(i, j)]);
            if g.is_identity() {
                continue;
            }
            crate::rotations::apply_rows(g, false, i - 1, &mut h).expect("in range");
            crate::rotations::apply_cols(g, true, i - 1, &mut h).expect("in range");
            crate::rotations::apply_rows(g, false, i - 1, &mut q).expect("in range");
            h[(i - 1, j)] = alpha;
            h[(i, j)] = ZERO;
            rotations.push((i - 1, g));
        }
    }
    for i in 0..n {
        for j in 0..i.saturating_sub(1) {
            h[(i, j)] = ZERO;
        }
    }
    DenseReduction { h, q, rotations }
}

/// Singular values by one-sided Jacobi, in no particular order.
pub fn singular_values(a: &DenseMatrix) -> Vec<f64> {
    // Orthogonalize along the smaller dimension.
    let x = if a.cols() > a.rows() { a.adjoint() } else { a.clone() };
    let (m, n) = (x.rows(), x.cols());
    if m == 0 || n == 0 {
        return Vec::new();
    }
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| x.column(j)).collect();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = cols[q].iter().map(|z| z.norm_sqr()).sum();
                let gamma: C64 = cols[p].iter().zip(&cols[q]).map(|(a, b)| a.conj() * b).sum();
                let g = gamma.norm();
                if g <= 1e-15 * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = cols.split_at_mut(q);
                let (cp, cq) = (&mut lo[p], &mut hi[0]);
                for (ap, aq) in cp.iter_mut().zip(cq.iter_mut()) {
                    let bq = *aq * phase.conj();
                    let np = *ap * c - bq * s;
                    let nq = *ap * s + bq * c;
                    *ap = np;
                    *aq = nq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    cols.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect()
}

pub fn spectral_norm(a: &DenseMatrix) -> f64 {
    singular_values(a).into_iter().fold(0.0, f64::max)
}

/// Number of singular values above `abs_tol`.
pub fn numerical_rank(a: &DenseMatrix, abs_tol: f64) -> usize {
    singular_values(a).into_iter().filter(|&s| s > abs_tol).count()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

/// Largest numerical rank over the maximal strictly lower (or upper)
/// submatrices; singular values count when above `tol·σ_max(A)`.
pub fn qs_rank(a: &DenseMatrix, side: Side, tol: f64) -> usize {
    assert!(a.is_square());
    let n = a.rows();
    let smax = spectral_norm(a);
    if smax == 0.0 {
        return 0;
    }
    let abs_tol = tol * smax;
    (0..n.saturating_sub(1))
        .map(|i| {
            let block = match side {
                Side::Lower => a.block(i + 1, n, 0, i + 1),
                Side::Upper => a.block(0, i + 1, i + 1, n),
            };
            numerical_rank(&block, abs_tol)
        })
        .max()
        .unwrap_or(0)
}

/// Dense residual `R = t(Q·A·Q*) - Q·(D + t(A))·Q*` of a 1-sequence `Q`,
/// together with its lower quasiseparable rank.
pub fn residual_qs1(a: &DenseMatrix, seq: &RotationSequence1, d: &[f64]) -> (DenseMatrix, usize) {
    let q = seq.dense();
    let qa = q.matmul(a).matmul(&q.adjoint());
    let inner = DenseMatrix::diag(d).add(&t_op(a));
    let r = t_op(&qa).sub(&q.matmul(&inner).matmul(&q.adjoint()));
    let rank = qs_rank(&r, Side::Lower, RANK_TOL);
    (r, rank)
}

/// `det(x·I - A)` by LU with partial pivoting.
pub fn dense_det(a: &DenseMatrix, x: C64) -> C64 {
    assert!(a.is_square());
    let n = a.rows();
    let mut m = DenseMatrix::from_fn(n, n, |i, j| if i == j { x - a[(i, j)] } else { -a[(i, j)] });
    let mut det = ONE;
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[(i, col)].norm().total_cmp(&m[(j, col)].norm())).unwrap();
        if m[(piv, col)] == ZERO {
            return ZERO;
        }
        if piv != col {
            for j in 0..n {
                let t = m[(piv, j)];
                m[(piv, j)] = m[(col, j)];
                m[(col, j)] = t;
            }
            det = -det;
        }
        let p = m[(col, col)];
        det *= p;
        for i in col + 1..n {
            let f = m[(i, col)] / p;
            if f == ZERO {
                continue;
            }
            for j in col + 1..n {
                let v = m[(col, j)];
                m[(i, j)] -= f * v;
            }
        }
    }
    det
}

fn eig2(a: C64, b: C64, c: C64, d: C64) -> (C64, C64) {
    let tr = a + d;
    let half = (a - d) * 0.5;
    let disc = (half * half + b * c).sqrt();
    let m = tr * 0.5;
    (m + disc, m - disc)
}

/// Eigenvalues of an upper Hessenberg matrix by single-shift complex QR with
/// Wilkinson shifts and deflation.
pub fn hessenberg_eigs(h: &DenseMatrix) -> Result<Vec<C64>> {
    if !h.is_square() {
        return Err(Error::Dimension("eigenvalues of a non-square matrix".into()));
    }
    let n = h.rows();
    let mut a = h.clone();
    let mut eigs = vec![ZERO; n];
    if n == 0 {
        return Ok(eigs);
    }
    let budget = 30 * n.max(1);
    let mut iters = 0usize;
    let mut since_deflation = 0usize;
    let mut hi = n - 1;
    loop {
        if hi == 0 {
            eigs[0] = a[(0, 0)];
            break;
        }
        // Find the start of the unreduced block ending at `hi`.
        let mut lo = hi;
        while lo > 0 {
            let sub = a[(lo, lo - 1)].norm();
            let scale = a[(lo, lo)].norm() + a[(lo - 1, lo - 1)].norm();
            let scale = if scale == 0.0 { a.max_abs() } else { scale };
            if sub <= f64::EPSILON * scale {
                a[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eigs[hi] = a[(hi, hi)];
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        iters += 1;
        since_deflation += 1;
        if iters > budget {
            return Err(Error::NoConvergence(format!("QR iteration exceeded {budget} steps")));
        }
        let (e1, e2) = eig2(a[(hi - 1, hi - 1)], a[(hi - 1, hi)], a[(hi, hi - 1)], a[(hi, hi)]);
        let corner = a[(hi, hi)];
        let mut mu = if (e1 - corner).norm() < (e2 - corner).norm() { e1 } else { e2 };
        if since_deflation % 11 == 10 {
            mu = corner + C64::new(a[(hi, hi - 1)].norm() * 1.5, a[(hi, hi - 1)].norm() * 0.5);
        }
        qr_step(&mut a, lo, hi, mu);
    }
    Ok(eigs)
}

fn qr_step(a: &mut DenseMatrix, lo: usize, hi: usize, mu: C64) {
    for i in lo..=hi {
        a[(i, i)] -= mu;
    }
    let mut rots = Vec::with_capacity(hi - lo);
    for i in lo..hi {
        let (g, _) = make_rotation(a[(i, i)], a[(i + 1, i)]);
        for j in i..=hi {
            let (x, y) = g.apply(a[(i, j)], a[(i + 1, j)]);
            a[(i, j)] = x;
            a[(i + 1, j)] = y;
        }
        a[(i + 1, i)] = ZERO;
        rots.push(g);
    }
    for (t, g) in rots.into_iter().enumerate() {
        let i = lo + t;
        // Columns i, i+1 times G*.
        let gs = g.adjoint();
        for r in lo..=(i + 1).min(hi) {
            let (x, y) = (a[(r, i)], a[(r, i + 1)]);
            a[(r, i)] = gs.c * x - gs.s.conj() * y;
            a[(r, i + 1)] = gs.s * x + gs.c.conj() * y;
        }
    }
    for i in lo..=hi {
        a[(i, i)] += mu;
    }
}

/// Greedy nearest-neighbour matching of two eigenvalue multisets. Returns, for
/// each entry of `reference`, the distance to its partner in `computed`.
pub fn match_eigenvalues(reference: &[C64], computed: &[C64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..reference.len()).collect();
    order.sort_by(|&i, &j| reference[j].norm().total_cmp(&reference[i].norm()));
    let mut used = vec![false; computed.len()];
    let mut dist = vec![f64::INFINITY; reference.len()];
    for i in order {
        let best = (0..computed.len())
            .filter(|&j| !used[j])
            .min_by(|&a, &b| (computed[a] - reference[i]).norm().total_cmp(&(computed[b] - reference[i]).norm()));
        if let Some(j) = best {
            used[j] = true;
            dist[i] = (computed[j] - reference[i]).norm();
        }
    }
    dist
}
