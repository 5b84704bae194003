//! Givens-Vector representation of Hermitian quasiseparable matrices and the
//! rank-one "DAB" form `diag(d) + t(a·b*)`.

use crate::error::{Error, Result};
use crate::matrix::{norm2, DenseMatrix, C64, ZERO};
use crate::rotations::RotationSequenceK;

/// Default relative tolerance of the structural checks.
pub const STRUCTURE_TOL: f64 = 1e-10;

/// Hermitian matrix whose strictly lower column `c` is `G[c:]·spike(c)`,
/// where `G[c:]` keeps the rotations acting below column `c` and `spike(c)`
/// places `W[:, c]` in rows `c+1..=c+k`.
#[derive(Clone, Debug, PartialEq)]
pub struct GVMatrix {
    pub g: RotationSequenceK,
    /// `W[:, c]` is stored at `w[c*k .. (c+1)*k]`.
    pub w: Vec<C64>,
    pub d: Vec<f64>,
}

impl GVMatrix {
    pub fn zero(g: RotationSequenceK) -> Self {
        let (n, k) = (g.n(), g.k());
        Self { g, w: vec![ZERO; n.saturating_sub(1) * k], d: vec![0.0; n] }
    }

    pub fn new(g: RotationSequenceK, w: Vec<C64>, d: Vec<f64>) -> Result<Self> {
        let (n, k) = (g.n(), g.k());
        if d.len() != n || w.len() != n.saturating_sub(1) * k {
            return Err(Error::Dimension(format!(
                "GV matrix of size {n}, rank {k} with {} diagonal entries and {} generator entries",
                d.len(),
                w.len()
            )));
        }
        Ok(Self { g, w, d })
    }

    pub fn n(&self) -> usize {
        self.g.n()
    }

    pub fn k(&self) -> usize {
        self.g.k()
    }

    pub fn w_col(&self, c: usize) -> &[C64] {
        let k = self.k();
        &self.w[c * k..(c + 1) * k]
    }

    pub fn w_col_mut(&mut self, c: usize) -> &mut [C64] {
        let k = self.k();
        &mut self.w[c * k..(c + 1) * k]
    }

    /// `W` as a dense `k`×`(n-1)` matrix.
    pub fn w_matrix(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.k(), self.n().saturating_sub(1), |t, c| self.w_col(c)[t])
    }

    /// Strictly lower part of column `c` as a full-length vector.
    pub fn column_lower(&self, c: usize) -> Vec<C64> {
        let mut v = spike(self, c);
        self.g.apply_diagonals_vec(c, usize::MAX, false, &mut v);
        v
    }

    pub fn to_dense(&self) -> DenseMatrix {
        gv_to_dense(self)
    }
}

/// `spike(c)`: zeros in rows `0..=c`, then `W[:, c]` (truncated at the last row).
pub fn spike(m: &GVMatrix, c: usize) -> Vec<C64> {
    let n = m.n();
    assert!(c + 1 < n, "spike of column {c} in dimension {n}");
    let mut v = vec![ZERO; n];
    for (t, &x) in m.w_col(c).iter().enumerate() {
        if c + 1 + t < n {
            v[c + 1 + t] = x;
        }
    }
    v
}

pub fn gv_to_dense(m: &GVMatrix) -> DenseMatrix {
    let n = m.n();
    let mut a = DenseMatrix::zeros(n, n);
    for i in 0..n {
        a[(i, i)] = C64::new(m.d[i], 0.0);
    }
    for c in 0..n.saturating_sub(1) {
        let v = m.column_lower(c);
        for r in c + 1..n {
            a[(r, c)] = v[r];
            a[(c, r)] = v[r].conj();
        }
    }
    a
}

/// Reads the GV generators of a Hermitian `A` with respect to `g`.
///
/// Fails when `g[c:]* · A[c+1.., c]` leaks below row `c+k` by more than
/// `tol·‖A‖_F`.
pub fn gv_from_dense(a: &DenseMatrix, g: &RotationSequenceK, tol: f64) -> Result<GVMatrix> {
    let n = a.rows();
    if !a.is_square() || n != g.n() {
        return Err(Error::Dimension(format!("{}x{} matrix for a sequence of size {}", a.rows(), a.cols(), g.n())));
    }
    let k = g.k();
    let scale = a.frobenius();
    let mut out = GVMatrix::zero(g.clone());
    for i in 0..n {
        out.d[i] = a[(i, i)].re;
    }
    for c in 0..n.saturating_sub(1) {
        let mut v: Vec<C64> = (0..n).map(|r| if r > c { a[(r, c)] } else { ZERO }).collect();
        g.apply_diagonals_vec(c, usize::MAX, true, &mut v);
        let leak = norm2(&v[(c + 1 + k).min(n)..]);
        if leak > tol * scale {
            return Err(Error::Structure { column: c, residual: leak, tolerance: tol * scale });
        }
        let col = out.w_col_mut(c);
        for t in 0..k {
            if c + 1 + t < n {
                col[t] = v[c + 1 + t];
            }
        }
    }
    Ok(out)
}

/// Whether `B` vanishes below its `k`-th subdiagonal up to `tol·‖B‖_F`.
/// Also returns the largest offending modulus.
pub fn is_lower_banded(b: &DenseMatrix, k: usize, tol: f64) -> (bool, f64) {
    let mut worst: f64 = 0.0;
    for i in 0..b.rows() {
        for j in 0..b.cols() {
            if i > j + k {
                worst = worst.max(b[(i, j)].norm());
            }
        }
    }
    (worst <= tol * b.frobenius(), worst)
}

/// Whether `g*·U` vanishes below row `k` up to `tol·‖U‖_F`, with the residual norm.
pub fn spans(g: &RotationSequenceK, u: &DenseMatrix, tol: f64) -> (bool, f64) {
    let mut x = u.clone();
    g.apply_rows(true, &mut x).expect("sequence and matrix sizes agree");
    let k = g.k();
    let res = if x.rows() > k + 1 { x.block(k + 1, x.rows(), 0, x.cols()).frobenius() } else { 0.0 };
    (res <= tol * u.frobenius(), res)
}

/// Rotations spanning the columns of `u`.
pub fn kseq_from_matrix(u: &DenseMatrix) -> RotationSequenceK {
    RotationSequenceK::from_matrix(u)
}

/// Hermitian rank-one quasiseparable matrix `diag(d) + t(a·b*)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rank1QS {
    pub d: Vec<f64>,
    pub a: Vec<C64>,
    pub b: Vec<C64>,
}

impl Rank1QS {
    /// Builds the matrix; `a[0]` and `b[n-1]` never enter and are set to zero.
    pub fn new(d: Vec<f64>, mut a: Vec<C64>, mut b: Vec<C64>) -> Result<Self> {
        let n = d.len();
        if a.len() != n || b.len() != n {
            return Err(Error::Dimension(format!("DAB form with lengths {n}, {}, {}", a.len(), b.len())));
        }
        if n > 0 {
            a[0] = ZERO;
            b[n - 1] = ZERO;
        }
        Ok(Self { d, a, b })
    }

    pub fn diagonal(d: Vec<f64>) -> Self {
        let n = d.len();
        Self { d, a: vec![ZERO; n], b: vec![ZERO; n] }
    }

    pub fn zero(n: usize) -> Self {
        Self::diagonal(vec![0.0; n])
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        dab_to_dense(self)
    }

    /// Drops the first row and column.
    pub fn truncate_head(&self) -> Self {
        let mut out = Self { d: self.d[1..].to_vec(), a: self.a[1..].to_vec(), b: self.b[1..].to_vec() };
        if !out.a.is_empty() {
            out.a[0] = ZERO;
        }
        out
    }
}

pub fn dab_to_dense(s: &Rank1QS) -> DenseMatrix {
    let n = s.n();
    DenseMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => C64::new(s.d[i], 0.0),
        std::cmp::Ordering::Greater => s.a[i] * s.b[j].conj(),
        std::cmp::Ordering::Less => (s.a[j] * s.b[i].conj()).conj(),
    })
}

/// GV generators of `S` with respect to `g`: `(W_S, D_S)` with `W_S` stored
/// like [`GVMatrix::w`]. Runs a backward recurrence over the columns in
/// `O(nk)`.
///
/// The lower part of `S` must lie in the GV space of `g`; the amount that
/// leaks out (as a matrix entry, relative to `‖a‖·‖b‖`) is checked against `tol`.
pub fn embed_rank1(s: &Rank1QS, g: &RotationSequenceK, tol: f64) -> Result<(Vec<C64>, Vec<f64>)> {
    let (w, d, leak) = embed_rank1_unchecked(s, g)?;
    let scale = norm2(&s.a) * norm2(&s.b);
    if leak.1 > tol * scale {
        return Err(Error::Structure { column: leak.0, residual: leak.1, tolerance: tol * scale });
    }
    Ok((w, d))
}

/// [`embed_rank1`] without the tolerance check; also returns the worst
/// `(column, leak)` pair, the leak being the largest dropped matrix entry.
pub fn embed_rank1_unchecked(
    s: &Rank1QS,
    g: &RotationSequenceK,
) -> Result<(Vec<C64>, Vec<f64>, (usize, f64))> {
    let n = s.n();
    if n != g.n() {
        return Err(Error::Dimension(format!("DAB of size {n} embedded in a sequence of size {}", g.n())));
    }
    let k = g.k();
    let mut w = vec![ZERO; n.saturating_sub(1) * k];
    let mut worst = (0usize, 0.0f64);
    // u holds g[c+1:]* applied to a[c+2..] (zero above row c+2).
    let mut u = vec![ZERO; n];
    for c in (0..n.saturating_sub(1)).rev() {
        u[c + 1] += s.a[c + 1];
        g.apply_diagonals_vec(c, c, true, &mut u);
        if c + k + 1 < n {
            let leak = u[c + k + 1].norm() * s.b[c].norm();
            if leak > worst.1 {
                worst = (c, leak);
            }
            u[c + k + 1] = ZERO;
        }
        let bc = s.b[c].conj();
        for t in 0..k {
            if c + 1 + t < n {
                w[c * k + t] = u[c + 1 + t] * bc;
            }
        }
    }
    Ok((w, s.d.clone(), worst))
}

/// `⟨G, W + W_S, D + D_S⟩`.
pub fn add_embedded(m: &GVMatrix, w_s: &[C64], d_s: &[f64]) -> Result<GVMatrix> {
    if w_s.len() != m.w.len() || d_s.len() != m.d.len() {
        return Err(Error::Dimension("embedded generators do not match the GV matrix".into()));
    }
    let mut out = m.clone();
    out.w.iter_mut().zip(w_s).for_each(|(x, y)| *x += y);
    out.d.iter_mut().zip(d_s).for_each(|(x, y)| *x += y);
    Ok(out)
}

/// Sum of two DAB matrices whose `b` vectors are parallel.
pub fn dab_add(r1: &Rank1QS, r2: &Rank1QS, tol: f64) -> Result<Rank1QS> {
    let n = r1.n();
    if r2.n() != n {
        return Err(Error::Dimension(format!("adding DAB forms of sizes {n} and {}", r2.n())));
    }
    let d: Vec<f64> = r1.d.iter().zip(&r2.d).map(|(x, y)| x + y).collect();
    let a1_zero = r1.a.iter().all(|z| *z == ZERO);
    let a2_zero = r2.a.iter().all(|z| *z == ZERO);
    if a2_zero {
        return Rank1QS::new(d, r1.a.clone(), r1.b.clone());
    }
    if a1_zero {
        return Rank1QS::new(d, r2.a.clone(), r2.b.clone());
    }
    let nb1: f64 = r1.b.iter().map(|z| z.norm_sqr()).sum();
    if nb1 == 0.0 {
        return Rank1QS::new(d, r2.a.clone(), r2.b.clone());
    }
    // b2 = λ·b1  ⇒  a2·b2* = conj(λ)·a2·b1*.
    let lambda: C64 = r1.b.iter().zip(&r2.b).map(|(x, y)| x.conj() * y).sum::<C64>() / nb1;
    let off: Vec<C64> = r2.b.iter().zip(&r1.b).map(|(y, x)| y - lambda * x).collect();
    let res = norm2(&off);
    let tolerance = tol * norm2(&r2.b);
    if res > tolerance {
        return Err(Error::Structure { column: 0, residual: res, tolerance });
    }
    let a = r1.a.iter().zip(&r2.a).map(|(x, y)| x + lambda.conj() * y).collect();
    Rank1QS::new(d, a, r1.b.clone())
}
