use super::conjugate::{conjugate_dab, conjugate_gv, truncate_gv};
use super::{clean_column, HessenbergForm};
use crate::counter;
use crate::error::{Error, Result};
use crate::gvcore::{add_embedded, dab_add, embed_rank1_unchecked, GVMatrix, Rank1QS};
use crate::matrix::{DenseMatrix, C64, ZERO};
use crate::oracle::dense_hessenberg;
use crate::rotations::{make_rotation, Rotation, RotationSequence1, RotationSequenceK};

/// Tolerance for merging the two residuals of a step, relative to `‖b‖`.
/// Both carry the same `b` by construction, so this only catches bugs.
const MERGE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReduceOptions {
    /// Re-orthogonalize the rotations every this many steps; `None` means
    /// every `k` steps and `Some(0)` disables it.
    pub reorth_every: Option<usize>,
    /// Move the part of the residual generator that the rotations can
    /// represent into `M` every this many steps; same convention.
    pub rebalance_every: Option<usize>,
    pub log_rotations: bool,
}

impl Default for ReduceOptions {
    fn default() -> Self {
        Self { reorth_every: None, rebalance_every: None, log_rotations: false }
    }
}

/// Diagnostics collected over a reduction.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ReductionStats {
    /// Rotation applications and turnovers, as counted by [`counter`].
    pub operations: u64,
    pub steps: usize,
    /// Correction terms that could not be solved for.
    pub fallbacks: usize,
    /// Largest entry of a conjugated DAB term that fell outside the GV space
    /// of the new rotations and was dropped.
    pub max_embed_leak: f64,
    pub reorthogonalizations: usize,
    pub rebalances: usize,
    /// Largest entry dropped while rebalancing.
    pub max_rebalance_leak: f64,
}

/// Output of one reduction step.
#[derive(Clone, Debug)]
pub struct StepRecord {
    /// Diagonal entry of the reduced row.
    pub d: C64,
    /// Subdiagonal entry below it.
    pub s: C64,
    pub u_row: Vec<C64>,
    pub v_row: Vec<C64>,
    /// The sweep, with rows relative to the trailing block before the step.
    pub sweep: RotationSequence1,
}

/// Trailing block `Â = U·V* + M + S` of a partially reduced matrix, with `M`
/// in GV form over rotations spanning `U` and `S` in DAB form.
#[derive(Clone, Debug)]
pub struct ReductionState {
    pub u: DenseMatrix,
    pub v: DenseMatrix,
    pub m: GVMatrix,
    pub s: Rank1QS,
    /// Rows already reduced.
    pub offset: usize,
}

impl ReductionState {
    /// `M = ⟨rotations spanning U, 0, 0⟩` and `S = diag(D)`.
    pub fn new(d: &[f64], u: &DenseMatrix, v: &DenseMatrix) -> Result<Self> {
        check_inputs(d, u, v)?;
        Ok(Self {
            u: u.clone(),
            v: v.clone(),
            m: GVMatrix::zero(RotationSequenceK::from_matrix(u)),
            s: Rank1QS::diagonal(d.to_vec()),
            offset: 0,
        })
    }

    /// Current trailing dimension.
    pub fn dim(&self) -> usize {
        self.u.rows()
    }

    pub fn k(&self) -> usize {
        self.u.cols()
    }

    /// `Â·e_0` in `O(mk)`.
    pub fn first_column(&self) -> Vec<C64> {
        let m = self.dim();
        let v0: Vec<C64> = self.v.row(0).iter().map(|z| z.conj()).collect();
        let mut col = self.u.matvec(&v0);
        let lower = self.m.column_lower(0);
        let b0 = self.s.b[0].conj();
        col[0] += C64::new(self.m.d[0] + self.s.d[0], 0.0);
        for i in 1..m {
            col[i] += lower[i] + self.s.a[i] * b0;
        }
        col
    }

    /// `Â` as a dense matrix.
    pub fn dense(&self) -> DenseMatrix {
        self.u
            .matmul(&self.v.adjoint())
            .add(&self.m.to_dense())
            .add(&self.s.to_dense())
    }

    /// Reduces the first column and moves on to the trailing block of size
    /// `m - 1`. Needs `m >= 3`.
    pub fn step(&mut self, stats: &mut ReductionStats) -> Result<StepRecord> {
        let m = self.dim();
        if m < 3 {
            return Err(Error::Dimension(format!("reduction step on a block of size {m}")));
        }
        let col = self.first_column();
        let (sweep, alpha) = clean_column(&col);
        sweep.apply_rows(false, &mut self.u)?;
        sweep.apply_rows(false, &mut self.v)?;
        let u_row = self.u.row(0).to_vec();
        let v_row = self.v.row(0).to_vec();
        self.u = self.u.block(1, m, 0, self.k());
        self.v = self.v.block(1, m, 0, self.k());

        let (mh, r_m, sweep_stats) = conjugate_gv(&self.m, &sweep)?;
        let (sh, r_s) = conjugate_dab(&self.s, &sweep)?;
        let mh = truncate_gv(&mh);
        let sh = sh.truncate_head();
        let (w_s, d_s, (_, leak)) = embed_rank1_unchecked(&sh, &mh.g)?;
        stats.max_embed_leak = stats.max_embed_leak.max(leak);
        self.m = add_embedded(&mh, &w_s, &d_s)?;
        self.s = dab_add(&r_m.truncate_head(), &r_s.truncate_head(), MERGE_TOL)?;
        self.offset += 1;
        stats.steps += 1;
        stats.fallbacks += sweep_stats.fallbacks;
        Ok(StepRecord { d: col[0], s: alpha, u_row, v_row, sweep })
    }

    /// Recomputes the moduli of the rotations so that they span `U` again,
    /// keeping their phases. Rotations whose target column is negligible, or
    /// which would change by more than a rounding-level correction, are kept.
    pub fn reorthogonalize(&mut self) {
        let m = self.dim();
        let k = self.m.k();
        // Layer l compresses column l-1 of U·Y, where Y makes G*·U·Y vanish
        // below its first subdiagonal.
        let mut x = self.active_u().matmul(&self.staircase_basis());
        let tiny = 1e-8 * x.frobenius();
        for l in 1..=k {
            for r in (l..m.saturating_sub(1)).rev() {
                let old = self.m.g.get(r, l);
                let (v1, v2) = (x[(r, l - 1)], x[(r + 1, l - 1)]);
                let rho = v1.norm().hypot(v2.norm());
                let mut g = old;
                if rho > tiny {
                    let cand = if v1 == ZERO {
                        Rotation { c: ZERO, s: phase(old.s) }
                    } else {
                        let c = phase(old.c) * (v1.norm() / rho);
                        Rotation { c, s: -c.conj() * v2.conj() / v1.conj() }
                    };
                    if (cand.c - old.c).norm() + (cand.s - old.s).norm() < 1e-4 {
                        g = cand;
                        self.m.g.set(r, l, g);
                    }
                }
                let (a, b) = x.row_pair_mut(r, r + 1);
                g.adjoint().apply_slices(a, b);
            }
        }
    }

    /// Drops the direction `y` (with `U[1:, :]·y = 0`) from the rotations of
    /// `M`. The factors are rotated so that `U·y/‖y‖` becomes their last
    /// column, which is then supported on row 0 only, and `M` is rebuilt over
    /// `k - 1` layers spanning the other columns. Requires `M` to have no
    /// off-diagonal part, as after the first step.
    ///
    /// Without this the last layer of rotations is fixed by rounding noise and
    /// the split of the trailing block between `M` and `S` drifts.
    ///
    /// Returns the unitary applied to the columns of the factors, if any.
    pub fn drop_null_direction(&mut self, y: &[C64]) -> Result<Option<DenseMatrix>> {
        let k = self.k();
        if self.m.k() != k || k == 0 {
            return Err(Error::Invalid("null direction already dropped".into()));
        }
        if self.m.w.iter().any(|z| *z != ZERO) {
            return Err(Error::Invalid("dropping a direction needs a diagonal M".into()));
        }
        let ny = crate::matrix::norm2(y);
        if y.len() != k || ny == 0.0 {
            return Ok(None);
        }
        // Householder reflector H with H·x = beta·e_{k-1} for x = y/‖y‖.
        let x: Vec<C64> = y.iter().map(|z| z / ny).collect();
        let beta = -phase(x[k - 1]);
        let mut v = x.clone();
        v[k - 1] -= beta;
        let vv: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let h = DenseMatrix::from_fn(k, k, |i, j| {
            let id = if i == j { 1.0 } else { 0.0 };
            C64::new(id, 0.0) - v[i] * v[j].conj() * (2.0 / vv)
        });
        self.u = self.u.matmul(&h);
        self.v = self.v.matmul(&h);
        let m = self.dim();
        for i in 1..m {
            self.u[(i, k - 1)] = ZERO;
        }
        let kept = self.u.block(0, m, 0, k - 1);
        self.m = GVMatrix::new(RotationSequenceK::from_matrix(&kept), vec![ZERO; (m - 1) * (k - 1)], self.m.d.clone())?;
        Ok(Some(h))
    }

    /// Moves the part of the residual generator `a` lying in the range of
    /// `U` into `M`. The split of the trailing block between `M` and `S` is
    /// not unique, and without this the two grow while cancelling each other.
    /// Returns the largest dropped entry of the moved term. Costs `O(mk²)`.
    pub fn rebalance(&mut self) -> Result<f64> {
        let m = self.dim();
        // Row i of the lower part of t(a·b*) has norm |a_i|·‖b[..i]‖.
        let mut weight = vec![0.0; m];
        let mut acc = 0.0f64;
        for i in 1..m {
            acc = acc.hypot(self.s.b[i - 1].norm());
            weight[i] = acc;
        }
        // The moved part must lie in the space the rotations represent.
        let k = self.m.k();
        let mut wu = DenseMatrix::zeros(m - 1, k);
        let mut e = vec![ZERO; m];
        for t in 0..k {
            e.fill(ZERO);
            e[t + 1] = C64::new(1.0, 0.0);
            self.m.g.apply_vec(false, &mut e)?;
            for i in 1..m {
                wu[(i - 1, t)] = e[i] * weight[i];
            }
        }
        let wa: Vec<C64> = (1..m).map(|i| self.s.a[i] * weight[i]).collect();
        let mut x = vec![ZERO; m];
        for q in &orthonormal_range(&wu) {
            let c: C64 = q.iter().zip(&wa).map(|(qi, ai)| qi.conj() * ai).sum();
            for i in 1..m {
                x[i] += c * q[i - 1];
            }
        }
        for i in 1..m {
            x[i] = if weight[i] > 0.0 { x[i] / weight[i] } else { ZERO };
        }
        let moved = Rank1QS::new(vec![0.0; m], x.clone(), self.s.b.clone())?;
        let (w, d, (_, leak)) = embed_rank1_unchecked(&moved, &self.m.g)?;
        self.m = add_embedded(&self.m, &w, &d)?;
        for i in 1..m {
            self.s.a[i] -= x[i];
        }
        Ok(leak)
    }

    /// Columns of `U` the rotations of `M` are built on.
    fn active_u(&self) -> DenseMatrix {
        self.u.block(0, self.dim(), 0, self.m.k())
    }

    /// Unitary `Y` (`k`×`k`) such that the leading `k+1` rows of `G*·U·Y` are
    /// zero below the first subdiagonal, built from column rotations.
    fn staircase_basis(&self) -> DenseMatrix {
        let k = self.m.k();
        let mut r = self.active_u();
        self.m.g.apply_rows(true, &mut r).expect("sizes agree");
        let rows = (k + 1).min(r.rows());
        let mut r = r.block(0, rows, 0, k).adjoint();
        let mut y = DenseMatrix::identity(k).adjoint();
        // Rows of r and y are columns of G*·U and Y.
        for i in (2..rows).rev() {
            for j in 0..i - 1 {
                let (g, _) = make_rotation(r[(i - 1, i)], r[(j, i)]);
                if g.is_identity() {
                    continue;
                }
                for m in [&mut r, &mut y] {
                    let (a, b) = m.row_pair_mut(j, i - 1);
                    g.apply_slices(b, a);
                }
            }
        }
        y.adjoint()
    }

    /// Dense reduction of the remaining block. Returns its record and the
    /// rotations used, with rows relative to the block.
    pub fn reduce_trailing(&self) -> (HessenbergForm, Vec<(usize, Rotation)>) {
        let red = dense_hessenberg(&self.dense());
        let h = &red.h;
        let m = h.rows();
        let form = HessenbergForm {
            d: (0..m).map(|i| h[(i, i)]).collect(),
            s: (0..m.saturating_sub(1)).map(|i| h[(i + 1, i)]).collect(),
            u_f: red.q.matmul(&self.u),
            v_f: red.q.matmul(&self.v),
            rotations: None,
        };
        (form, red.rotations)
    }
}

/// Orthonormal basis of the numerical range of `b`, by modified Gram-Schmidt
/// with one re-orthogonalization pass. Columns that lose all but a `1e-12`
/// fraction of their norm are dropped.
fn orthonormal_range(b: &DenseMatrix) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(b.cols());
    for j in 0..b.cols() {
        let mut v = b.column(j);
        let n0 = crate::matrix::norm2(&v);
        if n0 == 0.0 {
            continue;
        }
        for _ in 0..2 {
            for q in &basis {
                let c: C64 = q.iter().zip(&v).map(|(qi, vi)| qi.conj() * vi).sum();
                v.iter_mut().zip(q).for_each(|(vi, qi)| *vi -= c * qi);
            }
        }
        let nv = crate::matrix::norm2(&v);
        if nv > 1e-12 * n0 {
            v.iter_mut().for_each(|vi| *vi /= nv);
            basis.push(v);
        }
    }
    basis
}

fn phase(z: C64) -> C64 {
    let r = z.norm();
    if r == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        z / r
    }
}

fn check_inputs(d: &[f64], u: &DenseMatrix, v: &DenseMatrix) -> Result<()> {
    let n = d.len();
    let k = u.cols();
    if n < 2 || k == 0 || k >= n {
        return Err(Error::Dimension(format!("need n >= 2 and 1 <= k < n, got n = {n}, k = {k}")));
    }
    if u.rows() != n || v.rows() != n || v.cols() != k {
        return Err(Error::Dimension(format!(
            "factors of shape {}x{} and {}x{} for n = {n}",
            u.rows(),
            u.cols(),
            v.rows(),
            v.cols()
        )));
    }
    let finite = |x: &C64| x.is_finite();
    if !d.iter().all(|x| x.is_finite()) || !u.data().iter().all(finite) || !v.data().iter().all(finite) {
        return Err(Error::Invalid("input contains non-finite entries".into()));
    }
    Ok(())
}

/// Reduces `A = diag(D) + U·V*` to upper Hessenberg form in `O(n²k)`.
///
/// `A` is first split at every row `p` where the factors decouple exactly,
/// i.e. each column of `U` or of `V` vanishes on one side of `p`. The update
/// needs the rotations spanning `U` to be nondegenerate, which fails on such
/// inputs; after the split each block keeps only the columns active in it.
/// The subdiagonal of `H` is exactly zero at the split rows.
pub fn hessenberg_reduce(
    d: &[f64],
    u: &DenseMatrix,
    v: &DenseMatrix,
    opts: ReduceOptions,
) -> Result<(HessenbergForm, ReductionStats)> {
    check_inputs(d, u, v)?;
    let n = d.len();
    let k = u.cols();
    let blocks = decoupled_blocks(u, v);
    let active = |t: usize| u.column(t).iter().any(|z| *z != ZERO) && v.column(t).iter().any(|z| *z != ZERO);
    if blocks.len() == 1 && (0..k).all(active) {
        return reduce_block(d, u, v, opts);
    }
    let mut form = HessenbergForm {
        d: Vec::with_capacity(n),
        s: Vec::with_capacity(n - 1),
        u_f: DenseMatrix::zeros(n, k),
        v_f: DenseMatrix::zeros(n, k),
        rotations: opts.log_rotations.then(Vec::new),
    };
    let mut stats = ReductionStats::default();
    for &(lo, hi) in &blocks {
        let active: Vec<usize> = (0..k)
            .filter(|&t| (lo..hi).any(|i| u[(i, t)] != ZERO) && (lo..hi).any(|i| v[(i, t)] != ZERO))
            .collect();
        let pick = |m: &DenseMatrix| DenseMatrix::from_fn(hi - lo, active.len(), |i, j| m[(lo + i, active[j])]);
        let (ub, vb) = (pick(u), pick(v));
        let (part, st) = if active.is_empty() || active.len() + 2 >= hi - lo {
            dense_block(&d[lo..hi], &ub, &vb)
        } else {
            reduce_block(&d[lo..hi], &ub, &vb, opts)?
        };
        if lo > 0 {
            form.s.push(ZERO);
        }
        form.d.extend(&part.d);
        form.s.extend(&part.s);
        for (j, &t) in active.iter().enumerate() {
            for i in 0..hi - lo {
                form.u_f[(lo + i, t)] = part.u_f[(i, j)];
                form.v_f[(lo + i, t)] = part.v_f[(i, j)];
            }
        }
        if let (Some(log), Some(rots)) = (form.rotations.as_mut(), part.rotations) {
            log.extend(rots.into_iter().map(|(r, g)| (lo + r, g)));
        }
        stats.operations += st.operations;
        stats.steps += st.steps;
        stats.fallbacks += st.fallbacks;
        stats.max_embed_leak = stats.max_embed_leak.max(st.max_embed_leak);
        stats.reorthogonalizations += st.reorthogonalizations;
        stats.rebalances += st.rebalances;
        stats.max_rebalance_leak = stats.max_rebalance_leak.max(st.max_rebalance_leak);
    }
    Ok((form, stats))
}

/// Maximal row ranges `lo..hi` such that `A` is block diagonal over them
/// because every column pair `(U[:, t], V[:, t])` is supported on one side of
/// each boundary. Exact zeros only; `O(nk)`.
pub fn decoupled_blocks(u: &DenseMatrix, v: &DenseMatrix) -> Vec<(usize, usize)> {
    let n = u.rows();
    // coupled[p] > 0 means rows p-1 and p are coupled.
    let mut diff = vec![0i64; n + 2];
    let support = |m: &DenseMatrix, t: usize| {
        let first = (0..n).find(|&i| m[(i, t)] != ZERO)?;
        let last = (0..n).rev().find(|&i| m[(i, t)] != ZERO)?;
        Some((first, last))
    };
    for t in 0..u.cols() {
        let (Some((fu, lu)), Some((fv, lv))) = (support(u, t), support(v, t)) else {
            continue;
        };
        // U[p:, t]·V[:p, t]* couples the boundary p for fv < p <= lu, and
        // U[:p, t]·V[p:, t]* does for fu < p <= lv.
        for (a, b) in [(fv, lu), (fu, lv)] {
            if a < b {
                diff[a + 1] += 1;
                diff[b + 1] -= 1;
            }
        }
    }
    let mut out = Vec::new();
    let (mut lo, mut acc) = (0, 0i64);
    for p in 1..n {
        acc += diff[p];
        if acc == 0 {
            out.push((lo, p));
            lo = p;
        }
    }
    out.push((lo, n));
    out
}

/// Dense Givens reduction of a small block.
fn dense_block(d: &[f64], u: &DenseMatrix, v: &DenseMatrix) -> (HessenbergForm, ReductionStats) {
    let a = DenseMatrix::diag(d).add(&u.matmul(&v.adjoint()));
    let (red, ops) = counter::measure(|| dense_hessenberg(&a));
    let m = d.len();
    let form = HessenbergForm {
        d: (0..m).map(|i| red.h[(i, i)]).collect(),
        s: (0..m.saturating_sub(1)).map(|i| red.h[(i + 1, i)]).collect(),
        u_f: red.q.matmul(u),
        v_f: red.q.matmul(v),
        rotations: Some(red.rotations),
    };
    (form, ReductionStats { operations: ops, ..Default::default() })
}

fn reduce_block(
    d: &[f64],
    u: &DenseMatrix,
    v: &DenseMatrix,
    opts: ReduceOptions,
) -> Result<(HessenbergForm, ReductionStats)> {
    let ((form, mut stats), ops) = counter::measure(|| reduce_inner(d, u, v, opts));
    let form = form?;
    stats.operations = ops;
    Ok((form, stats))
}

fn reduce_inner(
    d: &[f64],
    u: &DenseMatrix,
    v: &DenseMatrix,
    opts: ReduceOptions,
) -> (Result<HessenbergForm>, ReductionStats) {
    let mut stats = ReductionStats::default();
    let res = (|| {
        let mut state = ReductionState::new(d, u, v)?;
        let n = d.len();
        let k = state.k();
        let every = opts.reorth_every.unwrap_or(k);
        let rebalance_every = opts.rebalance_every.unwrap_or(k);
        let mut hd = Vec::with_capacity(n);
        let mut hs = Vec::with_capacity(n - 1);
        let mut u_rows = Vec::with_capacity(n * k);
        let mut v_rows = Vec::with_capacity(n * k);
        let mut log = opts.log_rotations.then(Vec::new);
        while state.dim() > k + 2 {
            let offset = state.offset;
            let rec = state.step(&mut stats)?;
            hd.push(rec.d);
            hs.push(rec.s);
            u_rows.extend_from_slice(&rec.u_row);
            v_rows.extend_from_slice(&rec.v_row);
            if stats.steps == 1 {
                let y: Vec<C64> = rec.v_row.iter().map(|z| z.conj()).collect();
                if let Some(h) = state.drop_null_direction(&y)? {
                    let u0 = DenseMatrix::from_vec(1, k, u_rows.clone())?.matmul(&h);
                    let v0 = DenseMatrix::from_vec(1, k, v_rows.clone())?.matmul(&h);
                    u_rows = u0.into_data();
                    v_rows = v0.into_data();
                }
            }
            if let Some(log) = log.as_mut() {
                log.extend(rec.sweep.application_order().filter(|(_, g)| !g.is_identity()).map(|(r, g)| (offset + r, g)));
            }
            if every > 0 && stats.steps % every == 0 && state.dim() > k + 2 {
                state.reorthogonalize();
                stats.reorthogonalizations += 1;
            }
            if rebalance_every > 0 && stats.steps % rebalance_every == 0 && state.dim() > k + 2 {
                let leak = state.rebalance()?;
                stats.max_rebalance_leak = stats.max_rebalance_leak.max(leak);
                stats.rebalances += 1;
            }
        }
        let (tail, rots) = state.reduce_trailing();
        hd.extend(tail.d);
        hs.extend(tail.s);
        u_rows.extend_from_slice(tail.u_f.data());
        v_rows.extend_from_slice(tail.v_f.data());
        if let Some(log) = log.as_mut() {
            log.extend(rots.into_iter().map(|(r, g)| (state.offset + r, g)));
        }
        Ok(HessenbergForm {
            d: hd,
            s: hs,
            u_f: DenseMatrix::from_vec(n, k, u_rows)?,
            v_f: DenseMatrix::from_vec(n, k, v_rows)?,
            rotations: log,
        })
    })();
    (res, stats)
}
