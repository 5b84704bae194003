use crate::error::{Error, Result};
use crate::gvcore::{GVMatrix, Rank1QS};
use crate::matrix::{C64, ZERO};
use crate::rotations::{Rotation, RotationSequence1};

/// Bookkeeping from one conjugation sweep.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SweepStats {
    /// Rotations whose correction term could not be solved for (chain sine
    /// product vanished) and fell back to a zero correction.
    pub fallbacks: usize,
    /// Largest entry dropped by such a fallback.
    pub dropped: f64,
}

/// Running `b` vector of the residual of a sweep. It depends only on the
/// rotations: for `F = [[c, s], [-s̄, c̄]]` at row `p`,
/// `b_p = s·b_{p+1}` and `b_{p+1} ← c̄·b_{p+1}`, starting from `b = e_{p+1}` at
/// the first nontrivial rotation.
struct ResidualB {
    b: Vec<C64>,
    started: bool,
}

impl ResidualB {
    fn new(m: usize) -> Self {
        Self { b: vec![ZERO; m], started: false }
    }

    /// Advances past `f` at row `p`; returns the previous `b_{p+1}`.
    fn step(&mut self, f: Rotation, p: usize) -> C64 {
        if !self.started {
            self.b[p + 1] = C64::new(1.0, 0.0);
            self.started = true;
        }
        let old = self.b[p + 1];
        self.b[p] = f.s * old;
        self.b[p + 1] = f.c.conj() * old;
        old
    }
}

/// Conjugates a GV matrix by a 1-sequence: `P·M·P* = M̂ + R` with `M̂` in GV
/// form over the rotations obtained by passing `P` through `M.g`, and `R` a
/// rank-one DAB residual with zero diagonal and `R·e_0 = 0`. Nothing is
/// truncated.
pub fn conjugate_gv(m: &GVMatrix, p: &RotationSequence1) -> Result<(GVMatrix, Rank1QS, SweepStats)> {
    let n = m.n();
    if p.n() != n {
        return Err(Error::Dimension(format!("sweep of size {} on a GV matrix of size {n}", p.n())));
    }
    let k = m.k();
    let mut out = m.clone();
    let mut rb = ResidualB::new(n);
    let mut ra = vec![ZERO; n];
    let mut stats = SweepStats::default();
    let mut x = vec![ZERO; k + 2];
    let mut y = vec![ZERO; k + 2];
    let mut z1 = vec![ZERO; k + 2];
    for (row, f) in p.application_order() {
        if f.is_identity() {
            continue;
        }
        // Window rows row..row+len.
        let len = (k + 2).min(n - row);
        let x = &mut x[..len];
        let y = &mut y[..len];
        let z1 = &mut z1[..len];

        // Column `row`: d e_row + spike, then its own diagonal of rotations.
        x.fill(ZERO);
        x[0] = C64::new(out.d[row], 0.0);
        for t in 0..len - 1 {
            if t < k {
                x[1 + t] = out.w_col(row)[t];
            }
        }
        out.g.apply_diagonal_window(row, false, x, row);

        // Column `row + 1` from the row below downward.
        y.fill(ZERO);
        y[0] = x[1].conj();
        y[1] = C64::new(out.d[row + 1], 0.0);
        if row + 1 < n - 1 {
            let wc = out.w_col(row + 1);
            for t in 0..len - 2 {
                y[2 + t] = wc[t];
            }
        }

        // F·[x y]·F*.
        (x[0], x[1]) = f.apply(x[0], x[1]);
        (y[0], y[1]) = f.apply(y[0], y[1]);
        let (cc, sc) = (f.c.conj(), f.s.conj());
        for i in 0..len {
            let (a, b) = (x[i], y[i]);
            x[i] = cc * a + sc * b;
            y[i] = f.c * b - f.s * a;
        }

        out.g.pass_down(f, row)?;

        out.d[row] = x[0].re;
        out.d[row + 1] = y[1].re;
        if row + 1 < n - 1 {
            let wc = out.w_col_mut(row + 1);
            for t in 0..k {
                wc[t] = if 2 + t < len { y[2 + t] } else { ZERO };
            }
        }

        // Spike of column `row` over the new rotations, with the correction
        // alpha at (row+1, row) chosen to keep it inside the window.
        out.g.apply_diagonal_window(row, true, x, row);
        let mut alpha = ZERO;
        if len == k + 2 {
            z1.fill(ZERO);
            z1[1] = C64::new(1.0, 0.0);
            out.g.apply_diagonal_window(row, true, z1, row);
            let last = k + 1;
            let lead = z1[last];
            if lead.norm() > 1e-300 && (x[last] / lead).is_finite() {
                alpha = -x[last] / lead;
                for i in 1..len {
                    x[i] += alpha * z1[i];
                }
            } else {
                stats.fallbacks += 1;
                stats.dropped = stats.dropped.max(x[last].norm());
            }
        }
        let wc = out.w_col_mut(row);
        for t in 0..k {
            wc[t] = if 1 + t < len { x[1 + t] } else { ZERO };
        }

        // P·M·P* = M̂ - alpha (e_{row+1} e_row^T + h.c.).
        let old = rb.step(f, row);
        ra[row + 1] = -alpha / (f.s.conj() * old.conj());
    }
    let r = Rank1QS::new(vec![0.0; n], ra, rb.b)?;
    Ok((out, r, stats))
}

/// Conjugates a DAB matrix by a 1-sequence: `P·S·P* = S' + R` where
/// `S' = diag(d') + t((P·a)(P·b)*)` and `R` is a zero-diagonal DAB residual
/// sharing its `b` vector with every other residual of the same sweep.
pub fn conjugate_dab(s: &Rank1QS, p: &RotationSequence1) -> Result<(Rank1QS, Rank1QS)> {
    let n = s.n();
    if p.n() != n {
        return Err(Error::Dimension(format!("sweep of size {} on a DAB matrix of size {n}", p.n())));
    }
    let mut d = s.d.clone();
    let mut xa = s.a.clone();
    let mut yb = s.b.clone();
    let mut rb = ResidualB::new(n);
    let mut ra = vec![ZERO; n];
    for (row, f) in p.application_order() {
        if f.is_identity() {
            continue;
        }
        let (c, sn) = (f.c, f.s);
        let (cc, sc) = (c.conj(), sn.conj());
        let (d0, d1) = (d[row], d[row + 1]);
        let x00 = xa[row] * yb[row].conj();
        let x01 = xa[row] * yb[row + 1].conj();
        let x10 = xa[row + 1] * yb[row].conj();
        let x11 = xa[row + 1] * yb[row + 1].conj();
        // New (row+1, row) entry outside t(x' y'*), divided by s̄.
        let e = cc * C64::new(d1 - d0, 0.0) + cc * x00 + sc * x01 - cc * x11 - sc * x10.conj();
        let shift = 2.0 * (cc * sn * x10).re;
        let (c2, s2) = (c.norm_sqr(), sn.norm_sqr());
        d[row] = c2 * d0 + s2 * d1 + shift;
        d[row + 1] = s2 * d0 + c2 * d1 - shift;
        (xa[row], xa[row + 1]) = f.apply(xa[row], xa[row + 1]);
        (yb[row], yb[row + 1]) = f.apply(yb[row], yb[row + 1]);
        let old = rb.step(f, row);
        ra[row + 1] = e / old.conj();
    }
    let body = Rank1QS::new(d, xa, yb)?;
    let r = Rank1QS::new(vec![0.0; n], ra, rb.b)?;
    Ok((body, r))
}

/// [`conjugate_gv`] followed by deletion of the first row and column.
pub fn conjugate_and_truncate(m: &GVMatrix, p: &RotationSequence1) -> Result<(GVMatrix, Rank1QS)> {
    let (full, r, _) = conjugate_gv(m, p)?;
    Ok((truncate_gv(&full), r.truncate_head()))
}

/// [`conjugate_dab`] followed by deletion of the first row and column.
pub fn dab_conjugate_and_truncate(s: &Rank1QS, p: &RotationSequence1) -> Result<(Rank1QS, Rank1QS)> {
    let (body, r) = conjugate_dab(s, p)?;
    Ok((body.truncate_head(), r.truncate_head()))
}

/// Trailing `(n-1)`×`(n-1)` block of a GV matrix.
pub fn truncate_gv(m: &GVMatrix) -> GVMatrix {
    let k = m.k();
    GVMatrix {
        g: m.g.truncate_head(),
        w: m.w[k.min(m.w.len())..].to_vec(),
        d: m.d[1..].to_vec(),
    }
}
