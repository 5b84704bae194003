use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, C64};

use super::rotation::{make_rotation, turnover, turnover_inverse, Rotation};

/// One rotation per row index `1..=n-2` (0-based), acting on rows `(r, r+1)`.
///
/// As a matrix the sequence is `G_1·G_2···G_{n-2}`: the rotation with the
/// largest row index reaches the operand first. Row 0 is never touched.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationSequence1 {
    n: usize,
    rots: Vec<Rotation>,
}

impl RotationSequence1 {
    pub fn identity(n: usize) -> Self {
        Self { n, rots: vec![Rotation::IDENTITY; n.saturating_sub(2)] }
    }

    /// `rots[t]` acts on rows `(t+1, t+2)`.
    pub fn from_rotations(n: usize, rots: Vec<Rotation>) -> Result<Self> {
        if rots.len() != n.saturating_sub(2) {
            return Err(Error::Dimension(format!("{} rotations for a 1-sequence of size {n}", rots.len())));
        }
        Ok(Self { n, rots })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Rotation acting on rows `(row, row+1)`, `1 <= row <= n-2`.
    pub fn get(&self, row: usize) -> Rotation {
        self.rots[row - 1]
    }

    pub fn set(&mut self, row: usize, g: Rotation) {
        self.rots[row - 1] = g;
    }

    pub fn rotations(&self) -> &[Rotation] {
        &self.rots
    }

    /// `(row, rotation)` pairs in application order (bottom row first).
    pub fn application_order(&self) -> impl Iterator<Item = (usize, Rotation)> + '_ {
        self.rots.iter().enumerate().rev().map(|(t, &g)| (t + 1, g))
    }

    pub fn apply_vec(&self, adjoint: bool, v: &mut [C64]) -> Result<()> {
        self.check_len(v.len())?;
        if adjoint {
            for (t, g) in self.rots.iter().enumerate() {
                let (a, b) = v.split_at_mut(t + 2);
                g.adjoint().apply_pair(&mut a[t + 1], &mut b[0]);
            }
        } else {
            for (row, g) in self.application_order() {
                let (a, b) = v.split_at_mut(row + 1);
                g.apply_pair(&mut a[row], &mut b[0]);
            }
        }
        Ok(())
    }

    /// Applies the sequence to the rows of `m`.
    pub fn apply_rows(&self, adjoint: bool, m: &mut DenseMatrix) -> Result<()> {
        self.check_len(m.rows())?;
        let order: Vec<(usize, Rotation)> = if adjoint {
            self.rots.iter().enumerate().map(|(t, g)| (t + 1, g.adjoint())).collect()
        } else {
            self.application_order().collect()
        };
        for (row, g) in order {
            let (x, y) = m.row_pair_mut(row, row + 1);
            g.apply_slices(x, y);
        }
        Ok(())
    }

    pub fn dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::identity(self.n);
        self.apply_rows(false, &mut m).expect("sizes agree");
        m
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::Dimension(format!("1-sequence of size {} applied to length {len}", self.n)));
        }
        Ok(())
    }
}

/// A k-sequence: rotations `(r, l)` acting on rows `(r, r+1)` for layers
/// `l = 1..=k` and rows `l <= r <= n-2` (0-based rows).
///
/// The matrix is `L_1·L_2···L_k` where each layer `L_l` applies its rotations
/// in ascending row order, so `dense()^*` is lower banded with bandwidth `k`.
/// Rotations are stored by diagonal `q = r - l`: the rotations with diagonal
/// `q` are exactly those acting below column `q` of a GV matrix, and applying
/// diagonals in ascending order (each from its deepest layer up) reproduces
/// the same product.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationSequenceK {
    n: usize,
    k: usize,
    rots: Vec<Rotation>,
}

impl RotationSequenceK {
    pub fn identity(n: usize, k: usize) -> Self {
        Self { n, k, rots: vec![Rotation::IDENTITY; Self::diagonals_for(n) * k] }
    }

    fn diagonals_for(n: usize) -> usize {
        n.saturating_sub(2)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of diagonals `q = 0..n-2`.
    pub fn diagonals(&self) -> usize {
        Self::diagonals_for(self.n)
    }

    pub fn contains(&self, row: usize, layer: usize) -> bool {
        layer >= 1 && layer <= self.k && row >= layer && row + 2 <= self.n
    }

    #[inline]
    fn slot(&self, row: usize, layer: usize) -> usize {
        (row - layer) * self.k + (layer - 1)
    }

    pub fn get(&self, row: usize, layer: usize) -> Rotation {
        assert!(self.contains(row, layer), "rotation ({row}, {layer}) outside the index set");
        self.rots[self.slot(row, layer)]
    }

    pub fn set(&mut self, row: usize, layer: usize, g: Rotation) {
        assert!(self.contains(row, layer), "rotation ({row}, {layer}) outside the index set");
        let s = self.slot(row, layer);
        self.rots[s] = g;
    }

    /// All valid `(row, layer)` positions in application order.
    pub fn positions(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for l in (1..=self.k).rev() {
            for r in l..self.n.saturating_sub(1) {
                out.push((r, l));
            }
        }
        out
    }

    /// Rotations of diagonal `q` in application order: `(row, layer, rotation)`.
    fn diagonal(&self, q: usize) -> impl Iterator<Item = (usize, usize, Rotation)> + '_ {
        (1..=self.k).rev().filter_map(move |l| {
            let r = q + l;
            (r + 2 <= self.n).then(|| (r, l, self.rots[q * self.k + l - 1]))
        })
    }

    fn diagonal_reversed(&self, q: usize) -> impl Iterator<Item = (usize, usize, Rotation)> + '_ {
        (1..=self.k).filter_map(move |l| {
            let r = q + l;
            (r + 2 <= self.n).then(|| (r, l, self.rots[q * self.k + l - 1]))
        })
    }

    /// Applies diagonals `q0..=q1` to `v`; the adjoint runs in reverse order.
    pub fn apply_diagonals_vec(&self, q0: usize, q1: usize, adjoint: bool, v: &mut [C64]) {
        let d = self.diagonals();
        if d == 0 || q0 > q1 || q0 >= d {
            return;
        }
        let q1 = q1.min(d - 1);
        if adjoint {
            for q in (q0..=q1).rev() {
                for (r, _, g) in self.diagonal_reversed(q) {
                    let (a, b) = v.split_at_mut(r + 1);
                    g.adjoint().apply_pair(&mut a[r], &mut b[0]);
                }
            }
        } else {
            for q in q0..=q1 {
                for (r, _, g) in self.diagonal(q) {
                    let (a, b) = v.split_at_mut(r + 1);
                    g.apply_pair(&mut a[r], &mut b[0]);
                }
            }
        }
    }

    /// Applies diagonal `q` to a window `v` whose entry `i` stands for row
    /// `offset + i`. All rotations of the diagonal must fall inside the window.
    pub fn apply_diagonal_window(&self, q: usize, adjoint: bool, v: &mut [C64], offset: usize) {
        if q >= self.diagonals() {
            return;
        }
        let mut apply = |r: usize, g: Rotation| {
            let i = r - offset;
            let (a, b) = v.split_at_mut(i + 1);
            g.apply_pair(&mut a[i], &mut b[0]);
        };
        if adjoint {
            for (r, _, g) in self.diagonal_reversed(q) {
                apply(r, g.adjoint());
            }
        } else {
            for (r, _, g) in self.diagonal(q) {
                apply(r, g);
            }
        }
    }

    pub fn apply_diagonals_rows(&self, q0: usize, q1: usize, adjoint: bool, m: &mut DenseMatrix) {
        let d = self.diagonals();
        if d == 0 || q0 > q1 || q0 >= d {
            return;
        }
        let q1 = q1.min(d - 1);
        let mut order = Vec::new();
        for q in q0..=q1 {
            order.extend(self.diagonal(q).map(|(r, _, g)| (r, g)));
        }
        if adjoint {
            order.reverse();
        }
        for (r, g) in order {
            let g = if adjoint { g.adjoint() } else { g };
            let (x, y) = m.row_pair_mut(r, r + 1);
            g.apply_slices(x, y);
        }
    }

    pub fn apply_vec(&self, adjoint: bool, v: &mut [C64]) -> Result<()> {
        self.check_len(v.len())?;
        self.apply_diagonals_vec(0, usize::MAX, adjoint, v);
        Ok(())
    }

    pub fn apply_rows(&self, adjoint: bool, m: &mut DenseMatrix) -> Result<()> {
        self.check_len(m.rows())?;
        self.apply_diagonals_rows(0, usize::MAX, adjoint, m);
        Ok(())
    }

    pub fn dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::identity(self.n);
        self.apply_rows(false, &mut m).expect("sizes agree");
        m
    }

    /// Copy keeping only the rotations with diagonal `q0 <= r - l <= q1`,
    /// i.e. those acting below GV columns `q0..=q1`; all others become identity.
    pub fn slice(&self, q0: usize, q1: usize) -> Result<Self> {
        if q0 > q1 || q1 >= self.diagonals() {
            return Err(Error::Index(format!(
                "slice {q0}..={q1} of a k-sequence with {} diagonals",
                self.diagonals()
            )));
        }
        let mut out = Self::identity(self.n, self.k);
        let k = self.k;
        out.rots[q0 * k..(q1 + 1) * k].copy_from_slice(&self.rots[q0 * k..(q1 + 1) * k]);
        Ok(out)
    }

    /// `(row, layer)` positions that belong to `slice(q0, q1)`.
    pub fn slice_positions(&self, q0: usize, q1: usize) -> Vec<(usize, usize)> {
        self.positions().into_iter().filter(|&(r, l)| r - l >= q0 && r - l <= q1).collect()
    }

    /// Drops diagonal 0 (the rotations acting below column 0) and shifts the
    /// remaining rotations up by one row: the sequence of the trailing
    /// `(n-1)`×`(n-1)` block.
    pub fn truncate_head(&self) -> Self {
        let n = self.n.saturating_sub(1);
        let skip = self.k.min(self.rots.len());
        let mut rots = self.rots[skip..].to_vec();
        rots.truncate(Self::diagonals_for(n) * self.k);
        Self { n, k: self.k, rots }
    }

    /// Passes `F` (rows `(p, p+1)`) from the right through the sequence:
    /// `G·F = F_out·G'`, with `F_out` acting on rows `(p-k, p-k+1)`.
    ///
    /// When `p == k`, `F` merges into the first rotation of layer `k` and
    /// `F_out` is `None`. Rows `p < k` cannot be passed without leaving the
    /// index set and are rejected.
    pub fn pass_through(&mut self, f: Rotation, p: usize) -> Result<Option<Rotation>> {
        if p + 2 > self.n {
            return Err(Error::Index(format!("rotation at row {p} in dimension {}", self.n)));
        }
        if p < self.k {
            return Err(Error::Index(format!(
                "rotation at row {p} cannot pass through {} layers",
                self.k
            )));
        }
        let mut f = f;
        let mut row = p;
        for l in (1..=self.k).rev() {
            // Layer l meets F at `row`: ...A(row)·B(row-1)·F(row).
            if row == l {
                let a = self.get(row, l);
                self.set(row, l, a.compose(f));
                return Ok(None);
            }
            let a = self.get(row, l);
            let b = self.get(row - 1, l);
            let (f_new, a_new, b_new) = turnover_inverse(a, b, f);
            self.set(row, l, a_new);
            self.set(row - 1, l, b_new);
            f = f_new;
            row -= 1;
        }
        Ok(Some(f))
    }

    /// Passes `F` (rows `(p, p+1)`) from the left through the sequence:
    /// `F·G = G'·F_out`, with `F_out` acting on rows `(p+k, p+k+1)`.
    ///
    /// Only diagonals `p-1` and `p` change. When `F` reaches the bottom of a
    /// layer it merges into that layer and `F_out` is `None`.
    pub fn pass_down(&mut self, f: Rotation, p: usize) -> Result<Option<Rotation>> {
        if p == 0 || p + 2 > self.n {
            return Err(Error::Index(format!("rotation at row {p} in dimension {}", self.n)));
        }
        let mut f = f;
        let mut row = p;
        for l in 1..=self.k {
            // F(row)·A(row+1)·B(row) with A, B in layer l.
            if !self.contains(row, l) {
                // Only possible when row < l, i.e. p == 0; excluded above.
                unreachable!("layer {l} has no rotation at row {row}");
            }
            let b = self.get(row, l);
            if !self.contains(row + 1, l) {
                self.set(row, l, f.compose(b));
                return Ok(None);
            }
            let a = self.get(row + 1, l);
            let (a_new, b_new, f_new) = turnover(f, a, b);
            self.set(row + 1, l, a_new);
            self.set(row, l, b_new);
            f = f_new;
            row += 1;
        }
        Ok(Some(f))
    }

    /// Givens QR of `u[1.., :]` in the k-sequence pattern: layer `l` folds
    /// column `l-1` below row `l` into row `l`. The result spans `u`.
    pub fn from_matrix(u: &DenseMatrix) -> Self {
        let n = u.rows();
        let k = u.cols();
        let mut seq = Self::identity(n, k);
        let mut x = u.clone();
        for l in 1..=k {
            for r in (l..n.saturating_sub(1)).rev() {
                let (g, _) = make_rotation(x[(r, l - 1)], x[(r + 1, l - 1)]);
                let (a, b) = x.row_pair_mut(r, r + 1);
                g.apply_slices(&mut a[l - 1..], &mut b[l - 1..]);
                seq.set(r, l, g.adjoint());
            }
        }
        seq
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n {
            return Err(Error::Dimension(format!("k-sequence of size {} applied to length {len}", self.n)));
        }
        Ok(())
    }
}
