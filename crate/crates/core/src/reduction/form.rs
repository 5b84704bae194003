use crate::matrix::{DenseMatrix, C64};
use crate::rotations::Rotation;

/// Upper Hessenberg `H = Q·(D + U·V*)·Q*` in `O(nk)` storage.
///
/// `H` is recovered from its diagonal, its subdiagonal and the transformed
/// factors `U_f = Q·U`, `V_f = Q·V`: since `Q·D·Q*` is Hermitian, every entry
/// above the diagonal is fixed by the entry below it.
#[derive(Clone, Debug, PartialEq)]
pub struct HessenbergForm {
    pub d: Vec<C64>,
    pub s: Vec<C64>,
    pub u_f: DenseMatrix,
    pub v_f: DenseMatrix,
    /// Rotations in application order, with the absolute row they act on.
    pub rotations: Option<Vec<(usize, Rotation)>>,
}

impl HessenbergForm {
    pub fn n(&self) -> usize {
        self.d.len()
    }

    pub fn k(&self) -> usize {
        self.u_f.cols()
    }

    /// `(U_f·V_f* − V_f·U_f*)[i, j]` in `O(k)`.
    pub fn skew_entry(&self, i: usize, j: usize) -> C64 {
        let (ui, vi) = (self.u_f.row(i), self.v_f.row(i));
        let (uj, vj) = (self.u_f.row(j), self.v_f.row(j));
        let mut acc = C64::new(0.0, 0.0);
        for t in 0..self.k() {
            acc += ui[t] * vj[t].conj() - vi[t] * uj[t].conj();
        }
        acc
    }

    /// `H[i, j]` for `j >= i` in `O(k)`.
    pub fn upper_entry(&self, i: usize, j: usize) -> C64 {
        debug_assert!(j >= i);
        if i == j {
            self.d[i]
        } else if j == i + 1 {
            self.s[i].conj() + self.skew_entry(i, j)
        } else {
            self.skew_entry(i, j)
        }
    }

    /// Principal block `lo..hi`, without the rotation log.
    pub fn block(&self, lo: usize, hi: usize) -> HessenbergForm {
        HessenbergForm {
            d: self.d[lo..hi].to_vec(),
            s: self.s[lo..hi.saturating_sub(1).max(lo)].to_vec(),
            u_f: self.u_f.block(lo, hi, 0, self.k()),
            v_f: self.v_f.block(lo, hi, 0, self.k()),
            rotations: None,
        }
    }

    /// The unitary `Q` rebuilt from the rotation log.
    pub fn q_from_log(&self) -> Option<DenseMatrix> {
        let log = self.rotations.as_ref()?;
        let mut q = DenseMatrix::identity(self.n());
        for &(row, g) in log {
            let (a, b) = q.row_pair_mut(row, row + 1);
            g.apply_slices(a, b);
        }
        Some(q)
    }
}

/// Dense `H`: zero below the subdiagonal, `d` and `s` on the diagonal and
/// subdiagonal, and `(U_f·V_f* − V_f·U_f*)[i, j]` above, plus `conj(s_i)` on
/// the superdiagonal.
pub fn hessenberg_to_dense(hf: &HessenbergForm) -> DenseMatrix {
    let n = hf.n();
    let mut h = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            h[(i, j)] = hf.upper_entry(i, j);
        }
        if i + 1 < n {
            h[(i + 1, i)] = hf.s[i];
        }
    }
    h
}
