use crate::counter;
use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, C64, ONE, ZERO};

/// Below this sine modulus a rotation counts as trivial.
pub const TRIVIAL_TOL: f64 = 1e-14;

/// A 2×2 unitary `[[c, s], [-conj(s), conj(c)]]` acting on two consecutive rows.
///
/// Rotations built by [`make_rotation`] have a real nonnegative cosine.
/// Rotations coming out of a turnover may carry a complex cosine: the set of
/// real-cosine rotations is not closed under refactoring a 3×3 product, while
/// the determinant-one form above is.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation {
    pub c: C64,
    pub s: C64,
}

impl Default for Rotation {
    fn default() -> Self {
        Self::IDENTITY
    }
}

impl Rotation {
    pub const IDENTITY: Rotation = Rotation { c: ONE, s: ZERO };

    /// Builds a rotation and rescales `(c, s)` onto the unit sphere.
    pub fn new(c: C64, s: C64) -> Self {
        Rotation { c, s }.renormalized()
    }

    pub fn from_real(c: f64, s: C64) -> Self {
        Self::new(C64::new(c, 0.0), s)
    }

    pub fn renormalized(self) -> Self {
        let r = self.c.norm().hypot(self.s.norm());
        if r == 0.0 || !r.is_finite() {
            return Self::IDENTITY;
        }
        Rotation { c: self.c / r, s: self.s / r }
    }

    pub fn adjoint(self) -> Self {
        Rotation { c: self.c.conj(), s: -self.s }
    }

    pub fn is_trivial(self) -> bool {
        self.s.norm() <= TRIVIAL_TOL
    }

    pub fn is_identity(self) -> bool {
        self.s == ZERO && self.c == ONE
    }

    pub fn unitarity_defect(self) -> f64 {
        (self.c.norm_sqr() + self.s.norm_sqr() - 1.0).abs()
    }

    pub fn matrix(self) -> [[C64; 2]; 2] {
        [[self.c, self.s], [-self.s.conj(), self.c.conj()]]
    }

    /// The product `self · other` of two rotations on the same rows.
    pub fn compose(self, other: Rotation) -> Rotation {
        Rotation::new(
            self.c * other.c - self.s * other.s.conj(),
            self.c * other.s + self.s * other.c.conj(),
        )
    }

    /// Returns `G·(x, y)`.
    #[inline]
    pub fn apply(self, x: C64, y: C64) -> (C64, C64) {
        counter::add(1);
        (self.c * x + self.s * y, self.c.conj() * y - self.s.conj() * x)
    }

    #[inline]
    pub fn apply_pair(self, x: &mut C64, y: &mut C64) {
        let (a, b) = self.apply(*x, *y);
        *x = a;
        *y = b;
    }

    /// Applies the rotation to two equally long slices, entrywise.
    pub fn apply_slices(self, x: &mut [C64], y: &mut [C64]) {
        counter::add(x.len() as u64);
        let (c, s) = (self.c, self.s);
        let (cc, sc) = (c.conj(), s.conj());
        for (a, b) in x.iter_mut().zip(y.iter_mut()) {
            let (u, v) = (*a, *b);
            *a = c * u + s * v;
            *b = cc * v - sc * u;
        }
    }
}

/// Computes `G` and `alpha` with `G·(v1, v2) = (alpha, 0)`, `|alpha| = ‖(v1, v2)‖`.
///
/// The cosine is real and nonnegative; a zero input gives the identity and
/// `alpha = 0`.
pub fn make_rotation(v1: C64, v2: C64) -> (Rotation, C64) {
    let a1 = v1.norm();
    let a2 = v2.norm();
    let r = a1.hypot(a2);
    if r == 0.0 {
        return (Rotation::IDENTITY, ZERO);
    }
    if a1 == 0.0 {
        return (Rotation { c: ZERO, s: v2.conj() / a2 }, C64::new(a2, 0.0));
    }
    let phase = v1 / a1;
    let rot = Rotation { c: C64::new(a1 / r, 0.0), s: phase * v2.conj() / r };
    (rot, phase * r)
}

fn check_pair(index: usize, len: usize, what: &str) -> Result<()> {
    if index + 1 >= len {
        return Err(Error::Index(format!("rotation at {what} {index} needs {} {what}s, have {len}", index + 2)));
    }
    Ok(())
}

/// Left-multiplies rows `row, row+1` of `m` by `G` (or `G*`).
pub fn apply_rows(g: Rotation, adjoint: bool, row: usize, m: &mut DenseMatrix) -> Result<()> {
    check_pair(row, m.rows(), "row")?;
    let g = if adjoint { g.adjoint() } else { g };
    let (x, y) = m.row_pair_mut(row, row + 1);
    g.apply_slices(x, y);
    Ok(())
}

/// Right-multiplies columns `col, col+1` of `m` by `G` (or `G*`).
pub fn apply_cols(g: Rotation, adjoint: bool, col: usize, m: &mut DenseMatrix) -> Result<()> {
    check_pair(col, m.cols(), "column")?;
    // Columns of M·G are rows of G^T·M^T; with G = [[c, s], [-s̄, c̄]]:
    // new x = c·x - s̄·y, new y = s·x + c̄·y.
    let g = if adjoint { g.adjoint() } else { g };
    let t = Rotation { c: g.c, s: -g.s.conj() };
    for i in 0..m.rows() {
        let (mut x, mut y) = (m[(i, col)], m[(i, col + 1)]);
        t.apply_pair(&mut x, &mut y);
        m[(i, col)] = x;
        m[(i, col + 1)] = y;
    }
    Ok(())
}

pub fn apply_vec(g: Rotation, adjoint: bool, row: usize, v: &mut [C64]) -> Result<()> {
    check_pair(row, v.len(), "row")?;
    let g = if adjoint { g.adjoint() } else { g };
    let (head, tail) = v.split_at_mut(row + 1);
    g.apply_pair(&mut head[row], &mut tail[0]);
    Ok(())
}

/// Dense `n`×`n` embedding of `g` acting on rows `row, row+1`.
pub fn rotation_dense(g: Rotation, row: usize, n: usize) -> DenseMatrix {
    let mut m = DenseMatrix::identity(n);
    let g2 = g.matrix();
    for a in 0..2 {
        for b in 0..2 {
            m[(row + a, row + b)] = g2[a][b];
        }
    }
    m
}

type M3 = [[C64; 3]; 3];

fn embed3(g: Rotation, top: usize) -> M3 {
    let mut m = [[ZERO; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = ONE;
    }
    let g2 = g.matrix();
    for a in 0..2 {
        for b in 0..2 {
            m[top + a][top + b] = g2[a][b];
        }
    }
    m
}

fn mul3(a: &M3, b: &M3) -> M3 {
    let mut out = [[ZERO; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|p| a[i][p] * b[p][j]).sum();
        }
    }
    out
}

fn left3(g: Rotation, top: usize, m: &mut M3) {
    for j in 0..3 {
        let (x, y) = g.apply(m[top][j], m[top + 1][j]);
        m[top][j] = x;
        m[top + 1][j] = y;
    }
}

/// 3×3 dense product of rotations given as `(rotation, top row)` pairs, left to right.
pub fn product3(factors: &[(Rotation, usize)]) -> [[C64; 3]; 3] {
    factors.iter().fold(embed3(Rotation::IDENTITY, 0), |acc, &(g, t)| mul3(&acc, &embed3(g, t)))
}

/// Refactors `Ga(0,1)·Gb(1,2)·F(0,1)` into `F'(1,2)·Ga'(0,1)·Gb'(1,2)`.
///
/// Returns `(F', Ga', Gb')`. `F'` has a real nonnegative cosine.
pub fn turnover(ga: Rotation, gb: Rotation, f: Rotation) -> (Rotation, Rotation, Rotation) {
    counter::add(1);
    let mut v = product3(&[(ga, 0), (gb, 1), (f, 0)]);
    let (xa, _) = make_rotation(v[1][0], v[2][0]);
    left3(xa, 1, &mut v);
    let (c, s) = (v[0][0].conj(), v[1][0].conj());
    let ya = Rotation::new(c, s);
    left3(ya, 0, &mut v);
    let z = Rotation::new(v[1][1], v[1][2]);
    (xa.adjoint(), ya.adjoint(), z)
}

/// Refactors `X(1,2)·Y(0,1)·Z(1,2)` into `P(0,1)·Q(1,2)·R(0,1)`.
///
/// Returns `(P, Q, R)`. `P` has a real nonnegative cosine.
pub fn turnover_inverse(x: Rotation, y: Rotation, z: Rotation) -> (Rotation, Rotation, Rotation) {
    counter::add(1);
    let mut v = product3(&[(x, 1), (y, 0), (z, 1)]);
    let (g, _) = make_rotation(v[1][2], v[0][2]);
    let pa = Rotation { c: g.c, s: -g.s.conj() };
    left3(pa, 0, &mut v);
    let qa = Rotation::new(v[2][2], -v[1][2]);
    left3(qa, 1, &mut v);
    let r = Rotation::new(v[0][0], v[0][1]);
    (pa.adjoint(), qa.adjoint(), r)
}
