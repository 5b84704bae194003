#![allow(dead_code)]

use qshess::matrix::{DenseMatrix, C64};
use qshess::rotations::{make_rotation, Rotation, RotationSequence1, RotationSequenceK};
pub use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn cnum(r: &mut impl Rng) -> C64 {
    C64::new(r.sample(StandardNormal), r.sample(StandardNormal))
}

pub fn cvec(r: &mut impl Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| cnum(r)).collect()
}

pub fn rvec(r: &mut impl Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.sample(StandardNormal)).collect()
}

pub fn cmat(r: &mut impl Rng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| cnum(r))
}

pub fn hermitian(r: &mut impl Rng, n: usize) -> DenseMatrix {
    let a = cmat(r, n, n);
    a.add(&a.adjoint()).scale(C64::new(0.5, 0.0))
}

/// Random rotation with a complex cosine.
pub fn rotation(r: &mut impl Rng) -> Rotation {
    Rotation::new(cnum(r), cnum(r))
}

/// Random rotation with a real nonnegative cosine.
pub fn real_rotation(r: &mut impl Rng) -> Rotation {
    make_rotation(cnum(r), cnum(r)).0
}

pub fn kseq(r: &mut impl Rng, n: usize, k: usize) -> RotationSequenceK {
    let mut g = RotationSequenceK::identity(n, k);
    for (row, l) in g.positions() {
        g.set(row, l, rotation(r));
    }
    g
}

pub fn seq1(r: &mut impl Rng, n: usize) -> RotationSequence1 {
    let rots = (0..n.saturating_sub(2)).map(|_| real_rotation(r)).collect();
    RotationSequence1::from_rotations(n, rots).unwrap()
}

pub fn max_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.sub(b).max_abs()
}

pub fn vec_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
