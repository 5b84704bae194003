//! Reduction of `D + U·V*` to upper Hessenberg form.

mod conjugate;
mod form;
mod state;

pub use conjugate::{
    conjugate_and_truncate, conjugate_dab, conjugate_gv, dab_conjugate_and_truncate, truncate_gv, SweepStats,
};
pub use form::{hessenberg_to_dense, HessenbergForm};
pub use state::{decoupled_blocks, hessenberg_reduce, ReduceOptions, ReductionState, ReductionStats, StepRecord};

use crate::matrix::{C64, ZERO};
use crate::rotations::{make_rotation, Rotation, RotationSequence1};

/// Rotations that bring `v` to `(v_0, alpha, 0, …, 0)`, computed from the
/// bottom up, together with `alpha`.
///
/// Rotations below the last nonzero entry of `v` are exact identities.
pub fn clean_column(v: &[C64]) -> (RotationSequence1, C64) {
    let m = v.len();
    if m < 3 {
        return (RotationSequence1::identity(m), v.get(1).copied().unwrap_or(ZERO));
    }
    let mut rots = vec![Rotation::IDENTITY; m - 2];
    let mut acc = v[m - 1];
    for r in (1..m - 1).rev() {
        if acc == ZERO {
            acc = v[r];
            continue;
        }
        let (g, alpha) = make_rotation(v[r], acc);
        rots[r - 1] = g;
        acc = alpha;
    }
    let seq = RotationSequence1::from_rotations(m, rots).expect("length m - 2");
    (seq, acc)
}
