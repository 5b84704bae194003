//! Givens rotations, 1- and k-sequences, slicing, turnover and pass-through.
//!
//! Rows are 0-based throughout: a rotation "at row r" acts on rows `(r, r+1)`.

mod rotation;
mod sequence;

pub use rotation::{
    apply_cols, apply_rows, apply_vec, make_rotation, product3, rotation_dense, turnover, turnover_inverse,
    Rotation, TRIVIAL_TOL,
};
pub use sequence::{RotationSequence1, RotationSequenceK};
