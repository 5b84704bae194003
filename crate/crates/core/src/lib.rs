//! Hessenberg reduction of `A = D + U·V*` (real diagonal `D`, `n`×`k` factors)
//! in `O(n²k)` operations, using Givens-Vector representations of the
//! Hermitian quasiseparable part.

pub mod charpoly;
pub mod counter;
pub mod error;
pub mod gvcore;
pub mod io;
pub mod matrix;
pub mod oracle;
pub mod reduction;
pub mod rotations;

pub use error::{Error, Result};
pub use matrix::{DenseMatrix, C64};
