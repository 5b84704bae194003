//! Per-thread operation counter used to measure complexity deterministically.
//!
//! Every rotation applied to a pair of scalars counts one unit, a turnover
//! counts one unit, and the characteristic polynomial evaluator counts one
//! unit per length-k inner product.

use std::cell::Cell;

thread_local! {
    static OPS: Cell<u64> = const { Cell::new(0) };
}

#[inline]
pub fn add(n: u64) {
    OPS.with(|c| c.set(c.get() + n));
}

pub fn reset() {
    OPS.with(|c| c.set(0));
}

pub fn get() -> u64 {
    OPS.with(|c| c.get())
}

/// Runs `f` and returns its result together with the operations it performed.
pub fn measure<T>(f: impl FnOnce() -> T) -> (T, u64) {
    let before = get();
    let out = f();
    (out, get() - before)
}
