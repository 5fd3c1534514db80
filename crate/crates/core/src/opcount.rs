//! Debug-build multiply-add counters.
//!
//! The matrix-free operators advertise near-linear cost; these counters
//! make that claim checkable in tests. In release builds everything
//! compiles to nothing.

#[cfg(debug_assertions)]
mod imp {
    use std::sync::atomic::{AtomicU64, Ordering};

    static MACS: AtomicU64 = AtomicU64::new(0);

    #[inline]
    pub fn add(n: u64) {
        MACS.fetch_add(n, Ordering::Relaxed);
    }

    /// Returns the running count and resets it.
    pub fn take() -> u64 {
        MACS.swap(0, Ordering::Relaxed)
    }
}

#[cfg(not(debug_assertions))]
mod imp {
    #[inline(always)]
    pub fn add(_n: u64) {}

    pub fn take() -> u64 {
        0
    }
}

pub use imp::{add, take};
