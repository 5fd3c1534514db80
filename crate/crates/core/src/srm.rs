//! Structurally random measurement operator: subsampled, permuted fast
//! Walsh-Hadamard transform.
//!
//! The operator is `subsample . orthonormal_WHT . permute`. With the
//! orthonormal scaling (1/sqrt(n)) the forward and adjoint maps are exact
//! transposes of each other; the +-1 physical-mask reading of the rows
//! differs from this only by a global sqrt(n) factor, which downstream
//! regularization absorbs.

use crate::error::{Error, Result};
use crate::opcount;
use crate::rng::Xoshiro256;

/// Unnormalized in-place fast Walsh-Hadamard transform (natural order).
///
/// Additions and subtractions only; applying it twice multiplies the
/// input by its length.
pub fn fwht(data: &mut [f64]) -> Result<()> {
    let n = data.len();
    if n == 0 || !n.is_power_of_two() {
        return Err(Error::NonPowerOfTwo(n));
    }
    fwht_unchecked(data);
    Ok(())
}

#[inline]
fn fwht_unchecked(data: &mut [f64]) {
    let n = data.len();
    let mut h = 1;
    while h < n {
        for block in data.chunks_exact_mut(2 * h) {
            let (a, b) = block.split_at_mut(h);
            for (x, y) in a.iter_mut().zip(b.iter_mut()) {
                let u = *x;
                let v = *y;
                *x = u + v;
                *y = u - v;
            }
        }
        h *= 2;
    }
    opcount::add((n as u64) * n.trailing_zeros() as u64);
}

/// Configuration of one structurally random measurement ensemble.
///
/// Fully determined by `(n, m, seed)`; the permutation and the selected
/// rows are derived from the seed with the generator in [`crate::rng`],
/// so a manifest carrying those three numbers replays measurements
/// bit-exactly on any platform.
#[derive(Clone, Debug, PartialEq)]
pub struct SrmConfig {
    n: usize,
    m: usize,
    seed: u64,
    permutation: Vec<u32>,
    row_select: Vec<u32>,
}

impl SrmConfig {
    pub fn new(n: usize, m: usize, seed: u64) -> Result<Self> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::NonPowerOfTwo(n));
        }
        if n > u32::MAX as usize {
            return Err(Error::BadMeasurementCount { m, n });
        }
        if m == 0 || m > n {
            return Err(Error::BadMeasurementCount { m, n });
        }
        let mut rng = Xoshiro256::seed_from(seed);
        let mut permutation: Vec<u32> = (0..n as u32).collect();
        rng.shuffle(&mut permutation);
        // Distinct rows: shuffle the index range and keep a sorted prefix.
        // Row 0 (the all-ones transform row) stays eligible like any other.
        let mut rows: Vec<u32> = (0..n as u32).collect();
        rng.shuffle(&mut rows);
        let mut row_select = rows[..m].to_vec();
        row_select.sort_unstable();
        Ok(SrmConfig {
            n,
            m,
            seed,
            permutation,
            row_select,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn permutation(&self) -> &[u32] {
        &self.permutation
    }

    pub fn row_select(&self) -> &[u32] {
        &self.row_select
    }

    /// y = select_rows(WHT(permute(c))) / sqrt(n).
    pub fn forward(&self, c: &[f64]) -> Result<Vec<f64>> {
        if c.len() != self.n {
            return Err(Error::DimensionMismatch {
                stage: "srm forward",
                expected: self.n,
                got: c.len(),
            });
        }
        let mut work: Vec<f64> = self.permutation.iter().map(|&i| c[i as usize]).collect();
        fwht_unchecked(&mut work);
        let scale = 1.0 / (self.n as f64).sqrt();
        Ok(self
            .row_select
            .iter()
            .map(|&r| work[r as usize] * scale)
            .collect())
    }

    /// Exact transpose of [`Self::forward`]: zero-expand onto the selected rows,
    /// inverse transform, undo the permutation.
    pub fn adjoint(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.m {
            return Err(Error::DimensionMismatch {
                stage: "srm adjoint",
                expected: self.m,
                got: y.len(),
            });
        }
        let mut work = vec![0.0; self.n];
        let scale = 1.0 / (self.n as f64).sqrt();
        for (&r, &v) in self.row_select.iter().zip(y) {
            work[r as usize] = v * scale;
        }
        // The orthonormal WHT is symmetric, so the transpose is the same
        // butterfly with the same scaling.
        fwht_unchecked(&mut work);
        let mut out = vec![0.0; self.n];
        for (i, &p) in self.permutation.iter().enumerate() {
            out[p as usize] = work[i];
        }
        Ok(out)
    }
}
