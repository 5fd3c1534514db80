//! Dense row-major 2D grid of expansion coefficients / samples.

use crate::error::{Error, Result};

/// A rows x cols grid of real values, stored row-major.
///
/// Used for expansion coefficients, box samples, rendered images and
/// measurement masks alike.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffGrid {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl CoeffGrid {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CoeffGrid {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                stage: "grid",
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(CoeffGrid { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        CoeffGrid { rows, cols, data }
    }

    pub fn constant(rows: usize, cols: usize, value: f64) -> Self {
        CoeffGrid {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    /// All-zero grid with a single 1 at (r, c).
    pub fn delta(rows: usize, cols: usize, r: usize, c: usize) -> Self {
        let mut g = Self::zeros(rows, cols);
        g[(r, c)] = 1.0;
        g
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn transposed(&self) -> CoeffGrid {
        CoeffGrid::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    /// Center crop to (rows, cols).
    pub fn center_crop(&self, rows: usize, cols: usize) -> Result<CoeffGrid> {
        if rows > self.rows || cols > self.cols {
            return Err(Error::GridTooSmall {
                stage: "center_crop",
                rows: self.rows,
                cols: self.cols,
                min: rows.max(cols),
            });
        }
        let r0 = (self.rows - rows) / 2;
        let c0 = (self.cols - cols) / 2;
        Ok(CoeffGrid::from_fn(rows, cols, |r, c| {
            self[(r0 + r, c0 + c)]
        }))
    }

    /// Interior view with `margin` trimmed from every side.
    pub fn interior(&self, margin: usize) -> Result<CoeffGrid> {
        if 2 * margin >= self.rows || 2 * margin >= self.cols {
            return Err(Error::GridTooSmall {
                stage: "interior",
                rows: self.rows,
                cols: self.cols,
                min: 2 * margin + 1,
            });
        }
        Ok(CoeffGrid::from_fn(
            self.rows - 2 * margin,
            self.cols - 2 * margin,
            |r, c| self[(r + margin, c + margin)],
        ))
    }

    pub fn max_abs_diff(&self, other: &CoeffGrid) -> f64 {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl std::ops::Index<(usize, usize)> for CoeffGrid {
    type Output = f64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CoeffGrid {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indexing_is_row_major() {
        let g = CoeffGrid::from_fn(2, 3, |r, c| (r * 10 + c) as f64);
        assert_eq!(g.data(), &[0.0, 1.0, 2.0, 10.0, 11.0, 12.0]);
        assert_eq!(g[(1, 2)], 12.0);
        assert_eq!(g.row(1), &[10.0, 11.0, 12.0]);
    }

    #[test]
    fn crop_takes_the_center() {
        let g = CoeffGrid::from_fn(4, 4, |r, c| (r * 4 + c) as f64);
        let cropped = g.center_crop(2, 2).unwrap();
        assert_eq!(cropped.data(), &[5.0, 6.0, 9.0, 10.0]);
    }

    #[test]
    fn from_vec_checks_length() {
        assert!(CoeffGrid::from_vec(2, 2, vec![0.0; 3]).is_err());
    }
}
