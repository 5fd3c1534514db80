//! The composite matrix-free sensing operator.
//!
//! Forward: wavelet synthesis -> valid separable convolution with the
//! cross-correlation taps -> row-major flatten -> structurally random
//! measurement. The adjoint runs the exact transposes in reverse; the
//! convolution switches from valid (no padded edges) to full
//! (zero-padded edges), which is precisely the transpose of the valid
//! form.

use crate::error::{Error, Result};
use crate::grid::CoeffGrid;
use crate::solver::LinearOperator;
use crate::spline::{crosscorr_seq, separable_full_conv, separable_valid_conv, SplineOrder};
use crate::srm::SrmConfig;
use crate::wavelet::{check_depth, dwt2, idwt2, idwt2_adjoint, FilterBank, WaveletVec};

/// Immutable composite operator mapping a wavelet coefficient vector of
/// length (K + support - 1)(L + support - 1) to M photodetector readings.
///
/// Shareable across threads; forward and adjoint calls are pure.
#[derive(Clone, Debug)]
pub struct SensingOp {
    srm: SrmConfig,
    order: SplineOrder,
    bank: FilterBank,
    levels: usize,
    mask_rows: usize,
    mask_cols: usize,
    taps: Vec<f64>,
}

impl SensingOp {
    pub fn new(
        mask_rows: usize,
        mask_cols: usize,
        srm: SrmConfig,
        order: SplineOrder,
        bank: FilterBank,
        levels: usize,
    ) -> Result<Self> {
        if srm.n() != mask_rows * mask_cols {
            return Err(Error::DimensionMismatch {
                stage: "sensing: srm length vs mask grid",
                expected: mask_rows * mask_cols,
                got: srm.n(),
            });
        }
        let taps = crosscorr_seq(order).taps().to_vec();
        let (cr, cc) = coeff_dims(mask_rows, mask_cols, order);
        check_depth(cr, cc, levels, &bank)?;
        Ok(SensingOp {
            srm,
            order,
            bank,
            levels,
            mask_rows,
            mask_cols,
            taps,
        })
    }

    pub fn mask_dims(&self) -> (usize, usize) {
        (self.mask_rows, self.mask_cols)
    }

    /// Expansion-coefficient grid dimensions (mask dims grown by the
    /// convolution support minus one).
    pub fn coeff_dims(&self) -> (usize, usize) {
        coeff_dims(self.mask_rows, self.mask_cols, self.order)
    }

    /// Length of the coefficient vector.
    pub fn n_coeffs(&self) -> usize {
        let (r, c) = self.coeff_dims();
        r * c
    }

    pub fn n_measurements(&self) -> usize {
        self.srm.m()
    }

    pub fn srm(&self) -> &SrmConfig {
        &self.srm
    }

    pub fn order(&self) -> SplineOrder {
        self.order
    }

    pub fn bank(&self) -> &FilterBank {
        &self.bank
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    /// y = measure(box_sample(synthesize(x))).
    pub fn theta_forward(&self, x: &WaveletVec) -> Result<Vec<f64>> {
        let (cr, cc) = self.coeff_dims();
        if x.rows() != cr || x.cols() != cc || x.levels() != self.levels {
            return Err(Error::DimensionMismatch {
                stage: "theta forward: coefficient vector",
                expected: cr * cc,
                got: x.len(),
            });
        }
        let a0 = idwt2(x, &self.bank)?;
        let c = separable_valid_conv(&a0, &self.taps)?;
        debug_assert_eq!(c.rows(), self.mask_rows);
        self.srm.forward(c.data())
    }

    /// Exact transpose of [`Self::theta_forward`].
    pub fn theta_adjoint(&self, y: &[f64]) -> Result<WaveletVec> {
        if y.len() != self.srm.m() {
            return Err(Error::DimensionMismatch {
                stage: "theta adjoint: measurement vector",
                expected: self.srm.m(),
                got: y.len(),
            });
        }
        let c = self.srm.adjoint(y)?;
        let grid = CoeffGrid::from_vec(self.mask_rows, self.mask_cols, c)?;
        let a0 = separable_full_conv(&grid, &self.taps);
        idwt2_adjoint(&a0, &self.bank, self.levels)
    }

    /// Analysis coefficients of a coefficient grid under this operator's
    /// bank and depth. Convenience for planting sparse ground truth and
    /// inspecting reconstructions.
    pub fn analyze(&self, a0: &CoeffGrid) -> Result<WaveletVec> {
        dwt2(a0, &self.bank, self.levels)
    }

    /// Wraps a flat slice in this operator's coefficient layout.
    pub fn wrap_coeffs(&self, data: Vec<f64>) -> Result<WaveletVec> {
        let (cr, cc) = self.coeff_dims();
        WaveletVec::from_parts(cr, cc, self.levels, data)
    }
}

pub fn coeff_dims(mask_rows: usize, mask_cols: usize, order: SplineOrder) -> (usize, usize) {
    let omega = crate::spline::crosscorr_support(order);
    (mask_rows + omega - 1, mask_cols + omega - 1)
}

impl LinearOperator for SensingOp {
    fn rows(&self) -> usize {
        self.srm.m()
    }

    fn cols(&self) -> usize {
        self.n_coeffs()
    }

    fn forward(&self, x: &[f64]) -> Vec<f64> {
        self.wrap_coeffs(x.to_vec())
            .and_then(|xv| self.theta_forward(&xv))
            .expect("operator applied to vector of its own input length")
    }

    fn adjoint(&self, y: &[f64]) -> Vec<f64> {
        self.theta_adjoint(y)
            .expect("operator applied to vector of its own output length")
            .into_vec()
    }
}
