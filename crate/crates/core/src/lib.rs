//! Matrix-free single-pixel compressive imaging in spline spaces.
//!
//! The crate models a single-pixel camera whose binary masks live on a
//! pixel grid, represents the underlying image in a shift-invariant
//! B-spline space, and reconstructs the spline expansion coefficients
//! from subsampled structurally random measurements by l1-regularized
//! least squares over a biorthogonal spline-wavelet representation.
//!
//! The pieces compose as `measurements = subsample . hadamard . permute .
//! box_sample . wavelet_synthesis (coefficients)`, and every factor is
//! applied matrix-free with an exactly paired adjoint.

// Negated float comparisons like `!(x > 0.0)` are validity guards that
// must also reject NaN; index loops mirror the stencil math.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod error;
pub mod grid;
pub mod metrics;
pub mod opcount;
pub mod rng;
pub mod sensing;
pub mod simulate;
pub mod solver;
pub mod spline;
pub mod srm;
pub mod wavelet;

pub mod io;

pub use error::{Error, Result};
pub use grid::CoeffGrid;
pub use sensing::SensingOp;
pub use solver::{LinearOperator, SolveReport, SolverConfig};
pub use spline::{bspline_eval, crosscorr_seq, CrossCorrSeq, SplineOrder};
pub use srm::SrmConfig;
pub use wavelet::{FilterBank, WaveletVec};
