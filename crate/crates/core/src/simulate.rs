//! Single-pixel acquisition simulation and the continuous-domain
//! quadrature oracle.
//!
//! A scene is either a pixel image, whose entries are read as box-kernel
//! integrals of the underlying light field (one value per mirror cell),
//! or a synthetic spline field given by its expansion coefficients. Both
//! reduce to a grid of box samples; a measurement is the structurally
//! random combination of those samples.
//!
//! The oracle integrates the continuous field against the measurement
//! masks by 2D midpoint quadrature, without going through the discrete
//! cross-correlation taps. Agreement between the two routes is the
//! exactness property the whole pipeline rests on, and is enforced by
//! the acceptance suite.

use crate::error::{Error, Result};
use crate::grid::CoeffGrid;
use crate::rng::{derive_seed, Xoshiro256};
use crate::spline::{bspline_eval, crosscorr_support, render_box_samples, SplineOrder};
use crate::srm::SrmConfig;

/// Stream label for the acquisition noise generator, so noise draws are
/// decoupled from the mask randomness while still being replayable from
/// the manifest seed alone.
const NOISE_STREAM: u64 = 0x4E01;

#[derive(Clone, Debug)]
pub enum Scene {
    /// K x L grid of box-integral samples, the usual reading of a
    /// grayscale image in a single-pixel setup.
    PixelImage(CoeffGrid),
    /// Continuous field in the order-p spline space, given by its
    /// expansion coefficients on the (K + support - 1) x (L + support - 1)
    /// grid.
    SplineSynthetic { a0: CoeffGrid, order: SplineOrder },
}

impl Scene {
    /// Mirror-cell grid dimensions.
    pub fn mask_dims(&self) -> (usize, usize) {
        match self {
            Scene::PixelImage(g) => (g.rows(), g.cols()),
            Scene::SplineSynthetic { a0, order } => {
                let omega = crosscorr_support(*order);
                (a0.rows() + 1 - omega, a0.cols() + 1 - omega)
            }
        }
    }

    pub fn order(&self) -> SplineOrder {
        match self {
            Scene::PixelImage(_) => SplineOrder::new(0).unwrap(),
            Scene::SplineSynthetic { order, .. } => *order,
        }
    }

    /// Box samples `c[k,l]` of the scene.
    pub fn box_samples(&self) -> Result<CoeffGrid> {
        match self {
            Scene::PixelImage(g) => Ok(g.clone()),
            Scene::SplineSynthetic { a0, order } => render_box_samples(a0, *order),
        }
    }
}

/// Additive white Gaussian readout noise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    pub sigma: f64,
}

/// Everything needed to replay an acquisition bit-exactly (noiselessly:
/// the measurement ensemble; with noise: the noise stream is derived from
/// the same seed).
#[derive(Clone, Debug, PartialEq)]
pub struct Manifest {
    pub seed: u64,
    pub n: usize,
    pub m: usize,
    pub mask_rows: usize,
    pub mask_cols: usize,
    /// Spline order of the acquired scene (0 for pixel images).
    pub order: u32,
    pub noise_sigma: f64,
}

impl Manifest {
    pub fn srm(&self) -> Result<SrmConfig> {
        SrmConfig::new(self.n, self.m, self.seed)
    }
}

#[derive(Clone, Debug)]
pub struct MeasurementSet {
    pub y: Vec<f64>,
    pub manifest: Manifest,
}

/// Simulates the single-pixel acquisition of a scene.
pub fn acquire(
    scene: &Scene,
    srm: &SrmConfig,
    noise: Option<NoiseModel>,
) -> Result<MeasurementSet> {
    let (k, l) = scene.mask_dims();
    if srm.n() != k * l {
        return Err(Error::DimensionMismatch {
            stage: "acquire: srm length vs scene",
            expected: k * l,
            got: srm.n(),
        });
    }
    let c = scene.box_samples()?;
    let mut y = srm.forward(c.data())?;
    let sigma = noise.map(|n| n.sigma).unwrap_or(0.0);
    if sigma > 0.0 {
        let mut rng = Xoshiro256::seed_from(derive_seed(srm.seed(), NOISE_STREAM));
        for v in &mut y {
            *v += sigma * rng.next_gaussian();
        }
    }
    Ok(MeasurementSet {
        y,
        manifest: Manifest {
            seed: srm.seed(),
            n: srm.n(),
            m: srm.m(),
            mask_rows: k,
            mask_cols: l,
            order: scene.order().get(),
            noise_sigma: sigma,
        },
    })
}

/// Integrals of the continuous spline field over every mirror cell,
/// computed by 2D midpoint quadrature with `steps` nodes per cell per
/// axis (the double sum factorizes over the separable basis, which is
/// exploited for speed but does not change the quadrature values).
///
/// The mask grid is `a0` shrunk by the tap support minus one per axis,
/// mirroring the valid-convolution geometry. Small grids only; this is
/// the oracle side of the exact-discretization check, not a fast path.
pub fn quadrature_box_integrals(
    a0: &CoeffGrid,
    order: SplineOrder,
    steps: usize,
) -> Result<CoeffGrid> {
    let omega = crosscorr_support(order);
    if a0.rows() < omega || a0.cols() < omega {
        return Err(Error::GridTooSmall {
            stage: "quadrature oracle",
            rows: a0.rows(),
            cols: a0.cols(),
            min: omega,
        });
    }
    let mask_rows = a0.rows() + 1 - omega;
    let mask_cols = a0.cols() + 1 - omega;
    let wr = quadrature_weights(mask_rows, a0.rows(), order, steps);
    let wc = quadrature_weights(mask_cols, a0.cols(), order, steps);

    // out = Wr . a0 . Wc^T
    let mut tmp = CoeffGrid::zeros(a0.rows(), mask_cols);
    for r in 0..a0.rows() {
        for l in 0..mask_cols {
            let mut acc = 0.0;
            for n in 0..a0.cols() {
                acc += a0[(r, n)] * wc[(l, n)];
            }
            tmp[(r, l)] = acc;
        }
    }
    let mut out = CoeffGrid::zeros(mask_rows, mask_cols);
    for k in 0..mask_rows {
        for l in 0..mask_cols {
            let mut acc = 0.0;
            for m in 0..a0.rows() {
                acc += wr[(k, m)] * tmp[(m, l)];
            }
            out[(k, l)] = acc;
        }
    }
    Ok(out)
}

/// W[k][m] = midpoint-rule integral of the basis function centered at
/// coefficient index m over mirror cell k. Cell k spans
/// [k - 1/2, k + 1/2]; coefficient m sits at position m - (support-1)/2.
fn quadrature_weights(cells: usize, coeffs: usize, order: SplineOrder, steps: usize) -> CoeffGrid {
    let h = (crosscorr_support(order) - 1) as f64 / 2.0;
    let inv = 1.0 / steps as f64;
    CoeffGrid::from_fn(cells, coeffs, |k, m| {
        let center = m as f64 - h;
        let left = k as f64 - 0.5;
        let mut acc = 0.0;
        for i in 0..steps {
            let u = left + (i as f64 + 0.5) * inv;
            acc += bspline_eval(order, u - center);
        }
        acc * inv
    })
}

/// Quadrature of one measurement: integral of the continuous field against
/// a single mask (expansion coefficients of the mask on the mirror grid).
pub fn quadrature_measurement_oracle(
    a0: &CoeffGrid,
    order: SplineOrder,
    mask: &CoeffGrid,
) -> Result<f64> {
    let cells = quadrature_box_integrals(a0, order, 1024)?;
    if mask.rows() != cells.rows() || mask.cols() != cells.cols() {
        return Err(Error::DimensionMismatch {
            stage: "quadrature oracle: mask grid",
            expected: cells.len(),
            got: mask.len(),
        });
    }
    Ok(mask
        .data()
        .iter()
        .zip(cells.data())
        .map(|(s, c)| s * c)
        .sum())
}
