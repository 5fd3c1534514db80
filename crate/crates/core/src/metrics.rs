//! Image quality metrics: PSNR and mean SSIM.

use crate::error::{Error, Result};
use crate::grid::CoeffGrid;

/// Peak signal-to-noise ratio in dB: 10 log10(peak^2 / MSE).
///
/// Identical inputs return `f64::INFINITY` as the distinguished value.
pub fn psnr(reference: &CoeffGrid, test: &CoeffGrid, peak: f64) -> Result<f64> {
    if reference.rows() != test.rows() || reference.cols() != test.cols() {
        return Err(Error::DimensionMismatch {
            stage: "psnr",
            expected: reference.len(),
            got: test.len(),
        });
    }
    if !(peak > 0.0) {
        return Err(Error::Format(format!("psnr peak must be > 0, got {peak}")));
    }
    let mse: f64 = reference
        .data()
        .iter()
        .zip(test.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / reference.len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / mse).log10())
}

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_K1: f64 = 0.01;
const SSIM_K2: f64 = 0.03;

/// Mean structural similarity over all fully interior 11x11 windows,
/// Gaussian-weighted (sigma 1.5), with the usual stabilizers
/// C1 = (K1 peak)^2, C2 = (K2 peak)^2.
pub fn ssim(reference: &CoeffGrid, test: &CoeffGrid, peak: f64) -> Result<f64> {
    if reference.rows() != test.rows() || reference.cols() != test.cols() {
        return Err(Error::DimensionMismatch {
            stage: "ssim",
            expected: reference.len(),
            got: test.len(),
        });
    }
    if reference.rows() < SSIM_WINDOW || reference.cols() < SSIM_WINDOW {
        return Err(Error::GridTooSmall {
            stage: "ssim",
            rows: reference.rows(),
            cols: reference.cols(),
            min: SSIM_WINDOW,
        });
    }
    if !(peak > 0.0) {
        return Err(Error::Format(format!("ssim peak must be > 0, got {peak}")));
    }

    let w = gaussian_window();
    let c1 = (SSIM_K1 * peak) * (SSIM_K1 * peak);
    let c2 = (SSIM_K2 * peak) * (SSIM_K2 * peak);

    // Weighted local moments via two separable passes each.
    let mu_x = sep_filter_valid(reference, &w);
    let mu_y = sep_filter_valid(test, &w);
    let xx = sep_filter_valid(&hadamard_sq(reference, reference), &w);
    let yy = sep_filter_valid(&hadamard_sq(test, test), &w);
    let xy = sep_filter_valid(&hadamard_sq(reference, test), &w);

    let mut acc = 0.0;
    for i in 0..mu_x.rows() {
        for j in 0..mu_x.cols() {
            let mx = mu_x[(i, j)];
            let my = mu_y[(i, j)];
            let vx = xx[(i, j)] - mx * mx;
            let vy = yy[(i, j)] - my * my;
            let cxy = xy[(i, j)] - mx * my;
            let num = (2.0 * mx * my + c1) * (2.0 * cxy + c2);
            let den = (mx * mx + my * my + c1) * (vx + vy + c2);
            acc += num / den;
        }
    }
    Ok(acc / (mu_x.rows() * mu_x.cols()) as f64)
}

fn gaussian_window() -> Vec<f64> {
    let half = (SSIM_WINDOW / 2) as i64;
    let mut w: Vec<f64> = (-half..=half)
        .map(|i| (-(i * i) as f64 / (2.0 * SSIM_SIGMA * SSIM_SIGMA)).exp())
        .collect();
    let sum: f64 = w.iter().sum();
    for v in &mut w {
        *v /= sum;
    }
    w
}

fn hadamard_sq(a: &CoeffGrid, b: &CoeffGrid) -> CoeffGrid {
    CoeffGrid::from_fn(a.rows(), a.cols(), |r, c| a[(r, c)] * b[(r, c)])
}

/// Valid-region separable correlation with a symmetric 1D window.
fn sep_filter_valid(g: &CoeffGrid, w: &[f64]) -> CoeffGrid {
    let k = w.len();
    let pass = |g: &CoeffGrid| -> CoeffGrid {
        let out_cols = g.cols() - (k - 1);
        let mut out = CoeffGrid::zeros(g.rows(), out_cols);
        for r in 0..g.rows() {
            let row = g.row(r);
            for c in 0..out_cols {
                let mut acc = 0.0;
                for (j, wj) in w.iter().enumerate() {
                    acc += wj * row[c + j];
                }
                out[(r, c)] = acc;
            }
        }
        out
    };
    let h = pass(g);
    pass(&h.transposed()).transposed()
}
